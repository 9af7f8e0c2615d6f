#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <json.hpp>

#include "ldh/checkpoint.hpp"
#include "ldh/dataset_io.hpp"
#include "ldh/distortions.hpp"
#include "ldh/embedding.hpp"

using namespace ldh;
namespace fs = std::filesystem;

namespace {

const fs::path& work()
{
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("ldh_test_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args, const std::string& env = "")
{
    const std::string cmd = env + (env.empty() ? "" : " ") + "'" LDH_CLI_PATH "' " + args + " > '"
                            + (work() / "last.log").string() + "' 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// A tiny dataset and a trained tiny checkpoint shared by the tests.
struct Fixture {
    fs::path data;
    fs::path manifest;
    fs::path config;
    fs::path ckpt;

    Fixture()
    {
        data = work() / "data";
        manifest = write_synthetic_dataset(data, 12, 16, 3);
        config = work() / "tiny.json";
        std::ofstream(config) << R"({
  "network": {"omega": 2, "image_side": 16, "nhf": 8, "hiding_width": 4, "locating_width": 4, "unet_levels": 2},
  "training": {"pretrain_epochs": 1, "cotrain_epochs": 1, "batch_size": 4, "seed": 7},
  "data": {"manifest": "data/manifest.txt"}
})";
        const int rc = run("train --config " + q(config) + " --out " + q(work() / "train_a"));
        if (rc != 0) {
            throw std::runtime_error("fixture training failed: " + read_bytes(work() / "last.log"));
        }
        ckpt = work() / "train_a" / "checkpoint.ldh";
    }

    fs::path image(int i) const
    {
        char name[32];
        std::snprintf(name, sizeof name, "img_%05d.png", i);
        return data / name;
    }
};

const Fixture& fixture()
{
    static const Fixture f;
    return f;
}

} // namespace

TEST(Cli, TrainIsReproducibleAndEchoesConfig)
{
    const auto& f = fixture();
    ASSERT_EQ(run("train --config " + q(f.config) + " --out " + q(work() / "train_b")), 0);
    EXPECT_EQ(read_bytes(f.ckpt), read_bytes(work() / "train_b" / "checkpoint.ldh"));
    EXPECT_EQ(read_bytes(work() / "train_a" / "history.csv"), read_bytes(work() / "train_b" / "history.csv"));

    const auto manifest = nlohmann::json::parse(read_bytes(work() / "train_a" / "manifest.json"));
    EXPECT_EQ(manifest["config"]["training"]["lr"].get<double>(), 1e-3);
    EXPECT_EQ(manifest["config"]["training"]["seed"].get<int>(), 7);

    ASSERT_EQ(run("train --config " + q(f.config) + " --distortion combined --out " + q(work() / "train_c")), 0);
    const auto combined = nlohmann::json::parse(read_bytes(work() / "train_c" / "manifest.json"));
    EXPECT_EQ(combined["config"]["distortion"]["mode"], "combined");
    EXPECT_NE(read_bytes(f.ckpt), read_bytes(work() / "train_c" / "checkpoint.ldh"));
}

TEST(Cli, ExitCodes)
{
    const auto& f = fixture();
    EXPECT_EQ(run("--help"), 0);
    EXPECT_EQ(run("frobnicate"), 2);
    EXPECT_EQ(run("attack --stego " + q(f.image(0)) + " --attack blur:k=3 --out " + q(work() / "x")), 2);
    EXPECT_EQ(run("attack --stego " + q(work() / "nope.png") + " --attack jpeg:q=80 --out " + q(work() / "x")), 3);
    EXPECT_EQ(run("hide --checkpoint " + q(work() / "nope.ldh") + " --cover " + q(f.image(0)) + " --secret "
                  + q(f.image(1)) + " --out " + q(work() / "x")),
              3);
    std::string five;
    for (int i = 1; i <= 5; ++i) {
        five += " --secret " + q(f.image(i));
    }
    EXPECT_EQ(run("hide --checkpoint " + q(f.ckpt) + " --cover " + q(f.image(0)) + five + " --out "
                  + q(work() / "x")),
              2);

    const auto bad = work() / "bad.json";
    std::ofstream(bad) << R"({"training": {"epochs": 3}})";
    EXPECT_EQ(run("train --config " + q(bad) + " --out " + q(work() / "x")), 2);
    EXPECT_EQ(run("attack --stego " + q(f.image(0)) + " --attack jpeg:q=80", "LDH_SEED=banana"), 2);
}

TEST(Cli, RevealWithoutRegionsExitsFour)
{
    // An all-black stego gives the untrained-looking map nothing to find at a
    // threshold above every probability.
    const auto& f = fixture();
    const auto stego = work() / "black.png";
    save_image(Image(16, 16, 0.0), stego);
    EXPECT_EQ(run("reveal --checkpoint " + q(f.ckpt) + " --stego " + q(stego) + " --threshold 1.0 --out "
                  + q(work() / "r0")),
              4);
}

TEST(Cli, HideChangesOnlyTheEmbeddedRegion)
{
    const auto& f = fixture();
    const auto regions = work() / "explicit.txt";
    std::ofstream(regions) << "8 0 8\n";
    const auto out = work() / "hide_explicit";
    ASSERT_EQ(run("hide --checkpoint " + q(f.ckpt) + " --cover " + q(f.image(0)) + " --secret " + q(f.image(1))
                  + " --placement explicit --regions " + q(regions) + " --out " + q(out)),
              0);
    const Image cover = load_image(f.image(0));
    const Image stego = load_image(out / "stego.png");
    const Region r{8, 0, 8};
    int changed_inside = 0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                if (r.overlaps(Region{y, x, 1})) {
                    changed_inside += stego.at(c, y, x) != cover.at(c, y, x) ? 1 : 0;
                } else {
                    EXPECT_EQ(stego.at(c, y, x), cover.at(c, y, x));
                }
            }
        }
    }
    EXPECT_GT(changed_inside, 0);
    EXPECT_EQ(read_regions(out / "regions.txt"), std::vector<Region>{r});

    const auto shown = work() / "reveal_explicit";
    ASSERT_EQ(run("reveal --checkpoint " + q(f.ckpt) + " --stego " + q(out / "stego.png") + " --regions "
                  + q(out / "regions.txt") + " --out " + q(shown)),
              0);
    EXPECT_EQ(read_regions(shown / "regions.txt"), std::vector<Region>{r});
    EXPECT_TRUE(fs::exists(shown / "revealed_0.png"));
    EXPECT_EQ(load_image(shown / "revealed_0.png").height(), 16);

    std::ofstream(regions) << "8 0 8\n8 4 8\n";
    EXPECT_NE(run("hide --checkpoint " + q(f.ckpt) + " --cover " + q(f.image(0)) + " --secret " + q(f.image(1))
                  + " --secret " + q(f.image(2)) + " --placement explicit --regions " + q(regions) + " --out "
                  + q(work() / "x")),
              0);
}

TEST(Cli, SeedFallsBackToEnvironment)
{
    const auto& f = fixture();
    const std::string base = "hide --checkpoint " + q(f.ckpt) + " --cover " + q(f.image(0)) + " --secret "
                             + q(f.image(3)) + " --placement random";
    ASSERT_EQ(run(base + " --seed 11 --out " + q(work() / "s_flag")), 0);
    ASSERT_EQ(run(base + " --out " + q(work() / "s_env"), "LDH_SEED=11"), 0);
    EXPECT_EQ(read_bytes(work() / "s_flag" / "stego.png"), read_bytes(work() / "s_env" / "stego.png"));
    EXPECT_EQ(read_bytes(work() / "s_flag" / "regions.txt"), read_bytes(work() / "s_env" / "regions.txt"));
}

TEST(Cli, AttackMatchesLibrary)
{
    const auto& f = fixture();
    const std::string spec = "cropout:n=3";
    ASSERT_EQ(run("attack --stego " + q(f.image(4)) + " --cover " + q(f.image(5)) + " --attack " + spec
                  + " --seed 9 --out " + q(work() / "atk")),
              0);
    Rng rng(9);
    const Image expect = apply_attack(DistortionSpec::parse(spec), load_image(f.image(4)), load_image(f.image(5)), rng);
    EXPECT_EQ(load_image(work() / "atk" / "attacked.png"), quantize(expect));

    EXPECT_EQ(run("attack --stego " + q(f.image(4)) + " --attack dropout:p=0.5 --out " + q(work() / "x")), 2);
}

TEST(Cli, EvaluateAndRateWriteReports)
{
    const auto& f = fixture();
    const auto out = work() / "eval";
    ASSERT_EQ(run("evaluate --checkpoint " + q(f.ckpt) + " --manifest " + q(f.manifest)
                  + " --limit 6 --secrets 2 --attack jpeg:q=80 --attack crop:blocks=0 --out " + q(out)),
              0);
    for (const char* name : {"quality.csv", "locating.csv", "slots.csv", "robustness.csv", "manifest.json"}) {
        EXPECT_TRUE(fs::exists(out / name)) << name;
    }
    std::istringstream rob(read_bytes(out / "robustness.csv"));
    std::string line;
    int rows = 0;
    while (std::getline(rob, line)) {
        ++rows;
    }
    EXPECT_EQ(rows, 3);

    const auto rate = work() / "rate";
    ASSERT_EQ(run("rate --checkpoint " + q(f.ckpt) + " --manifest " + q(f.manifest)
                  + " --limit 6 --ground-truth-crops --thresholds 1,90 --out " + q(rate)),
              0);
    const std::string table = read_bytes(rate / "rate.csv");
    EXPECT_NE(table.find("96"), std::string::npos) << table;
    EXPECT_TRUE(fs::exists(rate / "rate_sweep.csv"));
}
