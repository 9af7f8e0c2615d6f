#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include <unistd.h>

#include <json.hpp>

#include "ldh/checkpoint.hpp"
#include "ldh/dataset_io.hpp"
#include "ldh/training.hpp"
#include "oracles.hpp"

using namespace ldh;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    const fs::path dir = fs::temp_directory_path() / ("ldh_test_train_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    return dir / name;
}

TrainConfig tiny_config()
{
    TrainConfig c;
    c.network.omega = 2;
    c.network.image_side = 16;
    c.network.nhf = 8;
    c.network.hiding_width = 4;
    c.network.locating_width = 4;
    c.network.unet_levels = 2;
    c.schedule.pretrain_epochs = 2;
    c.schedule.cotrain_epochs = 1;
    c.schedule.batch_size = 4;
    c.schedule.seed = 5;
    return c;
}

std::vector<Image> toy_images(int n, int side, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<Image> out;
    for (int i = 0; i < n; ++i) {
        out.push_back(synthesize_image(side, rng));
    }
    return out;
}

Tensor stack_images(const std::vector<Image>& imgs, std::size_t first, std::size_t count)
{
    std::vector<Image> part(imgs.begin() + static_cast<std::ptrdiff_t>(first),
                            imgs.begin() + static_cast<std::ptrdiff_t>(first + count));
    return batch_of<Image>(part);
}

std::string read_bytes(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST(Training, LearningRateScheduleRestartsPerPhase)
{
    TrainingSchedule s;
    EXPECT_DOUBLE_EQ(s.learning_rate(0), 1e-3);
    EXPECT_DOUBLE_EQ(s.learning_rate(29), 1e-3);
    EXPECT_DOUBLE_EQ(s.learning_rate(30), 1e-4);
    EXPECT_DOUBLE_EQ(s.learning_rate(59), 1e-4);
    EXPECT_EQ(s.phase_of(59), Phase::pretrain);
    EXPECT_EQ(s.phase_of(60), Phase::cotrain);
    EXPECT_EQ(s.phase_epoch(60), 0);
    EXPECT_EQ(s.weights(Phase::pretrain), kPretrainWeights);
    EXPECT_EQ(s.weights(Phase::cotrain), kCotrainWeights);
    EXPECT_EQ(s.total_epochs(), 90);
}

TEST(Training, ConfigDefaultsAndUnknownKeys)
{
    const TrainConfig c = parse_train_config("{}");
    EXPECT_EQ(c.schedule.lr0, 1e-3);
    EXPECT_EQ(c.schedule.pretrain_epochs, 60);
    EXPECT_EQ(c.schedule.cotrain_epochs, 30);
    EXPECT_EQ(c.distortion, DistortionMode::none);
    const auto echoed = nlohmann::json::parse(to_json(c));
    EXPECT_EQ(echoed["training"]["lr"].get<double>(), 1e-3);

    const TrainConfig d = parse_train_config(R"({"distortion":{"mode":"combined"},"training":{"lr":0.002}})");
    EXPECT_EQ(d.distortion, DistortionMode::combined);
    EXPECT_EQ(d.schedule.lr0, 0.002);
    EXPECT_EQ(nlohmann::json::parse(to_json(d))["distortion"]["mode"], "combined");
    EXPECT_EQ(parse_train_config(to_json(d)).schedule.lr0, 0.002);
    EXPECT_EQ(to_json(parse_train_config(to_json(d))), to_json(d));

    EXPECT_THROW(parse_train_config(R"({"training":{"lrr":1}})"), ConfigError);
    EXPECT_THROW(parse_train_config(R"({"bogus":{}})"), ConfigError);
    EXPECT_THROW(parse_train_config(R"({"network":{"omega":3}})"), ConfigError);
    EXPECT_THROW(parse_train_config(R"({"training":{"lr":"fast"}})"), ConfigError);
    EXPECT_THROW(parse_train_config("{"), ConfigError);
}

TEST(Training, PretrainLeavesLocatorUntouched)
{
    const TrainConfig cfg = tiny_config();
    Models models = init_params(cfg.network, 1);
    const auto before = models.locate.parameters();
    std::vector<Tensor> snapshot;
    for (const auto& p : before) {
        snapshot.push_back(p.var.value());
    }
    const auto imgs = toy_images(8, 16, 2);
    Adam adam;
    Rng rng(3);
    const auto m = train_step(models, adam, stack_images(imgs, 0, 4), stack_images(imgs, 4, 4), Phase::pretrain,
                              cfg.schedule, nullptr, rng, 1e-3);
    EXPECT_EQ(m.locating, 0.0);
    const auto after = models.locate.parameters();
    for (std::size_t i = 0; i < after.size(); ++i) {
        EXPECT_EQ(after[i].var.value(), snapshot[i]);
        EXPECT_TRUE(after[i].var.grad().empty());
    }
    EXPECT_EQ(adam.steps("locate.conv0.weight"), 0u);
    EXPECT_EQ(adam.steps("hide.head.weight"), 1u);

    train_step(models, adam, stack_images(imgs, 0, 4), stack_images(imgs, 4, 4), Phase::cotrain, cfg.schedule,
               nullptr, rng, 1e-3);
    EXPECT_EQ(adam.steps("locate.conv0.weight"), 1u);
}

TEST(Training, StepsAreDeterministic)
{
    const TrainConfig cfg = tiny_config();
    const auto imgs = toy_images(8, 16, 4);
    auto run = [&] {
        Models models = init_params(cfg.network, 7);
        Adam adam;
        Rng rng(8);
        const auto noise = DistortionSpec::parse("dropout:p=0.3");
        for (int i = 0; i < 5; ++i) {
            train_step(models, adam, stack_images(imgs, 0, 4), stack_images(imgs, 4, 4), Phase::cotrain,
                       cfg.schedule, &noise, rng, 1e-3);
        }
        return models;
    };
    const Models a = run();
    const Models b = run();
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(pa[i].var.value(), pb[i].var.value());
    }
}

TEST(Training, LossDecreasesOnToySet)
{
    TrainConfig cfg = tiny_config();
    const auto imgs = toy_images(16, 16, 6);
    Models models = init_params(cfg.network, 9);
    Adam adam;
    Rng rng(10);
    double first = 0.0;
    double last = 0.0;
    for (int step = 0; step < 50; ++step) {
        const std::size_t b = static_cast<std::size_t>(step % 2) * 8;
        const auto m = train_step(models, adam, stack_images(imgs, b, 4), stack_images(imgs, b + 4, 4),
                                  Phase::pretrain, cfg.schedule, nullptr, rng, 1e-3);
        if (step == 0) {
            first = m.total;
        }
        last = m.total;
    }
    EXPECT_LT(last, first);
}

TEST(Training, PlaceBatchGivesDisjointRegionsPerCover)
{
    Rng rng(1);
    const auto placements = place_batch(3, 4, 32, 2, rng);
    ASSERT_EQ(placements.size(), 12u);
    for (std::size_t i = 0; i < placements.size(); ++i) {
        EXPECT_EQ(placements[i].sample, static_cast<int>(i / 4));
        for (std::size_t j = i + 1; j < placements.size(); ++j) {
            if (placements[i].sample == placements[j].sample) {
                EXPECT_FALSE(placements[i].region.overlaps(placements[j].region));
            }
        }
    }
}

TEST(Training, HistoryAndResume)
{
    const TrainConfig cfg = tiny_config();
    const auto train_imgs = toy_images(8, 16, 11);
    const auto val_imgs = toy_images(2, 16, 12);

    TrainOptions full;
    full.out_dir = scratch("full");
    const auto result = train(cfg, train_imgs, val_imgs, full);
    ASSERT_EQ(result.history.size(), 3u);
    EXPECT_EQ(result.history[0].phase, Phase::pretrain);
    EXPECT_EQ(result.history[2].phase, Phase::cotrain);
    EXPECT_EQ(result.steps, 6u);
    const auto history = read_history(full.out_dir / "history.csv");
    ASSERT_EQ(history.size(), 3u);
    EXPECT_EQ(history[1].loss.total, result.history[1].loss.total);
    EXPECT_EQ(history[2].secret_psnr, result.history[2].secret_psnr);

    // Interrupt after the first epoch, then resume.
    TrainOptions cut;
    cut.out_dir = scratch("resumed");
    cut.on_epoch = [](const EpochRecord& r) {
        if (r.epoch == 0) {
            throw std::runtime_error("stop");
        }
    };
    EXPECT_THROW(train(cfg, train_imgs, val_imgs, cut), std::runtime_error);
    TrainOptions resume;
    resume.out_dir = cut.out_dir;
    resume.resume = true;
    const auto resumed = train(cfg, train_imgs, val_imgs, resume);
    EXPECT_EQ(resumed.steps, 6u);
    EXPECT_EQ(read_bytes(full.out_dir / "checkpoint.ldh"), read_bytes(cut.out_dir / "checkpoint.ldh"));
    EXPECT_EQ(read_bytes(full.out_dir / "history.csv"), read_bytes(cut.out_dir / "history.csv"));

    TrainConfig other = cfg;
    other.schedule.lr0 = 5e-4;
    EXPECT_THROW(train(other, train_imgs, val_imgs, resume), ConfigError);
}

TEST(Training, CombinedModeRunsAllLayers)
{
    TrainConfig cfg = tiny_config();
    cfg.distortion = DistortionMode::combined;
    cfg.schedule.pretrain_epochs = 1;
    cfg.schedule.cotrain_epochs = 1;
    const auto result = train(cfg, toy_images(12, 16, 13), {});
    EXPECT_EQ(result.history.size(), 2u);
    EXPECT_EQ(result.steps, 6u);
}
