// ldh command-line driver: train, hide, reveal, attack, evaluate, rate, synth.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ldh/checkpoint.hpp"
#include "ldh/dataset_io.hpp"
#include "ldh/distortions.hpp"
#include "ldh/embedding.hpp"
#include "ldh/evaluation.hpp"
#include "ldh/networks.hpp"
#include "ldh/training.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kConfigError = 2,
    kDataError = 3,
    kNoRegions = 4,
};

class NoRegionsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Common {
    std::optional<std::uint64_t> seed;
    std::string out = "out";
};

std::uint64_t env_seed()
{
    const char* s = std::getenv("LDH_SEED");
    if (!s || !*s) {
        return 0;
    }
    try {
        std::size_t used = 0;
        const auto v = std::stoull(s, &used, 0);
        if (used != std::string(s).size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ldh::ConfigError(std::string("LDH_SEED is not an unsigned integer: ") + s);
    }
}

std::uint64_t resolve_seed(const Common& c)
{
    return c.seed ? *c.seed : env_seed();
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << text)) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void write_manifest_json(const fs::path& dir, ordered_json manifest)
{
    ordered_json doc;
    doc["ldh_version"] = LDH_VERSION;
    for (auto& [k, v] : manifest.items()) {
        doc[k] = v;
    }
    write_text(dir / "manifest.json", doc.dump(2) + "\n");
}

fs::path prepare_out(const std::string& out)
{
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

ldh::Image load_exact(const fs::path& path, int side, const char* what)
{
    ldh::Image img = ldh::load_image(path);
    if (img.height() != side || img.width() != side) {
        throw ldh::DataError(std::string(what) + " " + path.string() + " is "
                             + std::to_string(img.height()) + "x" + std::to_string(img.width())
                             + ", checkpoint expects " + std::to_string(side) + "x"
                             + std::to_string(side));
    }
    return img;
}

ldh::Models load_models(const std::string& path)
{
    return ldh::restore_models(ldh::load_checkpoint(path));
}

// "cmd {in} {out}": the revealed image is written to {in}, the command runs
// through the shell and its {out} is read back.
ldh::RestorationHook make_restoration(const std::string& command, const fs::path& work_dir)
{
    if (command.empty()) {
        return {};
    }
    if (command.find("{in}") == std::string::npos || command.find("{out}") == std::string::npos) {
        throw ldh::ConfigError("--restoration needs both {in} and {out} placeholders");
    }
    return [command, work_dir](const ldh::Image& img) {
        const fs::path in = work_dir / ".restore_in.png";
        const fs::path out = work_dir / ".restore_out.png";
        ldh::save_image(img, in);
        std::error_code ec;
        fs::remove(out, ec);
        std::string cmd = command;
        for (const auto& [key, path] : {std::pair{std::string("{in}"), in}, std::pair{std::string("{out}"), out}}) {
            const std::string quoted = "'" + path.string() + "'";
            for (auto pos = cmd.find(key); pos != std::string::npos; pos = cmd.find(key, pos + quoted.size())) {
                cmd.replace(pos, key.size(), quoted);
            }
        }
        if (std::system(cmd.c_str()) != 0) {
            throw std::runtime_error("restoration command failed: " + cmd);
        }
        ldh::Image restored = ldh::load_image(out);
        fs::remove(in, ec);
        fs::remove(out, ec);
        if (restored.height() != img.height() || restored.width() != img.width()) {
            throw ldh::DataError("restoration changed the image size");
        }
        return restored;
    };
}

std::vector<ldh::Region> load_regions(const std::string& path)
{
    try {
        return ldh::read_regions(path);
    } catch (const std::exception& e) {
        throw ldh::DataError(e.what());
    }
}

std::vector<std::string> region_lines(const std::vector<ldh::Region>& regions)
{
    std::vector<std::string> out;
    for (const auto& r : regions) {
        out.push_back(std::to_string(r.top) + " " + std::to_string(r.left) + " "
                      + std::to_string(r.side));
    }
    return out;
}

// train ---------------------------------------------------------------------

struct TrainArgs {
    std::string config;
    std::string manifest;
    std::string distortion;
    std::vector<std::string> noise;
    bool resume = false;
};

int cmd_train(const Common& common, const TrainArgs& args)
{
    std::ifstream in(args.config);
    if (!in) {
        throw ldh::ConfigError("cannot open config " + args.config);
    }
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ldh::TrainConfig config = ldh::parse_train_config(text);

    // Seed precedence: --seed, then training.seed in the file, then LDH_SEED.
    const auto raw = nlohmann::json::parse(text);
    const bool file_seed = raw.contains("training") && raw["training"].contains("seed");
    if (common.seed) {
        config.schedule.seed = *common.seed;
    } else if (!file_seed) {
        config.schedule.seed = env_seed();
    }
    if (!args.manifest.empty()) {
        config.manifest = args.manifest;
    }
    if (!args.distortion.empty()) {
        config.distortion = ldh::parse_distortion_mode(args.distortion);
    }
    if (!args.noise.empty()) {
        config.layers.clear();
        for (const auto& s : args.noise) {
            config.layers.push_back(ldh::DistortionSpec::parse(s));
        }
    }
    if (config.manifest.empty()) {
        throw ldh::ConfigError("no dataset manifest given (data.manifest or --manifest)");
    }
    fs::path manifest(config.manifest);
    if (manifest.is_relative() && args.manifest.empty()) {
        manifest = fs::path(args.config).parent_path() / manifest;
    }
    config.validate();

    const fs::path dir = prepare_out(common.out);
    write_manifest_json(dir, {{"command", "train"},
                              {"config", nlohmann::ordered_json::parse(ldh::to_json(config))},
                              {"resume", args.resume}});

    const auto split = ldh::split_dataset(ldh::read_manifest(manifest), config.schedule.seed, config.split);
    const int side = config.network.image_side;
    const auto train_images = ldh::load_images(split.train, side);
    const auto val_images = ldh::load_images(split.val, side);
    if (train_images.empty()) {
        throw ldh::DataError("training split is empty");
    }

    ldh::TrainOptions options;
    options.out_dir = dir;
    options.resume = args.resume;
    options.on_epoch = [](const ldh::EpochRecord& r) {
        std::printf("epoch %3d %-8s loss %.5f stego %.2f dB revealed %.2f dB iou %.3f\n", r.epoch,
                    ldh::to_string(r.phase).c_str(), r.loss.total, r.stego_psnr, r.secret_psnr, r.iou);
        std::fflush(stdout);
    };
    const auto result = ldh::train(config, train_images, val_images, options);
    std::printf("trained %llu steps; checkpoint %s\n", static_cast<unsigned long long>(result.steps),
                (dir / "checkpoint.ldh").string().c_str());
    return kOk;
}

// hide ----------------------------------------------------------------------

struct HideArgs {
    std::string checkpoint;
    std::string cover;
    std::vector<std::string> secrets;
    std::string placement = "grid";
    std::string regions;
};

int cmd_hide(const Common& common, const HideArgs& args)
{
    const ldh::Models models = load_models(args.checkpoint);
    const ldh::NetworkConfig& cfg = models.config;
    const int n = static_cast<int>(args.secrets.size());
    if (n > cfg.omega * cfg.omega) {
        throw ldh::ConfigError("at most omega^2 = " + std::to_string(cfg.omega * cfg.omega)
                               + " secrets fit in one cover");
    }
    const ldh::Image cover = load_exact(args.cover, cfg.image_side, "cover");
    std::vector<ldh::Image> secrets;
    for (const auto& s : args.secrets) {
        secrets.push_back(load_exact(s, cfg.image_side, "secret"));
    }

    const std::uint64_t seed = resolve_seed(common);
    std::vector<ldh::Region> regions;
    if (args.placement == "explicit") {
        if (args.regions.empty()) {
            throw ldh::ConfigError("explicit placement needs --regions");
        }
        regions = load_regions(args.regions);
        if (static_cast<int>(regions.size()) != n) {
            throw ldh::ConfigError("region file lists " + std::to_string(regions.size())
                                   + " regions for " + std::to_string(n) + " secrets");
        }
        (void)ldh::make_ground_truth_map(regions, cfg.image_side);
    } else {
        ldh::Rng rng(seed);
        regions = ldh::sample_regions(n, cfg.image_side, cfg.omega, rng,
                                      ldh::parse_placement_mode(args.placement), &cover);
    }

    ldh::Image stego = cover;
    for (int k = 0; k < n; ++k) {
        const auto code = ldh::forward_hide(models.hide, secrets[static_cast<std::size_t>(k)]);
        stego = ldh::local_add(stego, code, regions[static_cast<std::size_t>(k)]);
    }

    const fs::path dir = prepare_out(common.out);
    ldh::save_image(stego, dir / "stego.png");
    ldh::write_regions(dir / "regions.txt", regions);
    const double bpp = ldh::bits_per_pixel(n);
    write_manifest_json(dir, {{"command", "hide"},
                              {"checkpoint", args.checkpoint},
                              {"cover", args.cover},
                              {"secrets", args.secrets},
                              {"placement", args.placement},
                              {"regions_file", args.regions},
                              {"seed", seed},
                              {"omega", cfg.omega},
                              {"regions", region_lines(regions)},
                              {"bpp", bpp}});
    std::printf("hid %d secret(s) at %g bpp into %s\n", n, bpp, (dir / "stego.png").string().c_str());
    return kOk;
}

// reveal --------------------------------------------------------------------

struct RevealArgs {
    std::string checkpoint;
    std::string stego;
    std::string regions;
    std::string restoration;
    double threshold = 0.5;
};

int cmd_reveal(const Common& common, const RevealArgs& args)
{
    const ldh::Models models = load_models(args.checkpoint);
    const ldh::NetworkConfig& cfg = models.config;
    const ldh::Image stego = load_exact(args.stego, cfg.image_side, "stego");
    const fs::path dir = prepare_out(common.out);

    std::vector<ldh::Region> regions;
    ldh::LocationMap hard;
    if (!args.regions.empty()) {
        regions = load_regions(args.regions);
        for (const auto& r : regions) {
            if (r.side != cfg.code_side()) {
                throw ldh::ConfigError("region side " + std::to_string(r.side) + " differs from code side "
                                       + std::to_string(cfg.code_side()));
            }
        }
        hard = ldh::make_ground_truth_map(regions, cfg.image_side);
    } else {
        const ldh::LocationMap soft = ldh::forward_locate(models.locate, stego);
        hard = soft.thresholded(args.threshold);
        regions = ldh::extract_regions(soft, cfg.omega, args.threshold);
    }
    ldh::save_map(hard, dir / "location_map.png");
    ldh::write_regions(dir / "regions.txt", regions);

    const auto restore = make_restoration(args.restoration, dir);
    std::vector<std::string> outputs;
    for (std::size_t k = 0; k < regions.size(); ++k) {
        ldh::Image revealed = ldh::forward_reveal(models.reveal, ldh::crop(stego, regions[k]));
        if (restore) {
            revealed = restore(revealed);
        }
        const std::string name = "revealed_" + std::to_string(k) + ".png";
        ldh::save_image(revealed, dir / name);
        outputs.push_back(name);
    }
    write_manifest_json(dir, {{"command", "reveal"},
                              {"checkpoint", args.checkpoint},
                              {"stego", args.stego},
                              {"regions_file", args.regions},
                              {"located", args.regions.empty()},
                              {"threshold", args.threshold},
                              {"restoration", args.restoration},
                              {"regions", region_lines(regions)},
                              {"outputs", outputs}});
    if (regions.empty()) {
        throw NoRegionsError("no regions detected in " + args.stego);
    }
    std::printf("revealed %zu secret(s) into %s\n", regions.size(), dir.string().c_str());
    return kOk;
}

// attack --------------------------------------------------------------------

struct AttackArgs {
    std::string stego;
    std::string cover;
    std::string attack;
};

int cmd_attack(const Common& common, const AttackArgs& args)
{
    const auto spec = ldh::DistortionSpec::parse(args.attack);
    const ldh::Image stego = ldh::load_image(args.stego);
    const bool needs_cover = spec.kind == ldh::DistortionKind::dropout
                          || spec.kind == ldh::DistortionKind::cropout;
    ldh::Image cover;
    if (needs_cover) {
        if (args.cover.empty()) {
            throw ldh::ConfigError(ldh::to_string(spec.kind) + " needs --cover");
        }
        cover = load_exact(args.cover, stego.height(), "cover");
    } else if (!args.cover.empty()) {
        cover = load_exact(args.cover, stego.height(), "cover");
    } else {
        cover = stego;
    }
    const std::uint64_t seed = resolve_seed(common);
    ldh::Rng rng(seed);
    const ldh::Image attacked = ldh::apply_attack(spec, stego, cover, rng);

    const fs::path dir = prepare_out(common.out);
    ldh::save_image(attacked, dir / "attacked.png");
    write_manifest_json(dir, {{"command", "attack"},
                              {"stego", args.stego},
                              {"cover", args.cover},
                              {"attack", spec.str()},
                              {"seed", seed}});
    std::printf("applied %s -> %s\n", spec.str().c_str(), (dir / "attacked.png").string().c_str());
    return kOk;
}

// evaluate / rate -----------------------------------------------------------

struct EvalArgs {
    std::string checkpoint;
    std::string manifest;
    int limit = 0;
    int n_secrets = 1;
    std::vector<std::string> attacks;
    std::string placement = "grid";
    bool ground_truth_crops = false;
    bool no_quantize = false;
    std::string restoration;
    double threshold = 0.5;
    std::vector<double> thresholds{26.0, 32.0};
    int max_secrets = 0;
};

std::vector<ldh::Image> load_eval_images(const EvalArgs& args, int side)
{
    auto paths = ldh::read_manifest(args.manifest);
    if (args.limit > 0 && paths.size() > static_cast<std::size_t>(args.limit)) {
        paths.resize(static_cast<std::size_t>(args.limit));
    }
    if (paths.empty()) {
        throw ldh::DataError("manifest lists no images: " + args.manifest);
    }
    return ldh::load_images(paths, side);
}

template <class Fn>
void write_report(const fs::path& path, Fn&& fn)
{
    std::ostringstream os;
    fn(os);
    write_text(path, os.str());
}

int cmd_evaluate(const Common& common, const EvalArgs& args)
{
    const ldh::Models models = load_models(args.checkpoint);
    std::vector<ldh::DistortionSpec> attacks;
    for (const auto& a : args.attacks) {
        attacks.push_back(ldh::DistortionSpec::parse(a));
    }
    const fs::path dir = prepare_out(common.out);
    ldh::EvalOptions options;
    options.n_secrets = args.n_secrets;
    options.seed = resolve_seed(common);
    options.quantize = !args.no_quantize;
    options.ground_truth_crops = args.ground_truth_crops;
    options.placement = ldh::parse_placement_mode(args.placement);
    options.restoration = make_restoration(args.restoration, dir);
    options.threshold = args.threshold;
    if (options.n_secrets < 0 || options.n_secrets > models.config.omega * models.config.omega) {
        throw ldh::ConfigError("--secrets must lie in [0, omega^2]");
    }
    const auto images = load_eval_images(args, models.config.image_side);

    ordered_json attack_list = ordered_json::array();
    for (const auto& a : attacks) {
        attack_list.push_back(a.str());
    }
    write_manifest_json(dir, {{"command", "evaluate"},
                              {"checkpoint", args.checkpoint},
                              {"manifest", args.manifest},
                              {"limit", args.limit},
                              {"images", images.size()},
                              {"secrets", args.n_secrets},
                              {"seed", options.seed},
                              {"quantize", options.quantize},
                              {"ground_truth_crops", options.ground_truth_crops},
                              {"placement", args.placement},
                              {"threshold", args.threshold},
                              {"attacks", attack_list},
                              {"restoration", args.restoration}});

    const auto rows = ldh::evaluate_robustness(models, images, attacks, options);
    const auto& clean = rows.front().result;
    write_report(dir / "quality.csv", [&](std::ostream& os) { ldh::write_quality_report(os, clean); });
    write_report(dir / "locating.csv", [&](std::ostream& os) { ldh::write_locating_report(os, clean); });
    write_report(dir / "slots.csv", [&](std::ostream& os) { ldh::write_slot_report(os, clean); });
    write_report(dir / "robustness.csv", [&](std::ostream& os) { ldh::write_robustness_report(os, rows); });

    std::vector<std::vector<std::string>> table;
    for (const auto& row : rows) {
        const auto& r = row.result;
        table.push_back({row.attack, ldh::format_metric(r.stego.psnr), ldh::format_metric(r.revealed.psnr),
                         ldh::format_metric(r.iou), ldh::format_metric(r.failure_rate())});
    }
    std::cout << ldh::render_table({"attack", "stego_psnr", "revealed_psnr", "iou", "failure_rate"}, table);
    return kOk;
}

int cmd_rate(const Common& common, const EvalArgs& args)
{
    const ldh::Models models = load_models(args.checkpoint);
    const fs::path dir = prepare_out(common.out);
    ldh::RateAnalysisConfig config;
    config.thresholds_db = args.thresholds;
    config.max_secrets = args.max_secrets;
    config.restoration = make_restoration(args.restoration, dir);
    config.quantize = !args.no_quantize;
    config.ground_truth_crops = args.ground_truth_crops;
    config.seed = resolve_seed(common);
    config.validate(models.config.omega);
    const auto images = load_eval_images(args, models.config.image_side);

    const int max_n = config.max_secrets ? config.max_secrets : models.config.omega * models.config.omega;
    write_manifest_json(dir, {{"command", "rate"},
                              {"checkpoint", args.checkpoint},
                              {"manifest", args.manifest},
                              {"limit", args.limit},
                              {"images", images.size()},
                              {"thresholds_db", config.thresholds_db},
                              {"max_secrets", max_n},
                              {"seed", config.seed},
                              {"quantize", config.quantize},
                              {"ground_truth_crops", config.ground_truth_crops},
                              {"restoration", args.restoration}});

    const auto result = ldh::max_embedding_rate(models, images, config);
    write_report(dir / "rate.csv", [&](std::ostream& os) { ldh::write_rate_report(os, result); });
    write_report(dir / "rate_sweep.csv", [&](std::ostream& os) { ldh::write_rate_sweep(os, result); });

    std::vector<std::vector<std::string>> table;
    for (std::size_t i = 0; i < result.thresholds_db.size(); ++i) {
        table.push_back({ldh::format_metric(result.thresholds_db[i]), std::to_string(result.max_secrets[i]),
                         ldh::format_metric(result.bpp[i])});
    }
    std::cout << ldh::render_table({"threshold_db", "max_secrets", "bpp"}, table);
    return kOk;
}

// synth ---------------------------------------------------------------------

struct SynthArgs {
    int count = 100;
    int side = 64;
};

int cmd_synth(const Common& common, const SynthArgs& args)
{
    if (args.count < 1 || args.side < 1) {
        throw ldh::ConfigError("--count and --side must be positive");
    }
    const std::uint64_t seed = resolve_seed(common);
    const fs::path dir = prepare_out(common.out);
    const auto manifest = ldh::write_synthetic_dataset(dir, args.count, args.side, seed);
    write_manifest_json(dir, {{"command", "synth"}, {"count", args.count}, {"side", args.side}, {"seed", seed}});
    std::printf("wrote %d images, list in %s\n", args.count, manifest.string().c_str());
    return kOk;
}

void add_common(CLI::App* cmd, Common& common, const char* out_help)
{
    cmd->add_option("--seed", common.seed, "RNG seed (falls back to LDH_SEED, then 0)");
    cmd->add_option("--out", common.out, out_help)->capture_default_str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Local deep hiding: hide full-size images in small regions of a cover"};
    app.set_version_flag("--version", LDH_VERSION);
    app.require_subcommand(1);

    Common common;

    TrainArgs train;
    auto* c_train = app.add_subcommand("train", "Train H, P and R (pre-train then co-train)");
    add_common(c_train, common, "run directory (checkpoint.ldh, history.csv)");
    c_train->add_option("--config", train.config, "JSON run configuration")->required();
    c_train->add_option("--manifest", train.manifest, "dataset list overriding data.manifest");
    c_train->add_option("--distortion", train.distortion, "none | specialized | combined");
    c_train->add_option("--noise", train.noise, "noise layer spec, repeatable (e.g. jpeg:q=80)");
    c_train->add_flag("--resume", train.resume, "continue from <out>/checkpoint.ldh");

    HideArgs hide;
    auto* c_hide = app.add_subcommand("hide", "Embed secrets into a cover");
    add_common(c_hide, common, "output directory (stego.png, regions.txt)");
    c_hide->add_option("--checkpoint", hide.checkpoint)->required();
    c_hide->add_option("--cover", hide.cover)->required();
    c_hide->add_option("--secret", hide.secrets, "secret image, repeatable")->required();
    c_hide->add_option("--placement", hide.placement, "random | grid | texture | explicit")
        ->check(CLI::IsMember({"random", "grid", "texture", "explicit"}))
        ->capture_default_str();
    c_hide->add_option("--regions", hide.regions, "region file for explicit placement");

    RevealArgs reveal;
    auto* c_reveal = app.add_subcommand("reveal", "Locate and reveal the secrets in a stego image");
    add_common(c_reveal, common, "output directory (revealed_<k>.png, regions.txt, location_map.png)");
    c_reveal->add_option("--checkpoint", reveal.checkpoint)->required();
    c_reveal->add_option("--stego", reveal.stego)->required();
    c_reveal->add_option("--regions", reveal.regions, "skip locating and crop these regions")
        ;
    c_reveal->add_option("--restoration", reveal.restoration, "post-processing command \"cmd {in} {out}\"");
    c_reveal->add_option("--threshold", reveal.threshold, "location map threshold")->capture_default_str();

    AttackArgs attack;
    auto* c_attack = app.add_subcommand("attack", "Apply an evaluation-time distortion");
    add_common(c_attack, common, "output directory (attacked.png)");
    c_attack->add_option("--stego", attack.stego)->required();
    c_attack->add_option("--cover", attack.cover, "cover image (dropout, cropout)");
    c_attack->add_option("--attack", attack.attack, "e.g. jpeg:q=80, crop:blocks=3,7, cropout:n=2")->required();

    EvalArgs eval;
    auto* c_eval = app.add_subcommand("evaluate", "Quality, locating and robustness reports");
    add_common(c_eval, common, "report directory");
    EvalArgs rate;
    auto* c_rate = app.add_subcommand("rate", "Maximum embedding rate per PSNR threshold");
    add_common(c_rate, common, "report directory");
    for (auto [cmd, a] : {std::pair{c_eval, &eval}, std::pair{c_rate, &rate}}) {
        cmd->add_option("--checkpoint", a->checkpoint)->required();
        cmd->add_option("--manifest", a->manifest, "test image list")->required();
        cmd->add_option("--limit", a->limit, "use the first N images only");
        cmd->add_flag("--ground-truth-crops", a->ground_truth_crops, "crop true regions instead of locating");
        cmd->add_flag("--no-quantize", a->no_quantize, "skip the 8-bit round trip of stegos");
        cmd->add_option("--restoration", a->restoration, "post-processing command \"cmd {in} {out}\"");
    }
    c_eval->add_option("--secrets", eval.n_secrets, "secrets per cover")->capture_default_str();
    c_eval->add_option("--attack", eval.attacks, "attack spec, repeatable");
    c_eval->add_option("--placement", eval.placement, "random | grid | texture")
        ->check(CLI::IsMember({"random", "grid", "texture"}))
        ->capture_default_str();
    c_eval->add_option("--threshold", eval.threshold, "location map threshold")->capture_default_str();
    c_rate->add_option("--thresholds", rate.thresholds, "PSNR thresholds in dB")
        ->delimiter(',')
        ->capture_default_str();
    c_rate->add_option("--max-secrets", rate.max_secrets, "sweep bound, 0 for omega^2");

    SynthArgs synth;
    auto* c_synth = app.add_subcommand("synth", "Write a procedural image dataset");
    add_common(c_synth, common, "dataset directory");
    c_synth->add_option("--count", synth.count)->capture_default_str();
    c_synth->add_option("--side", synth.side)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (c_train->parsed()) {
            return cmd_train(common, train);
        }
        if (c_hide->parsed()) {
            return cmd_hide(common, hide);
        }
        if (c_reveal->parsed()) {
            return cmd_reveal(common, reveal);
        }
        if (c_attack->parsed()) {
            return cmd_attack(common, attack);
        }
        if (c_eval->parsed()) {
            return cmd_evaluate(common, eval);
        }
        if (c_rate->parsed()) {
            return cmd_rate(common, rate);
        }
        return cmd_synth(common, synth);
    } catch (const NoRegionsError& e) {
        std::cerr << "ldh: " << e.what() << '\n';
        return kNoRegions;
    } catch (const ldh::DataError& e) {
        std::cerr << "ldh: data error: " << e.what() << '\n';
        return kDataError;
    } catch (const ldh::CheckpointError& e) {
        std::cerr << "ldh: data error: " << e.what() << '\n';
        return kDataError;
    } catch (const ldh::ShapeError& e) {
        std::cerr << "ldh: data error: " << e.what() << '\n';
        return kDataError;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "ldh: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument& e) {
        std::cerr << "ldh: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "ldh: " << e.what() << '\n';
        return kFailure;
    }
}
