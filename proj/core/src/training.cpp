#include "ldh/training.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json_io.hpp"
#include "ldh/checkpoint.hpp"
#include "ldh/evaluation.hpp"
#include "ldh/ops.hpp"

namespace ldh {
namespace {

using detail::json;

constexpr std::uint64_t kOrderStream = 0x1000;
constexpr std::uint64_t kStepStream = 0x2000;
constexpr std::uint64_t kValidationStream = 0x56414c;

json weights_json(const LossWeights& w)
{
    return json::array({w.lambda1, w.lambda2, w.lambda3});
}

LossWeights weights_from(const json& j, const char* key)
{
    std::vector<double> v;
    detail::read_field(j, key, v);
    if (v.size() != 3) {
        throw ConfigError(std::string(key) + " must list three weights");
    }
    return LossWeights{v[0], v[1], v[2]};
}

Tensor gather(const std::vector<Image>& images, const std::vector<std::size_t>& ids)
{
    std::vector<Image> picked;
    picked.reserve(ids.size());
    for (std::size_t id : ids) {
        picked.push_back(images[id]);
    }
    return batch_of<Image>(picked);
}

void save_state(const std::filesystem::path& dir, const TrainConfig& config, const Models& models,
                const Adam& adam, int epochs_done, std::uint64_t steps, const Rng& rng)
{
    Checkpoint ckpt;
    ckpt.config_json = to_json(config);
    ckpt.step = steps;
    ckpt.epoch = epochs_done;
    ckpt.rng_state = rng.state();
    store_parameters(ckpt, models);
    for (auto& [name, t] : adam.state()) {
        ckpt.tensors.insert_or_assign(name, t);
    }
    save_checkpoint(ckpt, dir / "checkpoint.ldh");
}

} // namespace

std::string to_string(Phase phase)
{
    return phase == Phase::pretrain ? "pretrain" : "cotrain";
}

std::string to_string(DistortionMode mode)
{
    switch (mode) {
    case DistortionMode::none:
        return "none";
    case DistortionMode::specialized:
        return "specialized";
    case DistortionMode::combined:
        return "combined";
    }
    return "?";
}

DistortionMode parse_distortion_mode(const std::string& s)
{
    if (s == "none") {
        return DistortionMode::none;
    }
    if (s == "specialized") {
        return DistortionMode::specialized;
    }
    if (s == "combined") {
        return DistortionMode::combined;
    }
    throw ConfigError("unknown distortion mode '" + s + "' (none|specialized|combined)");
}

void TrainingSchedule::validate() const
{
    if (pretrain_epochs < 0 || cotrain_epochs < 0) {
        throw ConfigError("epoch counts must be non-negative");
    }
    try {
        pretrain_weights.validate();
        cotrain_weights.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (pretrain_weights.lambda2 != 0.0) {
        throw ConfigError("pretrain lambda2 must be 0: P is not trained in the first phase");
    }
    if (orders.hiding < 1.0 || orders.locating < 1.0 || orders.revealing < 1.0) {
        throw ConfigError("loss norm orders must be >= 1");
    }
    if (!(lr0 > 0.0) || !(decay > 0.0 && decay <= 1.0) || decay_every < 1) {
        throw ConfigError("learning rate schedule must have lr > 0, decay in (0,1], period >= 1");
    }
    if (batch_size < 1 || secrets_per_cover < 1) {
        throw ConfigError("batch_size and secrets_per_cover must be >= 1");
    }
}

double TrainingSchedule::learning_rate(int phase_epoch) const
{
    return lr0 * std::pow(decay, static_cast<double>(phase_epoch / decay_every));
}

void TrainConfig::validate() const
{
    network.validate();
    schedule.validate();
    if (schedule.secrets_per_cover > network.omega * network.omega) {
        throw ConfigError("secrets_per_cover exceeds omega^2");
    }
    if (distortion != DistortionMode::none && layers.empty()) {
        throw ConfigError("distortion mode needs at least one noise layer");
    }
    for (const auto& l : layers) {
        if (l.kind == DistortionKind::crop || l.kind == DistortionKind::cropout) {
            throw ConfigError("crop attacks cannot be used as noise layers");
        }
        try {
            l.validate();
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    const double sum = split[0] + split[1] + split[2];
    if (std::abs(sum - 1.0) > 1e-9 || split[0] < 0 || split[1] < 0 || split[2] < 0) {
        throw ConfigError("split ratios must be non-negative and sum to 1");
    }
    if (val_limit < 0) {
        throw ConfigError("val_limit must be >= 0");
    }
}

TrainConfig parse_train_config(const std::string& json_text)
{
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    detail::reject_unknown(root, {"network", "training", "distortion", "data"}, "config");
    TrainConfig c;
    if (root.contains("network")) {
        c.network = detail::network_from_json(root["network"]);
    }
    if (root.contains("training")) {
        const json& t = root["training"];
        detail::reject_unknown(t,
                               {"pretrain_epochs", "cotrain_epochs", "pretrain_weights",
                                "cotrain_weights", "loss_orders", "lr", "lr_decay", "lr_decay_every",
                                "batch_size", "secrets_per_cover", "seed"},
                               "training config");
        auto& s = c.schedule;
        detail::read_field(t, "pretrain_epochs", s.pretrain_epochs);
        detail::read_field(t, "cotrain_epochs", s.cotrain_epochs);
        if (t.contains("pretrain_weights")) {
            s.pretrain_weights = weights_from(t, "pretrain_weights");
        }
        if (t.contains("cotrain_weights")) {
            s.cotrain_weights = weights_from(t, "cotrain_weights");
        }
        if (t.contains("loss_orders")) {
            const json& o = t["loss_orders"];
            detail::reject_unknown(o, {"hiding", "locating", "revealing"}, "loss_orders");
            detail::read_field(o, "hiding", s.orders.hiding);
            detail::read_field(o, "locating", s.orders.locating);
            detail::read_field(o, "revealing", s.orders.revealing);
        }
        detail::read_field(t, "lr", s.lr0);
        detail::read_field(t, "lr_decay", s.decay);
        detail::read_field(t, "lr_decay_every", s.decay_every);
        detail::read_field(t, "batch_size", s.batch_size);
        detail::read_field(t, "secrets_per_cover", s.secrets_per_cover);
        detail::read_field(t, "seed", s.seed);
    }
    if (root.contains("distortion")) {
        const json& d = root["distortion"];
        detail::reject_unknown(d, {"mode", "layers"}, "distortion config");
        std::string mode = "none";
        detail::read_field(d, "mode", mode);
        c.distortion = parse_distortion_mode(mode);
        if (d.contains("layers")) {
            std::vector<std::string> specs;
            detail::read_field(d, "layers", specs);
            c.layers.clear();
            for (const auto& s : specs) {
                try {
                    c.layers.push_back(DistortionSpec::parse(s));
                } catch (const std::invalid_argument& e) {
                    throw ConfigError(e.what());
                }
            }
        }
    }
    if (root.contains("data")) {
        const json& d = root["data"];
        detail::reject_unknown(d, {"manifest", "split", "val_limit"}, "data config");
        detail::read_field(d, "manifest", c.manifest);
        if (d.contains("split")) {
            std::vector<double> split;
            detail::read_field(d, "split", split);
            if (split.size() != 3) {
                throw ConfigError("split must list three ratios");
            }
            c.split = {split[0], split[1], split[2]};
        }
        detail::read_field(d, "val_limit", c.val_limit);
    }
    c.validate();
    return c;
}

std::string to_json(const TrainConfig& c)
{
    const auto& s = c.schedule;
    json layers = json::array();
    for (const auto& l : c.layers) {
        layers.push_back(l.str());
    }
    const json root{
        {"network", detail::to_json(c.network)},
        {"training",
         {{"pretrain_epochs", s.pretrain_epochs},
          {"cotrain_epochs", s.cotrain_epochs},
          {"pretrain_weights", weights_json(s.pretrain_weights)},
          {"cotrain_weights", weights_json(s.cotrain_weights)},
          {"loss_orders",
           {{"hiding", s.orders.hiding}, {"locating", s.orders.locating}, {"revealing", s.orders.revealing}}},
          {"lr", s.lr0},
          {"lr_decay", s.decay},
          {"lr_decay_every", s.decay_every},
          {"batch_size", s.batch_size},
          {"secrets_per_cover", s.secrets_per_cover},
          {"seed", s.seed}}},
        {"distortion", {{"mode", to_string(c.distortion)}, {"layers", layers}}},
        {"data", {{"manifest", c.manifest}, {"split", c.split}, {"val_limit", c.val_limit}}},
    };
    return root.dump(2);
}

std::vector<Placement> place_batch(int covers, int per_cover, int side, int omega, Rng& rng)
{
    std::vector<Placement> out;
    out.reserve(static_cast<std::size_t>(covers * per_cover));
    for (int j = 0; j < covers; ++j) {
        std::vector<Region> regions;
        try {
            regions = sample_regions(per_cover, side, omega, rng, PlacementMode::random);
        } catch (const RegionError&) {
            regions = sample_regions(per_cover, side, omega, rng, PlacementMode::grid);
        }
        for (const auto& r : regions) {
            out.push_back({j, r});
        }
    }
    return out;
}

LossGraph forward_losses(const Models& models, const Tensor& secrets, const Tensor& covers,
                         const std::vector<Placement>& placements, Phase phase,
                         const TrainingSchedule& schedule, const DistortionSpec* noise, Rng& rng)
{
    const NetworkConfig& cfg = models.config;
    const ag::Variable sv(secrets);
    const ag::Variable cv(covers);
    // L_H sees the pre-clamp sum: it bounds the clamped distance from above and
    // keeps pulling saturated codes back into range.
    const auto raw = embed_codes(cv, models.hide.forward(sv), placements, false);
    const auto stego = ag::clamp01(raw);
    LossGraph g;
    g.hiding = hiding_loss(cv, raw, schedule.orders.hiding);
    const auto received = noise ? apply_noise(*noise, stego, cv, rng) : stego;
    const auto revealed = models.reveal.forward(crop_regions(received, placements));
    g.revealing = revealing_loss(sv, revealed, schedule.orders.revealing);
    g.locating = ag::Variable(Tensor(Shape{1, 1, 1, 1}));
    if (phase == Phase::cotrain) {
        const ag::Variable truth(ground_truth_maps(covers.shape().n, cfg.image_side, placements));
        g.locating = locating_loss(truth, models.locate.forward(received), schedule.orders.locating);
    }
    g.total = total_loss(g.hiding, g.locating, g.revealing, schedule.weights(phase));
    return g;
}

StepMetrics train_step(Models& models, Adam& adam, const Tensor& secrets, const Tensor& covers,
                       Phase phase, const TrainingSchedule& schedule, const DistortionSpec* noise,
                       Rng& rng, double lr)
{
    const NetworkConfig& cfg = models.config;
    const Shape cs = covers.shape();
    const Shape ss = secrets.shape();
    if (cs.n < 1 || ss.n != cs.n * schedule.secrets_per_cover) {
        throw ShapeError("train_step: expected " + std::to_string(schedule.secrets_per_cover)
                         + " secrets per cover, got " + ss.str() + " for covers " + cs.str());
    }
    const auto placements =
        place_batch(cs.n, schedule.secrets_per_cover, cfg.image_side, cfg.omega, rng);

    models.hide.zero_grad();
    models.locate.zero_grad();
    models.reveal.zero_grad();
    const auto g = forward_losses(models, secrets, covers, placements, phase, schedule, noise, rng);
    StepMetrics m{g.hiding.item(), g.locating.item(), g.revealing.item(), g.total.item()};
    if (!std::isfinite(m.total)) {
        throw DivergenceError("non-finite training loss");
    }
    ag::backward(g.total);
    adam.step(models.hide.parameters(), lr);
    adam.step(models.reveal.parameters(), lr);
    if (phase == Phase::cotrain) {
        adam.step(models.locate.parameters(), lr);
    }
    return m;
}

void write_history_header(std::ostream& out)
{
    out << "epoch,phase,lr,loss_hiding,loss_locating,loss_revealing,loss_total,"
           "val_stego_apd,val_stego_psnr,val_stego_ssim,val_secret_apd,val_secret_psnr,"
           "val_secret_ssim,val_iou,val_failure_rate\n";
}

void write_history_row(std::ostream& out, const EpochRecord& r)
{
    out << r.epoch << ',' << to_string(r.phase);
    for (double v : {r.lr, r.loss.hiding, r.loss.locating, r.loss.revealing, r.loss.total,
                     r.stego_apd, r.stego_psnr, r.stego_ssim, r.secret_apd, r.secret_psnr,
                     r.secret_ssim, r.iou, r.failure_rate}) {
        out << ',' << format_metric(v);
    }
    out << '\n';
}

std::vector<EpochRecord> read_history(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot read history: " + path.string());
    }
    std::vector<EpochRecord> out;
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream is(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(is, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 15) {
            throw std::runtime_error("malformed history row: " + line);
        }
        EpochRecord r;
        r.epoch = std::stoi(cells[0]);
        r.phase = cells[1] == "pretrain" ? Phase::pretrain : Phase::cotrain;
        double* fields[] = {&r.lr, &r.loss.hiding, &r.loss.locating, &r.loss.revealing,
                            &r.loss.total, &r.stego_apd, &r.stego_psnr, &r.stego_ssim,
                            &r.secret_apd, &r.secret_psnr, &r.secret_ssim, &r.iou,
                            &r.failure_rate};
        for (std::size_t i = 0; i < 13; ++i) {
            *fields[i] = std::strtod(cells[i + 2].c_str(), nullptr);
        }
        out.push_back(r);
    }
    return out;
}

TrainResult train(const TrainConfig& config, const std::vector<Image>& train_images,
                  const std::vector<Image>& val_images, const TrainOptions& options)
{
    config.validate();
    const auto& sched = config.schedule;
    if (train_images.empty()) {
        throw std::invalid_argument("training set is empty");
    }

    TrainResult result{init_params(config.network, sched.seed), {}, 0};
    Adam adam;
    int start_epoch = 0;
    const bool persist = !options.out_dir.empty();
    const auto ckpt_path = options.out_dir / "checkpoint.ldh";
    const auto history_path = options.out_dir / "history.csv";
    if (persist) {
        std::filesystem::create_directories(options.out_dir);
    }
    if (persist && options.resume && std::filesystem::exists(ckpt_path)) {
        const Checkpoint ckpt = load_checkpoint(ckpt_path);
        if (json::parse(ckpt.config_json) != json::parse(to_json(config))) {
            throw ConfigError("checkpoint in " + options.out_dir.string()
                              + " was written with a different configuration");
        }
        result.models = restore_models(ckpt);
        adam.restore(ckpt.tensors);
        start_epoch = ckpt.epoch;
        result.steps = ckpt.step;
        if (std::filesystem::exists(history_path)) {
            result.history = read_history(history_path);
            result.history.resize(static_cast<std::size_t>(start_epoch));
        }
    }
    if (persist) {
        std::ofstream h(history_path, std::ios::trunc);
        write_history_header(h);
        for (const auto& r : result.history) {
            write_history_row(h, r);
        }
    }

    std::vector<Image> val = val_images;
    if (config.val_limit > 0 && val.size() > static_cast<std::size_t>(config.val_limit)) {
        val.resize(static_cast<std::size_t>(config.val_limit));
    }
    const std::size_t n = train_images.size();
    const auto batch = static_cast<std::size_t>(sched.batch_size);
    const auto per_cover = static_cast<std::size_t>(sched.secrets_per_cover);

    for (int epoch = start_epoch; epoch < sched.total_epochs(); ++epoch) {
        const Phase phase = sched.phase_of(epoch);
        const double lr = sched.learning_rate(sched.phase_epoch(epoch));
        Rng order = Rng::derive(sched.seed, kOrderStream + static_cast<std::uint64_t>(epoch));
        Rng rng = Rng::derive(sched.seed, kStepStream + static_cast<std::uint64_t>(epoch));
        std::vector<std::size_t> cover_order(n);
        std::iota(cover_order.begin(), cover_order.end(), std::size_t{0});
        auto secret_order = cover_order;
        order.shuffle(cover_order);
        order.shuffle(secret_order);

        StepMetrics sum;
        int steps = 0;
        for (std::size_t b = 0; b < n; b += batch) {
            const std::size_t len = std::min(batch, n - b);
            std::vector<std::size_t> cids(cover_order.begin() + static_cast<std::ptrdiff_t>(b),
                                          cover_order.begin() + static_cast<std::ptrdiff_t>(b + len));
            std::vector<std::size_t> sids;
            for (std::size_t j = 0; j < len * per_cover; ++j) {
                sids.push_back(secret_order[(b * per_cover + j) % n]);
            }
            const DistortionSpec* noise = nullptr;
            if (config.distortion == DistortionMode::specialized) {
                noise = &config.layers.front();
            } else if (config.distortion == DistortionMode::combined) {
                noise = &config.layers[result.steps % config.layers.size()];
            }
            const auto m = train_step(result.models, adam, gather(train_images, sids),
                                      gather(train_images, cids), phase, sched, noise, rng, lr);
            sum.hiding += m.hiding;
            sum.locating += m.locating;
            sum.revealing += m.revealing;
            sum.total += m.total;
            ++steps;
            ++result.steps;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.phase = phase;
        rec.lr = lr;
        rec.loss = StepMetrics{sum.hiding / steps, sum.locating / steps, sum.revealing / steps,
                               sum.total / steps};
        if (!val.empty()) {
            EvalOptions eo;
            eo.seed = sched.seed ^ kValidationStream;
            const auto q = evaluate_quality(result.models, val, eo);
            rec.stego_apd = q.stego.apd;
            rec.stego_psnr = q.stego.psnr;
            rec.stego_ssim = q.stego.ssim;
            rec.secret_apd = q.revealed.apd;
            rec.secret_psnr = q.revealed.psnr;
            rec.secret_ssim = q.revealed.ssim;
            rec.iou = q.iou;
            rec.failure_rate = q.failure_rate();
        }
        result.history.push_back(rec);
        if (persist) {
            std::ofstream h(history_path, std::ios::app);
            write_history_row(h, rec);
            save_state(options.out_dir, config, result.models, adam, epoch + 1, result.steps, rng);
        }
        if (options.on_epoch) {
            options.on_epoch(rec);
        }
    }
    return result;
}

} // namespace ldh
