#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldh/distortions.hpp"
#include "ldh/embedding.hpp"
#include "ldh/losses.hpp"
#include "ldh/networks.hpp"
#include "ldh/optimizer.hpp"

namespace ldh {

class DivergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Phase { pretrain, cotrain };
std::string to_string(Phase phase);

enum class DistortionMode { none, specialized, combined };
std::string to_string(DistortionMode mode);
DistortionMode parse_distortion_mode(const std::string& s);

struct TrainingSchedule {
    int pretrain_epochs = 60;
    int cotrain_epochs = 30;
    LossWeights pretrain_weights = kPretrainWeights;
    LossWeights cotrain_weights = kCotrainWeights;
    LossOrders orders;
    double lr0 = 1e-3;
    double decay = 0.1;
    int decay_every = 30;
    int batch_size = 8;
    int secrets_per_cover = 1;
    std::uint64_t seed = 0;

    /// Throws ConfigError.
    void validate() const;
    /// lr0 * decay^floor(phase_epoch / decay_every); the epoch counter restarts
    /// with each phase.
    [[nodiscard]] double learning_rate(int phase_epoch) const;
    [[nodiscard]] int total_epochs() const { return pretrain_epochs + cotrain_epochs; }
    [[nodiscard]] Phase phase_of(int epoch) const
    {
        return epoch < pretrain_epochs ? Phase::pretrain : Phase::cotrain;
    }
    [[nodiscard]] int phase_epoch(int epoch) const
    {
        return epoch < pretrain_epochs ? epoch : epoch - pretrain_epochs;
    }
    [[nodiscard]] const LossWeights& weights(Phase p) const
    {
        return p == Phase::pretrain ? pretrain_weights : cotrain_weights;
    }
};

/// Complete, JSON-backed description of a training run.
struct TrainConfig {
    NetworkConfig network;
    TrainingSchedule schedule;
    DistortionMode distortion = DistortionMode::none;
    /// specialized uses layers[0]; combined cycles through all of them.
    std::vector<DistortionSpec> layers{DistortionSpec::parse("dropout:p=0.3"),
                                       DistortionSpec::parse("gaussian:k=5,sigma=1"),
                                       DistortionSpec::parse("jpeg:q=80")};
    std::string manifest;
    std::array<double, 3> split{0.8, 0.1, 0.1};
    int val_limit = 0; ///< cap on validation images per epoch, 0 for all

    /// Throws ConfigError.
    void validate() const;
};

/// Missing fields take their defaults; unknown fields raise ConfigError.
TrainConfig parse_train_config(const std::string& json_text);
/// Fully resolved config, stable key order.
std::string to_json(const TrainConfig& config);

struct StepMetrics {
    double hiding = 0.0;
    double locating = 0.0;
    double revealing = 0.0;
    double total = 0.0;
};

struct LossGraph {
    ag::Variable hiding;
    ag::Variable locating; ///< constant zero in pretrain
    ag::Variable revealing;
    ag::Variable total;
};

/// Builds the weighted training objective for fixed placements without
/// touching parameters or gradients.
LossGraph forward_losses(const Models& models, const Tensor& secrets, const Tensor& covers,
                         const std::vector<Placement>& placements, Phase phase,
                         const TrainingSchedule& schedule, const DistortionSpec* noise, Rng& rng);

/// Random disjoint placements for `covers` covers with `per_cover` codes each
/// (grid cells when random placement is crowded).
std::vector<Placement> place_batch(int covers, int per_cover, int side, int omega, Rng& rng);

/// One optimisation step. `secrets` is (N*k)×3×S×S and `covers` N×3×S×S with
/// k secrets per cover; secret j*k+i goes to cover j. Codes are placed at
/// random disjoint positions (grid cells if random placement is crowded).
/// L_H is measured on the clean stego; `noise` (if any) is applied before
/// locating and revealing; revealing always crops the true regions. In
/// pretrain P is neither evaluated nor updated.
StepMetrics train_step(Models& models, Adam& adam, const Tensor& secrets, const Tensor& covers,
                       Phase phase, const TrainingSchedule& schedule, const DistortionSpec* noise,
                       Rng& rng, double lr);

struct EpochRecord {
    int epoch = 0;
    Phase phase = Phase::pretrain;
    double lr = 0.0;
    StepMetrics loss;
    double stego_apd = 0.0;
    double stego_psnr = 0.0;
    double stego_ssim = 0.0;
    double secret_apd = 0.0;
    double secret_psnr = 0.0;
    double secret_ssim = 0.0;
    double iou = 0.0;
    double failure_rate = 0.0;
};

void write_history_header(std::ostream& out);
void write_history_row(std::ostream& out, const EpochRecord& r);
std::vector<EpochRecord> read_history(const std::filesystem::path& path);

struct TrainOptions {
    /// Receives checkpoint.ldh (rewritten every epoch) and history.csv; empty
    /// disables persistence.
    std::filesystem::path out_dir;
    bool resume = false;
    std::function<void(const EpochRecord&)> on_epoch;
};

struct TrainResult {
    Models models;
    std::vector<EpochRecord> history;
    std::uint64_t steps = 0;
};

/// Pretrain then cotrain. Validation after each epoch hides one secret per
/// val cover on the grid and runs the full receiver path.
TrainResult train(const TrainConfig& config, const std::vector<Image>& train_images,
                  const std::vector<Image>& val_images, const TrainOptions& options = {});

} // namespace ldh
