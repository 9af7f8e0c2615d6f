#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "ldh/distortions.hpp"
#include "ldh/embedding.hpp"
#include "ldh/metrics.hpp"
#include "ldh/networks.hpp"

namespace ldh {

/// Post-processing applied to every revealed secret before scoring.
using RestorationHook = std::function<Image(const Image&)>;

struct EvalOptions {
    int n_secrets = 1;
    std::uint64_t seed = 0;
    bool quantize = true;           ///< 8-bit round trip of the stego (and attacked stego)
    bool ground_truth_crops = false; ///< crop the true regions instead of locating
    PlacementMode placement = PlacementMode::grid;
    std::optional<DistortionSpec> attack;
    RestorationHook restoration;
    double threshold = 0.5;
};

/// Outcome for one embedded secret.
struct SlotResult {
    int image = 0;
    int slot = 0;
    int secret = 0; ///< index into the image list
    Region truth;
    Region used; ///< region actually cropped
    QualityReport revealed;
};

struct QualityResult {
    int n_secrets = 0;
    int images = 0;
    int failures = 0; ///< images whose extracted region count differs from n_secrets
    QualityReport stego{PairKind::cover_stego};
    QualityReport revealed{PairKind::secret_revealed}; ///< NaN when no secret was hidden
    double iou = 0.0; ///< mean pixel IoU of the thresholded map
    std::vector<SlotResult> slots;

    [[nodiscard]] double failure_rate() const
    {
        return images ? static_cast<double>(failures) / images : 0.0;
    }
};

/// Every image serves as a cover in turn; its secrets are drawn from the other
/// images. Placement and secret choice for slot k depend only on (seed, image
/// index), so slot k is identical across n_secrets in grid and texture modes.
/// Path: hide -> quantize -> attack -> quantize -> locate -> crop -> reveal.
QualityResult evaluate_quality(const Models& models, const std::vector<Image>& images,
                               const EvalOptions& options);

struct RobustnessRow {
    std::string attack; ///< canonical spec text, "none" for the clean row
    QualityResult result;
};

/// One row per attack; an empty list yields the single clean row.
std::vector<RobustnessRow> evaluate_robustness(const Models& models, const std::vector<Image>& images,
                                               const std::vector<DistortionSpec>& attacks,
                                               const EvalOptions& options);

struct RateAnalysisConfig {
    std::vector<double> thresholds_db{26.0, 32.0};
    int max_secrets = 0; ///< 0 means omega^2
    RestorationHook restoration;
    bool quantize = true;
    bool ground_truth_crops = false;
    std::uint64_t seed = 0;

    void validate(int omega) const;
};

struct RatePoint {
    int n_secrets = 0;
    double revealed_psnr = 0.0;
    double failure_rate = 0.0;
};

struct RateResult {
    std::vector<RatePoint> sweep;
    std::vector<double> thresholds_db;
    std::vector<int> max_secrets; ///< per threshold; 0 when none qualifies
    std::vector<double> bpp;      ///< 24 * max_secrets
};

/// Payload of n full-size RGB secrets per cover pixel.
inline constexpr double bits_per_pixel(int n_secrets) { return 24.0 * n_secrets; }

/// Sweeps n = 1..max_secrets on a fixed pairing and reports, per threshold, the
/// largest n whose mean revealed PSNR meets it.
RateResult max_embedding_rate(const Models& models, const std::vector<Image>& images,
                              const RateAnalysisConfig& config);

/// Largest n in `sweep` with revealed_psnr >= threshold, or 0.
int largest_meeting(const std::vector<RatePoint>& sweep, double threshold);

// Reports ----------------------------------------------------------------------

void write_quality_report(std::ostream& out, const QualityResult& r);
void write_locating_report(std::ostream& out, const QualityResult& r);
void write_slot_report(std::ostream& out, const QualityResult& r);
void write_robustness_report(std::ostream& out, const std::vector<RobustnessRow>& rows);
void write_rate_report(std::ostream& out, const RateResult& r);
void write_rate_sweep(std::ostream& out, const RateResult& r);

/// Fixed-width plain-text table.
std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

} // namespace ldh
