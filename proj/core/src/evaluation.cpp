#include "ldh/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "ldh/dataset_io.hpp"

namespace ldh {
namespace {

constexpr std::uint64_t kAttackStream = 0x41545441434bULL;

struct Accumulator {
    double apd = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
    int count = 0;

    void add(const QualityReport& r)
    {
        apd += r.apd;
        psnr += r.psnr;
        ssim += r.ssim;
        ++count;
    }
    [[nodiscard]] QualityReport mean(PairKind kind) const
    {
        if (count == 0) {
            const double nan = std::numeric_limits<double>::quiet_NaN();
            return QualityReport{kind, nan, nan, nan};
        }
        return QualityReport{kind, apd / count, psnr / count, ssim / count};
    }
};

// Regions for slots 0..n-1. Grid and texture draw the full ordering so slot k
// does not depend on n.
std::vector<Region> place(const Image& cover, int n, int omega, PlacementMode mode, Rng& rng)
{
    if (n == 0) {
        return {};
    }
    if (mode == PlacementMode::random) {
        return sample_regions(n, cover.height(), omega, rng, mode);
    }
    auto all = sample_regions(omega * omega, cover.height(), omega, rng, mode, &cover);
    all.resize(static_cast<std::size_t>(n));
    return all;
}

Region choose_crop(const Region& truth, const std::vector<Region>& extracted,
                   const std::vector<double>& scores, int side, int omega)
{
    if (std::find(extracted.begin(), extracted.end(), truth) != extracted.end()) {
        return truth;
    }
    // Undetected: the receiver would reveal from its most confident cell.
    const auto best = std::max_element(scores.begin(), scores.end()) - scores.begin();
    return grid_cell(static_cast<int>(best), side, omega);
}

} // namespace

QualityResult evaluate_quality(const Models& models, const std::vector<Image>& images,
                               const EvalOptions& options)
{
    const NetworkConfig& cfg = models.config;
    const int omega = cfg.omega;
    if (options.n_secrets < 0 || options.n_secrets > omega * omega) {
        throw std::invalid_argument("n_secrets must lie in [0, omega^2]");
    }
    if (images.empty()) {
        throw std::invalid_argument("evaluation needs at least one image");
    }
    for (const auto& img : images) {
        if (img.height() != cfg.image_side || img.width() != cfg.image_side) {
            throw ShapeError("evaluation images must be " + std::to_string(cfg.image_side) + " square");
        }
    }

    QualityResult result;
    result.n_secrets = options.n_secrets;
    result.images = static_cast<int>(images.size());
    Accumulator stego_acc;
    Accumulator revealed_acc;
    double iou_sum = 0.0;
    const int count = static_cast<int>(images.size());
    const int slots = omega * omega;

    for (int i = 0; i < count; ++i) {
        const Image& cover = images[static_cast<std::size_t>(i)];
        Rng rng = Rng::derive(options.seed, static_cast<std::uint64_t>(i));
        const auto regions = place(cover, options.n_secrets, omega, options.placement, rng);
        std::vector<int> secret_ids(static_cast<std::size_t>(slots));
        for (int& id : secret_ids) {
            if (count == 1) {
                id = 0;
            } else {
                id = static_cast<int>(rng.below(static_cast<std::uint64_t>(count - 1)));
                id += id >= i ? 1 : 0;
            }
        }

        Image stego = cover;
        for (int k = 0; k < options.n_secrets; ++k) {
            const Image& secret = images[static_cast<std::size_t>(secret_ids[static_cast<std::size_t>(k)])];
            stego = local_add(stego, forward_hide(models.hide, secret), regions[static_cast<std::size_t>(k)]);
        }
        if (options.quantize) {
            stego = quantize(stego);
        }
        stego_acc.add(measure(cover, stego, PairKind::cover_stego));

        Image received = stego;
        if (options.attack) {
            Rng arng = Rng::derive(options.seed ^ kAttackStream, static_cast<std::uint64_t>(i));
            received = apply_attack(*options.attack, stego, cover, arng);
            if (options.quantize) {
                received = quantize(received);
            }
        }

        const LocationMap soft = forward_locate(models.locate, received);
        const LocationMap truth_map = make_ground_truth_map(regions, cfg.image_side);
        iou_sum += locating_iou(truth_map, soft.thresholded(options.threshold));
        const auto extracted = extract_regions(soft, omega, options.threshold);
        const auto scores = cell_scores(soft, omega);
        if (static_cast<int>(extracted.size()) != options.n_secrets) {
            ++result.failures;
        }

        for (int k = 0; k < options.n_secrets; ++k) {
            const Region& truth = regions[static_cast<std::size_t>(k)];
            const Region used = options.ground_truth_crops
                                    ? truth
                                    : choose_crop(truth, extracted, scores, cfg.image_side, omega);
            Image revealed = forward_reveal(models.reveal, crop(received, used));
            if (options.restoration) {
                revealed = options.restoration(revealed);
            }
            const int sid = secret_ids[static_cast<std::size_t>(k)];
            const auto report =
                measure(images[static_cast<std::size_t>(sid)], revealed, PairKind::secret_revealed);
            revealed_acc.add(report);
            result.slots.push_back(SlotResult{i, k, sid, truth, used, report});
        }
    }

    result.stego = stego_acc.mean(PairKind::cover_stego);
    result.revealed = revealed_acc.mean(PairKind::secret_revealed);
    result.iou = iou_sum / count;
    return result;
}

std::vector<RobustnessRow> evaluate_robustness(const Models& models, const std::vector<Image>& images,
                                               const std::vector<DistortionSpec>& attacks,
                                               const EvalOptions& options)
{
    std::vector<RobustnessRow> rows;
    if (attacks.empty()) {
        EvalOptions clean = options;
        clean.attack.reset();
        rows.push_back({"none", evaluate_quality(models, images, clean)});
        return rows;
    }
    for (const auto& a : attacks) {
        EvalOptions o = options;
        o.attack = a;
        rows.push_back({a.str(), evaluate_quality(models, images, o)});
    }
    return rows;
}

void RateAnalysisConfig::validate(int omega) const
{
    if (thresholds_db.empty()) {
        throw std::invalid_argument("at least one threshold is required");
    }
    for (double t : thresholds_db) {
        if (!(t > 0.0)) {
            throw std::invalid_argument("thresholds must be positive");
        }
    }
    if (max_secrets < 0 || max_secrets > omega * omega) {
        throw std::invalid_argument("max_secrets must lie in [0, omega^2]");
    }
}

int largest_meeting(const std::vector<RatePoint>& sweep, double threshold)
{
    int best = 0;
    for (const auto& p : sweep) {
        if (p.revealed_psnr >= threshold) {
            best = std::max(best, p.n_secrets);
        }
    }
    return best;
}

RateResult max_embedding_rate(const Models& models, const std::vector<Image>& images,
                              const RateAnalysisConfig& config)
{
    const int omega = models.config.omega;
    config.validate(omega);
    const int top = config.max_secrets ? config.max_secrets : omega * omega;
    RateResult result;
    for (int n = 1; n <= top; ++n) {
        EvalOptions o;
        o.n_secrets = n;
        o.seed = config.seed;
        o.quantize = config.quantize;
        o.ground_truth_crops = config.ground_truth_crops;
        o.restoration = config.restoration;
        const auto q = evaluate_quality(models, images, o);
        result.sweep.push_back({n, q.revealed.psnr, q.failure_rate()});
    }
    result.thresholds_db = config.thresholds_db;
    for (double t : config.thresholds_db) {
        const int n = largest_meeting(result.sweep, t);
        result.max_secrets.push_back(n);
        result.bpp.push_back(bits_per_pixel(n));
    }
    return result;
}

void write_quality_report(std::ostream& out, const QualityResult& r)
{
    write_quality_csv(out, {r.stego, r.revealed});
}

void write_locating_report(std::ostream& out, const QualityResult& r)
{
    out << "n_secrets,images,failures,failure_rate,iou\n";
    out << r.n_secrets << ',' << r.images << ',' << r.failures << ','
        << format_metric(r.failure_rate()) << ',' << format_metric(r.iou) << '\n';
}

void write_slot_report(std::ostream& out, const QualityResult& r)
{
    out << "image,slot,secret,top,left,side,crop_top,crop_left,apd,psnr,ssim\n";
    for (const auto& s : r.slots) {
        out << s.image << ',' << s.slot << ',' << s.secret << ',' << s.truth.top << ','
            << s.truth.left << ',' << s.truth.side << ',' << s.used.top << ',' << s.used.left << ','
            << format_metric(s.revealed.apd) << ',' << format_metric(s.revealed.psnr) << ','
            << format_metric(s.revealed.ssim) << '\n';
    }
}

void write_robustness_report(std::ostream& out, const std::vector<RobustnessRow>& rows)
{
    out << "attack,apd,psnr,ssim,failure_rate\n";
    for (const auto& row : rows) {
        const auto& q = row.result.revealed;
        out << '"' << row.attack << '"' << ',' << format_metric(q.apd) << ','
            << format_metric(q.psnr) << ',' << format_metric(q.ssim) << ','
            << format_metric(row.result.failure_rate()) << '\n';
    }
}

void write_rate_report(std::ostream& out, const RateResult& r)
{
    out << "threshold_db,max_secrets,bpp\n";
    for (std::size_t i = 0; i < r.thresholds_db.size(); ++i) {
        out << format_metric(r.thresholds_db[i]) << ',' << r.max_secrets[i] << ','
            << format_metric(r.bpp[i]) << '\n';
    }
}

void write_rate_sweep(std::ostream& out, const RateResult& r)
{
    out << "n_secrets,bpp,revealed_psnr,failure_rate\n";
    for (const auto& p : r.sweep) {
        out << p.n_secrets << ',' << format_metric(bits_per_pixel(p.n_secrets)) << ','
            << format_metric(p.revealed_psnr) << ',' << format_metric(p.failure_rate) << '\n';
    }
}

std::string render_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width(header.size());
    for (std::size_t c = 0; c < header.size(); ++c) {
        width[c] = header[c].size();
        for (const auto& row : rows) {
            if (c < row.size()) {
                width[c] = std::max(width[c], row[c].size());
            }
        }
    }
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < width.size(); ++c) {
            const std::string cell = c < cells.size() ? cells[c] : "";
            os << (c ? "  " : "") << cell;
            if (c + 1 < width.size()) {
                os << std::string(width[c] - cell.size(), ' ');
            }
        }
        os << '\n';
    };
    line(header);
    std::size_t total = 0;
    for (std::size_t w : width) {
        total += w;
    }
    os << std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') << '\n';
    for (const auto& row : rows) {
        line(row);
    }
    return os.str();
}

} // namespace ldh
