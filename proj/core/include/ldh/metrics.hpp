#pragma once

#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

#include "ldh/image.hpp"

namespace ldh {

inline constexpr double kSsimK1 = 0.01;
inline constexpr double kSsimK2 = 0.03;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;

/// Mean absolute difference over all elements, on the 0-255 scale.
double apd(const Raster& a, const Raster& b);

/// Mean squared difference over all elements (values in [0,1]).
double mse(const Raster& a, const Raster& b);

/// 10 log10(1 / MSE); +infinity for identical inputs.
double psnr(const Raster& a, const Raster& b);

/// Mean SSIM with an 11×11 Gaussian window (sigma 1.5, valid positions only),
/// averaged over channels. With `global` set, one window spans the whole
/// channel.
double ssim(const Raster& a, const Raster& b, bool global = false);

/// |truth ∩ pred| / |truth ∪ pred| for binary maps; 1 when both are empty.
double locating_iou(const LocationMap& truth, const LocationMap& pred);

enum class PairKind { cover_stego, secret_revealed };

std::string to_string(PairKind kind);

struct QualityReport {
    PairKind kind = PairKind::cover_stego;
    double apd = 0.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

QualityReport measure(const Image& reference, const Image& test, PairKind kind);

/// Formats a metric with 17 significant digits, infinity as "inf".
std::string format_metric(double v);

/// "pair_kind,apd,psnr,ssim" header plus one row per report.
void write_quality_csv(std::ostream& out, const std::vector<QualityReport>& rows);

} // namespace ldh
