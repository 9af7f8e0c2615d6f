#pragma once

#include <array>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ldh/autograd.hpp"
#include "ldh/image.hpp"
#include "ldh/rng.hpp"

namespace ldh {

enum class DistortionKind { dropout, gaussian, jpeg, crop, cropout };

std::string to_string(DistortionKind kind);

/// A parsed attack or noise-layer description such as "jpeg:q=80",
/// "crop:blocks=3,7" or "cropout:n=2".
struct DistortionSpec {
    DistortionKind kind = DistortionKind::dropout;
    double p = 0.3;          ///< dropout replacement probability
    int kernel = 5;          ///< gaussian kernel size (odd)
    double sigma = 1.0;      ///< gaussian standard deviation
    int quality = 80;        ///< jpeg quality 1..100
    std::vector<int> blocks; ///< explicit crop blocks (row-major)
    int random_blocks = 0;   ///< when > 0, pick this many blocks at random
    int grid = 4;            ///< crop grid is grid×grid blocks

    /// Throws std::invalid_argument on out-of-range parameters.
    void validate() const;
    /// Canonical text form; parse(str()) reproduces the spec.
    [[nodiscard]] std::string str() const;
    static DistortionSpec parse(const std::string& text);

    friend bool operator==(const DistortionSpec&, const DistortionSpec&) = default;
};

/// Annex-K base tables (row-major, zig-zag not applied).
extern const std::array<int, 64> kLumaQuant;
extern const std::array<int, 64> kChromaQuant;

/// Quality-scaled table: (base * S + 50) / 100 clamped to [1, 255] where
/// S = 5000 / q for q < 50 and 200 - 2q otherwise.
std::array<int, 64> scaled_quant_table(const std::array<int, 64>& base, int quality);

// Image-level operators -----------------------------------------------------

/// Each pixel (all channels together) is replaced by the cover pixel with
/// probability p.
Image dropout_noise(const Image& stego, const Image& cover, double p, Rng& rng);

Image gaussian_blur(const Image& img, int kernel = 5, double sigma = 1.0);

/// Normalised 1-D Gaussian taps; the 2-D kernel is their outer product.
std::vector<double> gaussian_kernel(int kernel, double sigma);

/// Differentiable JPEG surrogate evaluated without a graph.
Image jpeg_approx(const Image& img, int quality);

enum class CropMode { crop, cropout };

/// Replaces the selected blocks of a grid×grid tiling with zeros (crop) or
/// the cover (cropout).
Image crop_attack(const Image& stego, const Image& cover, const std::set<int>& blocks, CropMode mode,
                  int grid = 4);

/// Evaluation-time attack; jpeg uses the libjpeg codec with true rounding.
Image apply_attack(const DistortionSpec& spec, const Image& stego, const Image& cover, Rng& rng);

// Differentiable noise layers ------------------------------------------------

ag::Variable dropout_layer(const ag::Variable& stegos, const ag::Variable& covers, double p,
                           Rng& rng);
ag::Variable gaussian_layer(const ag::Variable& x, int kernel, double sigma);
ag::Variable jpeg_approx_layer(const ag::Variable& x, int quality);

/// Training-time noise layer for dropout, gaussian or jpeg specs.
ag::Variable apply_noise(const DistortionSpec& spec, const ag::Variable& stegos,
                         const ag::Variable& covers, Rng& rng);

} // namespace ldh
