#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldh/image.hpp"
#include "ldh/rng.hpp"

namespace ldh {

/// Missing, unreadable or malformed input data.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Receives non-fatal diagnostics (e.g. grayscale input). Defaults to stderr.
using WarningHandler = std::function<void(const std::string&)>;
void set_warning_handler(WarningHandler handler);
void warn(const std::string& message);

/// Decodes an 8-bit PNG or JPEG into [0,1]. Grayscale is replicated to RGB
/// and alpha is dropped, both with a warning. 16-bit input is rejected.
Image load_image(const std::filesystem::path& path);

/// Writes a lossless 8-bit RGB PNG storing round(v * 255) per channel.
void save_image(const Image& img, const std::filesystem::path& path);

/// Writes a single-channel map as an 8-bit grayscale PNG.
void save_map(const Raster& map, const std::filesystem::path& path);

/// The value an image holds after a save/load cycle: round(v * 255) / 255.
Image quantize(const Image& img);

/// Byte stored for a channel value (round half away from zero, clamped).
std::uint8_t to_byte(double v);

/// Bilinear resampling with pixel-centre alignment; output clamped to [0,1].
Image resize(const Image& img, int height, int width);

/// Encodes with libjpeg at `quality` (4:4:4, no chroma subsampling) and decodes
/// back; the true-rounding codec used for evaluation-time attacks.
Image jpeg_roundtrip(const Image& img, int quality);

struct DatasetSplit {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
    std::uint64_t seed = 0;
};

/// Deterministic shuffle-and-split. val and test sizes are floor(n * ratio);
/// the remainder goes to train.
DatasetSplit split_dataset(const std::vector<std::string>& refs, std::uint64_t seed,
                           const std::array<double, 3>& ratios = {0.8, 0.1, 0.1});

/// Newline-delimited list of paths relative to the manifest's directory,
/// returned resolved. Blank lines are skipped.
std::vector<std::string> read_manifest(const std::filesystem::path& manifest);
void write_manifest(const std::filesystem::path& manifest, const std::vector<std::string>& relative);

/// Loads and resizes every path to side×side.
std::vector<Image> load_images(const std::vector<std::string>& paths, int side);

/// Procedural test image: smooth gradients, soft-edged shapes and mild
/// texture, deterministic in `rng`.
Image synthesize_image(int side, Rng& rng);

/// Writes `count` synthetic PNGs plus manifest.txt into `dir`.
std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, int count, int side,
                                              std::uint64_t seed);

} // namespace ldh
