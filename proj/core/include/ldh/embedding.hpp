#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ldh/autograd.hpp"
#include "ldh/image.hpp"
#include "ldh/rng.hpp"

namespace ldh {

/// Axis-aligned square placement of a code inside a cover.
struct Region {
    int top = 0;
    int left = 0;
    int side = 0;

    [[nodiscard]] bool overlaps(const Region& o) const noexcept
    {
        return top < o.top + o.side && o.top < top + side && left < o.left + o.side
            && o.left < left + side;
    }
    [[nodiscard]] bool inside(int height, int width) const noexcept
    {
        return side > 0 && top >= 0 && left >= 0 && top + side <= height && left + side <= width;
    }

    friend auto operator<=>(const Region&, const Region&) = default;
};

class RegionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class PlacementMode { random, grid, texture };

PlacementMode parse_placement_mode(const std::string& s);

/// Pairwise-disjoint regions of side cover_side / omega.
///  - random: uniform positions with rejection (throws after 1000 rejections);
///  - grid: a random permutation of distinct grid cells (n <= omega^2);
///  - texture: needs `cover`; the n grid cells with the highest pixel variance.
std::vector<Region> sample_regions(int n, int cover_side, int omega, Rng& rng,
                                   PlacementMode mode = PlacementMode::random,
                                   const Image* cover = nullptr);

/// Grid cell `index` in row-major order.
Region grid_cell(int index, int cover_side, int omega);

/// Copy of `cover` with clamp(cover + code, 0, 1) inside `region`.
Image local_add(const Image& cover, const SecretCode& code, const Region& region);

/// Hard map with ones exactly on the union of (disjoint) regions.
LocationMap make_ground_truth_map(const std::vector<Region>& regions, int side);

/// Grid-scan rule: every omega×omega cell whose mean map value exceeds
/// `threshold` is reported; result sorted row-major.
std::vector<Region> extract_regions(const LocationMap& map, int omega, double threshold = 0.5);

/// Mean map value of every grid cell, row-major.
std::vector<double> cell_scores(const LocationMap& map, int omega);

/// Exact sub-image.
Image crop(const Image& stego, const Region& region);

/// "top left side" per line.
void write_regions(const std::filesystem::path& path, const std::vector<Region>& regions);
std::vector<Region> read_regions(const std::filesystem::path& path);

/// Code `code_index` of a batch goes to `region` of cover `sample`.
struct Placement {
    int sample = 0;
    Region region;
};

/// Differentiable batched local addition: covers N×3×S×S, codes K×3×s×s.
/// With `clamp` unset the raw sums are returned.
ag::Variable embed_codes(const ag::Variable& covers, const ag::Variable& codes,
                         const std::vector<Placement>& placements, bool clamp = true);

/// Differentiable batched crop returning K×3×s×s patches.
ag::Variable crop_regions(const ag::Variable& images, const std::vector<Placement>& placements);

/// Batched ground-truth maps N×1×S×S.
Tensor ground_truth_maps(int batch, int side, const std::vector<Placement>& placements);

} // namespace ldh
