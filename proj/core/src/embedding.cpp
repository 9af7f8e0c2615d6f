#include "ldh/embedding.hpp"

#include "ldh/ops.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace ldh {
namespace {

constexpr int kMaxRejections = 1000;

void require_cover_geometry(int cover_side, int omega)
{
    if (omega < 1 || cover_side < omega || cover_side % omega != 0) {
        throw RegionError("cover side must be a positive multiple of omega");
    }
}

void check_disjoint(const std::vector<Region>& regions)
{
    for (std::size_t i = 0; i < regions.size(); ++i) {
        for (std::size_t j = i + 1; j < regions.size(); ++j) {
            if (regions[i].overlaps(regions[j])) {
                throw RegionError("regions overlap");
            }
        }
    }
}

double cell_variance(const Image& img, const Region& r)
{
    double sum = 0.0;
    double sq = 0.0;
    for (int c = 0; c < 3; ++c) {
        for (int y = r.top; y < r.top + r.side; ++y) {
            for (int x = r.left; x < r.left + r.side; ++x) {
                const double v = img.at(c, y, x);
                sum += v;
                sq += v * v;
            }
        }
    }
    const double n = 3.0 * r.side * r.side;
    const double mean = sum / n;
    return sq / n - mean * mean;
}

} // namespace

PlacementMode parse_placement_mode(const std::string& s)
{
    if (s == "random") {
        return PlacementMode::random;
    }
    if (s == "grid") {
        return PlacementMode::grid;
    }
    if (s == "texture") {
        return PlacementMode::texture;
    }
    throw std::invalid_argument("unknown placement mode: " + s);
}

Region grid_cell(int index, int cover_side, int omega)
{
    require_cover_geometry(cover_side, omega);
    if (index < 0 || index >= omega * omega) {
        throw RegionError("grid cell index out of range");
    }
    const int side = cover_side / omega;
    return Region{(index / omega) * side, (index % omega) * side, side};
}

std::vector<Region> sample_regions(int n, int cover_side, int omega, Rng& rng, PlacementMode mode,
                                   const Image* cover)
{
    require_cover_geometry(cover_side, omega);
    if (n < 1) {
        throw RegionError("sample_regions: n must be >= 1");
    }
    const int side = cover_side / omega;
    const int cells = omega * omega;
    switch (mode) {
    case PlacementMode::grid: {
        if (n > cells) {
            throw RegionError("grid placement holds at most omega^2 regions");
        }
        std::vector<int> order(static_cast<std::size_t>(cells));
        std::iota(order.begin(), order.end(), 0);
        rng.shuffle(order);
        std::vector<Region> out;
        for (int i = 0; i < n; ++i) {
            out.push_back(grid_cell(order[static_cast<std::size_t>(i)], cover_side, omega));
        }
        return out;
    }
    case PlacementMode::texture: {
        if (!cover || cover->height() != cover_side || cover->width() != cover_side) {
            throw RegionError("texture placement needs a cover of the stated side");
        }
        if (n > cells) {
            throw RegionError("texture placement holds at most omega^2 regions");
        }
        std::vector<std::pair<double, int>> scored;
        for (int i = 0; i < cells; ++i) {
            scored.emplace_back(-cell_variance(*cover, grid_cell(i, cover_side, omega)), i);
        }
        std::stable_sort(scored.begin(), scored.end());
        std::vector<Region> out;
        for (int i = 0; i < n; ++i) {
            out.push_back(grid_cell(scored[static_cast<std::size_t>(i)].second, cover_side, omega));
        }
        return out;
    }
    case PlacementMode::random:
        break;
    }

    // Redrawing the whole set on any clash keeps the draw uniform over
    // disjoint configurations and cannot dead-end on a bad first region.
    const auto span = static_cast<std::uint64_t>(cover_side - side + 1);
    for (int attempt = 0; attempt < kMaxRejections; ++attempt) {
        std::vector<Region> out;
        for (int k = 0; k < n; ++k) {
            out.push_back(Region{static_cast<int>(rng.below(span)), static_cast<int>(rng.below(span)), side});
        }
        bool clash = false;
        for (std::size_t i = 0; i < out.size() && !clash; ++i) {
            for (std::size_t j = i + 1; j < out.size() && !clash; ++j) {
                clash = out[i].overlaps(out[j]);
            }
        }
        if (!clash) {
            return out;
        }
    }
    throw RegionError("random placement failed after 1000 rejections; use grid mode");
}

Image local_add(const Image& cover, const SecretCode& code, const Region& region)
{
    if (!region.inside(cover.height(), cover.width())) {
        throw RegionError("local_add: region out of bounds");
    }
    if (code.height() != region.side || code.width() != region.side) {
        throw ShapeError("local_add: code shape does not match region side");
    }
    Image out = cover;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < region.side; ++y) {
            for (int x = 0; x < region.side; ++x) {
                double& v = out.at(c, region.top + y, region.left + x);
                v = std::clamp(v + code.at(c, y, x), 0.0, 1.0);
            }
        }
    }
    return out;
}

LocationMap make_ground_truth_map(const std::vector<Region>& regions, int side)
{
    LocationMap map(side, side);
    for (const auto& r : regions) {
        if (!r.inside(side, side)) {
            throw RegionError("make_ground_truth_map: region out of bounds");
        }
    }
    check_disjoint(regions);
    for (const auto& r : regions) {
        for (int y = r.top; y < r.top + r.side; ++y) {
            for (int x = r.left; x < r.left + r.side; ++x) {
                map.at(y, x) = 1.0;
            }
        }
    }
    return map;
}

std::vector<double> cell_scores(const LocationMap& map, int omega)
{
    if (map.height() != map.width() || map.height() % omega != 0) {
        throw RegionError("cell_scores: map side must be divisible by omega");
    }
    const int side = map.height() / omega;
    std::vector<double> scores;
    scores.reserve(static_cast<std::size_t>(omega) * omega);
    for (int i = 0; i < omega * omega; ++i) {
        const Region r = grid_cell(i, map.height(), omega);
        double sum = 0.0;
        for (int y = r.top; y < r.top + side; ++y) {
            for (int x = r.left; x < r.left + side; ++x) {
                sum += map.at(y, x);
            }
        }
        scores.push_back(sum / (static_cast<double>(side) * side));
    }
    return scores;
}

std::vector<Region> extract_regions(const LocationMap& map, int omega, double threshold)
{
    const auto scores = cell_scores(map, omega);
    std::vector<Region> out;
    for (int i = 0; i < omega * omega; ++i) {
        if (scores[static_cast<std::size_t>(i)] > threshold) {
            out.push_back(grid_cell(i, map.height(), omega));
        }
    }
    return out;
}

Image crop(const Image& stego, const Region& region)
{
    if (!region.inside(stego.height(), stego.width())) {
        throw RegionError("crop: region out of bounds");
    }
    Image out(region.side, region.side);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < region.side; ++y) {
            for (int x = 0; x < region.side; ++x) {
                out.at(c, y, x) = stego.at(c, region.top + y, region.left + x);
            }
        }
    }
    return out;
}

void write_regions(const std::filesystem::path& path, const std::vector<Region>& regions)
{
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot write region file: " + path.string());
    }
    for (const auto& r : regions) {
        out << r.top << ' ' << r.left << ' ' << r.side << '\n';
    }
}

std::vector<Region> read_regions(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open region file: " + path.string());
    }
    std::vector<Region> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        std::istringstream is(line);
        Region r;
        std::string extra;
        if (!(is >> r.top >> r.left >> r.side) || (is >> extra) || r.side <= 0) {
            throw RegionError("malformed region at line " + std::to_string(lineno) + ": " + line);
        }
        out.push_back(r);
    }
    return out;
}

namespace {

void check_placements(const Shape& images, int code_side, const std::vector<Placement>& placements)
{
    for (const auto& p : placements) {
        if (p.sample < 0 || p.sample >= images.n) {
            throw RegionError("placement refers to a missing batch sample");
        }
        if (p.region.side != code_side || !p.region.inside(images.h, images.w)) {
            throw RegionError("placement region out of bounds or wrong side");
        }
    }
}

} // namespace

ag::Variable embed_codes(const ag::Variable& covers, const ag::Variable& codes,
                         const std::vector<Placement>& placements, bool clamp)
{
    const Shape cs = covers.shape();
    const Shape ks = codes.shape();
    if (ks.n != static_cast<int>(placements.size()) || ks.c != cs.c || ks.h != ks.w) {
        throw ShapeError("embed_codes: codes " + ks.str() + " vs " + std::to_string(placements.size())
                         + " placements");
    }
    check_placements(cs, ks.h, placements);
    Tensor out = covers.value();
    for (std::size_t k = 0; k < placements.size(); ++k) {
        const auto& p = placements[k];
        for (int c = 0; c < cs.c; ++c) {
            for (int y = 0; y < ks.h; ++y) {
                for (int x = 0; x < ks.w; ++x) {
                    out.at(p.sample, c, p.region.top + y, p.region.left + x) +=
                        codes.value().at(static_cast<int>(k), c, y, x);
                }
            }
        }
    }
    auto sum = ag::make_result(std::move(out), {covers, codes}, [placements, ks](ag::Node& self) {
        ag::Node& cn = *self.parents[0];
        ag::Node& kn = *self.parents[1];
        if (cn.requires_grad) {
            cn.grad_buffer().add_(self.grad);
        }
        if (kn.requires_grad) {
            Tensor& dk = kn.grad_buffer();
            for (std::size_t k = 0; k < placements.size(); ++k) {
                const auto& p = placements[k];
                for (int c = 0; c < ks.c; ++c) {
                    for (int y = 0; y < ks.h; ++y) {
                        for (int x = 0; x < ks.w; ++x) {
                            dk.at(static_cast<int>(k), c, y, x) +=
                                self.grad.at(p.sample, c, p.region.top + y, p.region.left + x);
                        }
                    }
                }
            }
        }
    });
    return clamp ? ag::clamp01(sum) : sum;
}

ag::Variable crop_regions(const ag::Variable& images, const std::vector<Placement>& placements)
{
    const Shape is = images.shape();
    if (placements.empty()) {
        throw RegionError("crop_regions: no placements");
    }
    const int side = placements.front().region.side;
    check_placements(is, side, placements);
    const Shape os{static_cast<int>(placements.size()), is.c, side, side};
    Tensor out(os);
    for (std::size_t k = 0; k < placements.size(); ++k) {
        const auto& p = placements[k];
        for (int c = 0; c < is.c; ++c) {
            for (int y = 0; y < side; ++y) {
                for (int x = 0; x < side; ++x) {
                    out.at(static_cast<int>(k), c, y, x) =
                        images.value().at(p.sample, c, p.region.top + y, p.region.left + x);
                }
            }
        }
    }
    return ag::make_result(std::move(out), {images}, [placements, os](ag::Node& self) {
        Tensor& d = self.parents[0]->grad_buffer();
        for (std::size_t k = 0; k < placements.size(); ++k) {
            const auto& p = placements[k];
            for (int c = 0; c < os.c; ++c) {
                for (int y = 0; y < os.h; ++y) {
                    for (int x = 0; x < os.w; ++x) {
                        d.at(p.sample, c, p.region.top + y, p.region.left + x) +=
                            self.grad.at(static_cast<int>(k), c, y, x);
                    }
                }
            }
        }
    });
}

Tensor ground_truth_maps(int batch, int side, const std::vector<Placement>& placements)
{
    Tensor maps(Shape{batch, 1, side, side});
    for (const auto& p : placements) {
        if (p.sample < 0 || p.sample >= batch || !p.region.inside(side, side)) {
            throw RegionError("ground_truth_maps: placement out of bounds");
        }
        for (int y = p.region.top; y < p.region.top + p.region.side; ++y) {
            for (int x = p.region.left; x < p.region.left + p.region.side; ++x) {
                maps.at(p.sample, 0, y, x) = 1.0;
            }
        }
    }
    return maps;
}

} // namespace ldh
