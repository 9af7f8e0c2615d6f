#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>

#include <unistd.h>

#include "ldh/embedding.hpp"
#include "ldh/ops.hpp"
#include "oracles.hpp"

using namespace ldh;
namespace fs = std::filesystem;

namespace {

SecretCode random_code(int side, std::uint64_t seed)
{
    const Image noise = oracle::random_image(side, side, seed, -0.3, 0.3);
    SecretCode code(side, side);
    std::copy(noise.data().begin(), noise.data().end(), code.data().begin());
    return code;
}

bool equal_outside(const Image& a, const Image& b, const Region& r)
{
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < a.height(); ++y) {
            for (int x = 0; x < a.width(); ++x) {
                const bool inside = y >= r.top && y < r.top + r.side && x >= r.left && x < r.left + r.side;
                if (!inside && a.at(c, y, x) != b.at(c, y, x)) {
                    return false;
                }
            }
        }
    }
    return true;
}

} // namespace

TEST(Embedding, GridCoversEveryCellOnce)
{
    Rng rng(1);
    const auto regions = sample_regions(16, 64, 4, rng, PlacementMode::grid);
    ASSERT_EQ(regions.size(), 16u);
    std::set<Region> unique(regions.begin(), regions.end());
    EXPECT_EQ(unique.size(), 16u);
    for (const auto& r : regions) {
        EXPECT_EQ(r.side, 16);
        EXPECT_EQ(r.top % 16, 0);
        EXPECT_EQ(r.left % 16, 0);
    }
    EXPECT_EQ(make_ground_truth_map(regions, 64), LocationMap(64, 64, 1.0));

    Rng q(2);
    const auto quads = sample_regions(4, 64, 2, q, PlacementMode::grid);
    std::set<Region> expected{{0, 0, 32}, {0, 32, 32}, {32, 0, 32}, {32, 32, 32}};
    EXPECT_EQ(std::set<Region>(quads.begin(), quads.end()), expected);
    EXPECT_THROW(sample_regions(5, 64, 2, q, PlacementMode::grid), RegionError);
}

TEST(Embedding, RandomPlacementIsDisjointAndInside)
{
    for (int t = 0; t < 50; ++t) {
        Rng rng(static_cast<std::uint64_t>(t));
        const int n = 1 + t % 3;
        const auto regions = sample_regions(n, 64, 4, rng);
        ASSERT_EQ(regions.size(), static_cast<std::size_t>(n));
        for (std::size_t i = 0; i < regions.size(); ++i) {
            EXPECT_TRUE(regions[i].inside(64, 64));
            for (std::size_t j = i + 1; j < regions.size(); ++j) {
                EXPECT_FALSE(regions[i].overlaps(regions[j]));
            }
        }
    }
    Rng rng(0);
    const auto one = sample_regions(1, 64, 2, rng);
    EXPECT_EQ(one[0].side, 32);
    EXPECT_TRUE(one[0].inside(64, 64));
    // Two half-side squares fit in few configurations but are always found.
    for (int t = 0; t < 20; ++t) {
        Rng tight(static_cast<std::uint64_t>(100 + t));
        const auto two = sample_regions(2, 32, 2, tight);
        EXPECT_FALSE(two[0].overlaps(two[1]));
    }
    // Four 32×32 squares fit in 64×64 only on the exact grid.
    Rng crowded(3);
    EXPECT_THROW(sample_regions(4, 64, 2, crowded), RegionError);
}

TEST(Embedding, TexturePlacementPrefersBusyCells)
{
    Image cover(32, 32, 0.5);
    const Image noise = oracle::random_image(16, 16, 7);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 16; ++y) {
            for (int x = 0; x < 16; ++x) {
                cover.at(c, 16 + y, x) = noise.at(c, y, x);
            }
        }
    }
    Rng rng(1);
    const auto r = sample_regions(1, 32, 2, rng, PlacementMode::texture, &cover);
    EXPECT_EQ(r[0], (Region{16, 0, 16}));
    EXPECT_THROW(sample_regions(1, 32, 2, rng, PlacementMode::texture), RegionError);
}

TEST(Embedding, LocalAddArithmetic)
{
    const Image cover(8, 8, 0.5);
    const Region r{2, 4, 4};
    EXPECT_EQ(local_add(cover, SecretCode(4, 4), r), cover);

    const Image out = local_add(cover, SecretCode(4, 4, 0.2), r);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) {
            const bool inside = y >= 2 && y < 6 && x >= 4;
            EXPECT_DOUBLE_EQ(out.at(1, y, x), inside ? 0.7 : 0.5);
        }
    }
    const Image bright = local_add(Image(8, 8, 0.95), SecretCode(4, 4, 0.2), r);
    EXPECT_EQ(bright.at(0, 3, 5), 1.0);
    EXPECT_THROW(local_add(cover, SecretCode(4, 4), Region{6, 6, 4}), RegionError);
    EXPECT_THROW(local_add(cover, SecretCode(2, 2), r), ShapeError);
}

TEST(Embedding, GroundTruthMaps)
{
    EXPECT_EQ(make_ground_truth_map({}, 16), LocationMap(16, 16));
    const auto map = make_ground_truth_map({{0, 32, 32}}, 64);
    double ones = 0;
    for (double v : map.data()) {
        ones += v;
    }
    EXPECT_EQ(ones, 1024.0);
    EXPECT_THROW(make_ground_truth_map({{0, 0, 8}, {4, 4, 8}}, 16), RegionError);
    EXPECT_THROW(make_ground_truth_map({{10, 0, 8}}, 16), RegionError);
}

TEST(Embedding, ExtractRegionsThreshold)
{
    EXPECT_TRUE(extract_regions(LocationMap(16, 16, 0.4), 2).empty());
    LocationMap soft(16, 16, 0.1);
    for (int y = 8; y < 16; ++y) {
        for (int x = 0; x < 8; ++x) {
            soft.at(y, x) = 0.9;
        }
    }
    // Brute force: the only cell whose mean exceeds 0.5.
    std::vector<Region> expected;
    for (int i = 0; i < 4; ++i) {
        const Region cell{(i / 2) * 8, (i % 2) * 8, 8};
        double sum = 0;
        for (int y = cell.top; y < cell.top + 8; ++y) {
            for (int x = cell.left; x < cell.left + 8; ++x) {
                sum += soft.at(y, x);
            }
        }
        if (sum / 64 > 0.5) {
            expected.push_back(cell);
        }
    }
    EXPECT_EQ(extract_regions(soft, 2), expected);
    EXPECT_EQ(expected, (std::vector<Region>{{8, 0, 8}}));
}

TEST(Embedding, CropCommutesWithLocalAdd)
{
    const Image cover = oracle::random_image(16, 16, 1);
    const Region r{8, 0, 8};
    const SecretCode code = random_code(8, 2);
    const Image patch = crop(local_add(cover, code, r), r);
    const Image base = crop(cover, r);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < 8; ++y) {
            for (int x = 0; x < 8; ++x) {
                EXPECT_EQ(patch.at(c, y, x), std::clamp(base.at(c, y, x) + code.at(c, y, x), 0.0, 1.0));
            }
        }
    }
    EXPECT_EQ(crop(cover, Region{0, 0, 16}), cover);
}

TEST(Embedding, LocalityProperty)
{
    for (int t = 0; t < 30; ++t) {
        Rng rng(static_cast<std::uint64_t>(100 + t));
        const Image cover = oracle::random_image(32, 32, 200 + t);
        const auto regions = sample_regions(2, 32, 4, rng);
        const Image one = local_add(cover, random_code(8, 300 + t), regions[0]);
        EXPECT_TRUE(equal_outside(cover, one, regions[0]));
        const Image two = local_add(one, random_code(8, 400 + t), regions[1]);
        EXPECT_EQ(crop(two, regions[0]), crop(one, regions[0]));
        EXPECT_EQ(crop(two, regions[1]), crop(local_add(cover, random_code(8, 400 + t), regions[1]), regions[1]));
    }
}

TEST(Embedding, RegionRoundTripExhaustive)
{
    for (int mask = 0; mask < 16; ++mask) {
        std::vector<Region> regions;
        for (int i = 0; i < 4; ++i) {
            if (mask & (1 << i)) {
                regions.push_back(grid_cell(i, 32, 2));
            }
        }
        EXPECT_EQ(extract_regions(make_ground_truth_map(regions, 32), 2), regions) << mask;
    }
}

TEST(Embedding, RegionFileRoundTrip)
{
    const fs::path p = fs::temp_directory_path() / ("ldh_regions_" + std::to_string(::getpid()) + ".txt");
    const std::vector<Region> regions{{0, 0, 16}, {16, 48, 16}, {3, 5, 7}};
    write_regions(p, regions);
    std::ifstream in(p);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first, "0 0 16");
    EXPECT_EQ(read_regions(p), regions);
    std::ofstream(p) << "1 2\n";
    EXPECT_THROW(read_regions(p), RegionError);
    std::ofstream(p) << "1 2 3 4\n";
    EXPECT_THROW(read_regions(p), RegionError);
    fs::remove(p);
}

TEST(Embedding, BatchedOpsMatchImageOps)
{
    const Image c0 = oracle::random_image(16, 16, 11);
    const Image c1 = oracle::random_image(16, 16, 12);
    const SecretCode k0 = random_code(8, 13);
    const SecretCode k1 = random_code(8, 14);
    const std::vector<Placement> placements{{0, {0, 8, 8}}, {1, {8, 0, 8}}};
    const std::vector<Image> covers{c0, c1};
    const std::vector<SecretCode> codes{k0, k1};
    ag::Variable cv(batch_of<Image>(covers));
    ag::Variable kv(batch_of<SecretCode>(codes), true);
    const ag::Variable stego = embed_codes(cv, kv, placements);
    EXPECT_EQ(Image::from_tensor(stego.value(), 0), local_add(c0, k0, placements[0].region));
    EXPECT_EQ(Image::from_tensor(stego.value(), 1), local_add(c1, k1, placements[1].region));

    const ag::Variable patches = crop_regions(stego, placements);
    EXPECT_EQ(Image::from_tensor(patches.value(), 1), crop(local_add(c1, k1, placements[1].region), placements[1].region));

    const Tensor maps = ground_truth_maps(2, 16, placements);
    EXPECT_EQ(LocationMap::from_tensor(maps, 0), make_ground_truth_map({placements[0].region}, 16));

    // Unclamped sums pass gradients straight through to the codes.
    const ag::Variable raw = embed_codes(cv, kv, placements, false);
    ag::backward(ag::mean_pow_distance(crop_regions(raw, placements), ag::Variable(Tensor(Shape{2, 3, 8, 8})), 1.0));
    ASSERT_FALSE(kv.grad().empty());
    for (std::size_t i = 0; i < kv.grad().size(); ++i) {
        EXPECT_NE(kv.grad()[i], 0.0);
    }
}
