#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace ldh {

/// Seeded generator whose derived draws are bit-reproducible across standard
/// library implementations (the std distributions are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);
    double normal();
    bool bernoulli(double p) { return uniform() < p; }

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::swap(v[i - 1], v[below(i)]);
        }
    }

    /// Independent child stream derived from this seed and a label.
    [[nodiscard]] static Rng derive(std::uint64_t seed, std::uint64_t stream);

    [[nodiscard]] std::string state() const;
    void restore(const std::string& state);

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace ldh
