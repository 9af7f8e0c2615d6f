#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ldh/autograd.hpp"
#include "ldh/image.hpp"
#include "ldh/rng.hpp"

namespace ldh {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Geometry and widths shared by the hiding (H), locating (P) and revealing
/// (R) networks.
struct NetworkConfig {
    int omega = 4;           ///< secret side / code side
    int nhf = 64;            ///< width of every layer of R
    int hiding_width = 32;   ///< base width of H (doubles per U-Net level)
    int locating_width = 32; ///< width of P
    int image_side = 1024;
    int unet_levels = 4;     ///< resolution levels of H's U-shaped body

    [[nodiscard]] int code_side() const noexcept { return image_side / omega; }
    [[nodiscard]] int log2_omega() const noexcept;

    /// Pipeline invariants: omega in {2,4,8}, nhf >= 8, image_side divisible
    /// by omega * 8. Throws ConfigError.
    void validate() const;

    /// Structural requirements only (power-of-two omega, sides divisible by
    /// the pooling depth, positive widths). Networks are built against this,
    /// so tiny instances for gradient checks remain constructible.
    void validate_structure() const;

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

/// 3×3 (or 1×1) same-padding convolution with bias.
struct Conv {
    std::string name;
    int in = 0;
    int out = 0;
    int kernel = 3;
    ag::Variable weight;
    ag::Variable bias;

    [[nodiscard]] ag::Variable operator()(const ag::Variable& x) const;
};

/// Ordered collection of named convolution layers.
class Network {
public:
    [[nodiscard]] std::vector<ag::Parameter> parameters() const;
    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] const std::vector<Conv>& layers() const noexcept { return layers_; }
    void zero_grad();

protected:
    void add_conv(std::string name, int in, int out, int kernel, Rng& rng, double gain = 1.0);
    [[nodiscard]] const Conv& layer(std::size_t i) const { return layers_[i]; }

    std::vector<Conv> layers_;
};

/// Downsampling stages followed by a U-shaped body; outputs the unbounded
/// signed code at side / omega.
class HidingNetwork : public Network {
public:
    HidingNetwork() = default;
    HidingNetwork(const NetworkConfig& config, Rng& rng);

    /// N×3×s×s -> N×3×(s/omega)×(s/omega)
    [[nodiscard]] ag::Variable forward(const ag::Variable& secrets) const;

private:
    NetworkConfig config_;
};

/// Six size-preserving convolutions ending in a sigmoid map.
class LocatingNetwork : public Network {
public:
    LocatingNetwork() = default;
    LocatingNetwork(const NetworkConfig& config, Rng& rng);

    /// N×3×s×s -> N×1×s×s in (0,1)
    [[nodiscard]] ag::Variable forward(const ag::Variable& stegos) const;

private:
    NetworkConfig config_;
};

/// Six convolutions at code resolution, log2(omega) upsampling stages and a
/// sigmoid RGB head.
class RevealingNetwork : public Network {
public:
    RevealingNetwork() = default;
    RevealingNetwork(const NetworkConfig& config, Rng& rng);

    /// N×3×c×c -> N×3×(c*omega)×(c*omega) in (0,1)
    [[nodiscard]] ag::Variable forward(const ag::Variable& patches) const;

private:
    NetworkConfig config_;
};

struct Models {
    NetworkConfig config;
    HidingNetwork hide;
    LocatingNetwork locate;
    RevealingNetwork reveal;

    /// All parameters of H, P, R in a stable order.
    [[nodiscard]] std::vector<ag::Parameter> parameters() const;
};

/// Fan-in scaled normal initialisation (He, leaky slope 0.2), zero biases;
/// deterministic in `seed`.
Models init_params(const NetworkConfig& config, std::uint64_t seed);

/// Single-image conveniences (no gradient recorded).
SecretCode forward_hide(const HidingNetwork& net, const Image& secret);
LocationMap forward_locate(const LocatingNetwork& net, const Image& stego);
Image forward_reveal(const RevealingNetwork& net, const Image& patch);

inline constexpr double kLeakySlope = 0.2;

/// Initial weight scale of H's output head relative to the fan-in rule, so
/// that fresh codes are close to zero and the stego clamp starts inactive.
inline constexpr double kHideHeadGain = 1.0;

} // namespace ldh
