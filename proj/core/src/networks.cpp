#include "ldh/networks.hpp"

#include <cmath>

#include "ldh/ops.hpp"

namespace ldh {
namespace {

bool is_power_of_two(int v)
{
    return v > 0 && (v & (v - 1)) == 0;
}

void require_input(const Shape& s, int channels, int side, const char* who)
{
    if (s.c != channels || s.h != side || s.w != side) {
        throw ShapeError(std::string(who) + ": expected N×" + std::to_string(channels) + "×"
                         + std::to_string(side) + "×" + std::to_string(side) + " input, got "
                         + s.str());
    }
}

} // namespace

int NetworkConfig::log2_omega() const noexcept
{
    int d = 0;
    for (int v = omega; v > 1; v >>= 1) {
        ++d;
    }
    return d;
}

void NetworkConfig::validate_structure() const
{
    if (omega < 2 || !is_power_of_two(omega)) {
        throw ConfigError("omega must be a power of two >= 2");
    }
    if (nhf < 1 || hiding_width < 1 || locating_width < 1) {
        throw ConfigError("network widths must be positive");
    }
    if (unet_levels < 1) {
        throw ConfigError("unet_levels must be >= 1");
    }
    if (image_side < 1 || image_side % omega != 0) {
        throw ConfigError("image_side must be divisible by omega");
    }
    const int pool = 1 << (unet_levels - 1);
    if (code_side() % pool != 0) {
        throw ConfigError("code side " + std::to_string(code_side())
                          + " is not divisible by the U-Net pooling factor " + std::to_string(pool));
    }
}

void NetworkConfig::validate() const
{
    validate_structure();
    if (omega != 2 && omega != 4 && omega != 8) {
        throw ConfigError("omega must be one of 2, 4, 8");
    }
    if (nhf < 8) {
        throw ConfigError("nhf must be >= 8");
    }
    if (image_side % (omega * 8) != 0) {
        throw ConfigError("image_side must be divisible by omega * 8");
    }
}

ag::Variable Conv::operator()(const ag::Variable& x) const
{
    return ag::conv2d(x, weight, bias, kernel / 2);
}

std::vector<ag::Parameter> Network::parameters() const
{
    std::vector<ag::Parameter> out;
    out.reserve(layers_.size() * 2);
    for (const auto& l : layers_) {
        out.push_back({l.name + ".weight", l.weight});
        out.push_back({l.name + ".bias", l.bias});
    }
    return out;
}

std::size_t Network::parameter_count() const
{
    std::size_t n = 0;
    for (const auto& l : layers_) {
        n += l.weight.value().size() + l.bias.value().size();
    }
    return n;
}

void Network::zero_grad()
{
    for (auto& l : layers_) {
        l.weight.zero_grad();
        l.bias.zero_grad();
    }
}

void Network::add_conv(std::string name, int in, int out, int kernel, Rng& rng, double gain)
{
    const int fan_in = in * kernel * kernel;
    const double stddev = gain * std::sqrt(2.0 / ((1.0 + kLeakySlope * kLeakySlope) * fan_in));
    Tensor w(Shape{out, in, kernel, kernel});
    for (double& v : w.data()) {
        v = stddev * rng.normal();
    }
    Conv conv;
    conv.name = std::move(name);
    conv.in = in;
    conv.out = out;
    conv.kernel = kernel;
    conv.weight = ag::Variable(std::move(w), true);
    conv.bias = ag::Variable(Tensor(Shape{1, out, 1, 1}), true);
    layers_.push_back(std::move(conv));
}

// Layer order: down0..down{D-1}, enc0..enc{L-1}, dec{L-2}..dec0, head.
HidingNetwork::HidingNetwork(const NetworkConfig& config, Rng& rng) : config_(config)
{
    config.validate_structure();
    const int w = config.hiding_width;
    const int depth = config.log2_omega();
    for (int i = 0; i < depth; ++i) {
        add_conv("hide.down" + std::to_string(i), i == 0 ? 3 : w, w, 3, rng);
    }
    add_conv("hide.enc0", w, w, 3, rng);
    for (int l = 1; l < config.unet_levels; ++l) {
        add_conv("hide.enc" + std::to_string(l), w << (l - 1), w << l, 3, rng);
    }
    for (int l = config.unet_levels - 2; l >= 0; --l) {
        add_conv("hide.dec" + std::to_string(l), 3 * (w << l), w << l, 3, rng);
    }
    add_conv("hide.head", w, 3, 1, rng, kHideHeadGain);
}

ag::Variable HidingNetwork::forward(const ag::Variable& secrets) const
{
    require_input(secrets.shape(), 3, config_.image_side, "HidingNetwork");
    const int depth = config_.log2_omega();
    const int levels = config_.unet_levels;
    std::size_t li = 0;
    ag::Variable x = secrets;
    for (int i = 0; i < depth; ++i) {
        x = ag::max_pool2(ag::leaky_relu(layer(li++)(x), kLeakySlope));
    }
    std::vector<ag::Variable> skips;
    x = ag::leaky_relu(layer(li++)(x), kLeakySlope);
    skips.push_back(x);
    for (int l = 1; l < levels; ++l) {
        x = ag::leaky_relu(layer(li++)(ag::max_pool2(x)), kLeakySlope);
        skips.push_back(x);
    }
    for (int l = levels - 2; l >= 0; --l) {
        x = ag::concat_channels(ag::upsample_nearest2(x), skips[static_cast<std::size_t>(l)]);
        x = ag::leaky_relu(layer(li++)(x), kLeakySlope);
    }
    return layer(li)(x);
}

LocatingNetwork::LocatingNetwork(const NetworkConfig& config, Rng& rng) : config_(config)
{
    config.validate_structure();
    const int w = config.locating_width;
    add_conv("locate.conv0", 3, w, 3, rng);
    for (int i = 1; i <= 4; ++i) {
        add_conv("locate.conv" + std::to_string(i), w, w, 3, rng);
    }
    add_conv("locate.conv5", w, 1, 3, rng);
}

ag::Variable LocatingNetwork::forward(const ag::Variable& stegos) const
{
    require_input(stegos.shape(), 3, config_.image_side, "LocatingNetwork");
    ag::Variable x = stegos;
    for (std::size_t i = 0; i < 5; ++i) {
        x = ag::leaky_relu(layer(i)(x), kLeakySlope);
    }
    return ag::sigmoid(layer(5)(x));
}

RevealingNetwork::RevealingNetwork(const NetworkConfig& config, Rng& rng) : config_(config)
{
    config.validate_structure();
    const int w = config.nhf;
    add_conv("reveal.pre0", 3, w, 3, rng);
    for (int i = 1; i < 6; ++i) {
        add_conv("reveal.pre" + std::to_string(i), w, w, 3, rng);
    }
    for (int i = 0; i < config.log2_omega(); ++i) {
        add_conv("reveal.up" + std::to_string(i), w, w, 3, rng);
    }
    add_conv("reveal.head", w, 3, 3, rng);
}

ag::Variable RevealingNetwork::forward(const ag::Variable& patches) const
{
    require_input(patches.shape(), 3, config_.code_side(), "RevealingNetwork");
    ag::Variable x = patches;
    std::size_t li = 0;
    for (; li < 6; ++li) {
        x = ag::leaky_relu(layer(li)(x), kLeakySlope);
    }
    for (int i = 0; i < config_.log2_omega(); ++i) {
        x = ag::leaky_relu(layer(li++)(ag::upsample_nearest2(x)), kLeakySlope);
    }
    return ag::sigmoid(layer(li)(x));
}

std::vector<ag::Parameter> Models::parameters() const
{
    auto out = hide.parameters();
    for (auto* net : {static_cast<const Network*>(&locate), static_cast<const Network*>(&reveal)}) {
        auto p = net->parameters();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

Models init_params(const NetworkConfig& config, std::uint64_t seed)
{
    config.validate_structure();
    Rng hr = Rng::derive(seed, 1);
    Rng pr = Rng::derive(seed, 2);
    Rng rr = Rng::derive(seed, 3);
    return Models{config, HidingNetwork(config, hr), LocatingNetwork(config, pr),
                  RevealingNetwork(config, rr)};
}

SecretCode forward_hide(const HidingNetwork& net, const Image& secret)
{
    ag::NoGradGuard guard;
    return SecretCode::from_tensor(net.forward(ag::Variable(secret.to_tensor())).value());
}

LocationMap forward_locate(const LocatingNetwork& net, const Image& stego)
{
    ag::NoGradGuard guard;
    return LocationMap::from_tensor(net.forward(ag::Variable(stego.to_tensor())).value());
}

Image forward_reveal(const RevealingNetwork& net, const Image& patch)
{
    ag::NoGradGuard guard;
    return Image::from_tensor(net.forward(ag::Variable(patch.to_tensor())).value());
}

} // namespace ldh
