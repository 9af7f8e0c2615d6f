#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "ldh/networks.hpp"
#include "ldh/ops.hpp"
#include "oracles.hpp"

using namespace ldh;

namespace {

NetworkConfig small_config(int omega = 2, int side = 32, int width = 8)
{
    NetworkConfig c;
    c.omega = omega;
    c.image_side = side;
    c.nhf = width;
    c.hiding_width = width;
    c.locating_width = width;
    c.unet_levels = 2;
    return c;
}

Tensor random_batch(int n, int side, std::uint64_t seed)
{
    std::vector<Tensor> parts;
    for (int i = 0; i < n; ++i) {
        parts.push_back(oracle::random_image(side, side, seed + i).to_tensor());
    }
    return stack(parts);
}

// Fraction of sampled coordinates whose analytic gradient of `loss` matches
// a central difference within 1% relative.
double fd_agreement(const Network& net, const std::function<double()>& loss,
                    const std::function<void()>& backprop, int samples, std::uint64_t seed)
{
    backprop();
    auto params = net.parameters();
    std::vector<std::pair<std::size_t, std::size_t>> coords;
    for (std::size_t k = 0; k < params.size(); ++k) {
        for (std::size_t i = 0; i < params[k].var.value().size(); ++i) {
            coords.emplace_back(k, i);
        }
    }
    Rng rng(seed);
    rng.shuffle(coords);
    int ok = 0;
    const double eps = 1e-3;
    for (int t = 0; t < samples; ++t) {
        auto& var = params[coords[static_cast<std::size_t>(t)].first].var;
        const std::size_t i = coords[static_cast<std::size_t>(t)].second;
        const double analytic = var.grad().empty() ? 0.0 : var.grad()[i];
        const double w0 = var.value()[i];
        var.mutable_value()[i] = w0 + eps;
        const double up = loss();
        var.mutable_value()[i] = w0 - eps;
        const double down = loss();
        var.mutable_value()[i] = w0;
        ok += oracle::relative_error(analytic, (up - down) / (2 * eps)) <= 0.01 ? 1 : 0;
    }
    return static_cast<double>(ok) / samples;
}

} // namespace

TEST(Networks, OutputShapes)
{
    const Models m = init_params(small_config(), 1);
    const Tensor x = random_batch(2, 32, 10);
    EXPECT_EQ(m.hide.forward(ag::Variable(x)).shape(), (Shape{2, 3, 16, 16}));
    const auto map = m.locate.forward(ag::Variable(x));
    EXPECT_EQ(map.shape(), (Shape{2, 1, 32, 32}));
    for (double v : map.value().data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    const Tensor patches = random_batch(3, 16, 20);
    const auto rev = m.reveal.forward(ag::Variable(patches));
    EXPECT_EQ(rev.shape(), (Shape{3, 3, 32, 32}));

    const Models m4 = init_params(small_config(4, 64), 2);
    const Image secret = oracle::random_image(64, 64, 3);
    const SecretCode code = forward_hide(m4.hide, secret);
    EXPECT_EQ(code.height(), 16);
    const Image back = forward_reveal(m4.reveal, oracle::random_image(16, 16, 4));
    EXPECT_EQ(back.height(), 64);
    EXPECT_THROW(m4.hide.forward(ag::Variable(random_batch(1, 32, 5))), ShapeError);
}

TEST(Networks, FullScaleCodeSide)
{
    NetworkConfig c;
    c.omega = 4;
    c.image_side = 1024;
    EXPECT_EQ(c.code_side(), 256);
    EXPECT_NO_THROW(c.validate());
}

TEST(Networks, ConfigValidation)
{
    NetworkConfig c = small_config();
    EXPECT_NO_THROW(c.validate());
    c.omega = 3;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config();
    c.omega = 16;
    c.image_side = 256;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_NO_THROW(c.validate_structure());
    c = small_config();
    c.nhf = 4;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_NO_THROW(c.validate_structure());
    c = small_config();
    c.image_side = 40;
    EXPECT_THROW(c.validate(), ConfigError);
    c = small_config(2, 8, 3);
    EXPECT_NO_THROW(c.validate_structure());
    c.unet_levels = 4;
    EXPECT_THROW(c.validate_structure(), ConfigError);
}

TEST(Networks, InitIsDeterministic)
{
    const Models a = init_params(small_config(), 42);
    const Models b = init_params(small_config(), 42);
    const Models c = init_params(small_config(), 43);
    const auto pa = a.parameters();
    const auto pb = b.parameters();
    const auto pc = c.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    bool differs = false;
    for (std::size_t i = 0; i < pa.size(); ++i) {
        EXPECT_EQ(pa[i].name, pb[i].name);
        EXPECT_EQ(pa[i].var.value(), pb[i].var.value());
        differs = differs || !(pa[i].var.value() == pc[i].var.value());
    }
    EXPECT_TRUE(differs);
}

TEST(Networks, ParameterCountMatchesLayerArithmetic)
{
    const Models m = init_params(small_config(), 1);
    const int w = 8;
    auto conv = [](int in, int out, int k) { return in * out * k * k + out; };
    // H: one downsampling stage, two U-Net levels.
    const int hide = conv(3, w, 3) + conv(w, w, 3) + conv(w, 2 * w, 3) + conv(3 * w, w, 3) + conv(w, 3, 1);
    const int locate = conv(3, w, 3) + 4 * conv(w, w, 3) + conv(w, 1, 3);
    const int reveal = conv(3, w, 3) + 5 * conv(w, w, 3) + conv(w, w, 3) + conv(w, 3, 3);
    EXPECT_EQ(m.hide.parameter_count(), static_cast<std::size_t>(hide));
    EXPECT_EQ(m.locate.parameter_count(), static_cast<std::size_t>(locate));
    EXPECT_EQ(m.reveal.parameter_count(), static_cast<std::size_t>(reveal));
    EXPECT_EQ(hide, 3739);
}

TEST(Networks, WiderRevealerHasMoreParameters)
{
    NetworkConfig a = small_config(4, 64);
    NetworkConfig b = a;
    a.nhf = 64;
    b.nhf = 80;
    EXPECT_GT(init_params(b, 1).reveal.parameter_count(), init_params(a, 1).reveal.parameter_count());
}

TEST(Networks, HidingGradientMatchesFiniteDifferences)
{
    Models m = init_params(small_config(2, 8, 3), 5);
    const ag::Variable x(random_batch(1, 8, 30));
    const ag::Variable zero(Tensor(Shape{1, 3, 4, 4}));
    auto loss = [&] { return ag::mean_pow_distance(m.hide.forward(x), zero, 2.0).item(); };
    auto backprop = [&] {
        m.hide.zero_grad();
        ag::backward(ag::mean_pow_distance(m.hide.forward(x), zero, 2.0));
    };
    EXPECT_GE(fd_agreement(m.hide, loss, backprop, 60, 1), 0.95);
}

TEST(Networks, LocatingAndRevealingGradientsMatchFiniteDifferences)
{
    Models m = init_params(small_config(2, 8, 3), 6);
    const ag::Variable x(random_batch(1, 8, 40));
    const ag::Variable target(Tensor(Shape{1, 1, 8, 8}, 0.3));
    auto lloss = [&] { return ag::mean_pow_distance(m.locate.forward(x), target, 2.0).item(); };
    auto lback = [&] {
        m.locate.zero_grad();
        ag::backward(ag::mean_pow_distance(m.locate.forward(x), target, 2.0));
    };
    EXPECT_GE(fd_agreement(m.locate, lloss, lback, 60, 2), 0.95);

    const ag::Variable patch(random_batch(1, 4, 50));
    const ag::Variable secret(random_batch(1, 8, 60));
    auto rloss = [&] { return ag::mean_pow_distance(m.reveal.forward(patch), secret, 2.0).item(); };
    auto rback = [&] {
        m.reveal.zero_grad();
        ag::backward(ag::mean_pow_distance(m.reveal.forward(patch), secret, 2.0));
    };
    EXPECT_GE(fd_agreement(m.reveal, rloss, rback, 60, 3), 0.95);
}
