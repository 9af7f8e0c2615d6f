#include <gtest/gtest.h>

#include <cmath>

#include "ldh/optimizer.hpp"

using namespace ldh;

namespace {

ag::Parameter scalar_param(const std::string& name, double v)
{
    return {name, ag::Variable(Tensor(Shape{1, 1, 1, 1}, v), true)};
}

void set_grad(ag::Parameter& p, double g)
{
    p.var.node()->grad = Tensor(Shape{1, 1, 1, 1}, g);
}

} // namespace

TEST(Adam, FirstStepIsSignTimesLr)
{
    Adam adam;
    auto p = scalar_param("w", 1.0);
    set_grad(p, -0.37);
    adam.step({p}, 0.01);
    // Bias-corrected moments equal g and g^2 on the first step.
    EXPECT_NEAR(p.var.value()[0], 1.0 + 0.01 * 0.37 / (0.37 + 1e-8), 1e-15);
    EXPECT_EQ(adam.steps("w"), 1u);
}

TEST(Adam, MatchesHandUnrolledRecurrence)
{
    Adam adam;
    auto p = scalar_param("w", 0.5);
    const double grads[] = {0.2, -0.1, 0.4, 0.05};
    double w = 0.5, m = 0, v = 0;
    for (int t = 1; t <= 4; ++t) {
        const double g = grads[t - 1];
        set_grad(p, g);
        adam.step({p}, 1e-3);
        m = 0.9 * m + 0.1 * g;
        v = 0.999 * v + 0.001 * g * g;
        const double mh = m / (1 - std::pow(0.9, t));
        const double vh = v / (1 - std::pow(0.999, t));
        w -= 1e-3 * mh / (std::sqrt(vh) + 1e-8);
        EXPECT_NEAR(p.var.value()[0], w, 1e-15);
    }
}

TEST(Adam, SkipsParametersWithoutGradient)
{
    Adam adam;
    auto a = scalar_param("a", 1.0);
    auto b = scalar_param("b", 2.0);
    set_grad(a, 1.0);
    adam.step({a, b}, 0.1);
    EXPECT_EQ(b.var.value()[0], 2.0);
    EXPECT_EQ(adam.steps("b"), 0u);
}

TEST(Adam, StateRoundTripResumesExactly)
{
    Adam a1;
    auto p1 = scalar_param("w", 0.3);
    for (double g : {0.1, -0.2}) {
        set_grad(p1, g);
        a1.step({p1}, 1e-2);
    }
    const auto state = a1.state();
    EXPECT_TRUE(state.count("adam.m.w"));
    EXPECT_TRUE(state.count("adam.v.w"));
    EXPECT_TRUE(state.count("adam.t.w"));

    Adam a2;
    a2.restore(state);
    auto p2 = scalar_param("w", p1.var.value()[0]);
    set_grad(p1, 0.7);
    set_grad(p2, 0.7);
    a1.step({p1}, 1e-2);
    a2.step({p2}, 1e-2);
    EXPECT_EQ(p1.var.value()[0], p2.var.value()[0]);
}
