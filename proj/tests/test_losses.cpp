#include <gtest/gtest.h>

#include "ldh/losses.hpp"
#include "ldh/rng.hpp"
#include "oracles.hpp"

using namespace ldh;

TEST(Losses, HidingLoss)
{
    const Image a = oracle::random_image(16, 16, 1);
    EXPECT_EQ(hiding_loss(a, a, 1.0), 0.0);
    EXPECT_NEAR(hiding_loss(Image(8, 8, 0.2), Image(8, 8, 0.3), 1.0), 0.1, 1e-15);
    for (int t = 0; t < 10; ++t) {
        const Image x = oracle::random_image(16, 16, 10 + t);
        const Image y = oracle::random_image(16, 16, 20 + t);
        for (double p : {1.0, 2.0}) {
            EXPECT_NEAR(hiding_loss(x, y, p), oracle::mean_pow(x, y, p), 1e-9);
            EXPECT_NEAR(revealing_loss(x, y, p), oracle::mean_pow(x, y, p), 1e-9);
        }
    }
}

TEST(Losses, LocatingLoss)
{
    const LocationMap ones(8, 8, 1.0);
    const LocationMap zeros(8, 8, 0.0);
    EXPECT_EQ(locating_loss(ones, ones, 2.0), 0.0);
    EXPECT_EQ(locating_loss(ones, zeros, 2.0), 1.0);
    LocationMap pred(8, 8);
    Rng rng(3);
    for (double& v : pred.data()) {
        v = rng.uniform();
    }
    EXPECT_NEAR(locating_loss(ones, pred, 2.0), oracle::mean_pow(ones, pred, 2.0), 1e-9);
}

TEST(Losses, VariableLossesMatchImageLosses)
{
    const Image x = oracle::random_image(8, 8, 5);
    const Image y = oracle::random_image(8, 8, 6);
    const ag::Variable vx(x.to_tensor());
    const ag::Variable vy(y.to_tensor());
    EXPECT_DOUBLE_EQ(hiding_loss(vx, vy, 1.0).item(), hiding_loss(x, y, 1.0));
    EXPECT_DOUBLE_EQ(revealing_loss(vx, vy, 2.0).item(), revealing_loss(x, y, 2.0));
}

TEST(Losses, TotalLossWeights)
{
    EXPECT_DOUBLE_EQ(total_loss(1, 1, 1, kPretrainWeights), 1.0);
    EXPECT_DOUBLE_EQ(total_loss(1, 1, 1, kCotrainWeights), 1.0);
    EXPECT_EQ(total_loss(3, 0, 0, LossWeights{0, 1, 1}), 0.0);
    EXPECT_DOUBLE_EQ(total_loss(2, 3, 4, LossWeights{0.5, 0.25, 1}), 1 + 0.75 + 4);

    const ag::Variable lh(Tensor(Shape{1, 1, 1, 1}, 2.0), true);
    const ag::Variable lp(Tensor(Shape{1, 1, 1, 1}, 3.0), true);
    const ag::Variable lr(Tensor(Shape{1, 1, 1, 1}, 4.0), true);
    const auto total = total_loss(lh, lp, lr, kPretrainWeights);
    EXPECT_DOUBLE_EQ(total.item(), 0.5 + 3.0);
    ag::backward(total);
    EXPECT_EQ(lh.grad()[0], 0.25);
    EXPECT_TRUE(lp.grad().empty() || lp.grad()[0] == 0.0);
    EXPECT_EQ(lr.grad()[0], 0.75);
}

TEST(Losses, WeightValidation)
{
    EXPECT_NO_THROW(kPretrainWeights.validate());
    EXPECT_THROW((LossWeights{0, 0, 0}.validate()), std::invalid_argument);
    EXPECT_THROW((LossWeights{-1, 1, 1}.validate()), std::invalid_argument);
}
