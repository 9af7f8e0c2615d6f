#include "ldh/losses.hpp"

#include <array>
#include <stdexcept>

#include "ldh/ops.hpp"

namespace ldh {
namespace {

double pow_distance(const Raster& a, const Raster& b, double p)
{
    ag::NoGradGuard guard;
    return ag::mean_pow_distance(ag::Variable(a.to_tensor()), ag::Variable(b.to_tensor()), p).item();
}

} // namespace

void LossWeights::validate() const
{
    if (lambda1 < 0.0 || lambda2 < 0.0 || lambda3 < 0.0) {
        throw std::invalid_argument("loss weights must be non-negative");
    }
    if (lambda1 == 0.0 && lambda2 == 0.0 && lambda3 == 0.0) {
        throw std::invalid_argument("loss weights must not all be zero");
    }
}

ag::Variable hiding_loss(const ag::Variable& covers, const ag::Variable& stegos, double p)
{
    return ag::mean_pow_distance(covers, stegos, p);
}

ag::Variable locating_loss(const ag::Variable& truth, const ag::Variable& pred, double p)
{
    return ag::mean_pow_distance(truth, pred, p);
}

ag::Variable revealing_loss(const ag::Variable& secrets, const ag::Variable& revealed, double p)
{
    return ag::mean_pow_distance(secrets, revealed, p);
}

double hiding_loss(const Image& cover, const Image& stego, double p)
{
    return pow_distance(cover, stego, p);
}

double locating_loss(const LocationMap& truth, const LocationMap& pred, double p)
{
    return pow_distance(truth, pred, p);
}

double revealing_loss(const Image& secret, const Image& revealed, double p)
{
    return pow_distance(secret, revealed, p);
}

double total_loss(double lh, double lp, double lr, const LossWeights& w)
{
    return w.lambda1 * lh + w.lambda2 * lp + w.lambda3 * lr;
}

ag::Variable total_loss(const ag::Variable& lh, const ag::Variable& lp, const ag::Variable& lr,
                        const LossWeights& w)
{
    const std::array<ag::Variable, 3> terms{lh, lp, lr};
    const std::array<double, 3> weights{w.lambda1, w.lambda2, w.lambda3};
    return ag::weighted_sum(terms, weights);
}

} // namespace ldh
