#pragma once

#include "ldh/autograd.hpp"
#include "ldh/image.hpp"

namespace ldh {

struct LossWeights {
    double lambda1 = 0.0; ///< hiding
    double lambda2 = 0.0; ///< locating
    double lambda3 = 0.0; ///< revealing

    /// Non-negative and not all zero; throws std::invalid_argument.
    void validate() const;

    friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

inline constexpr LossWeights kPretrainWeights{0.25, 0.0, 0.75};
inline constexpr LossWeights kCotrainWeights{0.1, 0.8, 0.1};

/// Norm order of each term; every loss is mean(|a - b|^p).
struct LossOrders {
    double hiding = 1.0;
    double locating = 2.0;
    double revealing = 1.0;

    friend bool operator==(const LossOrders&, const LossOrders&) = default;
};

ag::Variable hiding_loss(const ag::Variable& covers, const ag::Variable& stegos, double p);
ag::Variable locating_loss(const ag::Variable& truth, const ag::Variable& pred, double p);
ag::Variable revealing_loss(const ag::Variable& secrets, const ag::Variable& revealed, double p);

double hiding_loss(const Image& cover, const Image& stego, double p);
double locating_loss(const LocationMap& truth, const LocationMap& pred, double p);
double revealing_loss(const Image& secret, const Image& revealed, double p);

/// lambda1 * lh + lambda2 * lp + lambda3 * lr
double total_loss(double lh, double lp, double lr, const LossWeights& w);
ag::Variable total_loss(const ag::Variable& lh, const ag::Variable& lp, const ag::Variable& lr,
                        const LossWeights& w);

} // namespace ldh
