#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ldh/autograd.hpp"

namespace ldh {

/// Adam with bias correction; moments are keyed by parameter name so the
/// state survives checkpointing.
class Adam {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    /// Applies one update to every parameter that received a gradient.
    void step(const std::vector<ag::Parameter>& params, double lr);

    [[nodiscard]] std::uint64_t steps(const std::string& name) const;

    /// Moment tensors as "adam.m.<name>", "adam.v.<name>" plus a 1-element
    /// "adam.t.<name>" counter.
    [[nodiscard]] std::map<std::string, Tensor> state() const;
    void restore(const std::map<std::string, Tensor>& tensors);

private:
    struct Slot {
        Tensor m;
        Tensor v;
        std::uint64_t t = 0;
    };
    std::map<std::string, Slot> slots_;
};

} // namespace ldh
