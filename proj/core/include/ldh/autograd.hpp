#pragma once

// Minimal tape-free reverse-mode differentiation over Tensor values.
//
// Every op returns a Variable whose node keeps its parents and a backward
// closure only when at least one input requires a gradient, so inference on
// frozen parameters allocates no graph.

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ldh/tensor.hpp"

namespace ldh::ag {

struct Node {
    Tensor value;
    Tensor grad; // allocated on first accumulation
    bool requires_grad = false;
    std::vector<std::shared_ptr<Node>> parents;
    std::function<void(Node&)> backward;

    /// Gradient buffer, zero-initialised on first use.
    Tensor& grad_buffer();
};

class Variable {
public:
    Variable() = default;
    explicit Variable(Tensor value, bool requires_grad = false);

    [[nodiscard]] const Tensor& value() const { return node_->value; }
    /// Handle semantics: the value is shared by every copy of the Variable.
    [[nodiscard]] Tensor& mutable_value() const { return node_->value; }
    [[nodiscard]] const Shape& shape() const { return node_->value.shape(); }
    [[nodiscard]] bool requires_grad() const { return node_ && node_->requires_grad; }
    [[nodiscard]] bool defined() const noexcept { return node_ != nullptr; }

    /// Accumulated gradient; an empty tensor if none reached this node.
    [[nodiscard]] const Tensor& grad() const { return node_->grad; }
    void zero_grad();

    [[nodiscard]] const std::shared_ptr<Node>& node() const { return node_; }

    /// Scalar value of a single-element variable.
    [[nodiscard]] double item() const;

private:
    std::shared_ptr<Node> node_;
};

/// While alive, ops record no graph even for inputs that require gradients.
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

[[nodiscard]] bool grad_enabled() noexcept;

/// Creates the result variable of an op. `backward` is attached only if some
/// parent requires a gradient.
Variable make_result(Tensor value, std::vector<Variable> parents,
                     std::function<void(Node&)> backward);

/// Runs reverse accumulation from a single-element `root`, seeding d(root)=1.
void backward(const Variable& root);

/// Named trainable tensor.
struct Parameter {
    std::string name;
    Variable var;
};

} // namespace ldh::ag
