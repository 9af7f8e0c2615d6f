#include "ldh/autograd.hpp"

#include <algorithm>
#include <unordered_set>

namespace ldh::ag {
namespace {
thread_local bool t_grad_enabled = true;
}

NoGradGuard::NoGradGuard() : previous_(t_grad_enabled)
{
    t_grad_enabled = false;
}

NoGradGuard::~NoGradGuard()
{
    t_grad_enabled = previous_;
}

bool grad_enabled() noexcept
{
    return t_grad_enabled;
}

Tensor& Node::grad_buffer()
{
    if (grad.empty() && value.size() != 0) {
        grad = Tensor(value.shape());
    }
    return grad;
}

Variable::Variable(Tensor value, bool requires_grad)
    : node_(std::make_shared<Node>())
{
    node_->value = std::move(value);
    node_->requires_grad = requires_grad;
}

void Variable::zero_grad()
{
    if (node_) {
        node_->grad = Tensor();
    }
}

double Variable::item() const
{
    if (node_->value.size() != 1) {
        throw ShapeError("item() on non-scalar variable " + node_->value.shape().str());
    }
    return node_->value[0];
}

Variable make_result(Tensor value, std::vector<Variable> parents,
                     std::function<void(Node&)> backward)
{
    Variable out(std::move(value), false);
    const bool needs = t_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                   [](const Variable& p) { return p.requires_grad(); });
    if (needs) {
        auto& node = *out.node();
        node.requires_grad = true;
        node.parents.reserve(parents.size());
        for (auto& p : parents) {
            node.parents.push_back(p.node());
        }
        node.backward = std::move(backward);
    }
    return out;
}

void backward(const Variable& root)
{
    if (!root.requires_grad()) {
        return;
    }
    if (root.value().size() != 1) {
        throw ShapeError("backward() requires a scalar root");
    }

    // Iterative post-order DFS gives a topological order.
    std::vector<Node*> order;
    std::unordered_set<Node*> seen;
    std::vector<std::pair<Node*, std::size_t>> stack;
    stack.emplace_back(root.node().get(), 0);
    seen.insert(root.node().get());
    while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next < node->parents.size()) {
            Node* parent = node->parents[next++].get();
            if (parent->requires_grad && seen.insert(parent).second) {
                stack.emplace_back(parent, 0);
            }
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }

    root.node()->grad_buffer()[0] += 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        Node* node = *it;
        if (node->backward && !node->grad.empty()) {
            node->backward(*node);
        }
    }
}

} // namespace ldh::ag
