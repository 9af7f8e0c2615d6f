#include "ldh/optimizer.hpp"

#include <cmath>

namespace ldh {

void Adam::step(const std::vector<ag::Parameter>& params, double lr)
{
    for (const auto& p : params) {
        const Tensor& g = p.var.grad();
        if (g.empty()) {
            continue;
        }
        Slot& s = slots_[p.name];
        if (s.m.empty()) {
            s.m = Tensor(g.shape());
            s.v = Tensor(g.shape());
        }
        require_same_shape(s.m.shape(), g.shape(), "Adam state");
        ++s.t;
        const double c1 = 1.0 - std::pow(beta1, static_cast<double>(s.t));
        const double c2 = 1.0 - std::pow(beta2, static_cast<double>(s.t));
        Tensor& w = p.var.mutable_value();
        for (std::size_t i = 0; i < g.size(); ++i) {
            s.m[i] = beta1 * s.m[i] + (1.0 - beta1) * g[i];
            s.v[i] = beta2 * s.v[i] + (1.0 - beta2) * g[i] * g[i];
            const double mh = s.m[i] / c1;
            const double vh = s.v[i] / c2;
            w[i] -= lr * mh / (std::sqrt(vh) + eps);
        }
    }
}

std::uint64_t Adam::steps(const std::string& name) const
{
    const auto it = slots_.find(name);
    return it == slots_.end() ? 0 : it->second.t;
}

std::map<std::string, Tensor> Adam::state() const
{
    std::map<std::string, Tensor> out;
    for (const auto& [name, s] : slots_) {
        out.emplace("adam.m." + name, s.m);
        out.emplace("adam.v." + name, s.v);
        out.emplace("adam.t." + name, Tensor(Shape{1, 1, 1, 1}, static_cast<double>(s.t)));
    }
    return out;
}

void Adam::restore(const std::map<std::string, Tensor>& tensors)
{
    slots_.clear();
    const std::string mp = "adam.m.";
    for (const auto& [key, m] : tensors) {
        if (key.rfind(mp, 0) != 0) {
            continue;
        }
        const std::string name = key.substr(mp.size());
        const auto v = tensors.find("adam.v." + name);
        const auto t = tensors.find("adam.t." + name);
        if (v == tensors.end() || t == tensors.end()) {
            throw std::runtime_error("incomplete optimizer state for " + name);
        }
        slots_[name] = Slot{m, v->second, static_cast<std::uint64_t>(t->second[0])};
    }
}

} // namespace ldh
