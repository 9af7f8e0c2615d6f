#include "ldh/tensor.hpp"

#include <algorithm>
#include <sstream>

namespace ldh {

std::string Shape::str() const
{
    std::ostringstream os;
    os << '[' << n << 'x' << c << 'x' << h << 'x' << w << ']';
    return os.str();
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(shape), data_(shape.numel(), fill)
{
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data))
{
    if (data_.size() != shape_.numel()) {
        throw ShapeError("tensor data size does not match shape " + shape_.str());
    }
}

void Tensor::fill(double v)
{
    std::fill(data_.begin(), data_.end(), v);
}

void Tensor::add_(const Tensor& other)
{
    require_same_shape(shape_, other.shape_, "Tensor::add_");
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += other.data_[i];
    }
}

Tensor Tensor::slice(int first, int count) const
{
    if (first < 0 || count < 0 || first + count > shape_.n) {
        throw ShapeError("slice out of range for " + shape_.str());
    }
    Shape s = shape_;
    s.n = count;
    const std::size_t per = static_cast<std::size_t>(shape_.c) * shape_.plane();
    std::vector<double> out(data_.begin() + static_cast<std::ptrdiff_t>(first * per),
                            data_.begin() + static_cast<std::ptrdiff_t>((first + count) * per));
    return Tensor(s, std::move(out));
}

Tensor stack(std::span<const Tensor> parts)
{
    if (parts.empty()) {
        return {};
    }
    Shape s = parts.front().shape();
    int total = 0;
    for (const auto& p : parts) {
        Shape q = p.shape();
        if (q.c != s.c || q.h != s.h || q.w != s.w) {
            throw ShapeError("stack: mismatched shapes " + s.str() + " vs " + q.str());
        }
        total += q.n;
    }
    s.n = total;
    std::vector<double> data;
    data.reserve(s.numel());
    for (const auto& p : parts) {
        data.insert(data.end(), p.storage().begin(), p.storage().end());
    }
    return Tensor(s, std::move(data));
}

void require_same_shape(const Shape& a, const Shape& b, const char* what)
{
    if (!(a == b)) {
        throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
    }
}

} // namespace ldh
