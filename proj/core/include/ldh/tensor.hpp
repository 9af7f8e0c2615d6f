#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ldh {

/// Shape of a dense NCHW tensor.
struct Shape {
    int n = 0;
    int c = 0;
    int h = 0;
    int w = 0;

    [[nodiscard]] std::size_t numel() const noexcept
    {
        return static_cast<std::size_t>(n) * c * h * w;
    }
    [[nodiscard]] std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
    [[nodiscard]] std::string str() const;

    friend bool operator==(const Shape&, const Shape&) = default;
};

class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dense row-major NCHW tensor of doubles with value semantics.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> data);

    [[nodiscard]] const Shape& shape() const noexcept { return shape_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }
    [[nodiscard]] std::vector<double>& storage() noexcept { return data_; }
    [[nodiscard]] const std::vector<double>& storage() const noexcept { return data_; }

    [[nodiscard]] double& operator[](std::size_t i) noexcept { return data_[i]; }
    [[nodiscard]] double operator[](std::size_t i) const noexcept { return data_[i]; }

    [[nodiscard]] std::size_t index(int n, int c, int y, int x) const noexcept
    {
        return ((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + y) * shape_.w + x;
    }
    [[nodiscard]] double& at(int n, int c, int y, int x) noexcept { return data_[index(n, c, y, x)]; }
    [[nodiscard]] double at(int n, int c, int y, int x) const noexcept { return data_[index(n, c, y, x)]; }

    /// Pointer to the first element of sample `n`.
    [[nodiscard]] double* sample(int n) noexcept { return data_.data() + index(n, 0, 0, 0); }
    [[nodiscard]] const double* sample(int n) const noexcept { return data_.data() + index(n, 0, 0, 0); }

    void fill(double v);
    void add_(const Tensor& other);

    /// Copy of samples [first, first + count).
    [[nodiscard]] Tensor slice(int first, int count) const;

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    Shape shape_{};
    std::vector<double> data_;
};

/// Stacks equally shaped tensors along the batch dimension.
Tensor stack(std::span<const Tensor> parts);

void require_same_shape(const Shape& a, const Shape& b, const char* what);

} // namespace ldh
