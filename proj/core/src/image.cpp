#include "ldh/image.hpp"

#include <algorithm>

namespace ldh {

Raster::Raster(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width),
      data_(static_cast<std::size_t>(channels) * height * width, fill)
{
    if (channels <= 0 || height <= 0 || width <= 0) {
        throw ShapeError("raster dimensions must be positive");
    }
}

Raster::Raster(const Tensor& t, int n, int channels)
{
    const Shape s = t.shape();
    if (s.c != channels) {
        throw ShapeError("expected " + std::to_string(channels) + " channels, got " + s.str());
    }
    if (n < 0 || n >= s.n) {
        throw ShapeError("sample index out of range for " + s.str());
    }
    channels_ = s.c;
    height_ = s.h;
    width_ = s.w;
    const std::size_t per = static_cast<std::size_t>(s.c) * s.plane();
    data_.assign(t.sample(n), t.sample(n) + per);
}

Tensor Raster::to_tensor() const
{
    return Tensor(Shape{1, channels_, height_, width_}, data_);
}

bool Image::in_unit_range() const
{
    const auto d = data();
    return std::all_of(d.begin(), d.end(), [](double v) { return v >= 0.0 && v <= 1.0; });
}

bool LocationMap::is_binary() const
{
    const auto d = data();
    return std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0 || v == 1.0; });
}

LocationMap LocationMap::thresholded(double threshold) const
{
    LocationMap out(height(), width());
    const auto src = data();
    auto dst = out.data();
    for (std::size_t i = 0; i < src.size(); ++i) {
        dst[i] = src[i] > threshold ? 1.0 : 0.0;
    }
    return out;
}

} // namespace ldh
