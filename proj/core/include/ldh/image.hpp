#pragma once

#include <span>
#include <vector>

#include "ldh/tensor.hpp"

namespace ldh {

/// Planar C×H×W raster of doubles. Base for the image-like domain types.
class Raster {
public:
    Raster() = default;
    Raster(int channels, int height, int width, double fill = 0.0);

    [[nodiscard]] int channels() const noexcept { return channels_; }
    [[nodiscard]] int height() const noexcept { return height_; }
    [[nodiscard]] int width() const noexcept { return width_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }

    [[nodiscard]] double& at(int c, int y, int x) noexcept { return data_[offset(c, y, x)]; }
    [[nodiscard]] double at(int c, int y, int x) const noexcept { return data_[offset(c, y, x)]; }

    [[nodiscard]] std::span<double> data() noexcept { return data_; }
    [[nodiscard]] std::span<const double> data() const noexcept { return data_; }

    /// Single-sample tensor 1×C×H×W.
    [[nodiscard]] Tensor to_tensor() const;

    friend bool operator==(const Raster&, const Raster&) = default;

protected:
    /// Copies sample `n` of `t`, requiring `channels` channels.
    Raster(const Tensor& t, int n, int channels);

private:
    [[nodiscard]] std::size_t offset(int c, int y, int x) const noexcept
    {
        return (static_cast<std::size_t>(c) * height_ + y) * width_ + x;
    }

    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

/// RGB image with values in [0,1]: covers, secrets, stegos and revealed secrets.
class Image : public Raster {
public:
    Image() = default;
    Image(int height, int width, double fill = 0.0) : Raster(3, height, width, fill) {}
    static Image from_tensor(const Tensor& t, int n = 0) { return Image(t, n); }

    /// True when every value lies in [0,1].
    [[nodiscard]] bool in_unit_range() const;

private:
    Image(const Tensor& t, int n) : Raster(t, n, 3) {}
};

/// Signed residual produced by the hiding network, side = secret side / omega.
class SecretCode : public Raster {
public:
    SecretCode() = default;
    SecretCode(int height, int width, double fill = 0.0) : Raster(3, height, width, fill) {}
    static SecretCode from_tensor(const Tensor& t, int n = 0) { return SecretCode(t, n); }

private:
    SecretCode(const Tensor& t, int n) : Raster(t, n, 3) {}
};

/// Single-channel map in [0,1] (soft) or {0,1} (hard) marking payload pixels.
class LocationMap : public Raster {
public:
    LocationMap() = default;
    LocationMap(int height, int width, double fill = 0.0) : Raster(1, height, width, fill) {}
    static LocationMap from_tensor(const Tensor& t, int n = 0) { return LocationMap(t, n); }

    [[nodiscard]] double& at(int y, int x) noexcept { return Raster::at(0, y, x); }
    [[nodiscard]] double at(int y, int x) const noexcept { return Raster::at(0, y, x); }

    [[nodiscard]] bool is_binary() const;
    /// Hard map: 1 where value > threshold.
    [[nodiscard]] LocationMap thresholded(double threshold = 0.5) const;

private:
    LocationMap(const Tensor& t, int n) : Raster(t, n, 1) {}
};

/// Stacks rasters of identical shape into an N×C×H×W tensor.
template <class R>
Tensor batch_of(std::span<const R> items)
{
    std::vector<Tensor> parts;
    parts.reserve(items.size());
    for (const auto& item : items) {
        parts.push_back(item.to_tensor());
    }
    return stack(parts);
}

} // namespace ldh
