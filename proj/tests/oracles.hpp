#pragma once

// Independent reference implementations used as test oracles. They share no
// code with the library beyond the container types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "ldh/image.hpp"

namespace oracle {

inline ldh::Image random_image(int h, int w, std::uint64_t seed, double lo = 0.0, double hi = 1.0)
{
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    ldh::Image img(h, w);
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                img.at(c, y, x) = dist(gen);
            }
        }
    }
    return img;
}

// Random image with 8-bit values.
inline ldh::Image random_byte_image(int h, int w, std::uint64_t seed)
{
    std::mt19937_64 gen(seed);
    ldh::Image img(h, w);
    for (auto& v : img.data()) {
        v = static_cast<double>(gen() % 256) / 255.0;
    }
    return img;
}

inline double apd(const ldh::Raster& a, const ldh::Raster& b)
{
    long double sum = 0;
    long n = 0;
    for (int c = 0; c < a.channels(); ++c) {
        for (int y = 0; y < a.height(); ++y) {
            for (int x = 0; x < a.width(); ++x) {
                sum += std::fabs(a.at(c, y, x) * 255.0 - b.at(c, y, x) * 255.0);
                ++n;
            }
        }
    }
    return static_cast<double>(sum / n);
}

inline double mse(const ldh::Raster& a, const ldh::Raster& b)
{
    long double sum = 0;
    long n = 0;
    for (int c = 0; c < a.channels(); ++c) {
        for (int y = 0; y < a.height(); ++y) {
            for (int x = 0; x < a.width(); ++x) {
                const long double d = a.at(c, y, x) - b.at(c, y, x);
                sum += d * d;
                ++n;
            }
        }
    }
    return static_cast<double>(sum / n);
}

inline double psnr(const ldh::Raster& a, const ldh::Raster& b)
{
    return -10.0 * std::log10(oracle::mse(a, b));
}

inline double mean_pow(const ldh::Raster& a, const ldh::Raster& b, double p)
{
    long double sum = 0;
    const auto da = a.data();
    const auto db = b.data();
    for (std::size_t i = 0; i < da.size(); ++i) {
        sum += std::pow(std::fabs(da[i] - db[i]), p);
    }
    return static_cast<double>(sum / da.size());
}

// Windowed SSIM: full 2-D Gaussian window evaluated directly at each valid
// position, no separability.
inline double ssim(const ldh::Raster& a, const ldh::Raster& b, int win = 11, double sigma = 1.5)
{
    const double c1 = (0.01 * 1.0) * (0.01 * 1.0);
    const double c2 = (0.03 * 1.0) * (0.03 * 1.0);
    std::vector<double> w(static_cast<std::size_t>(win * win));
    double total = 0;
    const int r = win / 2;
    for (int i = 0; i < win; ++i) {
        for (int j = 0; j < win; ++j) {
            const double d2 = (i - r) * (i - r) + (j - r) * (j - r);
            w[static_cast<std::size_t>(i * win + j)] = std::exp(-d2 / (2 * sigma * sigma));
            total += w[static_cast<std::size_t>(i * win + j)];
        }
    }
    for (auto& v : w) {
        v /= total;
    }
    double acc = 0;
    for (int c = 0; c < a.channels(); ++c) {
        double chan = 0;
        int count = 0;
        for (int y = 0; y + win <= a.height(); ++y) {
            for (int x = 0; x + win <= a.width(); ++x) {
                double ma = 0, mb = 0;
                for (int i = 0; i < win; ++i) {
                    for (int j = 0; j < win; ++j) {
                        const double k = w[static_cast<std::size_t>(i * win + j)];
                        ma += k * a.at(c, y + i, x + j);
                        mb += k * b.at(c, y + i, x + j);
                    }
                }
                double va = 0, vb = 0, cov = 0;
                for (int i = 0; i < win; ++i) {
                    for (int j = 0; j < win; ++j) {
                        const double k = w[static_cast<std::size_t>(i * win + j)];
                        const double da = a.at(c, y + i, x + j) - ma;
                        const double db = b.at(c, y + i, x + j) - mb;
                        va += k * da * da;
                        vb += k * db * db;
                        cov += k * da * db;
                    }
                }
                chan += ((2 * ma * mb + c1) * (2 * cov + c2))
                      / ((ma * ma + mb * mb + c1) * (va + vb + c2));
                ++count;
            }
        }
        acc += chan / count;
    }
    return acc / a.channels();
}

// Direct 2-D Gaussian convolution with half-sample symmetric extension.
inline ldh::Image blur(const ldh::Image& img, int k, double sigma)
{
    const int r = k / 2;
    std::vector<double> g(static_cast<std::size_t>(k));
    double s = 0;
    for (int i = 0; i < k; ++i) {
        g[static_cast<std::size_t>(i)] = std::exp(-(i - r) * (i - r) / (2 * sigma * sigma));
        s += g[static_cast<std::size_t>(i)];
    }
    for (auto& v : g) {
        v /= s;
    }
    auto reflect = [](int i, int n) {
        while (i < 0 || i >= n) {
            i = i < 0 ? -i - 1 : 2 * n - i - 1;
        }
        return i;
    };
    ldh::Image out(img.height(), img.width());
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x) {
                double acc = 0;
                for (int i = -r; i <= r; ++i) {
                    for (int j = -r; j <= r; ++j) {
                        acc += g[static_cast<std::size_t>(i + r)] * g[static_cast<std::size_t>(j + r)]
                             * img.at(c, reflect(y + i, img.height()), reflect(x + j, img.width()));
                    }
                }
                out.at(c, y, x) = acc;
            }
        }
    }
    return out;
}

// Bilinear sample with pixel-centre alignment and edge clamping.
inline double bilinear(const ldh::Image& img, int c, int y, int x, int oh, int ow)
{
    auto src = [](int d, int in, int out) {
        double s = (d + 0.5) * in / out - 0.5;
        return std::min(std::max(s, 0.0), static_cast<double>(in - 1));
    };
    const double fy = src(y, img.height(), oh);
    const double fx = src(x, img.width(), ow);
    const int y0 = static_cast<int>(std::floor(fy));
    const int x0 = static_cast<int>(std::floor(fx));
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const int x1 = std::min(x0 + 1, img.width() - 1);
    const double ty = fy - y0;
    const double tx = fx - x0;
    return (1 - ty) * (1 - tx) * img.at(c, y0, x0) + (1 - ty) * tx * img.at(c, y0, x1)
         + ty * (1 - tx) * img.at(c, y1, x0) + ty * tx * img.at(c, y1, x1);
}

inline double relative_error(double a, double b)
{
    const double scale = std::max({std::fabs(a), std::fabs(b), 1e-300});
    return std::fabs(a - b) / scale;
}

} // namespace oracle
