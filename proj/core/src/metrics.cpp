#include "ldh/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace ldh {
namespace {

void require_same(const Raster& a, const Raster& b, const char* what)
{
    if (a.channels() != b.channels() || a.height() != b.height() || a.width() != b.width()) {
        throw ShapeError(std::string(what) + ": shape mismatch");
    }
    if (a.size() == 0) {
        throw ShapeError(std::string(what) + ": empty input");
    }
}

std::vector<double> gaussian_window(int size, double sigma)
{
    std::vector<double> w(static_cast<std::size_t>(size));
    const int r = size / 2;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double d = i - r;
        w[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& v : w) {
        v /= sum;
    }
    return w;
}

double ssim_from_moments(double mx, double my, double vx, double vy, double cov)
{
    const double c1 = kSsimK1 * kSsimK1;
    const double c2 = kSsimK2 * kSsimK2;
    return ((2.0 * mx * my + c1) * (2.0 * cov + c2))
         / ((mx * mx + my * my + c1) * (vx + vy + c2));
}

double global_channel_ssim(const Raster& a, const Raster& b, int c)
{
    const int h = a.height();
    const int w = a.width();
    const double n = static_cast<double>(h) * w;
    double mx = 0.0;
    double my = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            mx += a.at(c, y, x);
            my += b.at(c, y, x);
        }
    }
    mx /= n;
    my /= n;
    double vx = 0.0;
    double vy = 0.0;
    double cov = 0.0;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double dx = a.at(c, y, x) - mx;
            const double dy = b.at(c, y, x) - my;
            vx += dx * dx;
            vy += dy * dy;
            cov += dx * dy;
        }
    }
    return ssim_from_moments(mx, my, vx / n, vy / n, cov / n);
}

// Separable Gaussian moments over all valid window positions.
double windowed_channel_ssim(const Raster& a, const Raster& b, int c)
{
    const int h = a.height();
    const int w = a.width();
    const int k = kSsimWindow;
    const int oh = h - k + 1;
    const int ow = w - k + 1;
    const auto g = gaussian_window(k, kSsimSigma);

    // Horizontal pass for the five moment images.
    const std::size_t plane = static_cast<std::size_t>(h) * ow;
    std::vector<double> hx(plane), hy(plane), hxx(plane), hyy(plane), hxy(plane);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < ow; ++x) {
            double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
            for (int i = 0; i < k; ++i) {
                const double wi = g[static_cast<std::size_t>(i)];
                const double va = a.at(c, y, x + i);
                const double vb = b.at(c, y, x + i);
                sx += wi * va;
                sy += wi * vb;
                sxx += wi * va * va;
                syy += wi * vb * vb;
                sxy += wi * va * vb;
            }
            const std::size_t o = static_cast<std::size_t>(y) * ow + x;
            hx[o] = sx;
            hy[o] = sy;
            hxx[o] = sxx;
            hyy[o] = syy;
            hxy[o] = sxy;
        }
    }
    double total = 0.0;
    for (int y = 0; y < oh; ++y) {
        for (int x = 0; x < ow; ++x) {
            double mx = 0.0, my = 0.0, exx = 0.0, eyy = 0.0, exy = 0.0;
            for (int i = 0; i < k; ++i) {
                const double wi = g[static_cast<std::size_t>(i)];
                const std::size_t o = static_cast<std::size_t>(y + i) * ow + x;
                mx += wi * hx[o];
                my += wi * hy[o];
                exx += wi * hxx[o];
                eyy += wi * hyy[o];
                exy += wi * hxy[o];
            }
            total += ssim_from_moments(mx, my, exx - mx * mx, eyy - my * my, exy - mx * my);
        }
    }
    return total / (static_cast<double>(oh) * ow);
}

} // namespace

double apd(const Raster& a, const Raster& b)
{
    require_same(a, b, "apd");
    const auto da = a.data();
    const auto db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        sum += std::abs(da[i] - db[i]);
    }
    return 255.0 * sum / static_cast<double>(da.size());
}

double mse(const Raster& a, const Raster& b)
{
    require_same(a, b, "mse");
    const auto da = a.data();
    const auto db = b.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < da.size(); ++i) {
        const double d = da[i] - db[i];
        sum += d * d;
    }
    return sum / static_cast<double>(da.size());
}

double psnr(const Raster& a, const Raster& b)
{
    const double m = mse(a, b);
    if (m == 0.0) {
        return std::numeric_limits<double>::infinity();
    }
    return 10.0 * std::log10(1.0 / m);
}

double ssim(const Raster& a, const Raster& b, bool global)
{
    require_same(a, b, "ssim");
    if (!global && (a.height() < kSsimWindow || a.width() < kSsimWindow)) {
        throw ShapeError("ssim: image smaller than the 11×11 window");
    }
    if (a == b) {
        return 1.0;
    }
    double sum = 0.0;
    for (int c = 0; c < a.channels(); ++c) {
        sum += global ? global_channel_ssim(a, b, c) : windowed_channel_ssim(a, b, c);
    }
    return sum / a.channels();
}

double locating_iou(const LocationMap& truth, const LocationMap& pred)
{
    require_same(truth, pred, "locating_iou");
    if (!truth.is_binary() || !pred.is_binary()) {
        throw std::invalid_argument("locating_iou: maps must be binary");
    }
    const auto t = truth.data();
    const auto p = pred.data();
    std::size_t inter = 0;
    std::size_t uni = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const bool a = t[i] != 0.0;
        const bool b = p[i] != 0.0;
        inter += (a && b) ? 1 : 0;
        uni += (a || b) ? 1 : 0;
    }
    return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

std::string to_string(PairKind kind)
{
    return kind == PairKind::cover_stego ? "cover-stego" : "secret-revealed";
}

QualityReport measure(const Image& reference, const Image& test, PairKind kind)
{
    return QualityReport{kind, apd(reference, test), psnr(reference, test), ssim(reference, test)};
}

std::string format_metric(double v)
{
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    if (std::isnan(v)) {
        return "nan";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_quality_csv(std::ostream& out, const std::vector<QualityReport>& rows)
{
    out << "pair_kind,apd,psnr,ssim\n";
    for (const auto& r : rows) {
        out << to_string(r.kind) << ',' << format_metric(r.apd) << ',' << format_metric(r.psnr) << ','
            << format_metric(r.ssim) << '\n';
    }
}

} // namespace ldh
