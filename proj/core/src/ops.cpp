#include "ldh/ops.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ldh::ag {
namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatMap = Eigen::Map<RowMatrix>;
using CMatMap = Eigen::Map<const RowMatrix>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unfolds one C×H×W image into a (C·k·k)×(Ho·Wo) matrix.
void im2col(const double* x, int channels, int h, int w, int k, int pad, double* cols)
{
    const int ho = h + 2 * pad - k + 1;
    const int wo = w + 2 * pad - k + 1;
    for (int c = 0; c < channels; ++c) {
        const double* plane = x + static_cast<std::size_t>(c) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                double* row = cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * ho * wo;
                for (int oy = 0; oy < ho; ++oy) {
                    double* dst = row + static_cast<std::size_t>(oy) * wo;
                    const int iy = oy + ky - pad;
                    if (iy < 0 || iy >= h) {
                        std::fill(dst, dst + wo, 0.0);
                        continue;
                    }
                    const double* src = plane + static_cast<std::size_t>(iy) * w;
                    const int lo = std::max(0, pad - kx);
                    const int hi = std::min(wo, w + pad - kx);
                    std::fill(dst, dst + lo, 0.0);
                    if (hi > lo) {
                        std::copy(src + lo + kx - pad, src + hi + kx - pad, dst + lo);
                    }
                    if (hi < wo) {
                        std::fill(dst + std::max(hi, lo), dst + wo, 0.0);
                    }
                }
            }
        }
    }
}

// Adjoint of im2col: scatters (C·k·k)×(Ho·Wo) back into C×H×W (accumulating).
void col2im(const double* cols, int channels, int h, int w, int k, int pad, double* x)
{
    const int ho = h + 2 * pad - k + 1;
    const int wo = w + 2 * pad - k + 1;
    for (int c = 0; c < channels; ++c) {
        double* plane = x + static_cast<std::size_t>(c) * h * w;
        for (int ky = 0; ky < k; ++ky) {
            for (int kx = 0; kx < k; ++kx) {
                const double* row =
                    cols + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * ho * wo;
                for (int oy = 0; oy < ho; ++oy) {
                    const int iy = oy + ky - pad;
                    if (iy < 0 || iy >= h) {
                        continue;
                    }
                    const double* src = row + static_cast<std::size_t>(oy) * wo;
                    double* dst = plane + static_cast<std::size_t>(iy) * w;
                    const int lo = std::max(0, pad - kx);
                    const int hi = std::min(wo, w + pad - kx);
                    for (int ox = lo; ox < hi; ++ox) {
                        dst[ox + kx - pad] += src[ox];
                    }
                }
            }
        }
    }
}

template <class F>
Tensor unary(const Variable& x, F&& f)
{
    Tensor out(x.shape());
    const auto in = x.value().data();
    for (std::size_t i = 0; i < in.size(); ++i) {
        out[i] = f(in[i]);
    }
    return out;
}

void accumulate(Node& parent, const Tensor& delta)
{
    if (parent.requires_grad) {
        parent.grad_buffer().add_(delta);
    }
}

} // namespace

Variable conv2d(const Variable& x, const Variable& weight, const Variable& bias, int pad)
{
    const Shape xs = x.shape();
    const Shape ws = weight.shape();
    if (ws.c != xs.c || ws.h != ws.w) {
        throw ShapeError("conv2d: weight " + ws.str() + " incompatible with input " + xs.str());
    }
    const int k = ws.h;
    const int out_ch = ws.n;
    const int ho = xs.h + 2 * pad - k + 1;
    const int wo = xs.w + 2 * pad - k + 1;
    if (ho <= 0 || wo <= 0) {
        throw ShapeError("conv2d: input " + xs.str() + " smaller than kernel");
    }
    if (bias.defined() && bias.value().size() != static_cast<std::size_t>(out_ch)) {
        throw ShapeError("conv2d: bias size mismatch");
    }
    const int ckk = xs.c * k * k;
    const int hw = ho * wo;
    const bool direct = (k == 1 && pad == 0);

    Tensor out(Shape{xs.n, out_ch, ho, wo});
    std::vector<double> cols(direct ? 0 : static_cast<std::size_t>(ckk) * hw);
    const double* wdata = weight.value().data().data();
    for (int n = 0; n < xs.n; ++n) {
        const double* colp = x.value().sample(n);
        if (!direct) {
            im2col(colp, xs.c, xs.h, xs.w, k, pad, cols.data());
            colp = cols.data();
        }
        double* o = out.sample(n);
        MatMap(o, out_ch, hw).noalias() = CMatMap(wdata, out_ch, ckk) * CMatMap(colp, ckk, hw);
        if (bias.defined()) {
            const auto b = bias.value().data();
            for (int oc = 0; oc < out_ch; ++oc) {
                double* p = o + static_cast<std::size_t>(oc) * hw;
                for (int i = 0; i < hw; ++i) {
                    p[i] += b[oc];
                }
            }
        }
    }

    std::vector<Variable> parents{x, weight};
    if (bias.defined()) {
        parents.push_back(bias);
    }
    return make_result(std::move(out), std::move(parents),
                       [xs, ws, k, pad, ho, wo, ckk, hw, direct](Node& self) {
        Node& xn = *self.parents[0];
        Node& wn = *self.parents[1];
        Node* bn = self.parents.size() > 2 ? self.parents[2].get() : nullptr;
        const int out_ch = ws.n;
        std::vector<double> cols(direct ? 0 : static_cast<std::size_t>(ckk) * hw);
        std::vector<double> dcols(xn.requires_grad && !direct ? static_cast<std::size_t>(ckk) * hw : 0);
        double* dw = wn.requires_grad ? wn.grad_buffer().data().data() : nullptr;
        double* db = (bn && bn->requires_grad) ? bn->grad_buffer().data().data() : nullptr;
        double* dx = xn.requires_grad ? xn.grad_buffer().data().data() : nullptr;
        const double* wdata = wn.value.data().data();
        for (int n = 0; n < xs.n; ++n) {
            const double* g = self.grad.sample(n);
            if (dw) {
                const double* colp = xn.value.sample(n);
                if (!direct) {
                    im2col(colp, xs.c, xs.h, xs.w, k, pad, cols.data());
                    colp = cols.data();
                }
                MatMap(dw, out_ch, ckk).noalias() +=
                    CMatMap(g, out_ch, hw) * CMatMap(colp, ckk, hw).transpose();
            }
            if (db) {
                for (int oc = 0; oc < out_ch; ++oc) {
                    const double* p = g + static_cast<std::size_t>(oc) * hw;
                    double s = 0.0;
                    for (int i = 0; i < hw; ++i) {
                        s += p[i];
                    }
                    db[oc] += s;
                }
            }
            if (dx) {
                double* dxn = dx + static_cast<std::size_t>(n) * xs.c * xs.h * xs.w;
                const auto wt = CMatMap(wdata, out_ch, ckk).transpose();
                if (direct) {
                    MatMap(dxn, ckk, hw).noalias() += wt * CMatMap(g, out_ch, hw);
                } else {
                    MatMap(dcols.data(), ckk, hw).noalias() = wt * CMatMap(g, out_ch, hw);
                    col2im(dcols.data(), xs.c, xs.h, xs.w, k, pad, dxn);
                }
            }
        }
    });
}

Variable leaky_relu(const Variable& x, double slope)
{
    Tensor out = unary(x, [slope](double v) { return v > 0.0 ? v : slope * v; });
    return make_result(std::move(out), {x}, [slope](Node& self) {
        Node& xn = *self.parents[0];
        Tensor& dx = xn.grad_buffer();
        const auto in = xn.value.data();
        for (std::size_t i = 0; i < in.size(); ++i) {
            dx[i] += self.grad[i] * (in[i] > 0.0 ? 1.0 : slope);
        }
    });
}

Variable sigmoid(const Variable& x)
{
    Tensor out = unary(x, [](double v) {
        // Split by sign so exp never overflows.
        if (v >= 0.0) {
            return 1.0 / (1.0 + std::exp(-v));
        }
        const double e = std::exp(v);
        return e / (1.0 + e);
    });
    return make_result(out, {x}, [out](Node& self) {
        Tensor& dx = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < out.size(); ++i) {
            dx[i] += self.grad[i] * out[i] * (1.0 - out[i]);
        }
    });
}

Variable max_pool2(const Variable& x)
{
    const Shape s = x.shape();
    if (s.h % 2 != 0 || s.w % 2 != 0) {
        throw ShapeError("max_pool2: odd spatial size " + s.str());
    }
    const Shape os{s.n, s.c, s.h / 2, s.w / 2};
    Tensor out(os);
    std::vector<std::size_t> argmax(os.numel());
    const Tensor& in = x.value();
    std::size_t o = 0;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < os.h; ++y) {
                for (int xx = 0; xx < os.w; ++xx, ++o) {
                    std::size_t best = in.index(n, c, 2 * y, 2 * xx);
                    for (int dy = 0; dy < 2; ++dy) {
                        for (int dx = 0; dx < 2; ++dx) {
                            const std::size_t idx = in.index(n, c, 2 * y + dy, 2 * xx + dx);
                            if (in[idx] > in[best]) {
                                best = idx;
                            }
                        }
                    }
                    argmax[o] = best;
                    out[o] = in[best];
                }
            }
        }
    }
    return make_result(std::move(out), {x}, [argmax = std::move(argmax)](Node& self) {
        Tensor& dx = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < argmax.size(); ++i) {
            dx[argmax[i]] += self.grad[i];
        }
    });
}

Variable upsample_nearest2(const Variable& x)
{
    const Shape s = x.shape();
    const Shape os{s.n, s.c, s.h * 2, s.w * 2};
    Tensor out(os);
    const Tensor& in = x.value();
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < os.h; ++y) {
                for (int xx = 0; xx < os.w; ++xx) {
                    out.at(n, c, y, xx) = in.at(n, c, y / 2, xx / 2);
                }
            }
        }
    }
    return make_result(std::move(out), {x}, [s, os](Node& self) {
        Tensor& dx = self.parents[0]->grad_buffer();
        for (int n = 0; n < os.n; ++n) {
            for (int c = 0; c < os.c; ++c) {
                for (int y = 0; y < os.h; ++y) {
                    for (int xx = 0; xx < os.w; ++xx) {
                        dx.at(n, c, y / 2, xx / 2) += self.grad.at(n, c, y, xx);
                    }
                }
            }
        }
    });
}

Variable concat_channels(const Variable& a, const Variable& b)
{
    const Shape sa = a.shape();
    const Shape sb = b.shape();
    if (sa.n != sb.n || sa.h != sb.h || sa.w != sb.w) {
        throw ShapeError("concat_channels: " + sa.str() + " vs " + sb.str());
    }
    const Shape os{sa.n, sa.c + sb.c, sa.h, sa.w};
    Tensor out(os);
    const std::size_t pa = static_cast<std::size_t>(sa.c) * sa.plane();
    const std::size_t pb = static_cast<std::size_t>(sb.c) * sb.plane();
    for (int n = 0; n < sa.n; ++n) {
        std::copy_n(a.value().sample(n), pa, out.sample(n));
        std::copy_n(b.value().sample(n), pb, out.sample(n) + pa);
    }
    return make_result(std::move(out), {a, b}, [sa, pa, pb](Node& self) {
        Node& an = *self.parents[0];
        Node& bn = *self.parents[1];
        for (int n = 0; n < sa.n; ++n) {
            const double* g = self.grad.sample(n);
            if (an.requires_grad) {
                double* d = an.grad_buffer().sample(n);
                for (std::size_t i = 0; i < pa; ++i) {
                    d[i] += g[i];
                }
            }
            if (bn.requires_grad) {
                double* d = bn.grad_buffer().sample(n);
                for (std::size_t i = 0; i < pb; ++i) {
                    d[i] += g[pa + i];
                }
            }
        }
    });
}

Variable add(const Variable& a, const Variable& b)
{
    require_same_shape(a.shape(), b.shape(), "add");
    Tensor out = a.value();
    out.add_(b.value());
    return make_result(std::move(out), {a, b}, [](Node& self) {
        accumulate(*self.parents[0], self.grad);
        accumulate(*self.parents[1], self.grad);
    });
}

Variable sub(const Variable& a, const Variable& b)
{
    require_same_shape(a.shape(), b.shape(), "sub");
    Tensor out = a.value();
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] -= b.value()[i];
    }
    return make_result(std::move(out), {a, b}, [](Node& self) {
        accumulate(*self.parents[0], self.grad);
        Node& bn = *self.parents[1];
        if (bn.requires_grad) {
            Tensor& d = bn.grad_buffer();
            for (std::size_t i = 0; i < d.size(); ++i) {
                d[i] -= self.grad[i];
            }
        }
    });
}

Variable scale(const Variable& x, double s)
{
    Tensor out = unary(x, [s](double v) { return v * s; });
    return make_result(std::move(out), {x}, [s](Node& self) {
        Tensor& d = self.parents[0]->grad_buffer();
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] += s * self.grad[i];
        }
    });
}

Variable add_scalar(const Variable& x, double s)
{
    Tensor out = unary(x, [s](double v) { return v + s; });
    return make_result(std::move(out), {x},
                       [](Node& self) { accumulate(*self.parents[0], self.grad); });
}

Variable clamp01(const Variable& x)
{
    Tensor out = unary(x, [](double v) { return std::clamp(v, 0.0, 1.0); });
    return make_result(std::move(out), {x}, [](Node& self) {
        Node& xn = *self.parents[0];
        Tensor& d = xn.grad_buffer();
        for (std::size_t i = 0; i < d.size(); ++i) {
            const double v = xn.value[i];
            if (v >= 0.0 && v <= 1.0) {
                d[i] += self.grad[i];
            }
        }
    });
}

Variable soft_round(const Variable& x)
{
    Tensor out = unary(x, [](double v) { return v - std::sin(kTwoPi * v) / kTwoPi; });
    return make_result(std::move(out), {x}, [](Node& self) {
        Node& xn = *self.parents[0];
        Tensor& d = xn.grad_buffer();
        for (std::size_t i = 0; i < d.size(); ++i) {
            d[i] += self.grad[i] * (1.0 - std::cos(kTwoPi * xn.value[i]));
        }
    });
}

Variable mean_pow_distance(const Variable& a, const Variable& b, double p)
{
    require_same_shape(a.shape(), b.shape(), "mean_pow_distance");
    if (!(p >= 1.0)) {
        throw std::invalid_argument("mean_pow_distance: norm order must be >= 1");
    }
    const auto av = a.value().data();
    const auto bv = b.value().data();
    const std::size_t count = av.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = std::abs(av[i] - bv[i]);
        sum += p == 1.0 ? d : (p == 2.0 ? d * d : std::pow(d, p));
    }
    Tensor out(Shape{1, 1, 1, 1}, count ? sum / static_cast<double>(count) : 0.0);
    return make_result(std::move(out), {a, b}, [p, count](Node& self) {
        Node& an = *self.parents[0];
        Node& bn = *self.parents[1];
        const double g = self.grad[0] / static_cast<double>(count);
        Tensor* da = an.requires_grad ? &an.grad_buffer() : nullptr;
        Tensor* db = bn.requires_grad ? &bn.grad_buffer() : nullptr;
        for (std::size_t i = 0; i < count; ++i) {
            const double diff = an.value[i] - bn.value[i];
            double dd;
            if (p == 1.0) {
                dd = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
            } else if (p == 2.0) {
                dd = 2.0 * diff;
            } else {
                dd = p * std::pow(std::abs(diff), p - 1.0) * (diff >= 0.0 ? 1.0 : -1.0);
            }
            if (da) {
                (*da)[i] += g * dd;
            }
            if (db) {
                (*db)[i] -= g * dd;
            }
        }
    });
}

Variable weighted_sum(std::span<const Variable> terms, std::span<const double> weights)
{
    if (terms.size() != weights.size()) {
        throw std::invalid_argument("weighted_sum: terms/weights length mismatch");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        total += weights[i] * terms[i].item();
    }
    std::vector<double> w(weights.begin(), weights.end());
    return make_result(Tensor(Shape{1, 1, 1, 1}, total),
                       std::vector<Variable>(terms.begin(), terms.end()),
                       [w = std::move(w)](Node& self) {
        for (std::size_t i = 0; i < w.size(); ++i) {
            Node& t = *self.parents[i];
            if (t.requires_grad && w[i] != 0.0) {
                t.grad_buffer()[0] += w[i] * self.grad[0];
            }
        }
    });
}

Variable channel_affine(const Variable& x, const std::array<double, 9>& m,
                        const std::array<double, 3>& offset)
{
    const Shape s = x.shape();
    if (s.c != 3) {
        throw ShapeError("channel_affine: expected 3 channels, got " + s.str());
    }
    Tensor out(s);
    const std::size_t plane = s.plane();
    for (int n = 0; n < s.n; ++n) {
        const double* in = x.value().sample(n);
        double* o = out.sample(n);
        for (std::size_t i = 0; i < plane; ++i) {
            const double r = in[i];
            const double g = in[plane + i];
            const double b = in[2 * plane + i];
            for (int c = 0; c < 3; ++c) {
                o[c * plane + i] = m[c * 3] * r + m[c * 3 + 1] * g + m[c * 3 + 2] * b + offset[c];
            }
        }
    }
    return make_result(std::move(out), {x}, [m, s, plane](Node& self) {
        Tensor& d = self.parents[0]->grad_buffer();
        for (int n = 0; n < s.n; ++n) {
            const double* g = self.grad.sample(n);
            double* dx = d.sample(n);
            for (std::size_t i = 0; i < plane; ++i) {
                for (int ic = 0; ic < 3; ++ic) {
                    dx[ic * plane + i] += m[ic] * g[i] + m[3 + ic] * g[plane + i]
                        + m[6 + ic] * g[2 * plane + i];
                }
            }
        }
    });
}

namespace {

// Orthonormal DCT-II basis: basis[u][x] = c(u) cos((2x+1) u pi / 16).
const std::array<double, 64>& dct_basis()
{
    static const std::array<double, 64> basis = [] {
        std::array<double, 64> b{};
        for (int u = 0; u < 8; ++u) {
            const double cu = u == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0);
            for (int x = 0; x < 8; ++x) {
                b[u * 8 + x] = cu * std::cos((2.0 * x + 1.0) * u * std::numbers::pi / 16.0);
            }
        }
        return b;
    }();
    return basis;
}

// out = A * blk * A^T (forward) or A^T * blk * A (inverse), for each 8×8 block.
void block_transform(const Tensor& in, Tensor& out, bool inverse, bool accumulate_out)
{
    const Shape s = in.shape();
    const auto& a = dct_basis();
    double tmp[64];
    double blk[64];
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int by = 0; by < s.h; by += 8) {
                for (int bx = 0; bx < s.w; bx += 8) {
                    for (int y = 0; y < 8; ++y) {
                        for (int x = 0; x < 8; ++x) {
                            blk[y * 8 + x] = in.at(n, c, by + y, bx + x);
                        }
                    }
                    // rows
                    for (int y = 0; y < 8; ++y) {
                        for (int u = 0; u < 8; ++u) {
                            double acc = 0.0;
                            for (int x = 0; x < 8; ++x) {
                                acc += (inverse ? a[x * 8 + u] : a[u * 8 + x]) * blk[y * 8 + x];
                            }
                            tmp[y * 8 + u] = acc;
                        }
                    }
                    // columns
                    for (int v = 0; v < 8; ++v) {
                        for (int u = 0; u < 8; ++u) {
                            double acc = 0.0;
                            for (int y = 0; y < 8; ++y) {
                                acc += (inverse ? a[y * 8 + v] : a[v * 8 + y]) * tmp[y * 8 + u];
                            }
                            double& dst = out.at(n, c, by + v, bx + u);
                            dst = accumulate_out ? dst + acc : acc;
                        }
                    }
                }
            }
        }
    }
}

} // namespace

Variable block_dct8(const Variable& x, bool inverse)
{
    const Shape s = x.shape();
    if (s.h % 8 != 0 || s.w % 8 != 0) {
        throw ShapeError("block_dct8: spatial size must be a multiple of 8, got " + s.str());
    }
    Tensor out(s);
    block_transform(x.value(), out, inverse, false);
    // The transform is orthonormal, so its adjoint is the opposite direction.
    return make_result(std::move(out), {x}, [inverse](Node& self) {
        block_transform(self.grad, self.parents[0]->grad_buffer(), !inverse, true);
    });
}

Variable block_scale8(const Variable& x, std::span<const double> table)
{
    const Shape s = x.shape();
    if (table.size() != static_cast<std::size_t>(s.c) * 64) {
        throw ShapeError("block_scale8: table must hold 64 entries per channel");
    }
    std::vector<double> t(table.begin(), table.end());
    Tensor out(s);
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < s.h; ++y) {
                for (int xx = 0; xx < s.w; ++xx) {
                    out.at(n, c, y, xx) = x.value().at(n, c, y, xx) * t[c * 64 + (y % 8) * 8 + xx % 8];
                }
            }
        }
    }
    return make_result(std::move(out), {x}, [s, t = std::move(t)](Node& self) {
        Tensor& d = self.parents[0]->grad_buffer();
        for (int n = 0; n < s.n; ++n) {
            for (int c = 0; c < s.c; ++c) {
                for (int y = 0; y < s.h; ++y) {
                    for (int xx = 0; xx < s.w; ++xx) {
                        d.at(n, c, y, xx) += self.grad.at(n, c, y, xx) * t[c * 64 + (y % 8) * 8 + xx % 8];
                    }
                }
            }
        }
    });
}

Variable mask_mix(const Variable& a, const Variable& b, const Tensor& mask)
{
    const Shape s = a.shape();
    require_same_shape(s, b.shape(), "mask_mix");
    if (!(mask.shape() == Shape{s.n, 1, s.h, s.w})) {
        throw ShapeError("mask_mix: mask shape " + mask.shape().str());
    }
    Tensor out(s);
    const std::size_t plane = s.plane();
    for (int n = 0; n < s.n; ++n) {
        const double* m = mask.sample(n);
        for (int c = 0; c < s.c; ++c) {
            const std::size_t off = a.value().index(n, c, 0, 0);
            for (std::size_t i = 0; i < plane; ++i) {
                out[off + i] = m[i] != 0.0 ? b.value()[off + i] : a.value()[off + i];
            }
        }
    }
    return make_result(std::move(out), {a, b}, [s, plane, mask](Node& self) {
        Node& an = *self.parents[0];
        Node& bn = *self.parents[1];
        for (int n = 0; n < s.n; ++n) {
            const double* m = mask.sample(n);
            for (int c = 0; c < s.c; ++c) {
                const std::size_t off = self.grad.index(n, c, 0, 0);
                for (std::size_t i = 0; i < plane; ++i) {
                    Node& target = m[i] != 0.0 ? bn : an;
                    if (target.requires_grad) {
                        target.grad_buffer()[off + i] += self.grad[off + i];
                    }
                }
            }
        }
    });
}

namespace {

int reflect_index(int i, int n)
{
    // Half-sample symmetric extension with period 2n.
    const int period = 2 * n;
    i %= period;
    if (i < 0) {
        i += period;
    }
    return i < n ? i : period - 1 - i;
}

// One 1-D pass along rows (horizontal) or columns. When `adjoint` is set the
// transpose of the filtering operator is applied and accumulated into `out`.
void filter_pass(const Tensor& in, Tensor& out, std::span<const double> kernel, bool horizontal,
                 bool adjoint)
{
    const Shape s = in.shape();
    const int r = static_cast<int>(kernel.size()) / 2;
    for (int n = 0; n < s.n; ++n) {
        for (int c = 0; c < s.c; ++c) {
            for (int y = 0; y < s.h; ++y) {
                for (int x = 0; x < s.w; ++x) {
                    for (int t = -r; t <= r; ++t) {
                        const int sy = horizontal ? y : reflect_index(y + t, s.h);
                        const int sx = horizontal ? reflect_index(x + t, s.w) : x;
                        const double k = kernel[t + r];
                        if (adjoint) {
                            out.at(n, c, sy, sx) += k * in.at(n, c, y, x);
                        } else {
                            out.at(n, c, y, x) += k * in.at(n, c, sy, sx);
                        }
                    }
                }
            }
        }
    }
}

} // namespace

Variable separable_filter(const Variable& x, std::span<const double> kernel)
{
    if (kernel.size() % 2 == 0) {
        throw std::invalid_argument("separable_filter: kernel length must be odd");
    }
    std::vector<double> k(kernel.begin(), kernel.end());
    Tensor tmp(x.shape());
    filter_pass(x.value(), tmp, k, true, false);
    Tensor out(x.shape());
    filter_pass(tmp, out, k, false, false);
    return make_result(std::move(out), {x}, [k = std::move(k)](Node& self) {
        Tensor tmp(self.grad.shape());
        filter_pass(self.grad, tmp, k, false, true);
        filter_pass(tmp, self.parents[0]->grad_buffer(), k, true, true);
    });
}

} // namespace ldh::ag
