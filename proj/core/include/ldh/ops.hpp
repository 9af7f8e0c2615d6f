#pragma once

#include <array>
#include <span>
#include <vector>

#include "ldh/autograd.hpp"

namespace ldh::ag {

/// Stride-1 2-D convolution. `weight` is O×C×k×k, `bias` is 1×O×1×1 (or
/// undefined), `pad` zero pixels on every side.
Variable conv2d(const Variable& x, const Variable& weight, const Variable& bias, int pad);

Variable leaky_relu(const Variable& x, double slope);
Variable sigmoid(const Variable& x);

/// 2×2 max pooling with stride 2; ties resolve to the first element in
/// row-major order.
Variable max_pool2(const Variable& x);
Variable upsample_nearest2(const Variable& x);
Variable concat_channels(const Variable& a, const Variable& b);

Variable add(const Variable& a, const Variable& b);
Variable sub(const Variable& a, const Variable& b);
Variable scale(const Variable& x, double s);
Variable add_scalar(const Variable& x, double s);

/// Elementwise clamp to [0,1]; the gradient is zero where the input was
/// clipped.
Variable clamp01(const Variable& x);

/// Smooth rounding surrogate x - sin(2*pi*x) / (2*pi).
Variable soft_round(const Variable& x);

/// mean(|a - b|^p) over all elements, returned as a 1×1×1×1 variable.
Variable mean_pow_distance(const Variable& a, const Variable& b, double p);

/// sum_i weights[i] * terms[i] for single-element terms.
Variable weighted_sum(std::span<const Variable> terms, std::span<const double> weights);

/// Per-pixel 3×3 colour matrix (row-major, out = M * in + offset); x must
/// have 3 channels.
Variable channel_affine(const Variable& x, const std::array<double, 9>& matrix,
                        const std::array<double, 3>& offset);

/// Orthonormal 8×8 block DCT-II (or its inverse) applied to every channel.
/// Height and width must be multiples of 8.
Variable block_dct8(const Variable& x, bool inverse);

/// Multiplies coefficient (u,v) of every 8×8 block in channel c by
/// table[c * 64 + u * 8 + v].
Variable block_scale8(const Variable& x, std::span<const double> table);

/// out = mask ? b : a per pixel; `mask` is N×1×H×W with entries in {0,1} and
/// is broadcast over channels.
Variable mask_mix(const Variable& a, const Variable& b, const Tensor& mask);

/// Separable per-channel filter with a symmetric odd-length kernel and
/// half-sample symmetric boundary extension (... c b a | a b c ...).
Variable separable_filter(const Variable& x, std::span<const double> kernel);

} // namespace ldh::ag
