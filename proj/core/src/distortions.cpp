#include "ldh/distortions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "ldh/dataset_io.hpp"
#include "ldh/ops.hpp"

namespace ldh {

const std::array<int, 64> kLumaQuant = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99,
};

const std::array<int, 64> kChromaQuant = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
};

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v)
{
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// JFIF colour conversion on the 0-255 scale.
constexpr std::array<double, 9> kRgbToYcc = {
    0.299,     0.587,     0.114,
    -0.168736, -0.331264, 0.5,
    0.5,       -0.418688, -0.081312,
};
constexpr std::array<double, 9> kYccToRgb = {
    1.0, 0.0,       1.402,
    1.0, -0.344136, -0.714136,
    1.0, 1.772,     0.0,
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    int out = 0;
    try {
        out = std::stoi(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) {
        throw std::invalid_argument("distortion parameter " + key + " expects an integer, got '" + v
                                    + "'");
    }
    return out;
}

double to_double(const std::string& key, const std::string& v)
{
    std::size_t used = 0;
    double out = 0;
    try {
        out = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != v.size() || v.empty()) {
        throw std::invalid_argument("distortion parameter " + key + " expects a number, got '" + v
                                    + "'");
    }
    return out;
}

void require_unit_image(const Image& a, const Image& b, const char* who)
{
    if (a.height() != b.height() || a.width() != b.width()) {
        throw ShapeError(std::string(who) + ": stego and cover shapes differ");
    }
}

std::vector<double> quant_tensor_table(int quality, bool reciprocal)
{
    const auto luma = scaled_quant_table(kLumaQuant, quality);
    const auto chroma = scaled_quant_table(kChromaQuant, quality);
    std::vector<double> table(3 * 64);
    for (int c = 0; c < 3; ++c) {
        const auto& t = c == 0 ? luma : chroma;
        for (int i = 0; i < 64; ++i) {
            const double q = t[static_cast<std::size_t>(i)];
            table[static_cast<std::size_t>(c * 64 + i)] = reciprocal ? 1.0 / q : q;
        }
    }
    return table;
}

} // namespace

std::string to_string(DistortionKind kind)
{
    switch (kind) {
    case DistortionKind::dropout:
        return "dropout";
    case DistortionKind::gaussian:
        return "gaussian";
    case DistortionKind::jpeg:
        return "jpeg";
    case DistortionKind::crop:
        return "crop";
    case DistortionKind::cropout:
        return "cropout";
    }
    return "?";
}

void DistortionSpec::validate() const
{
    switch (kind) {
    case DistortionKind::dropout:
        if (!(p >= 0.0 && p <= 1.0)) {
            throw std::invalid_argument("dropout p must lie in [0,1]");
        }
        break;
    case DistortionKind::gaussian:
        if (kernel < 1 || kernel % 2 == 0) {
            throw std::invalid_argument("gaussian kernel must be odd and positive");
        }
        if (!(sigma > 0.0)) {
            throw std::invalid_argument("gaussian sigma must be positive");
        }
        break;
    case DistortionKind::jpeg:
        if (quality < 1 || quality > 100) {
            throw std::invalid_argument("jpeg quality must lie in [1,100]");
        }
        break;
    case DistortionKind::crop:
    case DistortionKind::cropout:
        if (grid < 1) {
            throw std::invalid_argument("crop grid must be positive");
        }
        if (random_blocks < 0 || random_blocks > grid * grid) {
            throw std::invalid_argument("crop n must lie in [0, grid^2]");
        }
        if (random_blocks > 0 && !blocks.empty()) {
            throw std::invalid_argument("crop takes either blocks= or n=, not both");
        }
        for (int b : blocks) {
            if (b < 0 || b >= grid * grid) {
                throw std::invalid_argument("crop block index " + std::to_string(b) + " out of range");
            }
        }
        break;
    }
}

std::string DistortionSpec::str() const
{
    std::ostringstream os;
    os << to_string(kind) << ':';
    switch (kind) {
    case DistortionKind::dropout:
        os << "p=" << shortest(p);
        break;
    case DistortionKind::gaussian:
        os << "k=" << kernel << ",sigma=" << shortest(sigma);
        break;
    case DistortionKind::jpeg:
        os << "q=" << quality;
        break;
    case DistortionKind::crop:
    case DistortionKind::cropout:
        if (random_blocks > 0) {
            os << "n=" << random_blocks;
        } else {
            os << "blocks=";
            for (std::size_t i = 0; i < blocks.size(); ++i) {
                os << (i ? "," : "") << blocks[i];
            }
        }
        os << ",grid=" << grid;
        break;
    }
    return os.str();
}

// Grammar: kind[:key=value[,value...][,key=value...]]. A bare token extends
// the list of the preceding key (only `blocks` is list-valued).
DistortionSpec DistortionSpec::parse(const std::string& text)
{
    const auto colon = text.find(':');
    const std::string kind = trim(text.substr(0, colon));
    DistortionSpec spec;
    if (kind == "dropout") {
        spec.kind = DistortionKind::dropout;
    } else if (kind == "gaussian") {
        spec.kind = DistortionKind::gaussian;
    } else if (kind == "jpeg") {
        spec.kind = DistortionKind::jpeg;
    } else if (kind == "crop") {
        spec.kind = DistortionKind::crop;
    } else if (kind == "cropout") {
        spec.kind = DistortionKind::cropout;
    } else {
        throw std::invalid_argument("unknown distortion kind '" + kind + "'");
    }
    if (colon != std::string::npos) {
        std::istringstream params(text.substr(colon + 1));
        std::string token;
        std::string key;
        while (std::getline(params, token, ',')) {
            token = trim(token);
            if (token.empty()) {
                continue;
            }
            const auto eq = token.find('=');
            std::string value;
            if (eq == std::string::npos) {
                if (key != "blocks") {
                    throw std::invalid_argument("malformed distortion parameter '" + token + "'");
                }
                value = token;
            } else {
                key = trim(token.substr(0, eq));
                value = trim(token.substr(eq + 1));
            }
            if (key == "p") {
                spec.p = to_double(key, value);
            } else if (key == "k" || key == "kernel") {
                spec.kernel = to_int(key, value);
            } else if (key == "sigma") {
                spec.sigma = to_double(key, value);
            } else if (key == "q" || key == "quality") {
                spec.quality = to_int(key, value);
            } else if (key == "blocks") {
                if (!value.empty()) {
                    spec.blocks.push_back(to_int(key, value));
                }
            } else if (key == "n") {
                spec.random_blocks = to_int(key, value);
            } else if (key == "grid") {
                spec.grid = to_int(key, value);
            } else {
                throw std::invalid_argument("unknown distortion parameter '" + key + "' for " + kind);
            }
        }
    }
    spec.validate();
    return spec;
}

std::array<int, 64> scaled_quant_table(const std::array<int, 64>& base, int quality)
{
    if (quality < 1 || quality > 100) {
        throw std::invalid_argument("jpeg quality must lie in [1,100]");
    }
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> out{};
    for (std::size_t i = 0; i < 64; ++i) {
        out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
    }
    return out;
}

Image dropout_noise(const Image& stego, const Image& cover, double p, Rng& rng)
{
    require_unit_image(stego, cover, "dropout_noise");
    Image out = stego;
    for (int y = 0; y < stego.height(); ++y) {
        for (int x = 0; x < stego.width(); ++x) {
            if (rng.bernoulli(p)) {
                for (int c = 0; c < 3; ++c) {
                    out.at(c, y, x) = cover.at(c, y, x);
                }
            }
        }
    }
    return out;
}

std::vector<double> gaussian_kernel(int kernel, double sigma)
{
    if (kernel < 1 || kernel % 2 == 0 || !(sigma > 0.0)) {
        throw std::invalid_argument("gaussian kernel must be odd with positive sigma");
    }
    std::vector<double> k(static_cast<std::size_t>(kernel));
    const int r = kernel / 2;
    double sum = 0.0;
    for (int i = 0; i < kernel; ++i) {
        const double d = i - r;
        k[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * sigma * sigma));
        sum += k[static_cast<std::size_t>(i)];
    }
    for (double& v : k) {
        v /= sum;
    }
    return k;
}

Image gaussian_blur(const Image& img, int kernel, double sigma)
{
    ag::NoGradGuard guard;
    return Image::from_tensor(gaussian_layer(ag::Variable(img.to_tensor()), kernel, sigma).value());
}

Image jpeg_approx(const Image& img, int quality)
{
    ag::NoGradGuard guard;
    return Image::from_tensor(jpeg_approx_layer(ag::Variable(img.to_tensor()), quality).value());
}

Image crop_attack(const Image& stego, const Image& cover, const std::set<int>& blocks, CropMode mode,
                  int grid)
{
    require_unit_image(stego, cover, "crop_attack");
    if (grid < 1 || stego.height() % grid != 0 || stego.width() % grid != 0) {
        throw std::invalid_argument("crop_attack: grid blocks must tile the image");
    }
    const int bh = stego.height() / grid;
    const int bw = stego.width() / grid;
    Image out = stego;
    for (int b : blocks) {
        if (b < 0 || b >= grid * grid) {
            throw std::invalid_argument("crop_attack: block index " + std::to_string(b)
                                        + " out of range");
        }
        const int top = (b / grid) * bh;
        const int left = (b % grid) * bw;
        for (int c = 0; c < 3; ++c) {
            for (int y = top; y < top + bh; ++y) {
                for (int x = left; x < left + bw; ++x) {
                    out.at(c, y, x) = mode == CropMode::crop ? 0.0 : cover.at(c, y, x);
                }
            }
        }
    }
    return out;
}

Image apply_attack(const DistortionSpec& spec, const Image& stego, const Image& cover, Rng& rng)
{
    spec.validate();
    switch (spec.kind) {
    case DistortionKind::dropout:
        return dropout_noise(stego, cover, spec.p, rng);
    case DistortionKind::gaussian:
        return gaussian_blur(stego, spec.kernel, spec.sigma);
    case DistortionKind::jpeg:
        return jpeg_roundtrip(stego, spec.quality);
    case DistortionKind::crop:
    case DistortionKind::cropout: {
        std::set<int> blocks(spec.blocks.begin(), spec.blocks.end());
        if (spec.random_blocks > 0) {
            std::vector<int> all(static_cast<std::size_t>(spec.grid * spec.grid));
            for (std::size_t i = 0; i < all.size(); ++i) {
                all[i] = static_cast<int>(i);
            }
            rng.shuffle(all);
            blocks = std::set<int>(all.begin(), all.begin() + spec.random_blocks);
        }
        return crop_attack(stego, cover, blocks,
                           spec.kind == DistortionKind::crop ? CropMode::crop : CropMode::cropout,
                           spec.grid);
    }
    }
    throw std::logic_error("unreachable distortion kind");
}

ag::Variable dropout_layer(const ag::Variable& stegos, const ag::Variable& covers, double p,
                           Rng& rng)
{
    const Shape s = stegos.shape();
    if (!(covers.shape() == s)) {
        throw ShapeError("dropout_layer: stego and cover shapes differ");
    }
    Tensor mask(Shape{s.n, 1, s.h, s.w});
    for (double& m : mask.data()) {
        m = rng.bernoulli(p) ? 1.0 : 0.0;
    }
    return ag::mask_mix(stegos, covers, mask);
}

ag::Variable gaussian_layer(const ag::Variable& x, int kernel, double sigma)
{
    return ag::separable_filter(x, gaussian_kernel(kernel, sigma));
}

ag::Variable jpeg_approx_layer(const ag::Variable& x, int quality)
{
    const Shape s = x.shape();
    if (s.c != 3 || s.h % 8 != 0 || s.w % 8 != 0) {
        throw ShapeError("jpeg_approx: expected 3 channels and sides divisible by 8, got " + s.str());
    }
    std::array<double, 9> fwd{};
    std::array<double, 9> inv{};
    for (std::size_t i = 0; i < 9; ++i) {
        fwd[i] = kRgbToYcc[i] * 255.0;
        inv[i] = kYccToRgb[i] / 255.0;
    }
    // Level shift folded in: Y is centred by -128, chroma offsets cancel.
    auto ycc = ag::channel_affine(x, fwd, {-128.0, 0.0, 0.0});
    auto coeffs = ag::block_dct8(ycc, false);
    const auto recip = quant_tensor_table(quality, true);
    const auto table = quant_tensor_table(quality, false);
    auto q = ag::soft_round(ag::block_scale8(coeffs, recip));
    auto restored = ag::block_dct8(ag::block_scale8(q, table), true);
    const double o = 128.0 / 255.0;
    return ag::clamp01(ag::channel_affine(restored, inv, {o, o, o}));
}

ag::Variable apply_noise(const DistortionSpec& spec, const ag::Variable& stegos,
                         const ag::Variable& covers, Rng& rng)
{
    spec.validate();
    switch (spec.kind) {
    case DistortionKind::dropout:
        return dropout_layer(stegos, covers, spec.p, rng);
    case DistortionKind::gaussian:
        return gaussian_layer(stegos, spec.kernel, spec.sigma);
    case DistortionKind::jpeg:
        return jpeg_approx_layer(stegos, spec.quality);
    case DistortionKind::crop:
    case DistortionKind::cropout:
        break;
    }
    throw std::invalid_argument("crop attacks are not available as noise layers");
}

} // namespace ldh
