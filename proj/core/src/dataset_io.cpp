#include "ldh/dataset_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <sstream>

#include <jpeglib.h>

namespace ldh {
namespace fs = std::filesystem;

namespace {

std::mutex g_warn_mutex;
WarningHandler g_warn_handler;

std::vector<unsigned char> read_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open image file: " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Image from_interleaved(const unsigned char* px, int height, int width)
{
    Image img(height, width);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            const unsigned char* p = px + (static_cast<std::size_t>(y) * width + x) * 3;
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = p[c] / 255.0;
            }
        }
    }
    return img;
}

std::vector<unsigned char> to_interleaved(const Image& img)
{
    std::vector<unsigned char> px(static_cast<std::size_t>(img.height()) * img.width() * 3);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            for (int c = 0; c < 3; ++c) {
                px[(static_cast<std::size_t>(y) * img.width() + x) * 3 + c] = to_byte(img.at(c, y, x));
            }
        }
    }
    return px;
}

Image decode_png(const std::vector<unsigned char>& bytes, const std::string& name)
{
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
        throw DataError("undecodable PNG " + name + ": " + image.message);
    }
    if (image.format & PNG_FORMAT_FLAG_LINEAR) {
        png_image_free(&image);
        throw DataError("16-bit PNG is not supported: " + name);
    }
    if (!(image.format & PNG_FORMAT_FLAG_COLOR)) {
        warn("grayscale image replicated to RGB: " + name);
    }
    const bool alpha = (image.format & PNG_FORMAT_FLAG_ALPHA) != 0;
    if (alpha) {
        warn("alpha channel dropped: " + name);
    }
    // Reading with alpha keeps colour bytes as stored instead of compositing.
    image.format = alpha ? PNG_FORMAT_RGBA : PNG_FORMAT_RGB;
    std::vector<unsigned char> px(PNG_IMAGE_SIZE(image));
    if (!png_image_finish_read(&image, nullptr, px.data(), 0, nullptr)) {
        throw DataError("undecodable PNG " + name + ": " + image.message);
    }
    if (alpha) {
        std::size_t out = 0;
        for (std::size_t i = 0; i < px.size(); i += 4) {
            px[out++] = px[i];
            px[out++] = px[i + 1];
            px[out++] = px[i + 2];
        }
        px.resize(out);
    }
    return from_interleaved(px.data(), static_cast<int>(image.height), static_cast<int>(image.width));
}

struct JpegErrorManager {
    jpeg_error_mgr pub;
    std::jmp_buf jump;
    char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo)
{
    auto* err = reinterpret_cast<JpegErrorManager*>(cinfo->err);
    (*cinfo->err->format_message)(cinfo, err->message);
    std::longjmp(err->jump, 1);
}

// The decoded pixels are written into `px`; returns false on a libjpeg error.
bool decode_jpeg_raw(const unsigned char* data, std::size_t size, std::vector<unsigned char>& px,
                     int& height, int& width, int& components, std::string& error)
{
    jpeg_decompress_struct cinfo{};
    JpegErrorManager jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        error = jerr.message;
        jpeg_destroy_decompress(&cinfo);
        return false;
    }
    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, data, static_cast<unsigned long>(size));
    jpeg_read_header(&cinfo, TRUE);
    components = cinfo.num_components;
    cinfo.out_color_space = JCS_RGB;
    cinfo.dct_method = JDCT_ISLOW;
    jpeg_start_decompress(&cinfo);
    height = static_cast<int>(cinfo.output_height);
    width = static_cast<int>(cinfo.output_width);
    px.assign(static_cast<std::size_t>(height) * width * 3, 0);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = px.data() + static_cast<std::size_t>(cinfo.output_scanline) * width * 3;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return true;
}

Image decode_jpeg(const std::vector<unsigned char>& bytes, const std::string& name)
{
    std::vector<unsigned char> px;
    int h = 0;
    int w = 0;
    int comps = 0;
    std::string error;
    if (!decode_jpeg_raw(bytes.data(), bytes.size(), px, h, w, comps, error)) {
        throw DataError("undecodable JPEG " + name + ": " + error);
    }
    if (comps == 1) {
        warn("grayscale image replicated to RGB: " + name);
    }
    return from_interleaved(px.data(), h, w);
}

} // namespace

void set_warning_handler(WarningHandler handler)
{
    std::lock_guard lock(g_warn_mutex);
    g_warn_handler = std::move(handler);
}

void warn(const std::string& message)
{
    std::lock_guard lock(g_warn_mutex);
    if (g_warn_handler) {
        g_warn_handler(message);
    } else {
        std::cerr << "warning: " << message << '\n';
    }
}

std::uint8_t to_byte(double v)
{
    const double clamped = std::clamp(v, 0.0, 1.0);
    return static_cast<std::uint8_t>(std::lround(clamped * 255.0));
}

Image load_image(const fs::path& path)
{
    if (!fs::exists(path)) {
        throw DataError("image file not found: " + path.string());
    }
    const auto bytes = read_file(path);
    static constexpr unsigned char kPngSig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1A, '\n'};
    if (bytes.size() >= 8 && std::equal(kPngSig, kPngSig + 8, bytes.begin())) {
        return decode_png(bytes, path.string());
    }
    if (bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8) {
        return decode_jpeg(bytes, path.string());
    }
    throw DataError("unrecognised image format: " + path.string());
}

void save_image(const Image& img, const fs::path& path)
{
    const auto px = to_interleaved(img);
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(img.width());
    image.height = static_cast<png_uint_32>(img.height());
    image.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, px.data(), 0, nullptr)) {
        throw DataError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

void save_map(const Raster& map, const fs::path& path)
{
    std::vector<unsigned char> px(static_cast<std::size_t>(map.height()) * map.width());
    for (int y = 0; y < map.height(); ++y) {
        for (int x = 0; x < map.width(); ++x) {
            px[static_cast<std::size_t>(y) * map.width() + x] = to_byte(map.at(0, y, x));
        }
    }
    png_image image{};
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(map.width());
    image.height = static_cast<png_uint_32>(map.height());
    image.format = PNG_FORMAT_GRAY;
    if (!png_image_write_to_file(&image, path.string().c_str(), 0, px.data(), 0, nullptr)) {
        throw DataError("cannot write PNG " + path.string() + ": " + image.message);
    }
}

Image quantize(const Image& img)
{
    Image out = img;
    for (double& v : out.data()) {
        v = to_byte(v) / 255.0;
    }
    return out;
}

Image resize(const Image& img, int height, int width)
{
    if (height < 1 || width < 1) {
        throw std::invalid_argument("resize: target size must be positive");
    }
    const int ih = img.height();
    const int iw = img.width();
    Image out(height, width);
    const double sy = static_cast<double>(ih) / height;
    const double sx = static_cast<double>(iw) / width;
    for (int y = 0; y < height; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(ih - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, ih - 1);
        const double wy = fy - y0;
        for (int x = 0; x < width; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(iw - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, iw - 1);
            const double wx = fx - x0;
            for (int c = 0; c < 3; ++c) {
                const double top = img.at(c, y0, x0) + wx * (img.at(c, y0, x1) - img.at(c, y0, x0));
                const double bot = img.at(c, y1, x0) + wx * (img.at(c, y1, x1) - img.at(c, y1, x0));
                out.at(c, y, x) = std::clamp(top + wy * (bot - top), 0.0, 1.0);
            }
        }
    }
    return out;
}

Image jpeg_roundtrip(const Image& img, int quality)
{
    if (quality < 1 || quality > 100) {
        throw std::invalid_argument("jpeg quality must be in [1,100]");
    }
    const auto px = to_interleaved(img);
    unsigned char* buffer = nullptr;
    unsigned long size = 0;

    jpeg_compress_struct cinfo{};
    JpegErrorManager jerr{};
    cinfo.err = jpeg_std_error(&jerr.pub);
    jerr.pub.error_exit = jpeg_error_exit;
    if (setjmp(jerr.jump)) {
        jpeg_destroy_compress(&cinfo);
        std::free(buffer);
        throw DataError(std::string("JPEG encode failed: ") + jerr.message);
    }
    jpeg_create_compress(&cinfo);
    jpeg_mem_dest(&cinfo, &buffer, &size);
    cinfo.image_width = static_cast<JDIMENSION>(img.width());
    cinfo.image_height = static_cast<JDIMENSION>(img.height());
    cinfo.input_components = 3;
    cinfo.in_color_space = JCS_RGB;
    jpeg_set_defaults(&cinfo);
    jpeg_set_quality(&cinfo, quality, TRUE);
    cinfo.dct_method = JDCT_ISLOW;
    for (int i = 0; i < cinfo.num_components; ++i) {
        cinfo.comp_info[i].h_samp_factor = 1;
        cinfo.comp_info[i].v_samp_factor = 1;
    }
    jpeg_start_compress(&cinfo, TRUE);
    while (cinfo.next_scanline < cinfo.image_height) {
        auto* row = const_cast<JSAMPROW>(px.data() + static_cast<std::size_t>(cinfo.next_scanline) * img.width() * 3);
        jpeg_write_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_compress(&cinfo);
    jpeg_destroy_compress(&cinfo);

    std::unique_ptr<unsigned char, decltype(&std::free)> owned(buffer, &std::free);
    std::vector<unsigned char> out;
    int h = 0;
    int w = 0;
    int comps = 0;
    std::string error;
    if (!decode_jpeg_raw(owned.get(), size, out, h, w, comps, error)) {
        throw DataError("JPEG decode failed: " + error);
    }
    return from_interleaved(out.data(), h, w);
}

DatasetSplit split_dataset(const std::vector<std::string>& refs, std::uint64_t seed,
                           const std::array<double, 3>& ratios)
{
    if (refs.empty()) {
        throw DataError("split_dataset: empty input list");
    }
    const double total = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(total - 1.0) > 1e-9 || ratios[0] < 0 || ratios[1] < 0 || ratios[2] < 0) {
        throw std::invalid_argument("split_dataset: ratios must be non-negative and sum to 1");
    }
    std::vector<std::size_t> order(refs.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    rng.shuffle(order);

    const auto n = static_cast<double>(refs.size());
    const auto n_val = static_cast<std::size_t>(std::floor(n * ratios[1] + 1e-9));
    const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[2] + 1e-9));
    const std::size_t n_train = refs.size() - n_val - n_test;

    DatasetSplit split;
    split.seed = seed;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& ref = refs[order[i]];
        if (i < n_train) {
            split.train.push_back(ref);
        } else if (i < n_train + n_val) {
            split.val.push_back(ref);
        } else {
            split.test.push_back(ref);
        }
    }
    return split;
}

std::vector<std::string> read_manifest(const fs::path& manifest)
{
    std::ifstream in(manifest);
    if (!in) {
        throw DataError("cannot open manifest: " + manifest.string());
    }
    const fs::path base = manifest.parent_path();
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const fs::path p(line);
        out.push_back(p.is_absolute() ? p.string() : (base / p).string());
    }
    if (out.empty()) {
        throw DataError("manifest lists no images: " + manifest.string());
    }
    return out;
}

void write_manifest(const fs::path& manifest, const std::vector<std::string>& relative)
{
    std::ofstream out(manifest);
    if (!out) {
        throw DataError("cannot write manifest: " + manifest.string());
    }
    for (const auto& r : relative) {
        out << r << '\n';
    }
}

std::vector<Image> load_images(const std::vector<std::string>& paths, int side)
{
    std::vector<Image> out;
    out.reserve(paths.size());
    for (const auto& p : paths) {
        Image img = load_image(p);
        if (img.height() != side || img.width() != side) {
            img = resize(img, side, side);
        }
        out.push_back(std::move(img));
    }
    return out;
}

Image synthesize_image(int side, Rng& rng)
{
    Image img(side, side);
    const double s = side;
    // Background: linear colour gradient.
    std::array<double, 3> c0{};
    std::array<double, 3> c1{};
    for (int c = 0; c < 3; ++c) {
        c0[c] = 0.1 + 0.8 * rng.uniform();
        c1[c] = 0.1 + 0.8 * rng.uniform();
    }
    const double angle = 2.0 * 3.141592653589793 * rng.uniform();
    const double gx = std::cos(angle);
    const double gy = std::sin(angle);
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double t = 0.5 + 0.5 * ((x / s - 0.5) * gx + (y / s - 0.5) * gy) * 1.4;
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = c0[c] + std::clamp(t, 0.0, 1.0) * (c1[c] - c0[c]);
            }
        }
    }
    // Soft-edged ellipses blended on top.
    const int shapes = 3 + static_cast<int>(rng.below(5));
    for (int k = 0; k < shapes; ++k) {
        const double cx = s * rng.uniform();
        const double cy = s * rng.uniform();
        const double rx = s * (0.08 + 0.3 * rng.uniform());
        const double ry = s * (0.08 + 0.3 * rng.uniform());
        const double edge = 0.05 + 0.3 * rng.uniform();
        const double alpha = 0.5 + 0.5 * rng.uniform();
        std::array<double, 3> col{};
        for (auto& v : col) {
            v = rng.uniform();
        }
        for (int y = 0; y < side; ++y) {
            for (int x = 0; x < side; ++x) {
                const double dx = (x - cx) / rx;
                const double dy = (y - cy) / ry;
                const double d = std::sqrt(dx * dx + dy * dy);
                const double a = alpha * std::clamp((1.0 - d) / edge, 0.0, 1.0);
                if (a <= 0.0) {
                    continue;
                }
                const double shade = 1.0 - 0.25 * dy;
                for (int c = 0; c < 3; ++c) {
                    const double v = std::clamp(col[c] * shade, 0.0, 1.0);
                    img.at(c, y, x) += a * (v - img.at(c, y, x));
                }
            }
        }
    }
    // Mild oriented texture and pixel noise.
    const double amp = 0.02 + 0.05 * rng.uniform();
    const double fx = 2.0 * 3.141592653589793 * (2.0 + 10.0 * rng.uniform()) / s;
    const double fy = 2.0 * 3.141592653589793 * (2.0 + 10.0 * rng.uniform()) / s;
    const double noise = 0.01 + 0.02 * rng.uniform();
    for (int y = 0; y < side; ++y) {
        for (int x = 0; x < side; ++x) {
            const double tex = amp * std::sin(fx * x + fy * y) * std::sin(0.5 * fy * x - 0.7 * fx * y);
            for (int c = 0; c < 3; ++c) {
                img.at(c, y, x) = std::clamp(img.at(c, y, x) + tex + noise * rng.normal(), 0.0, 1.0);
            }
        }
    }
    return quantize(img);
}

fs::path write_synthetic_dataset(const fs::path& dir, int count, int side, std::uint64_t seed)
{
    fs::create_directories(dir);
    Rng rng(seed);
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "img_%05d.png", i);
        save_image(synthesize_image(side, rng), dir / name);
        names.emplace_back(name);
    }
    const fs::path manifest = dir / "manifest.txt";
    write_manifest(manifest, names);
    return manifest;
}

} // namespace ldh
