// 8-bit PNG and binary PGM/PPM images, and binary segmentation masks.
//
// Link against libpng (CMake target PNG::PNG) when including this header.
#ifndef TCAM_IO_IMAGE_HPP
#define TCAM_IO_IMAGE_HPP

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tcam/io/error.hpp"
#include "tcam/io/npy.hpp"
#include "tcam/metrics.hpp"
#include "tcam/saliency.hpp"

namespace tcam::io
{

/// Raw 8-bit samples, interleaved.
struct ByteImage
{
    std::size_t height = 0;
    std::size_t width = 0;
    std::size_t channels = 0;
    std::vector<std::uint8_t> samples;
};

namespace detail
{

struct PngSource
{
    const char* data;
    std::size_t size;
    std::size_t pos;
};

inline void png_read_from_memory(png_structp png, png_bytep out, png_size_t len)
{
    auto* src = static_cast<PngSource*>(png_get_io_ptr(png));
    if (src->pos + len > src->size)
        png_error(png, "truncated stream");
    std::memcpy(out, src->data + src->pos, len);
    src->pos += len;
}

inline void png_write_to_memory(png_structp png, png_bytep data, png_size_t len)
{
    auto* sink = static_cast<std::vector<char>*>(png_get_io_ptr(png));
    sink->insert(sink->end(), reinterpret_cast<const char*>(data),
                 reinterpret_cast<const char*>(data) + len);
}

inline void png_flush_noop(png_structp) {}

inline void png_quiet_warning(png_structp, png_const_charp) {}

// Outcome of the C-style decoder; no C++ object lives across its setjmp
// except through the heap-held `result`.
struct PngDecode
{
    ByteImage image;
    std::vector<png_bytep> rows;
    std::string error;
    bool bad_depth = false;
    std::size_t offset = 0;
};

// With keep_indices, palette images yield their raw indices and sub-byte
// grayscale yields raw sample values (mask semantics). Otherwise palettes are
// expanded to RGB and only 8-bit samples are accepted.
inline void decode_png(const std::vector<char>& bytes, bool keep_indices, PngDecode* result)
{
    PngSource src{bytes.data(), bytes.size(), 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr,
                                             png_quiet_warning);
    if (!png) {
        result->error = "cannot allocate PNG reader";
        return;
    }
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        result->error = "cannot allocate PNG info";
        return;
    }
    if (setjmp(png_jmpbuf(png))) {
        if (result->error.empty())
            result->error = "corrupt PNG stream";
        result->offset = src.pos;
        png_destroy_read_struct(&png, &info, nullptr);
        return;
    }
    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);

    const int depth = png_get_bit_depth(png, info);
    const int color = png_get_color_type(png, info);
    if (depth == 16 || (!keep_indices && color == PNG_COLOR_TYPE_GRAY && depth != 8)) {
        result->bad_depth = true;
        result->error = "unsupported bit depth " + std::to_string(depth);
        result->offset = 24;
        png_destroy_read_struct(&png, &info, nullptr);
        return;
    }
    if (color == PNG_COLOR_TYPE_PALETTE) {
        if (keep_indices)
            png_set_packing(png);
        else
            png_set_palette_to_rgb(png);
    } else if (color == PNG_COLOR_TYPE_GRAY && depth < 8) {
        png_set_packing(png);
    }
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_set_interlace_handling(png);
    png_read_update_info(png, info);

    ByteImage& img = result->image;
    img.width = png_get_image_width(png, info);
    img.height = png_get_image_height(png, info);
    img.channels = png_get_channels(png, info);
    if (img.channels != 1 && img.channels != 3)
        png_error(png, "unsupported channel layout");
    const std::size_t stride = png_get_rowbytes(png, info);
    if (stride != img.width * img.channels)
        png_error(png, "unexpected row layout");
    img.samples.resize(stride * img.height);
    result->rows.resize(img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        result->rows[y] = img.samples.data() + y * stride;
    png_read_image(png, result->rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
}

inline void skip_pnm_space(const std::vector<char>& b, std::size_t& pos)
{
    while (pos < b.size()) {
        if (b[pos] == '#') {
            while (pos < b.size() && b[pos] != '\n')
                ++pos;
        } else if (std::isspace(static_cast<unsigned char>(b[pos]))) {
            ++pos;
        } else {
            break;
        }
    }
}

inline std::size_t pnm_number(const std::vector<char>& b, std::size_t& pos,
                              const std::string& path, const char* field)
{
    skip_pnm_space(b, pos);
    std::size_t v = 0;
    bool any = false;
    while (pos < b.size() && b[pos] >= '0' && b[pos] <= '9') {
        v = v * 10 + static_cast<std::size_t>(b[pos] - '0');
        ++pos;
        any = true;
    }
    if (!any)
        throw format_error(FormatFault::malformed_header, path, pos, field,
                           "expected a decimal number");
    return v;
}

inline ByteImage decode_pnm(const std::vector<char>& b, const std::string& path)
{
    ByteImage img;
    img.channels = b[1] == '5' ? 1 : 3;
    std::size_t pos = 2;
    img.width = pnm_number(b, pos, path, "width");
    img.height = pnm_number(b, pos, path, "height");
    const std::size_t maxval = pnm_number(b, pos, path, "maxval");
    if (img.width == 0 || img.height == 0)
        throw format_error(FormatFault::bad_shape, path, pos, "width", "zero image dimension");
    if (maxval != 255)
        throw format_error(FormatFault::unsupported_bit_depth, path, pos, "maxval",
                           "unsupported bit depth (maxval " + std::to_string(maxval) + ")");
    if (pos >= b.size() || !std::isspace(static_cast<unsigned char>(b[pos])))
        throw format_error(FormatFault::malformed_header, path, pos, "maxval",
                           "missing separator before raster");
    ++pos;
    const std::size_t need = img.width * img.height * img.channels;
    if (b.size() - pos < need)
        throw format_error(FormatFault::truncated, path, b.size(), "raster",
                           "truncated raster: expected " + std::to_string(need) + " bytes");
    img.samples.assign(b.begin() + static_cast<std::ptrdiff_t>(pos),
                       b.begin() + static_cast<std::ptrdiff_t>(pos + need));
    return img;
}

} // namespace detail

inline constexpr unsigned char png_signature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

/// Decodes a PNG, PGM (P5) or PPM (P6) file, detected by magic bytes.
inline ByteImage read_bytes_image(const std::filesystem::path& path, bool keep_indices = false)
{
    const std::vector<char> bytes = detail::slurp(path);
    const std::string name = path.string();
    if (bytes.size() >= 8 && std::memcmp(bytes.data(), png_signature, 8) == 0) {
        auto result = std::make_unique<detail::PngDecode>();
        detail::decode_png(bytes, keep_indices, result.get());
        if (result->bad_depth)
            throw format_error(FormatFault::unsupported_bit_depth, name, result->offset,
                               "bit_depth", result->error);
        if (!result->error.empty())
            throw format_error(FormatFault::corrupt_stream, name, result->offset, "stream",
                               result->error);
        return std::move(result->image);
    }
    if (bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'))
        return detail::decode_pnm(bytes, name);
    throw format_error(FormatFault::bad_magic, name, 0, "magic",
                       "bad magic, not a PNG/PGM/PPM image");
}

/// Samples mapped to [0,1] by /255.
inline RasterImage read_image(const std::filesystem::path& path)
{
    const ByteImage b = read_bytes_image(path, false);
    RasterImage img(b.height, b.width, b.channels);
    for (std::size_t i = 0; i < b.samples.size(); ++i)
        img.pixels[i] = static_cast<double>(b.samples[i]) / 255.0;
    return img;
}

inline std::uint8_t to_byte(double v)
{
    return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

inline std::vector<char> encode_png(const RasterImage& img)
{
    std::vector<std::uint8_t> samples(img.pixels.size());
    std::transform(img.pixels.begin(), img.pixels.end(), samples.begin(), to_byte);
    auto out = std::make_unique<std::vector<char>>();
    auto rows = std::make_unique<png_bytep[]>(img.height);
    for (std::size_t y = 0; y < img.height; ++y)
        rows[y] = samples.data() + y * img.width * img.channels;

    png_structp png =
        png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw io_error("cannot allocate PNG writer");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw io_error("PNG encoding failed");
    }
    png_set_write_fn(png, out.get(), detail::png_write_to_memory, detail::png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.get());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return std::move(*out);
}

inline std::vector<char> encode_pnm(const RasterImage& img)
{
    const std::string header = std::string(img.channels == 1 ? "P5" : "P6") + "\n" +
                               std::to_string(img.width) + " " + std::to_string(img.height) +
                               "\n255\n";
    std::vector<char> out(header.begin(), header.end());
    for (double v : img.pixels)
        out.push_back(static_cast<char>(to_byte(v)));
    return out;
}

/// Writes by extension: .png, .pgm (1 channel) or .ppm (3 channels).
/// Values map back to bytes with round-half-up.
inline void write_image(const RasterImage& img, const std::filesystem::path& path)
{
    if (img.height == 0 || img.width == 0)
        throw std::invalid_argument("write_image: empty image");
    const std::string ext = path.extension().string();
    if (ext == ".png") {
        write_bytes(path, encode_png(img));
    } else if ((ext == ".pgm" && img.channels == 1) || (ext == ".ppm" && img.channels == 3)) {
        write_bytes(path, encode_pnm(img));
    } else {
        throw std::invalid_argument("write_image: cannot write a " +
                                    std::to_string(img.channels) + "-channel image as '" +
                                    ext + "'");
    }
}

struct MaskOptions
{
    /// Single-channel byte value treated as background (VOC boundary label).
    std::optional<std::uint8_t> ignore_label = 255;
};

/// Foreground where any channel byte is non-zero. Palette PNGs are read as
/// their indices, so VOC class masks work directly.
inline BinaryMask read_mask(const std::filesystem::path& path, const MaskOptions& opts = {})
{
    const ByteImage b = read_bytes_image(path, true);
    BinaryMask mask(b.height, b.width);
    for (std::size_t y = 0; y < b.height; ++y)
        for (std::size_t x = 0; x < b.width; ++x) {
            const std::uint8_t* px = b.samples.data() + (y * b.width + x) * b.channels;
            bool fg = false;
            for (std::size_t c = 0; c < b.channels; ++c)
                fg = fg || px[c] > 0;
            if (b.channels == 1 && opts.ignore_label && px[0] == *opts.ignore_label)
                fg = false;
            mask.set(y, x, fg);
        }
    return mask;
}

} // namespace tcam::io

#endif // TCAM_IO_IMAGE_HPP
