// NPY v1.0 reader/writer (little-endian float32/float64, C order).
#ifndef TCAM_IO_NPY_HPP
#define TCAM_IO_NPY_HPP

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "tcam/io/error.hpp"
#include "tcam/tensor.hpp"

namespace tcam::io
{

static_assert(std::endian::native == std::endian::little, "NPY I/O assumes a little-endian host");

using ArrayValue = std::variant<FeatureTensor, DenseMatrix, std::vector<double>>;

inline constexpr char npy_magic[] = "\x93NUMPY";

namespace detail
{

inline std::vector<char> slurp(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error(path.string() + ": cannot open for reading");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

struct NpyHeader
{
    std::string descr;
    bool fortran = false;
    std::vector<std::size_t> shape;
};

// Value text following `'key':` inside the header dict.
inline std::size_t find_key(const std::string& dict, const std::string& key,
                            const std::string& path, std::size_t base)
{
    const std::string needle = "'" + key + "'";
    auto pos = dict.find(needle);
    if (pos == std::string::npos)
        throw format_error(FormatFault::malformed_header, path, base, key,
                           "header dict lacks key");
    pos = dict.find(':', pos + needle.size());
    if (pos == std::string::npos)
        throw format_error(FormatFault::malformed_header, path, base, key, "missing ':'");
    ++pos;
    while (pos < dict.size() && dict[pos] == ' ')
        ++pos;
    return pos;
}

inline NpyHeader parse_header(const std::string& dict, const std::string& path,
                              std::size_t base)
{
    NpyHeader h;
    auto pos = find_key(dict, "descr", path, base);
    if (pos >= dict.size() || (dict[pos] != '\'' && dict[pos] != '"'))
        throw format_error(FormatFault::malformed_header, path, base + pos, "descr",
                           "descr is not a string");
    const char quote = dict[pos];
    const auto end = dict.find(quote, pos + 1);
    if (end == std::string::npos)
        throw format_error(FormatFault::malformed_header, path, base + pos, "descr",
                           "unterminated descr");
    h.descr = dict.substr(pos + 1, end - pos - 1);

    pos = find_key(dict, "fortran_order", path, base);
    if (dict.compare(pos, 4, "True") == 0)
        h.fortran = true;
    else if (dict.compare(pos, 5, "False") != 0)
        throw format_error(FormatFault::malformed_header, path, base + pos, "fortran_order",
                           "fortran_order is not a boolean");

    pos = find_key(dict, "shape", path, base);
    if (pos >= dict.size() || dict[pos] != '(')
        throw format_error(FormatFault::malformed_header, path, base + pos, "shape",
                           "shape is not a tuple");
    const auto close = dict.find(')', pos);
    if (close == std::string::npos)
        throw format_error(FormatFault::malformed_header, path, base + pos, "shape",
                           "unterminated shape tuple");
    std::size_t i = pos + 1;
    while (i < close) {
        while (i < close && (dict[i] == ' ' || dict[i] == ','))
            ++i;
        if (i >= close)
            break;
        std::size_t value = 0;
        bool any = false;
        while (i < close && dict[i] >= '0' && dict[i] <= '9') {
            value = value * 10 + static_cast<std::size_t>(dict[i] - '0');
            ++i;
            any = true;
        }
        if (!any || (i < close && dict[i] != ',' && dict[i] != ' ' && dict[i] != 'L'))
            throw format_error(FormatFault::malformed_header, path, base + i, "shape",
                               "non-integer dimension");
        if (i < close && dict[i] == 'L')
            ++i;
        h.shape.push_back(value);
    }
    return h;
}

} // namespace detail

/// Parses an NPY v1.0 buffer. `path` is used for error messages only.
inline ArrayValue parse_npy(const std::vector<char>& bytes, const std::string& path)
{
    if (bytes.size() < 6 || std::memcmp(bytes.data(), npy_magic, 6) != 0)
        throw format_error(FormatFault::bad_magic, path, 0, "magic", "bad magic, not an NPY file");
    if (bytes.size() < 10)
        throw format_error(FormatFault::truncated, path, bytes.size(), "header_len",
                           "truncated preamble");
    const auto major = static_cast<unsigned char>(bytes[6]);
    const auto minor = static_cast<unsigned char>(bytes[7]);
    if (major != 1 || minor != 0)
        throw format_error(FormatFault::unsupported_version, path, 6, "version",
                           "unsupported version " + std::to_string(major) + "." +
                               std::to_string(minor));
    const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                   (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9]))
                                    << 8);
    if (bytes.size() < 10 + header_len)
        throw format_error(FormatFault::truncated, path, bytes.size(), "header",
                           "truncated header");
    const std::string dict(bytes.data() + 10, header_len);
    const auto h = detail::parse_header(dict, path, 10);

    std::size_t item = 0;
    if (h.descr == "<f8")
        item = 8;
    else if (h.descr == "<f4")
        item = 4;
    else
        throw format_error(FormatFault::unsupported_dtype, path, 10, "descr",
                           "unsupported dtype '" + h.descr + "'");
    if (h.fortran)
        throw format_error(FormatFault::unsupported_order, path, 10, "fortran_order",
                           "unsupported order (Fortran)");
    if (h.shape.empty() || h.shape.size() > 3)
        throw format_error(FormatFault::bad_shape, path, 10, "shape",
                           "expected 1-3 dimensions, got " + std::to_string(h.shape.size()));
    std::size_t count = 1;
    for (std::size_t d : h.shape) {
        if (d == 0)
            throw format_error(FormatFault::bad_shape, path, 10, "shape",
                               "zero-length dimension");
        count *= d;
    }

    const std::size_t offset = 10 + header_len;
    if (bytes.size() < offset + count * item)
        throw format_error(FormatFault::truncated, path, bytes.size(), "data",
                           "truncated payload: expected " + std::to_string(count * item) +
                               " bytes, found " + std::to_string(bytes.size() - offset));
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
        const char* src = bytes.data() + offset + i * item;
        if (item == 8) {
            std::memcpy(&values[i], src, 8);
        } else {
            float f;
            std::memcpy(&f, src, 4);
            values[i] = static_cast<double>(f);
        }
        if (!std::isfinite(values[i]))
            throw format_error(FormatFault::bad_field, path, offset + i * item, "data",
                               "non-finite element " + std::to_string(i));
    }

    switch (h.shape.size()) {
    case 3: return FeatureTensor({h.shape[0], h.shape[1], h.shape[2]}, std::move(values));
    case 2: return DenseMatrix(h.shape[0], h.shape[1], std::move(values));
    default: return values;
    }
}

inline ArrayValue read_array(const std::filesystem::path& path)
{
    return parse_npy(detail::slurp(path), path.string());
}

namespace detail
{

template <class T>
T read_as(const std::filesystem::path& path, const char* what)
{
    auto value = read_array(path);
    if (auto* v = std::get_if<T>(&value))
        return std::move(*v);
    throw format_error(FormatFault::bad_shape, path.string(), 10, "shape",
                       std::string("expected a ") + what);
}

} // namespace detail

inline FeatureTensor read_tensor(const std::filesystem::path& path)
{
    return detail::read_as<FeatureTensor>(path, "3-D array");
}

inline DenseMatrix read_matrix(const std::filesystem::path& path)
{
    return detail::read_as<DenseMatrix>(path, "2-D array");
}

inline std::vector<double> read_vector(const std::filesystem::path& path)
{
    return detail::read_as<std::vector<double>>(path, "1-D array");
}

/// Serializes float64 values with the given shape as NPY v1.0. The preamble
/// plus header is space-padded to a multiple of 64 bytes and ends in '\n'.
inline std::vector<char> encode_npy(std::span<const double> values,
                                    const std::vector<std::size_t>& shape)
{
    std::size_t count = 1;
    for (std::size_t d : shape) {
        if (d == 0)
            throw std::invalid_argument("write_array: zero-length dimension");
        count *= d;
    }
    if (shape.empty() || count != values.size())
        throw std::invalid_argument("write_array: shape does not match value count");
    for (double v : values)
        if (!std::isfinite(v))
            throw std::invalid_argument("write_array: non-finite value");

    std::string dims;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i)
            dims += ", ";
        dims += std::to_string(shape[i]);
    }
    if (shape.size() == 1)
        dims += ",";
    std::string dict = "{'descr': '<f8', 'fortran_order': False, 'shape': (" + dims + "), }";
    const std::size_t unpadded = 10 + dict.size() + 1;
    dict.append((64 - unpadded % 64) % 64, ' ');
    dict.push_back('\n');

    std::vector<char> out(npy_magic, npy_magic + 6);
    out.push_back('\x01');
    out.push_back('\x00');
    out.push_back(static_cast<char>(dict.size() & 0xff));
    out.push_back(static_cast<char>((dict.size() >> 8) & 0xff));
    out.insert(out.end(), dict.begin(), dict.end());
    const auto* raw = reinterpret_cast<const char*>(values.data());
    out.insert(out.end(), raw, raw + values.size() * sizeof(double));
    return out;
}

inline void write_bytes(const std::filesystem::path& path, const std::vector<char>& bytes)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw io_error(path.string() + ": cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw io_error(path.string() + ": write failed");
}

inline void write_array(const FeatureTensor& t, const std::filesystem::path& path)
{
    const auto& s = t.shape();
    write_bytes(path, encode_npy(t.data(), {s[0], s[1], s[2]}));
}

inline void write_array(const DenseMatrix& m, const std::filesystem::path& path)
{
    write_bytes(path, encode_npy(m.data(), {m.rows(), m.cols()}));
}

inline void write_array(std::span<const double> v, const std::filesystem::path& path)
{
    write_bytes(path, encode_npy(v, {v.size()}));
}

} // namespace tcam::io

#endif // TCAM_IO_NPY_HPP
