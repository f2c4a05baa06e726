#ifndef TCAM_IO_ERROR_HPP
#define TCAM_IO_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tcam::io
{

/// File could not be opened, read or written.
class io_error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum class FormatFault {
    bad_magic,
    unsupported_version,
    unsupported_dtype,
    unsupported_order,
    unsupported_bit_depth,
    malformed_header,
    bad_shape,
    truncated,
    corrupt_stream,
    bad_field,
};

/// Malformed input. Carries the byte offset (or line number for text formats)
/// and the field that failed to parse.
class format_error : public io_error
{
public:
    format_error(FormatFault fault, std::string path, std::size_t offset, std::string field,
                 const std::string& what)
        : io_error(path + ": " + what + " (at " + std::to_string(offset) + ", field '" +
                   field + "')"),
          fault_(fault), path_(std::move(path)), offset_(offset), field_(std::move(field))
    {
    }

    FormatFault fault() const noexcept { return fault_; }
    const std::string& path() const noexcept { return path_; }
    std::size_t offset() const noexcept { return offset_; }
    const std::string& field() const noexcept { return field_; }

private:
    FormatFault fault_;
    std::string path_;
    std::size_t offset_;
    std::string field_;
};

} // namespace tcam::io

#endif // TCAM_IO_ERROR_HPP
