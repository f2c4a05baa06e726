// Dataset manifests.
//
// A manifest is a CSV file whose header row is exactly
//
//   id,tensor,image,mask,p,o,embedding,embedding_masked
//
// Empty cells mean "absent". Relative paths resolve against the directory of
// the manifest. `p`/`o` are true-class probabilities on the original and the
// saliency-masked image; `embedding`/`embedding_masked` are 1-D NPY files.
#ifndef TCAM_IO_MANIFEST_HPP
#define TCAM_IO_MANIFEST_HPP

#include <array>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tcam/io/csv.hpp"
#include "tcam/io/error.hpp"

namespace tcam::io
{

inline constexpr std::array<std::string_view, 8> manifest_columns{
    "id", "tensor", "image", "mask", "p", "o", "embedding", "embedding_masked"};

struct ManifestEntry
{
    std::string id;
    std::optional<std::filesystem::path> tensor;
    std::optional<std::filesystem::path> image;
    std::optional<std::filesystem::path> mask;
    std::optional<double> p;
    std::optional<double> o;
    std::optional<std::filesystem::path> embedding;
    std::optional<std::filesystem::path> embedding_masked;
    std::size_t line = 0;
};

struct DatasetManifest
{
    std::filesystem::path source;
    std::vector<ManifestEntry> entries;
};

namespace detail
{

inline double parse_probability(const std::string& text, const std::string& path,
                                std::size_t line, const char* field)
{
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw format_error(FormatFault::bad_field, path, line, field,
                           "'" + text + "' is not a number");
    if (!(v >= 0.0 && v <= 1.0))
        throw format_error(FormatFault::bad_field, path, line, field,
                           "probability " + text + " outside [0,1]");
    return v;
}

} // namespace detail

inline std::string_view manifest_header_line()
{
    return "id,tensor,image,mask,p,o,embedding,embedding_masked";
}

/// Parses a manifest. Every referenced path must exist; ids must be unique.
inline DatasetManifest read_manifest(const std::filesystem::path& path)
{
    const auto records = read_csv(path);
    const std::string name = path.string();
    if (records.empty())
        throw format_error(FormatFault::malformed_header, name, 1, "header",
                           "missing header row");
    const auto& header = records.front();
    for (std::size_t i = 0; i < manifest_columns.size(); ++i)
        if (i >= header.cells.size() || header.cells[i] != manifest_columns[i])
            throw format_error(FormatFault::malformed_header, name, header.line,
                               std::string(manifest_columns[i]),
                               "header must be '" + std::string(manifest_header_line()) + "'");
    if (header.cells.size() != manifest_columns.size())
        throw format_error(FormatFault::malformed_header, name, header.line,
                           header.cells.back(), "unexpected extra column");

    DatasetManifest out;
    out.source = path;
    const auto base = path.parent_path();
    std::set<std::string> seen;
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.cells.size() != manifest_columns.size())
            throw format_error(FormatFault::bad_field, name, rec.line, "row",
                               "expected " + std::to_string(manifest_columns.size()) +
                                   " cells, got " + std::to_string(rec.cells.size()));
        ManifestEntry e;
        e.line = rec.line;
        e.id = rec.cells[0];
        if (e.id.empty())
            throw format_error(FormatFault::bad_field, name, rec.line, "id", "empty id");
        if (!seen.insert(e.id).second)
            throw format_error(FormatFault::bad_field, name, rec.line, "id",
                               "duplicate id '" + e.id + "'");
        auto resolve = [&](std::size_t col) -> std::optional<std::filesystem::path> {
            const std::string& cell = rec.cells[col];
            if (cell.empty())
                return std::nullopt;
            std::filesystem::path p = cell;
            if (p.is_relative())
                p = base / p;
            if (!std::filesystem::exists(p))
                throw format_error(FormatFault::bad_field, name, rec.line,
                                   std::string(manifest_columns[col]),
                                   "path '" + cell + "' does not exist");
            return p;
        };
        e.tensor = resolve(1);
        e.image = resolve(2);
        e.mask = resolve(3);
        if (!rec.cells[4].empty())
            e.p = detail::parse_probability(rec.cells[4], name, rec.line, "p");
        if (!rec.cells[5].empty())
            e.o = detail::parse_probability(rec.cells[5], name, rec.line, "o");
        e.embedding = resolve(6);
        e.embedding_masked = resolve(7);
        out.entries.push_back(std::move(e));
    }
    return out;
}

} // namespace tcam::io

#endif // TCAM_IO_MANIFEST_HPP
