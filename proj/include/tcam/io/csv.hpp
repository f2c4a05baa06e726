// CSV reports: header row, '.' decimals, 6 significant digits, LF endings.
#ifndef TCAM_IO_CSV_HPP
#define TCAM_IO_CSV_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tcam/io/error.hpp"
#include "tcam/io/npy.hpp"

namespace tcam::io
{

/// 6 significant digits, shortest of fixed/exponent ("%.6g"); locale-free.
inline std::string format_number(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    std::string s = buf;
    for (char& c : s)
        if (c == ',')
            c = '.';
    return s;
}

struct ReportTable
{
    std::vector<std::string> comments; // emitted first as "# ..." lines
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }
};

namespace detail
{

inline std::string csv_escape(const std::string& cell)
{
    if (cell.find_first_of(",\"\n") == std::string::npos)
        return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"')
            out += '"';
        out += c;
    }
    return out + "\"";
}

inline std::string join_row(const std::vector<std::string>& cells)
{
    std::string line;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            line += ',';
        line += csv_escape(cells[i]);
    }
    return line + '\n';
}

} // namespace detail

inline std::string render_report(const ReportTable& table)
{
    std::string out;
    for (const auto& c : table.comments)
        out += "# " + c + '\n';
    out += detail::join_row(table.header);
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw std::invalid_argument("write_report: row has " + std::to_string(row.size()) +
                                        " cells, header has " +
                                        std::to_string(table.header.size()));
        out += detail::join_row(row);
    }
    return out;
}

inline void write_report(const ReportTable& table, const std::filesystem::path& path)
{
    const std::string text = render_report(table);
    write_bytes(path, std::vector<char>(text.begin(), text.end()));
}

/// One parsed CSV line with its 1-based line number.
struct CsvRecord
{
    std::size_t line = 0;
    std::vector<std::string> cells;
};

/// Splits CSV text into records. Blank lines and lines starting with '#' are
/// skipped; double-quoted cells may contain commas and doubled quotes.
inline std::vector<CsvRecord> parse_csv(const std::string& text, const std::string& path)
{
    std::vector<CsvRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string::npos)
            end = text.size();
        std::string line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line[0] == '#')
            continue;
        CsvRecord rec{line_no, {}};
        std::string cell;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    cell += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                rec.cells.push_back(std::move(cell));
                cell.clear();
            } else {
                cell += c;
            }
        }
        if (quoted)
            throw format_error(FormatFault::malformed_header, path, line_no, "quote",
                               "unterminated quoted cell");
        rec.cells.push_back(std::move(cell));
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<CsvRecord> read_csv(const std::filesystem::path& path)
{
    const auto bytes = detail::slurp(path);
    return parse_csv(std::string(bytes.begin(), bytes.end()), path.string());
}

} // namespace tcam::io

#endif // TCAM_IO_CSV_HPP
