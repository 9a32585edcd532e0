#pragma once

#include <cerrno>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sumtrunc {

struct csv_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline bool csv_needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\r\n") != std::string::npos;
}

}  // namespace detail

// RFC 4180 field quoting: wrap in quotes when the field contains a comma,
// quote, or line break, doubling embedded quotes.
inline std::string csv_escape(const std::string& field) {
    if (!detail::csv_needs_quoting(field)) return field;
    std::string out;
    out.reserve(field.size() + 2);
    out.push_back('"');
    for (const char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

// Doubles are written with 17 significant digits so they round-trip exactly.
inline std::string csv_format_double(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

inline std::string csv_join(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i > 0) line.push_back(',');
        line += csv_escape(fields[i]);
    }
    return line;
}

class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void write_row(const std::vector<std::string>& fields) {
        out_ << csv_join(fields) << '\n';
    }

private:
    std::ostream& out_;
};

// Parses full CSV content into rows of fields, honoring quoted fields that
// may contain commas, escaped quotes, and embedded line breaks.  Accepts
// both LF and CRLF row terminators; a trailing newline does not produce an
// empty final row.
inline std::vector<std::vector<std::string>> csv_parse(const std::string& content) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_started = false;
    std::size_t line = 1;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
    };
    const auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
        row_started = false;
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        const char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field.empty()) {
                    throw csv_error("csv parse error at line " + std::to_string(line)
                                    + ": quote inside unquoted field");
                }
                in_quotes = true;
                row_started = true;
                break;
            case ',':
                end_field();
                row_started = true;
                break;
            case '\r':
                if (i + 1 < content.size() && content[i + 1] == '\n') break;  // CRLF: LF ends row
                end_row();
                ++line;
                break;
            case '\n':
                end_row();
                ++line;
                break;
            default:
                field.push_back(c);
                row_started = true;
                break;
        }
    }
    if (in_quotes) {
        throw csv_error("csv parse error at line " + std::to_string(line)
                        + ": unterminated quoted field");
    }
    if (row_started || !field.empty() || !row.empty()) end_row();
    return rows;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw csv_error("cannot open file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::vector<std::vector<std::string>> csv_read_file(const std::string& path) {
    return csv_parse(read_text_file(path));
}

namespace detail {

inline bool looks_like_header(const std::string& field) {
    if (field.empty()) return true;
    char* end = nullptr;
    errno = 0;
    std::strtod(field.c_str(), &end);
    return errno != 0 || end == field.c_str() || *end != '\0';
}

}  // namespace detail

// Reads a single-column CSV of non-negative integer counts.  An optional
// one-line header is skipped when its first field is not numeric.  Errors
// carry the 1-based line number of the offending row.
inline std::vector<std::uint64_t> csv_read_counts(const std::string& path) {
    const auto rows = csv_read_file(path);
    std::vector<std::uint64_t> counts;
    counts.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t line = i + 1;
        if (rows[i].size() != 1) {
            throw csv_error(path + ": line " + std::to_string(line)
                            + ": expected a single column, got "
                            + std::to_string(rows[i].size()) + " fields");
        }
        const std::string& field = rows[i][0];
        if (i == 0 && detail::looks_like_header(field)) continue;
        char* end = nullptr;
        errno = 0;
        const unsigned long long v = std::strtoull(field.c_str(), &end, 10);
        if (errno != 0 || end == field.c_str() || *end != '\0' || field[0] == '-') {
            throw csv_error(path + ": line " + std::to_string(line)
                            + ": expected a non-negative integer count, got '" + field + "'");
        }
        counts.push_back(static_cast<std::uint64_t>(v));
    }
    if (counts.empty()) throw csv_error(path + ": no data rows");
    return counts;
}

// Reads a single-column CSV of real observations (optional header skipped).
inline std::vector<double> csv_read_reals(const std::string& path) {
    const auto rows = csv_read_file(path);
    std::vector<double> values;
    values.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t line = i + 1;
        if (rows[i].size() != 1) {
            throw csv_error(path + ": line " + std::to_string(line)
                            + ": expected a single column, got "
                            + std::to_string(rows[i].size()) + " fields");
        }
        const std::string& field = rows[i][0];
        if (i == 0 && detail::looks_like_header(field)) continue;
        char* end = nullptr;
        errno = 0;
        const double v = std::strtod(field.c_str(), &end);
        if (errno != 0 || end == field.c_str() || *end != '\0') {
            throw csv_error(path + ": line " + std::to_string(line)
                            + ": expected a real number, got '" + field + "'");
        }
        values.push_back(v);
    }
    if (values.empty()) throw csv_error(path + ": no data rows");
    return values;
}

}  // namespace sumtrunc
