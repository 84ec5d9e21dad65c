#pragma once

// Minimal RFC-4180 style CSV reading and writing. Lines starting with '#'
// before the header carry metadata (seed, command) and are skipped on read.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "argi/error.hpp"

namespace argi::io {

/// Shortest round-trip representation; "nan", "inf", "-inf" for non-finite values.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw IoError("cannot format number");
    return std::string(buf, end);
}

/// Six significant digits, for console summaries.
inline std::string format_short(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 6);
    if (ec != std::errc{}) throw IoError("cannot format number");
    return std::string(buf, end);
}

inline double parse_double(std::string_view s, const std::string& file, std::size_t line, std::string_view what) {
    auto trimmed = s;
    while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t')) trimmed.remove_prefix(1);
    while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\t' || trimmed.back() == '\r'))
        trimmed.remove_suffix(1);
    if (trimmed == "nan") return std::nan("");
    if (trimmed == "inf" || trimmed == "+inf") return INFINITY;
    if (trimmed == "-inf") return -INFINITY;
    if (!trimmed.empty() && trimmed.front() == '+') trimmed.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
    if (trimmed.empty() || ec != std::errc{} || ptr != trimmed.data() + trimmed.size())
        throw ParseError(file, line, "invalid number '" + std::string(s) + "' for " + std::string(what));
    return v;
}

inline long long parse_integer(std::string_view s, const std::string& file, std::size_t line, std::string_view what) {
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(file, line, "invalid integer '" + std::string(s) + "' for " + std::string(what));
    return v;
}

inline std::string quote_field(std::string_view f) {
    if (f.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(f);
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Splits one CSV record; quoted fields may contain commas and doubled quotes.
inline std::vector<std::string> split_record(std::string_view line, const std::string& file, std::size_t lineno) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    if (quoted) throw ParseError(file, lineno, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

struct CsvTable {
    std::string file;
    std::vector<std::string> comments;  ///< leading '#' lines without the marker
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  ///< source line of each row

    /// Index of a required column; the error names the column.
    std::size_t column(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw ParseError(file, 1 + comments.size(), "missing column '" + std::string(name) + "'");
    }

    std::map<std::string, std::string> metadata() const {
        std::map<std::string, std::string> out;
        for (const auto& c : comments) {
            const auto eq = c.find('=');
            if (eq == std::string::npos) continue;
            auto key = c.substr(0, eq);
            while (!key.empty() && key.front() == ' ') key.erase(key.begin());
            while (!key.empty() && key.back() == ' ') key.pop_back();
            out[key] = c.substr(eq + 1);
        }
        return out;
    }
};

inline CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
    CsvTable t;
    t.file = path.string();
    std::string line;
    std::size_t lineno = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!have_header) {
            if (!line.empty() && line.front() == '#') {
                t.comments.push_back(line.substr(1));
                continue;
            }
            if (line.empty()) continue;
            t.header = split_record(line, t.file, lineno);
            have_header = true;
            continue;
        }
        if (line.empty()) continue;
        auto fields = split_record(line, t.file, lineno);
        if (fields.size() != t.header.size())
            throw ParseError(t.file, lineno,
                             "expected " + std::to_string(t.header.size()) + " fields, got " + std::to_string(fields.size()));
        t.rows.push_back(std::move(fields));
        t.line_numbers.push_back(lineno);
    }
    if (!have_header) throw ParseError(t.file, lineno, "no header line");
    return t;
}

/// Buffered writer; the file is only touched by flush_to.
class CsvWriter {
public:
    void comment(std::string_view key, std::string_view value) {
        buf_ << '#' << key << '=' << value << '\n';
    }

    void header(const std::vector<std::string>& cols) { row(cols); }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) buf_ << ',';
            buf_ << quote_field(fields[i]);
        }
        buf_ << '\n';
    }

    std::string str() const { return buf_.str(); }

    void flush_to(const std::filesystem::path& path) const { write_text(path, buf_.str()); }

    static void write_text(const std::filesystem::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
        out << text;
        if (!out) throw IoError("write to '" + path.string() + "' failed");
    }

private:
    std::ostringstream buf_;
};

inline std::string to_field(double v) { return format_double(v); }
inline std::string to_field(std::size_t v) { return std::to_string(v); }
inline std::string to_field(int v) { return std::to_string(v); }
inline std::string to_field(std::string_view v) { return std::string(v); }
inline std::string to_field(const char* v) { return std::string(v); }
inline std::string to_field(const std::string& v) { return v; }

template <typename... Ts>
std::vector<std::string> fields(const Ts&... vs) {
    return {to_field(vs)...};
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec || !std::filesystem::is_directory(dir))
        throw IoError("cannot create output directory '" + dir.string() + "'");
}

} // namespace argi::io
