#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "curvlab/errors.hpp"

namespace curvlab::io {

// 17 significant digits, '.' decimal separator regardless of locale.
inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    std::string s(buf);
    for (char& c : s)
        if (c == ',') c = '.';
    return s;
}

inline std::string csv_escape(std::string_view field) {
    const bool quote = field.find_first_of(",\"\r\n") != std::string_view::npos;
    if (!quote) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// RFC 4180 document: CRLF line endings, header row first.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : columns_(header.size()) { add_row(header); }

    void add_row(const std::vector<std::string>& fields) {
        if (fields.size() != columns_) throw InvalidArgument("csv row has the wrong number of fields");
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) text_ += ',';
            text_ += csv_escape(fields[i]);
        }
        text_ += "\r\n";
    }

    void add_numbers(std::initializer_list<double> values) {
        std::vector<std::string> f;
        for (double v : values) f.push_back(format_double(v));
        add_row(f);
    }

    const std::string& str() const { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

// Write to a sibling temporary, then rename over the target.
inline void write_file_atomic(const std::filesystem::path& target, std::string_view content) {
    if (target.has_parent_path()) std::filesystem::create_directories(target.parent_path());
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("io", "cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw Error("io", "failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error("io", "cannot read " + p.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace curvlab::io
