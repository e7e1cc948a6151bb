#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "cbo/errors.hpp"

namespace cbo {

/// All artifact floats are serialized with 17 significant digits so that
/// values round-trip exactly; identical runs produce identical bytes.
inline std::string format_double(double v) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default: out += c;
        }
    }
    return out;
}

/// Minimal insertion-ordered JSON writer; enough structure for the
/// artifact documents and nothing more.
class JsonBuilder {
public:
    JsonBuilder& begin_object() { return open('{'); }
    JsonBuilder& end_object() { return close('}'); }
    JsonBuilder& begin_array() { return open('['); }
    JsonBuilder& end_array() { return close(']'); }

    JsonBuilder& key(std::string_view k) {
        separate();
        out_ += '"';
        out_ += json_escape(k);
        out_ += "\":";
        pending_value_ = true;
        return *this;
    }

    JsonBuilder& value(double v) {
        separate();
        if (std::isfinite(v))
            out_ += format_double(v);
        else
            out_ += "null";
        return *this;
    }
    JsonBuilder& value(bool v) {
        separate();
        out_ += v ? "true" : "false";
        return *this;
    }
    JsonBuilder& value(long long v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }
    JsonBuilder& value(unsigned long long v) {
        separate();
        out_ += std::to_string(v);
        return *this;
    }
    JsonBuilder& value(int v) { return value(static_cast<long long>(v)); }
    JsonBuilder& value(long v) { return value(static_cast<long long>(v)); }
    JsonBuilder& value(std::size_t v) {
        return value(static_cast<unsigned long long>(v));
    }
    JsonBuilder& value(std::uint64_t v) {
        return value(static_cast<unsigned long long>(v));
    }
    JsonBuilder& value(std::string_view v) {
        separate();
        out_ += '"';
        out_ += json_escape(v);
        out_ += '"';
        return *this;
    }
    JsonBuilder& value(const char* v) { return value(std::string_view(v)); }
    JsonBuilder& value_null() {
        separate();
        out_ += "null";
        return *this;
    }

    template <typename T>
    JsonBuilder& kv(std::string_view k, const T& v) {
        key(k);
        return value(v);
    }

    JsonBuilder& kv_array(std::string_view k, const std::vector<double>& vs) {
        key(k);
        begin_array();
        for (double v : vs) value(v);
        return end_array();
    }

    JsonBuilder& kv_array(std::string_view k, const std::vector<std::string>& vs) {
        key(k);
        begin_array();
        for (const auto& v : vs) value(v);
        return end_array();
    }

    std::string str() const { return out_ + "\n"; }

private:
    JsonBuilder& open(char c) {
        separate();
        out_ += c;
        first_.push_back(true);
        return *this;
    }
    JsonBuilder& close(char c) {
        out_ += c;
        first_.pop_back();
        return *this;
    }
    void separate() {
        if (pending_value_) {
            pending_value_ = false;
            return;
        }
        if (!first_.empty()) {
            if (!first_.back()) out_ += ',';
            first_.back() = false;
        }
    }

    std::string out_;
    std::vector<bool> first_;
    bool pending_value_ = false;
};

/// Comma-separated, header row, "\n" line endings.
class CsvBuilder {
public:
    explicit CsvBuilder(std::vector<std::string> header) {
        append_row(header);
    }
    void add_row(const std::vector<std::string>& cells) { append_row(cells); }
    const std::string& str() const { return out_; }

private:
    void append_row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ += ',';
            out_ += cells[i];
        }
        out_ += '\n';
    }
    std::string out_;
};

inline void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!f) throw Error("failed writing " + path.string());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string());
    return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

}  // namespace cbo
