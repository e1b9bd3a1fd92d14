#include "mlnk/io.hpp"
#include "mlnk/errors.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace mlnk {

std::string format_double(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v,
                             std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string hex_u64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[std::size_t(i)] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string json_escape(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '"':
            out += "\\\"";
            break;
        case '\\':
            out += "\\\\";
            break;
        case '\n':
            out += "\\n";
            break;
        case '\r':
            out += "\\r";
            break;
        case '\t':
            out += "\\t";
            break;
        default:
            if (static_cast<unsigned char>(c) < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                out += buf;
            } else {
                out += c;
            }
        }
    }
    return out;
}

JsonValue JsonValue::object() {
    JsonValue v;
    v.kind_ = Kind::Object;
    return v;
}

JsonValue JsonValue::array() {
    JsonValue v;
    v.kind_ = Kind::Array;
    return v;
}

JsonValue JsonValue::number(double x) {
    JsonValue v;
    if (std::isfinite(x))
        v.scalar_ = format_double(x);
    else
        v.scalar_ = "\"" + format_double(x) + "\"";
    return v;
}

JsonValue JsonValue::integer(long long x) {
    JsonValue v;
    v.scalar_ = std::to_string(x);
    return v;
}

JsonValue JsonValue::string(std::string s) {
    JsonValue v;
    v.scalar_ = "\"" + json_escape(s) + "\"";
    return v;
}

JsonValue JsonValue::boolean(bool b) {
    JsonValue v;
    v.scalar_ = b ? "true" : "false";
    return v;
}

JsonValue JsonValue::null() { return JsonValue(); }

JsonValue& JsonValue::set(const std::string& key, JsonValue v) {
    if (kind_ != Kind::Object)
        throw Error("JsonValue::set on a non-object");
    members_.emplace_back(key, std::move(v));
    return *this;
}

JsonValue& JsonValue::push(JsonValue v) {
    if (kind_ != Kind::Array)
        throw Error("JsonValue::push on a non-array");
    items_.push_back(std::move(v));
    return *this;
}

void JsonValue::dump_to(std::string& out, int indent, int depth) const {
    auto pad = [&](int d) { out.append(std::size_t(indent) * std::size_t(d), ' '); };
    switch (kind_) {
    case Kind::Scalar:
        out += scalar_;
        break;
    case Kind::Object: {
        if (members_.empty()) {
            out += "{}";
            break;
        }
        out += "{\n";
        for (std::size_t i = 0; i < members_.size(); ++i) {
            pad(depth + 1);
            out += "\"" + json_escape(members_[i].first) + "\": ";
            members_[i].second.dump_to(out, indent, depth + 1);
            if (i + 1 < members_.size())
                out += ",";
            out += "\n";
        }
        pad(depth);
        out += "}";
        break;
    }
    case Kind::Array: {
        if (items_.empty()) {
            out += "[]";
            break;
        }
        out += "[\n";
        for (std::size_t i = 0; i < items_.size(); ++i) {
            pad(depth + 1);
            items_[i].dump_to(out, indent, depth + 1);
            if (i + 1 < items_.size())
                out += ",";
            out += "\n";
        }
        pad(depth);
        out += "]";
        break;
    }
    }
}

std::string JsonValue::dump(int indent) const {
    std::string out;
    dump_to(out, indent, 0);
    out += "\n";
    return out;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open for writing: " + path);
    f.write(content.data(), std::streamsize(content.size()));
    if (!f)
        throw Error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot open for reading: " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

namespace {

void put_u64le(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        out.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64le(std::string& out, double d) {
    put_u64le(out, std::bit_cast<std::uint64_t>(d));
}

std::uint64_t get_u64le(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i)
        v = (v << 8) | p[i];
    return v;
}

double get_f64le(const unsigned char* p) {
    return std::bit_cast<double>(get_u64le(p));
}

int log2_exact(int n) {
    int k = 0;
    while ((1 << k) < n)
        ++k;
    return k;
}

} // namespace

void write_field_binary(const std::string& path, const GridField& f,
                        double sigma, double t) {
    f.grid.validate();
    std::string out;
    out.reserve(32 + f.values.size() * 8);
    out += "MLNK";
    out.push_back(char(1)); // version
    out.push_back(char(f.grid.d));
    out.push_back(char(log2_exact(f.grid.n)));
    out.push_back(char(0)); // reserved
    put_f64le(out, f.grid.L);
    put_f64le(out, sigma);
    put_f64le(out, t);
    for (double v : f.values)
        put_f64le(out, v);
    write_text_file(path, out);
}

GridField read_field_binary(const std::string& path) {
    std::string raw = read_text_file(path);
    if (raw.size() < 32 || raw.compare(0, 4, "MLNK") != 0)
        throw ValidationError("not a field container: " + path);
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    int version = p[4];
    if (version != 1)
        throw ValidationError("unsupported field container version");
    GridField f;
    f.grid.d = p[5];
    f.grid.n = 1 << p[6];
    f.grid.L = get_f64le(p + 8);
    f.grid.validate();
    std::size_t total = f.grid.total_points();
    if (raw.size() != 32 + total * 8)
        throw ValidationError("field container size does not match its header");
    f.values.resize(total);
    for (std::size_t i = 0; i < total; ++i)
        f.values[i] = get_f64le(p + 32 + 8 * i);
    return f;
}

void write_kernel_binary(const std::string& path, const KernelSample& k) {
    write_field_binary(path, k.values, k.sigma, k.t);
}

void write_field_csv(const std::string& path, const GridField& f) {
    std::string out;
    std::vector<std::string> head;
    for (int a = 0; a < f.grid.d; ++a)
        head.push_back("x" + std::to_string(a));
    head.push_back("value");
    out += csv_row(head);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        auto j = f.grid.unflatten(i);
        std::vector<std::string> cells;
        for (int a = 0; a < f.grid.d; ++a)
            cells.push_back(format_double(f.grid.coord(j[a])));
        cells.push_back(format_double(f.values[i]));
        out += csv_row(cells);
    }
    write_text_file(path, out);
}

std::string csv_row(const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i)
            out += ",";
        out += cells[i];
    }
    out += "\n";
    return out;
}

} // namespace mlnk
