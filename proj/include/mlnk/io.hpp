#pragma once

#include "mlnk/grid.hpp"
#include "mlnk/kernel.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mlnk {

// 17 significant digits via to_chars; locale independent, round-trip exact
std::string format_double(double v);

std::uint64_t fnv1a64(std::string_view s);
std::string hex_u64(std::uint64_t v);

std::string json_escape(std::string_view s);

// Minimal ordered JSON document builder. Key order is insertion order and
// numbers go through format_double, so serialization varies only with the
// data. Non-finite numbers are emitted as quoted strings.
class JsonValue {
  public:
    static JsonValue object();
    static JsonValue array();
    static JsonValue number(double v);
    static JsonValue integer(long long v);
    static JsonValue string(std::string s);
    static JsonValue boolean(bool b);
    static JsonValue null();

    JsonValue& set(const std::string& key, JsonValue v); // object only
    JsonValue& push(JsonValue v);                        // array only

    std::string dump(int indent = 2) const;

  private:
    enum class Kind { Object, Array, Scalar };
    Kind kind_ = Kind::Scalar;
    std::string scalar_ = "null"; // already-serialized token
    std::vector<std::pair<std::string, JsonValue>> members_;
    std::vector<JsonValue> items_;
    void dump_to(std::string& out, int indent, int depth) const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Field container format: 32-byte header (magic "MLNK", version, d, log2 n,
// reserved byte, then L, sigma, t as little-endian doubles) followed by the
// n^d field values as little-endian doubles in row-major order.
void write_field_binary(const std::string& path, const GridField& f,
                        double sigma = 0.0, double t = 0.0);
GridField read_field_binary(const std::string& path);

void write_kernel_binary(const std::string& path, const KernelSample& k);

// CSV with coordinates and the field value per row
void write_field_csv(const std::string& path, const GridField& f);

std::string csv_row(const std::vector<std::string>& cells);

} // namespace mlnk
