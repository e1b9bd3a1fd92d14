#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "mlnk/errors.hpp"
#include "mlnk/io.hpp"
#include "mlnk/kernel.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <string>
#include <unistd.h>

using namespace mlnk;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    static fs::path p = [] {
        fs::path dir = fs::temp_directory_path() /
                       ("mlnk_io_test_" + std::to_string(::getpid()));
        fs::create_directories(dir);
        return dir;
    }();
    return p;
}

} // namespace

TEST_CASE("format_double round-trips through strtod") {
    for (double v : {0.1, 1.0 / 3.0, 1e300, 5e-324, -2.5e-17, 0.0, -0.0, 42.0}) {
        std::string s = format_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("fnv1a64 matches the published test vectors") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cull);
    CHECK(hex_u64(0xaf63dc4c8601ec8cull) == "af63dc4c8601ec8c");
    CHECK(hex_u64(0x1ull) == "0000000000000001");
}

TEST_CASE("json escaping covers quotes, backslashes and control bytes") {
    CHECK(json_escape("plain") == "plain");
    CHECK(json_escape("a\"b") == "a\\\"b");
    CHECK(json_escape("a\\b") == "a\\\\b");
    CHECK(json_escape("a\nb\tc") == "a\\nb\\tc");
    CHECK(json_escape(std::string(1, '\x01')) == "\\u0001");
}

TEST_CASE("json builder serializes deterministically in insertion order") {
    JsonValue doc = JsonValue::object();
    doc.set("a", JsonValue::integer(1));
    JsonValue arr = JsonValue::array();
    arr.push(JsonValue::boolean(true));
    arr.push(JsonValue::null());
    arr.push(JsonValue::string("x"));
    doc.set("b", std::move(arr));
    doc.set("c", JsonValue::object());
    doc.set("v", JsonValue::number(0.5));
    doc.set("w", JsonValue::number(std::numeric_limits<double>::infinity()));

    std::string expect =
        "{\n"
        "  \"a\": 1,\n"
        "  \"b\": [\n"
        "    true,\n"
        "    null,\n"
        "    \"x\"\n"
        "  ],\n"
        "  \"c\": {},\n"
        "  \"v\": 0.5,\n"
        "  \"w\": \"inf\"\n"
        "}\n";
    CHECK(doc.dump() == expect);

    CHECK_THROWS_AS(JsonValue::number(1.0).set("k", JsonValue::null()), Error);
    CHECK_THROWS_AS(JsonValue::object().push(JsonValue::null()), Error);
}

TEST_CASE("csv rows join cells with commas and end with a newline") {
    CHECK(csv_row({"a", "b", "c"}) == "a,b,c\n");
    CHECK(csv_row({"single"}) == "single\n");
}

TEST_CASE("text files round-trip binary content") {
    fs::path p = scratch_dir() / "blob.txt";
    std::string payload = "line1\nline2\r\n\x01\x02 end";
    write_text_file(p.string(), payload);
    CHECK(read_text_file(p.string()) == payload);
    CHECK_THROWS_AS(read_text_file((scratch_dir() / "missing").string()), Error);
}

TEST_CASE("field containers round-trip bit exactly") {
    GridSpec g{1, 16, 2.0};
    GridField f(g);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        f.values[i] = 0.25 * double(i) - 1.3;
    fs::path p = scratch_dir() / "field.bin";
    write_field_binary(p.string(), f, 0.5, 1.0);
    GridField back = read_field_binary(p.string());
    CHECK(back.grid == g);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        CHECK(back.values[i] == f.values[i]);

    // corrupt the magic
    std::string raw = read_text_file(p.string());
    raw[0] = 'X';
    fs::path bad = scratch_dir() / "bad.bin";
    write_text_file(bad.string(), raw);
    CHECK_THROWS_AS(read_field_binary(bad.string()), ValidationError);

    // truncate the payload
    fs::path trunc = scratch_dir() / "trunc.bin";
    write_text_file(trunc.string(), read_text_file(p.string()).substr(0, 40));
    CHECK_THROWS_AS(read_field_binary(trunc.string()), ValidationError);
}

TEST_CASE("kernel exports carry the field values") {
    GridSpec g{1, 1024, 60.0};
    KernelSample k = kernel_from_symbol(g, 0.5, 2.0);
    fs::path p = scratch_dir() / "kernel.bin";
    write_kernel_binary(p.string(), k);
    GridField back = read_field_binary(p.string());
    CHECK(back.grid == g);
    for (std::size_t i = 0; i < back.values.size(); ++i)
        CHECK(back.values[i] == k.values.values[i]);

    fs::path csv = scratch_dir() / "kernel.csv";
    write_field_csv(csv.string(), k.values);
    std::string text = read_text_file(csv.string());
    // header plus one row per sample
    std::size_t lines = 0;
    for (char c : text)
        lines += c == '\n';
    CHECK(lines == k.values.values.size() + 1);
}
