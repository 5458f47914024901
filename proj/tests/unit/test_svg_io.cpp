#include <doctest/doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "sdfm/io.hpp"
#include "sdfm/svg.hpp"
#include "test_util.hpp"

using namespace sdfm;
using sdfm_test::TempDir;

TEST_CASE("atomic_write creates parents and round trips") {
  TempDir dir;
  const auto path = dir.path() / "a" / "b" / "file.txt";
  atomic_write(path, "hello\nworld\n");
  CHECK(read_file(path) == "hello\nworld\n");
  atomic_write(path, "second");
  CHECK(read_file(path) == "second");
  // No leftover temporaries.
  int entries = 0;
  for ([[maybe_unused]] const auto& e :
       std::filesystem::directory_iterator(path.parent_path()))
    ++entries;
  CHECK(entries == 1);
}

TEST_CASE("read_file reports the path on failure") {
  try {
    read_file("/nonexistent/sdfm/nope.txt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("nope.txt") != std::string::npos);
  }
}

TEST_CASE("fnv1a64 matches the reference vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
}

TEST_CASE("to_hex pads to sixteen digits") {
  CHECK(to_hex(0x0ULL) == "0000000000000000");
  CHECK(to_hex(0xdeadbeefULL) == "00000000deadbeef");
  CHECK(to_hex(0xffffffffffffffffULL) == "ffffffffffffffff");
}

TEST_CASE("format_double survives a string round trip") {
  for (double v : {0.1, 1.0, -3.25, 1e-17, 123456.789, -0.0}) {
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_double(1.0) == "1");
  // 17 significant digits keep the value exactly.
  const std::string tenth = format_double(0.1);
  CHECK(std::strtod(tenth.c_str(), nullptr) == 0.1);
}

namespace {

std::size_t count_occurrences(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos;
       pos = text.find(needle, pos + 1))
    ++count;
  return count;
}

}  // namespace

TEST_CASE("line chart renders one polyline per series") {
  LineChart chart("demo", "t", "value");
  SvgSeries up;
  up.x = {0, 1, 2, 3, 4};
  up.y = {0, 1, 2, 3, 4};
  up.label = "up";
  SvgSeries down;
  down.x = {0, 1, 2, 3, 4};
  down.y = {4, 3, 2, 1, 0};
  down.color = palette_color(1);
  chart.add(up);
  chart.add(down);
  const std::string svg = chart.render();
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("demo") != std::string::npos);
  CHECK(count_occurrences(svg, "<polyline") == 2);
  CHECK(svg.find("<title>up</title>") != std::string::npos);
  // Deterministic output.
  CHECK(chart.render() == svg);
}

TEST_CASE("line chart drops NaN points") {
  LineChart chart("gaps", "t", "value");
  SvgSeries s;
  s.x = {0, 1, 2, 3};
  s.y = {1.0, std::numeric_limits<double>::quiet_NaN(), 3.0, 4.0};
  chart.add(s);
  const std::string svg = chart.render();
  REQUIRE(count_occurrences(svg, "<polyline") == 1);
  // Three surviving points -> three "x,y" pairs in the points attribute.
  const std::size_t start = svg.find("points=\"");
  REQUIRE(start != std::string::npos);
  const std::size_t end = svg.find('"', start + 8);
  const std::string points = svg.substr(start + 8, end - start - 8);
  CHECK(count_occurrences(points, ",") == 3);
}

TEST_CASE("line chart escapes XML metacharacters") {
  LineChart chart("a < b & c", "t", "v");
  SvgSeries s;
  s.x = {0, 1};
  s.y = {0, 1};
  chart.add(s);
  const std::string svg = chart.render();
  CHECK(svg.find("a &lt; b &amp; c") != std::string::npos);
}

TEST_CASE("write_svg lands on disk") {
  TempDir dir;
  LineChart chart("disk", "x", "y");
  SvgSeries s;
  s.x = {0, 1};
  s.y = {0, 1};
  chart.add(s);
  const auto path = dir / "chart.svg";
  chart.write(path);
  const std::string content = read_file(path);
  CHECK(content.find("</svg>") != std::string::npos);
}

TEST_CASE("palette colors cycle") {
  CHECK(palette_color(0) != palette_color(1));
  CHECK(palette_color(0) == palette_color(10));
}
