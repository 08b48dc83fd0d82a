#include <sstream>

#include "doctest.h"
#include "idla/io.hpp"

using namespace idla;

namespace {

GrowthSpec clock_spec(std::uint64_t seed) {
  GrowthSpec s;
  s.n = 3;
  s.M = 6;
  s.variant = Variant::poisson_clock;
  s.seed = seed;
  return s;
}

std::size_t count_substring(const std::string& text, const std::string& needle) {
  std::size_t count = 0;
  for (std::size_t pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++count;
  return count;
}

}  // namespace

TEST_CASE("aggregate files round-trip") {
  const Aggregate a = grow(clock_spec(4)).aggregate;
  std::stringstream ss;
  io::write_aggregate(ss, a, io::describe(a.params()));
  const io::AggregateFile f = io::read_aggregate(ss);
  CHECK(f.header.seed == 4);
  CHECK(f.header.parameter("variant") == "poisson-clock");
  REQUIRE(f.rows.size() == a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(f.rows[i].site == a.sites()[i]);
    CHECK(f.rows[i].birth_index == a.provenance()[i].birth_index);
    CHECK(f.rows[i].birth_time == a.provenance()[i].birth_time);
  }
}

TEST_CASE("non-clock aggregates leave the birth time empty") {
  GrowthSpec s = clock_spec(1);
  s.variant = Variant::deterministic;
  s.n = 1;
  s.M = 0;
  const Aggregate a = grow(s).aggregate;
  std::stringstream ss;
  io::write_aggregate(ss, a, io::describe(a.params()));
  const std::string text = ss.str();
  CHECK(text.substr(text.rfind("# columns")).find("0\t0\t1\t0\t\n") != std::string::npos);
  const io::AggregateFile f = io::read_aggregate(ss);
  CHECK_FALSE(f.rows.at(0).birth_time.has_value());
}

TEST_CASE("forest files round-trip with empty parent fields for roots") {
  const Forest forest = build_forest(grow(clock_spec(9)).aggregate);
  std::stringstream ss;
  io::write_forest(ss, forest, {{"n", "3"}}, 9);
  const io::ForestFile f = io::read_forest(ss);
  REQUIRE(f.forest.size() == forest.size());
  for (std::size_t i = 0; i < forest.size(); ++i) {
    CHECK(f.forest.vertices()[i].site == forest.vertices()[i].site);
    CHECK(f.forest.vertices()[i].parent == forest.vertices()[i].parent);
    CHECK(f.forest.vertices()[i].birth_time == forest.vertices()[i].birth_time);
  }
  CHECK(diff_forests(f.forest, forest).empty());
}

TEST_CASE("parsers reject wrong tags, versions and trailing garbage") {
  const std::string header =
      "# idla-aggregate\n# version 1\n# param n=1\n# seed 1\n# columns x y birth_index source_level birth_time\n";
  {
    std::istringstream ok(header + "0\t0\t1\t0\t\n");
    CHECK(io::read_aggregate(ok).rows.size() == 1);
  }
  {
    std::istringstream garbage(header + "0\t0\t1\t0\tx\n");
    CHECK_THROWS_AS(io::read_aggregate(garbage), io::ParseError);
  }
  {
    std::istringstream garbage(header + "0\t0x\t1\t0\t\n");
    CHECK_THROWS_AS(io::read_aggregate(garbage), io::ParseError);
  }
  {
    std::istringstream extra(header + "0\t0\t1\t0\t\t\n");
    CHECK_THROWS_AS(io::read_aggregate(extra), io::ParseError);
  }
  {
    std::istringstream trailing(header + "0\t0\t1\t0\t\n# trailing\n");
    CHECK_THROWS_AS(io::read_aggregate(trailing), io::ParseError);
  }
  {
    std::istringstream blank(header + "0\t0\t1\t0\t\n\n");
    CHECK_THROWS_AS(io::read_aggregate(blank), io::ParseError);
  }
  {
    std::istringstream version("# idla-aggregate\n# version 2\n# seed 1\n");
    CHECK_THROWS_AS(io::read_aggregate(version), io::ParseError);
  }
  {
    std::istringstream tag("# idla-forest\n# version 1\n");
    CHECK_THROWS_AS(io::read_aggregate(tag), io::ParseError);
  }
}

TEST_CASE("doubles are written in shortest round-trip form") {
  CHECK(io::format_double(0.5) == "0.5");
  const double v = 0.1 + 0.2;
  CHECK(std::stod(io::format_double(v)) == v);
}

TEST_CASE("forest SVG has exactly one line element per edge") {
  const Forest f = build_radial_tree(build_classical(400, 2));
  std::ostringstream os;
  io::SvgOptions o;
  o.strip = 3;
  o.rectangle = 4;
  io::render_forest_svg(os, f, o);
  const std::string svg = os.str();
  CHECK(count_substring(svg, "<line ") == f.edge_count());
  CHECK(count_substring(svg, "<rect ") == f.size() + 1);
  CHECK(svg.rfind("</svg>") != std::string::npos);
}

TEST_CASE("report CSV quotes fields containing commas") {
  ExperimentReport r;
  r.id = "demo";
  r.parameters = {{"pattern", "(1,2)"}};
  r.columns = {"a", "b"};
  r.records = {{"1", "(0,0);(1,0)"}};
  r.verdicts = {{"ok", true, ""}};
  std::ostringstream csv;
  io::write_report_csv(csv, r);
  CHECK(csv.str().find("1,\"(0,0);(1,0)\"\n") != std::string::npos);
  std::ostringstream summary;
  io::write_report_summary(summary, r);
  CHECK(summary.str().find("overall: PASS") != std::string::npos);
}
