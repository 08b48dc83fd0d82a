#pragma once

// Line-oriented file formats, CSV reports and SVG rendering.
//
// Every file starts with `#` header lines:
//   # <format tag>
//   # version <n>
//   # param <key>=<value>      (one per parameter, in a fixed order)
//   # seed <master seed>
//   # columns <names...>
// followed by tab-separated rows. Empty fields stay empty between tabs.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "idla/aggregate.hpp"
#include "idla/analysis.hpp"
#include "idla/forest.hpp"

namespace idla::io {

inline constexpr int kFormatVersion = 1;
inline constexpr const char* kAggregateTag = "idla-aggregate";
inline constexpr const char* kForestTag = "idla-forest";

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Parameters = std::vector<std::pair<std::string, std::string>>;

struct Header {
  std::string format;
  int version = kFormatVersion;
  Parameters parameters;
  std::uint64_t seed = 0;
  std::vector<std::string> columns;

  std::optional<std::string> parameter(const std::string& key) const;
};

/// Parameter echo of a growth run.
Parameters describe(const GrowthParams& p);

void write_aggregate(std::ostream& os, const Aggregate& a, const Parameters& parameters);
void write_forest(std::ostream& os, const Forest& f, const Parameters& parameters,
                  std::uint64_t seed);

struct AggregateRow {
  Site site;
  std::uint64_t birth_index = 0;
  std::int64_t source_level = 0;
  std::optional<double> birth_time;
};

struct AggregateFile {
  Header header;
  std::vector<AggregateRow> rows;
};

struct ForestFile {
  Header header;
  Forest forest;
};

/// Throw ParseError on a wrong tag or version, malformed rows, or trailing
/// characters in any field.
AggregateFile read_aggregate(std::istream& is);
ForestFile read_forest(std::istream& is);

AggregateFile read_aggregate_file(const std::string& path);
ForestFile read_forest_file(const std::string& path);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

// --- SVG ------------------------------------------------------------------

struct SvgOptions {
  double cell = 10.0;
  std::optional<std::int64_t> strip;      // guide lines at y = +-K
  std::optional<std::int64_t> rectangle;  // guide lines at x = +-r
  std::vector<Site> highlight_primary;    // drawn in blue
  std::vector<Site> highlight_secondary;  // drawn in red
  std::string title;
};

/// Unit squares for `sites` and one arrowed <line> per directed edge
/// (parent to child).
void render_svg(std::ostream& os, const std::vector<Site>& sites,
                const std::vector<std::pair<Site, Site>>& edges, const SvgOptions& options);
void render_aggregate_svg(std::ostream& os, const std::vector<Site>& sites, const SvgOptions& options);
void render_forest_svg(std::ostream& os, const Forest& f, const SvgOptions& options);

// --- reports --------------------------------------------------------------

/// Per-seed CSV: commented parameter header, then `columns` and the records.
void write_report_csv(std::ostream& os, const ExperimentReport& report);
/// Human-readable summary: parameters, estimates with standard errors,
/// verdicts and an overall PASS/FAIL line.
void write_report_summary(std::ostream& os, const ExperimentReport& report);

/// Discrepancy list as CSV: kind,x,y (kind is vertex, edge, or chain).
void write_diff_csv(std::ostream& os, const ForestDiff& diff, const Parameters& parameters);

}  // namespace idla::io
