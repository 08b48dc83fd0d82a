#include "idla/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace idla::io {

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string::npos) return out;
    start = pos + 1;
  }
}

template <class T>
T parse_number(const std::string& field, const char* what) {
  T value{};
  const char* first = field.data();
  const char* last = first + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc{} || ptr != last) {
    throw ParseError(std::string("malformed ") + what + ": '" + field + "'");
  }
  return value;
}

std::optional<double> parse_optional_double(const std::string& field, const char* what) {
  if (field.empty()) return std::nullopt;
  return parse_number<double>(field, what);
}

std::string optional_double(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

void write_header(std::ostream& os, const char* tag, const Parameters& parameters, std::uint64_t seed,
                  const std::vector<std::string>& columns) {
  os << "# " << tag << '\n' << "# version " << kFormatVersion << '\n';
  for (const auto& [key, value] : parameters) os << "# param " << key << '=' << value << '\n';
  os << "# seed " << seed << '\n' << "# columns";
  for (const auto& c : columns) os << ' ' << c;
  os << '\n';
}

bool starts_with(const std::string& s, const std::string& prefix) {
  return s.compare(0, prefix.size(), prefix) == 0;
}

/// Reads the header block and returns the first data line, if any.
Header read_header(std::istream& is, const char* tag, const std::vector<std::string>& columns,
                   std::vector<std::string>& body) {
  Header h;
  std::string line;
  if (!std::getline(is, line) || line != std::string("# ") + tag) {
    throw ParseError(std::string("expected format tag '") + tag + "'");
  }
  h.format = tag;
  if (!std::getline(is, line) || !starts_with(line, "# version ")) throw ParseError("missing version line");
  h.version = parse_number<int>(line.substr(10), "version");
  if (h.version != kFormatVersion) {
    throw ParseError("unsupported format version " + std::to_string(h.version));
  }
  bool seen_seed = false;
  bool seen_columns = false;
  while (std::getline(is, line)) {
    if (seen_columns) {
      body.push_back(line);
      continue;
    }
    if (starts_with(line, "# param ")) {
      const std::string kv = line.substr(8);
      const std::size_t eq = kv.find('=');
      if (eq == std::string::npos || eq == 0) throw ParseError("malformed parameter line: " + line);
      h.parameters.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
    } else if (starts_with(line, "# seed ")) {
      h.seed = parse_number<std::uint64_t>(line.substr(7), "seed");
      seen_seed = true;
    } else if (starts_with(line, "# columns ")) {
      h.columns = split(line.substr(10), ' ');
      if (h.columns != columns) throw ParseError("unexpected column list: " + line);
      seen_columns = true;
    } else {
      throw ParseError("unexpected header line: " + line);
    }
  }
  if (!seen_seed || !seen_columns) throw ParseError("incomplete header");
  if (is.bad()) throw ParseError("read error");
  for (const auto& row : body) {
    if (row.empty() || row.front() == '#') throw ParseError("unexpected line after header: '" + row + "'");
  }
  return h;
}

const std::vector<std::string> kAggregateColumns = {"x", "y", "birth_index", "source_level", "birth_time"};
const std::vector<std::string> kForestColumns = {"x",           "y",           "parent_x",  "parent_y",
                                                 "birth_index", "source_level", "birth_time"};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string svg_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::optional<std::string> Header::parameter(const std::string& key) const {
  for (const auto& [k, v] : parameters) {
    if (k == key) return v;
  }
  return std::nullopt;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::logic_error("format_double failed");
  return std::string(buf, ptr);
}

Parameters describe(const GrowthParams& p) {
  return {{"variant", std::string(to_string(p.variant))},
          {"n", std::to_string(p.n)},
          {"M", std::to_string(p.M)},
          {"walk", std::string(to_string(p.walk))}};
}

void write_aggregate(std::ostream& os, const Aggregate& a, const Parameters& parameters) {
  write_header(os, kAggregateTag, parameters, a.params().seed, kAggregateColumns);
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Site s = a.sites()[i];
    const Provenance& p = a.provenance()[i];
    os << s.x << '\t' << s.y << '\t' << p.birth_index << '\t' << p.source_level << '\t'
       << optional_double(p.birth_time) << '\n';
  }
}

void write_forest(std::ostream& os, const Forest& f, const Parameters& parameters, std::uint64_t seed) {
  write_header(os, kForestTag, parameters, seed, kForestColumns);
  for (const ForestVertex& v : f.vertices()) {
    os << v.site.x << '\t' << v.site.y << '\t';
    if (v.parent) {
      os << v.parent->x << '\t' << v.parent->y << '\t';
    } else {
      os << "\t\t";
    }
    os << v.birth_index << '\t' << v.source_level << '\t' << optional_double(v.birth_time) << '\n';
  }
}

AggregateFile read_aggregate(std::istream& is) {
  AggregateFile file;
  std::vector<std::string> body;
  file.header = read_header(is, kAggregateTag, kAggregateColumns, body);
  for (const auto& line : body) {
    const auto f = split(line, '\t');
    if (f.size() != kAggregateColumns.size()) throw ParseError("wrong field count in row: '" + line + "'");
    AggregateRow row;
    row.site = {parse_number<std::int64_t>(f[0], "x"), parse_number<std::int64_t>(f[1], "y")};
    row.birth_index = parse_number<std::uint64_t>(f[2], "birth_index");
    row.source_level = parse_number<std::int64_t>(f[3], "source_level");
    row.birth_time = parse_optional_double(f[4], "birth_time");
    file.rows.push_back(row);
  }
  return file;
}

ForestFile read_forest(std::istream& is) {
  ForestFile file;
  std::vector<std::string> body;
  file.header = read_header(is, kForestTag, kForestColumns, body);
  std::vector<ForestVertex> vertices;
  for (const auto& line : body) {
    const auto f = split(line, '\t');
    if (f.size() != kForestColumns.size()) throw ParseError("wrong field count in row: '" + line + "'");
    ForestVertex v;
    v.site = {parse_number<std::int64_t>(f[0], "x"), parse_number<std::int64_t>(f[1], "y")};
    if (f[2].empty() != f[3].empty()) throw ParseError("half-empty parent in row: '" + line + "'");
    if (!f[2].empty()) {
      v.parent = Site{parse_number<std::int64_t>(f[2], "parent_x"), parse_number<std::int64_t>(f[3], "parent_y")};
    }
    v.birth_index = parse_number<std::uint64_t>(f[4], "birth_index");
    v.source_level = parse_number<std::int64_t>(f[5], "source_level");
    v.birth_time = parse_optional_double(f[6], "birth_time");
    vertices.push_back(v);
  }
  try {
    file.forest = Forest(std::move(vertices));
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid forest: ") + e.what());
  }
  return file;
}

AggregateFile read_aggregate_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_aggregate(in);
}

ForestFile read_forest_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  return read_forest(in);
}

// --- SVG ------------------------------------------------------------------

void render_svg(std::ostream& os, const std::vector<Site>& sites,
                const std::vector<std::pair<Site, Site>>& edges, const SvgOptions& options) {
  std::int64_t xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  auto extend = [&](Site s) {
    xmin = std::min(xmin, s.x);
    xmax = std::max(xmax, s.x);
    ymin = std::min(ymin, s.y);
    ymax = std::max(ymax, s.y);
  };
  for (Site s : sites) extend(s);
  for (const auto& [a, b] : edges) {
    extend(a);
    extend(b);
  }
  for (Site s : options.highlight_primary) extend(s);
  for (Site s : options.highlight_secondary) extend(s);
  if (options.strip) {
    extend({0, *options.strip});
    extend({0, -*options.strip});
  }
  if (options.rectangle) {
    extend({*options.rectangle, 0});
    extend({-*options.rectangle, 0});
  }
  const double c = options.cell;
  const double width = static_cast<double>(xmax - xmin + 3) * c;
  const double height = static_cast<double>(ymax - ymin + 3) * c;
  // Cell centre in SVG coordinates; y grows downwards.
  auto cx = [&](std::int64_t x) { return (static_cast<double>(x - xmin) + 1.5) * c; };
  auto cy = [&](std::int64_t y) { return (static_cast<double>(ymax - y) + 1.5) * c; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << svg_number(width)
     << "\" height=\"" << svg_number(height) << "\" viewBox=\"0 0 " << svg_number(width) << ' '
     << svg_number(height) << "\">\n";
  if (!options.title.empty()) os << "<title>" << xml_escape(options.title) << "</title>\n";
  os << "<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"10\" refY=\"5\" markerWidth=\"4\" "
        "markerHeight=\"4\" orient=\"auto\"><path d=\"M 0 0 L 10 5 L 0 10 z\" fill=\"#222\"/></marker></defs>\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << svg_number(width) << "\" height=\"" << svg_number(height)
     << "\" fill=\"white\"/>\n";

  auto squares = [&](const std::vector<Site>& set, const char* fill) {
    os << "<g fill=\"" << fill << "\" stroke=\"none\">\n";
    for (Site s : set) {
      os << "<rect x=\"" << svg_number(cx(s.x) - 0.5 * c) << "\" y=\"" << svg_number(cy(s.y) - 0.5 * c)
         << "\" width=\"" << svg_number(c) << "\" height=\"" << svg_number(c) << "\"/>\n";
    }
    os << "</g>\n";
  };
  squares(sites, "#b8b8b8");
  if (!options.highlight_primary.empty()) squares(options.highlight_primary, "#1f4fd8");
  if (!options.highlight_secondary.empty()) squares(options.highlight_secondary, "#d81f1f");

  // Guides are paths so that <line> elements correspond to edges only.
  os << "<g stroke=\"#2a8a2a\" stroke-width=\"1\" stroke-dasharray=\"4 2\" fill=\"none\">\n";
  if (options.strip) {
    for (std::int64_t y : {*options.strip, -*options.strip}) {
      const double py = y >= 0 ? cy(y) - 0.5 * c : cy(y) + 0.5 * c;
      os << "<path d=\"M 0 " << svg_number(py) << " H " << svg_number(width) << "\"/>\n";
    }
  }
  if (options.rectangle) {
    for (std::int64_t x : {*options.rectangle, -*options.rectangle}) {
      const double px = x >= 0 ? cx(x) + 0.5 * c : cx(x) - 0.5 * c;
      os << "<path d=\"M " << svg_number(px) << " 0 V " << svg_number(height) << "\"/>\n";
    }
  }
  os << "</g>\n";

  os << "<g stroke=\"#222\" stroke-width=\"" << svg_number(0.12 * c) << "\">\n";
  for (const auto& [from, to] : edges) {
    // Shorten the segment so the arrowhead stays inside the child's square.
    const double x1 = cx(from.x), y1 = cy(from.y), x2 = cx(to.x), y2 = cy(to.y);
    const double shrink = 0.2;
    os << "<line x1=\"" << svg_number(x1 + (x2 - x1) * shrink) << "\" y1=\"" << svg_number(y1 + (y2 - y1) * shrink)
       << "\" x2=\"" << svg_number(x2 - (x2 - x1) * shrink) << "\" y2=\"" << svg_number(y2 - (y2 - y1) * shrink)
       << "\" marker-end=\"url(#arrow)\"/>\n";
  }
  os << "</g>\n</svg>\n";
}

void render_aggregate_svg(std::ostream& os, const std::vector<Site>& sites, const SvgOptions& options) {
  render_svg(os, sites, {}, options);
}

void render_forest_svg(std::ostream& os, const Forest& f, const SvgOptions& options) {
  std::vector<Site> sites;
  std::vector<std::pair<Site, Site>> edges;
  for (const ForestVertex& v : f.vertices()) {
    sites.push_back(v.site);
    if (v.parent) edges.emplace_back(*v.parent, v.site);
  }
  render_svg(os, sites, edges, options);
}

// --- reports --------------------------------------------------------------

namespace {

std::uint64_t report_seed(const ExperimentReport& r) {
  for (const auto& [k, v] : r.parameters) {
    if (k == "first_seed") return std::stoull(v);
  }
  return 0;
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

void write_report_csv(std::ostream& os, const ExperimentReport& report) {
  Parameters params{{"experiment", report.id}};
  params.insert(params.end(), report.parameters.begin(), report.parameters.end());
  write_header(os, "idla-report", params, report_seed(report), {});
  for (std::size_t i = 0; i < report.columns.size(); ++i) os << (i ? "," : "") << csv_field(report.columns[i]);
  os << '\n';
  for (const auto& rec : report.records) {
    for (std::size_t i = 0; i < rec.size(); ++i) os << (i ? "," : "") << csv_field(rec[i]);
    os << '\n';
  }
}

void write_report_summary(std::ostream& os, const ExperimentReport& report) {
  Parameters params{{"experiment", report.id}};
  params.insert(params.end(), report.parameters.begin(), report.parameters.end());
  os << "# idla-summary\n# version " << kFormatVersion << '\n';
  for (const auto& [key, value] : params) os << "# param " << key << '=' << value << '\n';
  os << "# seed " << report_seed(report) << '\n';
  os << "estimates:\n";
  for (const Estimate& e : report.estimates) {
    os << "  " << e.name << " = " << fixed(e.value) << " +- " << fixed(e.std_error) << " (N=" << e.samples
       << ")\n";
  }
  os << "verdicts:\n";
  for (const Verdict& v : report.verdicts) {
    os << "  " << (v.passed ? "PASS" : "FAIL") << "  " << v.name;
    if (!v.detail.empty()) os << "  [" << v.detail << "]";
    os << '\n';
  }
  os << "overall: " << (report.passed() ? "PASS" : "FAIL") << '\n';
}

void write_diff_csv(std::ostream& os, const ForestDiff& diff, const Parameters& parameters) {
  write_header(os, "idla-forest-diff", parameters, 0, {});
  os << "kind,x,y,chain\n";
  for (Site s : diff.vertex_discrepancies) os << "vertex," << s.x << ',' << s.y << ",\n";
  for (Site s : diff.edge_discrepancies) os << "edge," << s.x << ',' << s.y << ",\n";
  for (std::size_t c = 0; c < diff.chains.size(); ++c) {
    for (Site s : diff.chains[c].relays) os << "relay," << s.x << ',' << s.y << ',' << c << '\n';
  }
}

}  // namespace idla::io
