#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "quickflex/grid.hpp"
#include "quickflex/region.hpp"

namespace quickflex {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Network JSON: { base_mva, buses:[{id, vmin, vmax, is_pcc}],
// branches:[{from, to, r, x, s_max}], loads:[{bus, p, q}],
// generators:[{bus, pmin, pmax, qmin, qmax, c1, c0}] }, all pu.
// Orientation is normalized on load; the result passes validate() or a
// ParseError lists every violation with its JSON path.
Network parse_network(const std::filesystem::path& path);
Network parse_network_json(const nlohmann::json& doc);
nlohmann::json network_to_json(const Network& net);

std::string format_double(double v);   // 12 significant digits

void write_region_csv(const std::filesystem::path& path, const Polygon& poly);
void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace);

struct Metrics {
  std::string method;
  std::string formulation;
  int k = 0;
  double area = 0.0;
  double eps_final = 0.0;
  int solve_count = 0;
  std::optional<double> recovered_fraction;
};

void write_metrics_json(const std::filesystem::path& path, const Metrics& m);
void write_compare_metrics_json(const std::filesystem::path& path, const std::vector<Metrics>& rows);

// Deterministic SVG overlay: one closed path per polygon, axis lines, legend.
void emit_svg(const std::vector<std::pair<std::string, Polygon>>& regions,
              const std::filesystem::path& path);

// CLI entry (subcommands `run` and `compare`); returns the process exit code.
int run_main(int argc, const char* const* argv);

}  // namespace quickflex
