#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "quickflex/formulation.hpp"
#include "quickflex/geometry.hpp"
#include "quickflex/grid.hpp"

namespace quickflex {

enum class Method { QF, MC, EC, RR };

const char* to_string(Method m);

struct AlgorithmConfig {
  Method method = Method::QF;
  FormulationKind formulation = FormulationKind::LinDistFlow;
  double epsilon = 1e-3;     // QF relative-area tolerance
  int k = 0;                 // point budget for MC/EC/RR; ignored by QF
  std::uint64_t seed = 0;    // MC only
  int max_points = 512;      // QF safety cap on computed points
  CcpOptions ccp;
};

struct TraceRow {
  int k = 0;            // running count of computed points
  double area = 0.0;    // hull area after this point's accept/reject decision
  double eps = 0.0;     // relative area increase offered by this point
  Point2 point;
  bool accepted = true;
  std::vector<double> gen_p, gen_q;   // generator setpoints behind the point
  std::vector<double> primal;         // solver primal (empty for MC)
  double exact_residual = 0.0;        // CCP tightness residual (exact runs)
};

struct RegionResult {
  Polygon polygon;
  std::vector<TraceRow> trace;
  int solve_count = 0;                      // conic solves performed
  std::map<SolveStatus, int> status_counts;

  double area() const;
  double final_eps() const;
  int points() const { return static_cast<int>(trace.size()); }
};

class EmptyRegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RegionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hull-growing boundary search: four extreme-direction problems seed the
// hull, then facets are visited clockwise and expanded with the point of
// maximal outward distance until no facet offers a relative area gain above
// epsilon.
RegionResult quickflex_run(const Network& net, const AlgorithmConfig& cfg);

// k i.i.d. setpoint vectors uniform over the generator boxes, filtered by a
// converged, limit-satisfying power-flow sweep; hull of surviving PCC points.
RegionResult monte_carlo_run(const Network& net, const AlgorithmConfig& cfg);

// ceil(k/4) equidistant abscissae on the negative and positive parts of the
// achievable p1 range; q1 maximized and minimized at each.
RegionResult epsilon_constrained_run(const Network& net, const AlgorithmConfig& cfg);

// k directional solves at angles 360/k degrees apart.
RegionResult radial_reconstruction_run(const Network& net, const AlgorithmConfig& cfg);

RegionResult run_region(const Network& net, const AlgorithmConfig& cfg);

// area(candidate) / area(reference); throws RegionError on a degenerate
// reference polygon.
double recovered_fraction(const RegionResult& candidate, const RegionResult& reference);

}  // namespace quickflex
