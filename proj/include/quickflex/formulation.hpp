#pragma once

#include <optional>
#include <string>
#include <vector>

#include "quickflex/conic.hpp"
#include "quickflex/direction.hpp"
#include "quickflex/geometry.hpp"
#include "quickflex/grid.hpp"
#include "quickflex/sweep.hpp"

namespace quickflex {

enum class FormulationKind { DistFlowExact, SocDistFlow, LinDistFlow };

const char* to_string(FormulationKind k);

// Column map from semantic variables to problem columns.
struct VarIndex {
  std::vector<int> gen_p, gen_q;     // per generator
  std::vector<int> flow_p, flow_q;   // sending-end flow per branch
  std::vector<int> w;                // squared voltage per bus
  std::vector<int> l;                // squared current per branch (empty for LinDistFlow)
  int pcc_p = -1, pcc_q = -1;        // PCC exchange columns
};

// A formulation bound to a network: constraint set without objective, the
// variable map, and the PCC coordinate extractor. When the PCC bus is bare
// (single child branch, no load or generator) the pcc columns alias the root
// branch flow columns; otherwise dedicated exchange columns with an explicit
// PCC balance row are used.
struct ModelInstance {
  FormulationKind kind = FormulationKind::LinDistFlow;
  Network network;
  Topology topo;
  VarIndex vars;
  ConicProblem base;

  Point2 pcc_point(const Eigen::VectorXd& z) const;
  std::vector<std::pair<double, double>> gen_setpoints(const Eigen::VectorXd& z) const;
};

ModelInstance build_lindistflow(const Network& net);
ModelInstance build_soc_distflow(const Network& net);

// Optional pin of one PCC coordinate: an equality when band == 0, otherwise
// the intersection of the variable bounds with [value-band, value+band].
struct Pin {
  enum class Coord { P, Q };
  Coord coord = Coord::P;
  double value = 0.0;
  double band = 0.0;
};

struct DirectionalResult {
  Solution solution;
  Point2 pcc;
  int conic_solves = 0;
  int ccp_iterations = 0;        // outer tightening iterations (exact model)
  bool exact_tight = true;       // max branch residual <= tolerance
  double exact_residual = 0.0;   // max_e  w_i*l_e - (p_e^2 + q_e^2)
  std::vector<double> gen_p, gen_q;
};

// One directional problem over a convex instance (LinDistFlow or SOC).
DirectionalResult solve_direction(const ModelInstance& inst, const DirectionObjective& obj,
                                  const std::optional<Pin>& pin = {});

struct CcpOptions {
  double tol = 1e-6;       // max branch tightness residual accepted as exact
  int max_iter = 20;
  double penalty = 1e3;    // weight on cut slacks
  // Cut-augmented subproblems are mildly degenerate by construction (cuts run
  // parallel to the cone boundary at the optimum); they are solved at the
  // tolerance scale of the tightening loop, not the solver default.
  SolverOptions solver{1e-6, 1e-6, 100};
};

// Exact (non-convex) DistFlow boundary point for one direction via a
// convex-concave tightening loop: solve the SOC relaxation, measure the
// per-branch residual rho_e = w_i*l_e - (p_e^2+q_e^2), and while it exceeds
// tol add linearized reverse-inequality cuts around the incumbent and
// re-solve. Cuts accumulate and carry penalized slacks so subproblems stay
// feasible; the incumbent is re-anchored on the physical state reconstructed
// from the iterate's generator setpoints whenever the sweep converges.
// A point is accepted as exact-feasible only when exact_tight is true.
DirectionalResult solve_distflow_exact(const Network& net, const DirectionObjective& obj,
                                       const CcpOptions& ccp = {},
                                       const std::optional<Pin>& pin = {});

// Facade used by the region algorithms: one formulation bound to a network.
class DirectionalModel {
 public:
  DirectionalModel(const Network& net, FormulationKind kind, const CcpOptions& ccp = {});

  FormulationKind kind() const { return kind_; }
  const ModelInstance& instance() const { return inst_; }
  const Network& network() const { return net_; }

  DirectionalResult solve(const DirectionObjective& obj, const std::optional<Pin>& pin = {}) const;

 private:
  FormulationKind kind_;
  Network net_;
  CcpOptions ccp_;
  ModelInstance inst_;   // SOC instance doubles as the exact model's base
};

}  // namespace quickflex
