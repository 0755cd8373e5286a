#include "quickflex/formulation.hpp"

#include <algorithm>
#include <cmath>

namespace quickflex {

const char* to_string(FormulationKind k) {
  switch (k) {
    case FormulationKind::DistFlowExact: return "distflow";
    case FormulationKind::SocDistFlow: return "soc";
    case FormulationKind::LinDistFlow: return "lindistflow";
  }
  return "?";
}

Point2 ModelInstance::pcc_point(const Eigen::VectorXd& z) const {
  return Point2{z[vars.pcc_p], z[vars.pcc_q]};
}

std::vector<std::pair<double, double>> ModelInstance::gen_setpoints(const Eigen::VectorXd& z) const {
  std::vector<std::pair<double, double>> out(network.generators.size());
  for (std::size_t g = 0; g < out.size(); ++g)
    out[g] = {z[vars.gen_p[g]], z[vars.gen_q[g]]};
  return out;
}

namespace {

bool pcc_is_bare(const Network& net, const Topology& topo) {
  const auto pcc = static_cast<std::size_t>(topo.pcc);
  return topo.child_branches[pcc].size() == 1 && topo.load_p[pcc] == 0.0 &&
         topo.load_q[pcc] == 0.0 && topo.gens_at[pcc].empty();
}

// Generator boxes, flow variables, squared voltages, and the nodal balance /
// voltage-drop equalities shared by the DistFlow family. `lossy` switches the
// branch loss terms (r*l, x*l) and the squared-current columns on.
ModelInstance build_common(const Network& net, FormulationKind kind, bool lossy) {
  ModelInstance inst;
  inst.kind = kind;
  inst.network = net;
  inst.topo = analyze(net);
  const Topology& topo = inst.topo;
  const std::size_t nb = net.buses.size();
  const std::size_t ne = net.branches.size();
  ConicProblem& prob = inst.base;
  VarIndex& v = inst.vars;

  for (const Generator& g : net.generators) {
    v.gen_p.push_back(prob.add_var(g.p_min, g.p_max));
    v.gen_q.push_back(prob.add_var(g.q_min, g.q_max));
  }
  for (const Branch& br : net.branches) {
    if (lossy) {
      v.flow_p.push_back(prob.add_var());
      v.flow_q.push_back(prob.add_var());
    } else {
      // Decoupled per-component thermal limits double as the flow bounds.
      v.flow_p.push_back(prob.add_var(-br.s_max, br.s_max));
      v.flow_q.push_back(prob.add_var(-br.s_max, br.s_max));
    }
  }
  for (const Bus& b : net.buses)
    v.w.push_back(prob.add_var(b.v_min * b.v_min, b.v_max * b.v_max));
  if (lossy)
    for (std::size_t e = 0; e < ne; ++e) v.l.push_back(prob.add_var(0.0, kInf));

  // Reference voltage at the PCC.
  prob.add_equality({{v.w[static_cast<std::size_t>(topo.pcc)], 1.0}}, 1.0);

  // Branch voltage drop: w_i - w_j = 2(r p + x q) - |Z|^2 l.
  for (std::size_t e = 0; e < ne; ++e) {
    const Branch& br = net.branches[e];
    const int i = topo.bus_index(br.from);
    const int j = topo.bus_index(br.to);
    ConicProblem::Row row{{v.w[static_cast<std::size_t>(i)], 1.0},
                          {v.w[static_cast<std::size_t>(j)], -1.0},
                          {v.flow_p[e], -2.0 * br.r},
                          {v.flow_q[e], -2.0 * br.x}};
    if (lossy) row.push_back({v.l[e], br.r * br.r + br.x * br.x});
    prob.add_equality(row, 0.0);
  }

  // Nodal balance at every non-PCC bus: power arriving from the parent plus
  // local generation covers local demand and what is sent to the children.
  for (std::size_t b = 0; b < nb; ++b) {
    if (static_cast<int>(b) == topo.pcc) continue;
    const int pe = topo.parent_branch[b];
    const Branch& br = net.branches[static_cast<std::size_t>(pe)];
    ConicProblem::Row prow, qrow;
    for (int c : topo.child_branches[b]) {
      prow.push_back({v.flow_p[static_cast<std::size_t>(c)], 1.0});
      qrow.push_back({v.flow_q[static_cast<std::size_t>(c)], 1.0});
    }
    prow.push_back({v.flow_p[static_cast<std::size_t>(pe)], -1.0});
    qrow.push_back({v.flow_q[static_cast<std::size_t>(pe)], -1.0});
    if (lossy) {
      prow.push_back({v.l[static_cast<std::size_t>(pe)], br.r});
      qrow.push_back({v.l[static_cast<std::size_t>(pe)], br.x});
    }
    for (int g : topo.gens_at[b]) {
      prow.push_back({v.gen_p[static_cast<std::size_t>(g)], -1.0});
      qrow.push_back({v.gen_q[static_cast<std::size_t>(g)], -1.0});
    }
    prob.add_equality(prow, -topo.load_p[b]);
    prob.add_equality(qrow, -topo.load_q[b]);
  }

  // PCC exchange columns. With a bare PCC (single child branch, no local
  // load or generation) they alias the root branch flow; otherwise dedicated
  // columns with an explicit balance row.
  if (pcc_is_bare(net, topo)) {
    const int root = topo.child_branches[static_cast<std::size_t>(topo.pcc)][0];
    v.pcc_p = v.flow_p[static_cast<std::size_t>(root)];
    v.pcc_q = v.flow_q[static_cast<std::size_t>(root)];
  } else {
    v.pcc_p = prob.add_var();
    v.pcc_q = prob.add_var();
    ConicProblem::Row prow{{v.pcc_p, -1.0}}, qrow{{v.pcc_q, -1.0}};
    for (int c : topo.child_branches[static_cast<std::size_t>(topo.pcc)]) {
      prow.push_back({v.flow_p[static_cast<std::size_t>(c)], 1.0});
      qrow.push_back({v.flow_q[static_cast<std::size_t>(c)], 1.0});
    }
    for (int g : topo.gens_at[static_cast<std::size_t>(topo.pcc)]) {
      prow.push_back({v.gen_p[static_cast<std::size_t>(g)], -1.0});
      qrow.push_back({v.gen_q[static_cast<std::size_t>(g)], -1.0});
    }
    prob.add_equality(prow, -topo.load_p[static_cast<std::size_t>(topo.pcc)]);
    prob.add_equality(qrow, -topo.load_q[static_cast<std::size_t>(topo.pcc)]);
  }
  return inst;
}

}  // namespace

ModelInstance build_lindistflow(const Network& net) {
  return build_common(net, FormulationKind::LinDistFlow, false);
}

ModelInstance build_soc_distflow(const Network& net) {
  ModelInstance inst = build_common(net, FormulationKind::SocDistFlow, true);
  ConicProblem& prob = inst.base;
  const VarIndex& v = inst.vars;
  const Network& net_ = inst.network;
  const Topology& topo = inst.topo;

  for (std::size_t e = 0; e < net_.branches.size(); ++e) {
    const Branch& br = net_.branches[e];
    const int i = topo.bus_index(br.from);

    // |s_ij| <= S^u as one cone per branch, head fixed at the rating.
    const int t = prob.add_var(br.s_max, br.s_max);
    prob.add_soc({t, v.flow_p[e], v.flow_q[e]});

    // |s_ij|^2 <= w_i * l_ij through the rotated-cone identity
    // ((w+l)/2)^2 - ((w-l)/2)^2 = w*l.
    const int a = prob.add_var();
    const int bvar = prob.add_var();
    prob.add_equality({{a, 1.0}, {v.w[static_cast<std::size_t>(i)], -0.5}, {v.l[e], -0.5}}, 0.0);
    prob.add_equality({{bvar, 1.0}, {v.w[static_cast<std::size_t>(i)], -0.5}, {v.l[e], 0.5}}, 0.0);
    prob.add_soc({a, bvar, v.flow_p[e], v.flow_q[e]});
  }
  return inst;
}

namespace {

ConicProblem with_objective_and_pin(const ModelInstance& inst, const DirectionObjective& obj,
                                    const std::optional<Pin>& pin) {
  ConicProblem prob = inst.base;
  prob.clear_objective();
  prob.add_objective(inst.vars.pcc_p, obj.alpha);
  prob.add_objective(inst.vars.pcc_q, obj.beta);
  if (pin) {
    const int col = pin->coord == Pin::Coord::P ? inst.vars.pcc_p : inst.vars.pcc_q;
    if (pin->band <= 0.0) {
      prob.add_equality({{col, 1.0}}, pin->value);
    } else {
      const double lo = std::max(prob.lower(col), pin->value - pin->band);
      const double hi = std::min(prob.upper(col), pin->value + pin->band);
      prob.set_bounds(col, std::min(lo, hi), std::max(lo, hi));
    }
  }
  return prob;
}

DirectionalResult package(const ModelInstance& inst, Solution sol, int solves) {
  // Subproblems may carry extra columns (cut slacks); the base layout is a
  // prefix of theirs.
  if (sol.z.size() > inst.base.n_vars()) sol.z = sol.z.head(inst.base.n_vars()).eval();
  DirectionalResult res;
  res.pcc = sol.z.size() == inst.base.n_vars() ? inst.pcc_point(sol.z) : Point2{};
  if (sol.z.size() == inst.base.n_vars()) {
    for (std::size_t g = 0; g < inst.network.generators.size(); ++g) {
      res.gen_p.push_back(sol.z[inst.vars.gen_p[g]]);
      res.gen_q.push_back(sol.z[inst.vars.gen_q[g]]);
    }
  }
  res.solution = std::move(sol);
  res.conic_solves = solves;
  return res;
}

}  // namespace

DirectionalResult solve_direction(const ModelInstance& inst, const DirectionObjective& obj,
                                  const std::optional<Pin>& pin) {
  ConicProblem prob = with_objective_and_pin(inst, obj, pin);
  return package(inst, solve(prob), 1);
}

namespace {

struct Cut {
  int branch;
  double w0, l0, p0, q0;
};

double branch_residual(const ModelInstance& inst, const Eigen::VectorXd& z, std::size_t e) {
  const Branch& br = inst.network.branches[e];
  const int i = inst.topo.bus_index(br.from);
  const double w = z[inst.vars.w[static_cast<std::size_t>(i)]];
  const double l = z[inst.vars.l[e]];
  const double p = z[inst.vars.flow_p[e]];
  const double q = z[inst.vars.flow_q[e]];
  return w * l - (p * p + q * q);
}

DirectionalResult solve_exact_on(const ModelInstance& soc, const DirectionObjective& obj,
                                 const CcpOptions& ccp, const std::optional<Pin>& pin) {
  const Network& net = soc.network;
  const Topology& topo = soc.topo;
  const std::size_t ne = net.branches.size();

  std::vector<Cut> cuts;
  auto subproblem = [&]() {
    ConicProblem prob = with_objective_and_pin(soc, obj, pin);
    // Squared current on the exact manifold never exceeds (S/V_min)^2 at the
    // sending end; capping it keeps the first relaxation from drifting far.
    for (std::size_t e = 0; e < ne; ++e) {
      const Branch& br = net.branches[e];
      const Bus& parent = net.buses[static_cast<std::size_t>(topo.bus_index(br.from))];
      const double cap = (br.s_max / parent.v_min) * (br.s_max / parent.v_min);
      prob.set_bounds(soc.vars.l[e], 0.0, cap);
    }
    // A cut anchored exactly on the manifold would pin the iterate to a face
    // with no strict interior; a margin of a tolerance fraction keeps the
    // subproblems Slater-regular while the final residual stays below tol.
    const double margin = 0.1 * ccp.tol;
    for (const Cut& cut : cuts) {
      const int slack = prob.add_var(0.0, kInf);
      prob.add_objective(slack, ccp.penalty);
      const std::size_t e = static_cast<std::size_t>(cut.branch);
      const int i = topo.bus_index(net.branches[e].from);
      prob.add_equality({{soc.vars.l[e], cut.w0},
                         {soc.vars.w[static_cast<std::size_t>(i)], cut.l0},
                         {soc.vars.flow_p[e], -2.0 * cut.p0},
                         {soc.vars.flow_q[e], -2.0 * cut.q0},
                         {slack, 1.0}},
                        cut.w0 * cut.l0 - cut.p0 * cut.p0 - cut.q0 * cut.q0 + margin);
    }
    return prob;
  };

  DirectionalResult best;
  int solves = 0;
  for (int outer = 1; outer <= ccp.max_iter; ++outer) {
    Solution sol = solve(subproblem(), ccp.solver);
    ++solves;
    if (sol.status != SolveStatus::Optimal) {
      DirectionalResult res = outer == 1 ? package(soc, std::move(sol), solves)
                                         : std::move(best);
      res.conic_solves = solves;
      res.ccp_iterations = outer;
      res.exact_tight = false;
      if (outer > 1 && res.solution.status == SolveStatus::Optimal)
        res.solution.status = SolveStatus::NumericalFailure;
      return res;
    }

    double max_rho = 0.0;
    for (std::size_t e = 0; e < ne; ++e)
      max_rho = std::max(max_rho, branch_residual(soc, sol.z, e));

    DirectionalResult res = package(soc, std::move(sol), solves);
    res.ccp_iterations = outer;
    res.exact_residual = max_rho;
    if (max_rho <= ccp.tol) {
      res.exact_tight = true;
      return res;
    }
    best = res;
    if (outer == ccp.max_iter) break;

    // Re-anchor the linearization on the physical state behind the iterate's
    // generator setpoints whenever the sweep converges; the raw iterate is
    // the fallback.
    std::vector<std::pair<double, double>> setpoints(net.generators.size());
    for (std::size_t g = 0; g < setpoints.size(); ++g)
      setpoints[g] = {best.gen_p[g], best.gen_q[g]};
    SweepResult proj = sweep_power_flow(net, setpoints);

    const Eigen::VectorXd& z = best.solution.z;
    for (std::size_t e = 0; e < ne; ++e) {
      if (branch_residual(soc, z, e) <= ccp.tol) continue;
      const int i = topo.bus_index(net.branches[e].from);
      Cut cut;
      cut.branch = static_cast<int>(e);
      if (proj.converged) {
        cut.w0 = proj.w[static_cast<std::size_t>(i)];
        cut.l0 = proj.l_sq[e];
        cut.p0 = proj.send_p[e];
        cut.q0 = proj.send_q[e];
      } else {
        cut.w0 = z[soc.vars.w[static_cast<std::size_t>(i)]];
        cut.l0 = z[soc.vars.l[e]];
        cut.p0 = z[soc.vars.flow_p[e]];
        cut.q0 = z[soc.vars.flow_q[e]];
      }
      cuts.push_back(cut);
    }
  }
  best.exact_tight = false;
  best.conic_solves = solves;
  return best;   // CcpStalled: reported with the flag, excluded from the region
}

}  // namespace

DirectionalResult solve_distflow_exact(const Network& net, const DirectionObjective& obj,
                                       const CcpOptions& ccp, const std::optional<Pin>& pin) {
  return solve_exact_on(build_soc_distflow(net), obj, ccp, pin);
}

DirectionalModel::DirectionalModel(const Network& net, FormulationKind kind, const CcpOptions& ccp)
    : kind_(kind), net_(net), ccp_(ccp),
      inst_(kind == FormulationKind::LinDistFlow ? build_lindistflow(net)
                                                 : build_soc_distflow(net)) {}

DirectionalResult DirectionalModel::solve(const DirectionObjective& obj,
                                          const std::optional<Pin>& pin) const {
  if (kind_ == FormulationKind::DistFlowExact) return solve_exact_on(inst_, obj, ccp_, pin);
  return solve_direction(inst_, obj, pin);
}

}  // namespace quickflex
