// Acceptance suite: end-to-end checks over the shipped fixtures. Each
// criterion prints one [PASS]/[FAIL] line; the process exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "quickflex/conic.hpp"
#include "quickflex/io.hpp"
#include "quickflex/region.hpp"
#include "support/oracles.hpp"

using namespace quickflex;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(const std::string& id, bool ok, const std::string& detail) {
  if (!ok) ++g_failures;
  std::printf("[%s] %s — %s\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str());
  std::fflush(stdout);
}

void warn(const std::string& id, bool ok, const std::string& detail) {
  std::printf("[%s] %s — %s\n", ok ? "PASS" : "WARN", id.c_str(), detail.c_str());
  std::fflush(stdout);
}

struct Fixture {
  std::string name;
  Network net;
};

std::vector<Fixture> load_fixtures() {
  return {
      {"twobus", parse_network(quickflex::testing::data_file("twobus.json"))},
      {"feeder5", parse_network(quickflex::testing::data_file("feeder5.json"))},
      {"feeder13", parse_network(quickflex::testing::data_file("feeder13.json"))},
  };
}

AlgorithmConfig config(Method m, FormulationKind f, int k = 0) {
  AlgorithmConfig cfg;
  cfg.method = m;
  cfg.formulation = f;
  cfg.epsilon = 1e-3;
  cfg.k = k;
  cfg.seed = 0;
  return cfg;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

const FormulationKind kAllForms[] = {FormulationKind::DistFlowExact, FormulationKind::SocDistFlow,
                                     FormulationKind::LinDistFlow};

// --------------------------------------------------------------------------
// C1: two-bus LinDistFlow exactness against the analytic rectangle.

void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  Network net = parse_network(quickflex::testing::data_file("twobus.json"));
  RegionResult res = quickflex_run(net, config(Method::QF, FormulationKind::LinDistFlow));
  const double dt = seconds_since(t0);
  const bool ok = std::abs(res.area() - 1.0) <= 1e-6 && dt < 1.0;
  report("C1 two-bus LinDistFlow exactness", ok,
         "area=" + fmt(res.area()) + " (expected 1 +- 1e-6), runtime=" + fmt(dt) + "s");
}

// --------------------------------------------------------------------------
// C2: QF agrees with dense radial reconstruction on every fixture and
// formulation.

void criterion2(const std::vector<Fixture>& fixtures) {
  bool all_ok = true;
  std::string detail;
  for (const Fixture& fx : fixtures) {
    const auto t0 = std::chrono::steady_clock::now();
    double worst_rel = 0.0;
    for (FormulationKind form : kAllForms) {
      RegionResult qf = quickflex_run(fx.net, config(Method::QF, form));
      RegionResult rr = radial_reconstruction_run(fx.net, config(Method::RR, form, 360));
      const double rel = std::abs(qf.area() - rr.area()) / rr.area();
      worst_rel = std::max(worst_rel, rel);
    }
    const double dt = seconds_since(t0);
    const bool ok = worst_rel <= 5e-3 && dt < 60.0;
    all_ok = all_ok && ok;
    detail += fx.name + ": rel=" + fmt(worst_rel) + " t=" + fmt(dt) + "s; ";
  }
  report("C2 dense-direction oracle (RR at k=360, 0.5%)", all_ok, detail);
}

// --------------------------------------------------------------------------
// C3: the SOC relaxation never under-covers the exact region, strictly over
// 1% on the 13-node-scale fixture; LinDistFlow is expected (not required) to
// overestimate as well.

void criterion3(const std::vector<Fixture>& fixtures) {
  bool all_ok = true;
  bool lin_over = true;
  std::string detail;
  for (const Fixture& fx : fixtures) {
    RegionResult exact = quickflex_run(fx.net, config(Method::QF, FormulationKind::DistFlowExact));
    RegionResult soc = quickflex_run(fx.net, config(Method::QF, FormulationKind::SocDistFlow));
    RegionResult lin = quickflex_run(fx.net, config(Method::QF, FormulationKind::LinDistFlow));
    bool ok = soc.area() >= exact.area() - 1e-9;
    if (fx.name == "feeder13") ok = ok && soc.area() > 1.01 * exact.area();
    lin_over = lin_over && lin.area() > exact.area();
    all_ok = all_ok && ok;
    detail += fx.name + ": soc/exact=" + fmt(soc.area() / exact.area()) +
              " lin/exact=" + fmt(lin.area() / exact.area()) + "; ";
  }
  report("C3 relaxation ordering (SOC >= exact, >1% on feeder13)", all_ok, detail);
  warn("C3b LinDistFlow overestimates (soft)", lin_over,
       lin_over ? "lindistflow area exceeds the exact area on every fixture"
                : "lindistflow did not overestimate everywhere (approximation, not relaxation)");
}

// --------------------------------------------------------------------------
// C4: baseline ordering on the 13-node-scale fixture at the QF budget.

void criterion4(const Network& feeder13) {
  RegionResult qf = quickflex_run(feeder13, config(Method::QF, FormulationKind::DistFlowExact));
  const int k = qf.points();
  RegionResult mc = monte_carlo_run(feeder13, config(Method::MC, FormulationKind::DistFlowExact, k));
  RegionResult ec =
      epsilon_constrained_run(feeder13, config(Method::EC, FormulationKind::DistFlowExact, k));
  RegionResult rr =
      radial_reconstruction_run(feeder13, config(Method::RR, FormulationKind::DistFlowExact, k));
  const double fmc = recovered_fraction(mc, qf);
  const double fec = recovered_fraction(ec, qf);
  const double frr = recovered_fraction(rr, qf);
  const bool ok = fmc < fec && fmc < frr && fmc <= 1.0 + 1e-6 && fec <= 1.0 + 1e-6 &&
                  frr <= 1.0 + 1e-6 && fmc < 0.8;
  report("C4 baseline ordering at the QF budget (seed 0)", ok,
         "k=" + std::to_string(k) + " mc=" + fmt(fmc) + " ec=" + fmt(fec) + " rr=" + fmt(frr));
}

// --------------------------------------------------------------------------
// C5: error-evolution shape of the QF trace.

void criterion5(const std::vector<Fixture>& fixtures) {
  bool all_ok = true;
  std::string detail;
  for (const Fixture& fx : fixtures) {
    for (FormulationKind form : kAllForms) {
      RegionResult qf = quickflex_run(fx.net, config(Method::QF, form));
      bool monotone = true;
      for (std::size_t i = 1; i < qf.trace.size(); ++i)
        monotone = monotone && qf.trace[i].area >= qf.trace[i - 1].area - 1e-12;
      // eps falls below 1e-2 within the first 10 post-initialization points.
      bool fell = false;
      int post = 0;
      for (const TraceRow& row : qf.trace) {
        if (row.k <= 4) continue;
        ++post;
        if (row.eps <= 1e-2) {
          fell = true;
          break;
        }
        if (post >= 10) break;
      }
      if (post == 0) fell = true;   // nothing left to search: already converged
      const bool ok = monotone && fell;
      all_ok = all_ok && ok;
      if (!ok) detail += fx.name + "/" + to_string(form) + " failed; ";
    }
  }
  if (detail.empty()) detail = "eps trace reaches 1e-2 quickly and areas are monotone";
  report("C5 error-evolution shape", all_ok, detail);
}

// --------------------------------------------------------------------------
// C6: the QF budget is insensitive to splitting the DERs.

void criterion6(const Network& feeder13) {
  RegionResult base = quickflex_run(feeder13, config(Method::QF, FormulationKind::DistFlowExact));
  Network split = feeder13;
  split.generators.clear();
  for (const Generator& g : feeder13.generators) {
    Generator half = g;
    half.p_min = g.p_min / 2;
    half.p_max = g.p_max / 2;
    half.q_min = g.q_min / 2;
    half.q_max = g.q_max / 2;
    split.generators.push_back(half);
    split.generators.push_back(half);
  }
  RegionResult doubled = quickflex_run(split, config(Method::QF, FormulationKind::DistFlowExact));
  const int k0 = base.points();
  const int k1 = doubled.points();
  const bool ok = std::abs(k1 - k0) <= 0.2 * k0 + 1e-9;
  report("C6 budget independent of DER count", ok,
         "k=" + std::to_string(k0) + " vs " + std::to_string(k1) + " after splitting " +
             std::to_string(feeder13.generators.size()) + " generators in two");
}

// --------------------------------------------------------------------------
// C7: solver battery with independently known optima.

struct Battery {
  std::string name;
  ConicProblem problem;
  double expected;
};

std::vector<Battery> battery() {
  std::vector<Battery> out;
  {
    ConicProblem p(1);
    p.set_bounds(0, 1.0, kInf);
    p.set_objective(0, 1.0);
    out.push_back({"lower bound", p, 1.0});
  }
  {
    ConicProblem p(2);
    p.set_bounds(0, -0.5, 0.5);
    p.set_bounds(1, -0.3, 0.7);
    p.set_objective(0, -1.0);
    p.set_objective(1, -1.0);
    out.push_back({"box corner", p, -1.2});
  }
  {
    ConicProblem p(3);
    p.set_bounds(1, 3.0, 3.0);
    p.set_bounds(2, 4.0, 4.0);
    p.add_soc({0, 1, 2});
    p.set_objective(0, 1.0);
    out.push_back({"3-4-5 cone", p, 5.0});
  }
  {
    ConicProblem p(2);
    p.set_bounds(0, 0.0, kInf);
    p.set_bounds(1, 0.0, kInf);
    p.add_equality({{0, 1.0}, {1, 1.0}}, 1.0);
    p.set_objective(0, 2.0);
    p.set_objective(1, 3.0);
    out.push_back({"simplex edge", p, 2.0});
  }
  {
    ConicProblem p(3);
    for (int j = 0; j < 3; ++j) p.set_bounds(j, 0.0, kInf);
    p.add_equality({{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1.0);
    p.set_objective(0, -1.0);
    p.set_objective(1, -2.0);
    out.push_back({"budget LP", p, -2.0});
  }
  {
    // Transportation LP: supplies (1, 1.5) to demands (1.2, 1.3), costs
    // [[1,3],[2,1]]; optimum ships x11 = 1, x21 = 0.2, x22 = 1.3: cost 2.7.
    ConicProblem p(4);
    for (int j = 0; j < 4; ++j) p.set_bounds(j, 0.0, kInf);
    p.add_equality({{0, 1.0}, {1, 1.0}}, 1.0);
    p.add_equality({{2, 1.0}, {3, 1.0}}, 1.5);
    p.add_equality({{0, 1.0}, {2, 1.0}}, 1.2);
    p.set_objective(0, 1.0);
    p.set_objective(1, 3.0);
    p.set_objective(2, 2.0);
    p.set_objective(3, 1.0);
    out.push_back({"transportation", p, 2.7});
  }
  {
    // Least squares: min ||B x - d|| with B = [[1,0],[0,1],[1,1]],
    // d = (1,2,4); normal equations give x = (4/3, 7/3), norm sqrt(3)/3.
    ConicProblem p(6);
    p.set_objective(0, 1.0);
    p.add_equality({{3, 1.0}, {1, -1.0}}, -1.0);
    p.add_equality({{4, 1.0}, {2, -1.0}}, -2.0);
    p.add_equality({{5, 1.0}, {1, -1.0}, {2, -1.0}}, -4.0);
    p.add_soc({0, 3, 4, 5});
    out.push_back({"least squares", p, std::sqrt(3.0) / 3.0});
  }
  {
    // min w + l s.t. w*l >= 4 via the rotated-cone identity: w = l = 2.
    ConicProblem p(5);
    p.set_objective(0, 1.0);
    p.set_objective(1, 1.0);
    p.set_bounds(4, 2.0, 2.0);
    p.add_equality({{2, 1.0}, {0, -0.5}, {1, -0.5}}, 0.0);
    p.add_equality({{3, 1.0}, {0, -0.5}, {1, 0.5}}, 0.0);
    p.add_soc({2, 3, 4});
    out.push_back({"product bound", p, 4.0});
  }
  {
    // Chebyshev radius of [0,2]x[0,1]: r* = 0.5.
    ConicProblem p(7);   // r, x, y, s1..s4
    for (int j = 3; j < 7; ++j) p.set_bounds(j, 0.0, kInf);
    p.add_equality({{1, 1.0}, {0, -1.0}, {3, -1.0}}, 0.0);
    p.add_equality({{1, 1.0}, {0, 1.0}, {4, 1.0}}, 2.0);
    p.add_equality({{2, 1.0}, {0, -1.0}, {5, -1.0}}, 0.0);
    p.add_equality({{2, 1.0}, {0, 1.0}, {6, 1.0}}, 1.0);
    p.set_objective(0, -1.0);
    out.push_back({"chebyshev radius", p, -0.5});
  }
  {
    // Distance from (3,4) to the line x = 0: 3 at y = 4.
    ConicProblem p(5);   // t, x, y, u, v
    p.set_objective(0, 1.0);
    p.set_bounds(1, 0.0, 0.0);
    p.add_equality({{3, 1.0}, {1, -1.0}}, -3.0);
    p.add_equality({{4, 1.0}, {2, -1.0}}, -4.0);
    p.add_soc({0, 3, 4});
    out.push_back({"point-line distance", p, 3.0});
  }
  {
    ConicProblem p(2);
    p.set_bounds(0, 0.0, kInf);
    p.set_bounds(1, 0.0, kInf);
    p.add_equality({{0, 1.0}, {1, 1.0}}, 1.0);
    p.set_objective(0, 1.0);
    p.set_objective(1, 1.0);
    out.push_back({"degenerate face", p, 1.0});
  }
  {
    ConicProblem p(2);
    p.set_bounds(0, 1e-3, kInf);
    p.set_bounds(1, 2.0, kInf);
    p.set_objective(0, 1000.0);
    p.set_objective(1, 1.0);
    out.push_back({"scaled LP", p, 3.0});
  }
  {
    ConicProblem p(1);
    p.set_bounds(0, -5.0, -2.0);
    p.set_objective(0, 1.0);
    out.push_back({"negative box", p, -5.0});
  }
  {
    // min ||(u,v)|| with u + v = 2: the projection u = v = 1.
    ConicProblem p(3);
    p.set_objective(0, 1.0);
    p.add_equality({{1, 1.0}, {2, 1.0}}, 2.0);
    p.add_soc({0, 1, 2});
    out.push_back({"line projection", p, std::sqrt(2.0)});
  }
  {
    // |x| + |x - 3| over free x: any point between the anchors, value 3.
    ConicProblem p(4);   // t1, t2, x, u = x - 3
    p.set_objective(0, 1.0);
    p.set_objective(1, 1.0);
    p.add_equality({{3, 1.0}, {2, -1.0}}, -3.0);
    p.add_soc({0, 2});
    p.add_soc({1, 3});
    out.push_back({"two anchors", p, 3.0});
  }
  {
    // Box corner cut by p + q <= 1: optimal face value -1.
    ConicProblem p(3);
    p.set_bounds(0, -0.5, 0.5);
    p.set_bounds(1, -0.3, 0.7);
    p.set_bounds(2, 0.0, kInf);
    p.add_equality({{0, 1.0}, {1, 1.0}, {2, 1.0}}, 1.0);
    p.set_objective(0, -1.0);
    p.set_objective(1, -1.0);
    out.push_back({"cut corner", p, -1.0});
  }
  {
    // min t with t >= ||(0.6, v)||, v in [0.8, 2]: t = 1 at v = 0.8.
    ConicProblem p(3);
    p.set_objective(0, 1.0);
    p.set_bounds(1, 0.6, 0.6);
    p.set_bounds(2, 0.8, 2.0);
    p.add_soc({0, 1, 2});
    out.push_back({"pinned cone", p, 1.0});
  }
  {
    // max x + y with x <= 0.25, y <= 0.75 through a free aggregate.
    ConicProblem p(3);
    p.set_bounds(0, -kInf, 0.25);
    p.set_bounds(1, -kInf, 0.75);
    p.add_equality({{2, 1.0}, {0, -1.0}, {1, -1.0}}, 0.0);
    p.set_objective(2, -1.0);
    out.push_back({"aggregate cap", p, -1.0});
  }
  {
    // Squared-current floor: min l s.t. 1*l >= 0.3^2 + 0.4^2 via the
    // rotated-cone encoding with w fixed at 1: l* = 0.25.
    ConicProblem p(6);   // w, l, a, b, p, q
    p.set_objective(1, 1.0);
    p.set_bounds(0, 1.0, 1.0);
    p.set_bounds(1, 0.0, kInf);
    p.set_bounds(4, 0.3, 0.3);
    p.set_bounds(5, 0.4, 0.4);
    p.add_equality({{2, 1.0}, {0, -0.5}, {1, -0.5}}, 0.0);
    p.add_equality({{3, 1.0}, {0, -0.5}, {1, 0.5}}, 0.0);
    p.add_soc({2, 3, 4, 5});
    out.push_back({"current floor", p, 0.25});
  }
  {
    // min x + ||(x, 1)||: decreasing in nothing past x = 0.5 lower bound.
    ConicProblem p(3);   // x, t, one
    p.set_bounds(0, 0.5, kInf);
    p.set_bounds(2, 1.0, 1.0);
    p.set_objective(0, 1.0);
    p.set_objective(1, 1.0);
    p.add_soc({1, 0, 2});
    out.push_back({"golden", p, 0.5 + std::sqrt(1.25)});
  }
  return out;
}

void criterion7() {
  std::vector<Battery> cases = battery();
  bool all_ok = true;
  std::string detail;
  int n = 0;
  for (Battery& c : cases) {
    ++n;
    Solution s = solve(c.problem);
    const bool opt = s.status == SolveStatus::Optimal;
    const double obj_err = opt ? std::abs(s.objective_value - c.expected) : kInf;
    const double feas = opt ? check_solution(c.problem, s.z).worst() : kInf;
    const bool ok = opt && obj_err <= 1e-6 && feas <= 1e-7;
    all_ok = all_ok && ok;
    if (!ok)
      detail += c.name + " (status=" + to_string(s.status) + " obj_err=" + fmt(obj_err) +
                " feas=" + fmt(feas) + "); ";
  }
  if (detail.empty())
    detail = std::to_string(n) + " instances solved to 1e-6 with feasibility 1e-7";
  report("C7 solver unit battery", all_ok, detail);
}

// --------------------------------------------------------------------------
// C8: physics audit of exact-model vertices plus the closed-form sweep check.

void criterion8(const std::vector<Fixture>& fixtures) {
  bool all_ok = true;
  std::string detail;
  double worst = 0.0;
  for (const Fixture& fx : fixtures) {
    RegionResult qf = quickflex_run(fx.net, config(Method::QF, FormulationKind::DistFlowExact));
    for (const TraceRow& row : qf.trace) {
      if (!row.accepted || row.gen_p.empty()) continue;
      std::vector<std::pair<double, double>> sp;
      for (std::size_t g = 0; g < row.gen_p.size(); ++g)
        sp.emplace_back(row.gen_p[g], row.gen_q[g]);
      SweepResult state = sweep_power_flow(fx.net, sp);
      if (!state.converged) {
        all_ok = false;
        detail += fx.name + ": sweep diverged; ";
        continue;
      }
      const double err =
          std::max(std::abs(state.pcc.p - row.point.p), std::abs(state.pcc.q - row.point.q));
      worst = std::max(worst, err);
      if (err > 1e-4) {
        all_ok = false;
        detail += fx.name + ": vertex err " + fmt(err) + "; ";
      }
    }
  }

  // Sweep vs the closed-form single-branch solution.
  Network twobus = quickflex::testing::make_twobus();
  SweepOptions tight;
  tight.tol = 1e-13;
  SweepResult swp = sweep_power_flow(twobus, {{0.0, 0.0}}, tight);
  quickflex::testing::TwoBusState cf = quickflex::testing::twobus_closed_form(0.01, 0.03, 0.5, 0.2);
  const double sweep_err = std::max({std::abs(swp.w[1] - cf.w2), std::abs(swp.pcc.p - cf.send_p),
                                     std::abs(swp.pcc.q - cf.send_q)});
  if (!(swp.converged && sweep_err <= 1e-8)) {
    all_ok = false;
    detail += "closed-form mismatch " + fmt(sweep_err) + "; ";
  }
  if (detail.empty())
    detail = "worst vertex reconstruction error " + fmt(worst) + ", closed-form error " +
             fmt(sweep_err);
  report("C8 physics audit", all_ok, detail);
}

// --------------------------------------------------------------------------
// C9: byte-identical compare outputs.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

void criterion9() {
  const fs::path base = fs::temp_directory_path() / "quickflex_acceptance";
  fs::remove_all(base);
  const fs::path a = base / "a", b = base / "b";
  const std::string net = quickflex::testing::data_file("feeder5.json");
  for (const fs::path& dir : {a, b}) {
    std::vector<std::string> args{"quickflex", "compare", "--network", net, "--out", dir.string()};
    std::vector<const char*> argv;
    for (const auto& s : args) argv.push_back(s.c_str());
    if (run_main(static_cast<int>(argv.size()), argv.data()) != 0) {
      report("C9 determinism", false, "compare run failed");
      return;
    }
  }
  bool ok = true;
  std::string detail;
  for (const char* name : {"region.csv", "trace.csv", "metrics.json", "region.svg",
                           "compare_metrics.json", "compare.svg", "mc_region.csv", "ec_region.csv",
                           "rr_region.csv"}) {
    if (slurp(a / name) != slurp(b / name)) {
      ok = false;
      detail += std::string(name) + " differs; ";
    }
  }
  if (detail.empty()) detail = "repeated compare runs are byte-identical";
  report("C9 determinism", ok, detail);
}

}  // namespace

int main() {
  std::printf("acceptance suite: fixtures at %s\n", QF_DATA_DIR);
  std::vector<Fixture> fixtures = load_fixtures();

  criterion1();
  criterion2(fixtures);
  criterion3(fixtures);
  criterion4(fixtures[2].net);
  criterion5(fixtures);
  criterion6(fixtures[2].net);
  criterion7();
  criterion8(fixtures);
  criterion9();

  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all criteria passed\n");
  return 0;
}
