#include "quickflex/region.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace quickflex {

const char* to_string(Method m) {
  switch (m) {
    case Method::QF: return "qf";
    case Method::MC: return "mc";
    case Method::EC: return "ec";
    case Method::RR: return "rr";
  }
  return "?";
}

double RegionResult::area() const {
  return polygon.vertices.size() >= 3 ? shoelace_area(polygon) : 0.0;
}

double RegionResult::final_eps() const { return trace.empty() ? 0.0 : trace.back().eps; }

namespace {

void validate_config(const AlgorithmConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (cfg.method == Method::MC && cfg.k < 1)
    throw std::invalid_argument("k must be >= 1 for the mc method");
  if ((cfg.method == Method::EC || cfg.method == Method::RR) && cfg.k < 4)
    throw std::invalid_argument("k must be >= 4 for the ec and rr methods");
}

bool usable(const DirectionalResult& r) {
  return r.solution.status == SolveStatus::Optimal && r.exact_tight;
}

void note_solves(RegionResult& out, const DirectionalResult& r) {
  out.solve_count += r.conic_solves;
  ++out.status_counts[r.solution.status];
}

TraceRow make_row(int k, double area, double eps, const DirectionalResult& r, bool accepted) {
  TraceRow row;
  row.k = k;
  row.area = area;
  row.eps = eps;
  row.point = r.pcc;
  row.accepted = accepted;
  row.gen_p = r.gen_p;
  row.gen_q = r.gen_q;
  if (r.solution.z.size() > 0)
    row.primal.assign(r.solution.z.data(), r.solution.z.data() + r.solution.z.size());
  row.exact_residual = r.exact_residual;
  return row;
}

double hull_area_of(const std::vector<Point2>& pts) {
  if (pts.size() < 3) return 0.0;
  Polygon h = hull_allow_degenerate(pts);
  return h.vertices.size() >= 3 ? shoelace_area(h) : 0.0;
}

}  // namespace

// ---------------------------------------------------------------------------
// QuickFlex

RegionResult quickflex_run(const Network& net, const AlgorithmConfig& cfg) {
  validate_config(cfg);
  const DirectionalModel model(net, cfg.formulation, cfg.ccp);
  RegionResult out;

  // Step 1: extreme exchanges min/max p1 and min/max q1. Flat optimal faces
  // are resolved by a second solve that pins the primary coordinate and
  // optimizes along the face toward the clockwise-adjacent corner.
  struct InitSolve {
    DirectionObjective primary;
    Pin::Coord pinned;
  };
  const InitSolve steps[4] = {
      {DirectionObjective(1.0, 0.0), Pin::Coord::P},     // min p1
      {DirectionObjective(-1.0, 0.0), Pin::Coord::P},    // max p1
      {DirectionObjective(0.0, 1.0), Pin::Coord::Q},     // min q1
      {DirectionObjective(0.0, -1.0), Pin::Coord::Q},    // max q1
  };
  constexpr double kLexBand = 1e-7;

  std::vector<DirectionalResult> init_results;
  for (const InitSolve& stepdef : steps) {
    DirectionalResult primary = model.solve(stepdef.primary);
    note_solves(out, primary);
    if (primary.solution.status == SolveStatus::Infeasible)
      throw EmptyRegionError("initialization problem infeasible: the grid has no feasible operating point");
    if (!usable(primary))
      throw RegionError(std::string("initialization solve failed: ") +
                        to_string(primary.solution.status));

    const DirectionObjective secondary(-stepdef.primary.beta, stepdef.primary.alpha);
    Pin pin;
    pin.coord = stepdef.pinned;
    pin.value = stepdef.pinned == Pin::Coord::P ? primary.pcc.p : primary.pcc.q;
    pin.band = kLexBand;
    DirectionalResult refined = model.solve(secondary, pin);
    note_solves(out, refined);
    init_results.push_back(usable(refined) ? std::move(refined) : std::move(primary));
  }

  std::vector<Point2> init_pts;
  for (std::size_t i = 0; i < init_results.size(); ++i) {
    init_pts.push_back(init_results[i].pcc);
    const double a_new = hull_area_of(init_pts);
    const double a_prev = out.trace.empty() ? 0.0 : out.trace.back().area;
    out.trace.push_back(make_row(static_cast<int>(i + 1), a_new, area_increase(a_prev, a_new),
                                 init_results[i], true));
  }

  Polygon hull0 = hull_allow_degenerate(init_pts);
  if (hull0.vertices.size() < 3) {
    out.polygon = hull0;   // 1-D (or single-point) region, area 0
    return out;
  }

  // Vertex ring plus a FIFO of active segments in clockwise creation order,
  // starting from the segment that follows the min-p1 vertex.
  std::vector<Point2> pts = hull0.vertices;
  std::vector<int> nxt(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) nxt[i] = static_cast<int>((i + 1) % pts.size());

  int start = 0;
  {
    double best = kInf;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const double d = std::hypot(pts[i].p - init_results[0].pcc.p, pts[i].q - init_results[0].pcc.q);
      if (d < best) {
        best = d;
        start = static_cast<int>(i);
      }
    }
  }
  std::deque<std::pair<int, int>> queue;
  for (int v = start, n = 0; n < static_cast<int>(pts.size()); v = nxt[v], ++n)
    queue.emplace_back(v, nxt[v]);

  double area = shoelace_area(hull0);
  int k = static_cast<int>(out.trace.size());

  while (!queue.empty() && k < cfg.max_points) {
    auto [va, vb] = queue.front();
    queue.pop_front();
    if (nxt[va] != vb) continue;   // segment already retired by a split

    const Segment seg{pts[static_cast<std::size_t>(va)], pts[static_cast<std::size_t>(vb)], true};
    DirectionalResult cand = model.solve(facet_objective(seg));
    note_solves(out, cand);
    if (!usable(cand)) continue;   // failed facet solve: segment dropped

    ++k;
    const double dist = outward_distance(seg, cand.pcc);
    const double seg_len = std::hypot(seg.b.p - seg.a.p, seg.b.q - seg.a.q);
    const double a_new = area + std::max(dist, 0.0) * seg_len / 2.0;
    const double eps = std::max(area_increase(area, a_new), 0.0);

    if (dist <= kMergeTol || eps <= cfg.epsilon) {
      out.trace.push_back(make_row(k, area, eps, cand, false));
      continue;
    }

    const int vn = static_cast<int>(pts.size());
    pts.push_back(cand.pcc);
    nxt.push_back(vb);
    nxt[va] = vn;
    queue.emplace_back(va, vn);
    queue.emplace_back(vn, vb);
    area = a_new;
    out.trace.push_back(make_row(k, area, eps, cand, true));
  }

  std::vector<Point2> accepted;
  for (int v = start, n = 0; n < static_cast<int>(pts.size()); v = nxt[v], ++n)
    accepted.push_back(pts[static_cast<std::size_t>(v)]);
  out.polygon = hull_allow_degenerate(accepted);
  return out;
}

// ---------------------------------------------------------------------------
// Monte Carlo

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

double uniform53(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

}  // namespace

RegionResult monte_carlo_run(const Network& net, const AlgorithmConfig& cfg) {
  validate_config(cfg);
  const Topology topo = analyze(net);
  (void)topo;
  RegionResult out;

  // One portable stream per generator variable: the engine for generator g,
  // component c (0 = p, 1 = q) is mt19937_64 seeded with
  // splitmix64(splitmix64(seed) + 2*g + c); sample i uses the i-th draw.
  const std::size_t ng = net.generators.size();
  std::vector<std::mt19937_64> stream(2 * ng);
  const std::uint64_t base = splitmix64(cfg.seed);
  for (std::size_t i = 0; i < stream.size(); ++i)
    stream[i].seed(splitmix64(base + static_cast<std::uint64_t>(i)));

  std::vector<Point2> accepted;
  double prev_area = 0.0;
  for (int sample = 0; sample < cfg.k; ++sample) {
    std::vector<std::pair<double, double>> setpoints(ng);
    for (std::size_t g = 0; g < ng; ++g) {
      const Generator& gen = net.generators[g];
      setpoints[g].first = gen.p_min + uniform53(stream[2 * g]) * (gen.p_max - gen.p_min);
      setpoints[g].second = gen.q_min + uniform53(stream[2 * g + 1]) * (gen.q_max - gen.q_min);
    }
    SweepResult state = sweep_power_flow(net, setpoints);
    if (!state.converged || !sweep_within_limits(net, state)) continue;

    accepted.push_back(state.pcc);
    const double a_new = hull_area_of(accepted);
    TraceRow row;
    row.k = static_cast<int>(accepted.size());
    row.area = a_new;
    row.eps = area_increase(prev_area, a_new);
    row.point = state.pcc;
    row.accepted = true;
    for (const auto& [p, q] : setpoints) {
      row.gen_p.push_back(p);
      row.gen_q.push_back(q);
    }
    out.trace.push_back(std::move(row));
    prev_area = a_new;
  }
  if (accepted.empty())
    throw EmptyRegionError("monte carlo: every sample was infeasible or non-convergent");
  out.polygon = hull_allow_degenerate(accepted);
  return out;
}

// ---------------------------------------------------------------------------
// Epsilon-constrained

RegionResult epsilon_constrained_run(const Network& net, const AlgorithmConfig& cfg) {
  validate_config(cfg);
  const DirectionalModel model(net, cfg.formulation, cfg.ccp);
  RegionResult out;

  DirectionalResult lo = model.solve(DirectionObjective(1.0, 0.0));
  note_solves(out, lo);
  DirectionalResult hi = model.solve(DirectionObjective(-1.0, 0.0));
  note_solves(out, hi);
  if (lo.solution.status == SolveStatus::Infeasible || hi.solution.status == SolveStatus::Infeasible)
    throw EmptyRegionError("epsilon-constrained: p1 range problems infeasible");
  if (!usable(lo) || !usable(hi))
    throw RegionError("epsilon-constrained: p1 range solves failed");
  const double p_lo = lo.pcc.p;
  const double p_hi = hi.pcc.p;

  std::vector<Point2> points;
  double prev_area = 0.0;
  auto record = [&](const DirectionalResult& r) {
    points.push_back(r.pcc);
    const double a_new = hull_area_of(points);
    out.trace.push_back(make_row(static_cast<int>(points.size()), a_new,
                                 area_increase(prev_area, a_new), r, true));
    prev_area = a_new;
  };
  record(lo);
  record(hi);

  // ceil(k/4) equidistant abscissae on the negative and the positive part of
  // the achievable range; shared endpoints (0 and the range ends) once.
  const int m = (cfg.k + 3) / 4;
  auto linspace = [](double a, double b, int count) {
    std::vector<double> v;
    if (count == 1) {
      v.push_back((a + b) / 2.0);
      return v;
    }
    for (int i = 0; i < count; ++i) v.push_back(a + (b - a) * i / (count - 1));
    return v;
  };
  std::vector<double> abscissae;
  if (p_lo < 0.0)
    for (double v : linspace(p_lo, std::min(0.0, p_hi), m)) abscissae.push_back(v);
  if (p_hi > 0.0)
    for (double v : linspace(std::max(0.0, p_lo), p_hi, m)) abscissae.push_back(v);
  std::sort(abscissae.begin(), abscissae.end());
  abscissae.erase(std::unique(abscissae.begin(), abscissae.end(),
                              [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
                  abscissae.end());

  for (double v : abscissae) {
    Pin pin{Pin::Coord::P, v, 0.0};
    DirectionalResult qmin = model.solve(DirectionObjective(0.0, 1.0), pin);
    note_solves(out, qmin);
    if (!usable(qmin)) continue;   // abscissa skipped
    DirectionalResult qmax = model.solve(DirectionObjective(0.0, -1.0), pin);
    note_solves(out, qmax);
    record(qmin);
    if (usable(qmax)) record(qmax);
  }

  out.polygon = hull_allow_degenerate(points);
  return out;
}

// ---------------------------------------------------------------------------
// Radial reconstruction

RegionResult radial_reconstruction_run(const Network& net, const AlgorithmConfig& cfg) {
  validate_config(cfg);
  const DirectionalModel model(net, cfg.formulation, cfg.ccp);
  RegionResult out;

  std::vector<Point2> points;
  double prev_area = 0.0;
  for (int i = 0; i < cfg.k; ++i) {
    const double theta = 2.0 * M_PI * i / cfg.k;
    DirectionalResult r = model.solve(DirectionObjective(-std::cos(theta), -std::sin(theta)));
    note_solves(out, r);
    if (!usable(r)) continue;   // direction skipped
    points.push_back(r.pcc);
    const double a_new = hull_area_of(points);
    out.trace.push_back(make_row(static_cast<int>(points.size()), a_new,
                                 area_increase(prev_area, a_new), r, true));
    prev_area = a_new;
  }
  if (points.empty()) throw EmptyRegionError("radial reconstruction: every direction failed");
  out.polygon = hull_allow_degenerate(points);
  return out;
}

RegionResult run_region(const Network& net, const AlgorithmConfig& cfg) {
  switch (cfg.method) {
    case Method::QF: return quickflex_run(net, cfg);
    case Method::MC: return monte_carlo_run(net, cfg);
    case Method::EC: return epsilon_constrained_run(net, cfg);
    case Method::RR: return radial_reconstruction_run(net, cfg);
  }
  throw std::invalid_argument("unknown method");
}

double recovered_fraction(const RegionResult& candidate, const RegionResult& reference) {
  if (reference.polygon.vertices.size() < 3)
    throw RegionError("recovered_fraction: degenerate reference region");
  const double ref = shoelace_area(reference.polygon);
  if (ref <= 0.0) throw RegionError("recovered_fraction: degenerate reference region");
  return candidate.area() / ref;
}

}  // namespace quickflex
