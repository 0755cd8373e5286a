#include "quickflex/sweep.hpp"

#include <cmath>
#include <stdexcept>

namespace quickflex {

SweepResult sweep_power_flow(const Network& net,
                             const std::vector<std::pair<double, double>>& gen_setpoints,
                             const SweepOptions& opts) {
  if (gen_setpoints.size() != net.generators.size())
    throw GridError("sweep_power_flow: one setpoint per generator required");
  const Topology topo = analyze(net);
  const std::size_t nb = net.buses.size();
  const std::size_t ne = net.branches.size();

  // Net injection withdrawn at each bus (load minus fixed generation).
  std::vector<double> inj_p(nb, 0.0), inj_q(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    inj_p[b] = topo.load_p[b];
    inj_q[b] = topo.load_q[b];
  }
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const int b = topo.bus_index(net.generators[g].bus);
    inj_p[static_cast<std::size_t>(b)] -= gen_setpoints[g].first;
    inj_q[static_cast<std::size_t>(b)] -= gen_setpoints[g].second;
  }

  SweepResult res;
  res.w.assign(nb, 1.0);
  res.send_p.assign(ne, 0.0);
  res.send_q.assign(ne, 0.0);
  res.l_sq.assign(ne, 0.0);

  for (int it = 1; it <= opts.max_iter; ++it) {
    // Backward: receiving-end accumulation from the leaves, loss terms
    // r*(p^2+q^2)/w and x*(p^2+q^2)/w at the child-side voltage.
    for (auto eit = topo.bfs_branch_order.rbegin(); eit != topo.bfs_branch_order.rend(); ++eit) {
      const int e = *eit;
      const Branch& br = net.branches[static_cast<std::size_t>(e)];
      const int j = topo.bus_index(br.to);
      double recv_p = inj_p[static_cast<std::size_t>(j)];
      double recv_q = inj_q[static_cast<std::size_t>(j)];
      for (int c : topo.child_branches[static_cast<std::size_t>(j)]) {
        recv_p += res.send_p[static_cast<std::size_t>(c)];
        recv_q += res.send_q[static_cast<std::size_t>(c)];
      }
      const double wj = res.w[static_cast<std::size_t>(j)];
      if (!(wj > 1e-6)) return res;   // collapsed voltage, treat as divergence
      const double l = (recv_p * recv_p + recv_q * recv_q) / wj;
      res.l_sq[static_cast<std::size_t>(e)] = l;
      res.send_p[static_cast<std::size_t>(e)] = recv_p + br.r * l;
      res.send_q[static_cast<std::size_t>(e)] = recv_q + br.x * l;
    }

    // Forward: update w from the PCC reference down the tree.
    double dw = 0.0;
    for (int e : topo.bfs_branch_order) {
      const Branch& br = net.branches[static_cast<std::size_t>(e)];
      const int i = topo.bus_index(br.from);
      const int j = topo.bus_index(br.to);
      const double wnew = res.w[static_cast<std::size_t>(i)] -
                          2.0 * (br.r * res.send_p[static_cast<std::size_t>(e)] +
                                 br.x * res.send_q[static_cast<std::size_t>(e)]) +
                          (br.r * br.r + br.x * br.x) * res.l_sq[static_cast<std::size_t>(e)];
      dw = std::max(dw, std::abs(wnew - res.w[static_cast<std::size_t>(j)]));
      res.w[static_cast<std::size_t>(j)] = wnew;
    }

    res.iterations = it;
    if (dw <= opts.tol) {
      res.converged = true;
      break;
    }
  }

  double p1 = inj_p[static_cast<std::size_t>(topo.pcc)];
  double q1 = inj_q[static_cast<std::size_t>(topo.pcc)];
  for (int c : topo.child_branches[static_cast<std::size_t>(topo.pcc)]) {
    p1 += res.send_p[static_cast<std::size_t>(c)];
    q1 += res.send_q[static_cast<std::size_t>(c)];
  }
  res.pcc = Point2{p1, q1};
  return res;
}

bool sweep_within_limits(const Network& net, const SweepResult& state, double tol) {
  if (!state.converged) return false;
  for (std::size_t b = 0; b < net.buses.size(); ++b) {
    const double lo = net.buses[b].v_min * net.buses[b].v_min;
    const double hi = net.buses[b].v_max * net.buses[b].v_max;
    if (state.w[b] < lo - tol || state.w[b] > hi + tol) return false;
  }
  for (std::size_t e = 0; e < net.branches.size(); ++e) {
    const double smax = net.branches[e].s_max;
    if (std::hypot(state.send_p[e], state.send_q[e]) > smax + tol) return false;
  }
  return true;
}

}  // namespace quickflex
