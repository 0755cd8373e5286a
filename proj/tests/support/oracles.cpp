#include "support/oracles.hpp"

#include <cmath>

namespace quickflex::testing {

Network make_twobus() {
  Network net;
  net.base_mva = 1.0;
  net.buses = {{1, 0.9, 1.1, true}, {2, 0.9, 1.1, false}};
  net.branches = {{1, 2, 0.01, 0.03, 2.0}};
  net.loads = {{2, 0.5, 0.2}};
  net.generators = {{2, 0.0, 1.0, -0.5, 0.5, 10.0, 0.0}};
  return net;
}

std::string data_file(const std::string& name) { return std::string(QF_DATA_DIR "/") + name; }

TwoBusState twobus_closed_form(double r, double x, double p0, double q0) {
  const double a = r * r + x * x;
  const double b = 2.0 * p0 * r + 2.0 * q0 * x - 1.0;
  const double c = p0 * p0 + q0 * q0;
  const double disc = b * b - 4.0 * a * c;
  const double l = (-b - std::sqrt(disc)) / (2.0 * a);
  TwoBusState s;
  s.l = l;
  s.send_p = p0 + r * l;
  s.send_q = q0 + x * l;
  s.w2 = 1.0 - 2.0 * (r * s.send_p + x * s.send_q) + a * l;
  return s;
}

double distflow_residual(const Network& net, const SweepResult& state,
                         const std::vector<std::pair<double, double>>& gen_setpoints) {
  const Topology topo = analyze(net);
  const std::size_t nb = net.buses.size();
  double worst = 0.0;

  std::vector<double> inj_p(nb, 0.0), inj_q(nb, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    inj_p[b] = topo.load_p[b];
    inj_q[b] = topo.load_q[b];
  }
  for (std::size_t g = 0; g < net.generators.size(); ++g) {
    const auto b = static_cast<std::size_t>(topo.bus_index(net.generators[g].bus));
    inj_p[b] -= gen_setpoints[g].first;
    inj_q[b] -= gen_setpoints[g].second;
  }

  for (std::size_t b = 0; b < nb; ++b) {
    if (static_cast<int>(b) == topo.pcc) continue;
    const auto pe = static_cast<std::size_t>(topo.parent_branch[b]);
    const Branch& br = net.branches[pe];
    double bal_p = state.send_p[pe] - br.r * state.l_sq[pe] - inj_p[b];
    double bal_q = state.send_q[pe] - br.x * state.l_sq[pe] - inj_q[b];
    for (int c : topo.child_branches[b]) {
      bal_p -= state.send_p[static_cast<std::size_t>(c)];
      bal_q -= state.send_q[static_cast<std::size_t>(c)];
    }
    worst = std::max({worst, std::abs(bal_p), std::abs(bal_q)});
  }

  for (std::size_t e = 0; e < net.branches.size(); ++e) {
    const Branch& br = net.branches[e];
    const auto i = static_cast<std::size_t>(topo.bus_index(br.from));
    const auto j = static_cast<std::size_t>(topo.bus_index(br.to));
    const double drop = state.w[i] - state.w[j] -
                        (2.0 * (br.r * state.send_p[e] + br.x * state.send_q[e]) -
                         (br.r * br.r + br.x * br.x) * state.l_sq[e]);
    const double cone = state.send_p[e] * state.send_p[e] + state.send_q[e] * state.send_q[e] -
                        state.w[i] * state.l_sq[e];
    worst = std::max({worst, std::abs(drop), std::abs(cone)});
  }
  worst = std::max(worst, std::abs(state.w[static_cast<std::size_t>(topo.pcc)] - 1.0));
  return worst;
}

}  // namespace quickflex::testing
