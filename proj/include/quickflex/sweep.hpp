#pragma once

#include <utility>
#include <vector>

#include "quickflex/geometry.hpp"
#include "quickflex/grid.hpp"

namespace quickflex {

struct SweepOptions {
  double tol = 1e-10;   // max |delta w| between outer iterations
  int max_iter = 200;
};

struct SweepResult {
  bool converged = false;
  int iterations = 0;
  std::vector<double> w;                  // squared voltage per bus index
  std::vector<double> send_p, send_q;     // sending-end flow per branch
  std::vector<double> l_sq;               // squared current per branch
  Point2 pcc;                             // exchange drawn from the grid
};

// Backward/forward sweep power flow for a radial network with generator
// setpoints fixed (one (p,q) pair per generator, in generator order).
// Backward pass accumulates receiving-end flows from the leaves with loss
// terms r*(p^2+q^2)/w and x*(p^2+q^2)/w; forward pass updates w from the PCC
// (w = 1). Iterates until max |delta w| <= tol.
SweepResult sweep_power_flow(const Network& net,
                             const std::vector<std::pair<double, double>>& gen_setpoints,
                             const SweepOptions& opts = {});

// Feasibility of a converged state against the network operating limits
// (voltage boxes in w-space, sending-end thermal limits).
bool sweep_within_limits(const Network& net, const SweepResult& state, double tol = 1e-9);

}  // namespace quickflex
