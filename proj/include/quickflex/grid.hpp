#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace quickflex {

// Balanced radial distribution network in per-unit on base_mva.
// Immutable after construction/validation; safe to share across threads.

struct Bus {
  int id = 0;
  double v_min = 0.9;   // pu voltage magnitude
  double v_max = 1.1;
  bool is_pcc = false;
};

struct Branch {
  int from = 0;   // parent bus id (closer to the PCC once oriented)
  int to = 0;     // child bus id
  double r = 0.0;       // pu resistance
  double x = 0.0;       // pu reactance
  double s_max = 0.0;   // pu apparent-power limit
};

struct Generator {
  int bus = 0;
  double p_min = 0.0, p_max = 0.0;   // pu active power box
  double q_min = 0.0, q_max = 0.0;   // pu reactive power box
  double c1 = 0.0, c0 = 0.0;         // linear cost coefficients
};

struct Load {
  int bus = 0;
  double p = 0.0;   // pu active demand
  double q = 0.0;   // pu reactive demand
};

struct Network {
  double base_mva = 1.0;
  std::vector<Bus> buses;
  std::vector<Branch> branches;
  std::vector<Generator> generators;
  std::vector<Load> loads;
};

struct ValidationReport {
  bool ok = true;
  std::vector<std::string> violations;
};

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structural checks: exactly one PCC, tree topology rooted at it, parent
// orientation, resolvable ids, sane limits. Downstream modules require ok.
ValidationReport validate(const Network& net);

struct ChildEdge {
  int branch_index;
  int child_bus;   // bus id
};

// Child adjacency of `bus` in ascending child-id order. Throws GridError on
// an unknown bus id. Expects a validated (parent-oriented) network.
std::vector<ChildEdge> children(const Network& net, int bus);

// Flips branches entered child->parent so that `from` is always the parent.
// Leaves the network untouched where the tree structure is broken (validate
// reports those cases). Returns true if the PCC-rooted sweep reached every
// branch.
bool orient_from_pcc(Network& net);

// Derived index structure used by the formulations and the power-flow sweep.
// Valid only for a network that passed validate().
struct Topology {
  int pcc = -1;                           // bus index of the PCC
  std::vector<int> bus_index_of_id;       // dense lookup built over ids
  std::vector<int> parent_branch;         // per bus index, -1 at the PCC
  std::vector<std::vector<int>> child_branches;  // per bus index
  std::vector<int> bfs_bus_order;         // root first
  std::vector<int> bfs_branch_order;      // parent-before-child branches
  std::vector<double> load_p, load_q;     // aggregated per bus index
  std::vector<std::vector<int>> gens_at;  // generator indices per bus index

  int bus_index(int id) const;
};

Topology analyze(const Network& net);

}  // namespace quickflex
