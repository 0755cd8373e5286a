#include "quickflex/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

namespace quickflex {

namespace {

bool finite(double v) { return std::isfinite(v); }

std::map<int, int> id_map(const Network& net) {
  std::map<int, int> m;
  for (std::size_t i = 0; i < net.buses.size(); ++i) m.emplace(net.buses[i].id, static_cast<int>(i));
  return m;
}

}  // namespace

ValidationReport validate(const Network& net) {
  ValidationReport rep;
  auto flag = [&rep](const std::string& msg) {
    rep.ok = false;
    rep.violations.push_back(msg);
  };

  if (net.buses.empty()) {
    flag("network has no buses");
    return rep;
  }
  if (!finite(net.base_mva) || net.base_mva <= 0.0) flag("base_mva must be positive");

  std::map<int, int> ids;
  int pcc_count = 0;
  int pcc_id = -1;
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    const Bus& b = net.buses[i];
    if (b.id < 0) flag("bus " + std::to_string(b.id) + ": id must be >= 0");
    if (!ids.emplace(b.id, static_cast<int>(i)).second)
      flag("bus " + std::to_string(b.id) + ": duplicate id");
    if (!finite(b.v_min) || !finite(b.v_max) || b.v_min <= 0.0 || b.v_min > b.v_max)
      flag("bus " + std::to_string(b.id) + ": bad limits (require 0 < v_min <= v_max)");
    if (b.is_pcc) {
      ++pcc_count;
      pcc_id = b.id;
      if (b.v_min > 1.0 || b.v_max < 1.0)
        flag("bus " + std::to_string(b.id) + ": bad limits (PCC voltage box must contain 1.0)");
    }
  }
  if (pcc_count == 0) flag("no PCC designated");
  if (pcc_count > 1) flag("multiple PCC buses");

  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    const Branch& br = net.branches[i];
    std::string tag = "branch " + std::to_string(i) + " (" + std::to_string(br.from) + "-" +
                      std::to_string(br.to) + ")";
    if (!ids.count(br.from)) flag(tag + ": unknown from bus");
    if (!ids.count(br.to)) flag(tag + ": unknown to bus");
    if (br.from == br.to) flag(tag + ": from == to");
    if (!finite(br.r) || !finite(br.x) || br.r < 0.0 || br.x < 0.0)
      flag(tag + ": bad limits (r, x must be >= 0)");
    if (br.r == 0.0 && br.x == 0.0) flag(tag + ": bad limits (r and x both zero)");
    if (!finite(br.s_max) || br.s_max <= 0.0) flag(tag + ": bad limits (s_max must be > 0)");
  }
  for (std::size_t i = 0; i < net.generators.size(); ++i) {
    const Generator& g = net.generators[i];
    std::string tag = "generator " + std::to_string(i);
    if (!ids.count(g.bus)) flag(tag + ": unknown bus");
    if (!finite(g.p_min) || !finite(g.p_max) || g.p_min > g.p_max)
      flag(tag + ": bad limits (p_min <= p_max required)");
    if (!finite(g.q_min) || !finite(g.q_max) || g.q_min > g.q_max)
      flag(tag + ": bad limits (q_min <= q_max required)");
  }
  for (std::size_t i = 0; i < net.loads.size(); ++i) {
    const Load& l = net.loads[i];
    if (!ids.count(l.bus)) flag("load " + std::to_string(i) + ": unknown bus");
    if (!finite(l.p) || !finite(l.q)) flag("load " + std::to_string(i) + ": non-finite demand");
  }
  if (!rep.ok) return rep;

  // Tree structure: union-find over undirected edges catches cycles, then a
  // sweep from the PCC catches disconnection and orientation.
  std::vector<int> parent(net.buses.size());
  for (std::size_t i = 0; i < parent.size(); ++i) parent[i] = static_cast<int>(i);
  auto find = [&parent](int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    int a = find(ids[net.branches[i].from]);
    int b = find(ids[net.branches[i].to]);
    if (a == b) {
      flag("branch " + std::to_string(i) + ": cycle");
      return rep;
    }
    parent[a] = b;
  }

  std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());   // (other bus idx, branch idx)
  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    int a = ids[net.branches[i].from];
    int b = ids[net.branches[i].to];
    adj[a].emplace_back(b, static_cast<int>(i));
    adj[b].emplace_back(a, static_cast<int>(i));
  }
  std::vector<int> depth(net.buses.size(), -1);
  std::deque<int> queue;
  int root = ids[pcc_id];
  depth[root] = 0;
  queue.push_back(root);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (auto [v, e] : adj[u]) {
      if (depth[v] < 0) {
        depth[v] = depth[u] + 1;
        queue.push_back(v);
      }
    }
  }
  for (std::size_t i = 0; i < net.buses.size(); ++i)
    if (depth[i] < 0) flag("bus " + std::to_string(net.buses[i].id) + ": disconnected from the PCC");
  if (!rep.ok) return rep;

  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    const Branch& br = net.branches[i];
    if (depth[ids[br.from]] != depth[ids[br.to]] - 1)
      flag("branch " + std::to_string(i) + " (" + std::to_string(br.from) + "-" +
           std::to_string(br.to) + "): from must be the parent (closer to the PCC)");
  }
  return rep;
}

bool orient_from_pcc(Network& net) {
  std::map<int, int> ids = id_map(net);
  int root = -1;
  for (const Bus& b : net.buses)
    if (b.is_pcc) {
      if (root >= 0) return false;
      root = ids[b.id];
    }
  if (root < 0) return false;

  std::vector<std::vector<std::pair<int, int>>> adj(net.buses.size());
  for (std::size_t i = 0; i < net.branches.size(); ++i) {
    auto a = ids.find(net.branches[i].from);
    auto b = ids.find(net.branches[i].to);
    if (a == ids.end() || b == ids.end()) return false;
    adj[a->second].emplace_back(b->second, static_cast<int>(i));
    adj[b->second].emplace_back(a->second, static_cast<int>(i));
  }
  std::vector<char> seen_bus(net.buses.size(), 0);
  std::vector<char> seen_branch(net.branches.size(), 0);
  std::deque<int> queue{root};
  seen_bus[root] = 1;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (auto [v, e] : adj[u]) {
      if (seen_branch[e]) continue;
      seen_branch[e] = 1;
      if (seen_bus[v]) continue;
      seen_bus[v] = 1;
      Branch& br = net.branches[e];
      if (ids[br.from] != u) std::swap(br.from, br.to);
      queue.push_back(v);
    }
  }
  return std::all_of(seen_branch.begin(), seen_branch.end(), [](char c) { return c != 0; }) &&
         std::all_of(seen_bus.begin(), seen_bus.end(), [](char c) { return c != 0; });
}

std::vector<ChildEdge> children(const Network& net, int bus) {
  bool known = false;
  for (const Bus& b : net.buses)
    if (b.id == bus) known = true;
  if (!known) throw GridError("children: unknown bus id " + std::to_string(bus));

  std::vector<ChildEdge> out;
  for (std::size_t i = 0; i < net.branches.size(); ++i)
    if (net.branches[i].from == bus) out.push_back({static_cast<int>(i), net.branches[i].to});
  std::sort(out.begin(), out.end(),
            [](const ChildEdge& a, const ChildEdge& b) { return a.child_bus < b.child_bus; });
  return out;
}

int Topology::bus_index(int id) const {
  if (id < 0 || id >= static_cast<int>(bus_index_of_id.size()) || bus_index_of_id[id] < 0)
    throw GridError("Topology: unknown bus id " + std::to_string(id));
  return bus_index_of_id[id];
}

Topology analyze(const Network& net) {
  ValidationReport rep = validate(net);
  if (!rep.ok) {
    std::ostringstream oss;
    oss << "analyze: invalid network:";
    for (const auto& v : rep.violations) oss << " [" << v << "]";
    throw GridError(oss.str());
  }

  Topology t;
  int max_id = 0;
  for (const Bus& b : net.buses) max_id = std::max(max_id, b.id);
  t.bus_index_of_id.assign(static_cast<std::size_t>(max_id) + 1, -1);
  for (std::size_t i = 0; i < net.buses.size(); ++i) {
    t.bus_index_of_id[net.buses[i].id] = static_cast<int>(i);
    if (net.buses[i].is_pcc) t.pcc = static_cast<int>(i);
  }

  const std::size_t nb = net.buses.size();
  t.parent_branch.assign(nb, -1);
  t.child_branches.assign(nb, {});
  t.load_p.assign(nb, 0.0);
  t.load_q.assign(nb, 0.0);
  t.gens_at.assign(nb, {});

  for (std::size_t e = 0; e < net.branches.size(); ++e) {
    int ci = t.bus_index(net.branches[e].to);
    t.parent_branch[ci] = static_cast<int>(e);
    t.child_branches[t.bus_index(net.branches[e].from)].push_back(static_cast<int>(e));
  }
  for (auto& lst : t.child_branches)
    std::sort(lst.begin(), lst.end(), [&net](int a, int b) { return net.branches[a].to < net.branches[b].to; });

  for (const Load& l : net.loads) {
    t.load_p[t.bus_index(l.bus)] += l.p;
    t.load_q[t.bus_index(l.bus)] += l.q;
  }
  for (std::size_t g = 0; g < net.generators.size(); ++g)
    t.gens_at[t.bus_index(net.generators[g].bus)].push_back(static_cast<int>(g));

  t.bfs_bus_order.reserve(nb);
  t.bfs_branch_order.reserve(net.branches.size());
  std::deque<int> queue{t.pcc};
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    t.bfs_bus_order.push_back(u);
    for (int e : t.child_branches[u]) {
      t.bfs_branch_order.push_back(e);
      queue.push_back(t.bus_index(net.branches[e].to));
    }
  }
  return t;
}

}  // namespace quickflex
