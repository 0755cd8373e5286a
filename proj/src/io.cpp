#include "quickflex/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace quickflex {

namespace {

using nlohmann::json;

struct Diag {
  std::vector<std::string> messages;
  void add(const std::string& path, const std::string& what) {
    messages.push_back(path + ": " + what);
  }
  bool ok() const { return messages.empty(); }
  std::string joined(const std::string& head) const {
    std::ostringstream oss;
    oss << head;
    for (const auto& m : messages) oss << "\n  " << m;
    return oss.str();
  }
};

double get_num(const json& j, const std::string& path, const char* key, Diag& d) {
  if (!j.contains(key)) {
    d.add(path + "/" + key, "missing required number");
    return 0.0;
  }
  if (!j[key].is_number()) {
    d.add(path + "/" + key, "expected a number");
    return 0.0;
  }
  return j[key].get<double>();
}

double get_num_or(const json& j, const std::string& path, const char* key, double fallback, Diag& d) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    d.add(path + "/" + key, "expected a number");
    return fallback;
  }
  return j[key].get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, Diag& d) {
  if (!j.contains(key)) {
    d.add(path + "/" + key, "missing required integer");
    return 0;
  }
  if (!j[key].is_number_integer()) {
    d.add(path + "/" + key, "expected an integer");
    return 0;
  }
  return j[key].get<int>();
}

}  // namespace

Network parse_network_json(const json& doc) {
  Diag d;
  if (!doc.is_object()) throw ParseError("/: network document must be a JSON object");

  Network net;
  net.base_mva = get_num(doc, "", "base_mva", d);

  if (!doc.contains("buses") || !doc["buses"].is_array()) {
    d.add("/buses", "missing required array");
  } else {
    int idx = 0;
    for (const auto& jb : doc["buses"]) {
      const std::string path = "/buses/" + std::to_string(idx++);
      Bus b;
      b.id = get_int(jb, path, "id", d);
      b.v_min = get_num(jb, path, "vmin", d);
      b.v_max = get_num(jb, path, "vmax", d);
      if (jb.contains("is_pcc")) {
        if (!jb["is_pcc"].is_boolean())
          d.add(path + "/is_pcc", "expected a boolean");
        else
          b.is_pcc = jb["is_pcc"].get<bool>();
      }
      net.buses.push_back(b);
    }
  }
  if (!doc.contains("branches") || !doc["branches"].is_array()) {
    d.add("/branches", "missing required array");
  } else {
    int idx = 0;
    for (const auto& jb : doc["branches"]) {
      const std::string path = "/branches/" + std::to_string(idx++);
      Branch br;
      br.from = get_int(jb, path, "from", d);
      br.to = get_int(jb, path, "to", d);
      br.r = get_num(jb, path, "r", d);
      br.x = get_num(jb, path, "x", d);
      br.s_max = get_num(jb, path, "s_max", d);
      net.branches.push_back(br);
    }
  }
  if (doc.contains("loads")) {
    if (!doc["loads"].is_array()) d.add("/loads", "expected an array");
    int idx = 0;
    for (const auto& jl : doc.value("loads", json::array())) {
      const std::string path = "/loads/" + std::to_string(idx++);
      Load l;
      l.bus = get_int(jl, path, "bus", d);
      l.p = get_num(jl, path, "p", d);
      l.q = get_num(jl, path, "q", d);
      net.loads.push_back(l);
    }
  }
  if (doc.contains("generators")) {
    if (!doc["generators"].is_array()) d.add("/generators", "expected an array");
    int idx = 0;
    for (const auto& jg : doc.value("generators", json::array())) {
      const std::string path = "/generators/" + std::to_string(idx++);
      Generator g;
      g.bus = get_int(jg, path, "bus", d);
      g.p_min = get_num(jg, path, "pmin", d);
      g.p_max = get_num(jg, path, "pmax", d);
      g.q_min = get_num(jg, path, "qmin", d);
      g.q_max = get_num(jg, path, "qmax", d);
      g.c1 = get_num_or(jg, path, "c1", 0.0, d);
      g.c0 = get_num_or(jg, path, "c0", 0.0, d);
      net.generators.push_back(g);
    }
  }
  if (!d.ok()) throw ParseError(d.joined("network file is malformed:"));

  orient_from_pcc(net);   // child->parent entries are flipped; validate reports the rest
  ValidationReport rep = validate(net);
  if (!rep.ok) {
    Diag vd;
    for (const auto& v : rep.violations) vd.messages.push_back(v);
    throw ParseError(vd.joined("network failed validation:"));
  }
  return net;
}

Network parse_network(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open network file: " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw ParseError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return parse_network_json(doc);
}

json network_to_json(const Network& net) {
  json doc;
  doc["base_mva"] = net.base_mva;
  doc["buses"] = json::array();
  for (const Bus& b : net.buses) {
    json jb{{"id", b.id}, {"vmin", b.v_min}, {"vmax", b.v_max}};
    if (b.is_pcc) jb["is_pcc"] = true;
    doc["buses"].push_back(jb);
  }
  doc["branches"] = json::array();
  for (const Branch& br : net.branches)
    doc["branches"].push_back(
        {{"from", br.from}, {"to", br.to}, {"r", br.r}, {"x", br.x}, {"s_max", br.s_max}});
  doc["loads"] = json::array();
  for (const Load& l : net.loads)
    doc["loads"].push_back({{"bus", l.bus}, {"p", l.p}, {"q", l.q}});
  doc["generators"] = json::array();
  for (const Generator& g : net.generators)
    doc["generators"].push_back({{"bus", g.bus},
                                 {"pmin", g.p_min},
                                 {"pmax", g.p_max},
                                 {"qmin", g.q_min},
                                 {"qmax", g.q_max},
                                 {"c1", g.c1},
                                 {"c0", g.c0}});
  return doc;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v == 0.0 ? 0.0 : v);   // normalize -0
  return buf;
}

void write_region_csv(const std::filesystem::path& path, const Polygon& poly) {
  std::ofstream out(path);
  out << "p,q\n";
  for (const Point2& v : poly.vertices)
    out << format_double(v.p) << "," << format_double(v.q) << "\n";
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<TraceRow>& trace) {
  std::ofstream out(path);
  out << "k,area,eps_k,p,q\n";
  for (const TraceRow& row : trace)
    out << row.k << "," << format_double(row.area) << "," << format_double(row.eps) << ","
        << format_double(row.point.p) << "," << format_double(row.point.q) << "\n";
}

namespace {

void metrics_body(std::ostream& out, const Metrics& m, const char* indent) {
  out << indent << "\"method\": \"" << m.method << "\",\n";
  out << indent << "\"formulation\": \"" << m.formulation << "\",\n";
  out << indent << "\"k\": " << m.k << ",\n";
  out << indent << "\"area\": " << format_double(m.area) << ",\n";
  out << indent << "\"eps_final\": " << format_double(m.eps_final) << ",\n";
  out << indent << "\"solve_count\": " << m.solve_count;
  if (m.recovered_fraction) {
    out << ",\n" << indent << "\"recovered_fraction\": " << format_double(*m.recovered_fraction);
  }
  out << "\n";
}

}  // namespace

void write_metrics_json(const std::filesystem::path& path, const Metrics& m) {
  std::ofstream out(path);
  out << "{\n";
  metrics_body(out, m, "  ");
  out << "}\n";
}

void write_compare_metrics_json(const std::filesystem::path& path, const std::vector<Metrics>& rows) {
  std::ofstream out(path);
  out << "{\n  \"reference\": \"qf\",\n  \"methods\": [\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << "    {\n";
    metrics_body(out, rows[i], "      ");
    out << "    }" << (i + 1 < rows.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
}

// ---------------------------------------------------------------------------
// CLI

namespace {

FormulationKind parse_formulation(const std::string& s) {
  if (s == "distflow") return FormulationKind::DistFlowExact;
  if (s == "soc") return FormulationKind::SocDistFlow;
  if (s == "lindistflow") return FormulationKind::LinDistFlow;
  throw std::invalid_argument("unknown formulation: " + s);
}

Method parse_method(const std::string& s) {
  if (s == "qf") return Method::QF;
  if (s == "mc") return Method::MC;
  if (s == "ec") return Method::EC;
  if (s == "rr") return Method::RR;
  throw std::invalid_argument("unknown method: " + s);
}

Metrics metrics_of(const RegionResult& res, Method method, FormulationKind kind,
                   std::optional<double> fraction = {}) {
  Metrics m;
  m.method = to_string(method);
  m.formulation = to_string(kind);
  m.k = res.points();
  m.area = res.area();
  m.eps_final = res.final_eps();
  m.solve_count = res.solve_count;
  m.recovered_fraction = fraction;
  return m;
}

void emit_run_output(const std::filesystem::path& dir, const std::string& prefix,
                     const RegionResult& res, Method method, FormulationKind kind,
                     std::optional<double> fraction = {}) {
  write_region_csv(dir / (prefix + "region.csv"), res.polygon);
  write_trace_csv(dir / (prefix + "trace.csv"), res.trace);
  write_metrics_json(dir / (prefix + "metrics.json"), metrics_of(res, method, kind, fraction));
}

int do_run(const std::string& network_path, const std::string& method_s,
           const std::string& formulation_s, double epsilon, int k, std::uint64_t seed,
           const std::string& out_dir) {
  const Network net = parse_network(network_path);
  AlgorithmConfig cfg;
  cfg.method = parse_method(method_s);
  cfg.formulation = parse_formulation(formulation_s);
  cfg.epsilon = epsilon;
  cfg.k = k;
  cfg.seed = seed;
  if (cfg.method != Method::QF && k <= 0)
    throw std::invalid_argument("--k is required for the mc, ec, and rr methods");

  const RegionResult res = run_region(net, cfg);
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  emit_run_output(dir, "", res, cfg.method, cfg.formulation);
  emit_svg({{to_string(cfg.method), res.polygon}}, dir / "region.svg");
  std::cout << "method=" << to_string(cfg.method) << " formulation=" << to_string(cfg.formulation)
            << " k=" << res.points() << " area=" << format_double(res.area())
            << " solves=" << res.solve_count << "\n";
  return 0;
}

int do_compare(const std::string& network_path, double epsilon, const std::string& out_dir) {
  const Network net = parse_network(network_path);
  const FormulationKind kind = FormulationKind::DistFlowExact;

  AlgorithmConfig qf_cfg;
  qf_cfg.method = Method::QF;
  qf_cfg.formulation = kind;
  qf_cfg.epsilon = epsilon;
  const RegionResult qf = quickflex_run(net, qf_cfg);
  const int budget = qf.points();

  AlgorithmConfig base_cfg = qf_cfg;
  base_cfg.k = std::max(budget, 4);
  base_cfg.seed = 0;

  base_cfg.method = Method::MC;
  const RegionResult mc = monte_carlo_run(net, base_cfg);
  base_cfg.method = Method::EC;
  const RegionResult ec = epsilon_constrained_run(net, base_cfg);
  base_cfg.method = Method::RR;
  const RegionResult rr = radial_reconstruction_run(net, base_cfg);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  emit_run_output(dir, "", qf, Method::QF, kind, recovered_fraction(qf, qf));
  emit_svg({{"qf", qf.polygon}}, dir / "region.svg");
  emit_run_output(dir, "mc_", mc, Method::MC, kind, recovered_fraction(mc, qf));
  emit_run_output(dir, "ec_", ec, Method::EC, kind, recovered_fraction(ec, qf));
  emit_run_output(dir, "rr_", rr, Method::RR, kind, recovered_fraction(rr, qf));

  write_compare_metrics_json(dir / "compare_metrics.json",
                             {metrics_of(qf, Method::QF, kind, recovered_fraction(qf, qf)),
                              metrics_of(mc, Method::MC, kind, recovered_fraction(mc, qf)),
                              metrics_of(ec, Method::EC, kind, recovered_fraction(ec, qf)),
                              metrics_of(rr, Method::RR, kind, recovered_fraction(rr, qf))});
  emit_svg({{"qf", qf.polygon}, {"mc", mc.polygon}, {"ec", ec.polygon}, {"rr", rr.polygon}},
           dir / "compare.svg");

  std::cout << "k=" << budget << " qf_area=" << format_double(qf.area())
            << " mc=" << format_double(recovered_fraction(mc, qf))
            << " ec=" << format_double(recovered_fraction(ec, qf))
            << " rr=" << format_double(recovered_fraction(rr, qf)) << "\n";
  return 0;
}

}  // namespace

int run_main(int argc, const char* const* argv) {
  CLI::App app{"Aggregated PQ flexibility regions of radial distribution grids at the PCC"};
  app.require_subcommand(1);

  std::string network_path, method_s = "qf", formulation_s = "lindistflow", out_dir;
  double epsilon = 1e-3;
  int k = 0;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "Construct one flexibility region");
  run->add_option("--network", network_path, "network JSON file")->required();
  run->add_option("--method", method_s, "qf|mc|ec|rr")->required();
  run->add_option("--formulation", formulation_s, "distflow|soc|lindistflow")->required();
  run->add_option("--epsilon", epsilon, "QF area tolerance (default 1e-3)");
  run->add_option("--k", k, "point budget for mc/ec/rr");
  run->add_option("--seed", seed, "RNG seed for mc (default 0)");
  run->add_option("--out", out_dir, "output directory")->required();

  std::string cmp_network, cmp_out;
  double cmp_epsilon = 1e-3;
  CLI::App* cmp = app.add_subcommand("compare", "QF vs MC/EC/RR at the QF point budget");
  cmp->add_option("--network", cmp_network, "network JSON file")->required();
  cmp->add_option("--epsilon", cmp_epsilon, "QF area tolerance (default 1e-3)");
  cmp->add_option("--out", cmp_out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return do_run(network_path, method_s, formulation_s, epsilon, k, seed, out_dir);
    if (cmp->parsed()) return do_compare(cmp_network, cmp_epsilon, cmp_out);
  } catch (const EmptyRegionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace quickflex
