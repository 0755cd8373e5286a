#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "quickflex/io.hpp"
#include "support/oracles.hpp"

using namespace quickflex;
using namespace quickflex::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() / ("quickflex_test_" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"quickflex"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_main(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("shipped two-bus fixture parses to the expected network") {
  Network net = parse_network(data_file("twobus.json"));
  CHECK(net.buses.size() == 2);
  CHECK(net.branches.size() == 1);
  CHECK(net.generators.size() == 1);
  CHECK(net.buses[0].is_pcc);
}

TEST_CASE("parse diagnostics carry JSON paths") {
  nlohmann::json doc = network_to_json(make_twobus());

  SUBCASE("no PCC designated") {
    doc["buses"][0].erase("is_pcc");
    CHECK_THROWS_WITH_AS(parse_network_json(doc),
                         doctest::Contains("no PCC designated"), ParseError);
  }
  SUBCASE("unknown bus id in a branch") {
    doc["branches"][0]["to"] = 99;
    try {
      parse_network_json(doc);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("99") != std::string::npos);
    }
  }
  SUBCASE("missing field is reported with its path") {
    doc["branches"][0].erase("r");
    try {
      parse_network_json(doc);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("/branches/0/r") != std::string::npos);
    }
  }
}

TEST_CASE("parse -> serialize -> parse round-trips") {
  Network a = parse_network(data_file("twobus.json"));
  Network b = parse_network_json(network_to_json(a));
  CHECK(a.base_mva == b.base_mva);
  REQUIRE(a.buses.size() == b.buses.size());
  REQUIRE(a.branches.size() == b.branches.size());
  for (std::size_t i = 0; i < a.buses.size(); ++i) {
    CHECK(a.buses[i].id == b.buses[i].id);
    CHECK(a.buses[i].v_min == b.buses[i].v_min);
    CHECK(a.buses[i].is_pcc == b.buses[i].is_pcc);
  }
  for (std::size_t i = 0; i < a.branches.size(); ++i) {
    CHECK(a.branches[i].r == b.branches[i].r);
    CHECK(a.branches[i].s_max == b.branches[i].s_max);
  }
}

TEST_CASE("child->parent branch entries are flipped on load") {
  nlohmann::json doc = network_to_json(make_twobus());
  std::swap(doc["branches"][0]["from"], doc["branches"][0]["to"]);
  Network net = parse_network_json(doc);
  CHECK(net.branches[0].from == 1);
  CHECK(net.branches[0].to == 2);
}

TEST_CASE("run subcommand emits a consistent output bundle") {
  fs::path dir = temp_dir("run");
  int rc = cli({"run", "--network", data_file("twobus.json"), "--method", "qf", "--formulation",
                "lindistflow", "--out", dir.string()});
  REQUIRE(rc == 0);

  // region.csv reproduces the metrics area through the shoelace formula.
  std::ifstream csv(dir / "region.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "p,q");
  Polygon poly;
  std::string line;
  while (std::getline(csv, line)) {
    const auto comma = line.find(',');
    poly.vertices.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
  }
  CHECK(poly.vertices.size() == 4);
  const double area = shoelace_area(poly);
  CHECK(area == doctest::Approx(1.0).epsilon(1e-6));

  const std::string metrics = slurp(dir / "metrics.json");
  nlohmann::json m = nlohmann::json::parse(metrics);
  CHECK(m["method"] == "qf");
  CHECK(std::abs(m["area"].get<double>() - area) <= 1e-9);
  CHECK(m.contains("solve_count"));

  const std::string svg = slurp(dir / "region.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  // One closed path with 4 segments for the rectangle (3 L commands + Z).
  std::size_t paths = 0;
  for (std::size_t pos = svg.find("<path"); pos != std::string::npos;
       pos = svg.find("<path", pos + 1))
    ++paths;
  CHECK(paths == 1);
}

TEST_CASE("run subcommand rejects a bad epsilon") {
  fs::path dir = temp_dir("bad_eps");
  int rc = cli({"run", "--network", data_file("twobus.json"), "--method", "qf", "--formulation",
                "lindistflow", "--epsilon", "-1", "--out", dir.string()});
  CHECK(rc != 0);
}

TEST_CASE("run subcommand requires k for the sampling methods") {
  fs::path dir = temp_dir("need_k");
  int rc = cli({"run", "--network", data_file("twobus.json"), "--method", "mc", "--formulation",
                "lindistflow", "--out", dir.string()});
  CHECK(rc != 0);
}

TEST_CASE("compare emits the consolidated table and is byte-deterministic") {
  fs::path dir_a = temp_dir("cmp_a");
  fs::path dir_b = temp_dir("cmp_b");
  REQUIRE(cli({"compare", "--network", data_file("twobus.json"), "--out", dir_a.string()}) == 0);
  REQUIRE(cli({"compare", "--network", data_file("twobus.json"), "--out", dir_b.string()}) == 0);

  for (const char* name : {"region.csv", "trace.csv", "metrics.json", "region.svg",
                           "compare_metrics.json", "compare.svg", "mc_region.csv"}) {
    CHECK(slurp(dir_a / name) == slurp(dir_b / name));
  }

  nlohmann::json table = nlohmann::json::parse(slurp(dir_a / "compare_metrics.json"));
  REQUIRE(table["methods"].size() == 4);
  CHECK(table["methods"][0]["method"] == "qf");
  CHECK(table["methods"][0]["recovered_fraction"].get<double>() == doctest::Approx(1.0));
  CHECK(table["methods"][1]["recovered_fraction"].get<double>() < 1.0);

  const std::string svg = slurp(dir_a / "compare.svg");
  std::size_t texts = 0;
  for (std::size_t pos = svg.find("<text"); pos != std::string::npos;
       pos = svg.find("<text", pos + 1))
    ++texts;
  CHECK(texts >= 4);   // legend entry per method
}

TEST_CASE("svg emission is deterministic and structured") {
  fs::path dir = temp_dir("svg");
  Polygon square{{{0, 0}, {0, 1}, {1, 1}, {1, 0}}};
  Polygon inner{{{0.25, 0.25}, {0.25, 0.75}, {0.75, 0.75}, {0.75, 0.25}}};
  emit_svg({{"outer", square}, {"inner", inner}}, dir / "two.svg");
  emit_svg({{"outer", square}, {"inner", inner}}, dir / "two_again.svg");
  CHECK(slurp(dir / "two.svg") == slurp(dir / "two_again.svg"));
  const std::string svg = slurp(dir / "two.svg");
  std::size_t paths = 0;
  for (std::size_t pos = svg.find("<path"); pos != std::string::npos;
       pos = svg.find("<path", pos + 1))
    ++paths;
  CHECK(paths == 2);
  CHECK(svg.find("outer") != std::string::npos);
  CHECK(svg.find("inner") != std::string::npos);
}

TEST_CASE("float formatting uses 12 significant digits") {
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(0.1234567890123456) == "0.123456789012");
  CHECK(format_double(-0.0) == "0");
}
