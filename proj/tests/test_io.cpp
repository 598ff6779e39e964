#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>

#include "bicubic/io.hpp"

using namespace bicubic;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("bicubic_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

MapChain sample_chain() {
  const auto d0 = cheb_fit([](double x) { return x + 0.1 * std::sin(x); }, Interval(-0.5, 1.0), 20, Monotone::increasing);
  const Interval w1 = Interval::spanning(std::pow(d0(-0.5), 3), std::pow(d0(1.0), 3));
  const auto d1 = cheb_fit([](double y) { return std::exp(y) - 0.9; }, w1, 20, Monotone::increasing);
  NodeMeta m;
  m.origin = "c";
  m.iterate = 4;
  return MapChain({d0, d1}, {m});
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_CASE("hex floats round trip bit for bit") {
  for (double x : {0.1, -1.0 / 3, 1e-300, 6.02214076e23, 0.0, -0.0, std::numeric_limits<double>::denorm_min()})
    CHECK(same_bits(parse_hex_double(hex_double(x)), x));
  CHECK_THROWS_AS(parse_hex_double("0x1.zzp+1"), StructuralError);
}

TEST_CASE("chain json keeps every coefficient") {
  const MapChain c = sample_chain();
  const auto j = chain_to_json(c);
  CHECK(j["stages"].size() == 3);
  CHECK(j["stages"][1]["type"] == "q");
  CHECK(j["stages"][0]["type"] == "diffeo");
  CHECK(j["node_meta"].size() == 1);
  const MapChain back = chain_from_json(nlohmann::json::parse(j.dump()));
  REQUIRE(back.pieces().size() == c.pieces().size());
  for (std::size_t i = 0; i < c.pieces().size(); ++i) {
    const auto& a = c.pieces()[i].coeffs();
    const auto& b = back.pieces()[i].coeffs();
    REQUIRE(a.size() == b.size());
    for (int k = 0; k < a.size(); ++k) CHECK(same_bits(a(k), b(k)));
  }
  CHECK(back.nodes()[0].origin == "c");
  CHECK(back.nodes()[0].iterate == 4);
}

TEST_CASE("malformed chain json is a structural error") {
  auto j = chain_to_json(sample_chain());
  j["stages"].erase(1);
  CHECK_THROWS_AS(chain_from_json(j), StructuralError);
}

TEST_CASE("csv quoting, 17 digits and read back") {
  const fs::path dir = scratch_dir("csv");
  {
    CsvWriter w(dir / "t.csv", {"name", "x", "n"});
    w.row({std::string("a,b"), 0.1, 3});
    w.row({std::string("say \"hi\""), std::numeric_limits<double>::quiet_NaN(), std::int64_t{1} << 40});
    CHECK_THROWS_AS(w.row({1.0}), ShapeError);
  }
  const auto t = read_csv(dir / "t.csv");
  CHECK(t.header == std::vector<std::string>{"name", "x", "n"});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "a,b");
  CHECK(t.rows[0][1] == "0.10000000000000001");
  CHECK(std::stod(t.rows[0][1]) == 0.1);
  CHECK(t.rows[1][0] == "say \"hi\"");
  CHECK(t.rows[1][1] == "nan");
  CHECK(t.rows[1][2] == "1099511627776");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("config values, types and line diagnostics") {
  const std::string text =
      "[map]\n"
      "family = trig\n"
      "omega = 0.25\n"
      "\n"
      "[run]\n"
      "seed = twelve\n"
      "experiments = rotnum, cocycle\n";
  const Config cfg = Config::parse(text, "lab.ini");
  CHECK(cfg.get_string("map.family", "") == "trig");
  CHECK(cfg.get_double("map.omega", 0) == 0.25);
  CHECK(cfg.get_double("map.c", 0.5) == 0.5);
  CHECK(cfg.get_list("run.experiments") == std::vector<std::string>{"rotnum", "cocycle"});
  CHECK(cfg.line_of("run.seed") == 6);
  try {
    cfg.get_int("run.seed", 0);
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    CHECK(what.find("lab.ini:6") != std::string::npos);
    CHECK(what.find("run.seed") != std::string::npos);
  }
  CHECK_THROWS_AS(Config::parse("[map\nfamily = trig\n", "bad.ini"), ConfigError);
}

TEST_CASE("run config rejects unknown fields and bad ranges") {
  CHECK_NOTHROW(run_config_from(Config::parse("")));
  const RunConfig d = run_config_from(Config::parse(""));
  CHECK(d.degree == 64);
  CHECK(d.experiments.empty());
  CHECK(d.convention == "dynamical");
  try {
    run_config_from(Config::parse("[map]\nfamly = trig\n", "x.ini"));
    FAIL("expected a config error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("map.famly") != std::string::npos);
    CHECK(std::string(e.what()).find("x.ini:2") != std::string::npos);
  }
  CHECK_THROWS_AS(run_config_from(Config::parse("[run]\ndegree = 4\n")), ConfigError);
  CHECK_THROWS_AS(run_config_from(Config::parse("[tolerance]\ncompat = 0\n")), ConfigError);
  CHECK_THROWS_AS(run_config_from(Config::parse("[run]\nexperiments = rotnum, dance\n")), ConfigError);
  const RunConfig r = run_config_from(Config::parse("[map]\np = 2.5, -0.5\n[spectrum]\ndegrees = 16, 24\n"));
  CHECK(r.blaschke_p == std::complex<double>(2.5, -0.5));
  CHECK(r.spectrum_degrees == std::vector<int>{16, 24});
}

TEST_CASE("config hash follows content, not layout") {
  const Config a = Config::parse("[run]\nseed = 3\n[map]\nc = 0.4\n");
  const Config b = Config::parse("; comment\n[map]\nc=0.4\n\n[run]\nseed   =  3\n");
  const Config c = Config::parse("[run]\nseed = 4\n[map]\nc = 0.4\n");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
  CHECK(config_hash(a).rfind("fnv1a64:", 0) == 0);
  // FNV-1a reference values.
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("manifest json") {
  Manifest m;
  m.subcommand = "run";
  m.seed = 7;
  m.degree = 32;
  m.config = Config::parse("[run]\nseed = 7\n");
  m.artifacts.push_back({"convergence.csv", {"n", "distance"}, "csv"});
  const auto j = manifest_to_json(m);
  CHECK(j["seed"] == 7);
  CHECK(j["config"]["run.seed"] == "7");
  CHECK(j["config_hash"] == config_hash(m.config));
  CHECK(j["artifacts"][0]["columns"][1] == "distance");
  CHECK(j.contains("versions"));
  const fs::path dir = scratch_dir("manifest");
  write_json(dir / "m.json", j);
  CHECK(read_json(dir / "m.json") == j);
}

TEST_CASE("experiment names") {
  CHECK(all_experiments().size() == 11);
  for (auto e : all_experiments()) CHECK(parse_experiment(to_string(e)) == e);
  CHECK_THROWS_AS(parse_experiment("plot"), ConfigError);
}
