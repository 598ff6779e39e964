#pragma once

// Chains and pairs as JSON with hex-float numbers, CSV artifacts, the flat
// run configuration file and the run manifest.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "bicubic/chains.hpp"
#include "bicubic/pairs.hpp"

namespace bicubic {

/// "%a" rendering; parse_hex_double accepts it back bit for bit.
std::string hex_double(double x);
double parse_hex_double(const std::string& s);

nlohmann::json chain_to_json(const MapChain& c);
MapChain chain_from_json(const nlohmann::json& j);
nlohmann::json pair_to_json(const CommutingPair& p);
CommutingPair pair_from_json(const nlohmann::json& j);

/// 17 significant digits, "nan"/"inf"/"-inf" for non-finite values.
std::string format_double(double x);
std::string csv_escape(const std::string& s);

using CsvField = std::variant<std::string, double, std::int64_t, int>;

class CsvWriter {
public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<CsvField>& fields);
  const std::filesystem::path& path() const { return path_; }
  const std::vector<std::string>& header() const { return header_; }
  int rows() const { return rows_; }

private:
  std::filesystem::path path_;
  std::vector<std::string> header_;
  std::ofstream out_;
  int rows_ = 0;
};

/// Header and rows of a CSV file written by CsvWriter (quoted fields allowed).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable read_csv(const std::filesystem::path& path);

std::uint64_t fnv1a64(const std::string& bytes);

/// Flat "section.key = value" configuration read from an INI file. Syntax
/// errors carry the line number, type errors the field name.
class Config {
public:
  static Config parse(const std::string& text, const std::string& source = "<config>");
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key, long long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<std::string> get_list(const std::string& key) const;
  std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  const std::map<std::string, std::string>& values() const { return values_; }
  /// Sorted key = value lines; the manifest hash is taken over this text.
  std::string canonical() const;
  /// Keys never read through a getter.
  std::vector<std::string> unused() const;
  int line_of(const std::string& key) const;
  const std::string& source() const { return source_; }

private:
  [[noreturn]] void fail(const std::string& key, const std::string& expected) const;
  const std::string* find(const std::string& key) const;

  std::string source_;
  std::map<std::string, std::string> values_;
  std::map<std::string, int> lines_;
  mutable std::map<std::string, bool> used_;
};

enum class Experiment { rotnum, signature, partition, extract, renorm, converge, bounds, fixedpoint, spectrum, cocycle, collision };

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& s);
const std::vector<Experiment>& all_experiments();

struct RunConfig {
  // map
  std::string family = "trig";
  double omega = 0.5, c = 0.5, shape = 0.0;
  double blaschke_t = 0.0;
  std::complex<double> blaschke_p{2.0, 0.0}, blaschke_q{2.0, 0.0};
  bool tune = true;
  std::vector<int> target_preperiod;
  std::vector<int> target_period{1};
  double target_delta = 0.3819660112501051;
  double tune_q_cap = 2000000;
  long tune_delta_orbit = 1000000;
  double tune_delta_tol = 2e-7;
  // run
  std::vector<Experiment> experiments;
  std::string out = "out";
  std::uint64_t seed = 1;
  int degree = 64;
  bool verbose = false;
  // depths
  int level_min = 2, level_max = 8;
  int rotnum_depth = 12;
  long orbit = 1000000;
  int signature_depth = 8;
  int partition_level = 4;
  int probes = 50;
  // tolerances
  double compat = 1e-9;
  double validate_tol = 1e-9;
  double fixed_point_tol = 1e-6;
  // cocycle
  std::string convention = "dynamical";
  int cocycle_steps = 100;
  bool cocycle_snap = true;
  // fixed point and spectrum
  int fp_level = 3;
  int fp_iterations = 10;
  bool fp_newton = true;
  int fp_period = 1;
  std::vector<int> spectrum_degrees{32, 48, 64};
  double spectrum_margin = 0.05;
  double jacobian_h = 1e-6;
  int threads = 0;
  // convergence
  double converge_shape = 0.15;
  // collision
  int collision_period = 1;
  int collision_bound = 3;
  int collision_count = 3;
  int collision_degree = 32;

  Config raw;
};

/// Typed view of a Config; unknown keys and out-of-range values are
/// configuration errors naming the field.
RunConfig run_config_from(const Config& cfg);

struct ManifestArtifact {
  std::string file;
  std::vector<std::string> columns;  // empty for JSON/text artifacts
  std::string kind;                  // csv, json, text
};

struct Manifest {
  std::string subcommand;
  std::string status = "ok";
  std::string message;
  std::uint64_t seed = 0;
  int degree = 0;
  Config config;
  double wall_seconds = 0;
  std::string started;
  std::vector<ManifestArtifact> artifacts;
  nlohmann::json results = nlohmann::json::object();
};

std::string config_hash(const Config& cfg);
nlohmann::json manifest_to_json(const Manifest& m);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace bicubic
