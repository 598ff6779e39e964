#include "bicubic/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace bicubic {

std::string hex_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_hex_double(const std::string& s) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0' || errno == ERANGE)
    throw StructuralError("malformed hex float '" + s + "'");
  return v;
}

namespace {

nlohmann::json interval_json(const Interval& i) { return {hex_double(i.lo), hex_double(i.hi)}; }

Interval interval_from(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw StructuralError("interval must be a two-element array");
  return Interval(parse_hex_double(j[0].get<std::string>()), parse_hex_double(j[1].get<std::string>()));
}

}  // namespace

nlohmann::json chain_to_json(const MapChain& c) {
  nlohmann::json stages = nlohmann::json::array();
  for (std::size_t i = 0; i < c.pieces().size(); ++i) {
    const ChebPiece& p = c.pieces()[i];
    nlohmann::json coeffs = nlohmann::json::array();
    for (int k = 0; k <= p.degree(); ++k) coeffs.push_back(hex_double(p.coeffs()(k)));
    stages.push_back({{"type", "diffeo"}, {"domain", interval_json(p.domain())}, {"coeffs", coeffs}});
    if (i + 1 < c.pieces().size()) stages.push_back({{"type", "q"}});
  }
  nlohmann::json meta = nlohmann::json::array();
  for (const auto& m : c.nodes()) {
    meta.push_back({{"origin", m.origin},
                    {"iterate", m.iterate},
                    {"critical_point", hex_double(m.critical_point)},
                    {"removable", m.removable},
                    {"near_degenerate", m.near_degenerate}});
  }
  return {{"domain", interval_json(c.domain())}, {"stages", stages}, {"node_meta", meta}};
}

MapChain chain_from_json(const nlohmann::json& j) {
  try {
    std::vector<ChebPiece> pieces;
    int q_count = 0;
    bool expect_piece = true;
    for (const auto& st : j.at("stages")) {
      const std::string type = st.at("type").get<std::string>();
      if (type == "diffeo") {
        if (!expect_piece) throw StructuralError("chain json: two diffeo stages without a q between them");
        const auto& cj = st.at("coeffs");
        ChebPiece::Vector coeffs(cj.size());
        for (std::size_t k = 0; k < cj.size(); ++k) coeffs(k) = parse_hex_double(cj[k].get<std::string>());
        pieces.emplace_back(interval_from(st.at("domain")), coeffs, Monotone::increasing);
        expect_piece = false;
      } else if (type == "q") {
        if (expect_piece) throw StructuralError("chain json: q stage without a preceding diffeo");
        ++q_count;
        expect_piece = true;
      } else {
        throw StructuralError("chain json: unknown stage type '" + type + "'");
      }
    }
    if (expect_piece) throw StructuralError("chain json: chain must end with a diffeo stage");
    std::vector<NodeMeta> nodes;
    const auto& mj = j.at("node_meta");
    if (static_cast<int>(mj.size()) != q_count) throw StructuralError("chain json: node_meta count differs from q stages");
    for (const auto& m : mj) {
      NodeMeta n;
      n.origin = m.at("origin").get<std::string>();
      n.iterate = m.at("iterate").get<int>();
      n.critical_point = parse_hex_double(m.at("critical_point").get<std::string>());
      n.removable = m.at("removable").get<bool>();
      n.near_degenerate = m.at("near_degenerate").get<bool>();
      nodes.push_back(n);
    }
    return MapChain(std::move(pieces), std::move(nodes));
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("chain json: ") + e.what());
  }
}

nlohmann::json pair_to_json(const CommutingPair& p) {
  nlohmann::json params = nlohmann::json::array();
  for (double v : p.provenance.params) params.push_back(hex_double(v));
  return {{"eta", chain_to_json(p.eta)},
          {"xi", chain_to_json(p.xi)},
          {"provenance",
           {{"family", p.provenance.family},
            {"params", params},
            {"level", p.provenance.level},
            {"renormalizations", p.provenance.renormalizations}}}};
}

CommutingPair pair_from_json(const nlohmann::json& j) {
  try {
    CommutingPair p;
    p.eta = chain_from_json(j.at("eta"));
    p.xi = chain_from_json(j.at("xi"));
    const auto& pv = j.at("provenance");
    p.provenance.family = pv.at("family").get<std::string>();
    for (const auto& v : pv.at("params")) p.provenance.params.push_back(parse_hex_double(v.get<std::string>()));
    p.provenance.level = pv.at("level").get<int>();
    p.provenance.renormalizations = pv.at("renormalizations").get<int>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(std::string("pair json: ") + e.what());
  }
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + '"';
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), header_(std::move(header)), out_(path, std::ios::binary) {
  if (!out_) throw ConfigError("cannot write " + path.string());
  for (std::size_t i = 0; i < header_.size(); ++i) out_ << (i ? "," : "") << csv_escape(header_[i]);
  out_ << '\n';
}

void CsvWriter::row(const std::vector<CsvField>& fields) {
  if (fields.size() != header_.size())
    throw ShapeError(path_.filename().string() + ": row has " + std::to_string(fields.size()) + " fields, header has " +
                     std::to_string(header_.size()));
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, std::string>) {
            out_ << csv_escape(v);
          } else if constexpr (std::is_same_v<T, double>) {
            out_ << format_double(v);
          } else {
            out_ << v;
          }
        },
        fields[i]);
  }
  out_ << '\n';
  out_.flush();
  ++rows_;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  std::vector<std::vector<std::string>> lines;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch == '"' && i + 1 < text.size() && text[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
      continue;
    }
    if (ch == '"') {
      quoted = true;
      any = true;
    } else if (ch == ',') {
      row.push_back(field);
      field.clear();
    } else if (ch == '\n') {
      row.push_back(field);
      lines.push_back(row);
      row.clear();
      field.clear();
      any = false;
    } else if (ch != '\r') {
      field += ch;
      any = true;
    }
  }
  if (any || !row.empty()) {
    row.push_back(field);
    lines.push_back(row);
  }
  if (lines.empty()) throw ShapeError(path.filename().string() + ": empty csv");
  CsvTable t;
  t.header = lines.front();
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].size() != t.header.size())
      throw ShapeError(path.filename().string() + ": row " + std::to_string(i) + " has " +
                       std::to_string(lines[i].size()) + " fields");
    t.rows.push_back(lines[i]);
  }
  return t;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Configuration

Config Config::parse(const std::string& text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  Config cfg;
  cfg.source_ = source;
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      if (!boost::trim_copy(body.data()).empty()) cfg.values_[section] = boost::trim_copy(body.data());
      continue;
    }
    for (const auto& [key, leaf] : body) cfg.values_[section + "." + key] = boost::trim_copy(leaf.data());
  }
  // property_tree drops positions; recover the line of every key for diagnostics.
  std::istringstream lines(text);
  std::string line, section;
  for (int n = 1; std::getline(lines, line); ++n) {
    const std::string t = boost::trim_copy(line);
    if (t.empty() || t[0] == ';' || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = boost::trim_copy(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = boost::trim_copy(t.substr(0, eq));
    cfg.lines_[section.empty() ? key : section + "." + key] = n;
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const std::string* Config::find(const std::string& key) const {
  used_[key] = true;
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

int Config::line_of(const std::string& key) const {
  const auto it = lines_.find(key);
  return it == lines_.end() ? 0 : it->second;
}

void Config::fail(const std::string& key, const std::string& expected) const {
  const int line = line_of(key);
  const std::string where = line > 0 ? source_ + ":" + std::to_string(line) : source_;
  const auto it = values_.find(key);
  const std::string got = it == values_.end() ? "" : ", got '" + it->second + "'";
  throw ConfigError(where + ": field '" + key + "': expected " + expected + got);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const std::string* v = find(key);
  return v ? *v : fallback;
}

double Config::get_double(const std::string& key, double fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(v->c_str(), &end);
  if (v->empty() || *end != '\0' || errno == ERANGE || !std::isfinite(x)) fail(key, "a finite number");
  return x;
}

long long Config::get_int(const std::string& key, long long fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  errno = 0;
  char* end = nullptr;
  const long long x = std::strtoll(v->c_str(), &end, 10);
  if (v->empty() || *end != '\0' || errno == ERANGE) fail(key, "an integer");
  return x;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const std::string* v = find(key);
  if (!v) return fallback;
  const std::string s = boost::to_lower_copy(*v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  fail(key, "a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  const std::string* v = find(key);
  std::vector<std::string> out;
  if (!v || v->empty()) return out;
  boost::split(out, *v, boost::is_any_of(","));
  for (auto& s : out) boost::trim(s);
  out.erase(std::remove(out.begin(), out.end(), std::string{}), out.end());
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
  if (!has(key)) {
    used_[key] = true;
    return fallback;
  }
  std::vector<double> out;
  for (const auto& s : get_list(key)) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (*end != '\0' || !std::isfinite(x)) fail(key, "a comma-separated list of numbers");
    out.push_back(x);
  }
  return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
  if (!has(key)) {
    used_[key] = true;
    return fallback;
  }
  std::vector<int> out;
  for (const auto& s : get_list(key)) {
    char* end = nullptr;
    const long x = std::strtol(s.c_str(), &end, 10);
    if (*end != '\0') fail(key, "a comma-separated list of integers");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

std::string Config::canonical() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) {
    const auto it = used_.find(k);
    if (it == used_.end() || !it->second) out.push_back(k);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

namespace {

const std::vector<std::pair<Experiment, const char*>>& experiment_names() {
  static const std::vector<std::pair<Experiment, const char*>> names{
      {Experiment::rotnum, "rotnum"},         {Experiment::signature, "signature"}, {Experiment::partition, "partition"},
      {Experiment::extract, "extract"},       {Experiment::renorm, "renorm"},       {Experiment::converge, "converge"},
      {Experiment::bounds, "bounds"},         {Experiment::fixedpoint, "fixedpoint"},
      {Experiment::spectrum, "spectrum"},     {Experiment::cocycle, "cocycle"},     {Experiment::collision, "collision"}};
  return names;
}

std::complex<double> complex_field(const Config& cfg, const std::string& key, std::complex<double> fallback) {
  const auto v = cfg.get_doubles(key, {fallback.real(), fallback.imag()});
  if (v.size() != 2) throw ConfigError(cfg.source() + ": field '" + key + "': expected 're, im'");
  return {v[0], v[1]};
}

void require(bool ok, const Config& cfg, const std::string& key, const std::string& what) {
  if (ok) return;
  const int line = cfg.line_of(key);
  throw ConfigError((line > 0 ? cfg.source() + ":" + std::to_string(line) : cfg.source()) + ": field '" + key +
                    "': " + what);
}

}  // namespace

std::string to_string(Experiment e) {
  for (const auto& [k, name] : experiment_names())
    if (k == e) return name;
  return "?";
}

Experiment parse_experiment(const std::string& s) {
  for (const auto& [k, name] : experiment_names())
    if (s == name) return k;
  throw ConfigError("unknown experiment '" + s + "'");
}

const std::vector<Experiment>& all_experiments() {
  static const std::vector<Experiment> all = [] {
    std::vector<Experiment> v;
    for (const auto& [k, name] : experiment_names()) v.push_back(k);
    return v;
  }();
  return all;
}

RunConfig run_config_from(const Config& cfg) {
  RunConfig r;
  r.raw = cfg;
  r.family = cfg.get_string("map.family", r.family);
  require(r.family == "trig" || r.family == "blaschke", cfg, "map.family", "expected trig or blaschke");
  r.omega = cfg.get_double("map.omega", r.omega);
  r.c = cfg.get_double("map.c", r.c);
  r.shape = cfg.get_double("map.shape", r.shape);
  r.blaschke_t = cfg.get_double("map.t", r.blaschke_t);
  r.blaschke_p = complex_field(cfg, "map.p", r.blaschke_p);
  r.blaschke_q = complex_field(cfg, "map.q", r.blaschke_q);
  r.tune = cfg.get_bool("map.tune", r.tune);
  r.target_preperiod = cfg.get_ints("target.preperiod", r.target_preperiod);
  r.target_period = cfg.get_ints("target.period", r.target_period);
  r.target_delta = cfg.get_double("target.delta", r.target_delta);
  for (int d : r.target_preperiod) require(d >= 1, cfg, "target.preperiod", "digits must be >= 1");
  for (int d : r.target_period) require(d >= 1, cfg, "target.period", "digits must be >= 1");
  require(!r.target_period.empty() || !r.target_preperiod.empty(), cfg, "target.period", "no digits given");
  require(r.target_delta > 0 && r.target_delta < 1, cfg, "target.delta", "must lie in (0,1)");
  r.tune_q_cap = cfg.get_double("tune.q_cap", r.tune_q_cap);
  r.tune_delta_orbit = cfg.get_int("tune.delta_orbit", r.tune_delta_orbit);
  r.tune_delta_tol = cfg.get_double("tune.delta_tol", r.tune_delta_tol);
  require(r.tune_q_cap >= 10, cfg, "tune.q_cap", "must be >= 10");
  require(r.tune_delta_orbit >= 1000, cfg, "tune.delta_orbit", "must be >= 1000");
  require(r.tune_delta_tol > 0, cfg, "tune.delta_tol", "must be > 0");

  r.experiments.clear();
  for (const auto& s : cfg.get_list("run.experiments")) {
    try {
      r.experiments.push_back(parse_experiment(s));
    } catch (const ConfigError&) {
      require(false, cfg, "run.experiments", "unknown experiment '" + s + "'");
    }
  }
  r.out = cfg.get_string("run.out", r.out);
  const long long seed = cfg.get_int("run.seed", static_cast<long long>(r.seed));
  require(seed >= 0, cfg, "run.seed", "must be >= 0");
  r.seed = static_cast<std::uint64_t>(seed);
  r.degree = static_cast<int>(cfg.get_int("run.degree", r.degree));
  require(r.degree >= 8, cfg, "run.degree", "must be >= 8");
  r.verbose = cfg.get_bool("run.verbose", r.verbose);
  r.threads = static_cast<int>(cfg.get_int("run.threads", r.threads));
  require(r.threads >= 0, cfg, "run.threads", "must be >= 0");

  r.level_min = static_cast<int>(cfg.get_int("depth.level_min", r.level_min));
  r.level_max = static_cast<int>(cfg.get_int("depth.level_max", r.level_max));
  require(r.level_min >= 1 && r.level_max >= r.level_min, cfg, "depth.level_max", "need 1 <= level_min <= level_max");
  r.rotnum_depth = static_cast<int>(cfg.get_int("depth.rotnum", r.rotnum_depth));
  require(r.rotnum_depth >= 1, cfg, "depth.rotnum", "must be >= 1");
  r.orbit = cfg.get_int("depth.orbit", r.orbit);
  require(r.orbit >= 1000, cfg, "depth.orbit", "must be >= 1000");
  r.signature_depth = static_cast<int>(cfg.get_int("depth.signature", r.signature_depth));
  require(r.signature_depth >= 1, cfg, "depth.signature", "must be >= 1");
  r.partition_level = static_cast<int>(cfg.get_int("depth.partition", r.partition_level));
  require(r.partition_level >= 0, cfg, "depth.partition", "must be >= 0");
  r.probes = static_cast<int>(cfg.get_int("depth.probes", r.probes));
  require(r.probes >= 1, cfg, "depth.probes", "must be >= 1");

  r.compat = cfg.get_double("tolerance.compat", r.compat);
  require(r.compat > 0, cfg, "tolerance.compat", "must be > 0");
  r.validate_tol = cfg.get_double("tolerance.validate", r.validate_tol);
  require(r.validate_tol > 0, cfg, "tolerance.validate", "must be > 0");
  r.fixed_point_tol = cfg.get_double("tolerance.fixed_point", r.fixed_point_tol);
  require(r.fixed_point_tol > 0, cfg, "tolerance.fixed_point", "must be > 0");

  r.convention = cfg.get_string("cocycle.convention", r.convention);
  try {
    parse_convention(r.convention);
  } catch (const Error&) {
    require(false, cfg, "cocycle.convention", "expected nearest, fractional or dynamical");
  }
  r.cocycle_steps = static_cast<int>(cfg.get_int("cocycle.steps", r.cocycle_steps));
  require(r.cocycle_steps >= 1, cfg, "cocycle.steps", "must be >= 1");
  r.cocycle_snap = cfg.get_bool("cocycle.snap", r.cocycle_snap);

  r.fp_level = static_cast<int>(cfg.get_int("fixedpoint.level", r.fp_level));
  require(r.fp_level >= 1, cfg, "fixedpoint.level", "must be >= 1");
  r.fp_iterations = static_cast<int>(cfg.get_int("fixedpoint.iterations", r.fp_iterations));
  require(r.fp_iterations >= 0, cfg, "fixedpoint.iterations", "must be >= 0");
  r.fp_newton = cfg.get_bool("fixedpoint.newton", r.fp_newton);
  r.fp_period = static_cast<int>(cfg.get_int("fixedpoint.period", r.fp_period));
  require(r.fp_period >= 1, cfg, "fixedpoint.period", "must be >= 1");
  r.spectrum_degrees = cfg.get_ints("spectrum.degrees", r.spectrum_degrees);
  require(!r.spectrum_degrees.empty(), cfg, "spectrum.degrees", "no degrees given");
  for (int d : r.spectrum_degrees) require(d >= 8, cfg, "spectrum.degrees", "degrees must be >= 8");
  r.spectrum_margin = cfg.get_double("spectrum.margin", r.spectrum_margin);
  require(r.spectrum_margin > 0 && r.spectrum_margin < 1, cfg, "spectrum.margin", "must lie in (0,1)");
  r.jacobian_h = cfg.get_double("spectrum.h", r.jacobian_h);
  require(r.jacobian_h > 0, cfg, "spectrum.h", "must be > 0");

  r.converge_shape = cfg.get_double("converge.shape", r.converge_shape);
  require(std::abs(r.converge_shape) < 0.5, cfg, "converge.shape", "|shape| must be < 0.5");

  r.collision_period = static_cast<int>(cfg.get_int("collision.period", r.collision_period));
  require(r.collision_period >= 1, cfg, "collision.period", "must be >= 1");
  r.collision_bound = static_cast<int>(cfg.get_int("collision.bound", r.collision_bound));
  require(r.collision_bound >= 1, cfg, "collision.bound", "must be >= 1");
  r.collision_count = static_cast<int>(cfg.get_int("collision.count", r.collision_count));
  require(r.collision_count >= 1, cfg, "collision.count", "must be >= 1");
  r.collision_degree = static_cast<int>(cfg.get_int("collision.degree", r.collision_degree));
  require(r.collision_degree >= 8, cfg, "collision.degree", "must be >= 8");

  const auto unknown = cfg.unused();
  if (!unknown.empty()) require(false, cfg, unknown.front(), "unknown field");
  return r;
}

// ---------------------------------------------------------------------------
// Manifest

std::string config_hash(const Config& cfg) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016" PRIx64, fnv1a64(cfg.canonical()));
  return buf;
}

nlohmann::json manifest_to_json(const Manifest& m) {
  nlohmann::json artifacts = nlohmann::json::array();
  for (const auto& a : m.artifacts) artifacts.push_back({{"file", a.file}, {"kind", a.kind}, {"columns", a.columns}});
  const Config& cfg = m.config;
  nlohmann::json echo = nlohmann::json::object();
  for (const auto& [k, v] : cfg.values()) echo[k] = v;
  return {{"subcommand", m.subcommand},
          {"status", m.status},
          {"message", m.message},
          {"seed", m.seed},
          {"degree", m.degree},
          {"config", echo},
          {"config_hash", config_hash(cfg)},
          {"versions",
           {{"bicubic_lab", "1.0.0"},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"compiler", __VERSION__}}},
          {"started", m.started},
          {"wall_seconds", m.wall_seconds},
          {"artifacts", artifacts},
          {"results", m.results}};
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw StructuralError(path.string() + ": " + e.what());
  }
}

}  // namespace bicubic
