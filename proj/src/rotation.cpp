#include "bicubic/rotation.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <algorithm>
#include <climits>
#include <sstream>

namespace bicubic {

ContinuedFraction ContinuedFraction::finite(std::vector<int> digits) {
  ContinuedFraction cf;
  cf.preperiod = std::move(digits);
  for (int a : cf.preperiod)
    if (a < 1) throw DomainError("continued fraction digits must be >= 1");
  return cf;
}

ContinuedFraction ContinuedFraction::periodic(std::vector<int> period, std::vector<int> preperiod) {
  if (period.empty()) throw DomainError("periodic continued fraction needs a non-empty period");
  ContinuedFraction cf;
  cf.preperiod = std::move(preperiod);
  cf.period = std::move(period);
  for (int a : cf.preperiod)
    if (a < 1) throw DomainError("continued fraction digits must be >= 1");
  for (int a : cf.period)
    if (a < 1) throw DomainError("continued fraction digits must be >= 1");
  return cf;
}

int ContinuedFraction::available() const {
  return infinite() ? INT_MAX : static_cast<int>(preperiod.size());
}

int ContinuedFraction::digit(int k) const {
  if (k < 0 || k >= available()) throw DepthError("digit " + std::to_string(k) + " not available");
  const int pre = static_cast<int>(preperiod.size());
  if (k < pre) return preperiod[k];
  return period[(k - pre) % period.size()];
}

std::vector<int> ContinuedFraction::digits(int n) const {
  std::vector<int> out;
  for (int k = 0; k < std::min(n, available()); ++k) out.push_back(digit(k));
  return out;
}

std::string to_string(const ContinuedFraction& cf) {
  std::ostringstream os;
  os << '[';
  for (std::size_t k = 0; k < cf.preperiod.size(); ++k) os << (k ? "," : "") << cf.preperiod[k];
  if (cf.infinite()) {
    os << (cf.preperiod.empty() ? "" : ",") << '(';
    for (std::size_t k = 0; k < cf.period.size(); ++k) os << (k ? "," : "") << cf.period[k];
    os << ")...";
  }
  os << ']';
  return os.str();
}

double cf_to_real(const ContinuedFraction& cf, int depth) { return cf_value<double>(cf, depth); }

std::vector<Convergent> convergent_list(const ContinuedFraction& cf, int kmax) {
  if (kmax > cf.available()) throw DepthError("convergent " + std::to_string(kmax) + " needs more digits");
  std::vector<Convergent> out{{0, 1}};
  if (kmax == 0) return out;
  out.push_back({1, cf.digit(0)});
  for (int k = 2; k <= kmax; ++k) {
    const std::int64_t a = cf.digit(k - 1);
    std::int64_t p, q;
    if (__builtin_mul_overflow(a, out[k - 1].q, &q) || __builtin_add_overflow(q, out[k - 2].q, &q) ||
        __builtin_mul_overflow(a, out[k - 1].p, &p) || __builtin_add_overflow(p, out[k - 2].p, &p) ||
        q > (std::int64_t{1} << 62))
      throw DepthError("convergent denominator overflow at k=" + std::to_string(k));
    out.push_back({p, q});
  }
  return out;
}

Convergent convergents(const ContinuedFraction& cf, int k) { return convergent_list(cf, k).back(); }

ContinuedFraction gauss_shift(const ContinuedFraction& cf) {
  ContinuedFraction out = cf;
  if (!out.preperiod.empty()) {
    out.preperiod.erase(out.preperiod.begin());
  } else if (out.infinite()) {
    std::rotate(out.period.begin(), out.period.begin() + 1, out.period.end());
  } else {
    throw DepthError("gauss_shift of an empty expansion");
  }
  return out;
}

bool is_bounded_type(const ContinuedFraction& cf, int bound) {
  for (int a : cf.preperiod)
    if (a > bound) return false;
  for (int a : cf.period)
    if (a > bound) return false;
  return true;
}

std::string to_string(CocycleConvention c) {
  switch (c) {
    case CocycleConvention::nearest: return "nearest";
    case CocycleConvention::fractional: return "fractional";
    case CocycleConvention::dynamical: return "dynamical";
  }
  return "?";
}

CocycleConvention parse_convention(const std::string& s) {
  if (s == "nearest") return CocycleConvention::nearest;
  if (s == "fractional") return CocycleConvention::fractional;
  if (s == "dynamical") return CocycleConvention::dynamical;
  throw ConfigError("unknown cocycle convention '" + s + "'");
}

namespace {

// Reduce an eventually periodic expansion to a canonical form so that equal
// numbers compare equal: the period is rotated into the preperiod as far as
// possible.
ContinuedFraction canonical(ContinuedFraction cf) {
  if (!cf.infinite()) return cf;
  const std::size_t p = cf.period.size();
  for (std::size_t m = 1; m <= p; ++m) {
    if (p % m) continue;
    bool ok = true;
    for (std::size_t k = m; k < p && ok; ++k) ok = cf.period[k] == cf.period[k - m];
    if (ok) {
      cf.period.resize(m);
      break;
    }
  }
  while (!cf.preperiod.empty() && cf.preperiod.back() == cf.period.back()) {
    std::rotate(cf.period.rbegin(), cf.period.rbegin() + 1, cf.period.rend());
    cf.preperiod.pop_back();
  }
  return cf;
}

bool same_rho(const ContinuedFraction& a, const ContinuedFraction& b) { return canonical(a) == canonical(b); }

Signature iterate(Signature s, CocycleConvention conv, int n) {
  for (int k = 0; k < n; ++k) s = cocycle_step(s, conv);
  return s;
}

}  // namespace

int signature_period(const Signature& s, CocycleConvention conv, int max_period, double tol) {
  Signature t = s;
  for (int m = 1; m <= max_period; ++m) {
    t = cocycle_step(t, conv);
    if (same_rho(t.rho, s.rho) && std::abs(t.delta - s.delta) <= tol) return m;
  }
  return 0;
}

PeriodicSearch find_periodic_signatures(int period, int bound, CocycleConvention conv) {
  if (period < 1 || bound < 1) throw DomainError("find_periodic_signatures: period and bound must be >= 1");
  PeriodicSearch out;
  std::vector<int> word(period, 1);
  const int grid = 200000;
  for (;;) {
    // Canonical representative: lexicographically least rotation.
    bool least = true;
    for (int r = 1; r < period && least; ++r) {
      std::vector<int> rot(word.begin() + r, word.end());
      rot.insert(rot.end(), word.begin(), word.begin() + r);
      least = !(rot < word);
    }
    if (least) {
      const auto rho = ContinuedFraction::periodic(word);
      auto g = [&](double d) { return iterate(Signature{rho, d}, conv, period).delta - d; };
      std::vector<double> roots;
      double x0 = 0.5 / grid, g0 = g(x0);
      for (int k = 1; k < grid; ++k) {
        const double x1 = (k + 0.5) / grid, g1 = g(x1);
        if (g0 == 0) roots.push_back(x0);
        if ((g0 < 0 && g1 > 0) || (g0 > 0 && g1 < 0)) {
          double a = x0, b = x1, ga = g0;
          for (int it = 0; it < 200 && b - a > 1e-17; ++it) {
            const double m = 0.5 * (a + b), gm = g(m);
            if ((gm < 0) == (ga < 0)) {
              a = m;
              ga = gm;
            } else {
              b = m;
            }
          }
          const double r = std::abs(g(a)) < std::abs(g(b)) ? a : b;
          if (std::abs(g(r)) <= 1e-10) roots.push_back(r);
        }
        x0 = x1;
        g0 = g1;
      }
      bool found = false;
      for (double r : roots) {
        if (r < 1e-9 || r > 1 - 1e-9) continue;
        std::vector<Signature> orbit{{rho, r}};
        for (int k = 1; k < period; ++k) orbit.push_back(cocycle_step(orbit.back(), conv));
        bool degenerate = false;
        for (const auto& s : orbit) degenerate = degenerate || s.delta < 1e-9 || s.delta > 1 - 1e-9;
        if (degenerate || signature_period(orbit.front(), conv, period) != period) continue;
        bool seen = false;
        for (const auto& o : out.orbits)
          for (const auto& s : o) seen = seen || (same_rho(s.rho, rho) && std::abs(s.delta - r) < 1e-9);
        if (seen) continue;
        out.orbits.push_back(std::move(orbit));
        found = true;
      }
      if (!found) out.omitted.push_back(word);
    }
    int pos = period - 1;
    while (pos >= 0 && word[pos] == bound) word[pos--] = 1;
    if (pos < 0) break;
    ++word[pos];
  }
  return out;
}

CocycleOrbit cocycle_orbit(const Signature& s, CocycleConvention conv, int steps, bool snap, double snap_tol) {
  using Wide = boost::multiprecision::cpp_bin_float_50;
  if (steps < 0) throw DomainError("cocycle_orbit: steps must be >= 0");
  CocycleOrbit out;
  out.input_delta = s.delta;
  const bool periodic = s.rho.infinite() && s.rho.preperiod.empty();
  const int p = periodic ? static_cast<int>(s.rho.period.size()) : 0;
  if (snap && periodic) {
    auto g = [&](const Wide& d) {
      BasicSignature<Wide> t{s.rho, d};
      for (int k = 0; k < p; ++k) t = cocycle_step(t, conv);
      return Wide(t.delta - d);
    };
    // The p-fold cocycle is affine near a periodic point: two secant steps
    // inside one branch land on it.
    Wide d = s.delta;
    const Wide h = Wide(1e-30);
    bool found = false;
    try {
      for (int it = 0; it < 4 && d > 0 && d < 1; ++it) {
        const Wide slope = (g(d + h) - g(d)) / h;
        if (slope == 0) break;
        d -= g(d) / slope;
      }
      found = d > 0 && d < 1 && abs(g(d)) < Wide(1e-40);
    } catch (const DomainError&) {
    }
    if (found && abs(d - Wide(s.delta)) <= Wide(snap_tol)) {
      out.snapped = true;
      out.snap_shift = static_cast<double>(d - Wide(s.delta));
      BasicSignature<Wide> t{s.rho, d};
      std::vector<Wide> wide{d};
      out.orbit.push_back({s.rho, static_cast<double>(d)});
      for (int k = 0; k < steps; ++k) {
        t = cocycle_step(t, conv);
        wide.push_back(t.delta);
        out.orbit.push_back({t.rho, static_cast<double>(t.delta)});
      }
      for (std::size_t k = p; k < wide.size(); ++k)
        out.drift = std::max(out.drift, static_cast<double>(abs(wide[k] - wide[k - p])));
      return out;
    }
  }
  out.orbit.push_back(s);
  for (int k = 0; k < steps; ++k) out.orbit.push_back(cocycle_step(out.orbit.back(), conv));
  if (p > 0)
    for (std::size_t k = p; k < out.orbit.size(); ++k)
      out.drift = std::max(out.drift, std::abs(out.orbit[k].delta - out.orbit[k - p].delta));
  return out;
}

}  // namespace bicubic
