#include "bicubic/chains.hpp"

#include <cmath>
#include <limits>

namespace bicubic {

namespace {

double cube(double x) { return x * x * x; }

Interval cube_image(const Interval& w) { return Interval(cube(w.lo), cube(w.hi)); }

double eval_stage(const ChebPiece& p, double x, double overhang, int stage) {
  const double t = p.domain().to_unit(x);
  if (!(std::abs(t) <= 1 + overhang)) {
    throw ChainIntegrityError("range escape by " + std::to_string(p.domain().excess(x)), stage);
  }
  return p.eval_unchecked(x);
}

double relative_mismatch(const Interval& a, const Interval& b) {
  return std::max(std::abs(a.lo - b.lo), std::abs(a.hi - b.hi)) / b.length();
}

// Location in the domain where the value entering node i vanishes. An
// incoming interval that misses 0 by less than `gap` (relative) is taken to
// end at 0; NaN when it stays away from 0.
double zero_location(const MapChain& c, int i, double gap) {
  const Interval w = c.piece_image(i);
  const double g = gap * w.length();
  if (w.lo <= 0 && w.hi >= 0) return chain_solve(c, i, 0.0);
  if (w.lo > 0 && w.lo <= g) return c.domain().lo;
  if (w.hi < 0 && w.hi >= -g) return c.domain().hi;
  return std::numeric_limits<double>::quiet_NaN();
}

void locate_critical_points(const MapChain& c, std::vector<NodeMeta>& nodes) {
  for (int i = 0; i < static_cast<int>(nodes.size()); ++i) {
    nodes[i].critical_point = zero_location(c, i, default_chain_tolerances().removable_gap);
    nodes[i].removable = std::isnan(nodes[i].critical_point);
  }
}

}  // namespace

MapChain::MapChain(std::vector<ChebPiece> pieces, std::vector<NodeMeta> nodes)
    : pieces_(std::move(pieces)), nodes_(std::move(nodes)) {
  if (pieces_.size() != nodes_.size() + 1)
    throw ShapeError("chain needs one more piece than cube nodes (pieces " + std::to_string(pieces_.size()) +
                     ", nodes " + std::to_string(nodes_.size()) + ")");
  derivs_.reserve(pieces_.size());
  for (std::size_t i = 0; i < pieces_.size(); ++i) {
    if (!pieces_[i].increasing()) throw ChainIntegrityError("piece not flagged increasing", 2 * static_cast<int>(i));
    derivs_.push_back(cheb_derivative(pieces_[i]));
  }
}

int MapChain::max_degree() const {
  int d = 1;
  for (const auto& p : pieces_) d = std::max(d, p.degree());
  return d;
}

Interval MapChain::piece_image(int i) const {
  const auto& p = pieces_.at(i);
  return Interval::spanning(p.eval_unchecked(p.domain().lo), p.eval_unchecked(p.domain().hi));
}

Interval MapChain::image() const {
  return Interval::spanning(chain_eval_lenient(*this, domain().lo), chain_eval_lenient(*this, domain().hi));
}

double chain_eval_prefix(const MapChain& c, int node, double x, double overhang) {
  const auto& pieces = c.pieces();
  double w = eval_stage(pieces[0], x, overhang, 0);
  for (int i = 0; i < node; ++i) w = eval_stage(pieces[i + 1], cube(w), overhang, 2 * (i + 1));
  return w;
}

double chain_eval(const MapChain& c, double x) {
  return chain_eval_prefix(c, c.node_count(), x, default_chain_tolerances().eval_overhang);
}

double chain_eval_lenient(const MapChain& c, double x, double overhang) {
  return chain_eval_prefix(c, c.node_count(), x, overhang);
}

double chain_derivative_at(const MapChain& c, double x) {
  const double overhang = default_chain_tolerances().eval_overhang;
  const auto& pieces = c.pieces();
  const auto& derivs = c.derivatives();
  double w = eval_stage(pieces[0], x, overhang, 0);
  double d = derivs[0].eval_unchecked(x);
  for (int i = 0; i < c.node_count(); ++i) {
    const double v = cube(w);
    d *= 3 * w * w * derivs[i + 1].eval_unchecked(v);
    w = eval_stage(pieces[i + 1], v, overhang, 2 * (i + 1));
  }
  return d;
}

double chain_solve(const MapChain& c, int node, double y) {
  const Interval& dom = c.domain();
  const double overhang = default_chain_tolerances().lenient_overhang;
  auto g = [&](double x) { return chain_eval_prefix(c, node, x, overhang) - y; };
  double a = dom.lo, b = dom.hi;
  double ga = g(a), gb = g(b);
  if (ga >= 0) return a;
  if (gb <= 0) return b;
  // Illinois regula falsi with a bisection guard.
  int side = 0;
  for (int it = 0; it < 200 && b - a > 4e-16 * std::max(1.0, std::abs(a)); ++it) {
    double x = (a * gb - b * ga) / (gb - ga);
    if (!(x > a && x < b) || it % 8 == 7) x = 0.5 * (a + b);
    const double gx = g(x);
    if (gx == 0) return x;
    if (gx < 0) {
      a = x;
      ga = gx;
      if (side == -1) gb /= 2;
      side = -1;
    } else {
      b = x;
      gb = gx;
      if (side == 1) ga /= 2;
      side = 1;
    }
  }
  return std::abs(ga) < std::abs(gb) ? a : b;
}

MapChain chain_compose(const MapChain& c2, const MapChain& c1_in, int degree, double compat) {
  const Interval& dom = c2.domain();
  auto escape_of = [&](const MapChain& c) {
    const Interval img = c.piece_image(c.node_count());
    return std::max(dom.excess(img.lo), dom.excess(img.hi));
  };
  // Later pieces of an uncanonicalized composite may cover more than the
  // chain reaches; cut them down to the reached images before giving up.
  MapChain tightened;
  const MapChain* c1p = &c1_in;
  double escape = escape_of(c1_in);
  if (escape > compat * dom.length() && c1_in.node_count() > 0) {
    tightened = chain_restrict(c1_in, c1_in.domain(), compat);
    c1p = &tightened;
    escape = escape_of(tightened);
  }
  const MapChain& c1 = *c1p;
  if (escape > compat * dom.length())
    throw ChainIntegrityError("composition range escape " + std::to_string(escape), 2 * c1.node_count());

  std::vector<ChebPiece> pieces(c1.pieces().begin(), c1.pieces().end() - 1);
  std::vector<NodeMeta> nodes = c1.nodes();
  const ChebPiece& inner = c1.pieces().back();
  const ChebPiece& outer = c2.pieces().front();
  auto merged = cheb_fit([&](double x) { return outer.eval_unchecked(inner.eval_unchecked(x)); }, inner.domain(),
                         degree);
  merged.set_monotone(Monotone::increasing);
  pieces.push_back(std::move(merged));
  pieces.insert(pieces.end(), c2.pieces().begin() + 1, c2.pieces().end());
  nodes.insert(nodes.end(), c2.nodes().begin(), c2.nodes().end());
  MapChain out(std::move(pieces), std::move(nodes));
  auto meta = out.nodes();
  locate_critical_points(out, meta);
  return MapChain(out.pieces(), meta);
}

MapChain chain_restrict(const MapChain& c, const Interval& j, double compat) {
  const Interval& dom = c.domain();
  if (!dom.contains(j, compat)) throw DomainError("chain_restrict: interval not inside the chain domain");
  std::vector<ChebPiece> pieces;
  const auto& src = c.pieces();
  // compat is a fraction of the length, the evaluation overhang of the half-length.
  const double overhang = std::max(2 * compat, default_core_tolerances().overhang);
  pieces.push_back(cheb_restrict(src[0], j, src[0].degree(), overhang));
  for (int i = 0; i < c.node_count(); ++i) {
    const ChebPiece& prev = pieces.back();
    const Interval w(prev.eval_unchecked(prev.domain().lo), prev.eval_unchecked(prev.domain().hi));
    pieces.push_back(cheb_restrict(src[i + 1], cube_image(w), src[i + 1].degree(), overhang));
  }
  MapChain out(std::move(pieces), c.nodes());
  auto meta = out.nodes();
  locate_critical_points(out, meta);
  return MapChain(out.pieces(), meta);
}

MapChain chain_canonicalize(const MapChain& c, int degree, const ChainTolerances& tol) {
  std::vector<ChebPiece> pieces = c.pieces();
  std::vector<NodeMeta> nodes = c.nodes();

  auto image_of = [](const ChebPiece& p) {
    return Interval::spanning(p.eval_unchecked(p.domain().lo), p.eval_unchecked(p.domain().hi));
  };
  auto tighten = [&]() {
    for (std::size_t i = 1; i < pieces.size(); ++i) {
      const Interval target = cube_image(image_of(pieces[i - 1]));
      if (relative_mismatch(pieces[i].domain(), target) > tol.tighten)
        pieces[i] = cheb_restrict(pieces[i], target, pieces[i].degree(), tol.lenient_overhang);
    }
  };

  tighten();

  // Absorb cube nodes whose incoming interval stays away from 0.
  for (std::size_t i = 0; i < nodes.size();) {
    const Interval w = image_of(pieces[i]);
    const double gap = tol.removable_gap * w.length();
    if (w.lo > gap || w.hi < -gap) {
      const ChebPiece before = pieces[i];
      const ChebPiece after = pieces[i + 1];
      auto merged = cheb_fit(
          [&](double x) { return after.eval_unchecked(cube(before.eval_unchecked(x))); }, before.domain(), degree);
      merged.set_monotone(Monotone::increasing);
      pieces[i] = std::move(merged);
      pieces.erase(pieces.begin() + static_cast<long>(i) + 1);
      nodes.erase(nodes.begin() + static_cast<long>(i));
      continue;
    }
    nodes[i].near_degenerate = w.lo > tol.threaded_zero * w.length() || w.hi < -tol.threaded_zero * w.length();
    ++i;
  }

  for (auto& p : pieces) p = cheb_refit(p, degree);
  tighten();

  // Pin each incoming interval: right endpoint +1, or left endpoint -1 when
  // the interval lies on the negative side. The compensating scale λ^{-3}
  // goes into the next piece as an exact pre-scaling.
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Interval w = image_of(pieces[i]);
    const double lambda = w.hi > tol.threaded_zero * w.length() ? 1.0 / w.hi : -1.0 / w.lo;
    if (std::abs(lambda - 1) < 1e-15) continue;
    pieces[i] = cheb_affine(pieces[i], 1.0, 0.0, lambda, 0.0);
    pieces[i + 1] = cheb_affine(pieces[i + 1], 1.0 / cube(lambda), 0.0, 1.0, 0.0);
  }

  MapChain out(std::move(pieces), nodes);
  locate_critical_points(out, nodes);
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i].near_degenerate = out.nodes()[i].near_degenerate;
  return MapChain(out.pieces(), nodes);
}

MapChain chain_conjugate_scale(const MapChain& c, double lambda) {
  if (lambda == 0 || !std::isfinite(lambda)) throw DomainError("chain_conjugate_scale: bad scale");
  const auto& src = c.pieces();
  const int k = c.node_count();
  std::vector<ChebPiece> pieces;
  if (k == 0) {
    pieces.push_back(cheb_affine(src[0], lambda, 0.0, 1.0 / lambda, 0.0));
  } else if (lambda > 0) {
    pieces = src;
    pieces.front() = cheb_affine(src.front(), lambda, 0.0, 1.0, 0.0);
    pieces.back() = cheb_affine(src.back(), 1.0, 0.0, 1.0 / lambda, 0.0);
  } else {
    // Negative scale: carry the sign through every cube, since (-w)^3 = -(w^3).
    pieces.push_back(cheb_affine(src[0], lambda, 0.0, -1.0, 0.0));
    for (int i = 1; i < k; ++i) pieces.push_back(cheb_affine(src[i], -1.0, 0.0, -1.0, 0.0));
    pieces.push_back(cheb_affine(src[k], -1.0, 0.0, 1.0 / lambda, 0.0));
  }
  std::vector<NodeMeta> nodes = c.nodes();
  for (auto& n : nodes) n.critical_point /= lambda;
  return MapChain(std::move(pieces), std::move(nodes));
}

MapChain chain_shift_output(const MapChain& c, double d) {
  std::vector<ChebPiece> pieces = c.pieces();
  pieces.back() = cheb_affine(pieces.back(), 1.0, 0.0, 1.0, d);
  return MapChain(std::move(pieces), c.nodes());
}

std::vector<CriticalPoint> chain_critical_points(const MapChain& c, const ChainTolerances& tol) {
  std::vector<CriticalPoint> out;
  const int k = c.node_count();
  for (int i = 0; i < k; ++i) {
    const double loc = zero_location(c, i, tol.removable_gap);
    if (std::isnan(loc)) continue;
    int order = 3;
    int j = i;
    // A zero that survives the next piece enters the next cube at 0 as well.
    while (j + 1 < k) {
      const ChebPiece& next = c.pieces()[j + 1];
      const double scale = std::max(c.piece_image(j + 1).length(), 1e-300);
      if (!next.domain().contains(0.0) || std::abs(next.eval_unchecked(0.0)) > tol.threaded_zero * scale) break;
      order *= 3;
      ++j;
    }
    out.push_back({loc, order});
    i = j;
  }
  return out;
}

Triple chain_to_triple(const MapChain& c) {
  for (const auto& cp : chain_critical_points(c))
    if (cp.order > 3) throw DegenerateCriticalError(cp.location, cp.order);
  if (c.node_count() != 2) throw NodeCountError(c.node_count());
  const double shift = chain_solve(c, 0, 0.0);
  const auto& p = c.pieces();
  return Triple{cheb_affine(p[0], 1.0, shift, 1.0, 0.0), p[1], p[2], shift};
}

MapChain chain_from_triple(const Triple& t) {
  std::vector<NodeMeta> nodes(2);
  nodes[0].origin = "0";
  nodes[1].origin = "c";
  MapChain out({cheb_affine(t.phi1, 1.0, -t.shift, 1.0, 0.0), t.phi2, t.phi3}, nodes);
  locate_critical_points(out, nodes);
  return MapChain(out.pieces(), nodes);
}

int chain_dimension(const std::vector<int>& degrees) {
  int n = 0;
  for (int d : degrees) n += d + 1;
  return n;
}

Eigen::VectorXd chain_coordinates(const MapChain& c, const std::vector<int>& degrees) {
  if (static_cast<int>(degrees.size()) != static_cast<int>(c.pieces().size()))
    throw ShapeError("chain_coordinates: one degree per piece required");
  Eigen::VectorXd v(chain_dimension(degrees));
  int at = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    const auto p = cheb_refit(c.pieces()[i], degrees[i]);
    v.segment(at, degrees[i] + 1) = p.coeffs();
    at += degrees[i] + 1;
  }
  return v;
}

MapChain chain_from_coordinates(const MapChain& tmpl, const Eigen::VectorXd& v) {
  std::vector<int> degrees;
  for (const auto& p : tmpl.pieces()) degrees.push_back(p.degree());
  if (v.size() != chain_dimension(degrees))
    throw ShapeError("chain_from_coordinates: expected " + std::to_string(chain_dimension(degrees)) +
                     " coordinates, got " + std::to_string(v.size()));
  std::vector<ChebPiece> pieces;
  int at = 0;
  for (std::size_t i = 0; i < degrees.size(); ++i) {
    pieces.emplace_back(tmpl.pieces()[i].domain(), v.segment(at, degrees[i] + 1), Monotone::increasing);
    at += degrees[i] + 1;
  }
  return MapChain(std::move(pieces), tmpl.nodes());
}

double chain_compat_defect(const MapChain& c) {
  double worst = 0;
  for (int i = 0; i < c.node_count(); ++i) {
    const Interval w = cube_image(c.piece_image(i));
    const Interval& dom = c.pieces()[i + 1].domain();
    worst = std::max(worst, std::max(dom.excess(w.lo), dom.excess(w.hi)) / dom.length());
  }
  return worst;
}

double chain_min_derivative(const MapChain& c, int samples) {
  const Interval& dom = c.domain();
  double worst = std::numeric_limits<double>::infinity();
  for (int k = 0; k < samples; ++k) {
    const double x = dom.lo + dom.length() * (k + 0.5) / samples;
    worst = std::min(worst, chain_derivative_at(c, x));
  }
  return worst;
}

}  // namespace bicubic
