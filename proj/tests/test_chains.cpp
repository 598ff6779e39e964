#include <doctest.h>

#include <cmath>

#include "bicubic/chains.hpp"

using namespace bicubic;

namespace {

ChebPiece affine(double a, double b, Interval dom, int degree = 8) {
  return cheb_fit([=](double x) { return a * x + b; }, dom, degree, Monotone::increasing);
}

// D2 ∘ q ∘ D1 ∘ q ∘ D0 with critical points at 0 and at D0^{-1}(-(shift)^{1/3}).
MapChain two_node_chain(double shift) {
  const Interval u(-1.0, 1.0);
  const auto d0 = cheb_fit([](double x) { return x + 0.1 * std::sin(x); }, u, 24, Monotone::increasing);
  const Interval w1 = Interval::spanning(std::pow(d0(-1.0), 3), std::pow(d0(1.0), 3));
  const auto d1 = affine(1.0, shift, w1);
  const Interval w2 = Interval::spanning(std::pow(d1(w1.lo), 3), std::pow(d1(w1.hi), 3));
  const auto d2 = cheb_fit([](double y) { return 0.5 * y + 0.05 * y * y + 0.2; }, w2, 24, Monotone::increasing);
  return MapChain({d0, d1, d2}, std::vector<NodeMeta>(2));
}

}  // namespace

TEST_CASE("chain evaluation is the explicit composition") {
  const MapChain c = two_node_chain(0.3);
  for (double x : {-0.9, -0.4, 0.0, 0.25, 0.8}) {
    const double d0 = x + 0.1 * std::sin(x);
    const double d1 = std::pow(d0, 3) + 0.3;
    const double y = std::pow(d1, 3);
    CHECK(std::abs(chain_eval(c, x) - (0.5 * y + 0.05 * y * y + 0.2)) < 1e-13);
  }
}

TEST_CASE("two cubic critical points are reported with order 3") {
  const auto cps = chain_critical_points(two_node_chain(0.3));
  REQUIRE(cps.size() == 2);
  for (const auto& cp : cps) CHECK(cp.order == 3);
  CHECK(std::abs(cps[0].location) < 1e-14);
  // second: d0(x)^3 = -0.3
  const double x = cps[1].location;
  CHECK(std::abs(std::pow(x + 0.1 * std::sin(x), 3) + 0.3) < 1e-12);
}

TEST_CASE("collided critical points give order 9 and no triple") {
  const MapChain c = two_node_chain(0.0);
  const auto cps = chain_critical_points(c);
  REQUIRE(cps.size() == 1);
  CHECK(cps[0].order == 9);
  CHECK(std::abs(cps[0].location) < 1e-14);
  CHECK_THROWS_AS(chain_to_triple(c), DegenerateCriticalError);
  try {
    chain_to_triple(c);
  } catch (const DegenerateCriticalError& e) {
    CHECK(e.order == 9);
  }
}

TEST_CASE("triple round trip") {
  const MapChain c = two_node_chain(0.3);
  const Triple t = chain_to_triple(c);
  CHECK(std::abs(t.phi1(0.0)) < 1e-14);
  const MapChain back = chain_from_triple(t);
  for (int i = 0; i <= 20; ++i) {
    const double x = -0.95 + 1.9 * i / 20.0;
    CHECK(std::abs(chain_eval(back, x) - chain_eval(c, x)) < 1e-12);
  }
}

TEST_CASE("coordinates round trip on the template") {
  const MapChain c = two_node_chain(0.3);
  std::vector<int> degs;
  for (const auto& p : c.pieces()) degs.push_back(p.degree());
  const auto v = chain_coordinates(c, degs);
  CHECK(v.size() == chain_dimension(degs));
  const MapChain back = chain_from_coordinates(c, v);
  for (double x : {-0.7, 0.1, 0.6}) CHECK(chain_eval(back, x) == chain_eval(c, x));
}

TEST_CASE("a node whose input stays away from zero is absorbed") {
  const Interval u(0.5, 1.0);
  const auto d0 = affine(1.0, 0.0, u);
  const auto d1 = affine(2.0, 0.1, Interval(0.125, 1.0));
  const MapChain c({d0, d1}, std::vector<NodeMeta>(1));
  const MapChain k = chain_canonicalize(c, 32);
  CHECK(k.node_count() == 0);
  for (double x : {0.5, 0.7, 1.0}) CHECK(std::abs(chain_eval(k, x) - (2 * x * x * x + 0.1)) < 1e-12);
}

TEST_CASE("composition cuts later pieces to the reached range") {
  // The last piece of c1 is stored on [-1, 1] but only [-1/8, 1/8] is reached.
  const MapChain c1({affine(0.5, 0.0, Interval(-1.0, 1.0)), affine(1.0, 0.0, Interval(-1.0, 1.0))},
                    std::vector<NodeMeta>(1));
  const MapChain c2 = MapChain::single(
      cheb_fit([](double y) { return y + y * y; }, Interval(-0.2, 0.2), 8, Monotone::increasing));
  const MapChain c = chain_compose(c2, c1, 16);
  for (double x : {-1.0, -0.3, 0.0, 0.6, 1.0}) {
    const double y = std::pow(0.5 * x, 3);
    CHECK(std::abs(chain_eval(c, x) - (y + y * y)) < 1e-14);
  }
  const MapChain far = MapChain::single(affine(1.0, 0.0, Interval(0.5, 1.0)));
  CHECK_THROWS_AS(chain_compose(far, c1, 16), ChainIntegrityError);
}

TEST_CASE("chains reject mismatched shapes and decreasing pieces") {
  const auto up = affine(1.0, 0.0, Interval(-1.0, 1.0));
  CHECK_THROWS_AS(MapChain({up, up}, {}), ShapeError);
  const auto down = cheb_fit([](double x) { return -x; }, Interval(-1.0, 1.0), 4);
  CHECK_THROWS_AS(MapChain::single(down), ChainIntegrityError);
}
