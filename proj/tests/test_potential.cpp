#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "rpf/errors.hpp"
#include "rpf/potential.hpp"

using namespace rpf;

namespace {

const IncidenceMatrix kGolden{{1, 1}, {1, 0}};

// Min over simple cycles of the mean of xi, by plain enumeration on the
// graph of depth graph_depth_for(xi).
double brute_min_cycle_mean(const Potential& xi) {
  const CylinderGraph g(xi.shift(), graph_depth_for(xi));
  const auto w = edge_weights(g, xi);
  double best = 1e300;
  for (const auto& c : enumerate_cycles(g, static_cast<int>(g.node_count())))
    best = std::min(best, cycle_weight(g, c, w) / static_cast<double>(c.size()));
  return best;
}

Potential random_potential(const Subshift& s, int depth, std::mt19937& gen, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  return Potential::from_function(s, depth, [&](const Word&) { return u(gen); });
}

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("eval examples") {
    const auto full = Subshift::full(2);
    CHECK(Potential::constant(full, 1.25).eval(Word{1, 0, 1}) == 1.25);
    const Potential d1(full, 1, {std::log(2.0), std::log(3.0)});
    CHECK(d1.eval(Word{1, 0}) == std::log(3.0));
    const Potential d2(full, 2, {1.0, 2.0, 3.0, 4.0});
    CHECK(d2.eval(Word{0, 1, 0}) == 2.0);
    CHECK_THROWS_AS(d2.eval(Word{0}), InputError);
  }

  TEST_CASE("birkhoff_sum examples") {
    const auto full = Subshift::full(2);
    CHECK(birkhoff_sum(Potential::constant(full, 0.75), {0, 1, 1, 0, 1}, {0}) == doctest::Approx(5 * 0.75));
    CHECK(birkhoff_sum(Potential::constant(full, 0.75), {}, {0}) == 0.0);
    const Potential d1(full, 1, {1.0, 2.0});
    CHECK(birkhoff_sum(d1, {0, 1, 0}, {1, 1}, 3) == 4.0);
    const Subshift g(kGolden);
    CHECK_THROWS_AS(birkhoff_sum(Potential::constant(g, 1.0), {1}, {1}), InputError);
  }

  TEST_CASE("cocycle identity, exhaustive at depth <= 2") {
    std::mt19937 gen(3);
    for (const auto& a : {IncidenceMatrix{{1, 1}, {1, 1}}, kGolden, IncidenceMatrix{{1, 1, 0}, {0, 1, 1}, {1, 0, 1}}}) {
      const Subshift s(a);
      for (int depth = 1; depth <= 2; ++depth) {
        const auto pot = random_potential(s, depth, gen, -1.0, 2.0);
        for (int total = 0; total <= 6; ++total)
          for (const Word& uvx : admissible_words(s, total + 2)) {
            const Word x(uvx.end() - 2, uvx.end());
            for (int n = 0; n <= total; ++n) {
              const Word u(uvx.begin(), uvx.begin() + n);
              const Word v(uvx.begin() + n, uvx.end() - 2);
              Word vx = v;
              vx.insert(vx.end(), x.begin(), x.end());
              Word uv = u;
              uv.insert(uv.end(), v.begin(), v.end());
              CHECK(birkhoff_sum(pot, uv, x) == doctest::Approx(birkhoff_sum(pot, u, vx) + birkhoff_sum(pot, v, x)));
            }
          }
      }
    }
  }

  TEST_CASE("check_eventually_positive examples") {
    const auto full = Subshift::full(2);
    auto r = check_eventually_positive(Potential::constant(full, std::log(2.0)));
    CHECK(r.eventually_positive);
    CHECK(r.kappa == doctest::Approx(std::log(2.0)));
    CHECK(r.m_star == 1);

    CHECK_FALSE(check_eventually_positive(Potential(full, 1, {-1.0, 3.0})).eventually_positive);

    const Subshift s({{0, 1}, {1, 1}});
    r = check_eventually_positive(Potential(s, 1, {-0.1, 1.0}));
    CHECK(r.eventually_positive);
    CHECK(r.kappa == doctest::Approx(std::min((-0.1 + 1.0) / 2.0, 1.0)));
    CHECK(r.kappa == doctest::Approx(0.45));
  }

  TEST_CASE("m_star certifies positivity of every Birkhoff sum from there on") {
    const Subshift s({{0, 1}, {1, 1}});
    const Potential xi(s, 1, {-0.1, 1.0});
    const auto r = check_eventually_positive(xi);
    for (int n = static_cast<int>(r.m_star); n < static_cast<int>(r.m_star) + 4; ++n)
      for (const Word& w : admissible_words(s, n + 1)) {
        const Word u(w.begin(), w.end() - 1), x(w.end() - 1, w.end());
        CHECK(birkhoff_sum(xi, u, x) > 0.0);
      }
    // kappa0 bound on all short sums.
    for (int n = 0; n < 10; ++n)
      for (const Word& w : admissible_words(s, n + 1)) {
        const Word u(w.begin(), w.end() - 1), x(w.end() - 1, w.end());
        CHECK(birkhoff_sum(xi, u, x) >= n * r.kappa_lower - r.kappa0 - 1e-12);
      }
  }

  TEST_CASE("positivity agrees with simple-cycle enumeration") {
    std::mt19937 gen(5);
    int agree = 0, total = 0;
    for (int trial = 0; trial < 200; ++trial) {
      const int m = 2 + static_cast<int>(gen() % 3);
      IncidenceMatrix a(m, std::vector<int>(m));
      for (auto& row : a)
        for (auto& v : row) v = static_cast<int>(gen() % 3 != 0);
      if (!is_primitive(a).primitive) continue;
      const Subshift s(a);
      const int depth = 1 + static_cast<int>(gen() % 2);
      const auto xi = random_potential(s, depth, gen, -1.0, 2.0);
      const double oracle = brute_min_cycle_mean(xi);
      const auto r = check_eventually_positive(xi);
      ++total;
      if (r.eventually_positive == (oracle > 0.0)) ++agree;
      CHECK(r.kappa == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK(agree == total);
    CHECK(total > 50);
  }

  TEST_CASE("detect_lattice examples") {
    const auto full = Subshift::full(2);
    auto r = detect_lattice(Potential::constant(full, std::log(2.0)));
    CHECK(r.kind == LatticeKind::lattice);
    CHECK(*r.span == doctest::Approx(std::log(2.0)));
    REQUIRE(r.psi);
    for (double v : r.psi->values()) CHECK(v == 0.0);

    r = detect_lattice(Potential(full, 1, {std::log(2.0), std::log(3.0)}));
    CHECK(r.kind == LatticeKind::non_lattice);

    r = detect_lattice(Potential(full, 1, {1.0, 2.0}));
    CHECK(r.kind == LatticeKind::lattice);
    CHECK(*r.span == doctest::Approx(1.0));
  }

  TEST_CASE("detect_lattice is scale-equivariant and finds the gcd of integer tables") {
    const auto full = Subshift::full(3);
    const Potential xi(full, 1, {4.0, 6.0, 10.0});
    const auto base = detect_lattice(xi);
    REQUIRE(base.kind == LatticeKind::lattice);
    CHECK(*base.span == doctest::Approx(2.0));
    for (double c : {0.1, 0.37, 3.0, 11.5}) {
      const auto r = detect_lattice(c * xi);
      REQUIRE(r.kind == LatticeKind::lattice);
      CHECK(*r.span == doctest::Approx(c * *base.span).epsilon(1e-9));
    }
  }

  TEST_CASE("lattice data from a coboundary") {
    // xi = zeta + psi - psi o sigma with zeta = log 2 and a depth-1 psi.
    const auto full = Subshift::full(2);
    const Potential psi(full, 1, {0.0, 0.3});
    const Potential zeta = Potential::constant(full, std::log(2.0));
    const Potential xi = Potential::from_function(full, 2, [&](const Word& w) {
      return std::log(2.0) + psi.eval(w) - psi.eval(Word(w.begin() + 1, w.end()));
    });
    const auto r = lattice_from_cohomology(xi, std::log(2.0), zeta, psi);
    CHECK(r.kind == LatticeKind::lattice);
    CHECK(detect_lattice(xi).kind == LatticeKind::lattice);
    CHECK(*detect_lattice(xi).span == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(lattice_from_cohomology(xi, std::log(2.0), zeta, Potential(full, 1, {0.0, 0.2})), InputError);
  }

  TEST_CASE("geometric_potential examples") {
    const std::vector<double> r3{0.5, 0.5, 0.5};
    const auto xi = geometric_potential(r3);
    CHECK(xi.is_constant(1e-15));
    CHECK(xi.eval(Word{2}) == doctest::Approx(std::log(2.0)));
    const std::vector<double> r1{1.0 / std::exp(1.0)};
    CHECK_THROWS_AS(geometric_potential(r1), InputError);
    const std::vector<double> r2{0.5, 0.25};
    const auto x2 = geometric_potential(r2);
    CHECK(x2.eval(Word{0}) == doctest::Approx(std::log(2.0)));
    CHECK(x2.eval(Word{1}) == doctest::Approx(std::log(4.0)));
    const std::vector<double> bad{0.5, 1.5};
    CHECK_THROWS_AS(geometric_potential(bad), InputError);
  }
}
