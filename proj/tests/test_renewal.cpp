#include <doctest.h>

#include <cmath>
#include <map>

#include "rpf/errors.hpp"
#include "rpf/renewal.hpp"

using namespace rpf;

namespace {

const IncidenceMatrix kGolden{{1, 1}, {1, 0}};

RenewalProblem doubling(TimeFunction f = TimeFunction::heaviside()) {
  const auto full = Subshift::full(2);
  return RenewalProblem{Potential::constant(full, 0.0), Potential::constant(full, std::log(2.0)),
                        Potential::constant(full, 1.0), FFamily::uniform(full, std::move(f)), Word{0}, std::nullopt};
}

RenewalProblem key_problem() {
  const auto full = Subshift::full(2);
  return RenewalProblem{Potential::constant(full, std::log(0.5)), Potential(full, 1, {std::log(2.0), std::log(3.0)}),
                        Potential::constant(full, 1.0), FFamily::uniform(full, TimeFunction::exp_decay(1.0)),
                        Word{0}, std::nullopt};
}

RenewalProblem markov_problem() {
  const Subshift g(kGolden);
  return RenewalProblem{Potential(g, 2, {-0.4, -1.1, 0.2}), Potential(g, 2, {1.0, 2.0, 1.0}),
                        Potential(g, 1, {1.0, 0.5}),
                        FFamily(g, 1, {TimeFunction::exp_decay(0.5), TimeFunction::indicator(-1.0, 2.0)}), Word{1, 0},
                        std::nullopt};
}

// Direct sum over all preimages up to level n_max (no aggregation).
double brute_N(const RenewalProblem& p, double t, int n_max) {
  double s = 0.0;
  for (int n = 0; n <= n_max; ++n)
    for (const Word& u : preimage_prefixes(p.shift(), p.x_head, n)) {
      Word y = u;
      y.insert(y.end(), p.x_head.begin(), p.x_head.end());
      s += p.chi.eval(y) * p.f.at(y)(t - birkhoff_sum(p.xi, u, p.x_head)) * std::exp(birkhoff_sum(p.eta, u, p.x_head));
    }
  return s;
}

void check_renewal_equation(const RenewalProblem& p, double tol) {
  const RenewalEvaluator ev(p);
  EvalOptions o;
  o.tol = tol;
  const auto& s = p.shift();
  for (int k = 0; k < 12; ++k) {
    const double t = -1.0 + 0.9 * k;
    const Word& x = p.x_head;
    double rhs = p.chi.eval(x) * p.f.at(x)(t);
    double bound = ev.eval_at(t, x, o).tail_bound;
    for (int j = 0; j < s.alphabet_size(); ++j) {
      if (!s.allowed(j, x[0])) continue;
      Word y{j};
      y.insert(y.end(), x.begin(), x.end());
      const auto r = ev.eval_at(t - p.xi.eval(y), y, o);
      rhs += std::exp(p.eta.eval(y)) * r.value;
      bound += std::exp(p.eta.eval(y)) * r.tail_bound;
    }
    const double lhs = ev.eval_at(t, x, o).value;
    CHECK(std::abs(lhs - rhs) <= std::max(3.0 * tol, bound) * (1.0 + 1e-9) + 1e-12 * std::abs(lhs));
  }
}

}  // namespace

TEST_SUITE("renewal") {
  TEST_CASE("eval_N examples") {
    // Terms with n log 2 <= t: only n = 0 at t = 0.5, n = 0, 1 at t = 1.
    CHECK(eval_N(doubling(), 0.5).value == 1.0);
    CHECK(eval_N(doubling(), 1.0).value == 3.0);
    // t below the support: n = 0 term zero and nothing else.
    CHECK(eval_N(doubling(), -0.1).value == 0.0);
    auto p = doubling();
    p.chi = Potential::constant(p.shift(), 0.0);
    for (double t : {-1.0, 0.0, 3.7}) CHECK(eval_N(p, t).value == 0.0);
  }

  TEST_CASE("eval_N matches brute-force enumeration") {
    for (double t : {0.0, 0.8, 2.9, 4.1}) CHECK(eval_N(doubling(), t).value == doctest::Approx(brute_N(doubling(), t, 8)));
    // Markov problem: indicator family member starts at -1, so brute force
    // must reach depth where S_n > t + 1.
    const auto m = markov_problem();
    for (double t : {-0.5, 1.0, 2.5}) {
      const auto r = eval_N(m, t, 1e-13);
      const double b = brute_N(m, t, 26);
      CHECK(std::abs(r.value - b) <= 1e-12 + 1e-12 * std::abs(b));
    }
  }

  TEST_CASE("Lalley counting sum") {
    for (int k = 0; k <= 20; ++k) {
      const double t = k * std::log(2.0) + 0.1;
      CHECK(eval_N(doubling(), t).value == std::ldexp(1.0, k + 1) - 1.0);
    }
  }

  TEST_CASE("renewal equation on three problems") {
    check_renewal_equation(doubling(), 1e-10);
    check_renewal_equation(key_problem(), 1e-10);
    check_renewal_equation(markov_problem(), 1e-10);
  }

  TEST_CASE("truncation certificate") {
    auto p = key_problem();
    p.f = FFamily::uniform(p.shift(), TimeFunction::piecewise({Piece{-kInf, 0.0, {{1.0, 0, 2.0}}},
                                                               Piece{0.0, kInf, {{1.0, 0, -1.0}}}}));
    const RenewalEvaluator ev(p);
    CHECK_FALSE(ev.support_mode());
    for (double t : {-2.0, 1.0, 6.0}) {
      EvalOptions a, b;
      a.tol = 1e-6;
      b.tol = 5e-7;
      const auto ra = ev.eval(t, a), rb = ev.eval(t, b);
      CHECK(ra.tail_bound <= a.tol);
      CHECK(rb.tail_bound <= b.tol);
      CHECK(std::abs(ra.value - rb.value) <= ra.tail_bound + rb.tail_bound + 1e-15);
    }
  }

  TEST_CASE("analysis rejects non-positive xi") {
    auto p = doubling();
    p.xi = Potential(p.shift(), 1, {-1.0, 3.0});
    CHECK_THROWS_AS(analyze(p), PreconditionError);
  }

  TEST_CASE("dri_check examples") {
    const std::vector<double> meshes{1.0, 0.5, 0.25, 0.125};
    auto r = dri_check(TimeFunction::indicator(0.0, 1.0), 0.0, meshes);
    for (const auto& row : r.rows) {
      CHECK(row.lower == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(row.upper == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(r.consistent);

    const std::vector<double> fine{0.5, 0.1, 0.02, 0.004};
    r = dri_check(TimeFunction::exp_decay(1.0), 0.0, fine);
    for (const auto& row : r.rows) {
      // Closed forms: sum_k h e^{-k h} (k >= 1) and h + that.
      const double h = row.h;
      const double low = h * std::exp(-h) / (1.0 - std::exp(-h));
      CHECK(row.lower == doctest::Approx(low).epsilon(1e-9));
      CHECK(row.upper == doctest::Approx(low + h).epsilon(1e-9));
    }
    CHECK(r.consistent);
    CHECK(r.rows.back().lower == doctest::Approx(1.0).epsilon(1e-2));

    r = dri_check(TimeFunction::heaviside(), 0.0, meshes);
    CHECK(r.upper_infinite);
    CHECK_FALSE(r.consistent);
    CHECK_THROWS_AS(dri_check(TimeFunction::heaviside(), 1.0, std::vector<double>{0.5, 1.0}), InputError);
  }

  TEST_CASE("check_conditions examples") {
    std::vector<double> ts;
    for (int k = -20; k <= 20; ++k) ts.push_back(0.5 * k);
    const std::vector<double> hs{0.5, 0.25, 0.1, 0.05};
    const auto rep = check_conditions(doubling(), ts, hs);
    CHECK(rep.a_holds);
    CHECK(rep.a_integrals[0] == doctest::Approx(1.0 / rep.delta));
    CHECK(rep.b_holds);
    CHECK(rep.b_constant <= 2.0 + 1e-9);
    CHECK(rep.c_holds);
    CHECK(rep.d_holds);

    // sin(e^t) e^{delta t} on [0, 6): g = |sin(e^t)| oscillates ever faster.
    const double delta = 1.0;
    const auto osc = sample_grid([&](double t) { return std::sin(std::exp(t)) * std::exp(delta * t); }, 0.0, 1e-4, 60001);
    const std::vector<double> coarse{0.4, 0.2, 0.1, 0.05};
    const auto d = dri_check(osc, delta, coarse);
    CHECK_FALSE(d.consistent);
    CHECK(d.rows.back().upper - d.rows.back().lower > 0.5);
  }

  TEST_CASE("asymptotic_G examples") {
    const auto key = key_problem();
    const auto g = asymptotic_G(key);
    CHECK(g.delta == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(g.G == doctest::Approx(2.0 / std::log(6.0)).epsilon(1e-12));

    // f independent of y, chi = 1: G = h(x) * int e^{-delta T} f / int xi dmu.
    const auto m = markov_problem();
    auto same = m;
    same.chi = Potential::constant(m.shift(), 1.0);
    same.f = FFamily::uniform(m.shift(), TimeFunction::exp_decay(0.5));
    const RenewalAsymptotics as(same);
    const auto r = as.G();
    CHECK(r.G == doctest::Approx(r.h_x * TimeFunction::exp_decay(0.5).integral_exp(-r.delta) / r.mean));

    // Bernoulli eta: G does not depend on x.
    const RenewalAsymptotics ka(key);
    CHECK(ka.G({0}).G == doctest::Approx(ka.G({1}).G).epsilon(1e-13));

    CHECK_THROWS_AS(asymptotic_G(doubling()), WrongTheorem);
  }

  TEST_CASE("lattice_Gtilde examples") {
    const auto p = doubling();
    const RenewalAsymptotics as(p);
    const double a = std::log(2.0);
    // Oracle: e^{-t} N(t) at large t along a fixed phase.
    for (double t0 : {0.1, 0.35, 0.6}) {
      const double t = t0 + 40 * a;
      const double approx = std::exp(-t) * eval_N(p, t).value;
      CHECK(as.Gtilde(t0).value == doctest::Approx(approx).epsilon(1e-9));
      CHECK(as.Gtilde(t0 + a).value == doctest::Approx(as.Gtilde(t0).value).epsilon(1e-14));
    }
    const auto zero = doubling(TimeFunction::zero());
    CHECK(RenewalAsymptotics(zero).Gtilde(0.3).value == 0.0);
    CHECK_THROWS_AS(lattice_Gtilde(key_problem(), 1.0), WrongTheorem);
  }

  TEST_CASE("lattice convergence along the lattice") {
    const auto p = doubling(TimeFunction::exp_decay(0.5));
    const RenewalAsymptotics as(p);
    const double a = std::log(2.0), t0 = 0.2;
    const double target = as.Gtilde(t0).value;
    double prev = 1e300;
    for (int k = 2; k <= 30; k += 4) {
      const double t = t0 + k * a;
      const double err = std::abs(std::exp(-t * as.delta()) * eval_N(p, t).value - target);
      CHECK(err <= prev);
      prev = err;
    }
    CHECK(prev < 0.01 * target);
  }

  TEST_CASE("non-lattice convergence improves with t") {
    const auto p = key_problem();
    const double mean = 0.5 * (std::log(2.0) + std::log(3.0));
    const double G = asymptotic_G(p).G;
    double prev = 1e300;
    for (double k : {10.0, 20.0, 30.0}) {
      const double err = std::abs(eval_N(p, k * mean).value - G);
      CHECK(err < prev);
      prev = err;
    }
  }

  TEST_CASE("cesaro_average") {
    CHECK(cesaro_average(doubling(TimeFunction::zero()), 5.0, 11).value == 0.0);
    const auto p = key_problem();
    const double G = asymptotic_G(p).G;
    const auto c1 = cesaro_average(p, 20.0, 401);
    const auto c2 = cesaro_average(p, 40.0, 801);
    CHECK(c1.target == doctest::Approx(G));
    CHECK(std::abs(c2.value - G) < std::abs(c1.value - G));
  }

  TEST_CASE("fractional part") {
    CHECK(frac_part(2.25) == 0.25);
    CHECK(frac_part(-0.25) == 0.75);
    CHECK(frac_part(-3.0) == 0.0);
  }
}
