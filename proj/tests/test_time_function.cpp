#include <doctest.h>

#include <cmath>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "rpf/errors.hpp"
#include "rpf/time_function.hpp"

using namespace rpf;
using boost::math::quadrature::gauss_kronrod;

namespace {

double quad(const std::function<double(double)>& f, double a, double b) {
  return gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-14);
}

TimeFunction mixed() {
  // 2 on [-1, 0), t^2 e^{-t} - 0.5 e^{-3t} on [0, inf)
  return TimeFunction::piecewise({Piece{-1.0, 0.0, {{2.0, 0, 0.0}}},
                                  Piece{0.0, kInf, {{1.0, 2, -1.0}, {-0.5, 0, -3.0}}}});
}

}  // namespace

TEST_SUITE("time_function") {
  TEST_CASE("evaluation and left limits") {
    const auto f = TimeFunction::indicator(0.0, 1.0);
    CHECK(f(0.0) == 1.0);
    CHECK(f(1.0) == 0.0);
    CHECK(f.eval_left_limit(1.0) == 1.0);
    CHECK(f.eval_left_limit(0.0) == 0.0);
    CHECK(f(-0.5) == 0.0);
    const auto g = mixed();
    CHECK(g(-0.5) == 2.0);
    CHECK(g(2.0) == doctest::Approx(4.0 * std::exp(-2.0) - 0.5 * std::exp(-6.0)));
    CHECK(g.eval_left_limit(0.0) == 2.0);
  }

  TEST_CASE("grid interpolation is linear and zero outside") {
    const auto g = TimeFunction::grid(1.0, 0.5, {0.0, 2.0, 1.0});
    CHECK(g(1.25) == doctest::Approx(1.0));
    CHECK(g(1.75) == doctest::Approx(1.5));
    CHECK(g(0.9) == 0.0);
    CHECK(g(2.01) == 0.0);
    CHECK(g.support_lo() == 1.0);
    CHECK(g.integral() == doctest::Approx(0.5 * (1.0 + 1.5)));
  }

  TEST_CASE("integral_exp against quadrature") {
    const auto g = mixed();
    for (double lambda : {0.0, 0.3, -0.4}) {
      const double expect = quad([&](double t) { return std::exp(lambda * t) * 2.0; }, -1.0, 0.0) +
                            quad([&](double t) { return std::exp(lambda * t) * g(t); }, 0.0, 80.0);
      CHECK(g.integral_exp(lambda) == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK_THROWS_AS(g.integral_exp(1.5), InputError);
    CHECK(TimeFunction::exp_decay(1.0).integral() == doctest::Approx(1.0));
    CHECK(TimeFunction::heaviside().integral_exp(-2.0) == doctest::Approx(0.5));
  }

  TEST_CASE("integrate_monomial_exp against quadrature, including tiny exponents") {
    for (int p = 0; p <= 4; ++p)
      for (double k : {-2.0, -1e-9, 0.0, 1e-7, 0.8}) {
        const double a = -1.5, b = 2.0;
        const double expect = quad([&](double t) { return std::pow(t, p) * std::exp(k * t); }, a, b);
        CHECK(integrate_monomial_exp(p, k, a, b) == doctest::Approx(expect).epsilon(1e-13));
      }
    CHECK(integrate_monomial_exp(3, -1.0, 0.0, kInf) == doctest::Approx(6.0));
    CHECK_THROWS_AS(integrate_monomial_exp(0, 0.0, 0.0, kInf), InputError);
  }

  TEST_CASE("derived tail rates") {
    const auto g = mixed();
    CHECK(g.lower_rate_sup() == kInf);
    CHECK(g.upper_rate_inf() == doctest::Approx(-1.0));
    CHECK(g.upper_rate_strict());
    const auto tb = g.upper_tail(-0.5);
    REQUIRE(tb);
    for (double t = tb->anchor; t < tb->anchor + 60.0; t += 0.37)
      CHECK(std::abs(g(t)) <= tb->constant * std::exp(tb->rate * t) * (1 + 1e-12));

    const auto s = TimeFunction::sierpinski_gamma();
    CHECK(s.lower_rate_sup() == doctest::Approx(0.0));
    CHECK_FALSE(s.lower_rate_strict());
    const auto lb = s.lower_tail(0.0);
    REQUIRE(lb);
    for (double t = lb->anchor - 50.0; t < lb->anchor; t += 0.41)
      CHECK(std::abs(s(t)) <= lb->constant * std::exp(lb->rate * t) * (1 + 1e-12));
  }

  TEST_CASE("transformations") {
    const auto g = mixed();
    const auto sh = g.shifted(0.7);
    const auto sc = g.scaled(-3.0);
    const auto te = g.times_exp(0.25);
    for (double t : {-1.3, -0.2, 0.5, 3.0}) {
      CHECK(sh(t) == doctest::Approx(g(t - 0.7)));
      CHECK(sc(t) == doctest::Approx(-3.0 * g(t)));
      CHECK(te(t) == doctest::Approx(std::exp(0.25 * t) * g(t)));
    }
    const auto grid = TimeFunction::grid(0.0, 0.25, {1.0, 3.0, -1.0, 0.5});
    const auto pcs = grid.as_pieces();
    for (double t = -0.1; t < 1.0; t += 0.03) CHECK(pcs(t) == doctest::Approx(grid(t)));
  }

  TEST_CASE("builtins") {
    CHECK(TimeFunction::builtin("heaviside")(3.0) == 1.0);
    CHECK(TimeFunction::builtin("zero").is_zero());
    CHECK(TimeFunction::builtin("gasket")(-10.0) == doctest::Approx(std::sqrt(3.0) / 16.0));
    CHECK_THROWS_AS(TimeFunction::builtin("nope"), InputError);
  }
}
