#include <doctest.h>

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include "rpf/errors.hpp"
#include "rpf/spectral.hpp"

using namespace rpf;

namespace {

const IncidenceMatrix kGolden{{1, 1}, {1, 0}};
const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& d) {
  Eigen::MatrixXd m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t j = 0; j < d.size(); ++j) m(i, j) = d[i][j];
  return m;
}

double dense_radius(const TransferMatrix& t) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(to_eigen(t.dense()), false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Root of 2^-d + 4^-d = 1 by a bracketing root finder.
double moran_root() {
  auto f = [](double d) { return std::pow(2.0, -d) + std::pow(4.0, -d) - 1.0; };
  boost::uintmax_t it = 200;
  auto r = boost::math::tools::toms748_solve(f, 0.1, 2.0, boost::math::tools::eps_tolerance<double>(52), it);
  return 0.5 * (r.first + r.second);
}

// (1/n) log sum_{|w| = n} exp(S_n phi), the finite-n pressure sum.
double pressure_sum(const Potential& phi, int n) {
  const int d = phi.depth();
  double logs = -1e300;
  for (const Word& w : admissible_words(phi.shift(), n + d - 1)) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += phi.eval(std::span<const int>(w).subspan(k));
    logs = std::max(logs, s) + std::log1p(std::exp(std::min(logs, s) - std::max(logs, s)));
  }
  return logs / n;
}

std::vector<Potential> sample_potentials() {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto full = Subshift::full(2);
  const Subshift golden(kGolden);
  const Subshift three({{1, 1, 0}, {0, 1, 1}, {1, 1, 1}});
  return {
      Potential::constant(full, 0.0),
      Potential(full, 1, {std::log(1.0 / 3.0), std::log(2.0 / 3.0)}),
      Potential::from_function(golden, 2, [&](const Word&) { return u(gen); }),
      Potential::from_function(full, 2, [&](const Word&) { return u(gen); }),
      Potential::from_function(three, 3, [&](const Word&) { return u(gen); }),
  };
}

}  // namespace

TEST_SUITE("spectral") {
  TEST_CASE("build_transfer examples") {
    const auto full = Subshift::full(2);
    CHECK(build_transfer(Potential::constant(full, 0.0), 1).dense() ==
          std::vector<std::vector<double>>{{1, 1}, {1, 1}});
    const auto g = build_transfer(Potential::constant(Subshift(kGolden), 0.0), 1);
    CHECK(dense_radius(g) == doctest::Approx(kPhi));
    const Potential d2(full, 2, {0.1, 0.2, 0.3, 0.4});
    const auto t = build_transfer(d2, 1).dense();
    // Row w, column j: e^{phi(j w)}.
    for (int w = 0; w < 2; ++w)
      for (int j = 0; j < 2; ++j) CHECK(t[w][j] == doctest::Approx(std::exp(d2.eval(Word{j, w}))));
    CHECK_THROWS_AS(build_transfer(Potential(full, 3, std::vector<double>(8, 0.0)), 1), InputError);
  }

  TEST_CASE("leading_eigendata examples") {
    const auto full = Subshift::full(2);
    auto d = spectral_data(Potential::constant(full, 0.0));
    CHECK(d.gamma == doctest::Approx(2.0).epsilon(1e-14));
    for (double v : d.h) CHECK(v == doctest::Approx(1.0));
    for (double v : d.nu) CHECK(v == doctest::Approx(0.5));

    d = spectral_data(Potential(full, 1, {std::log(1.0 / 3.0), std::log(2.0 / 3.0)}));
    CHECK(d.gamma == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(d.nu[0] == doctest::Approx(1.0 / 3.0));
    CHECK(d.nu[1] == doctest::Approx(2.0 / 3.0));
    for (double v : d.h) CHECK(v == doctest::Approx(1.0));

    d = spectral_data(Potential::constant(Subshift(kGolden), 0.0));
    CHECK(d.gamma == doctest::Approx(kPhi).epsilon(1e-14));
  }

  TEST_CASE("eigendata invariants on sample potentials") {
    for (const auto& phi : sample_potentials()) {
      const auto d = spectral_data(phi);
      const TransferMatrix t(phi, d.depth());
      CHECK(d.gamma == doctest::Approx(dense_radius(t)).epsilon(1e-12));
      const auto lh = t.apply(d.h);
      const auto nl = t.apply_transpose(d.nu);
      double rh = 0.0, hmax = 0.0, rn = 0.0, nsum = 0.0, hn = 0.0, msum = 0.0;
      for (std::size_t i = 0; i < d.h.size(); ++i) {
        rh = std::max(rh, std::abs(lh[i] - d.gamma * d.h[i]));
        hmax = std::max(hmax, std::abs(d.h[i]));
        rn += std::abs(nl[i] - d.gamma * d.nu[i]);
        nsum += d.nu[i];
        hn += d.h[i] * d.nu[i];
        msum += d.mu[i];
        CHECK(d.h[i] > 0.0);
      }
      CHECK(rh <= 1e-12 * d.gamma * hmax);
      CHECK(rn <= 1e-12 * d.gamma);
      CHECK(nsum == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(hn == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(msum == doctest::Approx(1.0).epsilon(1e-14));
      CHECK(d.gap < 1.0);
    }
  }

  TEST_CASE("pressure examples") {
    const auto full = Subshift::full(2);
    CHECK(pressure(Potential::constant(full, 0.0)) == doctest::Approx(std::log(2.0)));
    CHECK(pressure(Potential::constant(Subshift::full(3), 0.7)) == doctest::Approx(std::log(3.0) + 0.7));
    const std::vector<double> r{0.5, 0.5, 0.5};
    const auto xi = geometric_potential(r);
    const double D = std::log(3.0) / std::log(2.0);
    CHECK(std::abs(pressure((-D) * xi)) < 1e-13);
  }

  TEST_CASE("pressure agrees with the finite-n word sums within O(1/n)") {
    for (const auto& phi : sample_potentials()) {
      const double p = pressure(phi);
      double prev = 1e300;
      for (int n : {4, 8, 12}) {
        const double err = std::abs(pressure_sum(phi, n) - p);
        CHECK(err * n < 4.0);
        CHECK(err <= prev + 1e-12);
        prev = err;
      }
    }
  }

  TEST_CASE("solve_delta examples") {
    const auto full = Subshift::full(2);
    auto r = solve_delta(Potential::constant(full, 0.0), Potential::constant(full, std::log(2.0)));
    CHECK(r.delta == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.pressure_residual <= 1e-12);

    const std::vector<double> ratios{0.5, 0.5, 0.5};
    const auto xi = geometric_potential(ratios);
    r = solve_delta((-2.0) * xi, xi);
    CHECK(r.delta == doctest::Approx(std::log(3.0) / std::log(2.0) - 2.0).epsilon(1e-12));

    r = solve_delta(Potential::constant(full, 0.0), Potential(full, 1, {std::log(2.0), std::log(4.0)}));
    CHECK(std::abs(r.delta - moran_root()) < 1e-12);
    CHECK(std::abs(r.delta - std::log2(kPhi)) < 1e-12);

    CHECK_THROWS_AS(solve_delta(Potential::constant(full, 0.0), Potential(full, 1, {-1.0, 3.0})), PreconditionError);
  }

  TEST_CASE("pressure is strictly increasing along eventually positive xi") {
    const auto pots = sample_potentials();
    const Subshift golden(kGolden);
    const Potential xi(golden, 2, {0.5, 1.5, 0.8});
    const Potential& eta = pots[2];
    double prev = -1e300;
    for (int k = 0; k < 10; ++k) {
      const double s = -2.0 + 0.4 * k;
      const double p = pressure(combine(1.0, eta, s, xi));
      CHECK(p > prev);
      prev = p;
    }
  }

  TEST_CASE("pressure derivative equals the integral against the Gibbs measure") {
    const auto pots = sample_potentials();
    std::mt19937 gen(23);
    std::uniform_real_distribution<double> u(0.2, 1.5);
    for (const auto& eta : pots) {
      const Potential xi = Potential::from_function(eta.shift(), 2, [&](const Word&) { return u(gen); });
      for (double t : {-0.7, 0.0, 0.4}) {
        const double h = 1e-5;
        const double fd = (pressure(combine(1.0, eta, t + h, xi)) - pressure(combine(1.0, eta, t - h, xi))) / (2 * h);
        const auto d = spectral_data(combine(1.0, eta, t, xi));
        CHECK(std::abs(fd - integrate(xi, d.mu_measure(std::max(d.depth(), 2)))) < 1e-6);
      }
    }
  }

  TEST_CASE("depth stability") {
    for (const auto& phi : sample_potentials()) {
      const int m = std::max(phi.depth() - 1, 1);
      const auto a = spectral_data(phi, m);
      const auto b = spectral_data(phi, m + 1);
      CHECK(a.gamma == doctest::Approx(b.gamma).epsilon(1e-13));
      std::vector<double> nu(a.nu.size(), 0.0), mu(a.mu.size(), 0.0);
      for (std::size_t i = 0; i < b.index->size(); ++i) {
        const auto k = a.index->index_of(b.index->word(i));
        nu[k] += b.nu[i];
        mu[k] += b.mu[i];
        // h of a depth-m function is the same at depth m+1.
        CHECK(b.h[i] == doctest::Approx(a.h[k]).epsilon(1e-12));
      }
      for (std::size_t k = 0; k < nu.size(); ++k) {
        CHECK(std::abs(nu[k] - a.nu[k]) < 1e-12);
        CHECK(std::abs(mu[k] - a.mu[k]) < 1e-12);
      }
    }
  }

  TEST_CASE("depth-2 transfer matrix at m = 1 is the Markov matrix B(s)") {
    const Subshift golden(kGolden);
    const Potential eta(golden, 2, {-0.3, -1.2, 0.0});
    const Potential xi(golden, 2, {1.0, 2.0, 1.0});
    const double s = -0.6;
    const auto t = build_transfer(combine(1.0, eta, s, xi), 1).dense();
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double expect = golden.allowed(j, i) ? std::exp(eta.eval(Word{j, i}) + s * xi.eval(Word{j, i})) : 0.0;
        CHECK(t[i][j] == doctest::Approx(expect));
      }
  }

  TEST_CASE("gibbs_measure examples and inequality") {
    const auto full = Subshift::full(2);
    auto g = gibbs_measure(Potential(full, 1, {std::log(0.3), std::log(0.7)}));
    CHECK(g.mu[0] == doctest::Approx(0.3));
    CHECK(g.mu[1] == doctest::Approx(0.7));
    CHECK(g.constant == doctest::Approx(1.0));

    const auto d0 = spectral_data(Potential::constant(full, 0.0));
    CHECK(d0.mu_cylinder({0, 1}) == doctest::Approx(0.25));
    CHECK(gibbs_measure(Potential::constant(full, 0.0)).constant == doctest::Approx(1.0));

    // Golden mean: mu = h * nu from the exact 2x2 eigenvectors.
    const auto gm = gibbs_measure(Potential::constant(Subshift(kGolden), 0.0));
    const Eigen::Vector2d h(kPhi, 1.0), nu(kPhi, 1.0);
    const double z = h.dot(nu);
    CHECK(gm.mu[0] == doctest::Approx(h[0] * nu[0] / z));
    CHECK(gm.mu[1] == doctest::Approx(h[1] * nu[1] / z));

    for (const auto& phi : sample_potentials()) {
      const auto d = spectral_data(phi);
      const auto rep = gibbs_constant(d, d.depth() + 4);
      for (int n = 1; n <= d.depth() + 4; ++n)
        for (const Word& w : admissible_words(phi.shift(), n + phi.depth() - 1)) {
          const Word head(w.begin(), w.begin() + n);
          double s = 0.0;
          for (int k = 0; k < n; ++k) s += phi.eval(std::span<const int>(w).subspan(k));
          const double ratio = d.mu_cylinder(head) / std::exp(s - n * d.pressure);
          CHECK(ratio >= 1.0 / rep.constant * (1 - 1e-12));
          CHECK(ratio <= rep.constant * (1 + 1e-12));
        }
    }
  }

  TEST_CASE("integrate examples") {
    const auto full = Subshift::full(2);
    const auto d = spectral_data(Potential(full, 2, {0.1, -0.4, 0.3, 0.2}));
    CHECK(integrate(Potential::constant(full, 2.5), d.mu_measure(1)) == doctest::Approx(2.5));
    CHECK(integrate(Potential::constant(full, std::log(2.0)), d.mu_measure(1)) == doctest::Approx(std::log(2.0)));
    const Potential xi(full, 1, {std::log(2.0), std::log(4.0)});
    const auto r = solve_delta(Potential::constant(full, 0.0), xi);
    const auto e = spectral_data((-r.delta) * xi);
    const double p = std::pow(2.0, -r.delta);
    CHECK(integrate(xi, e.mu_measure(1)) == doctest::Approx(p * std::log(2.0) + (1 - p) * std::log(4.0)));
    CHECK_THROWS_AS(integrate(Potential(full, 3, std::vector<double>(8, 1.0)), d.mu_measure(1)), InputError);
  }

  TEST_CASE("normalize_potential examples") {
    const auto full = Subshift::full(2);
    const auto n0 = normalize_potential(Potential::constant(full, 0.0));
    for (double v : n0.values()) CHECK(v == doctest::Approx(std::log(0.5)));
    const auto n1 = normalize_potential(n0);
    for (const Word& w : admissible_words(full, n1.depth())) CHECK(n1.eval(w) == doctest::Approx(n0.eval(w)).epsilon(1e-12));

    // Parry transitions: P(j | i) = A(j,i) v_j / (phi v_i) with v = (phi, 1).
    const Subshift golden(kGolden);
    const auto parry = normalize_potential(Potential::constant(golden, 0.0));
    const double v[2] = {kPhi, 1.0};
    for (const Word& w : admissible_words(golden, 2))
      CHECK(std::exp(parry.eval(w)) == doctest::Approx(v[w[0]] / (kPhi * v[w[1]])));
    for (const auto& phi : sample_potentials()) {
      const auto n = normalize_potential(phi);
      for (const Word& w : admissible_words(phi.shift(), n.depth() - 1)) {
        double s = 0.0;
        for (int j = 0; j < phi.shift().alphabet_size(); ++j) {
          if (!phi.shift().allowed(j, w[0])) continue;
          Word jw{j};
          jw.insert(jw.end(), w.begin(), w.end());
          s += std::exp(n.eval(jw));
        }
        CHECK(std::abs(s - 1.0) <= 1e-12);
      }
    }
  }
}
