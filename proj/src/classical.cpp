#include "rpf/classical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "rpf/errors.hpp"
#include "rpf/spectral.hpp"

namespace rpf {

void KeyRenewalSpec::validate() const {
  if (p.size() < 2) throw InputError("key renewal needs M >= 2");
  if (p.size() != s.size()) throw InputError("p and s must have the same length");
  double sum = 0.0;
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) throw InputError(fmt::format("probability {} is outside (0,1)", v));
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw InputError(fmt::format("probabilities sum to {}, not 1", sum));
  for (double v : s)
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError(fmt::format("interarrival {} must be positive", v));
}

KeyRenewalResult key_renewal_asymptote(const KeyRenewalSpec& spec) {
  spec.validate();
  KeyRenewalResult r;
  for (std::size_t i = 0; i < spec.p.size(); ++i) r.mean += spec.p[i] * spec.s[i];
  r.integral = spec.z.integral();
  const double g = real_gcd(spec.s, 1e-9);
  if (g >= 1e3 * 1e-9) {
    const bool all = std::all_of(spec.s.begin(), spec.s.end(), [&](double v) {
      return std::abs(v - std::round(v / g) * g) <= 1e-9 * std::max(1.0, v);
    });
    if (all) {
      r.lattice = true;
      r.span = g;
    }
  }
  r.nonlattice_value = r.integral / r.mean;
  r.average = r.nonlattice_value;
  return r;
}

double key_renewal_lattice_value(const KeyRenewalSpec& spec, double t) {
  const auto r = key_renewal_asymptote(spec);
  if (!r.lattice) throw WrongTheorem("interarrival times are not lattice");
  return *r.span / r.mean * lattice_sum(spec.z, *r.span, t, 0.0).value;
}

RenewalProblem embed_key_renewal(const KeyRenewalSpec& spec, double delta_embed) {
  spec.validate();
  const int m = static_cast<int>(spec.p.size());
  const Subshift shift = Subshift::full(m);
  std::vector<double> eta(spec.p.size());
  for (std::size_t i = 0; i < eta.size(); ++i) eta[i] = std::log(spec.p[i]) + delta_embed * spec.s[i];
  return RenewalProblem{Potential(shift, 1, eta), Potential(shift, 1, spec.s), Potential::constant(shift, 1.0),
                        FFamily::uniform(shift, spec.z.times_exp(delta_embed)), Word{0}, std::nullopt};
}

void MarkovRenewalSpec::validate() const {
  const std::size_t m = a.size();
  if (m < 2) throw InputError("Markov renewal needs at least 2 states");
  if (eta_t.size() != m || xi_t.size() != m || f.size() != m) throw InputError("Markov spec shapes disagree");
  for (std::size_t j = 0; j < m; ++j)
    if (eta_t[j].size() != m || xi_t[j].size() != m) throw InputError("Markov spec tables must be square");
  if (!is_primitive(a).primitive) throw InputError("the kernel matrix F is not primitive");
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i)
      if (a[j][i] && (!std::isfinite(eta_t[j][i]) || !std::isfinite(xi_t[j][i])))
        throw InputError("kernel entries must be finite");
}

std::vector<std::vector<double>> MarkovRenewalSpec::b_matrix(double s) const {
  const std::size_t m = a.size();
  std::vector<std::vector<double>> b(m, std::vector<double>(m, 0.0));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j)
      if (a[j][i]) b[i][j] = std::exp(eta_t[j][i] + s * xi_t[j][i]);
  return b;
}

namespace {

Eigen::MatrixXd to_eigen(const std::vector<std::vector<double>>& b) {
  const auto m = static_cast<Eigen::Index>(b.size());
  Eigen::MatrixXd out(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) out(i, j) = b[i][j];
  return out;
}

double spectral_radius(const Eigen::MatrixXd& b) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(b, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

// Perron vector of b (eigenvalue with the largest real part), made positive.
std::vector<double> perron_vector(const Eigen::MatrixXd& b) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(b, true);
  Eigen::Index k = 0;
  es.eigenvalues().real().maxCoeff(&k);
  Eigen::VectorXd v = es.eigenvectors().col(k).real();
  if (v.sum() < 0.0) v = -v;
  std::vector<double> out(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v(i) > 0.0)) throw NumericalError("Perron vector of B(-delta) is not strictly positive");
    out[static_cast<std::size_t>(i)] = v(i);
  }
  return out;
}

}  // namespace

MarkovRenewalResult markov_renewal_G(const MarkovRenewalSpec& spec, double tol) {
  spec.validate();
  const std::size_t m = spec.a.size();
  // Eventual positivity of xi~ (needed for monotonicity in delta).
  const Subshift shift(spec.a);
  const Potential xi = Potential::from_function(shift, 2, [&](const Word& w) { return spec.xi_t[w[0]][w[1]]; });
  if (!check_eventually_positive(xi).eventually_positive)
    throw PreconditionError("interarrival table is not eventually positive");

  auto log_rho = [&](double d) { return std::log(spectral_radius(to_eigen(spec.b_matrix(-d)))); };
  double lo = -1.0, hi = 1.0;
  for (int k = 0; log_rho(lo) < 0.0; ++k) {
    if (k > 1100) throw NumericalError("delta bracket expansion failed");
    hi = lo;
    lo *= 2.0;
  }
  for (int k = 0; log_rho(hi) > 0.0; ++k) {
    if (k > 1100) throw NumericalError("delta bracket expansion failed");
    lo = hi;
    hi *= 2.0;
  }
  for (int it = 0; it < 400 && hi - lo > tol * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (log_rho(mid) > 0.0 ? lo : hi) = mid;
  }
  MarkovRenewalResult res;
  res.delta = 0.5 * (lo + hi);
  const Eigen::MatrixXd b = to_eigen(spec.b_matrix(-res.delta));
  res.radius_residual = std::abs(spectral_radius(b) - 1.0);
  res.h = perron_vector(b);
  res.nu = perron_vector(b.transpose());

  std::vector<double> integrals(m);
  for (std::size_t j = 0; j < m; ++j) integrals[j] = spec.f[j].is_zero() ? 0.0 : spec.f[j].integral_exp(-res.delta);
  double num = 0.0;
  for (std::size_t j = 0; j < m; ++j) num += res.nu[j] * integrals[j];
  double den = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t j = 0; j < m; ++j)
      if (spec.a[j][k]) den += res.nu[k] * res.h[j] * spec.xi_t[j][k] * b(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
  res.G.resize(m);
  for (std::size_t i = 0; i < m; ++i) res.G[i] = res.h[i] * num / den;
  return res;
}

RenewalProblem embed_markov(const MarkovRenewalSpec& spec, int state) {
  spec.validate();
  if (state < 0 || state >= static_cast<int>(spec.a.size())) throw InputError("state out of range");
  const Subshift shift(spec.a);
  const Potential eta = Potential::from_function(shift, 2, [&](const Word& w) { return spec.eta_t[w[0]][w[1]]; });
  const Potential xi = Potential::from_function(shift, 2, [&](const Word& w) { return spec.xi_t[w[0]][w[1]]; });
  return RenewalProblem{eta, xi, Potential::constant(shift, 1.0), FFamily(shift, 1, spec.f), Word{state},
                        std::nullopt};
}

double lalley_counting_asymptote(const Potential& xi, const Potential& chi, const LatticeReport& lattice,
                                 const Word& x_head, double t) {
  if (lattice.kind != LatticeKind::lattice)
    throw WrongTheorem(fmt::format("the counting corollary needs lattice xi, got {}", to_string(lattice.kind)));
  if (!lattice.zeta || !lattice.psi || !lattice.span) throw UnsupportedInput("lattice data needs span, zeta and psi");
  if (!(chi.shift() == xi.shift())) throw InputError("chi and xi live on different subshifts");
  for (double v : chi.values())
    if (v < 0.0) throw InputError("chi must be nonnegative");
  const Potential& zeta = *lattice.zeta;
  const Potential& psi = *lattice.psi;
  const double a = *lattice.span;
  const Potential zero = Potential::constant(xi.shift(), 0.0);
  const double delta = solve_delta(zero, zeta).delta;
  const auto data = spectral_data((-delta) * zeta);
  const int need = std::max(data.depth(), psi.depth());
  if (static_cast<int>(x_head.size()) < need || !xi.shift().admissible(x_head))
    throw InputError(fmt::format("base word must be admissible with at least {} letters", need));
  const double psi_x = psi.eval(x_head);
  const auto nu = data.nu_measure(std::max({data.depth(), chi.depth(), psi.depth()}));
  double s = 0.0;
  for (std::size_t i = 0; i < nu.index->size(); ++i) {
    const Word& w = nu.index->word(i);
    const double c = chi.eval(w);
    if (c == 0.0) continue;
    s += c * std::exp(delta * a * std::floor(t / a - (psi.eval(w) - psi_x) / a)) * nu.mass[i];
  }
  const double mean = integrate(zeta, data.mu_measure(std::max(data.depth(), zeta.depth())));
  return a * data.h_at(x_head) * s / (-std::expm1(-delta * a) * mean);
}

}  // namespace rpf
