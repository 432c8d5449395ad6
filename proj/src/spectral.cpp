#include "rpf/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include <fmt/format.h>

#include "rpf/errors.hpp"

namespace rpf {

int minimal_transfer_depth(std::initializer_list<const Potential*> potentials) {
  int m = 1;
  for (const Potential* p : potentials)
    if (p) m = std::max(m, p->depth() - 1);
  return m;
}

TransferMatrix::TransferMatrix(const Potential& phi, int m)
    : phi_(phi), index_(std::make_shared<const CylinderIndex>(phi.shift(), std::max(m, 1))) {
  if (m < std::max(phi.depth() - 1, 1))
    throw InputError(fmt::format("transfer depth {} is too small for a depth-{} potential (need {})", m,
                                 phi.depth(), std::max(phi.depth() - 1, 1)));
  const Subshift& shift = phi.shift();
  row_start_.reserve(index_->size() + 1);
  row_start_.push_back(0);
  Word jw(static_cast<std::size_t>(m) + 1);
  for (std::size_t i = 0; i < index_->size(); ++i) {
    const Word& w = index_->word(i);
    std::copy(w.begin(), w.end(), jw.begin() + 1);
    for (int j = 0; j < shift.alphabet_size(); ++j) {
      if (!shift.allowed(j, w.front())) continue;
      jw[0] = j;
      const std::size_t col = index_->index_of(jw);
      entries_.push_back({static_cast<int>(col), std::exp(phi.eval(jw))});
    }
    row_start_.push_back(entries_.size());
  }
}

TransferMatrix build_transfer(const Potential& phi, int m) { return TransferMatrix(phi, m); }

std::vector<double> TransferMatrix::apply(std::span<const double> g) const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i) {
    double s = 0.0;
    for (const auto& e : row(i)) s += e.value * g[e.col];
    out[i] = s;
  }
  return out;
}

std::vector<double> TransferMatrix::apply_transpose(std::span<const double> v) const {
  std::vector<double> out(size(), 0.0);
  for (std::size_t i = 0; i < size(); ++i)
    for (const auto& e : row(i)) out[e.col] += v[i] * e.value;
  return out;
}

std::vector<std::vector<double>> TransferMatrix::dense() const {
  std::vector<std::vector<double>> d(size(), std::vector<double>(size(), 0.0));
  for (std::size_t i = 0; i < size(); ++i)
    for (const auto& e : row(i)) d[i][e.col] += e.value;
  return d;
}

namespace {

struct PowerResult {
  std::vector<double> vec;
  double lambda = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double sum_abs(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

// Power iteration from the all-ones vector. Iterates stay positive because
// the matrix is nonnegative with a primitive pattern.
template <typename Apply>
PowerResult power_iterate(std::size_t n, Apply&& apply, bool one_norm, const EigenOptions& opts, const char* side) {
  std::vector<double> v(n, 1.0 / static_cast<double>(n));
  PowerResult r;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    std::vector<double> w = apply(v);
    const double lambda = std::accumulate(w.begin(), w.end(), 0.0);  // sum v = 1
    if (!(lambda > 0.0) || !std::isfinite(lambda))
      throw NumericalError(fmt::format("power iteration ({}): eigenvalue estimate {} is not positive", side, lambda));
    double diff = 0.0;
    if (one_norm) {
      for (std::size_t i = 0; i < n; ++i) diff += std::abs(w[i] - lambda * v[i]);
      diff /= lambda * sum_abs(v);
    } else {
      for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(w[i] - lambda * v[i]));
      diff /= lambda * max_abs(v);
    }
    r.lambda = lambda;
    r.residual = diff;
    r.iterations = it;
    if (diff <= opts.residual_tol) {
      r.vec = std::move(v);
      return r;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / lambda;
  }
  throw NumericalError(fmt::format("power iteration ({}) did not converge: residual {:.3e} after {} iterations "
                                   "(target {:.1e}); the spectral gap may be very small",
                                   side, r.residual, r.iterations, opts.residual_tol));
}

// |lambda_2| by power iteration on the complement of the Perron direction.
double second_modulus(const TransferMatrix& t, const std::vector<double>& h, const std::vector<double>& nu,
                      int iterations) {
  const std::size_t n = t.size();
  if (n <= 1) return 0.0;
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  std::vector<double> x(n);
  for (double& xi : x) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    xi = static_cast<double>(state >> 11) * 0x1.0p-53 - 0.5;
  }
  auto project = [&](std::vector<double>& v) {
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) c += nu[i] * v[i];
    for (std::size_t i = 0; i < n; ++i) v[i] -= c * h[i];
  };
  project(x);
  double norm = max_abs(x);
  if (norm == 0.0) return 0.0;
  for (double& v : x) v /= norm;
  double log_sum = 0.0;
  int counted = 0;
  for (int it = 0; it < iterations; ++it) {
    std::vector<double> y = t.apply(x);
    project(y);
    const double g = max_abs(y);
    if (!(g > 1e-300)) return 0.0;
    if (it >= iterations / 2) {
      log_sum += std::log(g);
      ++counted;
    }
    for (std::size_t i = 0; i < n; ++i) x[i] = y[i] / g;
  }
  return std::exp(log_sum / std::max(counted, 1));
}

}  // namespace

SpectralData leading_eigendata(const TransferMatrix& t, const EigenOptions& opts) {
  const std::size_t n = t.size();
  auto right = power_iterate(n, [&](const std::vector<double>& v) { return t.apply(v); }, false, opts, "right");
  auto left = power_iterate(n, [&](const std::vector<double>& v) { return t.apply_transpose(v); }, true, opts, "left");

  SpectralData d{.index = t.shared_index(), .phi = t.potential()};
  // Two-sided quotient nu^T T h / nu^T h: error is the product of the two residuals.
  {
    const auto th = t.apply(right.vec);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      num += left.vec[i] * th[i];
      den += left.vec[i] * right.vec[i];
    }
    d.gamma = num / den;
  }
  d.pressure = std::log(d.gamma);
  d.iterations = right.iterations + left.iterations;

  // nu first to a probability vector, then h so that sum h*nu = 1.
  d.nu = std::move(left.vec);
  const double nu_sum = std::accumulate(d.nu.begin(), d.nu.end(), 0.0);
  for (double& v : d.nu) v /= nu_sum;
  d.h = std::move(right.vec);
  double hn = 0.0;
  for (std::size_t i = 0; i < n; ++i) hn += d.h[i] * d.nu[i];
  for (double& v : d.h) v /= hn;
  d.mu.resize(n);
  for (std::size_t i = 0; i < n; ++i) d.mu[i] = d.h[i] * d.nu[i];

  for (std::size_t i = 0; i < n; ++i)
    if (!(d.h[i] > 0.0) || !(d.nu[i] > 0.0))
      throw NumericalError("Perron vectors are not strictly positive; is the shift primitive?");

  // Residuals against the common gamma.
  const auto lh = t.apply(d.h);
  double rr = 0.0;
  for (std::size_t i = 0; i < n; ++i) rr = std::max(rr, std::abs(lh[i] - d.gamma * d.h[i]));
  d.right_residual = rr / (d.gamma * max_abs(d.h));
  const auto nl = t.apply_transpose(d.nu);
  double lr = 0.0;
  for (std::size_t i = 0; i < n; ++i) lr += std::abs(nl[i] - d.gamma * d.nu[i]);
  d.left_residual = lr / d.gamma;

  d.gap = second_modulus(t, d.h, d.nu, opts.gap_iterations) / d.gamma;
  return d;
}

SpectralData spectral_data(const Potential& phi, int m, const EigenOptions& opts) {
  if (m <= 0) m = minimal_transfer_depth({&phi});
  return leading_eigendata(TransferMatrix(phi, m), opts);
}

double pressure(const Potential& phi, int m) { return spectral_data(phi, m).pressure; }

double SpectralData::h_at(std::span<const int> x) const { return h[index->index_of(x)]; }

double SpectralData::nu_cylinder(const Word& w) const {
  if (w.empty()) throw InputError("cylinder word must be nonempty");
  if (!index->shift().admissible(w)) return 0.0;
  const int m = depth();
  const int n = static_cast<int>(w.size());
  if (n == m) return nu[index->index_of(w)];
  if (n < m) {
    double s = 0.0;
    for (std::size_t i = 0; i < index->size(); ++i) {
      const Word& c = index->word(i);
      if (std::equal(w.begin(), w.end(), c.begin())) s += nu[i];
    }
    return s;
  }
  // nu([w]) = gamma^{-1} e^{phi(w)} nu([sigma w]) once |w| >= m + 1 >= depth(phi).
  double log_factor = 0.0;
  for (int k = 0; k < n - m; ++k) log_factor += phi.eval(std::span<const int>(w).subspan(k)) - pressure;
  return std::exp(log_factor) * nu[index->index_of(std::span<const int>(w).subspan(n - m))];
}

double SpectralData::mu_cylinder(const Word& w) const {
  if (w.empty()) throw InputError("cylinder word must be nonempty");
  if (!index->shift().admissible(w)) return 0.0;
  const int m = depth();
  if (static_cast<int>(w.size()) >= m) return h_at(w) * nu_cylinder(w);
  double s = 0.0;
  for (std::size_t i = 0; i < index->size(); ++i) {
    const Word& c = index->word(i);
    if (std::equal(w.begin(), w.end(), c.begin())) s += mu[i];
  }
  return s;
}

CylinderMeasure SpectralData::nu_measure(int d) const {
  if (d == depth()) return {index, nu};
  auto idx = std::make_shared<const CylinderIndex>(index->shift(), d);
  std::vector<double> mass;
  mass.reserve(idx->size());
  for (const auto& w : idx->words()) mass.push_back(nu_cylinder(w));
  return {idx, std::move(mass)};
}

CylinderMeasure SpectralData::mu_measure(int d) const {
  if (d == depth()) return {index, mu};
  auto idx = std::make_shared<const CylinderIndex>(index->shift(), d);
  std::vector<double> mass;
  mass.reserve(idx->size());
  for (const auto& w : idx->words()) mass.push_back(mu_cylinder(w));
  return {idx, std::move(mass)};
}

DeltaResult solve_delta(const Potential& eta, const Potential& xi, int m, double tol) {
  if (!(tol > 0.0)) throw InputError("delta tolerance must be positive");
  if (!(eta.shift() == xi.shift())) throw InputError("eta and xi live on different subshifts");
  const auto pos = check_eventually_positive(xi);
  if (!pos.eventually_positive)
    throw PreconditionError(fmt::format("xi is not eventually positive: a periodic orbit has mean {}", pos.kappa));
  if (m <= 0) m = minimal_transfer_depth({&eta, &xi});

  DeltaResult res;
  auto pressure_at = [&](double s) {
    ++res.evaluations;
    return rpf::pressure(combine(1.0, eta, -s, xi), m);
  };

  // s -> P(eta - s xi) is strictly decreasing; expand [-1, 1] until it brackets 0.
  double lo = -1.0, hi = 1.0;
  double p_lo = pressure_at(lo), p_hi = pressure_at(hi);
  for (int k = 0; p_lo < 0.0; ++k) {
    if (k > 1100) throw NumericalError("delta bracket expansion failed to the left");
    hi = lo;
    p_hi = p_lo;
    lo *= 2.0;
    p_lo = pressure_at(lo);
  }
  for (int k = 0; p_hi > 0.0; ++k) {
    if (k > 1100) throw NumericalError("delta bracket expansion failed to the right");
    lo = hi;
    p_lo = p_hi;
    hi *= 2.0;
    p_hi = pressure_at(hi);
  }
  res.bracket_lo = lo;
  res.bracket_hi = hi;

  // Illinois regula falsi, with bisection whenever it stalls.
  double s = lo, p = p_lo;
  if (std::abs(p_hi) < std::abs(p_lo)) {
    s = hi;
    p = p_hi;
  }
  int side = 0;
  for (int it = 0; it < 400 && std::abs(p) > tol; ++it) {
    double cand = (lo * p_hi - hi * p_lo) / (p_hi - p_lo);
    if (!(cand > lo && cand < hi) || it % 8 == 7) cand = 0.5 * (lo + hi);
    if (cand <= lo || cand >= hi) break;  // bracket exhausted at double precision
    const double pc = pressure_at(cand);
    const double slack = 1e-13 * (1.0 + std::abs(p_lo) + std::abs(p_hi));
    if (pc > p_lo + slack || pc < p_hi - slack)
      throw NumericalError(fmt::format("pressure is not monotone on [{}, {}]: P({}) = {}", lo, hi, cand, pc));
    s = cand;
    p = pc;
    if (pc > 0.0) {
      lo = cand;
      p_lo = pc;
      if (side == 1) p_hi *= 0.5;
      side = 1;
    } else {
      hi = cand;
      p_hi = pc;
      if (side == -1) p_lo *= 0.5;
      side = -1;
    }
  }
  if (std::abs(p) > tol && std::abs(p) > 1e-14)
    throw NumericalError(fmt::format("delta solver stopped at |P| = {:.3e} > tol {:.1e}", std::abs(p), tol));
  res.delta = s;
  res.pressure_residual = std::abs(p);
  res.gamma_residual = std::abs(std::expm1(p));
  return res;
}

GibbsReport gibbs_constant(const SpectralData& data, int max_length) {
  GibbsReport rep;
  rep.mu = data.mu;
  rep.max_length = max_length;
  const Potential& phi = data.phi;
  const int d = phi.depth();
  const Subshift& shift = data.index->shift();
  double c = 1.0;
  for (int n = 1; n <= max_length; ++n) {
    for (const auto& w : admissible_words(shift, n + d - 1)) {
      double sn = 0.0;
      for (int k = 0; k < n; ++k) sn += phi.eval(std::span<const int>(w).subspan(k));
      const Word head(w.begin(), w.begin() + n);
      const double ratio = data.mu_cylinder(head) / std::exp(sn - n * data.pressure);
      c = std::max({c, ratio, 1.0 / ratio});
    }
  }
  rep.constant = c;
  return rep;
}

GibbsReport gibbs_measure(const Potential& phi, int m) {
  const auto data = spectral_data(phi, m);
  return gibbs_constant(data, data.depth() + 4);
}

double integrate(const Potential& psi, const CylinderMeasure& measure) {
  if (psi.depth() > measure.depth())
    throw InputError(fmt::format("integrand of depth {} needs a measure of depth >= {}, got {}", psi.depth(),
                                 psi.depth(), measure.depth()));
  if (!(psi.shift() == measure.index->shift())) throw InputError("integrand and measure live on different subshifts");
  double s = 0.0;
  for (std::size_t i = 0; i < measure.index->size(); ++i) s += psi.eval(measure.index->word(i)) * measure.mass[i];
  return s;
}

Potential normalize_potential(const Potential& eta, int m) {
  if (m <= 0) m = minimal_transfer_depth({&eta});
  const auto data = spectral_data(eta, m);
  const auto& idx = *data.index;
  return Potential::from_function(eta.shift(), m + 1, [&](const Word& jw) {
    const double h_new = data.h[idx.index_of(jw)];
    const double h_old = data.h[idx.index_of(std::span<const int>(jw).subspan(1))];
    return eta.eval(jw) + std::log(h_new) - std::log(h_old) - data.pressure;
  });
}

}  // namespace rpf
