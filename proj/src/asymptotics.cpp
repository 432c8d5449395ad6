#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rpf/errors.hpp"
#include "rpf/renewal.hpp"

namespace rpf {

double frac_part(double t) { return t - std::floor(t); }

RenewalAsymptotics::RenewalAsymptotics(const RenewalProblem& problem) : problem_(problem) {
  analysis_ = analyze(problem_);
  const double delta = analysis_.delta.delta;
  const int m = minimal_transfer_depth({&problem_.eta, &problem_.xi});
  xi_data_ = spectral_data(combine(1.0, problem_.eta, -delta, problem_.xi), m);
  const auto& lat = analysis_.lattice;
  if (lat.kind == LatticeKind::lattice && lat.zeta) {
    const int mz = minimal_transfer_depth({&problem_.eta, &*lat.zeta});
    zeta_data_ = spectral_data(combine(1.0, problem_.eta, -delta, *lat.zeta), mz);
  }
}

AsymptoticResult RenewalAsymptotics::G(const Word& x_head) const {
  const auto& data = *xi_data_;
  if (static_cast<int>(x_head.size()) < data.depth() || !problem_.shift().admissible(x_head))
    throw InputError(fmt::format("base word must be admissible with at least {} letters", data.depth()));
  AsymptoticResult res;
  res.kind = "non-lattice formula";
  res.lattice_kind = analysis_.lattice.kind;
  res.delta = delta();
  res.depth = data.depth();

  const auto& fs = problem_.f.functions();
  res.time_integrals.reserve(fs.size());
  for (const auto& f : fs) res.time_integrals.push_back(f.is_zero() ? 0.0 : f.integral_exp(-res.delta));

  const int d_nu = std::max({data.depth(), problem_.chi.depth(), problem_.f.depth()});
  const auto nu = data.nu_measure(d_nu);
  double s = 0.0;
  for (std::size_t i = 0; i < nu.index->size(); ++i) {
    const Word& w = nu.index->word(i);
    const double c = problem_.chi.eval(w);
    if (c == 0.0) continue;
    s += c * res.time_integrals[problem_.f.index().index_of(w)] * nu.mass[i];
  }
  res.mean = integrate(problem_.xi, data.mu_measure(std::max(data.depth(), problem_.xi.depth())));
  res.h_x = data.h_at(x_head);
  res.G = res.h_x / res.mean * s;
  return res;
}

namespace {

struct LSum {
  double value = 0.0;
  double tail = 0.0;
  int terms = 0;
};

// sum_l e^{-a l delta} f(a l + c), both directions truncated by tail bounds.
LSum lattice_series(const TimeFunction& f, double a, double c, double delta, double tol) {
  LSum out;
  if (f.is_zero()) return out;
  const double lo = f.support_lo(), hi = f.support_hi();

  std::optional<TailBound> lower, upper;
  if (lo == -kInf) {
    const double rs = f.lower_rate_sup();
    if (!(rs > delta))
      throw UnsupportedInput(fmt::format("lower tail rate {} of f does not exceed delta = {}", rs, delta));
    lower = f.lower_tail(f.lower_rate_strict() ? 0.5 * (rs + delta) : rs);
  }
  if (hi == kInf) {
    const double ri = f.upper_rate_inf();
    if (!(ri < delta))
      throw UnsupportedInput(fmt::format("upper tail rate {} of f is not below delta = {}", ri, delta));
    upper = f.upper_tail(f.upper_rate_strict() ? 0.5 * (ri + delta) : ri);
  }

  constexpr int kMaxTerms = 10'000'000;
  auto term = [&](long long l) { return std::exp(-a * static_cast<double>(l) * delta) * f.eval(a * static_cast<double>(l) + c); };
  const long long l0 = static_cast<long long>(std::floor(-c / a));

  // Upward from l0.
  for (long long l = l0;; ++l) {
    const double tau = a * static_cast<double>(l) + c;
    if (tau >= hi) break;
    out.value += term(l);
    ++out.terms;
    if (upper && tau >= upper->anchor) {
      const double k = a * (upper->rate - delta);  // < 0
      const double rem = upper->constant * std::exp(upper->rate * c + k * static_cast<double>(l + 1)) / -std::expm1(k);
      if (rem <= tol * (1.0 + std::abs(out.value))) {
        out.tail += rem;
        break;
      }
    }
    if (out.terms > kMaxTerms) throw NumericalError("lattice series did not converge");
  }
  // Downward from l0 - 1.
  for (long long l = l0 - 1;; --l) {
    const double tau = a * static_cast<double>(l) + c;
    if (tau < lo) break;
    if (lower && tau < lower->anchor) {
      const double k = a * (lower->rate - delta);  // > 0
      const double rem = lower->constant * std::exp(lower->rate * c + k * static_cast<double>(l)) / -std::expm1(-k);
      if (rem <= tol * (1.0 + std::abs(out.value))) {
        out.tail += rem;
        break;
      }
    }
    out.value += term(l);
    ++out.terms;
    if (out.terms > kMaxTerms) throw NumericalError("lattice series did not converge");
  }
  return out;
}

}  // namespace

LatticeValue lattice_sum(const TimeFunction& f, double a, double c, double delta, double tol) {
  if (!(a > 0.0)) throw InputError("lattice span must be positive");
  const auto ls = lattice_series(f, a, c, delta, tol);
  return LatticeValue{ls.value, a, ls.tail, ls.terms};
}

LatticeValue RenewalAsymptotics::Gtilde(double t, const Word& x_head, double tol) const {
  const auto& lat = analysis_.lattice;
  if (lat.kind != LatticeKind::lattice)
    throw WrongTheorem(fmt::format("xi is classified {}; the periodic asymptote needs lattice xi",
                                   to_string(lat.kind)));
  if (!lat.zeta || !lat.psi || !zeta_data_)
    throw UnsupportedInput("xi is lattice but its values are not in the lattice; supply zeta and psi with "
                           "xi - zeta = psi - psi o sigma");
  const auto& data = *zeta_data_;
  const Potential& zeta = *lat.zeta;
  const Potential& psi = *lat.psi;
  const double a = *lat.span;
  const double delta = this->delta();
  const int need = std::max(data.depth(), psi.depth());
  if (static_cast<int>(x_head.size()) < need || !problem_.shift().admissible(x_head))
    throw InputError(fmt::format("base word must be admissible with at least {} letters", need));

  const double psi_x = psi.eval(x_head);
  const double cx = a * frac_part((t + psi_x) / a);
  const int d_nu = std::max({data.depth(), problem_.chi.depth(), problem_.f.depth(), psi.depth()});
  const auto nu = data.nu_measure(d_nu);
  LatticeValue out;
  out.span = a;
  double s = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < nu.index->size(); ++i) {
    const Word& w = nu.index->word(i);
    const double c = problem_.chi.eval(w);
    if (c == 0.0) continue;
    const auto ls = lattice_series(problem_.f.at(w), a, cx - psi.eval(w), delta, tol);
    s += c * nu.mass[i] * ls.value;
    tail += c * nu.mass[i] * ls.tail;
    out.terms += ls.terms;
  }
  const double mean = integrate(zeta, data.mu_measure(std::max(data.depth(), zeta.depth())));
  const double pre = std::exp(-cx * delta) * a * std::exp(delta * psi_x) / mean * data.h_at(x_head);
  out.value = pre * s;
  out.tail_bound = std::abs(pre) * tail;
  return out;
}

AsymptoticResult compute_G(const RenewalProblem& problem) { return RenewalAsymptotics(problem).G(); }

AsymptoticResult asymptotic_G(const RenewalProblem& problem) {
  const RenewalAsymptotics as(problem);
  const auto& lat = as.analysis().lattice;
  if (lat.kind == LatticeKind::lattice)
    throw WrongTheorem(fmt::format("xi is lattice with span {}; use the periodic lattice asymptote", *lat.span));
  auto res = as.G();
  res.kind = "non-lattice";
  return res;
}

LatticeValue lattice_Gtilde(const RenewalProblem& problem, double t) { return RenewalAsymptotics(problem).Gtilde(t); }

std::vector<std::pair<double, double>> lattice_Gtilde_table(const RenewalProblem& problem, int samples) {
  if (samples < 1) throw InputError("need at least one sample");
  const RenewalAsymptotics as(problem);
  std::vector<std::pair<double, double>> out;
  const auto& lat = as.analysis().lattice;
  if (lat.kind != LatticeKind::lattice) throw WrongTheorem("xi is not lattice");
  const double a = *lat.span;
  for (int k = 0; k < samples; ++k) {
    const double t = a * k / samples;
    out.emplace_back(t, as.Gtilde(t).value);
  }
  return out;
}

CesaroResult cesaro_average(const RenewalProblem& problem, double t_max, int n_points, double tol) {
  if (!(t_max > 0.0)) throw InputError("t_max must be positive");
  if (n_points < 2) throw InputError("need at least 2 points");
  const RenewalAsymptotics as(problem);
  const RenewalEvaluator ev(problem);
  const double delta = as.delta();
  CesaroResult res;
  res.t_max = t_max;
  res.points = n_points;
  res.target = as.G().G;
  const double h = t_max / (n_points - 1);
  double s = 0.0;
  for (int k = 0; k < n_points; ++k) {
    const double t = h * k;
    EvalOptions opts;
    opts.tol = tol * std::exp(delta * t);
    const double v = std::exp(-delta * t) * ev.eval(t, opts).value;
    s += (k == 0 || k == n_points - 1) ? 0.5 * v : v;
  }
  res.value = s * h / t_max;
  return res;
}

}  // namespace rpf
