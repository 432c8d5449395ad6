#include "rpf/time_function.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "rpf/errors.hpp"

namespace rpf {

namespace {

bool nonzero(const Piece& p) {
  return std::any_of(p.terms.begin(), p.terms.end(), [](const ExpTerm& e) { return e.c != 0.0; });
}

double eval_terms(const std::vector<ExpTerm>& terms, double t) {
  double s = 0.0;
  for (const auto& e : terms) {
    if (e.c == 0.0) continue;
    const double poly = e.p == 0 ? 1.0 : std::pow(t, e.p);
    s += e.c * poly * std::exp(e.q * t);
  }
  return s;
}

// sup over u >= u_min of |u|^p e^{-k u}, k >= 0 (k == 0 only with p == 0).
double sup_poly_exp(int p, double k, double u_min) {
  if (p == 0) return k == 0.0 ? 1.0 : std::exp(-k * u_min);
  auto g = [&](double u) { return std::pow(std::abs(u), p) * std::exp(-k * u); };
  double best = g(u_min);
  const double u_star = p / k;
  if (u_star >= std::max(u_min, 0.0)) best = std::max(best, g(u_star));
  return best;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

double integrate_monomial_exp(int p, double k, double a, double b) {
  if (p < 0) throw InputError("negative polynomial degree");
  if (!(a < b)) return 0.0;
  const bool a_inf = std::isinf(a), b_inf = std::isinf(b);
  if ((a_inf && !(k > 0.0)) || (b_inf && !(k < 0.0)))
    throw InputError(fmt::format("integral of t^{} e^({} t) over [{}, {}) diverges", p, k, a, b));
  if (!a_inf && !b_inf && std::abs(k) * std::max(std::abs(a), std::abs(b)) < 1e-3) {
    // Power series in k avoids cancellation in the closed form.
    double sum = 0.0, coef = 1.0;
    for (int n = 0; n < 60; ++n) {
      const int e = p + n + 1;
      const double term = coef * (std::pow(b, e) - std::pow(a, e)) / e;
      sum += term;
      if (n > 2 && std::abs(term) <= 1e-18 * std::abs(sum)) break;
      coef *= k / (n + 1);
    }
    return sum;
  }
  if (k == 0.0) return (std::pow(b, p + 1) - std::pow(a, p + 1)) / (p + 1);
  // F(t) = e^{kt} sum_i (-1)^i p!/(p-i)! t^{p-i} / k^{i+1}
  auto antideriv = [&](double t) {
    if (std::isinf(t)) return 0.0;
    double s = 0.0, fall = 1.0;
    for (int i = 0; i <= p; ++i) {
      s += ((i % 2) ? -1.0 : 1.0) * fall * std::pow(t, p - i) / std::pow(k, i + 1);
      fall *= (p - i);
    }
    return std::exp(k * t) * s;
  };
  return antideriv(b) - antideriv(a);
}

TimeFunction TimeFunction::piecewise(std::vector<Piece> pieces) {
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    const auto& p = pieces[i];
    if (std::isnan(p.from) || std::isnan(p.to) || !(p.from < p.to))
      throw InputError(fmt::format("piece {} has an empty or invalid interval [{}, {})", i, p.from, p.to));
    if (i > 0 && p.from < pieces[i - 1].to)
      throw InputError(fmt::format("pieces {} and {} overlap or are out of order", i - 1, i));
    for (const auto& e : p.terms)
      if (!std::isfinite(e.c) || !std::isfinite(e.q) || e.p < 0)
        throw InputError(fmt::format("piece {} has an invalid term", i));
  }
  TimeFunction f;
  f.pieces_ = std::move(pieces);
  return f;
}

TimeFunction TimeFunction::grid(double t0, double dt, std::vector<double> values) {
  if (!std::isfinite(t0) || !(dt > 0.0) || !std::isfinite(dt)) throw InputError("grid needs finite t0 and dt > 0");
  if (values.size() < 2) throw InputError("grid needs at least 2 samples");
  for (double v : values)
    if (!std::isfinite(v)) throw InputError("grid samples must be finite");
  TimeFunction f;
  f.grid_ = Grid{t0, dt, std::move(values)};
  return f;
}

TimeFunction TimeFunction::indicator(double a, double b) { return piecewise({Piece{a, b, {{1.0, 0, 0.0}}}}); }

TimeFunction TimeFunction::exp_decay(double rate, double c) {
  return piecewise({Piece{0.0, kInf, {{c, 0, -rate}}}});
}

TimeFunction TimeFunction::sierpinski_gamma() {
  const double s3 = std::sqrt(3.0);
  const double t0 = std::log(4.0 * s3);
  return piecewise({Piece{-kInf, t0, {{s3 / 16.0, 0, 0.0}}},
                    Piece{t0, kInf, {{1.5, 0, -1.0}, {-3.0 * s3, 0, -2.0}}}});
}

TimeFunction TimeFunction::builtin(const std::string& name) {
  if (name == "heaviside" || name == "indicator") return heaviside();
  if (name == "zero") return zero();
  if (name == "gasket" || name == "sierpinski") return sierpinski_gamma();
  throw InputError(fmt::format("unknown builtin time function '{}'", name));
}

double TimeFunction::eval(double t) const {
  if (grid_) {
    const auto& g = *grid_;
    if (!(t >= g.t0) || !(t < g.t_end())) return 0.0;
    const double x = (t - g.t0) / g.dt;
    auto k = static_cast<std::size_t>(std::floor(x));
    k = std::min(k, g.values.size() - 2);
    const double frac = x - static_cast<double>(k);
    return g.values[k] + frac * (g.values[k + 1] - g.values[k]);
  }
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), t, [](double v, const Piece& p) { return v < p.from; });
  if (it == pieces_.begin()) return 0.0;
  --it;
  return t < it->to ? eval_terms(it->terms, t) : 0.0;
}

double TimeFunction::eval_left_limit(double t) const {
  if (grid_) {
    const auto& g = *grid_;
    if (!(t > g.t0) || !(t <= g.t_end())) return 0.0;
    const double x = (t - g.t0) / g.dt;
    auto k = static_cast<std::size_t>(std::ceil(x)) - 1;
    k = std::min(k, g.values.size() - 2);
    const double frac = x - static_cast<double>(k);
    return g.values[k] + frac * (g.values[k + 1] - g.values[k]);
  }
  for (const auto& p : pieces_)
    if (p.from < t && t <= p.to) return eval_terms(p.terms, t);
  return 0.0;
}

std::vector<double> TimeFunction::breakpoints() const {
  std::vector<double> b;
  if (grid_) {
    b = {grid_->t0, grid_->t_end()};
    return b;
  }
  for (const auto& p : pieces_) {
    if (std::isfinite(p.from)) b.push_back(p.from);
    if (std::isfinite(p.to)) b.push_back(p.to);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

TimeFunction TimeFunction::scaled(double c) const {
  TimeFunction f = *this;
  if (f.grid_)
    for (double& v : f.grid_->values) v *= c;
  for (auto& p : f.pieces_)
    for (auto& e : p.terms) e.c *= c;
  return f;
}

TimeFunction TimeFunction::times_exp(double lambda) const {
  TimeFunction f = as_pieces();
  for (auto& p : f.pieces_)
    for (auto& e : p.terms) e.q += lambda;
  return f;
}

TimeFunction TimeFunction::shifted(double s) const {
  TimeFunction f = *this;
  if (f.grid_) {
    f.grid_->t0 += s;
    return f;
  }
  for (auto& p : f.pieces_) {
    p.from += s;
    p.to += s;
    std::vector<ExpTerm> out;
    for (const auto& e : p.terms) {
      // c (t - s)^p e^{q (t - s)}
      const double base = e.c * std::exp(-e.q * s);
      for (int k = 0; k <= e.p; ++k) {
        const double coef = base * binomial(e.p, k) * std::pow(-s, e.p - k);
        if (coef != 0.0 || (k == e.p && e.c != 0.0)) out.push_back({coef, k, e.q});
      }
    }
    p.terms = std::move(out);
  }
  return f;
}

TimeFunction TimeFunction::as_pieces() const {
  if (!grid_) return *this;
  const auto& g = *grid_;
  std::vector<Piece> pieces;
  pieces.reserve(g.values.size() - 1);
  for (std::size_t i = 0; i + 1 < g.values.size(); ++i) {
    const double a = g.t0 + g.dt * static_cast<double>(i);
    const double b = i + 2 == g.values.size() ? g.t_end() : g.t0 + g.dt * static_cast<double>(i + 1);
    const double slope = (g.values[i + 1] - g.values[i]) / g.dt;
    pieces.push_back(Piece{a, b, {{g.values[i] - slope * a, 0, 0.0}, {slope, 1, 0.0}}});
  }
  return piecewise(std::move(pieces));
}

double TimeFunction::support_lo() const {
  if (grid_) {
    const auto& v = grid_->values;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i] != 0.0) return grid_->t0 + grid_->dt * static_cast<double>(i == 0 ? 0 : i - 1);
    return kInf;
  }
  for (const auto& p : pieces_)
    if (nonzero(p)) return p.from;
  return kInf;
}

double TimeFunction::support_hi() const {
  if (grid_) {
    const auto& v = grid_->values;
    for (std::size_t i = v.size(); i-- > 0;)
      if (v[i] != 0.0) return grid_->t0 + grid_->dt * static_cast<double>(std::min(i + 1, v.size() - 1));
    return -kInf;
  }
  for (auto it = pieces_.rbegin(); it != pieces_.rend(); ++it)
    if (nonzero(*it)) return it->to;
  return -kInf;
}

bool TimeFunction::is_zero() const { return std::isinf(support_lo()) && support_lo() > 0.0; }

double TimeFunction::lower_rate_sup() const {
  if (support_lo() > -kInf) return kInf;
  double q = kInf;
  for (const auto& e : pieces_.front().terms)
    if (e.c != 0.0) q = std::min(q, e.q);
  return q;
}

bool TimeFunction::lower_rate_strict() const {
  if (support_lo() > -kInf) return false;
  const double q = lower_rate_sup();
  for (const auto& e : pieces_.front().terms)
    if (e.c != 0.0 && e.q == q && e.p > 0) return true;
  return false;
}

double TimeFunction::upper_rate_inf() const {
  if (support_hi() < kInf) return -kInf;
  double q = -kInf;
  for (const auto& e : pieces_.back().terms)
    if (e.c != 0.0) q = std::max(q, e.q);
  return q;
}

bool TimeFunction::upper_rate_strict() const {
  if (support_hi() < kInf) return false;
  const double q = upper_rate_inf();
  for (const auto& e : pieces_.back().terms)
    if (e.c != 0.0 && e.q == q && e.p > 0) return true;
  return false;
}

std::optional<TailBound> TimeFunction::lower_tail(double r) const {
  const double lo = support_lo();
  if (lo > -kInf) return TailBound{lo, r, 0.0};
  const double q = lower_rate_sup();
  if (r > q || (r == q && lower_rate_strict())) return std::nullopt;
  const Piece& p = pieces_.front();
  const double anchor = std::isfinite(p.to) ? p.to : 0.0;
  double c = 0.0;
  for (const auto& e : p.terms)
    if (e.c != 0.0) c += std::abs(e.c) * sup_poly_exp(e.p, e.q - r, -anchor);
  return TailBound{anchor, r, c};
}

std::optional<TailBound> TimeFunction::upper_tail(double r) const {
  const double hi = support_hi();
  if (hi < kInf) return TailBound{hi, r, 0.0};
  const double q = upper_rate_inf();
  if (r < q || (r == q && upper_rate_strict())) return std::nullopt;
  const Piece& p = pieces_.back();
  const double anchor = std::isfinite(p.from) ? p.from : 0.0;
  double c = 0.0;
  for (const auto& e : p.terms)
    if (e.c != 0.0) c += std::abs(e.c) * sup_poly_exp(e.p, r - e.q, anchor);
  return TailBound{anchor, r, c};
}

double TimeFunction::integral_exp(double lambda, double a, double b) const {
  if (grid_) return as_pieces().integral_exp(lambda, a, b);
  double s = 0.0;
  for (const auto& p : pieces_) {
    const double lo = std::max(a, p.from), hi = std::min(b, p.to);
    if (!(lo < hi)) continue;
    for (const auto& e : p.terms)
      if (e.c != 0.0) s += e.c * integrate_monomial_exp(e.p, e.q + lambda, lo, hi);
  }
  return s;
}

std::string TimeFunction::describe() const {
  if (grid_) return fmt::format("grid(t0={}, dt={}, n={})", grid_->t0, grid_->dt, grid_->values.size());
  return fmt::format("piecewise({} pieces)", pieces_.size());
}

}  // namespace rpf
