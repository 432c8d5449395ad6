#pragma once

// Functions of time t -> f(t) used as renewal observables. Two forms:
// piecewise exponential polynomials (sum of c * t^p * e^{q t} per interval)
// and uniform grids with linear interpolation, zero outside the grid.
// Tail bounds are derived from the representation, never declared.

#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace rpf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct ExpTerm {
  double c = 0.0;
  int p = 0;
  double q = 0.0;
};

/// Half-open interval [from, to) carrying a sum of ExpTerms. from may be
/// -inf and to may be +inf.
struct Piece {
  double from = -kInf;
  double to = kInf;
  std::vector<ExpTerm> terms;
};

struct Grid {
  double t0 = 0.0;
  double dt = 1.0;
  std::vector<double> values;

  double t_end() const { return t0 + dt * static_cast<double>(values.size() - 1); }
};

/// |f(t)| <= constant * e^{rate t} for every t beyond anchor (below it for a
/// lower tail, at or above it for an upper tail).
struct TailBound {
  double anchor = 0.0;
  double rate = 0.0;
  double constant = 0.0;
};

class TimeFunction {
 public:
  /// The zero function.
  TimeFunction() = default;

  /// Pieces must be sorted and non-overlapping; gaps are zero.
  static TimeFunction piecewise(std::vector<Piece> pieces);
  static TimeFunction grid(double t0, double dt, std::vector<double> values);

  static TimeFunction zero() { return {}; }
  /// 1 on [a, b).
  static TimeFunction indicator(double a, double b);
  /// 1_{[0, inf)}.
  static TimeFunction heaviside() { return indicator(0.0, kInf); }
  /// c * e^{-rate t} on [0, inf).
  static TimeFunction exp_decay(double rate, double c = 1.0);
  /// Area of the e^{-t}-neighbourhood of the Sierpinski gasket inside the
  /// central removed triangle.
  static TimeFunction sierpinski_gamma();
  /// Builtin by name: "heaviside", "zero", "sierpinski" / "gasket".
  static TimeFunction builtin(const std::string& name);

  bool is_grid() const { return grid_.has_value(); }
  const std::vector<Piece>& pieces() const { return pieces_; }
  const std::optional<Grid>& grid_data() const { return grid_; }

  double operator()(double t) const { return eval(t); }
  double eval(double t) const;
  /// lim_{s -> t-} f(s).
  double eval_left_limit(double t) const;

  /// Interior breakpoints (piece or grid boundaries).
  std::vector<double> breakpoints() const;

  TimeFunction scaled(double c) const;
  /// t -> e^{lambda t} f(t).
  TimeFunction times_exp(double lambda) const;
  /// t -> f(t - s).
  TimeFunction shifted(double s) const;
  /// The same function as exponential-polynomial pieces (grids become
  /// linear pieces).
  TimeFunction as_pieces() const;

  /// Infimum of the support (-inf if unbounded); +inf for the zero function.
  double support_lo() const;
  /// Supremum of the support; -inf for the zero function.
  double support_hi() const;
  bool is_zero() const;

  /// Largest r admitting a lower tail bound C e^{r t} (+inf if the support
  /// is bounded below). Attained unless lower_rate_strict().
  double lower_rate_sup() const;
  bool lower_rate_strict() const;
  /// Smallest r admitting an upper tail bound (-inf if bounded above).
  double upper_rate_inf() const;
  bool upper_rate_strict() const;

  /// Lower tail bound at rate r; nullopt if none exists.
  std::optional<TailBound> lower_tail(double r) const;
  std::optional<TailBound> upper_tail(double r) const;

  /// Integral of e^{lambda t} f(t) over [a, b) (bounds may be infinite).
  /// Throws InputError if it diverges.
  double integral_exp(double lambda, double a = -kInf, double b = kInf) const;
  double integral(double a = -kInf, double b = kInf) const { return integral_exp(0.0, a, b); }

  /// Short human-readable description.
  std::string describe() const;

 private:
  std::vector<Piece> pieces_;
  std::optional<Grid> grid_;
};

/// Integral of t^p e^{k t} over [a, b], bounds possibly infinite. Throws
/// InputError when divergent.
double integrate_monomial_exp(int p, double k, double a, double b);

/// Build a Grid-backed function by sampling fn on [t0, t0 + (n-1) dt].
template <typename Fn>
TimeFunction sample_grid(Fn&& fn, double t0, double dt, std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = fn(t0 + dt * static_cast<double>(i));
  return TimeFunction::grid(t0, dt, std::move(v));
}

}  // namespace rpf
