#pragma once

// Renewal functions with dependent interarrival times
//
//   N(t, x) = sum_{n >= 0} sum_{sigma^n y = x} chi(y) f_y(t - S_n xi(y)) e^{S_n eta(y)},
//
// their regularity conditions and their asymptotics as t -> infinity.

#include <cstddef>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpf/potential.hpp"
#include "rpf/spectral.hpp"
#include "rpf/symbolic.hpp"
#include "rpf/time_function.hpp"

namespace rpf {

/// One TimeFunction per admissible word of length depth(); f_y is looked up
/// by the first depth() letters of y.
class FFamily {
 public:
  FFamily(const Subshift& shift, int depth, std::vector<TimeFunction> functions);
  /// The same function for every y.
  static FFamily uniform(const Subshift& shift, TimeFunction f);

  int depth() const { return index_->depth(); }
  const CylinderIndex& index() const { return *index_; }
  const std::vector<TimeFunction>& functions() const { return functions_; }
  const TimeFunction& at(std::span<const int> y) const { return functions_[index_->index_of(y)]; }

 private:
  std::shared_ptr<const CylinderIndex> index_;
  std::vector<TimeFunction> functions_;
};

struct RenewalProblem {
  Potential eta;
  Potential xi;
  Potential chi;
  FFamily f;
  /// Head of the base point x (at least state_depth() letters).
  Word x_head;
  /// Lattice data supplied by the caller (span, zeta, psi). When absent the
  /// classification comes from detect_lattice.
  std::optional<LatticeReport> lattice;

  const Subshift& shift() const { return xi.shift(); }
  /// Letters of a point that determine chi, f and one step of eta, xi.
  int state_depth() const;
  /// Throws InputError on mismatched shifts, negative chi or a short or
  /// inadmissible base word.
  void validate() const;
};

struct ProblemAnalysis {
  PositivityReport positivity;
  DeltaResult delta;
  LatticeReport lattice;
};

/// Positivity, delta and lattice classification. Throws PreconditionError
/// if xi is not eventually positive.
ProblemAnalysis analyze(const RenewalProblem& problem, double tol = 1e-12);

struct EvalOptions {
  /// Absolute bound on the truncated tail.
  double tol = 1e-10;
  /// Sum |f| instead of f (N_abs).
  bool absolute = false;
  int max_levels = 1'000'000;
  std::size_t max_keys = 20'000'000;
};

struct EvalResult {
  double value = 0.0;
  /// Certified bound on the omitted part of the series (0 when exact).
  double tail_bound = 0.0;
  int levels = 0;
  std::size_t max_keys = 0;
};

/// Evaluates N(t, x) by propagating level sets of preimages. Preimages with
/// equal state (first state_depth() letters) and equal multiset of xi steps
/// are merged, so the work grows with the number of distinct Birkhoff sums
/// rather than the number of preimages.
///
/// Truncation: if every f_y vanishes below a common T_lo the series is
/// pruned exactly. Otherwise a lower tail |f_y(tau)| <= C e^{r tau} with
/// r > delta is required and the remainder is bounded through the resolvent
/// of the transfer matrix of eta - r xi.
class RenewalEvaluator {
 public:
  explicit RenewalEvaluator(const RenewalProblem& problem);

  EvalResult eval(double t, const EvalOptions& opts = {}) const;
  EvalResult eval_at(double t, const Word& x_head, const EvalOptions& opts = {}) const;

  int state_depth() const { return m_; }
  bool support_mode() const { return support_mode_; }
  double support_lo() const { return t_lo_; }
  /// Tail rate and bound used in exponential-tail mode.
  std::optional<TailBound> tail() const { return tail_; }
  const RenewalProblem& problem() const { return problem_; }

 private:
  struct Step {
    int next;
    double eta;
    int xi_index;
  };

  RenewalProblem problem_;
  int m_ = 1;
  std::shared_ptr<const CylinderIndex> states_;
  std::vector<std::vector<Step>> steps_;
  std::vector<double> xi_values_;
  std::vector<double> chi_;
  std::vector<std::size_t> f_index_;
  std::vector<double> lower_shift_;  // lower bound on all future xi increments per state
  bool all_zero_ = false;
  bool support_mode_ = true;
  double t_lo_ = 0.0;
  std::optional<TailBound> tail_;
  std::vector<double> resolvent_;  // sum_{k >= 1} T_r^k 1 per state
  double chi_max_ = 0.0;
};

/// Convenience wrapper: builds an evaluator and evaluates once.
EvalResult eval_N(const RenewalProblem& problem, double t, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Direct Riemann integrability

struct DriRow {
  double h = 0.0;
  double lower = 0.0;
  double upper = 0.0;
};

struct DriReport {
  std::vector<DriRow> rows;
  /// The upper sum is infinite (tail not integrable).
  bool upper_infinite = false;
  /// Gaps upper - lower are non-increasing and the smallest is below the threshold.
  bool consistent = false;
  double window_lo = 0.0;
  double window_hi = 0.0;
};

/// Lower and upper Riemann sums of the family g_y(t) = e^{-delta t} |f_y(t)|
/// with inf/sup over the family taken cell by cell. Meshes must be positive
/// and decreasing.
DriReport dri_check(std::span<const TimeFunction> family, double delta, std::span<const double> meshes,
                    double threshold = 1e-2);
DriReport dri_check(const TimeFunction& f, double delta, std::span<const double> meshes, double threshold = 1e-2);

// ---------------------------------------------------------------------------
// Regularity conditions

struct ConditionReport {
  double delta = 0.0;
  // (A) integral of e^{-t delta} |f_y| per cylinder of the f family.
  bool a_holds = false;
  std::vector<double> a_integrals;
  // (B) sup of e^{-t delta} N_abs over the grid and all base cylinders.
  bool b_holds = false;
  double b_constant = 0.0;
  // (C) fit e^{-t delta} N_abs <= C e^{s t} on the negative part of the grid.
  bool c_holds = false;
  double c_rate = 0.0;
  double c_constant = 0.0;
  int c_points = 0;
  // (D) (a) each f_y monotone on the sampled points; (b) equi d.R.i.
  bool d_monotonic = false;
  bool d_equi_dri = false;
  DriReport dri;
  bool d_holds = false;
  std::string resolution;
};

ConditionReport check_conditions(const RenewalProblem& problem, std::span<const double> t_grid,
                                 std::span<const double> h_grid, double tol = 1e-10);

// ---------------------------------------------------------------------------
// Asymptotics

struct AsymptoticResult {
  std::string kind;
  LatticeKind lattice_kind = LatticeKind::inconclusive;
  double delta = 0.0;
  double G = 0.0;
  /// integral of xi (or zeta) against the Gibbs measure.
  double mean = 0.0;
  double h_x = 0.0;
  int depth = 0;
  /// integral of e^{-T delta} f_y(T) dT per cylinder of the f family.
  std::vector<double> time_integrals;
};

struct LatticeValue {
  double value = 0.0;
  double span = 0.0;
  /// Bound on the truncated part of the l-sums.
  double tail_bound = 0.0;
  int terms = 0;
};

/// Caches delta, the lattice classification and the spectral data needed by
/// the asymptotic formulas of one problem.
class RenewalAsymptotics {
 public:
  explicit RenewalAsymptotics(const RenewalProblem& problem);

  const ProblemAnalysis& analysis() const { return analysis_; }
  double delta() const { return analysis_.delta.delta; }

  /// The constant G(x) (no lattice check; it is also the Cesaro limit).
  AsymptoticResult G(const Word& x_head) const;
  AsymptoticResult G() const { return G(problem_.x_head); }
  /// The periodic function G~_x(t) of the lattice case.
  LatticeValue Gtilde(double t, const Word& x_head, double tol = 1e-15) const;
  LatticeValue Gtilde(double t) const { return Gtilde(t, problem_.x_head); }

 private:
  RenewalProblem problem_;
  ProblemAnalysis analysis_;
  std::optional<SpectralData> xi_data_;
  std::optional<SpectralData> zeta_data_;
};

/// G(x) by the non-lattice formula with no regime check.
AsymptoticResult compute_G(const RenewalProblem& problem);
/// G(x) for non-lattice xi. Throws WrongTheorem on lattice input.
AsymptoticResult asymptotic_G(const RenewalProblem& problem);
/// G~_x(t). Throws WrongTheorem on non-lattice input and UnsupportedInput if
/// the lattice representative is unknown.
LatticeValue lattice_Gtilde(const RenewalProblem& problem, double t);
/// Samples of G~_x over one period [0, a).
std::vector<std::pair<double, double>> lattice_Gtilde_table(const RenewalProblem& problem, int samples);

struct CesaroResult {
  double value = 0.0;
  double target = 0.0;
  double t_max = 0.0;
  int points = 0;
};

/// Trapezoid rule for t_max^{-1} integral_0^{t_max} e^{-T delta} N(T, x) dT,
/// with the limit G(x) as target.
CesaroResult cesaro_average(const RenewalProblem& problem, double t_max, int n_points, double tol = 1e-12);

/// sum_l e^{-a l delta} f(a l + c) over all integers l, truncated where the
/// tail bounds of f certify a remainder below tol * (1 + |sum|).
LatticeValue lattice_sum(const TimeFunction& f, double a, double c, double delta, double tol = 1e-15);

/// Real-valued fractional part t - floor(t), in [0, 1) also for negative t.
double frac_part(double t);

}  // namespace rpf
