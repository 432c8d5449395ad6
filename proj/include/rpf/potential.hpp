#pragma once

// Locally constant potentials on a subshift: a real value for every
// admissible word of a fixed depth d, extended to points by reading the
// first d letters. Birkhoff sums, eventual positivity and lattice
// classification live here.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rpf/symbolic.hpp"

namespace rpf {

class Potential {
 public:
  /// values[i] belongs to the i-th admissible word of length `depth`.
  Potential(const Subshift& shift, int depth, std::vector<double> values);

  static Potential constant(const Subshift& shift, double c);
  static Potential from_function(const Subshift& shift, int depth,
                                 const std::function<double(const Word&)>& fn);

  const Subshift& shift() const { return index_->shift(); }
  const CylinderIndex& index() const { return *index_; }
  int depth() const { return index_->depth(); }
  std::span<const double> values() const { return values_; }

  /// Value at the depth-d prefix of w. Throws InputError if w is too short
  /// or its prefix is not admissible.
  double eval(std::span<const int> w) const;

  /// The same function tabulated at a larger depth.
  Potential lifted(int new_depth) const;

  double min_value() const;
  double max_value() const;
  bool is_constant(double tol = 0.0) const;

 private:
  std::shared_ptr<const CylinderIndex> index_;
  std::vector<double> values_;
};

/// a*p + b*q, tabulated at max(p.depth(), q.depth()). Shifts must match.
Potential combine(double a, const Potential& p, double b, const Potential& q);
Potential operator+(const Potential& p, const Potential& q);
Potential operator-(const Potential& p, const Potential& q);
Potential operator*(double c, const Potential& p);

/// S_n pot evaluated at u·x_head, where n = u.size(). The empty prefix
/// gives 0. Throws InputError if u·x_head is not admissible or too short.
double birkhoff_sum(const Potential& pot, const Word& u, const Word& x_head);

/// Same, with the explicit n of the renewal formulas (must equal u.size()).
double birkhoff_sum(const Potential& pot, const Word& u, const Word& x_head, int n);

/// Depth used for cycle analysis of a potential: max(depth - 1, 1).
int graph_depth_for(const Potential& pot);

/// Edge weights of pot on the cylinder graph of the given depth
/// (depth + 1 >= pot.depth() required).
std::vector<double> edge_weights(const CylinderGraph& graph, const Potential& pot);

struct PositivityReport {
  bool eventually_positive = false;
  /// Minimum over periodic orbits of S_p xi / p (minimum mean cycle).
  double kappa = 0.0;
  /// kappa minus a rounding allowance; the bounds below use this value.
  double kappa_lower = 0.0;
  /// S_n xi(y) >= n*kappa_lower - kappa0 for every n >= 0 and every point y.
  double kappa0 = 0.0;
  /// S_m xi > 0 on the whole shift for all m >= m_star (0 when not positive).
  std::int64_t m_star = 0;
  /// Periodic block attaining kappa.
  Word critical_cycle;
  int graph_depth = 1;
  /// Node potential on the depth-graph_depth cylinders certifying kappa0.
  std::vector<double> node_potential;
};

PositivityReport check_eventually_positive(const Potential& xi);

enum class LatticeKind { lattice, non_lattice, inconclusive };
std::string to_string(LatticeKind kind);

struct LatticeReport {
  LatticeKind kind = LatticeKind::inconclusive;
  std::optional<double> span;
  /// aZ-valued representative and transfer function, xi - zeta = psi - psi∘sigma.
  std::optional<Potential> zeta;
  std::optional<Potential> psi;
  std::vector<double> cycle_sums;
  double gcd_candidate = 0.0;
};

/// Iterated Euclidean remainder on |values|; a remainder within tol of zero
/// (or of the divisor) counts as exact. Values below tol are ignored.
double real_gcd(std::span<const double> values, double tol);

/// Lattice classification from the Birkhoff sums of xi over all simple
/// cycles of length <= max_cycle_len (0 selects the number of cylinders).
LatticeReport detect_lattice(const Potential& xi, int max_cycle_len = 0, double tol = 1e-9);

/// Lattice data supplied by the caller. Verifies that zeta takes values in
/// span*Z and that xi - zeta = psi - psi∘sigma on every cylinder; throws
/// InputError otherwise.
LatticeReport lattice_from_cohomology(const Potential& xi, double span, const Potential& zeta,
                                      const Potential& psi, double tol = 1e-9);

/// Depth-1 potential -log r_i on the full shift over ratios.size() letters.
Potential geometric_potential(std::span<const double> ratios);

}  // namespace rpf
