#pragma once

// Classical corollaries: the key renewal theorem for finitely supported
// interarrival laws, a Markov renewal theorem with point-mass kernels and
// Lalley's lattice counting asymptote. Each is also embedded into the
// general machinery so the two can be compared.

#include <optional>
#include <vector>

#include "rpf/potential.hpp"
#include "rpf/renewal.hpp"
#include "rpf/symbolic.hpp"
#include "rpf/time_function.hpp"

namespace rpf {

struct KeyRenewalSpec {
  std::vector<double> p;
  std::vector<double> s;
  TimeFunction z;

  /// Throws InputError unless M >= 2, p is a probability vector in (0,1)
  /// and every s_i > 0.
  void validate() const;
};

struct KeyRenewalResult {
  double mean = 0.0;
  /// integral of z over the real line.
  double integral = 0.0;
  bool lattice = false;
  std::optional<double> span;
  /// (1 / mean) * integral z; also the Cesaro limit in both cases.
  double nonlattice_value = 0.0;
  double average = 0.0;
};

KeyRenewalResult key_renewal_asymptote(const KeyRenewalSpec& spec);

/// (a / mean) * sum_l z(a l + t). Throws WrongTheorem if the s_i are not lattice.
double key_renewal_lattice_value(const KeyRenewalSpec& spec, double t);

/// Depth-1 embedding on the full shift: xi = s_i, eta = log p_i + d s_i,
/// f = e^{d t} z, chi = 1, so that the renewal exponent equals d.
RenewalProblem embed_key_renewal(const KeyRenewalSpec& spec, double delta_embed = 0.0);

struct MarkovRenewalSpec {
  /// A(j, i) = 1 when state i may follow state j (the word "ji" is admissible).
  IncidenceMatrix a;
  /// eta_t[j][i] = log-mass of the kernel on the word ji, xi_t[j][i] its
  /// location. Entries for forbidden words are ignored.
  std::vector<std::vector<double>> eta_t;
  std::vector<std::vector<double>> xi_t;
  /// f_i per state.
  std::vector<TimeFunction> f;

  void validate() const;
  /// B_ij(s) = exp(eta~(ji) + s xi~(ji)) for admissible ji, else 0.
  std::vector<std::vector<double>> b_matrix(double s) const;
};

struct MarkovRenewalResult {
  double delta = 0.0;
  /// |spr(B(-delta)) - 1|.
  double radius_residual = 0.0;
  std::vector<double> h;
  std::vector<double> nu;
  std::vector<double> G;
};

/// delta from spr(B(-delta)) = 1 by bisection, Perron vectors of B(-delta)
/// from a dense eigensolver, then G(i).
MarkovRenewalResult markov_renewal_G(const MarkovRenewalSpec& spec, double tol = 1e-15);

/// Depth-2 embedding with base point starting at `state`.
RenewalProblem embed_markov(const MarkovRenewalSpec& spec, int state);

/// Lalley's counting asymptote (eta = 0, f = 1_[0,inf)). Throws WrongTheorem
/// for non-lattice data and UnsupportedInput without zeta and psi.
double lalley_counting_asymptote(const Potential& xi, const Potential& chi, const LatticeReport& lattice,
                                 const Word& x_head, double t);

}  // namespace rpf
