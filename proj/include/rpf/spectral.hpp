#pragma once

// Finite-dimensional Ruelle-Perron-Frobenius operators for locally constant
// potentials, their leading eigendata, pressure, the renewal exponent and
// Gibbs measures.
//
// For a potential phi of depth d and a cylinder depth m >= max(d-1, 1), the
// operator (L g)(x) = sum_{sigma y = x} e^{phi(y)} g(y) maps functions of the
// first m letters to functions of the first m letters. TransferMatrix is that
// action written as a sparse K x K matrix over the depth-m cylinders.

#include <memory>
#include <span>
#include <vector>

#include "rpf/potential.hpp"
#include "rpf/symbolic.hpp"

namespace rpf {

/// Smallest cylinder depth at which every listed potential's operator is exact.
int minimal_transfer_depth(std::initializer_list<const Potential*> potentials);

class TransferMatrix {
 public:
  struct Entry {
    int col;
    double value;
  };

  /// Throws InputError if m < max(phi.depth() - 1, 1).
  TransferMatrix(const Potential& phi, int m);

  int depth() const { return index_->depth(); }
  std::size_t size() const { return index_->size(); }
  const CylinderIndex& index() const { return *index_; }
  std::shared_ptr<const CylinderIndex> shared_index() const { return index_; }
  const Potential& potential() const { return phi_; }

  std::span<const Entry> row(std::size_t i) const {
    return std::span<const Entry>(entries_).subspan(row_start_[i], row_start_[i + 1] - row_start_[i]);
  }

  /// (L g) as a depth-m table.
  std::vector<double> apply(std::span<const double> g) const;
  /// nu^T L.
  std::vector<double> apply_transpose(std::span<const double> v) const;
  std::vector<std::vector<double>> dense() const;

 private:
  Potential phi_;
  std::shared_ptr<const CylinderIndex> index_;
  std::vector<std::size_t> row_start_;
  std::vector<Entry> entries_;
};

TransferMatrix build_transfer(const Potential& phi, int m);

/// Cylinder masses at a fixed depth (a measure restricted to that depth).
struct CylinderMeasure {
  std::shared_ptr<const CylinderIndex> index;
  std::vector<double> mass;

  int depth() const { return index->depth(); }
};

struct EigenOptions {
  /// Relative residual at which power iteration stops.
  double residual_tol = 1e-13;
  int max_iterations = 2'000'000;
  int gap_iterations = 400;
};

struct SpectralData {
  std::shared_ptr<const CylinderIndex> index;
  Potential phi;
  double gamma = 0.0;
  double pressure = 0.0;
  /// Right eigenvector (eigenfunction), normalized so sum h*nu = 1.
  std::vector<double> h;
  /// Left eigenvector (eigenmeasure on depth-m cylinders), sums to 1.
  std::vector<double> nu;
  /// Gibbs measure mu = h*nu on depth-m cylinders.
  std::vector<double> mu;
  /// Estimated |lambda_2| / gamma. Heuristic, not certified.
  double gap = 0.0;
  double right_residual = 0.0;
  double left_residual = 0.0;
  int iterations = 0;

  int depth() const { return index->depth(); }
  /// h at a point given by a head of at least depth() letters.
  double h_at(std::span<const int> x) const;
  /// nu and mu of the cylinder [w], any length >= 1 (0 if inadmissible).
  double nu_cylinder(const Word& w) const;
  double mu_cylinder(const Word& w) const;
  CylinderMeasure nu_measure(int depth) const;
  CylinderMeasure mu_measure(int depth) const;
};

/// Power iteration on T and T^T from the all-ones vector.
SpectralData leading_eigendata(const TransferMatrix& t, const EigenOptions& opts = {});

/// Convenience: build at depth m (0 selects the minimal depth) and solve.
SpectralData spectral_data(const Potential& phi, int m = 0, const EigenOptions& opts = {});

/// P(phi) = log gamma.
double pressure(const Potential& phi, int m = 0);

struct DeltaResult {
  double delta = 0.0;
  /// |P(eta - delta*xi)| at the returned delta.
  double pressure_residual = 0.0;
  /// |gamma - 1| at the returned delta.
  double gamma_residual = 0.0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  int evaluations = 0;
};

/// Unique delta with P(eta - delta*xi) = 0. Throws PreconditionError unless
/// xi is eventually positive.
DeltaResult solve_delta(const Potential& eta, const Potential& xi, int m = 0, double tol = 1e-12);

struct GibbsReport {
  std::vector<double> mu;
  /// Smallest c with c^-1 <= mu([w|n]) / exp(S_n phi(w) - n P) <= c over
  /// all words with n <= max_length.
  double constant = 1.0;
  int max_length = 0;
};

/// Gibbs measure on depth-m cylinders and its empirical constant over
/// cylinder lengths 1..m+4.
GibbsReport gibbs_measure(const Potential& phi, int m = 0);
GibbsReport gibbs_constant(const SpectralData& data, int max_length);

/// sum_w psi(w) * measure(w). Throws InputError if psi is deeper than the measure.
double integrate(const Potential& psi, const CylinderMeasure& measure);

/// eta~(j w) = eta(j w) + log h(j w_1..w_{m-1}) - log h(w) - log gamma, so that
/// sum_j e^{eta~(j w)} = 1. Result has depth m + 1.
Potential normalize_potential(const Potential& eta, int m = 0);

}  // namespace rpf
