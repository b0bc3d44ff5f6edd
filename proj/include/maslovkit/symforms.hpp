#pragma once

#include "maslovkit/common.hpp"

namespace maslovkit {

/// Default relative eigenvalue threshold for rank decisions; 1e-9 unless
/// overridden by the MASLOVKIT_TOL environment variable.
double default_rank_tol();

/// Inertia triple of a symmetric bilinear form.
struct Inertia {
  int index = 0;    // n_-
  int coindex = 0;  // n_+
  int nullity = 0;

  int signature() const { return coindex - index; }
  int dim() const { return index + coindex + nullity; }

  bool operator==(const Inertia& o) const {
    return index == o.index && coindex == o.coindex && nullity == o.nullity;
  }
  bool operator!=(const Inertia& o) const { return !(*this == o); }
};

/// Symmetric bilinear form on R^d, symmetrized on construction.
class SymmetricForm {
 public:
  SymmetricForm() : matrix_(0, 0), tol_rank_(default_rank_tol()) {}

  explicit SymmetricForm(const Matrix& m, double tol_rank = default_rank_tol());

  int dim() const { return static_cast<int>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  double tol_rank() const { return tol_rank_; }

  SymmetricForm operator+(const SymmetricForm& o) const;
  SymmetricForm operator-() const;

 private:
  Matrix matrix_;
  double tol_rank_;
};

/// Inertia plus the diagnostics the rank decision was based on.
struct InertiaComputation {
  Inertia inertia;
  bool marginal = false;  // some eigenvalue within a factor 10 of the cut
  double spectral_radius = 0.0;
  Vector eigenvalues;  // ascending
};

/// Eigenvalue counts above/below the cut max(tol_rank * rho, tol_abs).
InertiaComputation inertia_detailed(const SymmetricForm& b, double tol_abs = 0.0);
Inertia inertia(const SymmetricForm& b);

/// Orthonormal basis of the numerical kernel, as matrix columns.
Matrix kernel_basis(const SymmetricForm& b, double tol_abs = 0.0);

/// Restriction B(w_i, w_j) to the span of the columns of w.
SymmetricForm restrict_form(const SymmetricForm& b, const Matrix& w);

/// Verdict of the two-sided coindex perturbation bound
///   -n_-(C) <= n_+(B+C) - n_+(B) <= n_+(C).
struct PerturbationVerdict {
  bool holds = false;
  int lower_slack = 0;  // distance of the difference to the lower bound
  int upper_slack = 0;  // distance to the upper bound
  bool marginal = false;
  int difference = 0;  // n_+(B+C) - n_+(B)
};

PerturbationVerdict check_perturbation_bounds(const SymmetricForm& b, const SymmetricForm& c);

}  // namespace maslovkit
