#include "maslovkit/symforms.hpp"

#include <cstdlib>

namespace maslovkit {

double default_rank_tol() {
  static const double tol = [] {
    if (const char* env = std::getenv("MASLOVKIT_TOL")) {
      char* end = nullptr;
      const double v = std::strtod(env, &end);
      if (end != env && v > 0.0 && std::isfinite(v)) return v;
    }
    return 1e-9;
  }();
  return tol;
}

SymmetricForm::SymmetricForm(const Matrix& m, double tol_rank) : tol_rank_(tol_rank) {
  if (m.rows() != m.cols()) throw InvalidInput("SymmetricForm: matrix must be square");
  if (!m.allFinite()) throw InvalidInput("SymmetricForm: non-finite entries");
  if (tol_rank < 0.0) throw InvalidInput("SymmetricForm: negative rank tolerance");
  matrix_ = 0.5 * (m + m.transpose());
}

SymmetricForm SymmetricForm::operator+(const SymmetricForm& o) const {
  if (dim() != o.dim()) throw InvalidInput("SymmetricForm: dimension mismatch in sum");
  return SymmetricForm(matrix_ + o.matrix_, std::max(tol_rank_, o.tol_rank_));
}

SymmetricForm SymmetricForm::operator-() const { return SymmetricForm(-matrix_, tol_rank_); }

InertiaComputation inertia_detailed(const SymmetricForm& b, double tol_abs) {
  InertiaComputation out;
  const int d = b.dim();
  out.eigenvalues = Vector(d);
  if (d == 0) return out;

  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix(), Eigen::EigenvaluesOnly);
  out.eigenvalues = es.eigenvalues();
  const double rho = std::max(std::abs(out.eigenvalues(0)), std::abs(out.eigenvalues(d - 1)));
  out.spectral_radius = rho;
  if (rho == 0.0 && tol_abs == 0.0) {
    out.inertia = Inertia{0, 0, d};
    return out;
  }
  const double cut = std::max(b.tol_rank() * rho, tol_abs);
  for (int i = 0; i < d; ++i) {
    const double ev = out.eigenvalues(i);
    if (ev > cut)
      ++out.inertia.coindex;
    else if (ev < -cut)
      ++out.inertia.index;
    else
      ++out.inertia.nullity;
    const double mag = std::abs(ev);
    if (mag > cut / 10.0 && mag < cut * 10.0) out.marginal = true;
  }
  return out;
}

Inertia inertia(const SymmetricForm& b) { return inertia_detailed(b).inertia; }

Matrix kernel_basis(const SymmetricForm& b, double tol_abs) {
  const int d = b.dim();
  if (d == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix());
  const Vector evs = es.eigenvalues();
  const double rho = std::max(std::abs(evs(0)), std::abs(evs(d - 1)));
  const double cut = std::max(b.tol_rank() * rho, tol_abs);
  int k = 0;
  for (int i = 0; i < d; ++i)
    if (std::abs(evs(i)) <= cut) ++k;
  Matrix basis(d, k);
  int col = 0;
  for (int i = 0; i < d; ++i)
    if (std::abs(evs(i)) <= cut) basis.col(col++) = es.eigenvectors().col(i);
  return basis;
}

SymmetricForm restrict_form(const SymmetricForm& b, const Matrix& w) {
  const int d = b.dim();
  const int k = static_cast<int>(w.cols());
  if (k == 0) return SymmetricForm(Matrix(0, 0), b.tol_rank());
  if (w.rows() != d) throw InvalidInput("restrict_form: vector dimension mismatch");
  if (!w.allFinite()) throw InvalidInput("restrict_form: non-finite entries");

  Eigen::JacobiSVD<Matrix> svd(w);
  if (svd.rank() < k || svd.singularValues()(k - 1) < 1e-10 * svd.singularValues()(0))
    throw RankDeficiency("restrict_form: subspace basis is rank deficient");

  Matrix r = w.transpose() * b.matrix() * w;
  return SymmetricForm(r, b.tol_rank());
}

PerturbationVerdict check_perturbation_bounds(const SymmetricForm& b, const SymmetricForm& c) {
  if (b.dim() != c.dim()) throw InvalidInput("check_perturbation_bounds: dimension mismatch");
  const InertiaComputation ib = inertia_detailed(b);
  const InertiaComputation ic = inertia_detailed(c);
  const InertiaComputation isum = inertia_detailed(b + c);

  PerturbationVerdict v;
  v.difference = isum.inertia.coindex - ib.inertia.coindex;
  v.lower_slack = v.difference + ic.inertia.index;   // difference - (-n_-(C))
  v.upper_slack = ic.inertia.coindex - v.difference; // n_+(C) - difference
  v.holds = v.lower_slack >= 0 && v.upper_slack >= 0;
  v.marginal = ib.marginal || ic.marginal || isum.marginal;
  return v;
}

}  // namespace maslovkit
