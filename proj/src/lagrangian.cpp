#include "maslovkit/lagrangian.hpp"

#include <Eigen/QR>
#include <Eigen/SVD>

namespace maslovkit {

namespace {

Matrix thin_q(const Matrix& m) {
  const int rows = static_cast<int>(m.rows());
  const int cols = static_cast<int>(m.cols());
  Eigen::HouseholderQR<Matrix> qr(m);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  // Fail loudly on rank collapse: |R_ii| must stay well above roundoff.
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  double rmax = 0.0;
  for (int i = 0; i < cols; ++i) rmax = std::max(rmax, std::abs(r(i, i)));
  for (int i = 0; i < cols; ++i)
    if (std::abs(r(i, i)) < 1e-12 * std::max(rmax, 1e-300))
      throw RankDeficiency("frame columns are numerically dependent");
  return q;
}

Vector concatenated_singular_values(const LagrangianFrame& l, const LagrangianFrame& m) {
  if (!same_space(l.space(), m.space()))
    throw InvalidInput("frames live in different symplectic spaces");
  const int two_n = l.space()->ambient_dim();
  Matrix cat(two_n, 2 * l.n());
  cat << l.frame(), m.frame();
  Eigen::JacobiSVD<Matrix> svd(cat);
  return svd.singularValues();
}

}  // namespace

SymplecticSpace::SymplecticSpace(const Matrix& omega) {
  if (omega.rows() != omega.cols() || omega.rows() % 2 != 0 || omega.rows() == 0)
    throw InvalidInput("SymplecticSpace: omega must be 2n x 2n, n >= 1");
  if (!omega.allFinite()) throw InvalidInput("SymplecticSpace: non-finite omega");
  n_ = static_cast<int>(omega.rows()) / 2;
  omega_ = 0.5 * (omega - omega.transpose());
  if ((omega_ - omega).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, omega.cwiseAbs().maxCoeff()))
    throw InvalidInput("SymplecticSpace: omega is not antisymmetric");
  Eigen::JacobiSVD<Matrix> svd(omega_);
  if (svd.singularValues()(2 * n_ - 1) < 1e-12 * svd.singularValues()(0))
    throw InvalidInput("SymplecticSpace: omega is degenerate");

  // Symplectic Gram-Schmidt on the standard basis: produces a Darboux basis
  // (u_1..u_n, v_1..v_n) whose halves span a transverse Lagrangian pair.
  const int d = 2 * n_;
  std::vector<Vector> pool;
  pool.reserve(d);
  for (int i = 0; i < d; ++i) pool.push_back(Vector::Unit(d, i));
  Matrix us(d, n_), vs(d, n_);
  for (int k = 0; k < n_; ++k) {
    if (pool.size() < 2) throw InvalidInput("SymplecticSpace: Darboux reduction collapsed");
    Vector u = pool.front();
    u.normalize();
    // strongest symplectic partner among the remaining candidates
    int best = -1;
    double best_val = 0.0;
    for (std::size_t j = 1; j < pool.size(); ++j) {
      const double val = std::abs(pairing(u, pool[j]));
      if (val > best_val) {
        best_val = val;
        best = static_cast<int>(j);
      }
    }
    if (best < 0 || best_val < 1e-12)
      throw InvalidInput("SymplecticSpace: could not build a Darboux basis");
    Vector v = pool[best] / pairing(u, pool[best]);
    std::vector<Vector> next;
    for (std::size_t j = 1; j < pool.size(); ++j) {
      if (static_cast<int>(j) == best) continue;
      Vector r = pool[j];
      r = r - pairing(r, v) * u + pairing(r, u) * v;
      if (r.norm() > 1e-10) next.push_back(r);
    }
    us.col(k) = u;
    vs.col(k) = v;
    pool = std::move(next);
  }
  canonical0_ = thin_q(us);
  canonical1_ = thin_q(vs);
}

std::shared_ptr<const SymplecticSpace> SymplecticSpace::standard(int n) {
  if (n < 1) throw InvalidInput("standard_space: n must be positive");
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = Matrix::Identity(n, n);
  omega.bottomLeftCorner(n, n) = -Matrix::Identity(n, n);
  return from_omega(omega);
}

std::shared_ptr<const SymplecticSpace> SymplecticSpace::from_omega(const Matrix& omega) {
  return std::shared_ptr<const SymplecticSpace>(new SymplecticSpace(omega));
}

SpacePtr standard_space(int n) { return SymplecticSpace::standard(n); }

SpacePtr opposite_space(const SpacePtr& space) {
  return SymplecticSpace::from_omega(-space->omega());
}

bool same_space(const SpacePtr& a, const SpacePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->omega().rows() == b->omega().rows() && a->omega() == b->omega();
}

LagrangianFrame::LagrangianFrame(SpacePtr space, const Matrix& span_columns)
    : space_(std::move(space)) {
  const int n = space_->n();
  if (span_columns.rows() != 2 * n || span_columns.cols() != n)
    throw InvalidInput("LagrangianFrame: frame must be 2n x n");
  if (!span_columns.allFinite()) throw InvalidInput("LagrangianFrame: non-finite frame");
  frame_ = thin_q(span_columns);
  const double residual = (frame_.transpose() * space_->omega() * frame_).cwiseAbs().maxCoeff();
  if (residual > tolerances::isotropy)
    throw NotLagrangian("LagrangianFrame: isotropy residual " + std::to_string(residual));
}

LagrangianFrame LagrangianFrame::in_space(const SpacePtr& other) const {
  if (other->ambient_dim() != space_->ambient_dim())
    throw InvalidInput("in_space: ambient dimension mismatch");
  return LagrangianFrame(other, frame_);
}

double LagrangianFrame::isotropy_residual() const {
  return (frame_.transpose() * space_->omega() * frame_).cwiseAbs().maxCoeff();
}

int intersection_dimension(const LagrangianFrame& l, const LagrangianFrame& m) {
  const Vector sv = concatenated_singular_values(l, m);
  int count = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) < tolerances::intersection) ++count;
  return count;
}

double transversality_margin(const LagrangianFrame& l, const LagrangianFrame& m) {
  const Vector sv = concatenated_singular_values(l, m);
  return sv(sv.size() - 1);
}

double frame_gap(const LagrangianFrame& l, const LagrangianFrame& m) {
  if (!same_space(l.space(), m.space()))
    throw InvalidInput("frames live in different symplectic spaces");
  Eigen::JacobiSVD<Matrix> svd(l.frame().transpose() * m.frame());
  const double c = std::clamp(svd.singularValues()(l.n() - 1), -1.0, 1.0);
  return std::acos(c);
}

Chart::Chart(LagrangianFrame l0, LagrangianFrame l1) : L0(std::move(l0)), L1(std::move(l1)) {
  if (!same_space(L0.space(), L1.space()))
    throw InvalidInput("Chart: frames live in different spaces");
  if (intersection_dimension(L0, L1) != 0)
    throw InvalidInput("Chart: L0 and L1 must be transverse");
}

SymmetricForm chart_apply(const Chart& c, const LagrangianFrame& l) {
  if (!same_space(c.L0.space(), l.space()))
    throw InvalidInput("chart_apply: frame from a different space");
  const SpacePtr& space = c.L0.space();
  const int n = space->n();

  Matrix basis(2 * n, 2 * n);
  basis << c.L0.frame(), c.L1.frame();
  Matrix coords = basis.partialPivLu().solve(l.frame());
  const Matrix a = coords.topRows(n);
  const Matrix g = coords.bottomRows(n);

  Eigen::JacobiSVD<Matrix> svd(a);
  if (svd.singularValues()(n - 1) < tolerances::chart_domain)
    throw ChartDomainError("chart_apply: Lagrangian is not transverse to L1");

  // graph coefficient R with T(F0 u) = F1 R u
  const Matrix r =
      a.transpose().colPivHouseholderQr().solve(g.transpose()).transpose();
  const Matrix w = c.L1.frame().transpose() * space->omega() * c.L0.frame();
  Matrix b = r.transpose() * w;
  return SymmetricForm(0.5 * (b + b.transpose()));
}

LagrangianFrame chart_invert(const Chart& c, const SymmetricForm& b) {
  const SpacePtr& space = c.L0.space();
  const int n = space->n();
  if (b.dim() != n) throw InvalidInput("chart_invert: form dimension must be n");
  const Matrix w = c.L1.frame().transpose() * space->omega() * c.L0.frame();
  const Matrix r = w.transpose().partialPivLu().solve(b.matrix());
  Matrix frame = c.L0.frame() + c.L1.frame() * r;
  return LagrangianFrame(space, frame);
}

SymmetricForm transition_reference(const LagrangianFrame& l0, const LagrangianFrame& l1,
                                   const LagrangianFrame& l) {
  if (!same_space(l0.space(), l1.space()) || !same_space(l0.space(), l.space()))
    throw InvalidInput("transition_reference: frames from different spaces");
  const int n = l0.n();
  // phi_{L1,L}(L0), a form on L1; requires L transverse to both L0 and L1.
  const SymmetricForm q = chart_apply(Chart(l1, l), l0);

  // eta : L1 -> L0, restriction to L1 of the projection along L.
  Matrix basis(2 * n, 2 * n);
  basis << l.frame(), l0.frame();
  const Matrix z = basis.partialPivLu().solve(l1.frame());
  const Matrix eta = z.bottomRows(n);  // L1-basis coords -> L0-basis coords
  const Matrix eta_inv = eta.partialPivLu().inverse();
  Matrix c = eta_inv.transpose() * q.matrix() * eta_inv;
  return SymmetricForm(0.5 * (c + c.transpose()));
}

LagrangianFrame lagrangian_from_ps(const Chart& c, const PSData& data) {
  const SpacePtr& space = c.L0.space();
  const int n = space->n();
  const int k = static_cast<int>(data.p_basis.cols());
  if (data.s.dim() != k) throw InvalidInput("lagrangian_from_ps: S dimension must equal dim P");
  if (k > 0) {
    if (data.p_basis.rows() != 2 * n)
      throw InvalidInput("lagrangian_from_ps: P basis has wrong ambient dimension");
    // P must lie inside L1
    Matrix resid = data.p_basis -
                   c.L1.frame() * (c.L1.frame().transpose() * data.p_basis);
    if (resid.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, data.p_basis.cwiseAbs().maxCoeff()))
      throw InvalidInput("lagrangian_from_ps: P basis is not contained in L1");
    Eigen::JacobiSVD<Matrix> svd(data.p_basis);
    if (svd.singularValues()(k - 1) < 1e-10 * svd.singularValues()(0))
      throw RankDeficiency("lagrangian_from_ps: P basis is rank deficient");
  }

  if (k == 0) return c.L0;

  // Constraint on w = F0 x given v = P c:  x^T (F0^T Omega p_j) = -S(c, e_j).
  const Matrix pairing = c.L0.frame().transpose() * space->omega() * data.p_basis;  // n x k

  Matrix generators(2 * n, n);
  int col = 0;
  // particular solutions, one per basis vector of P
  const Matrix rhs = -data.s.matrix();  // k x k, column i for generator i
  const Matrix x = pairing.transpose().colPivHouseholderQr().solve(rhs);  // n x k
  for (int i = 0; i < k; ++i) generators.col(col++) = data.p_basis.col(i) + c.L0.frame() * x.col(i);
  // homogeneous part: w in L0 with omega(w, .)|_P = 0
  Eigen::JacobiSVD<Matrix> svd(pairing.transpose(), Eigen::ComputeFullV);  // k x n
  for (int i = k; i < n; ++i) generators.col(col++) = c.L0.frame() * svd.matrixV().col(i);

  return LagrangianFrame(space, generators);
}

PSData ps_from_lagrangian(const Chart& c, const LagrangianFrame& l) {
  const SpacePtr& space = c.L0.space();
  const int n = space->n();
  Matrix basis(2 * n, 2 * n);
  basis << c.L0.frame(), c.L1.frame();
  const Matrix coords = basis.partialPivLu().solve(l.frame());
  const Matrix x0 = coords.topRows(n);     // L0 components
  const Matrix x1 = coords.bottomRows(n);  // L1 components

  // P = projection of L into L1 along L0
  Eigen::JacobiSVD<Matrix> svd(x1, Eigen::ComputeFullU | Eigen::ComputeFullV);
  int rank = 0;
  const double smax = svd.singularValues().size() > 0 ? svd.singularValues()(0) : 0.0;
  for (int i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > std::max(1e-10 * smax, 1e-12)) ++rank;

  PSData out;
  out.p_basis = Matrix(2 * n, rank);
  if (rank == 0) {
    out.s = SymmetricForm(Matrix(0, 0));
    return out;
  }
  const Matrix p_coords = svd.matrixU().leftCols(rank);  // orthonormal in L1-basis coords
  out.p_basis = c.L1.frame() * p_coords;

  // For each p_j find l_j in L with L1-component p_j; S(p_i, p_j) = -omega(w_i, p_j).
  const Matrix alpha = x1.colPivHouseholderQr().solve(p_coords);  // n x rank (least squares)
  Matrix s(rank, rank);
  for (int j = 0; j < rank; ++j) {
    const Vector lj = l.frame() * alpha.col(j);
    const Vector wj = lj - out.p_basis.col(j);  // in L0
    for (int i = 0; i < rank; ++i) s(j, i) = -out.p_basis.col(i).dot(space->omega().transpose() * wj);
  }
  out.s = SymmetricForm(0.5 * (s + s.transpose()));
  return out;
}

LagrangianFrame random_lagrangian(const SpacePtr& space, std::uint64_t seed,
                                  const std::vector<LagrangianFrame>& transverse_to,
                                  double margin_floor, int max_draws) {
  Rng rng(seed);
  const int n = space->n();
  const LagrangianFrame canon0(space, space->canonical_frame0());
  const LagrangianFrame canon1(space, space->canonical_frame1());
  for (int draw = 0; draw < max_draws; ++draw) {
    const double scale = std::exp(0.8 * rng.gaussian());
    const Matrix s = random_symmetric_matrix(rng, n, scale);
    const Chart base = (draw % 2 == 0) ? Chart(canon0, canon1) : Chart(canon1, canon0);
    LagrangianFrame candidate = chart_invert(base, SymmetricForm(s));
    bool ok = true;
    for (const auto& constraint : transverse_to) {
      if (transversality_margin(candidate, constraint) < margin_floor) {
        ok = false;
        break;
      }
    }
    if (ok) return candidate;
  }
  throw RetryExhausted("random_lagrangian: no draw met the transversality margins");
}

LagrangianFrame lagrangian_with_intersection(const LagrangianFrame& l, int k,
                                             std::uint64_t seed) {
  const SpacePtr& space = l.space();
  const int n = l.n();
  if (k < 0 || k > n) throw InvalidInput("lagrangian_with_intersection: k out of range");
  if (k == n) return l;
  if (k == 0) return random_lagrangian(space, seed, {l});

  // Work in the chart based at l: graphs over l meet l exactly in the kernel
  // of the chart form, so a form vanishing on the first k basis directions
  // and nondegenerate on the rest does the job.
  const LagrangianFrame other = random_lagrangian(space, derive_seed(seed, 1), {l});
  Rng rng(derive_seed(seed, 2));
  Matrix b = Matrix::Zero(n, n);
  for (int attempt = 0; attempt < 16; ++attempt) {
    Matrix block = random_symmetric_matrix(rng, n - k);
    b.bottomRightCorner(n - k, n - k) = block;
    LagrangianFrame candidate = chart_invert(Chart(l, other), SymmetricForm(b));
    if (intersection_dimension(candidate, l) == k) return candidate;
  }
  throw RetryExhausted("lagrangian_with_intersection: could not realize the intersection");
}

}  // namespace maslovkit
