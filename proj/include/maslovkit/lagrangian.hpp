#pragma once

#include <memory>
#include <vector>

#include "maslovkit/symforms.hpp"

namespace maslovkit {

/// Symplectic vector space (R^{2n}, omega) with a cached Darboux pair of
/// transverse Lagrangians used as the base chart for random generation.
class SymplecticSpace {
 public:
  static std::shared_ptr<const SymplecticSpace> standard(int n);
  static std::shared_ptr<const SymplecticSpace> from_omega(const Matrix& omega);

  int n() const { return n_; }
  int ambient_dim() const { return 2 * n_; }
  const Matrix& omega() const { return omega_; }
  const Matrix& canonical_frame0() const { return canonical0_; }
  const Matrix& canonical_frame1() const { return canonical1_; }

  /// omega(x, y) = x^T Omega y.
  double pairing(const Vector& x, const Vector& y) const { return x.dot(omega_ * y); }

 private:
  explicit SymplecticSpace(const Matrix& omega);
  int n_;
  Matrix omega_;
  Matrix canonical0_, canonical1_;  // 2n x n orthonormal frames
};

using SpacePtr = std::shared_ptr<const SymplecticSpace>;

SpacePtr standard_space(int n);

/// Same underlying R^{2n} with -omega.
SpacePtr opposite_space(const SpacePtr& space);

bool same_space(const SpacePtr& a, const SpacePtr& b);

/// Lagrangian subspace stored as a 2n x n frame with orthonormal columns.
class LagrangianFrame {
 public:
  /// Orthonormalizes the column span and checks maximal isotropy.
  LagrangianFrame(SpacePtr space, const Matrix& span_columns);

  const SpacePtr& space() const { return space_; }
  const Matrix& frame() const { return frame_; }
  int n() const { return space_->n(); }

  /// The same subspace viewed in another space over the same R^{2n}
  /// (used for the opposite symplectic form).
  LagrangianFrame in_space(const SpacePtr& other) const;

  double isotropy_residual() const;

 private:
  SpacePtr space_;
  Matrix frame_;
};

/// dim(L ∩ M), counting singular values of the concatenated frames below
/// the intersection tolerance.
int intersection_dimension(const LagrangianFrame& l, const LagrangianFrame& m);

/// Smallest singular value of the concatenated frames; the transversality
/// margin (0 iff the subspaces intersect).
double transversality_margin(const LagrangianFrame& l, const LagrangianFrame& m);

/// Largest principal angle between the two subspaces, in radians.
double frame_gap(const LagrangianFrame& l, const LagrangianFrame& m);

/// Chart given by a Lagrangian decomposition (L0, L1); identifies
/// Lagrangians transverse to L1 with symmetric forms on L0 via
/// phi(L) = omega(T., .) restricted to L0, T : L0 -> L1 the graph map.
struct Chart {
  Chart(LagrangianFrame l0, LagrangianFrame l1);
  LagrangianFrame L0, L1;
};

SymmetricForm chart_apply(const Chart& c, const LagrangianFrame& l);
LagrangianFrame chart_invert(const Chart& c, const SymmetricForm& b);

/// The constant form C = eta_* phi_{L1,L}(L0) on L0 such that
/// n_+(phi_{L1,L}(alpha)) = n_+(phi_{L0,L}(alpha) + C) for every alpha
/// transverse to L; nullity(C) = dim(L0 ∩ L1).
SymmetricForm transition_reference(const LagrangianFrame& l0, const LagrangianFrame& l1,
                                   const LagrangianFrame& l);

/// (P, S) data over a chart: P a subspace of L1 (ambient column basis) and
/// S a symmetric form on P in that basis.
struct PSData {
  Matrix p_basis;  // 2n x k, columns inside L1
  SymmetricForm s; // k x k
};

/// L_{P,S} = { v + w : v in P, w in L0, omega(w,.)|_P + S(v,.) = 0 }.
LagrangianFrame lagrangian_from_ps(const Chart& c, const PSData& data);
PSData ps_from_lagrangian(const Chart& c, const LagrangianFrame& l);

/// Deterministic pseudo-random Lagrangian transverse (with margin) to every
/// listed frame.  Draws graphs of random symmetric forms over the space's
/// canonical chart, alternating the roles of the two canonical frames.
LagrangianFrame random_lagrangian(const SpacePtr& space, std::uint64_t seed,
                                  const std::vector<LagrangianFrame>& transverse_to = {},
                                  double margin_floor = 1e-6, int max_draws = 64);

/// Random Lagrangian sharing a k-dimensional subspace with l (generically
/// exactly k-dimensional).  Fuzzing utility for intersection-sensitive
/// identities.
LagrangianFrame lagrangian_with_intersection(const LagrangianFrame& l, int k,
                                             std::uint64_t seed);

namespace tolerances {
inline constexpr double isotropy = 1e-10;
inline constexpr double intersection = 1e-7;
inline constexpr double chart_domain = 1e-10;
inline constexpr double chart_inertia_floor = 1e-10;
inline constexpr double margin_floor = 1e-6;
}  // namespace tolerances

}  // namespace maslovkit
