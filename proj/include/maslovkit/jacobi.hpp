#pragma once

#include "maslovkit/maslov.hpp"

namespace maslovkit {

using CurvatureFn = std::function<Matrix(double)>;

/// Linear Jacobi system in a parallel frame: metric signature g (diagonal,
/// entries +-1), curvature operator M(t) with g*M(t) symmetric, integration
/// interval and step.  The Jacobi equation is J'' = M(t) J.
struct JacobiSystem {
  int n = 0;
  Vector g_diag;         // n entries in {+1, -1}
  CurvatureFn curvature; // t -> n x n matrix
  double a = 0.0, b = 1.0;
  double step = 1e-3;
  double drift_bound = 1e-6;

  void validate() const;
  Matrix g_matrix() const;

  /// Curvature evaluated with the g-symmetry invariant enforced.
  Matrix curvature_at(double t) const;
};

struct FlowSample {
  double t = 0.0;
  Matrix phi;            // 2n x 2n
  double drift = 0.0;    // max-norm symplecticity residual
};

/// Integrated flow of the first-order system (J, J')' = (J', M(t) J) on the
/// symplectic space R^n + R^n with omega((v1,w1),(v2,w2)) = g(v2,w1) - g(v1,w2).
class JacobiFlow {
 public:
  JacobiFlow(JacobiSystem sys, std::vector<FlowSample> samples, SpacePtr space);

  const JacobiSystem& system() const { return sys_; }
  const std::vector<FlowSample>& samples() const { return samples_; }
  const SpacePtr& space() const { return space_; }
  double max_drift() const;

  /// Phi_t, by local re-integration from the nearest stored step.
  Matrix phi_at(double t) const;

  /// ell(t) = Phi_t^{-1}({0} + R^n).
  LagrangianFrame ell_at(double t) const;

  /// L0 = {0} + R^n.
  LagrangianFrame vertical() const;

 private:
  JacobiSystem sys_;
  std::vector<FlowSample> samples_;
  SpacePtr space_;
};

JacobiFlow integrate_flow(const JacobiSystem& sys);

/// The flow matrix at an arbitrary parameter (also outside [a,b], used for
/// the shifted-endpoint construction); integrates from t0 = a with Phi_a = I.
Matrix integrate_phi_to(const JacobiSystem& sys, double t_target);

LagrangianPath lagrangian_path_from_flow(std::shared_ptr<const JacobiFlow> flow,
                                         int target_samples = 513);

/// Initial submanifold data in the parallel frame: P a Euclid-orthonormal
/// basis of a subspace of the g-orthogonal complement of the geodesic
/// direction (slot 1), and the shape operator S on P (g-symmetric).
struct SubmanifoldData {
  Matrix p_basis;  // n x k
  Matrix shape;    // k x k, operator in the p_basis coordinates

  static SubmanifoldData point(int n);
  int codim(int n) const { return n - static_cast<int>(p_basis.cols()); }
};

/// Validates the data against g: P inside the geodesic normal space, g|P
/// nondegenerate, shape g-symmetric on P.
void validate_submanifold(const JacobiSystem& sys, const SubmanifoldData& data);

/// Restriction of g to P as a form in the p_basis coordinates.
SymmetricForm metric_on_p(const JacobiSystem& sys, const SubmanifoldData& data);

/// L_P = {(v, w) : v in P, w + S v in the g-orthogonal complement of P}.
LagrangianFrame lagrangian_from_submanifold(const JacobiFlow& flow, const SubmanifoldData& data);

struct FocalEvent {
  double t = 0.0;
  int multiplicity = 0;
  Matrix a_basis;        // n x multiplicity, basis of A_P[t]
  Inertia inertia_on_a;  // inertia of g restricted to A_P[t]
  bool degenerate = false;
};

struct FocalScan {
  std::vector<FocalEvent> events;
  bool accumulation_warning = false;
};

/// Scans ]a, b] for instants with ell(t) meeting L_ref, with multiplicity
/// and the inertia of g on the space of derivatives of vanishing fields.
FocalScan detect_focal_instants(const JacobiFlow& flow, const LagrangianFrame& l_ref);

/// Same scan on a subinterval; include_lo additionally tests the left endpoint.
FocalScan scan_intersections(const JacobiFlow& flow, const LagrangianFrame& l_ref,
                             double t_lo, double t_hi, bool include_lo);

/// Closed-form ledger of Maslov contributions: initial endpoint, interior
/// signatures, final endpoint.  Refuses degenerate events.
struct ContributionLedger {
  int initial = 0;
  std::vector<std::pair<double, int>> interior;  // (t, signature)
  int final_term = 0;
  int total() const;
};

ContributionLedger endpoint_contributions(const JacobiFlow& flow, const SubmanifoldData& data,
                                          const std::vector<FocalEvent>& events);

namespace jacobi_detail {
inline constexpr double event_tol = 1e-7;
inline constexpr int max_events = 64;
}  // namespace jacobi_detail

}  // namespace maslovkit
