#pragma once

#include <functional>
#include <optional>

#include "maslovkit/lagrangian.hpp"

namespace maslovkit {

enum class Convention { paper, robbin_salamon, opposite_form };

struct PathSample {
  double t;
  LagrangianFrame frame;
};

/// Sampled curve [a,b] -> Lagrangian Grassmannian, optionally with an
/// evaluator that produces the frame at arbitrary parameter values.
class LagrangianPath {
 public:
  using Evaluator = std::function<LagrangianFrame(double)>;

  LagrangianPath(std::vector<PathSample> samples, Evaluator refiner = nullptr);

  const std::vector<PathSample>& samples() const { return samples_; }
  const SpacePtr& space() const { return samples_.front().frame.space(); }
  double a() const { return samples_.front().t; }
  double b() const { return samples_.back().t; }
  bool has_refiner() const { return static_cast<bool>(refiner_); }

  /// Frame at parameter t (exact sample or refiner).
  LagrangianFrame at(double t) const;

  LagrangianPath subpath(double alpha, double beta, int min_samples = 9) const;
  LagrangianPath reversed() const;

  /// Same sample frames reinterpreted in another space over the same R^{2n}.
  LagrangianPath in_space(const SpacePtr& other) const;

 private:
  std::vector<PathSample> samples_;
  Evaluator refiner_;
};

struct MaslovOptions {
  std::uint64_t seed = 0x6d61736c6f76ULL;
  double margin_floor = tolerances::margin_floor;  // random-generation floor
  // Chart acceptance margin for a segment's reference Lagrangian.  Together
  // with gap_max it keeps the continuous path inside the chart domain
  // between samples, not just at them.
  double accept_margin = 0.1;
  int draws_per_segment = 16;
  double gap_max = 0.04;       // max principal-angle jump between samples
  int max_samples = 40000;
  int max_depth = 48;
  int crossing_grid = 129;     // scan points per segment in the crossing method
};

struct SegmentLog {
  double t_lo = 0.0, t_hi = 0.0;
  Matrix reference_frame;  // the L1 used on this piece
  int n_plus_lo = 0, n_plus_hi = 0;
  int nullity_lo = 0, nullity_hi = 0;
  int sign_lo = 0, sign_hi = 0;
  bool marginal = false;
};

struct MaslovResult {
  int value_times_two = 0;
  Convention convention = Convention::paper;
  std::vector<SegmentLog> segment_log;
  bool endpoint_degenerate_a = false;
  bool endpoint_degenerate_b = false;

  /// Integer value; valid for the paper and opposite_form conventions
  /// (value_times_two is always even there).
  int value() const;
};

/// Maslov index of the path relative to L0, by per-segment chart evaluation
/// with adaptively chosen transverse reference Lagrangians.
MaslovResult maslov_index(const LagrangianPath& path, const LagrangianFrame& l0,
                          Convention convention = Convention::paper,
                          const MaslovOptions& options = {});

struct Crossing {
  double t = 0.0;
  int multiplicity = 0;
  Inertia form_inertia;  // inertia of B'(t0) restricted to Ker B(t0)
  bool at_start = false, at_end = false;
};

struct CrossingResult {
  MaslovResult result;  // paper convention, assembled from the crossings
  std::vector<Crossing> crossings;
};

/// Crossing-form evaluation: locates the degeneracy instants of the chart
/// image, restricts the derivative to the kernel and sums the local
/// contributions.  Requires an evaluator and nondegenerate crossings.
CrossingResult maslov_index_crossings(const LagrangianPath& path, const LagrangianFrame& l0,
                                      const MaslovOptions& options = {});

struct HormanderQuery {
  LagrangianFrame L0, L1, La, Lb;
};

/// q(L0, L1; La, Lb) = difference of the two Maslov indices of any path from
/// La to Lb, evaluated in the half-integer convention and returned doubled
/// so the result is always an exact integer.
int hormander_index(const HormanderQuery& q, std::uint64_t seed = 0x686f726dULL);

/// tau(L0, L1, L2) = q(L0, L1; L2, L0); the three-Lagrangian index.
int kashiwara_index(const LagrangianFrame& l0, const LagrangianFrame& l1,
                    const LagrangianFrame& l2, std::uint64_t seed = 0x6b617368ULL);

/// Straight chart interpolation from one Lagrangian to another through a
/// common transverse "infinity" Lagrangian.
LagrangianPath chart_arc(const LagrangianFrame& from, const LagrangianFrame& to,
                         const LagrangianFrame& infinity, int nsamples = 33);

/// Path t -> exp(t K) L_start for a random Hamiltonian K; smooth, with
/// evaluator.  The workhorse of the randomized property suites.
LagrangianPath random_hamiltonian_path(const SpacePtr& space, std::uint64_t seed,
                                       double time_span = 2.0, int nsamples = 33);

struct EstimateBound {
  std::string id;
  int left = 0, right = 0;
  bool holds = false;
  int slack = 0;
};

/// Evaluation of the four reference-Lagrangian comparison inequalities plus
/// the opposite-form identity.
struct EstimateReport {
  int n = 0;
  int mu_L0 = 0, mu_L1 = 0;
  int mu_L0_opposite = 0;
  int dim_L0L1 = 0, dim_ab = 0;
  int dim_a0 = 0, dim_a1 = 0, dim_b0 = 0, dim_b1 = 0;
  std::vector<EstimateBound> bounds;  // ids: best, best2, best-dims, best3
  bool opposite_identity_holds = false;

  bool all_hold() const;
};

EstimateReport check_estimates(const LagrangianPath& path, const LagrangianFrame& l0,
                               const LagrangianFrame& l1, const MaslovOptions& options = {});

}  // namespace maslovkit
