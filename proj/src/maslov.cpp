#include "maslovkit/maslov.hpp"

#include <algorithm>
#include <cmath>

#include <unsupported/Eigen/MatrixFunctions>

namespace maslovkit {

namespace {

InertiaComputation chart_inertia(const SymmetricForm& b) {
  return inertia_detailed(b, tolerances::chart_inertia_floor);
}

}  // namespace

LagrangianPath::LagrangianPath(std::vector<PathSample> samples, Evaluator refiner)
    : samples_(std::move(samples)), refiner_(std::move(refiner)) {
  if (samples_.size() < 2) throw InvalidInput("LagrangianPath: needs at least 2 samples");
  for (std::size_t i = 0; i + 1 < samples_.size(); ++i) {
    if (!(samples_[i].t < samples_[i + 1].t))
      throw InvalidInput("LagrangianPath: sample parameters must be strictly increasing");
    if (!same_space(samples_[i].frame.space(), samples_[i + 1].frame.space()))
      throw InvalidInput("LagrangianPath: samples from different spaces");
  }
}

LagrangianFrame LagrangianPath::at(double t) const {
  for (const auto& s : samples_)
    if (s.t == t) return s.frame;
  if (!refiner_) throw RefinementExhausted("LagrangianPath: no evaluator for off-sample parameter");
  if (t < a() - 1e-12 || t > b() + 1e-12)
    throw InvalidInput("LagrangianPath: parameter outside [a, b]");
  return refiner_(t);
}

LagrangianPath LagrangianPath::subpath(double alpha, double beta, int min_samples) const {
  if (!(alpha < beta) || alpha < a() - 1e-12 || beta > b() + 1e-12)
    throw InvalidInput("subpath: invalid interval");
  std::vector<PathSample> out;
  out.push_back({alpha, at(alpha)});
  for (const auto& s : samples_)
    if (s.t > alpha && s.t < beta) out.push_back(s);
  out.push_back({beta, at(beta)});
  if (static_cast<int>(out.size()) < min_samples && refiner_) {
    std::vector<PathSample> dense;
    const int m = min_samples;
    for (int i = 0; i < m; ++i) {
      const double t = alpha + (beta - alpha) * i / (m - 1);
      dense.push_back({t, at(t)});
    }
    out = std::move(dense);
  }
  return LagrangianPath(std::move(out), refiner_);
}

LagrangianPath LagrangianPath::reversed() const {
  std::vector<PathSample> out;
  const double lo = a(), hi = b();
  for (auto it = samples_.rbegin(); it != samples_.rend(); ++it)
    out.push_back({lo + hi - it->t, it->frame});
  Evaluator rev;
  if (refiner_) {
    Evaluator inner = refiner_;
    rev = [inner, lo, hi](double t) { return inner(lo + hi - t); };
  }
  return LagrangianPath(std::move(out), rev);
}

LagrangianPath LagrangianPath::in_space(const SpacePtr& other) const {
  std::vector<PathSample> out;
  out.reserve(samples_.size());
  for (const auto& s : samples_) out.push_back({s.t, s.frame.in_space(other)});
  Evaluator wrapped;
  if (refiner_) {
    Evaluator inner = refiner_;
    wrapped = [inner, other](double t) { return inner(t).in_space(other); };
  }
  return LagrangianPath(std::move(out), wrapped);
}

int MaslovResult::value() const {
  if (value_times_two % 2 != 0)
    throw Error("MaslovResult: half-integer value has no integer form");
  return value_times_two / 2;
}

namespace {

// Shared engine for the chart method.  Recursively partitions the sample
// list until each piece admits a reference Lagrangian transverse to L0 and
// to all of its samples, then accumulates the per-piece chart differences.
class ChartEngine {
 public:
  ChartEngine(const LagrangianPath& path, const LagrangianFrame& l0, const MaslovOptions& opt)
      : path_(path), l0_(l0), opt_(opt), space_(l0.space()) {
    if (!same_space(path.space(), l0.space()))
      throw InvalidInput("maslov_index: path and reference in different spaces");
    samples_ = path.samples();
    densify();
  }

  // Runs the partition and returns the per-segment data.
  struct Piece {
    std::vector<PathSample> samples;
    LagrangianFrame reference;
    Piece(std::vector<PathSample> s, LagrangianFrame r)
        : samples(std::move(s)), reference(std::move(r)) {}
  };

  std::vector<Piece> partition() {
    std::vector<Piece> pieces;
    process(samples_, pieces, 0);
    return pieces;
  }

 private:
  void densify() {
    std::size_t i = 0;
    while (i + 1 < samples_.size()) {
      if (static_cast<int>(samples_.size()) > opt_.max_samples)
        throw RefinementExhausted("maslov_index: sample budget exhausted while densifying");
      if (frame_gap(samples_[i].frame, samples_[i + 1].frame) > opt_.gap_max) {
        if (!path_.has_refiner())
          throw RefinementExhausted(
              "maslov_index: consecutive samples too far apart and no evaluator available");
        const double mid = 0.5 * (samples_[i].t + samples_[i + 1].t);
        if (mid <= samples_[i].t || mid >= samples_[i + 1].t)
          throw RefinementExhausted("maslov_index: refinement interval collapsed");
        samples_.insert(samples_.begin() + i + 1, {mid, path_.at(mid)});
      } else {
        ++i;
      }
    }
  }

  void process(const std::vector<PathSample>& seg, std::vector<Piece>& pieces, int depth) {
    if (depth > opt_.max_depth)
      throw RefinementExhausted("maslov_index: partition depth exhausted");
    if (auto ref = find_reference(seg)) {
      pieces.emplace_back(seg, *ref);
      return;
    }
    if (seg.size() >= 3) {
      const std::size_t mid = seg.size() / 2;
      std::vector<PathSample> left(seg.begin(), seg.begin() + mid + 1);
      std::vector<PathSample> right(seg.begin() + mid, seg.end());
      process(left, pieces, depth + 1);
      process(right, pieces, depth + 1);
      return;
    }
    // two samples and still no admissible chart: insert a midpoint
    if (!path_.has_refiner())
      throw RefinementExhausted("maslov_index: path too coarse and no evaluator available");
    const double mid = 0.5 * (seg.front().t + seg.back().t);
    if (mid <= seg.front().t || mid >= seg.back().t)
      throw RefinementExhausted("maslov_index: refinement interval collapsed");
    std::vector<PathSample> refined{seg.front(), {mid, path_.at(mid)}, seg.back()};
    process(refined, pieces, depth + 1);
  }

  bool admissible(const LagrangianFrame& candidate, const std::vector<PathSample>& seg) const {
    if (transversality_margin(candidate, l0_) < opt_.accept_margin) return false;
    for (const auto& s : seg)
      if (transversality_margin(candidate, s.frame) < opt_.accept_margin) return false;
    return true;
  }

  std::optional<LagrangianFrame> find_reference(const std::vector<PathSample>& seg) {
    // For an orthogonal omega (omega^2 = -I), omega times the midpoint frame
    // is a Lagrangian Euclid-orthogonal to the midpoint: a maximally distant
    // first candidate, independent of the seed.
    const Matrix& omega = space_->omega();
    if ((omega.transpose() * omega - Matrix::Identity(omega.rows(), omega.cols()))
            .cwiseAbs()
            .maxCoeff() < 1e-12) {
      const Matrix mid = seg[seg.size() / 2].frame.frame();
      const LagrangianFrame candidate(space_, omega * mid);
      if (admissible(candidate, seg)) return candidate;
    }
    for (int k = 0; k < opt_.draws_per_segment; ++k) {
      LagrangianFrame candidate =
          random_lagrangian(space_, derive_seed(opt_.seed, counter_++), {}, 0.0, 1);
      if (admissible(candidate, seg)) return candidate;
    }
    return std::nullopt;
  }

  const LagrangianPath& path_;
  const LagrangianFrame& l0_;
  MaslovOptions opt_;
  SpacePtr space_;
  std::vector<PathSample> samples_;
  std::uint64_t counter_ = 0;
};

MaslovResult chart_maslov(const LagrangianPath& path, const LagrangianFrame& l0,
                          Convention convention, const MaslovOptions& opt) {
  ChartEngine engine(path, l0, opt);
  const auto pieces = engine.partition();

  MaslovResult out;
  out.convention = convention;
  int acc = 0;
  for (const auto& piece : pieces) {
    const Chart chart(l0, piece.reference);
    const auto lo = chart_inertia(chart_apply(chart, piece.samples.front().frame));
    const auto hi = chart_inertia(chart_apply(chart, piece.samples.back().frame));
    SegmentLog log;
    log.t_lo = piece.samples.front().t;
    log.t_hi = piece.samples.back().t;
    log.reference_frame = piece.reference.frame();
    log.n_plus_lo = lo.inertia.coindex;
    log.n_plus_hi = hi.inertia.coindex;
    log.nullity_lo = lo.inertia.nullity;
    log.nullity_hi = hi.inertia.nullity;
    log.sign_lo = lo.inertia.signature();
    log.sign_hi = hi.inertia.signature();
    log.marginal = lo.marginal || hi.marginal;
    out.segment_log.push_back(std::move(log));
    if (convention == Convention::robbin_salamon)
      acc += hi.inertia.signature() - lo.inertia.signature();
    else
      acc += 2 * (hi.inertia.coindex - lo.inertia.coindex);
  }
  out.value_times_two = acc;
  out.endpoint_degenerate_a = !out.segment_log.empty() && out.segment_log.front().nullity_lo > 0;
  out.endpoint_degenerate_b = !out.segment_log.empty() && out.segment_log.back().nullity_hi > 0;
  return out;
}

}  // namespace

MaslovResult maslov_index(const LagrangianPath& path, const LagrangianFrame& l0,
                          Convention convention, const MaslovOptions& options) {
  if (convention == Convention::opposite_form) {
    const SpacePtr neg = opposite_space(path.space());
    MaslovResult r = chart_maslov(path.in_space(neg), l0.in_space(neg), Convention::paper, options);
    r.convention = Convention::opposite_form;
    return r;
  }
  return chart_maslov(path, l0, convention, options);
}

namespace {

// Signed eigenvalue of smallest magnitude, for crossing bracketing.
double smallest_signed_eigenvalue(const SymmetricForm& b) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(b.matrix(), Eigen::EigenvaluesOnly);
  const Vector& evs = es.eigenvalues();
  double best = evs(0);
  for (int i = 1; i < evs.size(); ++i)
    if (std::abs(evs(i)) < std::abs(best)) best = evs(i);
  return best;
}

struct ScanChart {
  Chart chart;
  const LagrangianPath& path;
  SymmetricForm form(double t) const { return chart_apply(chart, path.at(t)); }
  double s(double t) const { return smallest_signed_eigenvalue(form(t)); }
};

// B'(t0) restricted to the kernel of B(t0); kernel basis taken as the
// `mult` smallest-|eigenvalue| eigenvectors.
SymmetricForm restricted_derivative(const ScanChart& sc, double t0, int mult, double h,
                                    double a, double b) {
  const SymmetricForm b0 = sc.form(t0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(b0.matrix());
  const Vector evs = es.eigenvalues();
  std::vector<int> order(evs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return std::abs(evs(i)) < std::abs(evs(j)); });
  Matrix kernel(b0.dim(), mult);
  for (int i = 0; i < mult; ++i) kernel.col(i) = es.eigenvectors().col(order[i]);

  double lo = std::max(a, t0 - h), hi = std::min(b, t0 + h);
  if (hi <= lo) throw Error("restricted_derivative: degenerate step");
  const Matrix diff = (sc.form(hi).matrix() - sc.form(lo).matrix()) / (hi - lo);
  Matrix r = kernel.transpose() * diff * kernel;
  return SymmetricForm(0.5 * (r + r.transpose()), 1e-6);
}

}  // namespace

CrossingResult maslov_index_crossings(const LagrangianPath& path, const LagrangianFrame& l0,
                                      const MaslovOptions& options) {
  if (!path.has_refiner())
    throw InvalidInput("maslov_index_crossings: path needs an evaluator");
  const double a = path.a(), b = path.b();
  const double loc_tol = std::max(1e-12, 1e-10 * (b - a));
  const double h = 1e-5 * (b - a);
  const double end_window = std::max(10.0 * loc_tol, 1e-9 * (b - a));

  ChartEngine engine(path, l0, options);
  const auto pieces = engine.partition();

  std::vector<Crossing> crossings;
  auto already_have = [&](double t) {
    for (const auto& c : crossings)
      if (std::abs(c.t - t) < std::max(100.0 * loc_tol, 1e-9 * (b - a))) return true;
    return false;
  };

  auto record = [&](const ScanChart& sc, double t0) {
    if (already_have(t0)) return;
    const LagrangianFrame frame_t0 = path.at(t0);
    const int mult = intersection_dimension(frame_t0, l0);
    if (mult == 0) return;  // spurious bracket (eigenvalue branch switch)
    Crossing c;
    c.t = t0;
    c.multiplicity = mult;
    c.at_start = (t0 - a) <= end_window;
    c.at_end = (b - t0) <= end_window;
    const SymmetricForm b0 = restricted_derivative(sc, t0, mult, h, a, b);
    const Inertia in = inertia(b0);
    if (in.nullity > 0)
      throw DegenerateCrossing("degenerate crossing at t = " + std::to_string(t0), t0);
    c.form_inertia = in;
    crossings.push_back(c);
  };

  for (const auto& piece : pieces) {
    const ScanChart sc{Chart(l0, piece.reference), path};
    const double lo = piece.samples.front().t, hi = piece.samples.back().t;
    const int grid = std::max(9, options.crossing_grid);
    std::vector<double> ts(grid), vs(grid);
    for (int i = 0; i < grid; ++i) {
      ts[i] = lo + (hi - lo) * i / (grid - 1);
      vs[i] = sc.s(ts[i]);
    }
    // endpoint crossings of the whole path: treated directly
    if (lo == a && intersection_dimension(path.at(a), l0) > 0) record(sc, a);
    if (hi == b && intersection_dimension(path.at(b), l0) > 0) record(sc, b);

    for (int i = 0; i + 1 < grid; ++i) {
      if (vs[i] == 0.0) {
        record(sc, ts[i]);
        continue;
      }
      if (vs[i] * vs[i + 1] < 0.0) {
        double t_lo = ts[i], t_hi = ts[i + 1];
        double v_lo = vs[i];
        while (t_hi - t_lo > loc_tol) {
          const double mid = 0.5 * (t_lo + t_hi);
          const double vm = sc.s(mid);
          if (vm == 0.0) {
            t_lo = t_hi = mid;
            break;
          }
          if (v_lo * vm < 0.0)
            t_hi = mid;
          else {
            t_lo = mid;
            v_lo = vm;
          }
        }
        record(sc, 0.5 * (t_lo + t_hi));
      }
    }
    // dips of |s| that do not change sign (even-multiplicity, mixed-sign)
    for (int i = 1; i + 1 < grid; ++i) {
      if (std::abs(vs[i]) <= std::abs(vs[i - 1]) && std::abs(vs[i]) <= std::abs(vs[i + 1]) &&
          vs[i - 1] * vs[i] > 0.0 && vs[i] * vs[i + 1] > 0.0) {
        double t_lo = ts[i - 1], t_hi = ts[i + 1];
        while (t_hi - t_lo > loc_tol) {
          const double m1 = t_lo + (t_hi - t_lo) / 3.0;
          const double m2 = t_hi - (t_hi - t_lo) / 3.0;
          if (std::abs(sc.s(m1)) < std::abs(sc.s(m2)))
            t_hi = m2;
          else
            t_lo = m1;
        }
        const double t0 = 0.5 * (t_lo + t_hi);
        if (intersection_dimension(path.at(t0), l0) > 0) record(sc, t0);
      }
    }
  }

  std::sort(crossings.begin(), crossings.end(),
            [](const Crossing& x, const Crossing& y) { return x.t < y.t; });

  int total = 0;
  for (const auto& c : crossings) {
    if (c.at_start)
      total += c.form_inertia.coindex;
    else if (c.at_end)
      total += -c.form_inertia.index;
    else
      total += c.form_inertia.signature();
  }

  CrossingResult out;
  out.result.value_times_two = 2 * total;
  out.result.convention = Convention::paper;
  out.crossings = std::move(crossings);
  return out;
}

LagrangianPath chart_arc(const LagrangianFrame& from, const LagrangianFrame& to,
                         const LagrangianFrame& infinity, int nsamples) {
  const Chart chart(from, infinity);
  const SymmetricForm target = chart_apply(chart, to);
  const Matrix target_m = target.matrix();
  auto eval = [chart, target_m](double s) {
    return chart_invert(chart, SymmetricForm(s * target_m));
  };
  std::vector<PathSample> samples;
  samples.reserve(nsamples);
  for (int i = 0; i < nsamples; ++i) {
    const double s = static_cast<double>(i) / (nsamples - 1);
    samples.push_back({s, eval(s)});
  }
  return LagrangianPath(std::move(samples), eval);
}

int hormander_index(const HormanderQuery& q, std::uint64_t seed) {
  const SpacePtr& space = q.L0.space();
  if (!same_space(space, q.L1.space()) || !same_space(space, q.La.space()) ||
      !same_space(space, q.Lb.space()))
    throw InvalidInput("hormander_index: frames from different spaces");
  const LagrangianFrame infinity =
      random_lagrangian(space, seed, {q.L0, q.L1, q.La, q.Lb});
  const LagrangianPath path = chart_arc(q.La, q.Lb, infinity);
  MaslovOptions opt;
  opt.seed = derive_seed(seed, 0xfeed);
  const MaslovResult m0 = maslov_index(path, q.L0, Convention::robbin_salamon, opt);
  const MaslovResult m1 = maslov_index(path, q.L1, Convention::robbin_salamon, opt);
  return m0.value_times_two - m1.value_times_two;
}

int kashiwara_index(const LagrangianFrame& l0, const LagrangianFrame& l1,
                    const LagrangianFrame& l2, std::uint64_t seed) {
  const int tau = hormander_index({l0, l1, l2, l0}, seed);
  const int tau_check = -hormander_index({l0, l1, l0, l2}, derive_seed(seed, 7));
  if (tau != tau_check)
    throw Error("kashiwara_index: internal consistency check failed");
  return tau;
}

LagrangianPath random_hamiltonian_path(const SpacePtr& space, std::uint64_t seed,
                                       double time_span, int nsamples) {
  Rng rng(seed);
  const int d = space->ambient_dim();
  // entry scale 1/sqrt(2n) keeps the generator's norm O(1) across dimensions
  const Matrix h = random_symmetric_matrix(rng, d, 1.0 / std::sqrt(double(d)));
  const Matrix k = space->omega().partialPivLu().solve(h);  // K = Omega^{-1} H, in sp(V, omega)
  const LagrangianFrame start = random_lagrangian(space, derive_seed(seed, 1));
  const Matrix start_frame = start.frame();
  auto eval = [space, k, start_frame](double t) {
    const Matrix flow = (t * k).exp();
    return LagrangianFrame(space, flow * start_frame);
  };
  std::vector<PathSample> samples;
  samples.reserve(nsamples);
  for (int i = 0; i < nsamples; ++i) {
    const double t = time_span * i / (nsamples - 1);
    samples.push_back({t, eval(t)});
  }
  return LagrangianPath(std::move(samples), eval);
}

bool EstimateReport::all_hold() const {
  if (!opposite_identity_holds) return false;
  for (const auto& b : bounds)
    if (!b.holds) return false;
  return true;
}

EstimateReport check_estimates(const LagrangianPath& path, const LagrangianFrame& l0,
                               const LagrangianFrame& l1, const MaslovOptions& options) {
  EstimateReport rep;
  rep.n = l0.n();
  const LagrangianFrame la = path.samples().front().frame;
  const LagrangianFrame lb = path.samples().back().frame;

  MaslovOptions o0 = options;
  MaslovOptions o1 = options;
  o1.seed = derive_seed(options.seed, 1);
  MaslovOptions oneg = options;
  oneg.seed = derive_seed(options.seed, 2);

  rep.mu_L0 = maslov_index(path, l0, Convention::paper, o0).value();
  rep.mu_L1 = maslov_index(path, l1, Convention::paper, o1).value();
  rep.mu_L0_opposite = maslov_index(path, l0, Convention::opposite_form, oneg).value();

  rep.dim_L0L1 = intersection_dimension(l0, l1);
  rep.dim_ab = intersection_dimension(la, lb);
  rep.dim_a0 = intersection_dimension(la, l0);
  rep.dim_a1 = intersection_dimension(la, l1);
  rep.dim_b0 = intersection_dimension(lb, l0);
  rep.dim_b1 = intersection_dimension(lb, l1);

  const int diff = rep.mu_L0 - rep.mu_L1;
  const int diff_dims = diff - rep.dim_a0 + rep.dim_a1 + rep.dim_b0 - rep.dim_b1;

  auto push = [&rep](const std::string& id, int left, int right) {
    EstimateBound b;
    b.id = id;
    b.left = left;
    b.right = right;
    b.slack = right - left;
    b.holds = b.slack >= 0;
    rep.bounds.push_back(b);
  };
  push("best", std::abs(diff), rep.n - rep.dim_L0L1);
  push("best2", std::abs(diff), rep.n - rep.dim_ab);
  push("best-dims", std::abs(diff_dims), rep.n - rep.dim_L0L1);
  push("best3", std::abs(diff_dims), rep.n - rep.dim_ab);

  rep.opposite_identity_holds =
      rep.mu_L0_opposite == -rep.mu_L0 + rep.dim_a0 - rep.dim_b0;
  return rep;
}

}  // namespace maslovkit
