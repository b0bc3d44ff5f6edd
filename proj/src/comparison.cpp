#include "maslovkit/comparison.hpp"

#include <algorithm>

namespace maslovkit {

namespace {

MetricRegime detect_regime(const JacobiSystem& sys, const SubmanifoldData& data) {
  int negatives = 0;
  for (int i = 0; i < sys.n; ++i)
    if (sys.g_diag(i) < 0.0) ++negatives;
  if (negatives == 0) return MetricRegime::riemannian;
  if (negatives == 1 && sys.g_diag(0) < 0.0) {
    // timelike geodesic; P must be spacelike for the paper's regime
    const Inertia igp = inertia(metric_on_p(sys, data));
    if (igp.index == 0 && igp.nullity == 0) return MetricRegime::timelike_lorentzian;
  }
  return MetricRegime::general;
}

double pick_epsilon(const JacobiSystem& sys, const FocalScan& conj, const FocalScan& foc) {
  double first = sys.b;
  bool any = false;
  for (const auto& ev : conj.events) {
    first = std::min(first, ev.t);
    any = true;
  }
  for (const auto& ev : foc.events) {
    first = std::min(first, ev.t);
    any = true;
  }
  double eps = any ? 0.5 * (first - sys.a) : 10.0 * sys.step;
  eps = std::max(eps, 10.0 * sys.step);
  eps = std::min(eps, 0.5 * (sys.b - sys.a));
  return eps;
}

bool has_event_in(const FocalScan& scan, double lo, double hi) {
  for (const auto& ev : scan.events)
    if (ev.t >= lo - 1e-12 && ev.t <= hi + 1e-12) return true;
  return false;
}

int count_with_multiplicity(const FocalScan& scan, double lo, double hi) {
  int c = 0;
  for (const auto& ev : scan.events)
    if (ev.t >= lo - 1e-12 && ev.t <= hi + 1e-12) c += ev.multiplicity;
  return c;
}

bool any_degenerate(const FocalScan& scan) {
  for (const auto& ev : scan.events)
    if (ev.degenerate) return true;
  return false;
}

}  // namespace

bool ComparisonReport::all_evaluated_hold() const {
  for (const auto& v : verdicts)
    if (v.status == VerdictStatus::evaluated && !v.holds) return false;
  return true;
}

ComparisonReport run_comparison(const JacobiFlow& flow, const SubmanifoldData& data,
                                const std::vector<std::pair<double, double>>& subintervals,
                                std::uint64_t seed) {
  const JacobiSystem& sys = flow.system();
  validate_submanifold(sys, data);

  ComparisonReport rep;
  rep.dim_p = static_cast<int>(data.p_basis.cols());
  rep.regime = detect_regime(sys, data);

  const LagrangianFrame l0 = flow.vertical();
  const LagrangianFrame lp = lagrangian_from_submanifold(flow, data);

  rep.conjugate_scan = detect_focal_instants(flow, l0);
  rep.focal_scan = detect_focal_instants(flow, lp);
  rep.epsilon = pick_epsilon(sys, rep.conjugate_scan, rep.focal_scan);

  if (!rep.conjugate_scan.events.empty()) {
    rep.t0 = rep.conjugate_scan.events.front().t;
    rep.mul_t0 = rep.conjugate_scan.events.front().multiplicity;
  }
  if (!rep.focal_scan.events.empty()) {
    rep.tP = rep.focal_scan.events.front().t;
    rep.mul_tP = rep.focal_scan.events.front().multiplicity;
  }

  auto flow_ptr = std::make_shared<const JacobiFlow>(flow);
  const LagrangianPath path = lagrangian_path_from_flow(flow_ptr);

  std::uint64_t stream = 0;
  auto mu_over = [&](double lo, double hi, const LagrangianFrame& ref,
                     const std::string& name) {
    MaslovOptions opt;
    opt.seed = derive_seed(seed, stream++);
    const int v = maslov_index(path.subpath(lo, hi), ref, Convention::paper, opt).value();
    rep.mu_table.push_back({lo, hi, name, v});
    return v;
  };

  const double a_eps = sys.a + rep.epsilon;
  rep.mu_L0_eps_b = mu_over(a_eps, sys.b, l0, "L0");
  rep.mu_LP_eps_b = mu_over(a_eps, sys.b, lp, "LP");

  std::vector<std::pair<double, double>> intervals = subintervals;

  auto push_verdict = [&rep](Verdict v) {
    v.slack = v.right - v.left;
    if (v.status == VerdictStatus::evaluated) v.holds = v.left <= v.right;
    rep.verdicts.push_back(std::move(v));
  };

  // (i) |mu_L0 - mu_LP| <= dim P on each requested subinterval and on [a+eps, b]
  {
    Verdict v;
    v.id = "stimamaslovgeo[a+eps,b]";
    v.left = std::abs(rep.mu_L0_eps_b - rep.mu_LP_eps_b);
    v.right = rep.dim_p;
    push_verdict(v);
  }
  std::vector<std::pair<int, int>> interval_mus;  // (mu_L0, mu_LP) per requested interval
  for (const auto& [lo, hi] : intervals) {
    if (!(lo < hi) || lo < sys.a - 1e-12 || hi > sys.b + 1e-12)
      throw InvalidInput("run_comparison: invalid subinterval");
    const int m0 = mu_over(lo, hi, l0, "L0");
    const int mp = mu_over(lo, hi, lp, "LP");
    interval_mus.emplace_back(m0, mp);
    Verdict v;
    v.id = "stimamaslovgeo[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    v.left = std::abs(m0 - mp);
    v.right = rep.dim_p;
    push_verdict(v);
  }

  // (ii) two-sided bound -n_-(g,P) <= mu_LP - mu_L0 <= dim P on [a+eps, b]
  {
    const Inertia igp = inertia(metric_on_p(sys, data));
    const int diff = rep.mu_LP_eps_b - rep.mu_L0_eps_b;
    Verdict lower;
    lower.id = "numefocmenonumconj-lower";
    lower.left = -igp.index;
    lower.right = diff;
    push_verdict(lower);
    Verdict upper;
    upper.id = "numefocmenonumconj-upper";
    upper.left = diff;
    upper.right = rep.dim_p;
    push_verdict(upper);
  }

  // (iii) existence corollaries on the requested subintervals
  for (std::size_t i = 0; i < intervals.size(); ++i) {
    const auto& [lo, hi] = intervals[i];
    const auto& [m0, mp] = interval_mus[i];
    const std::string tag = "[" + std::to_string(lo) + "," + std::to_string(hi) + "]";
    {
      Verdict v;
      v.id = "existence-focal" + tag;
      if (lo <= sys.a) {
        v.status = VerdictStatus::not_applicable;
        v.reason = "interval must exclude the initial endpoint";
      } else if (std::abs(m0) <= rep.dim_p) {
        v.status = VerdictStatus::not_applicable;
        v.reason = "|mu_L0| does not exceed dim P";
      } else {
        v.left = 1.0;
        v.right = has_event_in(rep.focal_scan, lo, hi) ? 1.0 : 0.0;
      }
      push_verdict(v);
    }
    {
      Verdict v;
      v.id = "existence-conjugate" + tag;
      if (lo <= sys.a) {
        v.status = VerdictStatus::not_applicable;
        v.reason = "interval must exclude the initial endpoint";
      } else if (std::abs(mp) <= rep.dim_p) {
        v.status = VerdictStatus::not_applicable;
        v.reason = "|mu_LP| does not exceed dim P";
      } else {
        v.left = 1.0;
        v.right = has_event_in(rep.conjugate_scan, lo, hi) ? 1.0 : 0.0;
      }
      push_verdict(v);
    }
  }

  // (iv) no-event bounds
  {
    Verdict v;
    v.id = "no-conjugate-bound";
    if (!rep.conjugate_scan.events.empty()) {
      v.status = VerdictStatus::not_applicable;
      v.reason = "conjugate instants present";
    } else {
      double worst = std::abs(rep.mu_LP_eps_b);
      for (const auto& [m0, mp] : interval_mus) worst = std::max(worst, double(std::abs(mp)));
      v.left = worst;
      v.right = rep.dim_p;
    }
    push_verdict(v);
  }
  {
    Verdict v;
    v.id = "no-focal-bound";
    if (!rep.focal_scan.events.empty()) {
      v.status = VerdictStatus::not_applicable;
      v.reason = "focal instants present";
    } else {
      double worst = std::abs(rep.mu_L0_eps_b);
      for (const auto& [m0, mp] : interval_mus) worst = std::max(worst, double(std::abs(m0)));
      v.left = worst;
      v.right = rep.dim_p;
    }
    push_verdict(v);
  }

  // (v) first focal before first conjugate, with multiplicity comparison at ties
  {
    Verdict v;
    v.id = "primafocali";
    if (rep.regime == MetricRegime::general) {
      v.status = VerdictStatus::not_applicable;
      v.reason = "asserted only for Riemannian or timelike Lorentzian metrics";
    } else if (!rep.t0.has_value()) {
      v.status = VerdictStatus::not_applicable;
      v.reason = "no conjugate instant detected";
    } else {
      // tP <= t0 (a missing tP with t0 present is a violation)
      v.left = rep.tP.value_or(sys.b + 1.0);
      v.right = *rep.t0 + 1e-9 * (sys.b - sys.a);
    }
    push_verdict(v);
    const double coincidence = 10.0 * std::max(1e-12, 1e-10 * (sys.b - sys.a));
    if (rep.regime != MetricRegime::general && rep.t0 && rep.tP &&
        std::abs(*rep.t0 - *rep.tP) <= coincidence) {
      Verdict mv;
      mv.id = "primafocali-multiplicity";
      mv.left = rep.mul_t0;
      mv.right = rep.mul_tP;
      push_verdict(mv);
    }
  }

  // (vi) Riemannian / timelike Lorentzian count bound
  {
    Verdict v;
    v.id = "focal-count-bound";
    if (rep.regime == MetricRegime::general) {
      v.status = VerdictStatus::not_applicable;
      v.reason = "asserted only for Riemannian or timelike Lorentzian metrics";
    } else if (any_degenerate(rep.conjugate_scan) || any_degenerate(rep.focal_scan)) {
      v.status = VerdictStatus::not_evaluable;
      v.reason = "degenerate events present";
    } else {
      const double end_tol = 1e-6 * (sys.b - sys.a);
      const int nf = count_with_multiplicity(rep.focal_scan, sys.a, sys.b - end_tol);
      const int nc = count_with_multiplicity(rep.conjugate_scan, sys.a, sys.b - end_tol);
      // 0 <= nf - nc <= dim P, encoded as two rows folded into one check
      v.left = std::max(0 - (nf - nc), (nf - nc) - rep.dim_p);
      v.right = 0.0;
    }
    push_verdict(v);
  }

  return rep;
}

ShiftedLagrangian shifted_start_lagrangian(const JacobiSystem& sys, double a_prime) {
  if (!(a_prime < sys.a)) throw InvalidInput("shifted_start_lagrangian: a' must precede a");
  const Matrix phi = integrate_phi_to(sys, a_prime);
  const int n = sys.n;
  Matrix vertical = Matrix::Zero(2 * n, n);
  vertical.bottomRows(n) = Matrix::Identity(n, n);
  const Matrix frame = phi.partialPivLu().solve(vertical);
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = -Matrix(sys.g_diag.asDiagonal());
  omega.bottomLeftCorner(n, n) = Matrix(sys.g_diag.asDiagonal());
  return {a_prime, LagrangianFrame(SymplecticSpace::from_omega(omega), frame)};
}

ShiftedVerdict check_shifted_criteria(const JacobiFlow& flow, const SubmanifoldData& data,
                                      double a_prime, double t0, std::uint64_t seed) {
  const JacobiSystem& sys = flow.system();
  ShiftedVerdict out;
  out.a_prime = a_prime;
  out.t0 = t0;

  const LagrangianFrame l0 = flow.vertical();
  const FocalScan conj = detect_focal_instants(flow, l0);
  const FocalScan foc = detect_focal_instants(flow, lagrangian_from_submanifold(flow, data));
  const double epsilon = pick_epsilon(sys, conj, foc);

  // match t0 against a detected conjugate event
  const FocalEvent* event = nullptr;
  for (const auto& ev : conj.events)
    if (std::abs(ev.t - t0) < 1e-5 * (sys.b - sys.a)) {
      event = &ev;
      break;
    }
  if (!event) throw InvalidInput("check_shifted_criteria: t0 is not a detected conjugate instant");
  out.mul_t0 = event->multiplicity;

  auto flow_ptr = std::make_shared<const JacobiFlow>(flow);
  const LagrangianPath path = lagrangian_path_from_flow(flow_ptr);
  MaslovOptions opt;
  opt.seed = derive_seed(seed, 11);
  out.mu_L0_eps_t0 =
      maslov_index(path.subpath(sys.a + epsilon, t0), l0, Convention::paper, opt).value();

  const Inertia ig = inertia(SymmetricForm(sys.g_matrix()));
  out.h_multiplicity = out.mul_t0 > ig.index - out.mu_L0_eps_t0;
  out.h_negative_index = out.mu_L0_eps_t0 < -ig.coindex;
  const bool first = std::abs(conj.events.front().t - event->t) < 1e-12;
  out.cora_applicable = first && !event->degenerate &&
                        out.mul_t0 > ig.index + event->inertia_on_a.index;
  out.applicable = out.h_multiplicity || out.h_negative_index || out.cora_applicable;
  if (!out.applicable) return out;

  // conclusion: some t' in [a, t0] with ell(t') meeting L'
  const ShiftedLagrangian shifted = shifted_start_lagrangian(sys, a_prime);
  const LagrangianFrame l_prime = shifted.frame.in_space(flow.space());
  const double slack = 1e-6 * (sys.b - sys.a);
  const FocalScan scan = scan_intersections(flow, l_prime, sys.a, std::min(t0 + slack, sys.b), true);
  if (!scan.events.empty()) {
    out.conclusion_holds = true;
    out.t_prime = scan.events.front().t;
  }
  return out;
}

}  // namespace maslovkit
