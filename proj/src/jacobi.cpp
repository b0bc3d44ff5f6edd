#include "maslovkit/jacobi.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace maslovkit {

void JacobiSystem::validate() const {
  if (n < 1) throw InvalidInput("JacobiSystem: n must be positive");
  if (g_diag.size() != n) throw InvalidInput("JacobiSystem: signature size mismatch");
  for (int i = 0; i < n; ++i)
    if (g_diag(i) != 1.0 && g_diag(i) != -1.0)
      throw InvalidInput("JacobiSystem: signature entries must be +1 or -1");
  if (!curvature) throw InvalidInput("JacobiSystem: missing curvature evaluator");
  if (!(a < b)) throw InvalidInput("JacobiSystem: empty interval");
  if (!(step > 0.0)) throw InvalidInput("JacobiSystem: step must be positive");
}

Matrix JacobiSystem::g_matrix() const { return g_diag.asDiagonal(); }

Matrix JacobiSystem::curvature_at(double t) const {
  Matrix m = curvature(t);
  if (m.rows() != n || m.cols() != n)
    throw InvalidInput("JacobiSystem: curvature matrix has wrong size");
  if (!m.allFinite()) throw InvalidInput("JacobiSystem: non-finite curvature");
  const Matrix gm = g_diag.asDiagonal() * m;
  if ((gm - gm.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, gm.cwiseAbs().maxCoeff()))
    throw InvalidInput("JacobiSystem: g*M(t) is not symmetric at t = " + std::to_string(t));
  return m;
}

namespace {

Matrix omega_for(const Vector& g_diag) {
  const int n = static_cast<int>(g_diag.size());
  Matrix omega = Matrix::Zero(2 * n, 2 * n);
  omega.topRightCorner(n, n) = -Matrix(g_diag.asDiagonal());
  omega.bottomLeftCorner(n, n) = Matrix(g_diag.asDiagonal());
  return omega;
}

// One RK4 step of Phi' = A(t) Phi with A = [[0, I], [M(t), 0]].
Matrix rk4_step(const JacobiSystem& sys, double t, double h, const Matrix& phi) {
  const int n = sys.n;
  auto apply = [&](double tt, const Matrix& x) {
    Matrix out(2 * n, 2 * n);
    out.topRows(n) = x.bottomRows(n);
    out.bottomRows(n) = sys.curvature_at(tt) * x.topRows(n);
    return out;
  };
  const Matrix k1 = apply(t, phi);
  const Matrix k2 = apply(t + 0.5 * h, phi + 0.5 * h * k1);
  const Matrix k3 = apply(t + 0.5 * h, phi + 0.5 * h * k2);
  const Matrix k4 = apply(t + h, phi + h * k3);
  return phi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

double drift_of(const Matrix& phi, const Matrix& omega) {
  return (phi.transpose() * omega * phi - omega).cwiseAbs().maxCoeff();
}

Matrix vertical_frame(int n) {
  Matrix f = Matrix::Zero(2 * n, n);
  f.bottomRows(n) = Matrix::Identity(n, n);
  return f;
}

}  // namespace

JacobiFlow::JacobiFlow(JacobiSystem sys, std::vector<FlowSample> samples, SpacePtr space)
    : sys_(std::move(sys)), samples_(std::move(samples)), space_(std::move(space)) {}

double JacobiFlow::max_drift() const {
  double d = 0.0;
  for (const auto& s : samples_) d = std::max(d, s.drift);
  return d;
}

Matrix JacobiFlow::phi_at(double t) const {
  if (t < sys_.a - 1e-12 || t > sys_.b + 1e-12)
    throw InvalidInput("phi_at: parameter outside the integration interval");
  // nearest stored step at or before t
  const double h = sys_.step;
  long k = static_cast<long>(std::floor((t - sys_.a) / h));
  k = std::clamp(k, 0L, static_cast<long>(samples_.size()) - 1);
  while (k > 0 && samples_[k].t > t) --k;
  Matrix phi = samples_[k].phi;
  double cur = samples_[k].t;
  while (cur < t - 1e-15 * std::max(1.0, std::abs(t))) {
    const double dt = std::min(h, t - cur);
    phi = rk4_step(sys_, cur, dt, phi);
    cur += dt;
  }
  return phi;
}

LagrangianFrame JacobiFlow::ell_at(double t) const {
  const Matrix phi = phi_at(t);
  const Matrix frame = phi.partialPivLu().solve(vertical_frame(sys_.n));
  return LagrangianFrame(space_, frame);
}

LagrangianFrame JacobiFlow::vertical() const {
  return LagrangianFrame(space_, vertical_frame(sys_.n));
}

JacobiFlow integrate_flow(const JacobiSystem& sys) {
  sys.validate();
  const Matrix omega = omega_for(sys.g_diag);
  const SpacePtr space = SymplecticSpace::from_omega(omega);

  std::vector<FlowSample> samples;
  const long nsteps = static_cast<long>(std::ceil((sys.b - sys.a) / sys.step - 1e-12));
  samples.reserve(nsteps + 1);
  Matrix phi = Matrix::Identity(2 * sys.n, 2 * sys.n);
  samples.push_back({sys.a, phi, 0.0});
  for (long i = 0; i < nsteps; ++i) {
    const double t = sys.a + i * sys.step;
    const double t_next = (i + 1 == nsteps) ? sys.b : sys.a + (i + 1) * sys.step;
    phi = rk4_step(sys, t, t_next - t, phi);
    const double drift = drift_of(phi, omega);
    if (drift > sys.drift_bound)
      throw DriftExceeded("integrate_flow: symplectic drift " + std::to_string(drift) +
                          " at t = " + std::to_string(t_next) + "; reduce the step");
    samples.push_back({t_next, phi, drift});
  }
  return JacobiFlow(sys, std::move(samples), space);
}

Matrix integrate_phi_to(const JacobiSystem& sys, double t_target) {
  sys.validate();
  Matrix phi = Matrix::Identity(2 * sys.n, 2 * sys.n);
  if (t_target == sys.a) return phi;
  const double dir = t_target > sys.a ? 1.0 : -1.0;
  const long nsteps =
      static_cast<long>(std::ceil(std::abs(t_target - sys.a) / sys.step - 1e-12));
  const Matrix omega = omega_for(sys.g_diag);
  double t = sys.a;
  for (long i = 0; i < nsteps; ++i) {
    const double t_next =
        (i + 1 == nsteps) ? t_target : sys.a + dir * (i + 1) * sys.step;
    phi = rk4_step(sys, t, t_next - t, phi);
    t = t_next;
  }
  if (drift_of(phi, omega) > sys.drift_bound)
    throw DriftExceeded("integrate_phi_to: symplectic drift exceeded the bound");
  return phi;
}

LagrangianPath lagrangian_path_from_flow(std::shared_ptr<const JacobiFlow> flow,
                                         int target_samples) {
  const auto& stored = flow->samples();
  const long nstored = static_cast<long>(stored.size());
  const long stride = std::max(1L, (nstored - 1) / std::max(1, target_samples - 1));
  std::vector<PathSample> samples;
  for (long i = 0; i < nstored - 1; i += stride)
    samples.push_back({stored[i].t, flow->ell_at(stored[i].t)});
  samples.push_back({stored.back().t, flow->ell_at(stored.back().t)});
  auto eval = [flow](double t) { return flow->ell_at(t); };
  return LagrangianPath(std::move(samples), eval);
}

SubmanifoldData SubmanifoldData::point(int n) {
  SubmanifoldData d;
  d.p_basis = Matrix(n, 0);
  d.shape = Matrix(0, 0);
  return d;
}

void validate_submanifold(const JacobiSystem& sys, const SubmanifoldData& data) {
  const int n = sys.n;
  const int k = static_cast<int>(data.p_basis.cols());
  if (data.p_basis.rows() != n) throw InvalidInput("submanifold: P basis has wrong dimension");
  if (data.shape.rows() != k || data.shape.cols() != k)
    throw InvalidInput("submanifold: shape operator has wrong size");
  if (k == 0) return;
  if (!data.p_basis.allFinite() || !data.shape.allFinite())
    throw InvalidInput("submanifold: non-finite entries");
  // P must be g-orthogonal to the geodesic direction (slot 1 of the frame)
  for (int j = 0; j < k; ++j)
    if (std::abs(sys.g_diag(0) * data.p_basis(0, j)) > 1e-9)
      throw InvalidInput("submanifold: P is not orthogonal to the geodesic direction");
  Eigen::JacobiSVD<Matrix> svd(data.p_basis);
  if (svd.singularValues()(k - 1) < 1e-10 * svd.singularValues()(0))
    throw RankDeficiency("submanifold: P basis is rank deficient");
  // g restricted to P must be nondegenerate
  const SymmetricForm gp = metric_on_p(sys, data);
  if (inertia(gp).nullity > 0)
    throw InvalidInput("submanifold: the metric restricted to P is degenerate");
  // shape must be g-symmetric on P: S^T Gp = Gp S
  const Matrix gp_m = gp.matrix();
  const Matrix asym = data.shape.transpose() * gp_m - gp_m * data.shape;
  if (asym.cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, data.shape.cwiseAbs().maxCoeff()))
    throw InvalidInput("submanifold: shape operator is not g-symmetric on P");
}

SymmetricForm metric_on_p(const JacobiSystem& sys, const SubmanifoldData& data) {
  Matrix gp = data.p_basis.transpose() * sys.g_matrix() * data.p_basis;
  return SymmetricForm(gp);
}

LagrangianFrame lagrangian_from_submanifold(const JacobiFlow& flow, const SubmanifoldData& data) {
  const JacobiSystem& sys = flow.system();
  validate_submanifold(sys, data);
  const int n = sys.n;
  const int k = static_cast<int>(data.p_basis.cols());
  if (k == 0) return flow.vertical();

  Matrix generators(2 * n, n);
  // (p_i, -S p_i) for the P directions
  for (int i = 0; i < k; ++i) {
    generators.col(i).head(n) = data.p_basis.col(i);
    generators.col(i).tail(n) = -data.p_basis * data.shape.col(i);
  }
  // (0, q) for q spanning the g-orthogonal complement of P
  const Matrix constraints = data.p_basis.transpose() * sys.g_matrix();  // k x n
  Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
  for (int i = k; i < n; ++i) {
    generators.col(i).head(n).setZero();
    generators.col(i).tail(n) = svd.matrixV().col(i);
  }
  return LagrangianFrame(flow.space(), generators);
}

namespace {

double sigma_min_vs(const JacobiFlow& flow, const LagrangianFrame& l_ref, double t) {
  return transversality_margin(flow.ell_at(t), l_ref);
}

FocalEvent make_event(const JacobiFlow& flow, const LagrangianFrame& l_ref, double t0) {
  const JacobiSystem& sys = flow.system();
  const int n = sys.n;
  FocalEvent ev;
  ev.t = t0;
  const LagrangianFrame ell = flow.ell_at(t0);
  ev.multiplicity = intersection_dimension(ell, l_ref);

  // A_P[t0]: second components of Phi_t0(L_ref) meeting {0} + R^n.
  const Matrix w = flow.phi_at(t0) * l_ref.frame();  // 2n x n
  Eigen::JacobiSVD<Matrix> svd(w.topRows(n), Eigen::ComputeFullV);
  Matrix a(n, ev.multiplicity);
  for (int i = 0; i < ev.multiplicity; ++i)
    a.col(i) = w.bottomRows(n) * svd.matrixV().col(n - 1 - i);
  // orthonormalize
  Eigen::HouseholderQR<Matrix> qr(a);
  ev.a_basis = qr.householderQ() * Matrix::Identity(n, ev.multiplicity);

  const Matrix ga = ev.a_basis.transpose() * sys.g_matrix() * ev.a_basis;
  ev.inertia_on_a = inertia(SymmetricForm(ga));
  ev.degenerate = ev.inertia_on_a.nullity > 0;
  return ev;
}

}  // namespace

FocalScan scan_intersections(const JacobiFlow& flow, const LagrangianFrame& l_ref,
                             double t_lo, double t_hi, bool include_lo) {
  const JacobiSystem& sys = flow.system();
  const double loc_tol = std::max(1e-12, 1e-10 * (sys.b - sys.a));
  FocalScan out;

  auto push_event = [&](double t0) {
    for (auto& ev : out.events) {
      if (std::abs(ev.t - t0) < 1e-6 * (sys.b - sys.a)) {
        ev.degenerate = true;  // merged cluster
        return;
      }
    }
    if (static_cast<int>(out.events.size()) >= jacobi_detail::max_events) {
      out.accumulation_warning = true;
      return;
    }
    out.events.push_back(make_event(flow, l_ref, t0));
  };

  if (include_lo && sigma_min_vs(flow, l_ref, t_lo) < jacobi_detail::event_tol) push_event(t_lo);

  const int grid = 1024;
  std::vector<double> ts(grid + 1), vs(grid + 1);
  for (int i = 0; i <= grid; ++i) {
    ts[i] = t_lo + (t_hi - t_lo) * i / grid;
    vs[i] = sigma_min_vs(flow, l_ref, ts[i]);
  }
  // interior local minima of the margin, refined by golden-section search
  const double inv_phi = 0.6180339887498948482;
  for (int i = 1; i < grid; ++i) {
    if (out.accumulation_warning) break;
    if (!(vs[i] <= vs[i - 1] && vs[i] <= vs[i + 1])) continue;
    if (vs[i] > 0.2) continue;  // nowhere near an intersection
    double lo = ts[i - 1], hi = ts[i + 1];
    double m1 = hi - inv_phi * (hi - lo), m2 = lo + inv_phi * (hi - lo);
    double f1 = sigma_min_vs(flow, l_ref, m1), f2 = sigma_min_vs(flow, l_ref, m2);
    while (hi - lo > loc_tol) {
      if (f1 < f2) {
        hi = m2;
        m2 = m1;
        f2 = f1;
        m1 = hi - inv_phi * (hi - lo);
        f1 = sigma_min_vs(flow, l_ref, m1);
      } else {
        lo = m1;
        m1 = m2;
        f1 = f2;
        m2 = lo + inv_phi * (hi - lo);
        f2 = sigma_min_vs(flow, l_ref, m2);
      }
    }
    const double t0 = 0.5 * (lo + hi);
    if (sigma_min_vs(flow, l_ref, t0) < jacobi_detail::event_tol) push_event(t0);
  }
  // explicit right-endpoint test (the grid may straddle it)
  if (!out.accumulation_warning && sigma_min_vs(flow, l_ref, t_hi) < jacobi_detail::event_tol)
    push_event(t_hi);
  return out;
}

FocalScan detect_focal_instants(const JacobiFlow& flow, const LagrangianFrame& l_ref) {
  const JacobiSystem& sys = flow.system();
  // ]a, b]: skip the initial-intersection zone
  const double zone = sys.a + 10.0 * sys.step;
  return scan_intersections(flow, l_ref, std::min(zone, sys.b), sys.b, false);
}

int ContributionLedger::total() const {
  int t = initial + final_term;
  for (const auto& [time, sig] : interior) t += sig;
  return t;
}

ContributionLedger endpoint_contributions(const JacobiFlow& flow, const SubmanifoldData& data,
                                          const std::vector<FocalEvent>& events) {
  const JacobiSystem& sys = flow.system();
  for (const auto& ev : events)
    if (ev.degenerate)
      throw DegenerateEvent("endpoint_contributions: degenerate event at t = " +
                            std::to_string(ev.t));

  ContributionLedger ledger;
  const Inertia ig = inertia(SymmetricForm(sys.g_matrix()));
  const Inertia igp = inertia(metric_on_p(sys, data));
  ledger.initial = ig.coindex - igp.coindex;  // n_+(g) - n_+(g, P)

  const double end_tol = 1e-6 * (sys.b - sys.a);
  for (const auto& ev : events) {
    if (std::abs(ev.t - sys.b) <= end_tol)
      ledger.final_term += -ev.inertia_on_a.index;  // -n_-(g, P, b)
    else
      ledger.interior.emplace_back(ev.t, ev.inertia_on_a.signature());
  }
  return ledger;
}

}  // namespace maslovkit
