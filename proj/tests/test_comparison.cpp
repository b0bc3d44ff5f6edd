#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <maslovkit/comparison.hpp>

using namespace maslovkit;

namespace {

const double kPi = 3.14159265358979323846;

JacobiSystem flat_system(int n, double b = 3.0, double step = 1e-3) {
  JacobiSystem sys;
  sys.n = n;
  sys.g_diag = Vector::Ones(n);
  sys.curvature = [n](double) { return Matrix::Zero(n, n); };
  sys.a = 0.0;
  sys.b = b;
  sys.step = step;
  return sys;
}

JacobiSystem sphere_system(int n, double b, double step = 1e-3) {
  JacobiSystem sys = flat_system(n, b, step);
  sys.curvature = [n](double) {
    Vector d = -Vector::Ones(n);
    d(0) = 0.0;
    return Matrix(d.asDiagonal());
  };
  return sys;
}

SubmanifoldData normal_space_submanifold(int n, double shape_scale) {
  SubmanifoldData d;
  d.p_basis = Matrix::Zero(n, n - 1);
  d.p_basis.bottomRows(n - 1) = Matrix::Identity(n - 1, n - 1);
  d.shape = shape_scale * Matrix::Identity(n - 1, n - 1);
  return d;
}

const Verdict& find_verdict(const ComparisonReport& rep, const std::string& id) {
  for (const auto& v : rep.verdicts)
    if (v.id == id) return v;
  throw std::runtime_error("verdict not found: " + id);
}

}  // namespace

TEST_CASE("flat space with the spherical submanifold, r = 2") {
  const JacobiFlow flow = integrate_flow(flat_system(3, 3.0));
  const SubmanifoldData data = normal_space_submanifold(3, 0.5);  // S = (1/r) Id, r = 2
  const ComparisonReport rep = run_comparison(flow, data, {}, 7);

  CHECK(rep.regime == MetricRegime::riemannian);
  CHECK(rep.mu_L0_eps_b == 0);
  CHECK(rep.mu_LP_eps_b == 2);
  REQUIRE(rep.tP.has_value());
  CHECK(*rep.tP == doctest::Approx(2.0).epsilon(1e-8));
  CHECK_FALSE(rep.t0.has_value());

  const Verdict& geo = find_verdict(rep, "stimamaslovgeo[a+eps,b]");
  CHECK(geo.holds);
  CHECK(geo.slack == 0.0);  // |0 - 2| = 2 = dim P
  const Verdict& upper = find_verdict(rep, "numefocmenonumconj-upper");
  CHECK(upper.holds);
  CHECK(upper.slack == 0.0);
  CHECK(find_verdict(rep, "numefocmenonumconj-lower").holds);
  CHECK(rep.all_evaluated_hold());
}

TEST_CASE("sphere with the totally geodesic equatorial submanifold") {
  const JacobiFlow flow = integrate_flow(sphere_system(3, 2.0 * kPi));
  const SubmanifoldData data = normal_space_submanifold(3, 0.0);  // S = 0
  const ComparisonReport rep = run_comparison(flow, data, {}, 11);

  REQUIRE(rep.tP.has_value());
  REQUIRE(rep.t0.has_value());
  CHECK(*rep.tP == doctest::Approx(kPi / 2).epsilon(1e-6));
  CHECK(*rep.t0 == doctest::Approx(kPi).epsilon(1e-6));
  CHECK(find_verdict(rep, "primafocali").holds);
  CHECK(rep.all_evaluated_hold());
}

TEST_CASE("point submanifold: indices coincide and the dim P = 0 bound is tight") {
  const JacobiFlow flow = integrate_flow(sphere_system(2, 2.5 * kPi));
  const ComparisonReport rep = run_comparison(flow, SubmanifoldData::point(2), {}, 3);
  CHECK(rep.dim_p == 0);
  CHECK(rep.mu_L0_eps_b == rep.mu_LP_eps_b);
  const Verdict& geo = find_verdict(rep, "stimamaslovgeo[a+eps,b]");
  CHECK(geo.holds);
  CHECK(geo.right == 0.0);
  CHECK(rep.all_evaluated_hold());
}

TEST_CASE("existence corollaries fire on the sphere") {
  const JacobiFlow flow = integrate_flow(sphere_system(2, 2.5 * kPi));
  // mu_L0 over [eps, 2.5pi] = 2 events of multiplicity 1 = 2 > 0 = dim P
  const ComparisonReport rep =
      run_comparison(flow, SubmanifoldData::point(2), {{0.5, 2.5 * kPi}}, 5);
  bool found = false;
  for (const auto& v : rep.verdicts) {
    if (v.id.rfind("existence-focal", 0) == 0 && v.status == VerdictStatus::evaluated) {
      CHECK(v.holds);
      found = true;
    }
  }
  CHECK(found);
  CHECK(rep.all_evaluated_hold());
}

TEST_CASE("no-event bounds evaluated on the flat system") {
  const JacobiFlow flow = integrate_flow(flat_system(3, 3.0));
  const SubmanifoldData data = normal_space_submanifold(3, -0.7);  // diverging: no focal points
  const ComparisonReport rep = run_comparison(flow, data, {{0.5, 2.0}}, 9);
  CHECK(find_verdict(rep, "no-conjugate-bound").status == VerdictStatus::evaluated);
  CHECK(find_verdict(rep, "no-conjugate-bound").holds);
  CHECK(find_verdict(rep, "no-focal-bound").status == VerdictStatus::evaluated);
  CHECK(find_verdict(rep, "no-focal-bound").holds);
  CHECK(rep.all_evaluated_hold());
}

TEST_CASE("verdict arithmetic is reproducible from the logged values") {
  const JacobiFlow flow = integrate_flow(sphere_system(3, 2.0 * kPi));
  const ComparisonReport rep =
      run_comparison(flow, normal_space_submanifold(3, 0.0), {{1.0, 4.0}}, 13);
  for (const auto& v : rep.verdicts) {
    if (v.status != VerdictStatus::evaluated) continue;
    CHECK(v.holds == (v.left <= v.right));
    CHECK(v.slack == v.right - v.left);
  }
}

TEST_CASE("shifted start Lagrangian closed forms") {
  // flat, a' = -1: J(t) = v + t w vanishes at -1 iff v = w
  {
    const JacobiSystem sys = flat_system(2, 2.0);
    const ShiftedLagrangian sl = shifted_start_lagrangian(sys, -1.0);
    Matrix expect(4, 2);
    expect.topRows(2) = Matrix::Identity(2, 2);
    expect.bottomRows(2) = Matrix::Identity(2, 2);
    const LagrangianFrame claimed(sl.frame.space(), expect);
    CHECK(intersection_dimension(sl.frame, claimed) == 2);
  }
  // n=1 oscillator block, a' = -pi/2: J(-pi/2) = -w, so L' = {(v, 0)}
  {
    JacobiSystem sys = flat_system(1, 2.0);
    sys.curvature = [](double) { return -Matrix::Identity(1, 1); };
    const ShiftedLagrangian sl = shifted_start_lagrangian(sys, -kPi / 2);
    Matrix expect(2, 1);
    expect << 1, 0;
    CHECK(intersection_dimension(sl.frame, LagrangianFrame(sl.frame.space(), expect)) == 1);
  }
  // a' -> a recovers L0
  {
    const JacobiSystem sys = flat_system(2, 2.0);
    const ShiftedLagrangian sl = shifted_start_lagrangian(sys, -1e-6);
    Matrix vertical = Matrix::Zero(4, 2);
    vertical.bottomRows(2) = Matrix::Identity(2, 2);
    CHECK(transversality_margin(sl.frame, LagrangianFrame(sl.frame.space(), vertical)) < 1e-5);
  }
  CHECK_THROWS_AS(shifted_start_lagrangian(flat_system(2), 0.5), InvalidInput);
}

TEST_CASE("shifted criteria on the sphere locate the conjugate instant to a'") {
  const JacobiFlow flow = integrate_flow(sphere_system(3, 1.5 * kPi));
  const SubmanifoldData data = SubmanifoldData::point(3);
  const ShiftedVerdict v = check_shifted_criteria(flow, data, -kPi / 2, kPi, 17);
  CHECK(v.mul_t0 == 2);
  CHECK(v.cora_applicable);  // Riemannian: n_-(g) = n_-(g, t0) = 0, mul > 0
  CHECK(v.applicable);
  CHECK(v.conclusion_holds);
  REQUIRE(v.t_prime.has_value());
  CHECK(*v.t_prime == doctest::Approx(kPi / 2).epsilon(1e-6));
}

TEST_CASE("shifted criteria not applicable without a conjugate instant") {
  const JacobiFlow flow = integrate_flow(flat_system(2, 3.0));
  CHECK_THROWS_AS(check_shifted_criteria(flow, SubmanifoldData::point(2), -1.0, 1.5, 19),
                  InvalidInput);
}

TEST_CASE("randomized scenarios satisfy the central comparison bounds") {
  int done = 0;
  std::uint64_t attempt = 0;
  while (done < 14) {
    const std::uint64_t seed = 33000 + attempt++;
    REQUIRE(attempt < 100);
    Rng rng(seed);
    const int n = 2 + static_cast<int>(rng.raw() % 2);
    JacobiSystem sys = flat_system(n, 2.0 + 1.5 * rng.uniform(), 2e-3);
    const bool lorentz = rng.uniform() < 0.3;
    if (lorentz) sys.g_diag(0) = -1.0;
    const Matrix g = sys.g_diag.asDiagonal();
    // random g-symmetric polynomial curvature M(t) = g^{-1}(H0 + t H1)
    const Matrix h0 = random_symmetric_matrix(rng, n, 0.7);
    const Matrix h1 = random_symmetric_matrix(rng, n, 0.3);
    sys.curvature = [g, h0, h1](double t) { return Matrix(g * (h0 + t * h1)); };

    // random (P, S): a coordinate subspace of the normal directions with a
    // g-symmetric shape
    const int k = static_cast<int>(rng.raw() % n);
    SubmanifoldData data;
    data.p_basis = Matrix::Zero(n, k);
    for (int i = 0; i < k; ++i) data.p_basis(1 + i, i) = 1.0;
    const Matrix gp = data.p_basis.transpose() * g * data.p_basis;
    data.shape = gp * random_symmetric_matrix(rng, k, 0.5);

    try {
      const JacobiFlow flow = integrate_flow(sys);
      const ComparisonReport rep = run_comparison(flow, data, {}, derive_seed(seed, 1));
      CHECK(find_verdict(rep, "stimamaslovgeo[a+eps,b]").holds);
      CHECK(find_verdict(rep, "numefocmenonumconj-lower").holds);
      CHECK(find_verdict(rep, "numefocmenonumconj-upper").holds);
      if (rep.regime == MetricRegime::riemannian) {
        const Verdict& count = find_verdict(rep, "focal-count-bound");
        if (count.status == VerdictStatus::evaluated) CHECK(count.holds);
      }
      ++done;
    } catch (const DriftExceeded&) {
      continue;  // exponential growth at this draw; not what is under test
    }
  }
}
