#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <maslovkit/lagrangian.hpp>

using namespace maslovkit;

namespace {

LagrangianFrame span_of(const SpacePtr& space, std::initializer_list<double> entries) {
  Matrix f(space->ambient_dim(), 1);
  int i = 0;
  for (double e : entries) f(i++, 0) = e;
  return LagrangianFrame(space, f);
}

}  // namespace

TEST_CASE("standard space") {
  const SpacePtr s1 = standard_space(1);
  CHECK(s1->omega()(0, 1) == 1.0);
  CHECK(s1->omega()(1, 0) == -1.0);

  const SpacePtr s2 = standard_space(2);
  CHECK(s2->omega().topRightCorner(2, 2).isApprox(Matrix::Identity(2, 2)));

  for (int n : {1, 2, 3, 5}) {
    const SpacePtr s = standard_space(n);
    CHECK((s->omega() + s->omega().transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(std::abs(s->omega().determinant() - 1.0) < 1e-12);
  }
  CHECK_THROWS_AS(standard_space(0), InvalidInput);
}

TEST_CASE("frames are orthonormal, isotropic, and validated") {
  const SpacePtr s = standard_space(2);
  Matrix f(4, 2);
  f << 3, 0, 0, 2, 0, 0, 0, 0;  // span{e1, e2}: isotropic
  const LagrangianFrame l(s, f);
  CHECK((l.frame().transpose() * l.frame() - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);
  CHECK(l.isotropy_residual() < tolerances::isotropy);

  Matrix bad(4, 2);
  bad << 1, 0, 0, 0, 0, 1, 0, 0;  // span{e1, e3}: omega(e1, e3) = 1
  CHECK_THROWS_AS(LagrangianFrame(s, bad), NotLagrangian);
}

TEST_CASE("intersection dimension") {
  const SpacePtr s = standard_space(3);
  const LagrangianFrame l = random_lagrangian(s, 1);
  CHECK(intersection_dimension(l, l) == 3);

  const SpacePtr s1 = standard_space(1);
  CHECK(intersection_dimension(span_of(s1, {1, 0}), span_of(s1, {0, 1})) == 0);

  // constructed witnesses for every partial intersection dimension
  for (int n : {2, 3, 4}) {
    const SpacePtr sp = standard_space(n);
    for (int k = 0; k <= n; ++k) {
      const LagrangianFrame a = random_lagrangian(sp, 100 + n * 10 + k);
      const LagrangianFrame b = lagrangian_with_intersection(a, k, 200 + n * 10 + k);
      CHECK(intersection_dimension(a, b) == k);
    }
  }
}

TEST_CASE("chart_apply pinned n=1 value and basics") {
  const SpacePtr s = standard_space(1);
  const LagrangianFrame l0 = span_of(s, {1, 0});
  const LagrangianFrame l1 = span_of(s, {0, 1});
  const Chart c(l0, l1);

  // L = L0 maps to the zero form
  CHECK(std::abs(chart_apply(c, l0).matrix()(0, 0)) < 1e-14);

  // the convention omega(T., .) sends span{e1 + s e2} to [-s]; at s = 1
  // the chart value is exactly -1
  const LagrangianFrame l = span_of(s, {1, 1});
  CHECK(chart_apply(c, l).matrix()(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));

  // not-in-domain error when L meets L1
  CHECK_THROWS_AS(chart_apply(c, l1), ChartDomainError);
}

TEST_CASE("chart kernel dimension equals the intersection with L0") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 200 / n; ++trial) {
      const std::uint64_t seed = 1000 + n * 1000 + trial;
      const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 0));
      const LagrangianFrame l1 = random_lagrangian(s, derive_seed(seed, 1), {l0});
      const Chart c(l0, l1);
      // mix generic draws with constructed intersections against L0
      const int k = static_cast<int>(derive_seed(seed, 2) % (n + 1));
      const LagrangianFrame l = lagrangian_with_intersection(l0, k, derive_seed(seed, 3));
      if (intersection_dimension(l, l1) != 0) continue;  // out of chart domain
      const auto comp = inertia_detailed(chart_apply(c, l), tolerances::chart_inertia_floor);
      CHECK(comp.inertia.nullity == intersection_dimension(l, l0));
    }
  }
}

TEST_CASE("chart_invert round trips") {
  for (int n : {1, 2, 3, 4}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 25; ++trial) {
      const std::uint64_t seed = 31 * n + trial;
      const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 0));
      const LagrangianFrame l1 = random_lagrangian(s, derive_seed(seed, 1), {l0});
      const Chart c(l0, l1);

      // B = 0 inverts to L0
      CHECK(intersection_dimension(chart_invert(c, SymmetricForm(Matrix::Zero(n, n))), l0) == n);

      Rng rng(derive_seed(seed, 2));
      const SymmetricForm b(random_symmetric_matrix(rng, n));
      const LagrangianFrame l = chart_invert(c, b);
      CHECK(l.isotropy_residual() < tolerances::isotropy);
      const SymmetricForm back = chart_apply(c, l);
      CHECK((back.matrix() - b.matrix()).cwiseAbs().maxCoeff() < 1e-9);

      // and the frame-level round trip: apply then invert recovers the subspace
      const LagrangianFrame l_any = random_lagrangian(s, derive_seed(seed, 3), {l1});
      const LagrangianFrame l_back = chart_invert(c, chart_apply(c, l_any));
      CHECK(intersection_dimension(l_any, l_back) == n);
    }
  }
}

TEST_CASE("transition reference form") {
  // L1 = L0 gives C = 0
  const SpacePtr s2 = standard_space(2);
  const LagrangianFrame l0 = random_lagrangian(s2, 11);
  const LagrangianFrame l = random_lagrangian(s2, 12, {l0});
  CHECK(transition_reference(l0, l0, l).matrix().cwiseAbs().maxCoeff() < 1e-10);

  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 60 / n; ++trial) {
      const std::uint64_t seed = 5000 + 77 * n + trial;
      const LagrangianFrame a0 = random_lagrangian(s, derive_seed(seed, 0));
      const int k = static_cast<int>(derive_seed(seed, 1) % (n + 1));
      const LagrangianFrame a1 = lagrangian_with_intersection(a0, k, derive_seed(seed, 2));
      const LagrangianFrame linf = random_lagrangian(s, derive_seed(seed, 3), {a0, a1});
      const SymmetricForm c = transition_reference(a0, a1, linf);

      // nullity(C) = dim(L0 cap L1)
      CHECK(inertia_detailed(c, tolerances::chart_inertia_floor).inertia.nullity == k);

      // n_+ identity on a random alpha in the common chart domain
      const LagrangianFrame alpha = random_lagrangian(s, derive_seed(seed, 4), {linf});
      const auto lhs =
          inertia_detailed(chart_apply(Chart(a1, linf), alpha), tolerances::chart_inertia_floor);
      const auto rhs = inertia_detailed(chart_apply(Chart(a0, linf), alpha) + c,
                                        tolerances::chart_inertia_floor);
      CHECK(lhs.inertia.coindex == rhs.inertia.coindex);
    }
  }
}

TEST_CASE("PS parametrization") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    const std::uint64_t seed = 600 + n;
    const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 0));
    const LagrangianFrame l1 = random_lagrangian(s, derive_seed(seed, 1), {l0});
    const Chart c(l0, l1);

    // P = {0} gives L0
    PSData trivial;
    trivial.p_basis = Matrix(2 * n, 0);
    trivial.s = SymmetricForm(Matrix(0, 0));
    CHECK(intersection_dimension(lagrangian_from_ps(c, trivial), l0) == n);

    // P = L1 with S = 0 gives L1
    PSData full;
    full.p_basis = l1.frame();
    full.s = SymmetricForm(Matrix::Zero(n, n));
    CHECK(intersection_dimension(lagrangian_from_ps(c, full), l1) == n);

    // random (P, S) round trips through ps_from_lagrangian as a subspace
    for (int trial = 0; trial < 20; ++trial) {
      Rng rng(derive_seed(seed, 10 + trial));
      const int k = static_cast<int>(rng.raw() % (n + 1));
      PSData data;
      data.p_basis = l1.frame().leftCols(k);
      data.s = SymmetricForm(random_symmetric_matrix(rng, k));
      const LagrangianFrame l = lagrangian_from_ps(c, data);
      CHECK(l.isotropy_residual() < tolerances::isotropy);

      const PSData back = ps_from_lagrangian(c, l);
      CHECK(back.p_basis.cols() == k);
      const LagrangianFrame l_again = lagrangian_from_ps(c, back);
      CHECK(intersection_dimension(l, l_again) == n);
    }

    // ps_from_lagrangian of L0 and L1 directly
    CHECK(ps_from_lagrangian(c, l0).p_basis.cols() == 0);
    const PSData of_l1 = ps_from_lagrangian(c, l1);
    CHECK(of_l1.p_basis.cols() == n);
    CHECK(of_l1.s.matrix().cwiseAbs().maxCoeff() < 1e-9);
  }

  // P not inside L1 is rejected
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l0 = random_lagrangian(s, 71);
  const LagrangianFrame l1 = random_lagrangian(s, 72, {l0});
  PSData bad;
  bad.p_basis = l0.frame().leftCols(1);
  bad.s = SymmetricForm(Matrix::Zero(1, 1));
  CHECK_THROWS_AS(lagrangian_from_ps(Chart(l0, l1), bad), InvalidInput);
}

TEST_CASE("random_lagrangian determinism and constraints") {
  const SpacePtr s = standard_space(3);
  const LagrangianFrame a = random_lagrangian(s, 2023);
  const LagrangianFrame b = random_lagrangian(s, 2023);
  CHECK((a.frame() - b.frame()).cwiseAbs().maxCoeff() == 0.0);

  const LagrangianFrame c1 = random_lagrangian(s, 1);
  const LagrangianFrame c2 = random_lagrangian(s, 2, {c1});
  const LagrangianFrame c3 = random_lagrangian(s, 3, {c1, c2});
  const LagrangianFrame c4 = random_lagrangian(s, 4, {c1, c2, c3});
  for (const auto& pair : {std::pair{c4, c1}, {c4, c2}, {c4, c3}}) {
    CHECK(intersection_dimension(pair.first, pair.second) == 0);
    CHECK(transversality_margin(pair.first, pair.second) >= tolerances::margin_floor);
  }
}

TEST_CASE("every operation returns frames within the isotropy budget") {
  for (int n : {1, 2, 3, 4}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 10; ++trial) {
      const LagrangianFrame l = random_lagrangian(s, 9000 + 10 * n + trial);
      CHECK(l.isotropy_residual() <= tolerances::isotropy);
    }
  }
}
