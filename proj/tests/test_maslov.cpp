#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <maslovkit/maslov.hpp>

using namespace maslovkit;

namespace {

LagrangianFrame span_of(const SpacePtr& space, std::initializer_list<double> entries) {
  Matrix f(space->ambient_dim(), 1);
  int i = 0;
  for (double e : entries) f(i++, 0) = e;
  return LagrangianFrame(space, f);
}

// the n=1 rotation ell(t) = span{(cos t, sin t)} in the standard space
LagrangianPath rotation_path(const SpacePtr& s, double lo, double hi, int nsamples = 21) {
  auto eval = [s](double t) {
    Matrix f(2, 1);
    f << std::cos(t), std::sin(t);
    return LagrangianFrame(s, f);
  };
  std::vector<PathSample> samples;
  for (int i = 0; i < nsamples; ++i) {
    const double t = lo + (hi - lo) * i / (nsamples - 1);
    samples.push_back({t, eval(t)});
  }
  return LagrangianPath(std::move(samples), eval);
}

LagrangianPath constant_path(const LagrangianFrame& l, double lo, double hi) {
  auto eval = [l](double) { return l; };
  return LagrangianPath({{lo, l}, {hi, l}}, eval);
}

}  // namespace

TEST_CASE("constant path has index zero in every convention") {
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l = random_lagrangian(s, 3);
  const LagrangianFrame l0 = random_lagrangian(s, 4);
  const LagrangianPath path = constant_path(l, 0.0, 1.0);
  for (auto conv : {Convention::paper, Convention::robbin_salamon, Convention::opposite_form})
    CHECK(maslov_index(path, l0, conv).value_times_two == 0);
  // also with a degenerate reference (L0 = the path itself)
  for (auto conv : {Convention::paper, Convention::robbin_salamon, Convention::opposite_form})
    CHECK(maslov_index(path, l, conv).value_times_two == 0);
}

TEST_CASE("pinned rotation example: one negative crossing") {
  const SpacePtr s = standard_space(1);
  const LagrangianFrame l0 = span_of(s, {1, 0});
  const double quarter = 0.78539816339744830962;
  const LagrangianPath path = rotation_path(s, -quarter, quarter);

  // in the chart (span{e1}, span{e2}) the path reads B(t) = -tan t, so the
  // paper-convention index is n_+(-1) - n_+(1) = -1
  const MaslovResult paper = maslov_index(path, l0, Convention::paper);
  CHECK(paper.value() == -1);

  // reversal negates it
  CHECK(maslov_index(path.reversed(), l0, Convention::paper).value() == 1);

  // nondegenerate endpoints: the half-signature convention agrees
  CHECK(maslov_index(path, l0, Convention::robbin_salamon).value_times_two == -2);

  // opposite form: mu^- = -mu + dim(ell(a) cap L0) - dim(ell(b) cap L0) = 1
  CHECK(maslov_index(path, l0, Convention::opposite_form).value() == 1);
}

TEST_CASE("concatenation additivity at random split points") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 12; ++trial) {
      const std::uint64_t seed = 4000 + 100 * n + trial;
      const LagrangianPath path = random_hamiltonian_path(s, seed, 2.5);
      const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 50));
      Rng rng(derive_seed(seed, 51));
      const double mid = path.a() + (0.2 + 0.6 * rng.uniform()) * (path.b() - path.a());

      const int whole = maslov_index(path, l0).value();
      const int left = maslov_index(path.subpath(path.a(), mid), l0).value();
      const int right = maslov_index(path.subpath(mid, path.b()), l0).value();
      CHECK(whole == left + right);
    }
  }
}

TEST_CASE("reference-Lagrangian independence: seeds do not change the value") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 8; ++trial) {
      const std::uint64_t seed = 7000 + 100 * n + trial;
      const LagrangianPath path = random_hamiltonian_path(s, seed, 2.0);
      const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 9));
      MaslovOptions a, b;
      a.seed = 1;
      b.seed = 987654321;
      CHECK(maslov_index(path, l0, Convention::paper, a).value() ==
            maslov_index(path, l0, Convention::paper, b).value());
    }
  }
}

TEST_CASE("fixed-endpoint stability under grid refinement and sample jitter") {
  const SpacePtr s = standard_space(2);
  for (int trial = 0; trial < 6; ++trial) {
    const std::uint64_t seed = 8100 + trial;
    const LagrangianPath path = random_hamiltonian_path(s, seed, 2.0, 17);
    const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 3));
    const int base = maslov_index(path, l0).value();

    // denser grid, same curve
    const LagrangianPath dense = random_hamiltonian_path(s, seed, 2.0, 65);
    CHECK(maslov_index(dense, l0).value() == base);

    // jittered interior sample times, same curve
    Rng rng(derive_seed(seed, 4));
    std::vector<PathSample> jittered = path.samples();
    for (std::size_t i = 1; i + 1 < jittered.size(); ++i) {
      const double lo = jittered[i - 1].t, hi = jittered[i + 1].t;
      double t = jittered[i].t + 0.2 * (rng.uniform() - 0.5) * (hi - lo);
      t = std::clamp(t, lo + 1e-6, hi - 1e-6);
      jittered[i] = {t, path.at(t)};
    }
    const LagrangianPath jpath(jittered, [path](double t) { return path.at(t); });
    CHECK(maslov_index(jpath, l0).value() == base);
  }
}

TEST_CASE("opposite-form identity on random paths") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 10; ++trial) {
      const std::uint64_t seed = 9900 + 100 * n + trial;
      const LagrangianPath path = random_hamiltonian_path(s, seed, 2.0);
      // exercise degenerate endpoints too: reference = exact start frame
      const LagrangianFrame l0 = (trial % 3 == 0)
                                     ? path.samples().front().frame
                                     : random_lagrangian(s, derive_seed(seed, 1));
      const int mu = maslov_index(path, l0).value();
      const int mu_neg = maslov_index(path, l0, Convention::opposite_form).value();
      const int da = intersection_dimension(path.samples().front().frame, l0);
      const int db = intersection_dimension(path.samples().back().frame, l0);
      CHECK(mu_neg == -mu + da - db);
    }
  }
}

TEST_CASE("half-signature convention negates under the opposite form") {
  const SpacePtr s = standard_space(2);
  for (int trial = 0; trial < 8; ++trial) {
    const std::uint64_t seed = 12000 + trial;
    const LagrangianPath path = random_hamiltonian_path(s, seed, 2.0);
    const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 1));
    const int rs = maslov_index(path, l0, Convention::robbin_salamon).value_times_two;
    const SpacePtr neg = opposite_space(s);
    const int rs_neg =
        maslov_index(path.in_space(neg), l0.in_space(neg), Convention::robbin_salamon)
            .value_times_two;
    CHECK(rs_neg == -rs);
  }
}

TEST_CASE("crossing method agrees with the chart method") {
  const SpacePtr s1 = standard_space(1);
  const LagrangianFrame l0 = span_of(s1, {1, 0});
  const double quarter = 0.78539816339744830962;
  const LagrangianPath rot = rotation_path(s1, -quarter, quarter);
  const CrossingResult cr = maslov_index_crossings(rot, l0);
  REQUIRE(cr.crossings.size() == 1);
  CHECK(cr.crossings[0].t == doctest::Approx(0.0).epsilon(1e-8));
  CHECK(cr.crossings[0].multiplicity == 1);
  CHECK(cr.crossings[0].form_inertia.signature() == -1);
  CHECK(cr.result.value() == maslov_index(rot, l0).value());

  // no degeneracy instants -> empty crossing list and index 0
  const LagrangianPath arc = rotation_path(s1, 0.3, 1.2);
  const LagrangianFrame ref = span_of(s1, {std::cos(0.1), std::sin(0.1)});
  const CrossingResult none = maslov_index_crossings(arc, ref);
  CHECK(none.crossings.empty());
  CHECK(none.result.value() == 0);
}

TEST_CASE("crossing at the initial endpoint contributes the coindex of the crossing form") {
  // path starting exactly at L0 with B'(a) positive definite on the kernel:
  // take the graph family B(t) = t * I over a chart based at L0
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l0 = random_lagrangian(s, 21);
  const LagrangianFrame linf = random_lagrangian(s, 22, {l0});
  const Chart chart(l0, linf);
  auto eval = [chart](double t) {
    return chart_invert(chart, SymmetricForm(t * Matrix::Identity(2, 2)));
  };
  std::vector<PathSample> samples;
  for (int i = 0; i <= 16; ++i) {
    const double t = 1.0 * i / 16.0;
    samples.push_back({t, eval(t)});
  }
  const LagrangianPath path(samples, eval);
  const CrossingResult cr = maslov_index_crossings(path, l0);
  REQUIRE(cr.crossings.size() == 1);
  CHECK(cr.crossings[0].at_start);
  CHECK(cr.crossings[0].multiplicity == 2);
  CHECK(cr.crossings[0].form_inertia.coindex == 2);
  CHECK(cr.result.value() == 2);
  CHECK(maslov_index(path, l0).value() == 2);
}

TEST_CASE("degenerate crossing raises an error naming the instant") {
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l0 = random_lagrangian(s, 31);
  const LagrangianFrame linf = random_lagrangian(s, 32, {l0});
  const Chart chart(l0, linf);
  // B(t) = diag(t, t^2): at t = 0 the kernel is 2-dimensional but B'(0)
  // restricted to it is diag(1, 0), singular
  auto eval = [chart](double t) {
    Matrix b(2, 2);
    b << t, 0, 0, t * t;
    return chart_invert(chart, SymmetricForm(b));
  };
  std::vector<PathSample> samples;
  for (int i = 0; i <= 24; ++i) {
    const double t = -1.0 + 2.0 * i / 24.0;
    samples.push_back({t, eval(t)});
  }
  const LagrangianPath path(samples, eval);
  CHECK_THROWS_AS(maslov_index_crossings(path, l0), DegenerateCrossing);
  // the chart method remains available: n_+ goes from 1 at diag(-1, 1)
  // to 2 at diag(1, 1)
  CHECK(maslov_index(path, l0).value() == 1);
}

TEST_CASE("chart and crossing methods agree on random differentiable paths") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    int done = 0;
    std::uint64_t attempt = 0;
    while (done < 10) {
      const std::uint64_t seed = 52000 + 997 * n + attempt++;
      REQUIRE(attempt < 200);
      const LagrangianPath path = random_hamiltonian_path(s, seed, 2.0);
      const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 1));
      try {
        const CrossingResult cr = maslov_index_crossings(path, l0);
        CHECK(cr.result.value() == maslov_index(path, l0).value());
        ++done;
      } catch (const DegenerateCrossing&) {
        continue;  // population is paths with nondegenerate crossings
      }
    }
  }
}

TEST_CASE("hormander index basics") {
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l0 = random_lagrangian(s, 61);
  const LagrangianFrame la = random_lagrangian(s, 62);
  const LagrangianFrame lb = random_lagrangian(s, 63);

  // equal references
  CHECK(hormander_index({l0, l0, la, lb}) == 0);
  // equal endpoints
  CHECK(hormander_index({l0, random_lagrangian(s, 64), la, la}) == 0);
}

TEST_CASE("hormander antisymmetry and path independence on random quadruples") {
  for (int n : {1, 2, 3}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 12; ++trial) {
      const std::uint64_t seed = 71000 + 31 * n + trial;
      const LagrangianFrame q0 = random_lagrangian(s, derive_seed(seed, 0));
      const LagrangianFrame q1 = random_lagrangian(s, derive_seed(seed, 1));
      const LagrangianFrame qa = random_lagrangian(s, derive_seed(seed, 2));
      const LagrangianFrame qb = random_lagrangian(s, derive_seed(seed, 3));
      const int ab = hormander_index({q0, q1, qa, qb}, derive_seed(seed, 4));
      CHECK(ab == -hormander_index({qa, qb, q0, q1}, derive_seed(seed, 5)));
      // different seed = different connecting path and chart choices
      CHECK(ab == hormander_index({q0, q1, qa, qb}, derive_seed(seed, 6)));
    }
  }
}

TEST_CASE("kashiwara index: pinned n=1 triple and identities") {
  const SpacePtr s = standard_space(1);
  const LagrangianFrame e1 = span_of(s, {1, 0});
  const LagrangianFrame e2 = span_of(s, {0, 1});
  const LagrangianFrame diag = span_of(s, {1, 1});

  // derived by hand from the half-signature convention: the arc from
  // span{e1+e2} to span{e1} contributes 1/2 against span{e1} and 0 against
  // span{e2}, doubled to 1
  CHECK(kashiwara_index(e1, e2, diag) == 1);

  CHECK(kashiwara_index(e1, e2, e1) == 0);

  // decomposition with L0' = L1' collapses to zero difference
  for (int trial = 0; trial < 6; ++trial) {
    const SpacePtr s2 = standard_space(2);
    const std::uint64_t seed = 81000 + trial;
    const LagrangianFrame q0 = random_lagrangian(s2, derive_seed(seed, 0));
    const LagrangianFrame q1 = random_lagrangian(s2, derive_seed(seed, 1));
    const LagrangianFrame qa = random_lagrangian(s2, derive_seed(seed, 2));
    const LagrangianFrame qb = random_lagrangian(s2, derive_seed(seed, 3));
    const int lhs = hormander_index({q0, q1, qa, qb}, derive_seed(seed, 4));
    const int rhs = kashiwara_index(q0, q1, qa, derive_seed(seed, 5)) -
                    kashiwara_index(q0, q1, qb, derive_seed(seed, 6));
    CHECK(lhs == rhs);
  }
}

TEST_CASE("check_estimates: trivial and edge configurations") {
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l = random_lagrangian(s, 91);
  const LagrangianPath path = constant_path(l, 0.0, 1.0);
  const LagrangianFrame l0 = random_lagrangian(s, 92);
  const LagrangianFrame l1 = random_lagrangian(s, 93);

  const EstimateReport rep = check_estimates(path, l0, l1);
  CHECK(rep.all_hold());
  for (const auto& b : rep.bounds) CHECK(b.left == 0);

  // L0 = L1: right side of the first bound is n - n = 0; equality
  const EstimateReport same = check_estimates(path, l0, l0);
  CHECK(same.all_hold());
  CHECK(same.bounds[0].right == 0);
  CHECK(same.bounds[0].slack == 0);
}

TEST_CASE("check_estimates holds on random paths across dimensions") {
  for (int n : {1, 2, 3, 4}) {
    const SpacePtr s = standard_space(n);
    for (int trial = 0; trial < 15; ++trial) {
      const std::uint64_t seed = 95000 + 111 * n + trial;
      const LagrangianPath path = random_hamiltonian_path(s, seed, 2.0);
      const LagrangianFrame l0 = random_lagrangian(s, derive_seed(seed, 1));
      const LagrangianFrame l1 = random_lagrangian(s, derive_seed(seed, 2));
      const EstimateReport rep = check_estimates(path, l0, l1);
      CHECK(rep.all_hold());
    }
  }
}

TEST_CASE("paths refuse invalid construction") {
  const SpacePtr s = standard_space(1);
  const LagrangianFrame l = random_lagrangian(s, 5);
  CHECK_THROWS_AS(LagrangianPath({{0.0, l}}), InvalidInput);
  CHECK_THROWS_AS(LagrangianPath({{0.0, l}, {0.0, l}}), InvalidInput);
}

TEST_CASE("coarse path without an evaluator exhausts refinement") {
  const SpacePtr s = standard_space(1);
  // two samples a quarter turn apart, no refiner: the continuity gap cannot
  // be closed
  Matrix f1(2, 1), f2(2, 1);
  f1 << 1, 0;
  f2 << std::cos(0.8), std::sin(0.8);
  const LagrangianPath coarse({{0.0, LagrangianFrame(s, f1)}, {1.0, LagrangianFrame(s, f2)}});
  const LagrangianFrame l0 = random_lagrangian(s, 77);
  CHECK_THROWS_AS(maslov_index(coarse, l0), RefinementExhausted);
}

TEST_CASE("random_lagrangian reports an exhausted retry budget") {
  const SpacePtr s = standard_space(2);
  const LagrangianFrame l = random_lagrangian(s, 1);
  CHECK_THROWS_AS(random_lagrangian(s, 2, {l}, 0.99999, 4), RetryExhausted);
}
