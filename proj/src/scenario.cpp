#include "maslovkit/scenario.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace maslovkit {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

Matrix matrix_from_json(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty())
    throw InvalidInput(field + ": expected a non-empty array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Matrix m;
  for (std::size_t i = 0; i < rows; ++i) {
    const json& row = j[i];
    if (!row.is_array())
      throw InvalidInput(field + "[" + std::to_string(i) + "]: expected an array");
    if (i == 0) {
      cols = row.size();
      if (cols == 0) throw InvalidInput(field + ": empty rows");
      m = Matrix(rows, cols);
    } else if (row.size() != cols) {
      throw InvalidInput(field + "[" + std::to_string(i) + "]: ragged row");
    }
    for (std::size_t k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        throw InvalidInput(field + "[" + std::to_string(i) + "][" + std::to_string(k) +
                           "]: expected a number");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

void check_g_symmetric(const Matrix& m, const Vector& g_diag, const std::string& field) {
  const Matrix gm = g_diag.asDiagonal() * m;
  if ((gm - gm.transpose()).cwiseAbs().maxCoeff() >
      1e-12 * std::max(1.0, gm.cwiseAbs().maxCoeff()))
    throw InvalidInput(field + ": coefficient matrix is not g-symmetric");
}

}  // namespace

CurvatureFn CurvatureDescriptor::make(int n) const {
  switch (kind) {
    case Kind::constant: {
      const Matrix m = constant;
      return [m](double) { return m; };
    }
    case Kind::diagonal_profile: {
      const auto coeffs = diagonal;
      return [coeffs, n](double t) {
        Matrix m = Matrix::Zero(n, n);
        for (int i = 0; i < n; ++i) {
          double v = 0.0, p = 1.0;
          for (Eigen::Index k = 0; k < coeffs[i].size(); ++k) {
            v += coeffs[i](k) * p;
            p *= t;
          }
          m(i, i) = v;
        }
        return m;
      };
    }
    case Kind::polynomial: {
      const auto ms = matrices;
      return [ms, n](double t) {
        Matrix m = Matrix::Zero(n, n);
        double p = 1.0;
        for (const auto& mk : ms) {
          m += p * mk;
          p *= t;
        }
        return m;
      };
    }
    case Kind::fourier: {
      const auto cs = cos_terms;
      const auto ss = sin_terms;
      const Matrix base = constant;
      const double w = base_frequency;
      return [cs, ss, base, w, n](double t) {
        Matrix m = base.rows() == n ? base : Matrix::Zero(n, n);
        for (std::size_t j = 0; j < cs.size(); ++j) m += std::cos((j + 1) * w * t) * cs[j];
        for (std::size_t j = 0; j < ss.size(); ++j) m += std::sin((j + 1) * w * t) * ss[j];
        return m;
      };
    }
  }
  throw InvalidInput("curvature: unknown descriptor kind");
}

void CurvatureDescriptor::validate(int n, const Vector& g_diag) const {
  auto square = [n](const Matrix& m, const std::string& f) {
    if (m.rows() != n || m.cols() != n) throw InvalidInput(f + ": expected an n x n matrix");
    if (!m.allFinite()) throw InvalidInput(f + ": non-finite entries");
  };
  switch (kind) {
    case Kind::constant:
      square(constant, "curvature.matrix");
      check_g_symmetric(constant, g_diag, "curvature.matrix");
      break;
    case Kind::diagonal_profile:
      if (static_cast<int>(diagonal.size()) != n)
        throw InvalidInput("curvature.diagonal: expected one coefficient list per dimension");
      for (const auto& c : diagonal)
        if (!c.allFinite()) throw InvalidInput("curvature.diagonal: non-finite coefficients");
      break;  // diagonal M with diagonal g is always g-symmetric
    case Kind::polynomial:
      if (matrices.empty()) throw InvalidInput("curvature.matrices: empty");
      for (std::size_t k = 0; k < matrices.size(); ++k) {
        const std::string f = "curvature.matrices[" + std::to_string(k) + "]";
        square(matrices[k], f);
        check_g_symmetric(matrices[k], g_diag, f);
      }
      break;
    case Kind::fourier:
      if (base_frequency <= 0.0) throw InvalidInput("curvature.omega: must be positive");
      if (constant.size() > 0) {
        square(constant, "curvature.constant");
        check_g_symmetric(constant, g_diag, "curvature.constant");
      }
      for (std::size_t k = 0; k < cos_terms.size(); ++k) {
        const std::string f = "curvature.cos[" + std::to_string(k) + "]";
        square(cos_terms[k], f);
        check_g_symmetric(cos_terms[k], g_diag, f);
      }
      for (std::size_t k = 0; k < sin_terms.size(); ++k) {
        const std::string f = "curvature.sin[" + std::to_string(k) + "]";
        square(sin_terms[k], f);
        check_g_symmetric(sin_terms[k], g_diag, f);
      }
      break;
  }
}

JacobiSystem Scenario::make_system() const {
  JacobiSystem sys;
  sys.n = n;
  sys.g_diag = signature;
  sys.curvature = curvature.make(n);
  sys.a = a;
  sys.b = b;
  sys.step = step;
  sys.validate();
  return sys;
}

SubmanifoldData Scenario::make_submanifold() const {
  return submanifold ? *submanifold : SubmanifoldData::point(n);
}

Scenario builtin_model(const std::string& name, int n,
                       std::optional<std::pair<double, double>> interval, double step) {
  if (n < 1) throw InvalidInput("builtin_model: n must be positive");
  const double pi = 3.14159265358979323846;
  Scenario s;
  s.n = n;
  s.step = step;
  s.signature = Vector::Ones(n);
  s.curvature.kind = CurvatureDescriptor::Kind::constant;
  s.curvature.constant = Matrix::Zero(n, n);
  s.seed = 42;

  if (name == "flat") {
    s.a = 0.0;
    s.b = 3.0;
  } else if (name == "sphere") {
    Vector d = -Vector::Ones(n);
    d(0) = 0.0;
    s.curvature.constant = d.asDiagonal();
    s.a = 0.0;
    s.b = 3.5 * pi;
  } else if (name == "hyperbolic") {
    Vector d = Vector::Ones(n);
    d(0) = 0.0;
    s.curvature.constant = d.asDiagonal();
    s.a = 0.0;
    s.b = 10.0;
  } else if (name == "lorentz-flat") {
    s.signature(0) = -1.0;
    s.a = 0.0;
    s.b = 3.0;
  } else if (name == "lorentz-const") {
    // timelike direction in slot 1; curvature alternates +1/-1 on the
    // spacelike slots, so the -1 blocks produce conjugate points at k*pi.
    // The +1 blocks grow like e^t, which caps the default interval: the
    // symplectic residual scales with the squared flow norm.
    s.signature(0) = -1.0;
    Vector d = Vector::Zero(n);
    for (int i = 1; i < n; ++i) d(i) = (i % 2 == 1) ? 1.0 : -1.0;
    s.curvature.constant = d.asDiagonal();
    s.a = 0.0;
    s.b = 7.0;
  } else {
    throw InvalidInput("builtin_model: unknown model '" + name + "'");
  }
  if (interval) {
    s.a = interval->first;
    s.b = interval->second;
  }
  s.name = name + "-n" + std::to_string(n);
  s.curvature.validate(n, s.signature);
  return s;
}

Scenario scenario_from_json(const json& j) {
  Scenario s;
  auto require = [&j](const char* field) -> const json& {
    if (!j.contains(field)) throw InvalidInput(std::string(field) + ": missing field");
    return j.at(field);
  };

  s.name = j.value("name", "scenario");
  const json& jn = require("n");
  if (!jn.is_number_integer() || jn.get<int>() < 1)
    throw InvalidInput("n: expected a positive integer");
  s.n = jn.get<int>();

  const json& jsig = require("signature");
  if (!jsig.is_array() || static_cast<int>(jsig.size()) != s.n)
    throw InvalidInput("signature: expected an array of n entries");
  s.signature = Vector(s.n);
  for (int i = 0; i < s.n; ++i) {
    if (!jsig[i].is_number())
      throw InvalidInput("signature[" + std::to_string(i) + "]: expected a number");
    const double v = jsig[i].get<double>();
    if (v != 1.0 && v != -1.0)
      throw InvalidInput("signature[" + std::to_string(i) + "]: expected +1 or -1, got " +
                         format_double(v));
    s.signature(i) = v;
  }

  const json& jc = require("curvature");
  const std::string kind = jc.value("kind", "");
  if (kind == "constant") {
    s.curvature.kind = CurvatureDescriptor::Kind::constant;
    if (!jc.contains("matrix")) throw InvalidInput("curvature.matrix: missing field");
    s.curvature.constant = matrix_from_json(jc.at("matrix"), "curvature.matrix");
  } else if (kind == "diagonal-profile") {
    s.curvature.kind = CurvatureDescriptor::Kind::diagonal_profile;
    if (!jc.contains("diagonal") || !jc.at("diagonal").is_array())
      throw InvalidInput("curvature.diagonal: missing or not an array");
    for (const auto& entry : jc.at("diagonal")) {
      if (!entry.is_array()) throw InvalidInput("curvature.diagonal: expected coefficient lists");
      Vector c(entry.size());
      for (std::size_t k = 0; k < entry.size(); ++k) c(k) = entry[k].get<double>();
      s.curvature.diagonal.push_back(c);
    }
  } else if (kind == "polynomial") {
    s.curvature.kind = CurvatureDescriptor::Kind::polynomial;
    if (!jc.contains("matrices") || !jc.at("matrices").is_array())
      throw InvalidInput("curvature.matrices: missing or not an array");
    int k = 0;
    for (const auto& entry : jc.at("matrices"))
      s.curvature.matrices.push_back(
          matrix_from_json(entry, "curvature.matrices[" + std::to_string(k++) + "]"));
  } else if (kind == "fourier") {
    s.curvature.kind = CurvatureDescriptor::Kind::fourier;
    s.curvature.base_frequency = jc.value("omega", 1.0);
    if (jc.contains("constant"))
      s.curvature.constant = matrix_from_json(jc.at("constant"), "curvature.constant");
    int k = 0;
    if (jc.contains("cos"))
      for (const auto& entry : jc.at("cos"))
        s.curvature.cos_terms.push_back(
            matrix_from_json(entry, "curvature.cos[" + std::to_string(k++) + "]"));
    k = 0;
    if (jc.contains("sin"))
      for (const auto& entry : jc.at("sin"))
        s.curvature.sin_terms.push_back(
            matrix_from_json(entry, "curvature.sin[" + std::to_string(k++) + "]"));
  } else {
    throw InvalidInput("curvature.kind: expected constant, diagonal-profile, polynomial or "
                       "fourier, got '" + kind + "'");
  }
  s.curvature.validate(s.n, s.signature);

  const json& ji = require("interval");
  if (!ji.is_array() || ji.size() != 2 || !ji[0].is_number() || !ji[1].is_number())
    throw InvalidInput("interval: expected [a, b]");
  s.a = ji[0].get<double>();
  s.b = ji[1].get<double>();
  if (!(s.a < s.b)) throw InvalidInput("interval: a must be smaller than b");

  s.step = j.value("step", 1e-3);
  if (!(s.step > 0.0)) throw InvalidInput("step: must be positive");

  if (j.contains("submanifold") && !(j.at("submanifold").is_string() &&
                                     j.at("submanifold").get<std::string>() == "point")) {
    const json& jp = j.at("submanifold");
    if (!jp.is_object() || !jp.contains("P") || !jp.contains("S"))
      throw InvalidInput("submanifold: expected \"point\" or an object with P and S");
    SubmanifoldData data;
    const Matrix rows = matrix_from_json(jp.at("P"), "submanifold.P");
    if (rows.cols() != s.n)
      throw InvalidInput("submanifold.P: rows must have n entries");
    data.p_basis = rows.transpose();
    // orthonormalize the basis; S is given in the row coordinates and is
    // mapped accordingly
    Eigen::HouseholderQR<Matrix> qr(data.p_basis);
    const int k = static_cast<int>(data.p_basis.cols());
    const Matrix q = qr.householderQ() * Matrix::Identity(s.n, k);
    const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Matrix s_given = matrix_from_json(jp.at("S"), "submanifold.S");
    if (s_given.rows() != k || s_given.cols() != k)
      throw InvalidInput("submanifold.S: expected a k x k matrix");
    data.p_basis = q;
    data.shape = r * s_given * r.inverse();
    s.submanifold = data;
  }

  if (j.contains("subintervals")) {
    const json& js = j.at("subintervals");
    if (!js.is_array()) throw InvalidInput("subintervals: expected an array");
    for (std::size_t i = 0; i < js.size(); ++i) {
      const json& e = js[i];
      if (!e.is_array() || e.size() != 2)
        throw InvalidInput("subintervals[" + std::to_string(i) + "]: expected [lo, hi]");
      s.subintervals.emplace_back(e[0].get<double>(), e[1].get<double>());
    }
  }
  if (j.contains("shifted_points")) {
    for (const auto& e : j.at("shifted_points")) s.shifted_points.push_back(e.get<double>());
  }
  s.seed = j.value("seed", 0ULL);
  return s;
}

json scenario_to_json(const Scenario& s) {
  ordered_json j;
  j["name"] = s.name;
  j["n"] = s.n;
  json sig = json::array();
  for (int i = 0; i < s.n; ++i) sig.push_back(static_cast<int>(s.signature(i)));
  j["signature"] = sig;
  ordered_json jc;
  switch (s.curvature.kind) {
    case CurvatureDescriptor::Kind::constant:
      jc["kind"] = "constant";
      jc["matrix"] = matrix_to_json(s.curvature.constant);
      break;
    case CurvatureDescriptor::Kind::diagonal_profile: {
      jc["kind"] = "diagonal-profile";
      json d = json::array();
      for (const auto& c : s.curvature.diagonal) {
        json list = json::array();
        for (Eigen::Index i = 0; i < c.size(); ++i) list.push_back(c(i));
        d.push_back(list);
      }
      jc["diagonal"] = d;
      break;
    }
    case CurvatureDescriptor::Kind::polynomial: {
      jc["kind"] = "polynomial";
      json ms = json::array();
      for (const auto& m : s.curvature.matrices) ms.push_back(matrix_to_json(m));
      jc["matrices"] = ms;
      break;
    }
    case CurvatureDescriptor::Kind::fourier: {
      jc["kind"] = "fourier";
      jc["omega"] = s.curvature.base_frequency;
      if (s.curvature.constant.size() > 0) jc["constant"] = matrix_to_json(s.curvature.constant);
      json cs = json::array(), ss = json::array();
      for (const auto& m : s.curvature.cos_terms) cs.push_back(matrix_to_json(m));
      for (const auto& m : s.curvature.sin_terms) ss.push_back(matrix_to_json(m));
      jc["cos"] = cs;
      jc["sin"] = ss;
      break;
    }
  }
  j["curvature"] = jc;
  j["interval"] = json::array({s.a, s.b});
  j["step"] = s.step;
  if (s.submanifold) {
    ordered_json jp;
    jp["P"] = matrix_to_json(s.submanifold->p_basis.transpose());
    jp["S"] = matrix_to_json(s.submanifold->shape);
    j["submanifold"] = jp;
  } else {
    j["submanifold"] = "point";
  }
  json si = json::array();
  for (const auto& [lo, hi] : s.subintervals) si.push_back(json::array({lo, hi}));
  j["subintervals"] = si;
  j["shifted_points"] = s.shifted_points;
  j["seed"] = s.seed;
  return j;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open scenario file '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("scenario parse error: ") + e.what());
  }
  return scenario_from_json(j);
}

namespace {

void write_events_csv(const std::string& path, const FocalScan& scan) {
  std::ofstream out(path, std::ios::binary);
  out << "t,multiplicity,n_minus,n_plus,signature,degenerate\n";
  for (const auto& ev : scan.events) {
    out << format_double(ev.t) << ',' << ev.multiplicity << ',' << ev.inertia_on_a.index << ','
        << ev.inertia_on_a.coindex << ',' << ev.inertia_on_a.signature() << ','
        << (ev.degenerate ? "true" : "false") << '\n';
  }
}

const char* verdict_status_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::evaluated: return "evaluated";
    case VerdictStatus::not_applicable: return "not-applicable";
    case VerdictStatus::not_evaluable: return "not-evaluable";
  }
  return "?";
}

}  // namespace

RunOutcome run_scenario(const Scenario& s, const std::string& out_dir) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);

  const JacobiSystem sys = s.make_system();
  const SubmanifoldData data = s.make_submanifold();
  validate_submanifold(sys, data);
  const JacobiFlow flow = integrate_flow(sys);

  RunOutcome out;
  out.report = run_comparison(flow, data, s.subintervals, s.seed);

  // shifted-endpoint checks at the first conjugate instant, one per a'
  if (!s.shifted_points.empty() && out.report.t0) {
    for (double ap : s.shifted_points)
      out.shifted.push_back(
          check_shifted_criteria(flow, data, ap, *out.report.t0, derive_seed(s.seed, 101)));
  }

  write_events_csv(out_dir + "/events.csv", out.report.focal_scan);
  if (s.submanifold) write_events_csv(out_dir + "/conjugate_events.csv", out.report.conjugate_scan);

  {
    std::ofstream m(out_dir + "/maslov.csv", std::ios::binary);
    m << "interval_lo,interval_hi,reference,convention,value_times_two\n";
    for (const auto& e : out.report.mu_table)
      m << format_double(e.lo) << ',' << format_double(e.hi) << ',' << e.reference
        << ",paper," << 2 * e.value << '\n';
  }
  {
    std::ofstream v(out_dir + "/verdicts.csv", std::ios::binary);
    v << "id,left,right,holds,slack\n";
    for (const auto& verdict : out.report.verdicts) {
      if (verdict.status != VerdictStatus::evaluated) continue;
      v << verdict.id << ',' << format_double(verdict.left) << ',' << format_double(verdict.right)
        << ',' << (verdict.holds ? "true" : "false") << ',' << format_double(verdict.slack)
        << '\n';
    }
  }
  {
    ordered_json meta;
    meta["name"] = s.name;
    meta["version"] = kToolkitVersion;
    meta["seed"] = s.seed;
    meta["step"] = s.step;
    meta["rank_tolerance"] = default_rank_tol();
    meta["epsilon"] = out.report.epsilon;
    meta["max_drift"] = flow.max_drift();
    meta["regime"] = out.report.regime == MetricRegime::riemannian        ? "riemannian"
                     : out.report.regime == MetricRegime::timelike_lorentzian ? "timelike-lorentzian"
                                                                              : "general";
    if (out.report.t0) meta["t0"] = *out.report.t0;
    if (out.report.tP) meta["tP"] = *out.report.tP;
    meta["conjugate_events"] = out.report.conjugate_scan.events.size();
    meta["focal_events"] = out.report.focal_scan.events.size();
    meta["accumulation_warning"] =
        out.report.conjugate_scan.accumulation_warning || out.report.focal_scan.accumulation_warning;
    ordered_json verdicts = ordered_json::array();
    for (const auto& v : out.report.verdicts) {
      ordered_json jv;
      jv["id"] = v.id;
      jv["status"] = verdict_status_name(v.status);
      jv["left"] = v.left;
      jv["right"] = v.right;
      jv["holds"] = v.holds;
      jv["slack"] = v.slack;
      if (!v.reason.empty()) jv["reason"] = v.reason;
      verdicts.push_back(jv);
    }
    meta["verdicts"] = verdicts;
    ordered_json shifted = ordered_json::array();
    for (const auto& sv : out.shifted) {
      ordered_json js;
      js["a_prime"] = sv.a_prime;
      js["t0"] = sv.t0;
      js["applicable"] = sv.applicable;
      js["cora_applicable"] = sv.cora_applicable;
      js["conclusion_holds"] = sv.conclusion_holds;
      if (sv.t_prime) js["t_prime"] = *sv.t_prime;
      shifted.push_back(js);
    }
    meta["shifted"] = shifted;
    std::ofstream r(out_dir + "/run.json", std::ios::binary);
    r << meta.dump(2) << '\n';
  }

  bool ok = out.report.all_evaluated_hold();
  for (const auto& sv : out.shifted)
    if (sv.applicable && !sv.conclusion_holds) ok = false;
  out.exit_code = ok ? 0 : 1;
  out.message = ok ? "all asserted inequalities hold" : "inequality violation detected";
  return out;
}

EstimateInstance random_estimate_instance(const SpacePtr& space, std::uint64_t seed) {
  Rng rng(seed);
  const int n = space->n();
  const double span = 0.5 + 2.0 * rng.uniform();
  LagrangianPath path = random_hamiltonian_path(space, derive_seed(seed, 1), span);
  const LagrangianFrame la = path.samples().front().frame;
  const LagrangianFrame lb = path.samples().back().frame;

  const double mode = rng.uniform();
  if (mode < 0.40) {
    return {path, random_lagrangian(space, derive_seed(seed, 2)),
            random_lagrangian(space, derive_seed(seed, 3))};
  }
  if (mode < 0.55) {  // L0 at the initial endpoint
    return {path, la, random_lagrangian(space, derive_seed(seed, 4))};
  }
  if (mode < 0.70) {  // L1 at the final endpoint
    return {path, random_lagrangian(space, derive_seed(seed, 5)), lb};
  }
  if (mode < 0.85) {  // references sharing a subspace with an endpoint
    const int k = 1 + static_cast<int>(rng.uniform() * n) % n;
    return {path, lagrangian_with_intersection(la, std::min(k, n), derive_seed(seed, 6)),
            lagrangian_with_intersection(lb, std::min(k, n), derive_seed(seed, 7))};
  }
  // references intersecting each other
  const LagrangianFrame l0 = random_lagrangian(space, derive_seed(seed, 8));
  const int k = static_cast<int>(rng.uniform() * (n + 1)) % (n + 1);
  return {path, l0, lagrangian_with_intersection(l0, k, derive_seed(seed, 9))};
}

namespace {

struct CheckStats {
  std::string name;
  int trials = 0;
  int failures = 0;
  double worst_slack = std::numeric_limits<double>::infinity();

  void tally(bool ok, double slack) {
    ++trials;
    if (!ok) ++failures;
    worst_slack = std::min(worst_slack, slack);
  }
};

void print_stats(std::ostream& log, const CheckStats& s) {
  log << "  " << s.name << ": " << (s.trials - s.failures) << "/" << s.trials << " pass";
  if (s.trials > 0 && std::isfinite(s.worst_slack)) log << ", worst slack " << s.worst_slack;
  log << (s.failures ? "  FAIL" : "") << "\n";
}

void dump_counterexample(std::ostream& log, const std::string& check, std::uint64_t seed,
                         int trial, int dim) {
  ordered_json j;
  j["check"] = check;
  j["seed"] = seed;
  j["trial"] = trial;
  j["dim"] = dim;
  log << "counterexample: " << j.dump() << "\n";
}

}  // namespace

int property_suite(std::uint64_t seed, int trials, const std::vector<int>& dims,
                   std::ostream& log) {
  if (trials < 1) throw InvalidInput("property_suite: trials must be at least 1");
  if (dims.empty()) throw InvalidInput("property_suite: no dimensions given");
  for (int d : dims)
    if (d < 1 || d > 16) throw InvalidInput("property_suite: dimensions must be in 1..16");

  bool all_ok = true;
  log << "property suite: seed " << seed << ", " << trials << " trials, dims {";
  for (std::size_t i = 0; i < dims.size(); ++i) log << (i ? "," : "") << dims[i];
  log << "}\n";

  // perturbation bounds (and the fixed-form difference corollary)
  {
    CheckStats bounds{"perturbation-bounds"}, corollary{"perturbation-difference"};
    for (int d : dims) {
      for (int trial = 0; trial < trials; ++trial) {
        Rng rng(derive_seed(seed, 1000 + d * 1000 + trial));
        const SymmetricForm b(random_symmetric_matrix(rng, d));
        const SymmetricForm c(random_symmetric_matrix(rng, d));
        const auto v = check_perturbation_bounds(b, c);
        bounds.tally(v.holds, std::min(v.lower_slack, v.upper_slack));
        if (!v.holds) dump_counterexample(log, "perturbation-bounds", seed, trial, d);

        const SymmetricForm b2(random_symmetric_matrix(rng, d));
        const int lhs = std::abs(inertia(b).coindex - inertia(b2).coindex -
                                 inertia(b + c).coindex + inertia(b2 + c).coindex);
        const Inertia ic = inertia(c);
        const int rhs = ic.index + ic.coindex;
        corollary.tally(lhs <= rhs, rhs - lhs);
        if (lhs > rhs) dump_counterexample(log, "perturbation-difference", seed, trial, d);
      }
    }
    print_stats(log, bounds);
    print_stats(log, corollary);
    all_ok = all_ok && bounds.failures == 0 && corollary.failures == 0;
  }

  // reference-Lagrangian estimates + opposite-form identity on random paths
  {
    CheckStats est{"maslov-estimates"}, rel{"opposite-form-identity"};
    for (int d : dims) {
      const SpacePtr space = standard_space(d);
      for (int trial = 0; trial < trials; ++trial) {
        const EstimateInstance inst =
            random_estimate_instance(space, derive_seed(seed, 2000 + d * 1000 + trial));
        MaslovOptions opt;
        opt.seed = derive_seed(seed, 3000 + d * 1000 + trial);
        const EstimateReport rep = check_estimates(inst.path, inst.l0, inst.l1, opt);
        int slack = std::numeric_limits<int>::max();
        bool ok = true;
        for (const auto& bound : rep.bounds) {
          ok = ok && bound.holds;
          slack = std::min(slack, bound.slack);
        }
        est.tally(ok, slack);
        rel.tally(rep.opposite_identity_holds, 0.0);
        if (!ok) dump_counterexample(log, "maslov-estimates", seed, trial, d);
        if (!rep.opposite_identity_holds)
          dump_counterexample(log, "opposite-form-identity", seed, trial, d);
      }
    }
    print_stats(log, est);
    print_stats(log, rel);
    all_ok = all_ok && est.failures == 0 && rel.failures == 0;
  }

  // Hormander / Kashiwara identities
  {
    CheckStats antisym{"hormander-antisymmetry"}, decomp{"kashiwara-decomposition"},
        pathind{"hormander-path-independence"};
    for (int d : dims) {
      const SpacePtr space = standard_space(d);
      for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t s0 = derive_seed(seed, 4000 + d * 1000 + trial);
        const LagrangianFrame q0 = random_lagrangian(space, derive_seed(s0, 0));
        const LagrangianFrame q1 = random_lagrangian(space, derive_seed(s0, 1));
        const LagrangianFrame qa = random_lagrangian(space, derive_seed(s0, 2));
        const LagrangianFrame qb = random_lagrangian(space, derive_seed(s0, 3));

        const int ab = hormander_index({q0, q1, qa, qb}, derive_seed(s0, 4));
        const int ba = hormander_index({qa, qb, q0, q1}, derive_seed(s0, 5));
        antisym.tally(ab == -ba, 0.0);
        if (ab != -ba) dump_counterexample(log, "hormander-antisymmetry", seed, trial, d);

        const int tau_a = kashiwara_index(q0, q1, qa, derive_seed(s0, 6));
        const int tau_b = kashiwara_index(q0, q1, qb, derive_seed(s0, 7));
        decomp.tally(ab == tau_a - tau_b, 0.0);
        if (ab != tau_a - tau_b) dump_counterexample(log, "kashiwara-decomposition", seed, trial, d);

        if (trial % 2 == 0) {
          const int again = hormander_index({q0, q1, qa, qb}, derive_seed(s0, 8));
          pathind.tally(ab == again, 0.0);
          if (ab != again) dump_counterexample(log, "hormander-path-independence", seed, trial, d);
        }
      }
    }
    print_stats(log, antisym);
    print_stats(log, decomp);
    print_stats(log, pathind);
    all_ok = all_ok && antisym.failures == 0 && decomp.failures == 0 && pathind.failures == 0;
  }

  // chart transition identity and the chart-kernel identity
  {
    CheckStats trans{"transition-identity"}, kern{"chart-kernel-identity"};
    for (int d : dims) {
      const SpacePtr space = standard_space(d);
      for (int trial = 0; trial < trials; ++trial) {
        Rng rng(derive_seed(seed, 5000 + d * 1000 + trial));
        const std::uint64_t s0 = derive_seed(seed, 6000 + d * 1000 + trial);
        const LagrangianFrame l0 = random_lagrangian(space, derive_seed(s0, 0));
        const int k = static_cast<int>(rng.uniform() * (d + 1)) % (d + 1);
        const LagrangianFrame l1 = lagrangian_with_intersection(l0, k, derive_seed(s0, 1));
        const LagrangianFrame l = random_lagrangian(space, derive_seed(s0, 2), {l0, l1});
        const SymmetricForm c = transition_reference(l0, l1, l);
        const LagrangianFrame alpha = random_lagrangian(space, derive_seed(s0, 3), {l});

        const Inertia lhs = inertia_detailed(chart_apply(Chart(l1, l), alpha),
                                             tolerances::chart_inertia_floor).inertia;
        const Inertia rhs = inertia_detailed(chart_apply(Chart(l0, l), alpha) + c,
                                             tolerances::chart_inertia_floor).inertia;
        const bool nullity_ok =
            inertia_detailed(c, tolerances::chart_inertia_floor).inertia.nullity ==
            intersection_dimension(l0, l1);
        trans.tally(lhs.coindex == rhs.coindex && nullity_ok, 0.0);
        if (!(lhs.coindex == rhs.coindex && nullity_ok))
          dump_counterexample(log, "transition-identity", seed, trial, d);

        const int null_chart = inertia_detailed(chart_apply(Chart(l0, l), alpha),
                                                tolerances::chart_inertia_floor).inertia.nullity;
        const bool kern_ok = null_chart == intersection_dimension(alpha, l0);
        kern.tally(kern_ok, 0.0);
        if (!kern_ok) dump_counterexample(log, "chart-kernel-identity", seed, trial, d);
      }
    }
    print_stats(log, trans);
    print_stats(log, kern);
    all_ok = all_ok && trans.failures == 0 && kern.failures == 0;
  }

  log << (all_ok ? "all checks passed" : "VIOLATIONS FOUND") << "\n";
  return all_ok ? 0 : 1;
}

}  // namespace maslovkit
