#pragma once

#include <iosfwd>
#include <optional>

#include <json.hpp>

#include "maslovkit/comparison.hpp"

namespace maslovkit {

inline constexpr const char* kToolkitVersion = "0.1.0";

/// Declarative curvature profile; expands to a CurvatureFn.  Every
/// coefficient matrix must be g-symmetric, which makes g*M(t) symmetric for
/// all t.
struct CurvatureDescriptor {
  enum class Kind { constant, diagonal_profile, polynomial, fourier };
  Kind kind = Kind::constant;
  Matrix constant;                  // kind == constant
  std::vector<Vector> diagonal;     // kind == diagonal_profile: per-entry poly coefficients
  std::vector<Matrix> matrices;     // kind == polynomial: M(t) = sum t^k M_k
  double base_frequency = 1.0;      // kind == fourier
  std::vector<Matrix> cos_terms, sin_terms;

  CurvatureFn make(int n) const;
  void validate(int n, const Vector& g_diag) const;
};

struct Scenario {
  std::string name;
  int n = 0;
  Vector signature;  // ±1 entries
  CurvatureDescriptor curvature;
  double a = 0.0, b = 1.0;
  double step = 1e-3;
  std::optional<SubmanifoldData> submanifold;  // nullopt = point
  std::vector<std::pair<double, double>> subintervals;
  std::vector<double> shifted_points;
  std::uint64_t seed = 0;

  JacobiSystem make_system() const;
  SubmanifoldData make_submanifold() const;
};

/// Built-in model library: flat, sphere, hyperbolic, lorentz-flat,
/// lorentz-const.
Scenario builtin_model(const std::string& name, int n,
                       std::optional<std::pair<double, double>> interval = std::nullopt,
                       double step = 1e-3);

Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario_file(const std::string& path);

struct RunOutcome {
  int exit_code = 0;  // 0 = all asserted inequalities hold, 1 = violation
  std::string message;
  ComparisonReport report;
  std::vector<ShiftedVerdict> shifted;
};

/// Full pipeline: integrate, detect, compare, write events.csv / maslov.csv
/// / verdicts.csv / run.json (plus conjugate_events.csv for a nontrivial
/// submanifold) into out_dir.
RunOutcome run_scenario(const Scenario& s, const std::string& out_dir);

/// Randomized identity suites (perturbation bounds, the reference-Lagrangian
/// estimates, the opposite-form identity, Hormander/Kashiwara identities,
/// the chart transition identity).  Returns 0 when everything passes.
int property_suite(std::uint64_t seed, int trials, const std::vector<int>& dims,
                   std::ostream& log);

/// Instance generator for the estimate checks: a random path plus two
/// references, mixing generic draws with constructed coincidences.
struct EstimateInstance {
  LagrangianPath path;
  LagrangianFrame l0, l1;
};
EstimateInstance random_estimate_instance(const SpacePtr& space, std::uint64_t seed);

/// 17-significant-digit serialization used by every CSV/JSON emitter.
std::string format_double(double v);

}  // namespace maslovkit
