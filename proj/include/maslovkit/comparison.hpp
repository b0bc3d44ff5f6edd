#pragma once

#include <map>
#include <optional>

#include "maslovkit/jacobi.hpp"

namespace maslovkit {

enum class VerdictStatus { evaluated, not_applicable, not_evaluable };

/// One inequality check; `holds` means left <= right.
struct Verdict {
  std::string id;
  double left = 0.0, right = 0.0;
  VerdictStatus status = VerdictStatus::evaluated;
  bool holds = true;
  double slack = 0.0;
  std::string reason;
};

struct MuEntry {
  double lo = 0.0, hi = 0.0;
  std::string reference;  // "L0" or "LP"
  int value = 0;          // paper-convention integer
};

enum class MetricRegime { riemannian, timelike_lorentzian, general };

struct ComparisonReport {
  double epsilon = 0.0;
  MetricRegime regime = MetricRegime::general;
  int dim_p = 0;
  int mu_L0_eps_b = 0, mu_LP_eps_b = 0;  // over [a + eps, b]
  std::vector<MuEntry> mu_table;
  std::optional<double> t0, tP;          // first conjugate / focal instants
  int mul_t0 = 0, mul_tP = 0;
  FocalScan conjugate_scan, focal_scan;
  std::vector<Verdict> verdicts;

  bool all_evaluated_hold() const;
};

/// Evaluates the comparison statements for one system + submanifold:
/// the dim P estimate on each requested subinterval, the two-sided focal
/// vs conjugate bound, the existence and absence corollaries, the
/// first-focal-before-first-conjugate ordering and the Riemannian count.
ComparisonReport run_comparison(const JacobiFlow& flow, const SubmanifoldData& data,
                                const std::vector<std::pair<double, double>>& subintervals,
                                std::uint64_t seed);

struct ShiftedLagrangian {
  double a_prime = 0.0;
  LagrangianFrame frame;
};

/// L' = {(v, w) : the Jacobi field with initial data (v, w) vanishes at a'},
/// expressed in the frame at a via backward integration.
ShiftedLagrangian shifted_start_lagrangian(const JacobiSystem& sys, double a_prime);

/// Shifted-endpoint criteria at a detected conjugate instant t0.
struct ShiftedVerdict {
  double a_prime = 0.0;
  double t0 = 0.0;
  int mul_t0 = 0;
  int mu_L0_eps_t0 = 0;
  bool h_multiplicity = false;   // mul(t0) > n_-(g) - mu_L0(ell|[a+eps,t0])
  bool h_negative_index = false; // mu_L0(ell|[a+eps,t0]) < -n_+(g)
  bool cora_applicable = false;  // first conjugate, nondegenerate, mul > n_-(g) + n_-(g,t0)
  bool applicable = false;       // any hypothesis holds
  bool conclusion_holds = false; // an instant t' in [a, t0] with ell(t') meeting L'
  std::optional<double> t_prime;
};

ShiftedVerdict check_shifted_criteria(const JacobiFlow& flow, const SubmanifoldData& data,
                                      double a_prime, double t0, std::uint64_t seed);

}  // namespace maslovkit
