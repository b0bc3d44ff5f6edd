#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace maslovkit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed or non-finite input data.
struct InvalidInput : Error {
  using Error::Error;
};

/// A set of vectors expected to be independent was rank deficient.
struct RankDeficiency : Error {
  using Error::Error;
};

/// A frame expected to be Lagrangian failed the isotropy or rank check.
struct NotLagrangian : Error {
  using Error::Error;
};

/// chart_apply called on a Lagrangian not transverse to the chart's L1.
struct ChartDomainError : Error {
  using Error::Error;
};

/// random_lagrangian ran out of draws before meeting all margins.
struct RetryExhausted : Error {
  using Error::Error;
};

/// maslov_index could not refine the path partition any further.
struct RefinementExhausted : Error {
  using Error::Error;
};

/// Crossing whose restricted derivative form is singular.
struct DegenerateCrossing : Error {
  double t0;
  explicit DegenerateCrossing(const std::string& msg, double t) : Error(msg), t0(t) {}
};

/// Symplecticity residual of the integrated flow exceeded the bound.
struct DriftExceeded : Error {
  using Error::Error;
};

/// Closed-form contribution ledger requested with a degenerate event present.
struct DegenerateEvent : Error {
  using Error::Error;
};

/// Deterministic RNG with an explicit seed.  The gaussian sampler is a
/// hand-rolled Box-Muller so results do not depend on the standard
/// library's std::normal_distribution implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() {  // in [0, 1)
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// splitmix64 step, used to derive independent child seeds.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline Matrix random_gaussian_matrix(Rng& rng, int rows, int cols, double scale = 1.0) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.gaussian();
  return m;
}

inline Matrix random_symmetric_matrix(Rng& rng, int dim, double scale = 1.0) {
  Matrix m = random_gaussian_matrix(rng, dim, dim, scale);
  return 0.5 * (m + m.transpose());
}

}  // namespace maslovkit
