#pragma once

#include <stdexcept>
#include <string>

namespace sgt {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kEulerGamma = 0.577215664901532860606512090082402431;

// Parameters of the thermal massive cosine-interaction model.
// alpha = a^2 hbar / (4 pi) < 1 is the ultraviolet-finite regime: every
// charge-gas integral below stays locally integrable exactly when alpha < 1.
struct ThermalParams {
  double beta = 1.0;             // inverse temperature
  double mass = 1.0;             // field mass m > 0
  double coupling_a = 1.0;       // vertex charge a
  double hbar = 1.0;             // kept explicit; charge weights carry hbar
  double mu_scale = 1.0;         // length scale of the massless kernel
  double coupling_lambda = 1.0;  // strength in front of the cosine

  double alpha() const { return coupling_a * coupling_a * hbar / (4.0 * kPi); }

  void validate() const {
    if (!(beta > 0.0)) throw std::invalid_argument("ThermalParams: beta must be > 0");
    if (!(mass > 0.0)) throw std::invalid_argument("ThermalParams: mass must be > 0");
    if (!(coupling_a > 0.0)) throw std::invalid_argument("ThermalParams: coupling_a must be > 0");
    if (!(hbar > 0.0)) throw std::invalid_argument("ThermalParams: hbar must be > 0");
    if (!(mu_scale > 0.0)) throw std::invalid_argument("ThermalParams: mu_scale must be > 0");
    if (!(alpha() < 1.0))
      throw std::invalid_argument("ThermalParams: a^2*hbar/(4*pi) = " + std::to_string(alpha()) +
                                  " is not < 1 (outside the ultraviolet-finite regime)");
  }
};

// Point on the thermal strip [0, beta] x R.
struct EuclideanPoint {
  double u = 0.0;
  double x = 0.0;
};

struct SingularityError : std::domain_error {
  using std::domain_error::domain_error;
};

// Matsubara sum at coincident spatial points: the mode sum diverges
// logarithmically.
struct DivergentSumError : std::domain_error {
  using std::domain_error::domain_error;
};

struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PreconditionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Tolerance not reached; carries the partial estimate.
struct QuadratureError : std::runtime_error {
  double partial_estimate;
  QuadratureError(const std::string& what, double partial)
      : std::runtime_error(what), partial_estimate(partial) {}
};

}  // namespace sgt
