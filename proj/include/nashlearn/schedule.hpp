#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace nashlearn {

/// Power-law step and exploration-variance schedules,
///   gamma(t) = gamma_c / t^gamma_a,   sigma(t) = sigma_c / t^sigma_a,
/// indexed from t = 1 (power laws diverge at 0, so time is 1-based
/// throughout). beta(t) = gamma(t) * sigma(t)^2 is the effective step energy.
struct ScheduleSpec {
  double gamma_c = 1.0;
  double gamma_a = 0.51;
  double sigma_c = 0.1;
  double sigma_a = 0.2;

  double gamma(long t) const {
    check_time(t);
    return gamma_c * std::pow(static_cast<double>(t), -gamma_a);
  }
  double sigma(long t) const {
    check_time(t);
    return sigma_c * std::pow(static_cast<double>(t), -sigma_a);
  }
  double beta(long t) const {
    const double s = sigma(t);
    return gamma(t) * s * s;
  }

 private:
  static void check_time(long t) {
    if (t < 1) throw std::invalid_argument("ScheduleSpec: schedules are indexed from t = 1");
  }
};

struct ScheduleValidation {
  bool valid = false;
  std::vector<std::string> violated;  // names of failed conditions
};

/// Names of the three summability conditions a valid schedule must satisfy.
/// Exposed so callers can match rejections against the exact condition.
inline constexpr const char* kCondGammaSigma2Diverges = "sum_gamma_sigma2_diverges";
inline constexpr const char* kCondGammaSigma3Converges = "sum_gamma_sigma3_converges";
inline constexpr const char* kCondGammaSqConverges = "sum_gamma_sq_converges";

/// Checks the admissibility of a power-law schedule by exponent arithmetic
/// (p-series test), not numerically:
///   sum gamma*sigma^2 = inf   <=>  gamma_a + 2*sigma_a <= 1
///   sum gamma*sigma^3 < inf   <=>  gamma_a + 3*sigma_a >  1
///   sum gamma^2       < inf   <=>  2*gamma_a           >  1
inline ScheduleValidation validate_schedule(const ScheduleSpec& s) {
  auto positive_finite = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive_finite(s.gamma_c) || !positive_finite(s.sigma_c) ||
      !positive_finite(s.gamma_a) || !positive_finite(s.sigma_a)) {
    throw std::invalid_argument(
        "validate_schedule: coefficients and exponents must be positive and finite");
  }

  ScheduleValidation out;
  if (!(s.gamma_a + 2.0 * s.sigma_a <= 1.0)) out.violated.emplace_back(kCondGammaSigma2Diverges);
  if (!(s.gamma_a + 3.0 * s.sigma_a > 1.0)) out.violated.emplace_back(kCondGammaSigma3Converges);
  if (!(2.0 * s.gamma_a > 1.0)) out.violated.emplace_back(kCondGammaSqConverges);
  out.valid = out.violated.empty();
  return out;
}

}  // namespace nashlearn
