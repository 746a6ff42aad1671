#pragma once

// Central finite-difference checks of every differentiable operation, in
// double precision. Used by the `gradcheck` command and the test suites.

#include <cstdint>
#include <string>
#include <vector>

namespace footseg::gradcheck {

inline constexpr double kPerOpTolerance = 1e-6;
inline constexpr double kEndToEndTolerance = 1e-4;

struct CheckResult {
  std::string name;
  int probes = 0;
  int skipped = 0;  // probes rejected because they straddle a ReLU kink
  double max_relative_error = 0.0;
  double tolerance = 0.0;
  bool passed() const { return probes > 0 && max_relative_error < tolerance; }
};

// |analytic - numeric| / max(|analytic|, |numeric|, floor). The floor keeps
// vanishing gradients from turning roundoff into large relative errors.
double relative_error(double analytic, double numeric, double floor = 1e-8);

CheckResult check_fbeta_standard(std::uint64_t seed);
CheckResult check_fbeta_literal(std::uint64_t seed);
CheckResult check_weighted_cross_entropy(std::uint64_t seed);
CheckResult check_combined_objective(std::uint64_t seed);
CheckResult check_conv2d(int dilation, int stride, int kernel, std::uint64_t seed);
CheckResult check_bilinear_upsample(int factor, std::uint64_t seed);
// 2x3x16x16 input, 10 random parameters, EWC+F objective.
CheckResult check_end_to_end(bool dilated, std::uint64_t seed);

// Every check above, including conv2d at dilations 1, 2 and 4.
std::vector<CheckResult> run_all(std::uint64_t seed);

}  // namespace footseg::gradcheck
