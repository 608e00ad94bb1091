#pragma once

#include <string>
#include <vector>

#include "wgqed/types.hpp"

namespace wgqed {

// Unweighted nonlinear least squares (Levenberg-Marquardt, analytic Jacobians).
struct FitResult {
  RealVector params;
  double rms = 0.0;
  int iterations = 0;
  bool converged = false;
  // Residual RMS above the flag threshold, relative to the data span.
  bool flagged = false;
};

inline constexpr double fit_flag_rms = 0.05;

// y = A exp(-rate t) + C; params (A, rate, C). With fixed_offset the offset is
// held at `offset` and params are (A, rate, offset).
FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y,
                          bool fixed_offset = false, double offset = 0.0);

// y = A exp(-rate t) cos(2 pi f t + phase) + C; params (A, rate, f, phase, C).
FitResult fit_damped_cosine(const std::vector<double>& t, const std::vector<double>& y);

// Dip y = C - A / (1 + (2 (x - x0) / w)^2); params (A, x0, w, C), w is the FWHM.
FitResult fit_lorentzian_dip(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace wgqed
