#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace wgqed {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<cplx>;

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double speed_of_light = 299792458.0;  // m/s
inline constexpr cplx I{0.0, 1.0};

// Frequencies are stored as angular rates (rad/s). These take the
// conventional f = omega / 2pi value in the named unit.
constexpr double ghz(double f) { return two_pi * f * 1e9; }
constexpr double mhz(double f) { return two_pi * f * 1e6; }
constexpr double khz(double f) { return two_pi * f * 1e3; }

constexpr double to_ghz(double omega) { return omega / two_pi * 1e-9; }
constexpr double to_mhz(double omega) { return omega / two_pi * 1e-6; }
constexpr double to_khz(double omega) { return omega / two_pi * 1e-3; }

// Invalid model input: bad parameters, size mismatch, unsupported layout.
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Numerical failure: step-size underflow, invariant drift, failed fits.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace wgqed
