#include "wgqed/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include <unsupported/Eigen/NonLinearOptimization>

namespace wgqed {

namespace {

using Model = std::function<void(const RealVector& p, double x, double& value, Eigen::Ref<RealVector> grad)>;

struct LeastSquares {
  using Scalar = double;
  using InputType = RealVector;
  using ValueType = RealVector;
  using JacobianType = RealMatrix;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const std::vector<double>& x;
  const std::vector<double>& y;
  Model model;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x.size()); }

  int operator()(const RealVector& p, RealVector& f) const {
    RealVector g(n_params);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = 0.0;
      model(p, x[i], v, g);
      f(static_cast<Eigen::Index>(i)) = v - y[i];
    }
    return 0;
  }
  int df(const RealVector& p, RealMatrix& jac) const {
    RealVector g(n_params);
    for (std::size_t i = 0; i < x.size(); ++i) {
      double v = 0.0;
      model(p, x[i], v, g);
      jac.row(static_cast<Eigen::Index>(i)) = g.transpose();
    }
    return 0;
  }
};

FitResult solve(const std::vector<double>& x, const std::vector<double>& y, Model model, RealVector p0) {
  if (x.size() != y.size()) throw ModelError("fit data lengths differ");
  if (x.size() < static_cast<std::size_t>(p0.size()) + 1) throw NumericalError("too few points to fit");
  LeastSquares fn{x, y, std::move(model), static_cast<int>(p0.size())};
  Eigen::LevenbergMarquardt<LeastSquares> lm(fn);
  lm.parameters.maxfev = 4000;
  lm.parameters.xtol = 1e-12;
  lm.parameters.ftol = 1e-14;
  const auto status = lm.minimize(p0);

  FitResult r;
  r.params = p0;
  r.iterations = static_cast<int>(lm.iter);
  r.converged = status == Eigen::LevenbergMarquardtSpace::RelativeReductionTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::RelativeErrorTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::RelativeErrorAndReductionTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::CosinusTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::FtolTooSmall ||
                status == Eigen::LevenbergMarquardtSpace::XtolTooSmall;
  RealVector f(static_cast<Eigen::Index>(x.size()));
  fn(p0, f);
  r.rms = std::sqrt(f.squaredNorm() / static_cast<double>(x.size()));
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  const double span = std::max(*hi - *lo, 1e-300);
  r.flagged = !r.converged || r.rms / span > fit_flag_rms || !p0.allFinite();
  return r;
}

std::vector<double> scaled(const std::vector<double>& t, double origin, double scale) {
  std::vector<double> s(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) s[i] = (t[i] - origin) / scale;
  return s;
}

double span_of(const std::vector<double>& t) {
  if (t.size() < 2) throw NumericalError("too few points to fit");
  const double s = t.back() - t.front();
  if (!(s > 0)) throw NumericalError("fit abscissa must be increasing");
  return s;
}

}  // namespace

FitResult fit_exponential(const std::vector<double>& t, const std::vector<double>& y, bool fixed_offset,
                          double offset) {
  const double scale = span_of(t);
  const double t0 = t.front();
  const auto s = scaled(t, t0, scale);

  // Initial rate from the log-slope between the ends.
  const double c0 = fixed_offset ? offset : y.back() - 0.05 * (y.front() - y.back());
  const double a = y.front() - c0;
  const double b = y.back() - c0;
  double k0 = (a != 0.0 && b / a > 0) ? std::log(a / b) : 1.0;
  if (!std::isfinite(k0) || k0 <= 0) k0 = 1.0;

  FitResult r;
  if (fixed_offset) {
    Model m = [offset](const RealVector& p, double x, double& v, Eigen::Ref<RealVector> g) {
      const double e = std::exp(-p(1) * x);
      v = p(0) * e + offset;
      g(0) = e;
      g(1) = -p(0) * x * e;
    };
    RealVector p(2);
    p << a, k0;
    r = solve(s, y, m, p);
    RealVector full(3);
    full << r.params(0), r.params(1), offset;
    r.params = full;
  } else {
    Model m = [](const RealVector& p, double x, double& v, Eigen::Ref<RealVector> g) {
      const double e = std::exp(-p(1) * x);
      v = p(0) * e + p(2);
      g(0) = e;
      g(1) = -p(0) * x * e;
      g(2) = 1.0;
    };
    RealVector p(3);
    p << a, k0, c0;
    r = solve(s, y, m, p);
  }
  // Back to the caller's time axis.
  r.params(0) *= std::exp(r.params(1) * t0 / scale);
  r.params(1) /= scale;
  if (!(r.params(1) > 0)) r.flagged = true;
  return r;
}

FitResult fit_damped_cosine(const std::vector<double>& t, const std::vector<double>& y) {
  const double scale = span_of(t);
  const double t0 = t.front();
  const auto s = scaled(t, t0, scale);
  const auto n = s.size();
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= static_cast<double>(n);

  // Frequency guess from a periodogram scan up to the Nyquist rate.
  const double nyquist = 0.5 * static_cast<double>(n - 1);
  double f0 = 0.0;
  double best = -1.0;
  const int grid = static_cast<int>(8 * n);
  for (int k = 0; k <= grid; ++k) {
    const double f = nyquist * k / grid;
    cplx acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += (y[i] - mean) * std::exp(-I * (two_pi * f * s[i]));
    if (std::abs(acc) > best) {
      best = std::abs(acc);
      f0 = f;
    }
  }
  const double k0 = 2.0;
  // Amplitude and phase by linear least squares at the guessed f, rate.
  RealMatrix basis(static_cast<Eigen::Index>(n), 3);
  RealVector rhs(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::exp(-k0 * s[i]);
    basis(static_cast<Eigen::Index>(i), 0) = e * std::cos(two_pi * f0 * s[i]);
    basis(static_cast<Eigen::Index>(i), 1) = e * std::sin(two_pi * f0 * s[i]);
    basis(static_cast<Eigen::Index>(i), 2) = 1.0;
    rhs(static_cast<Eigen::Index>(i)) = y[i];
  }
  const RealVector lin = basis.colPivHouseholderQr().solve(rhs);
  const double amp = std::hypot(lin(0), lin(1));
  const double ph = std::atan2(-lin(1), lin(0));

  Model m = [](const RealVector& p, double x, double& v, Eigen::Ref<RealVector> g) {
    const double e = std::exp(-p(1) * x);
    const double arg = two_pi * p(2) * x + p(3);
    const double c = std::cos(arg);
    const double sn = std::sin(arg);
    v = p(0) * e * c + p(4);
    g(0) = e * c;
    g(1) = -p(0) * x * e * c;
    g(2) = -p(0) * e * sn * two_pi * x;
    g(3) = -p(0) * e * sn;
    g(4) = 1.0;
  };
  RealVector p(5);
  p << amp, k0, f0, ph, lin(2);
  FitResult r = solve(s, y, m, p);
  if (r.params(0) < 0) {
    r.params(0) = -r.params(0);
    r.params(3) += pi;
  }
  if (r.params(2) < 0) {
    r.params(2) = -r.params(2);
    r.params(3) = -r.params(3);
  }
  // Undo the time shift and scaling.
  r.params(3) = std::remainder(r.params(3) - two_pi * r.params(2) * t0 / scale, two_pi);
  r.params(0) *= std::exp(r.params(1) * t0 / scale);
  r.params(1) /= scale;
  r.params(2) /= scale;
  if (!(r.params(1) > 0)) r.flagged = true;
  return r;
}

FitResult fit_lorentzian_dip(const std::vector<double>& x, const std::vector<double>& y) {
  const double scale = span_of(x);
  const double x0 = x.front();
  const auto s = scaled(x, x0, scale);
  const auto imin = static_cast<std::size_t>(std::min_element(y.begin(), y.end()) - y.begin());
  const double c = std::max(y.front(), y.back());
  const double depth = c - y[imin];
  // Width from the half-depth crossings around the minimum.
  const double half = c - depth / 2.0;
  std::size_t lo = imin, hi = imin;
  while (lo > 0 && y[lo] < half) --lo;
  while (hi + 1 < y.size() && y[hi] < half) ++hi;
  double w = std::max(s[hi] - s[lo], 2.0 / static_cast<double>(x.size()));

  Model m = [](const RealVector& p, double xv, double& v, Eigen::Ref<RealVector> g) {
    const double u = 2.0 * (xv - p(1)) / p(2);
    const double d = 1.0 + u * u;
    v = p(3) - p(0) / d;
    g(0) = -1.0 / d;
    const double dv_du = p(0) * 2.0 * u / (d * d);
    g(1) = dv_du * (-2.0 / p(2));
    g(2) = dv_du * (-u / p(2));
    g(3) = 1.0;
  };
  RealVector p(4);
  p << depth, s[imin], w, c;
  FitResult r = solve(s, y, m, p);
  r.params(1) = x0 + r.params(1) * scale;
  r.params(2) = std::abs(r.params(2)) * scale;
  return r;
}

}  // namespace wgqed
