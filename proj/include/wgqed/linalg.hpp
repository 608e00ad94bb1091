#pragma once

// Small expression-friendly helpers over Eigen dense types.

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace wgqed {

template <typename Derived>
auto dagger(const Eigen::MatrixBase<Derived>& a) {
  return a.adjoint();
}

template <typename DerivedA, typename DerivedB>
auto commutator(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b) {
  using Plain = typename DerivedA::PlainObject;
  Plain out = a * b;
  out.noalias() -= b * a;
  return out;
}

template <typename Derived>
typename Derived::RealScalar max_abs(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return a.cwiseAbs().maxCoeff();
}

// Largest |A - A^dagger| element.
template <typename Derived>
typename Derived::RealScalar hermiticity_defect(const Eigen::MatrixBase<Derived>& a) {
  return max_abs(a - a.adjoint());
}

// Hermiticity test with tolerance relative to the largest element (at least 1).
template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, typename Derived::RealScalar tol = 1e-12) {
  using Real = typename Derived::RealScalar;
  const Real scale = std::max<Real>(Real(1), max_abs(a));
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol * scale;
}

template <typename Derived>
typename Derived::PlainObject hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return (a + a.adjoint()) / typename Derived::RealScalar(2);
}

template <typename Derived>
typename Derived::PlainObject anti_hermitian_part(const Eigen::MatrixBase<Derived>& a) {
  return (a - a.adjoint()) / typename Derived::RealScalar(2);
}

// |<u|v>|^2 / (<u|u><v|v>)
template <typename DerivedU, typename DerivedV>
typename DerivedU::RealScalar fidelity(const Eigen::MatrixBase<DerivedU>& u,
                                       const Eigen::MatrixBase<DerivedV>& v) {
  const auto nu = u.squaredNorm();
  const auto nv = v.squaredNorm();
  if (nu == 0 || nv == 0) return 0;
  return std::norm(u.dot(v)) / (nu * nv);
}

template <typename Derived>
typename Derived::Scalar expectation(const Eigen::MatrixBase<Derived>& op,
                                     const Eigen::Ref<const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>>& psi) {
  return psi.dot(op * psi) / psi.squaredNorm();
}

}  // namespace wgqed
