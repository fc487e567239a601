#pragma once

#include <utility>

#include "fibersolve/tensor.hpp"

namespace fibersolve {

// Orthonormal reference directors; D[2] is the fiber axis.
struct Directors {
  Vec3 D[3] = {Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitZ()};

  static Directors from_axis(const Vec3& axis);
  static Directors from_axis(const Vec3& axis, const Vec3& d1_hint);
};

struct BeamSection {
  double EA = 0, GA1 = 0, GA2 = 0, EI1 = 0, EI2 = 0, GJ = 0;
  double radius = 0;

  double circumference() const;
  double area() const;
  // Solid circular section, shear correction factor one.
  static BeamSection circular(double E, double nu, double r);

  Mat3 K1(const Directors& d) const;
  Mat3 K2(const Directors& d) const;
};

// Paraboloid quaternion map (q0^2 - q.q) I + 2 q (x) q + 2 q0 [q]x, q = (q0, q1, q2, q3).
template <class T>
M3<T> quat_to_rotation(const Eigen::Matrix<T, 4, 1>& q) {
  const V3<T> v = q.template tail<3>();
  const T q0 = q(0);
  M3<T> R = (q0 * q0 - v.dot(v)) * M3<T>::Identity() + T(2) * v * v.transpose() + T(2) * q0 * spin<T>(v);
  return R;
}

// Directional derivative of quat_to_rotation at q along dq.
template <class T>
M3<T> quat_rotation_derivative(const Eigen::Matrix<T, 4, 1>& q, const Eigen::Matrix<T, 4, 1>& dq) {
  const V3<T> v = q.template tail<3>();
  const V3<T> dv = dq.template tail<3>();
  const T q0 = q(0), dq0 = dq(0);
  return T(2) * (q0 * dq0 - v.dot(dv)) * M3<T>::Identity() +
         T(2) * (dv * v.transpose() + v * dv.transpose()) + T(2) * dq0 * spin<T>(v) + T(2) * q0 * spin<T>(dv);
}

inline Mat3 quat_to_rotation(const Vec4& q) { return quat_to_rotation<double>(q); }

template <class T>
std::pair<V3<T>, V3<T>> beam_strains(const M3<T>& R, const V3<T>& dphi_ds, const M3<T>& dR_ds, const Vec3& D3) {
  V3<T> gamma = R.transpose() * dphi_ds - D3.cast<T>();
  V3<T> kappa = axl<T>(M3<T>((R.transpose() * dR_ds).eval()));
  return {gamma, kappa};
}

inline std::pair<Vec3, Vec3> beam_strains(const Mat3& R, const Vec3& dphi_ds, const Mat3& dR_ds, const Vec3& D3) {
  return beam_strains<double>(R, dphi_ds, dR_ds, D3);
}

template <class T>
std::pair<V3<T>, V3<T>> beam_resultants(const V3<T>& gamma, const V3<T>& kappa, const BeamSection& s,
                                        const M3<T>& R, const Directors& d = Directors()) {
  const Mat3 K1 = s.K1(d), K2 = s.K2(d);
  V3<T> n = R * (K1.cast<T>() * gamma);
  V3<T> m = R * (K2.cast<T>() * kappa);
  return {n, m};
}

inline std::pair<Vec3, Vec3> beam_resultants(const Vec3& gamma, const Vec3& kappa, const BeamSection& s,
                                             const Mat3& R, const Directors& d = Directors()) {
  return beam_resultants<double>(gamma, kappa, s, R, d);
}

double beam_energy(const Vec3& gamma, const Vec3& kappa, const BeamSection& s, const Directors& d = Directors());

// Deformation gradient of the beam continuum at cross-section coordinates theta.
Mat3 beam_def_gradient(const Vec3& gamma, const Vec3& kappa, const Eigen::Vector2d& theta, const Mat3& R,
                       const Directors& d);

// The same quantity from the position field: phi' (x) D3 + d_a (x) D_a + theta^a d_a' (x) D3.
Mat3 beam_def_gradient_direct(const Vec3& dphi_ds, const Mat3& R, const Mat3& dR_ds, const Eigen::Vector2d& theta,
                              const Directors& d);

}  // namespace fibersolve
