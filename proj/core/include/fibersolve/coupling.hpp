#pragma once

#include "fibersolve/beam.hpp"

namespace fibersolve {

template <class T>
struct CouplingFrameT {
  Directors D;
  M3<T> R, dR;
  V3<T> d[3];
  M3<T> P[2], Q[2], dP[2];
  V3<T> kappa;
  double circumference = 0.0;

  // Spatial vector with components c on the current directors.
  V3<T> on_directors(const V3<T>& c) const { return c(0) * d[0] + c(1) * d[1] + c(2) * d[2]; }
};

using CouplingFrame = CouplingFrameT<double>;

template <class T>
CouplingFrameT<T> build_frame(const M3<T>& R, const M3<T>& dR_ds, const Directors& D, double circumference) {
  CouplingFrameT<T> f;
  f.D = D;
  f.R = R;
  f.dR = dR_ds;
  f.circumference = circumference;
  for (int i = 0; i < 3; ++i) f.d[i] = R * D.D[i].cast<T>();
  const V3<T>&d1 = f.d[0], &d2 = f.d[1], &d3 = f.d[2];
  f.P[0] = d2 * d3.transpose() - T(2) * d3 * d2.transpose();
  f.P[1] = -d1 * d3.transpose() + T(2) * d3 * d1.transpose();
  f.Q[0] = d1 * d1.transpose() + d2 * d3.transpose();
  f.Q[1] = d2 * d2.transpose() + d1 * d3.transpose();
  f.kappa = axl<T>(M3<T>((dR_ds * R.transpose()).eval()));
  const M3<T> K = spin<T>(f.kappa);
  for (int a = 0; a < 2; ++a) f.dP[a] = K * f.P[a] - f.P[a] * K;
  return f;
}

inline CouplingFrame build_frame(const Mat3& R, const Mat3& dR_ds, const Directors& D, double circumference) {
  return build_frame<double>(R, dR_ds, D, circumference);
}

// Interface stress from multiplier components on the current directors.
Mat3 sigma_assemble(const CouplingFrame& f, const Vec3& mu_tau, const Vec3& mu_n);

// Explicit matrix representation R D [mu-matrix] D^T of the same stress.
Mat3 sigma_matrix_form(const CouplingFrame& f, const Vec3& mu_tau, const Vec3& mu_n);

// R^T Q_a mu_n (x) D_a
Mat3 mu_n_sym(const CouplingFrame& f, const Vec3& mu_n);

// Rotation-free form mu1 D1(x)D1 + mu2 D2(x)D2 + mu3 (D1(x)D2 + D2(x)D1); equals mu_n_sym for orthogonal R.
template <class T>
M3<T> mu_n_sym_reference(const Directors& D, const V3<T>& mu) {
  const Vec3 &D1 = D.D[0], &D2 = D.D[1];
  const Mat3 B1 = D1 * D1.transpose(), B2 = D2 * D2.transpose(), B3 = D1 * D2.transpose() + D2 * D1.transpose();
  return mu(0) * B1.cast<T>() + mu(1) * B2.cast<T>() + mu(2) * B3.cast<T>();
}

struct CondensedStresses {
  Mat3 Pn = Mat3::Zero();
  Mat3 Pm = Mat3::Zero();
  Mat3 Pg = Mat3::Zero();
  Mat3 Pshear = Mat3::Zero();
  Tensor3 PP;  // third-order stress, contracted with the Hessian of test functions
};

template <class T>
M3<T> stress_Pm(const CouplingFrameT<T>& f, const V3<T>& n, const V3<T>& m, const V3<T>& dphi_ds,
                const Vec3& mbar) {
  M3<T> Pm = M3<T>::Zero();
  const V3<T> t = dphi_ds.cross(n) + mbar.cast<T>();
  for (int a = 0; a < 2; ++a) Pm += T(0.5) * (f.dP[a] * m - f.P[a] * t) * f.D.D[a].template cast<T>().transpose();
  return Pm;
}

CondensedStresses condensed_stresses(const CouplingFrame& f, const Vec3& n, const Vec3& m, const Vec3& dphi_ds,
                                     const Vec3& mbar, const Mat3& Fc, const Vec3& mu_n,
                                     const Vec3 dD[2] = nullptr);

struct ConstraintDensities {
  Vec3 pos, tau, area;
};

template <class T>
V3<T> tau_density(const CouplingFrameT<T>& f, const M3<T>& Fc) {
  V3<T> g = V3<T>::Zero();
  for (int a = 0; a < 2; ++a) g += T(0.5) * f.P[a].transpose() * (Fc * f.D.D[a].template cast<T>() - f.d[a]);
  return g;
}

template <class T>
V3<T> area_density(const Directors& D, const M3<T>& Fc) {
  const M3<T> E = T(0.5) * (Fc.transpose() * Fc - M3<T>::Identity());
  const Vec3 &D1 = D.D[0], &D2 = D.D[1];
  return V3<T>(D1.cast<T>().dot(E * D1.cast<T>()), D2.cast<T>().dot(E * D2.cast<T>()),
               T(2) * D1.cast<T>().dot(E * D2.cast<T>()));
}

ConstraintDensities constraint_densities(const CouplingFrame& f, const Vec3& phi_c, const Vec3& phi_t, const Mat3& Fc);

template <class T>
M3<T> endpoint_moment_stress(const CouplingFrameT<T>& f, const Vec3& m_ext) {
  M3<T> S = M3<T>::Zero();
  for (int a = 0; a < 2; ++a) S += T(0.5) * (f.P[a] * m_ext.cast<T>()) * f.D.D[a].template cast<T>().transpose();
  return S;
}

}  // namespace fibersolve
