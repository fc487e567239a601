#include "fibersolve/coupling.hpp"

namespace fibersolve {

Mat3 sigma_assemble(const CouplingFrame& f, const Vec3& mu_tau, const Vec3& mu_n) {
  const Vec3 tau = f.on_directors(mu_tau), nrm = f.on_directors(mu_n);
  Mat3 S = Mat3::Zero();
  for (int a = 0; a < 2; ++a) S += (f.P[a] * tau + f.Q[a] * nrm) * f.D.D[a].transpose();
  return S;
}

Mat3 sigma_matrix_form(const CouplingFrame& f, const Vec3& t, const Vec3& n) {
  Mat3 M;
  M << n(0), n(2) - t(2), 0.0, n(2) + t(2), n(1), 0.0, -2.0 * t(1), 2.0 * t(0), 0.0;
  Mat3 Dm;
  for (int j = 0; j < 3; ++j) Dm.col(j) = f.D.D[j];
  return f.R * Dm * M * Dm.transpose();
}

Mat3 mu_n_sym(const CouplingFrame& f, const Vec3& mu_n) {
  const Vec3 nrm = f.on_directors(mu_n);
  Mat3 S = Mat3::Zero();
  for (int a = 0; a < 2; ++a) S += (f.Q[a] * nrm) * f.D.D[a].transpose();
  return f.R.transpose() * S;
}

CondensedStresses condensed_stresses(const CouplingFrame& f, const Vec3& n, const Vec3& m, const Vec3& dphi_ds,
                                     const Vec3& mbar, const Mat3& Fc, const Vec3& mu_n, const Vec3 dD[2]) {
  CondensedStresses s;
  s.Pn = n * f.D.D[2].transpose();
  s.Pm = stress_Pm<double>(f, n, m, dphi_ds, mbar);
  if (dD)
    for (int a = 0; a < 2; ++a) s.Pg += 0.5 * (f.P[a] * m) * dD[a].transpose();
  s.Pshear = 0.5 * f.circumference * Fc * mu_n_sym_reference<double>(f.D, mu_n);
  for (int a = 0; a < 2; ++a) {
    const Vec3 v = 0.5 * f.P[a] * m;
    for (int K = 0; K < 3; ++K) s.PP.slice[K] += f.D.D[2][K] * v * f.D.D[a].transpose();
  }
  return s;
}

ConstraintDensities constraint_densities(const CouplingFrame& f, const Vec3& phi_c, const Vec3& phi_t, const Mat3& Fc) {
  return {phi_c - phi_t, tau_density<double>(f, Fc), area_density<double>(f.D, Fc)};
}

}  // namespace fibersolve
