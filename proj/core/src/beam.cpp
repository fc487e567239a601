#include "fibersolve/beam.hpp"

#include <cmath>
#include <numbers>

namespace fibersolve {

Directors Directors::from_axis(const Vec3& axis) {
  const Vec3 a = axis.normalized();
  // Take the coordinate axis least aligned with the fiber as the first director hint.
  int k = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(a[i]) < std::abs(a[k])) k = i;
  Vec3 hint = Vec3::Zero();
  hint[k] = 1.0;
  return from_axis(a, hint);
}

Directors Directors::from_axis(const Vec3& axis, const Vec3& d1_hint) {
  Directors d;
  d.D[2] = axis.normalized();
  Vec3 d1 = d1_hint - d1_hint.dot(d.D[2]) * d.D[2];
  if (d1.norm() < 1e-10) throw Error(ErrorCode::ValidationError, "director hint parallel to fiber axis");
  d.D[0] = d1.normalized();
  d.D[1] = d.D[2].cross(d.D[0]);
  return d;
}

double BeamSection::circumference() const { return 2.0 * std::numbers::pi * radius; }
double BeamSection::area() const { return std::numbers::pi * radius * radius; }

BeamSection BeamSection::circular(double E, double nu, double r) {
  const double A = std::numbers::pi * r * r;
  const double I = std::numbers::pi * std::pow(r, 4) / 4.0;
  const double G = E / (2.0 * (1.0 + nu));
  BeamSection s;
  s.EA = E * A;
  s.GA1 = s.GA2 = G * A;
  s.EI1 = s.EI2 = E * I;
  s.GJ = G * 2.0 * I;
  s.radius = r;
  return s;
}

Mat3 BeamSection::K1(const Directors& d) const {
  return GA1 * d.D[0] * d.D[0].transpose() + GA2 * d.D[1] * d.D[1].transpose() + EA * d.D[2] * d.D[2].transpose();
}

Mat3 BeamSection::K2(const Directors& d) const {
  return EI1 * d.D[0] * d.D[0].transpose() + EI2 * d.D[1] * d.D[1].transpose() + GJ * d.D[2] * d.D[2].transpose();
}

double beam_energy(const Vec3& gamma, const Vec3& kappa, const BeamSection& s, const Directors& d) {
  return 0.5 * gamma.dot(s.K1(d) * gamma) + 0.5 * kappa.dot(s.K2(d) * kappa);
}

Mat3 beam_def_gradient(const Vec3& gamma, const Vec3& kappa, const Eigen::Vector2d& theta, const Mat3& R,
                       const Directors& d) {
  const Vec3 X = theta[0] * d.D[0] + theta[1] * d.D[1];
  return R * (gamma * d.D[2].transpose() + spin(kappa) * X * d.D[2].transpose() + Mat3::Identity());
}

Mat3 beam_def_gradient_direct(const Vec3& dphi_ds, const Mat3& R, const Mat3& dR_ds, const Eigen::Vector2d& theta,
                              const Directors& d) {
  Mat3 F = dphi_ds * d.D[2].transpose();
  for (int a = 0; a < 2; ++a) {
    F += (R * d.D[a]) * d.D[a].transpose();
    F += theta[a] * (dR_ds * d.D[a]) * d.D[2].transpose();
  }
  return F;
}

}  // namespace fibersolve
