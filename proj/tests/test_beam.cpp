#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "fibersolve/beam.hpp"
#include "test_util.hpp"

using namespace fibersolve;
using namespace fibersolve::test;

namespace {

Vec4 quat_product(const Vec4& p, const Vec4& q) {
  const Vec3 pv = p.tail<3>(), qv = q.tail<3>();
  Vec4 r;
  r(0) = p(0) * q(0) - pv.dot(qv);
  r.tail<3>() = p(0) * qv + q(0) * pv + pv.cross(qv);
  return r;
}

}  // namespace

TEST(Quaternion, IdentityAndQuarterTurn) {
  EXPECT_LE((quat_to_rotation(Vec4(1, 0, 0, 0)) - Mat3::Identity()).norm(), 1e-15);
  const double c = std::cos(M_PI / 4), s = std::sin(M_PI / 4);
  EXPECT_LE((quat_to_rotation(Vec4(c, 0, 0, s)) * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
}

TEST(Quaternion, UnitQuaternionsAreRotations) {
  for (int t = 0; t < 100; ++t) {
    const Mat3 R = quat_to_rotation(random_unit_quat());
    EXPECT_LE((R.transpose() * R - Mat3::Identity()).norm(), 1e-12);
    EXPECT_NEAR(R.determinant(), 1.0, 1e-12);
  }
}

TEST(Quaternion, ProductComposesRotations) {
  for (int t = 0; t < 100; ++t) {
    const Vec4 p = random_unit_quat(), q = random_unit_quat();
    EXPECT_LE((quat_to_rotation(quat_product(p, q)) - quat_to_rotation(p) * quat_to_rotation(q)).norm(), 1e-12);
  }
}

TEST(Quaternion, DerivativeMatchesFiniteDifferences) {
  for (int t = 0; t < 50; ++t) {
    const Vec4 q(uniform(), uniform(), uniform(), uniform()), dq(uniform(), uniform(), uniform(), uniform());
    const double h = 1e-6;
    const Mat3 fd = (quat_to_rotation(Vec4(q + h * dq)) - quat_to_rotation(Vec4(q - h * dq))) / (2 * h);
    EXPECT_LE((fd - quat_rotation_derivative<double>(q, dq)).norm(), 1e-8);
  }
}

TEST(BeamStrains, ReferenceStretchAndCurvature) {
  auto [g0, k0] = beam_strains(Mat3::Identity(), Vec3::UnitZ(), Mat3::Zero(), Vec3::UnitZ());
  EXPECT_LE(g0.norm() + k0.norm(), 1e-15);
  auto [g1, k1] = beam_strains(Mat3::Identity(), Vec3(0, 0, 1.02), Mat3::Zero(), Vec3::UnitZ());
  EXPECT_LE((g1 - Vec3(0, 0, 0.02)).norm(), 1e-15);
  EXPECT_LE(k1.norm(), 1e-15);
  const double kappa = 0.7, s = 0.4;
  const Mat3 W = kappa * spin(Vec3::UnitX());
  const Mat3 R = (s * W).exp();
  auto [g2, k2] = beam_strains(R, R * Vec3::UnitZ(), R * W, Vec3::UnitZ());
  EXPECT_LE((k2 - Vec3(kappa, 0, 0)).norm(), 1e-13);
  EXPECT_LE(g2.norm(), 1e-14);
}

TEST(BeamStrains, Objectivity) {
  for (int t = 0; t < 50; ++t) {
    const Mat3 R = quat_to_rotation(random_unit_quat()), dR = R * spin(random_vec()), Q = random_rotation();
    const Vec3 dphi = random_vec();
    auto [g, k] = beam_strains(R, dphi, dR, Vec3::UnitZ());
    auto [gq, kq] = beam_strains(Mat3(Q * R), Vec3(Q * dphi), Mat3(Q * dR), Vec3::UnitZ());
    EXPECT_LE((g - gq).norm() + (k - kq).norm(), 1e-12);
  }
}

TEST(BeamResultants, DiagonalLaw) {
  const BeamSection sec = BeamSection::circular(200.0, 0.3, 0.1);
  const Directors d;
  auto [n, m] = beam_resultants(Vec3(0, 0, 0.01), Vec3::Zero(), sec, Mat3::Identity(), d);
  EXPECT_LE((n - Vec3(0, 0, sec.EA * 0.01)).norm(), 1e-14);
  EXPECT_LE(m.norm(), 1e-15);
  auto [n2, m2] = beam_resultants(Vec3::Zero(), Vec3(0, 0, 0.3), sec, Mat3::Identity(), d);
  EXPECT_LE((m2 - Vec3(0, 0, sec.GJ * 0.3)).norm(), 1e-15);
  EXPECT_LE(n2.norm(), 1e-15);
}

TEST(BeamResultants, PushForwardAndEnergyGradient) {
  const BeamSection sec = BeamSection::circular(4346.0, 0.3, 0.125);
  const Directors d = Directors::from_axis(Vec3(1, 2, 3).normalized());
  for (int t = 0; t < 50; ++t) {
    const Vec3 g = random_vec(0.1), k = random_vec(0.1);
    const Mat3 R = random_rotation();
    auto [n, m] = beam_resultants(g, k, sec, R, d);
    auto [n0, m0] = beam_resultants(g, k, sec, Mat3::Identity(), d);
    EXPECT_LE((n - R * n0).norm() + (m - R * m0).norm(), 1e-12 * (1 + n0.norm() + m0.norm()));
    const double h = 1e-6;
    Vec3 fdn, fdm;
    for (int i = 0; i < 3; ++i) {
      Vec3 e = Vec3::Zero();
      e(i) = h;
      fdn(i) = (beam_energy(g + e, k, sec, d) - beam_energy(g - e, k, sec, d)) / (2 * h);
      fdm(i) = (beam_energy(g, k + e, sec, d) - beam_energy(g, k - e, sec, d)) / (2 * h);
    }
    EXPECT_LE(rel_err_mat(fdn, n0), 1e-8);
    EXPECT_LE(rel_err_mat(fdm, m0), 1e-8);
  }
}

TEST(BeamSection, CircularStiffness) {
  const BeamSection s = BeamSection::circular(10.0, 0.25, 0.5);
  const double A = M_PI * 0.25, I = M_PI * std::pow(0.5, 4) / 4, G = 10.0 / 2.5;
  EXPECT_NEAR(s.EA, 10 * A, 1e-14);
  EXPECT_NEAR(s.GA1, G * A, 1e-14);
  EXPECT_NEAR(s.EI1, 10 * I, 1e-14);
  EXPECT_NEAR(s.GJ, G * 2 * I, 1e-14);
  EXPECT_NEAR(s.circumference(), M_PI, 1e-15);
}

TEST(Directors, OrthonormalRightHanded) {
  for (int t = 0; t < 50; ++t) {
    const Directors d = Directors::from_axis(random_vec());
    Mat3 D;
    for (int i = 0; i < 3; ++i) D.col(i) = d.D[i];
    EXPECT_LE((D.transpose() * D - Mat3::Identity()).norm(), 1e-14);
    EXPECT_NEAR(D.determinant(), 1.0, 1e-14);
  }
  EXPECT_THROW(Directors::from_axis(Vec3::UnitX(), Vec3::UnitX()), Error);
}

TEST(BeamDefGradient, RigidAndStretch) {
  const Directors d;
  EXPECT_LE((beam_def_gradient(Vec3::Zero(), Vec3::Zero(), {0.3, -0.2}, Mat3::Identity(), d) - Mat3::Identity()).norm(),
            1e-15);
  const Mat3 F = beam_def_gradient(Vec3(0, 0, 0.05), Vec3::Zero(), {0.1, 0.1}, Mat3::Identity(), d);
  Mat3 ref = Mat3::Identity();
  ref(2, 2) += 0.05;
  EXPECT_LE((F - ref).norm(), 1e-15);
}

TEST(BeamDefGradient, DualFormula) {
  for (int t = 0; t < 1000; ++t) {
    const Directors d = Directors::from_axis(random_vec());
    const Mat3 R = quat_to_rotation(random_unit_quat()), dR = R * spin(random_vec());
    const Vec3 dphi = random_vec();
    const Eigen::Vector2d th(uniform(), uniform());
    auto [g, k] = beam_strains(R, dphi, dR, d.D[2]);
    EXPECT_LE((beam_def_gradient(g, k, th, R, d) - beam_def_gradient_direct(dphi, R, dR, th, d)).norm(), 1e-10);
  }
}
