#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "fibersolve/coupling.hpp"
#include "test_util.hpp"

using namespace fibersolve;
using namespace fibersolve::test;

namespace {

CouplingFrame random_frame(double C = 1.0) {
  const Directors D = Directors::from_axis(random_vec());
  const Mat3 R = random_rotation();
  return build_frame(R, Mat3(R * spin(random_vec())), D, C);
}

Mat3 outer(const Vec3& a, const Vec3& b) { return a * b.transpose(); }

const Vec3 e1 = Vec3::UnitX(), e2 = Vec3::UnitY(), e3 = Vec3::UnitZ();

}  // namespace

TEST(Frame, IdentityTensors) {
  const CouplingFrame f = build_frame(Mat3::Identity(), Mat3::Zero(), Directors(), 1.0);
  EXPECT_LE((f.P[0] - (outer(e2, e3) - 2 * outer(e3, e2))).norm(), 1e-15);
  EXPECT_LE((f.P[1] - (-outer(e1, e3) + 2 * outer(e3, e1))).norm(), 1e-15);
  EXPECT_LE(f.kappa.norm() + f.dP[0].norm() + f.dP[1].norm(), 1e-15);
}

TEST(Frame, DerivativeOfPMatchesFiniteDifferences) {
  for (int t = 0; t < 1000; ++t) {
    const Directors D = Directors::from_axis(random_vec());
    const Mat3 R0 = random_rotation();
    const Vec3 w = random_vec(), w2 = random_vec();
    // Non-uniform rotation path R(s) = R0 exp(s W + s^2 W2).
    auto R = [&](double s) { return Mat3(R0 * Mat3(s * spin(w) + s * s * spin(w2)).exp()); };
    const double s = uniform(), h = 1e-5;
    const Mat3 dR = (R(s + h) - R(s - h)) / (2 * h);
    const CouplingFrame f = build_frame(R(s), dR, D, 1.0);
    const CouplingFrame fp = build_frame(R(s + h), Mat3::Zero(), D, 1.0);
    const CouplingFrame fm = build_frame(R(s - h), Mat3::Zero(), D, 1.0);
    for (int a = 0; a < 2; ++a) EXPECT_LE(rel_err_mat(Mat3((fp.P[a] - fm.P[a]) / (2 * h)), f.dP[a]), 1e-6);
  }
}

TEST(Sigma, ZeroAndTorsion) {
  const CouplingFrame f = build_frame(Mat3::Identity(), Mat3::Zero(), Directors(), 1.0);
  EXPECT_LE(sigma_assemble(f, Vec3::Zero(), Vec3::Zero()).norm(), 1e-15);
  const double t = 0.7;
  EXPECT_LE((sigma_assemble(f, Vec3(0, 0, t), Vec3::Zero()) - t * (outer(e2, e1) - outer(e1, e2))).norm(), 1e-15);
}

TEST(Sigma, DecompositionMatchesMatrixFormAndAxlRecovery) {
  for (int t = 0; t < 1000; ++t) {
    const CouplingFrame f = random_frame();
    const Vec3 tau = random_vec(), nu = random_vec();
    const Mat3 S = sigma_assemble(f, tau, nu);
    EXPECT_LE((S - sigma_matrix_form(f, tau, nu)).norm(), 1e-12);
    Mat3 d;
    for (int i = 0; i < 3; ++i) d.col(i) = f.d[i];
    EXPECT_LE((d.transpose() * axl(Mat3(S * f.R.transpose())) - tau).norm(), 1e-12);
  }
}

TEST(MuNSym, HandValueAndSymmetry) {
  const CouplingFrame f = build_frame(Mat3::Identity(), Mat3::Zero(), Directors(), 1.0);
  Mat3 ref;
  ref << 1, 3, 0, 3, 2, 0, 0, 0, 0;
  EXPECT_LE((mu_n_sym(f, Vec3(1, 2, 3)) - ref).norm(), 1e-15);
  EXPECT_LE(mu_n_sym(f, Vec3::Zero()).norm(), 1e-15);
  for (int t = 0; t < 1000; ++t) {
    const CouplingFrame g = random_frame();
    const Vec3 mu = random_vec();
    const Mat3 S = mu_n_sym(g, mu);
    const Vec3 nu = g.on_directors(mu);
    Mat3 indep = Mat3::Zero();
    indep += (g.d[0] * g.d[0].transpose() + g.d[1] * g.d[2].transpose()) * nu * g.D.D[0].transpose();
    indep += (g.d[1] * g.d[1].transpose() + g.d[0] * g.d[2].transpose()) * nu * g.D.D[1].transpose();
    EXPECT_LE((S - g.R.transpose() * indep).norm(), 1e-12);
    EXPECT_LE((S - S.transpose()).norm(), 1e-12);
    EXPECT_LE((S - mu_n_sym_reference<double>(g.D, mu)).norm(), 1e-12);
  }
}

TEST(MuNSym, InterfaceIdentityWhenConstraintsHold) {
  for (int t = 0; t < 1000; ++t) {
    const CouplingFrame f = random_frame();
    const Vec3 mu = random_vec();
    // F_c maps D_a onto d_a; the axial column is arbitrary.
    const Mat3 Fc = f.R + random_vec() * f.D.D[2].transpose();
    const Mat3 G = random_mat();
    const Vec3 nu = f.on_directors(mu);
    double lhs = 0;
    for (int a = 0; a < 2; ++a) lhs += ((f.Q[a] * nu) * f.D.D[a].transpose()).cwiseProduct(G).sum();
    const double rhs = (Fc * mu_n_sym_reference<double>(f.D, mu)).cwiseProduct(G).sum();
    EXPECT_NEAR(lhs, rhs, 1e-10);
  }
}

TEST(CondensedStresses, HandValues) {
  const CouplingFrame f = build_frame(Mat3::Identity(), Mat3::Zero(), Directors(), 1.0);
  const CondensedStresses z =
      condensed_stresses(f, Vec3::Zero(), Vec3::Zero(), e3, Vec3::Zero(), Mat3::Identity(), Vec3::Zero());
  EXPECT_LE(z.Pn.norm() + z.Pm.norm() + z.Pg.norm() + z.Pshear.norm(), 1e-15);
  const double m = 0.4;
  const CondensedStresses s =
      condensed_stresses(f, Vec3::Zero(), Vec3(0, 0, m), e3, Vec3::Zero(), Mat3::Identity(), Vec3::Zero());
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J)
      for (int K = 0; K < 3; ++K) {
        const double ref = 0.5 * m * (e2(i) * e1(J) * e3(K) - e1(i) * e2(J) * e3(K));
        EXPECT_NEAR(s.PP(i, J, K), ref, 1e-15);
      }
  const double n = 1.3;
  const CondensedStresses a = condensed_stresses(f, Vec3(0, 0, n), Vec3::Zero(), e3, Vec3::Zero(), Mat3::Identity(),
                                                 Vec3::Zero());
  EXPECT_LE((a.Pn - n * outer(e3, e3)).norm(), 1e-15);
  EXPECT_LE(a.Pm.norm(), 1e-15);
}

TEST(CondensedStresses, CurvatureTermVanishesForStraightFibers) {
  const CouplingFrame f = random_frame();
  const Vec3 dD[2] = {Vec3::Zero(), Vec3::Zero()};
  const CondensedStresses s =
      condensed_stresses(f, random_vec(), random_vec(), random_vec(), random_vec(), random_F(), random_vec(), dD);
  EXPECT_LE(s.Pg.norm(), 1e-15);
  const Vec3 bent[2] = {random_vec(), random_vec()};
  const Vec3 m = random_vec();
  const CondensedStresses b = condensed_stresses(f, random_vec(), m, random_vec(), random_vec(), random_F(), random_vec(), bent);
  EXPECT_GT(b.Pg.norm(), 0.0);
}

TEST(CondensedStresses, ThirdOrderStressSeesOnlyAxialSecondDerivative) {
  for (int t = 0; t < 100; ++t) {
    const CouplingFrame f = random_frame();
    const CondensedStresses s =
        condensed_stresses(f, random_vec(), random_vec(), random_vec(), random_vec(), random_F(), random_vec());
    // Symmetric S with S D3 = 0.
    const Vec3 &D1 = f.D.D[0], &D2 = f.D.D[1];
    const Mat3 S = uniform() * outer(D1, D1) + uniform() * outer(D2, D2) + uniform() * (outer(D1, D2) + outer(D2, D1));
    for (int i = 0; i < 3; ++i) {
      double c = 0;
      for (int J = 0; J < 3; ++J)
        for (int K = 0; K < 3; ++K) c += s.PP(i, J, K) * S(J, K);
      EXPECT_NEAR(c, 0.0, 1e-14);
    }
  }
}

TEST(ConstraintDensities, ExactAndRotations) {
  for (int t = 0; t < 100; ++t) {
    const CouplingFrame f = random_frame();
    const Vec3 x = random_vec();
    const ConstraintDensities g = constraint_densities(f, x, x, f.R);
    EXPECT_LE(g.pos.norm() + g.tau.norm() + g.area.norm(), 1e-14);
    EXPECT_LE(constraint_densities(f, x, x, random_rotation()).area.norm(), 1e-14);
    const double eps = 1e-3;
    const Mat3 bent = f.R + eps * f.d[2] * f.D.D[0].transpose();
    EXPECT_GT(constraint_densities(f, x, x, bent).tau.norm(), 1e-5);
  }
  const CouplingFrame f = build_frame(Mat3::Identity(), Mat3::Zero(), Directors(), 1.0);
  const double a = 0.03;
  const ConstraintDensities g = constraint_densities(f, Vec3::Zero(), Vec3::Zero(), Mat3(Eigen::Vector3d(1 + a, 1, 1).asDiagonal()));
  EXPECT_LE((g.area - Vec3(0.5 * ((1 + a) * (1 + a) - 1), 0, 0)).norm(), 1e-15);
}

TEST(EndpointMomentStress, HandValues) {
  const CouplingFrame f = build_frame(Mat3::Identity(), Mat3::Zero(), Directors(), 1.0);
  EXPECT_LE(endpoint_moment_stress<double>(f, Vec3::Zero()).norm(), 1e-15);
  const double M = 0.025;
  EXPECT_LE((endpoint_moment_stress<double>(f, Vec3(0, 0, M)) - 0.5 * M * (outer(e2, e1) - outer(e1, e2))).norm(), 1e-15);
  EXPECT_LE((endpoint_moment_stress<double>(f, Vec3(M, 0, 0)) - M * outer(e3, e2)).norm(), 1e-15);
}
