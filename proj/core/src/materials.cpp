#include "fibersolve/materials.hpp"

#include <cmath>

#include "fibersolve/tensor.hpp"

namespace fibersolve {

namespace {

int levi(int i, int j, int k) {
  if (i == j || j == k || i == k) return 0;
  return ((j - i + 3) % 3 == 1) ? 1 : -1;
}

// Models of the form a F:F + b H:H + f(J) + const.
struct FhjModel {
  double a, b;
  double (*f)(const MaterialModel&, double);
  double (*df)(const MaterialModel&, double);
  double (*ddf)(const MaterialModel&, double);
};

double pc_f(const MaterialModel& m, double J) {
  return -2.0 * m.alpha * std::log(J) - 4.0 * m.beta * J + 0.5 * m.lambda * (J - 1.0) * (J - 1.0) -
         3.0 * (m.alpha + m.beta);
}
double pc_df(const MaterialModel& m, double J) {
  return -2.0 * m.alpha / J - 4.0 * m.beta + m.lambda * (J - 1.0);
}
double pc_ddf(const MaterialModel& m, double J) { return 2.0 * m.alpha / (J * J) + m.lambda; }

double inv_c(const MaterialModel& m) { return 2.0 / 3.0 * (m.c1 + m.c2); }
double inv_d(const MaterialModel& m) { return 2.0 * (m.c1 + 2.0 * m.c2); }
double inv_f(const MaterialModel& m, double J) {
  return inv_c(m) * (J - 1.0) * (J - 1.0) - inv_d(m) * std::log(J) - 3.0 * (m.c1 + m.c2);
}
double inv_df(const MaterialModel& m, double J) { return 2.0 * inv_c(m) * (J - 1.0) - inv_d(m) / J; }
double inv_ddf(const MaterialModel& m, double J) { return 2.0 * inv_c(m) + inv_d(m) / (J * J); }

FhjModel fhj(const MaterialModel& m) {
  if (m.kind == MaterialKind::MooneyRivlinPolyconvex) return {m.alpha, m.beta, pc_f, pc_df, pc_ddf};
  return {m.c1, m.c2, inv_f, inv_df, inv_ddf};
}

Eigen::Matrix<double, 9, 1> flat(const Mat3& A) {
  Eigen::Matrix<double, 9, 1> v;
  for (int i = 0; i < 3; ++i)
    for (int J = 0; J < 3; ++J) v(3 * i + J) = A(i, J);
  return v;
}

double checked_det(const Mat3& H, const Mat3& F) {
  const double J = det_from_cofactor<double>(H, F);
  if (!(J > 1e-12)) throw Error(ErrorCode::NonPositiveJacobian, "det F = " + std::to_string(J));
  return J;
}

}  // namespace

Tensor4 cross_operator(const Mat3& A) {
  Tensor4 X = Tensor4::Zero();
  for (int i = 0; i < 3; ++i)
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) {
        const int e1 = levi(i, m, n);
        if (!e1) continue;
        for (int J = 0; J < 3; ++J)
          for (int P = 0; P < 3; ++P)
            for (int Q = 0; Q < 3; ++Q) {
              const int e2 = levi(J, P, Q);
              if (e2) X(3 * i + J, 3 * n + Q) += e1 * e2 * A(m, P);
            }
      }
  return X;
}

MaterialModel MaterialModel::svk(double E, double nu) {
  MaterialModel m;
  m.kind = MaterialKind::SVK;
  m.E = E;
  m.nu = nu;
  return m;
}

MaterialModel MaterialModel::mooney_rivlin_polyconvex(double alpha, double beta, double lambda) {
  MaterialModel m;
  m.kind = MaterialKind::MooneyRivlinPolyconvex;
  m.alpha = alpha;
  m.beta = beta;
  m.lambda = lambda;
  return m;
}

MaterialModel MaterialModel::mooney_rivlin_invariant(double c1, double c2) {
  MaterialModel m;
  m.kind = MaterialKind::MooneyRivlinInvariant;
  m.c1 = c1;
  m.c2 = c2;
  return m;
}

void MaterialModel::validate() const {
  switch (kind) {
    case MaterialKind::SVK:
      if (!(E > 0.0)) throw Error(ErrorCode::ValidationError, "E must be positive");
      if (!(nu > -1.0 && nu < 0.5)) throw Error(ErrorCode::ValidationError, "nu must lie in (-1, 0.5)");
      break;
    case MaterialKind::MooneyRivlinPolyconvex:
      if (alpha < 0.0 || beta < 0.0 || lambda < 0.0)
        throw Error(ErrorCode::ValidationError, "alpha, beta, lambda must be nonnegative");
      break;
    case MaterialKind::MooneyRivlinInvariant:
      if (!(c1 > 0.0 && c2 > 0.0)) throw Error(ErrorCode::ValidationError, "c1, c2 must be positive");
      break;
  }
}

const char* material_name(MaterialKind kind) {
  switch (kind) {
    case MaterialKind::SVK: return "svk";
    case MaterialKind::MooneyRivlinPolyconvex: return "mooney_rivlin_polyconvex";
    case MaterialKind::MooneyRivlinInvariant: return "mooney_rivlin_invariant";
  }
  return "svk";
}

MaterialKind material_from_name(const std::string& name) {
  if (name == "svk") return MaterialKind::SVK;
  if (name == "mooney_rivlin_polyconvex") return MaterialKind::MooneyRivlinPolyconvex;
  if (name == "mooney_rivlin_invariant") return MaterialKind::MooneyRivlinInvariant;
  throw Error(ErrorCode::ValidationError, "unknown material '" + name + "'");
}

double energy(const MaterialModel& model, const Mat3& F) {
  if (model.kind == MaterialKind::SVK) {
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    const double tr = E.trace();
    return 0.5 * model.lame_lambda() * tr * tr + model.lame_mu() * E.cwiseProduct(E).sum();
  }
  const FhjModel m = fhj(model);
  const Mat3 H = cofactor<double>(F);
  const double J = checked_det(H, F);
  return m.a * F.squaredNorm() + m.b * H.squaredNorm() + m.f(model, J);
}

void stress_and_tangent(const MaterialModel& model, const Mat3& F, Mat3& P, Tensor4& A) {
  if (model.kind == MaterialKind::SVK) {
    const double lam = model.lame_lambda(), mu = model.lame_mu();
    const Mat3 E = 0.5 * (F.transpose() * F - Mat3::Identity());
    const Mat3 S = lam * E.trace() * Mat3::Identity() + 2.0 * mu * E;
    P = F * S;
    const Mat3 FFt = F * F.transpose();
    for (int i = 0; i < 3; ++i)
      for (int J = 0; J < 3; ++J)
        for (int k = 0; k < 3; ++k)
          for (int L = 0; L < 3; ++L) {
            double v = lam * F(i, J) * F(k, L) + mu * F(i, L) * F(k, J);
            if (i == k) v += S(J, L);
            if (J == L) v += mu * FFt(i, k);
            A(3 * i + J, 3 * k + L) = v;
          }
    return;
  }
  const FhjModel m = fhj(model);
  const Mat3 H = cofactor<double>(F);
  const double J = checked_det(H, F);
  const Mat3 HxF = tensor_cross<double>(H, F);
  const double df = m.df(model, J), ddf = m.ddf(model, J);
  P = 2.0 * m.a * F + 2.0 * m.b * HxF + df * H;
  const Tensor4 XF = cross_operator(F);
  const Tensor4 XH = cross_operator(H);
  const auto h = flat(H);
  A = 2.0 * m.a * Tensor4::Identity() + 2.0 * m.b * (XF * XF + XH) + ddf * h * h.transpose() + df * XF;
}

Mat3 first_pk(const MaterialModel& model, const Mat3& F) {
  Mat3 P;
  Tensor4 A;
  stress_and_tangent(model, F, P, A);
  return P;
}

Tensor4 material_tangent(const MaterialModel& model, const Mat3& F) {
  Mat3 P;
  Tensor4 A;
  stress_and_tangent(model, F, P, A);
  return A;
}

}  // namespace fibersolve
