#include "fibersolve/bspline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace fibersolve {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::OutOfRange: return "out-of-range";
    case ErrorCode::PointOutsidePatch: return "point-outside-patch";
    case ErrorCode::NonPositiveJacobian: return "non-positive-jacobian";
    case ErrorCode::InconsistentOrders: return "inconsistent-orders";
    case ErrorCode::FiberOutsidePatch: return "fiber-outside-patch";
    case ErrorCode::SingularJacobian: return "singular-jacobian";
    case ErrorCode::SingularMassBlock: return "singular-mass-block";
    case ErrorCode::NoConvergence: return "no-convergence";
    case ErrorCode::SingularLinearSystem: return "singular-linear-system";
    case ErrorCode::ParseError: return "parse-error";
    case ErrorCode::ValidationError: return "validation-error";
    case ErrorCode::IoError: return "io-error";
  }
  return "error";
}

int KnotVector::num_spans() const { return static_cast<int>(breaks().size()) - 1; }

std::vector<double> KnotVector::breaks() const {
  std::vector<double> b;
  for (double k : knots)
    if (b.empty() || k > b.back()) b.push_back(k);
  return b;
}

double KnotVector::greville(int a) const {
  if (degree == 0) return 0.5 * (knots[a] + knots[a + 1]);
  double s = 0.0;
  for (int j = 1; j <= degree; ++j) s += knots[a + j];
  return s / degree;
}

KnotVector open_knot_vector(int p, int n_el, double a, double b) {
  if (p < 0) throw Error(ErrorCode::InvalidArgument, "negative degree");
  if (n_el < 1) throw Error(ErrorCode::InvalidArgument, "element count must be positive");
  if (!(a < b)) throw Error(ErrorCode::InvalidArgument, "empty interval");
  KnotVector kv;
  kv.degree = p;
  kv.knots.assign(p + 1, a);
  for (int e = 1; e < n_el; ++e) kv.knots.push_back(a + (b - a) * e / n_el);
  kv.knots.insert(kv.knots.end(), p + 1, b);
  return kv;
}

int find_span(const KnotVector& kv, double xi) {
  const int p = kv.degree;
  const int n = kv.num_basis();
  if (xi >= kv.knots[n]) return n - 1;
  if (xi <= kv.knots[p]) return p;
  auto it = std::upper_bound(kv.knots.begin() + p, kv.knots.begin() + n + 1, xi);
  return static_cast<int>(it - kv.knots.begin()) - 1;
}

BasisEval eval_basis(const KnotVector& kv, double xi, int max_deriv) {
  if (max_deriv < 0 || max_deriv > 2) throw Error(ErrorCode::InvalidArgument, "max_deriv must be 0..2");
  const double lo = kv.front(), hi = kv.back();
  const double slack = 1e-12 * (hi - lo);
  if (!(xi >= lo - slack && xi <= hi + slack))
    throw Error(ErrorCode::OutOfRange, "parameter outside knot range");
  xi = std::clamp(xi, lo, hi);

  const int p = kv.degree;
  const int span = find_span(kv, xi);
  const auto& U = kv.knots;
  const int nd = std::min(max_deriv, p);

  // Triangular table of basis functions and knot differences.
  std::vector<std::vector<double>> ndu(p + 1, std::vector<double>(p + 1, 0.0));
  std::vector<double> left(p + 1), right(p + 1);
  ndu[0][0] = 1.0;
  for (int j = 1; j <= p; ++j) {
    left[j] = xi - U[span + 1 - j];
    right[j] = U[span + j] - xi;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      ndu[j][r] = right[r + 1] + left[j - r];
      double tmp = ndu[r][j - 1] / ndu[j][r];
      ndu[r][j] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    ndu[j][j] = saved;
  }

  std::vector<std::vector<double>> ders(3, std::vector<double>(p + 1, 0.0));
  for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];

  std::vector<std::vector<double>> a(2, std::vector<double>(p + 1, 0.0));
  for (int r = 0; r <= p; ++r) {
    int s1 = 0, s2 = 1;
    a[0][0] = 1.0;
    for (int k = 1; k <= nd; ++k) {
      double d = 0.0;
      int rk = r - k, pk = p - k;
      if (r >= k) {
        a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
        d = a[s2][0] * ndu[rk][pk];
      }
      int j1 = (rk >= -1) ? 1 : -rk;
      int j2 = (r - 1 <= pk) ? k - 1 : p - r;
      for (int j = j1; j <= j2; ++j) {
        a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
        d += a[s2][j] * ndu[rk + j][pk];
      }
      if (r <= pk) {
        a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
        d += a[s2][k] * ndu[r][pk];
      }
      ders[k][r] = d;
      std::swap(s1, s2);
    }
  }
  int fac = p;
  for (int k = 1; k <= nd; ++k) {
    for (int j = 0; j <= p; ++j) ders[k][j] *= fac;
    fac *= (p - k);
  }

  BasisEval out;
  out.first = span - p;
  out.values = std::move(ders[0]);
  if (max_deriv >= 1) out.d1 = std::move(ders[1]);
  if (max_deriv >= 2) out.d2 = std::move(ders[2]);
  return out;
}

QuadratureRule gauss_legendre(int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "quadrature needs at least one point");
  // Golub-Welsch: nodes are eigenvalues of the Jacobi matrix of the Legendre recurrence.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = k / std::sqrt(4.0 * k * k - 1.0);
    T(k, k - 1) = b;
    T(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
  QuadratureRule q;
  q.points.resize(n);
  q.weights.resize(n);
  for (int k = 0; k < n; ++k) {
    q.points[k] = es.eigenvalues()(k);
    double v = es.eigenvectors()(0, k);
    q.weights[k] = 2.0 * v * v;
  }
  // Polish nodes with a Newton step on P_n and recompute weights from P_n'.
  for (int k = 0; k < n; ++k) {
    double x = q.points[k];
    for (int it = 0; it < 3; ++it) {
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double dp = n * (x * p1 - p0) / (x * x - 1.0);
      x -= p1 / dp;
      if (it == 2) q.weights[k] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    q.points[k] = x;
  }
  return q;
}

Vec3 Patch3D::control_point(int a) const {
  auto ijk = cp_ijk(a);
  Vec3 xi(kv[0].greville(ijk[0]), kv[1].greville(ijk[1]), kv[2].greville(ijk[2]));
  return map(xi);
}

Patch3D make_box_patch(const Vec3& lo, const Vec3& hi, std::array<int, 3> n_el, std::array<int, 3> p) {
  Patch3D patch;
  for (int d = 0; d < 3; ++d) {
    if (!(hi[d] > lo[d])) throw Error(ErrorCode::InvalidArgument, "box extent must be positive");
    patch.kv[d] = open_knot_vector(p[d], n_el[d], 0.0, 1.0);
  }
  patch.origin = lo;
  patch.jac = (hi - lo).asDiagonal();
  return patch;
}

PatchEval eval_patch(const Patch3D& patch, const Vec3& xi, int max_deriv, const VecX* coeffs) {
  BasisEval b[3];
  for (int d = 0; d < 3; ++d) b[d] = eval_basis(patch.kv[d], xi[d], max_deriv);
  const Mat3 jinv_t = patch.jac.inverse().transpose();
  const Mat3 jinv = patch.jac.inverse();
  const int n0 = b[0].values.size(), n1 = b[1].values.size(), n2 = b[2].values.size();

  PatchEval out;
  const int n = n0 * n1 * n2;
  out.index.resize(n);
  out.values.resize(n);
  if (max_deriv >= 1) out.grads.resize(n);
  if (max_deriv >= 2) out.hessians.resize(n);

  int a = 0;
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      for (int k = 0; k < n2; ++k, ++a) {
        out.index[a] = patch.cp_index(b[0].first + i, b[1].first + j, b[2].first + k);
        const double v0 = b[0].values[i], v1 = b[1].values[j], v2 = b[2].values[k];
        out.values[a] = v0 * v1 * v2;
        if (max_deriv >= 1) {
          const double g0 = b[0].d1[i], g1 = b[1].d1[j], g2 = b[2].d1[k];
          Vec3 gxi(g0 * v1 * v2, v0 * g1 * v2, v0 * v1 * g2);
          out.grads[a] = jinv_t * gxi;
          if (max_deriv >= 2) {
            Mat3 h;
            h(0, 0) = b[0].d2[i] * v1 * v2;
            h(1, 1) = v0 * b[1].d2[j] * v2;
            h(2, 2) = v0 * v1 * b[2].d2[k];
            h(0, 1) = h(1, 0) = g0 * g1 * v2;
            h(0, 2) = h(2, 0) = g0 * v1 * g2;
            h(1, 2) = h(2, 1) = v0 * g1 * g2;
            out.hessians[a] = jinv_t * h * jinv;
          }
        }
      }

  if (coeffs) {
    out.x.setZero();
    for (int c = 0; c < n; ++c) out.x += out.values[c] * coeffs->segment<3>(3 * out.index[c]);
  } else {
    out.x = patch.map(xi);
  }
  return out;
}

Vec3 locate_point(const Patch3D& patch, const Vec3& x, double tol) {
  Vec3 xi = patch.jac.lu().solve(x - patch.origin);
  const Vec3 lo = patch.param_lo(), hi = patch.param_hi();
  for (int d = 0; d < 3; ++d) {
    const double slack = tol * (hi[d] - lo[d]);
    if (xi[d] < lo[d] - slack || xi[d] > hi[d] + slack)
      throw Error(ErrorCode::PointOutsidePatch, "point lies outside the patch");
    xi[d] = std::clamp(xi[d], lo[d], hi[d]);
  }
  return xi;
}

}  // namespace fibersolve
