#pragma once

#include <array>
#include <vector>

#include "fibersolve/types.hpp"

namespace fibersolve {

struct KnotVector {
  int degree = 0;
  std::vector<double> knots;

  int num_basis() const { return static_cast<int>(knots.size()) - degree - 1; }
  int num_spans() const;
  double front() const { return knots.front(); }
  double back() const { return knots.back(); }
  // Distinct breakpoints, including both ends.
  std::vector<double> breaks() const;
  // Greville abscissa of basis function a.
  double greville(int a) const;
};

// Nonzero basis functions at a parameter: global index of the first one plus
// values and derivatives with respect to the parameter.
struct BasisEval {
  int first = 0;
  std::vector<double> values;
  std::vector<double> d1;
  std::vector<double> d2;
};

struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

KnotVector open_knot_vector(int p, int n_el, double a, double b);

// Index s with knots[s] <= xi < knots[s+1]; the last nonempty span at the right end.
int find_span(const KnotVector& kv, double xi);

BasisEval eval_basis(const KnotVector& kv, double xi, int max_deriv);

// Gauss-Legendre rule with n points on [-1, 1].
QuadratureRule gauss_legendre(int n);

// Trivariate B-spline patch over an affine box x = origin + jac * xi.
struct Patch3D {
  std::array<KnotVector, 3> kv;
  Vec3 origin = Vec3::Zero();
  Mat3 jac = Mat3::Identity();

  std::array<int, 3> counts() const {
    return {kv[0].num_basis(), kv[1].num_basis(), kv[2].num_basis()};
  }
  int num_control_points() const {
    auto c = counts();
    return c[0] * c[1] * c[2];
  }
  int cp_index(int i, int j, int k) const {
    auto c = counts();
    return (i * c[1] + j) * c[2] + k;
  }
  std::array<int, 3> cp_ijk(int a) const {
    auto c = counts();
    return {a / (c[1] * c[2]), (a / c[2]) % c[1], a % c[2]};
  }
  // Reference control point position, which reproduces the affine map.
  Vec3 control_point(int a) const;
  Vec3 map(const Vec3& xi) const { return origin + jac * xi; }
  Vec3 param_lo() const { return {kv[0].front(), kv[1].front(), kv[2].front()}; }
  Vec3 param_hi() const { return {kv[0].back(), kv[1].back(), kv[2].back()}; }
};

// Box [lo, hi] discretized with n elements and degree p per direction, over the unit parameter box.
Patch3D make_box_patch(const Vec3& lo, const Vec3& hi, std::array<int, 3> n_el, std::array<int, 3> p);

struct PatchEval {
  Vec3 x = Vec3::Zero();
  std::vector<int> index;
  std::vector<double> values;
  std::vector<Vec3> grads;
  std::vector<Mat3> hessians;
};

// Basis data at xi. With coeffs (3 per control point, current positions) x is the
// mapped current position; without, the reference position.
PatchEval eval_patch(const Patch3D& patch, const Vec3& xi, int max_deriv = 2,
                     const VecX* coeffs = nullptr);

Vec3 locate_point(const Patch3D& patch, const Vec3& x, double tol = 1e-10);

}  // namespace fibersolve
