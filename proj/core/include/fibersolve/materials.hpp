#pragma once

#include <string>

#include "fibersolve/types.hpp"

namespace fibersolve {

enum class MaterialKind { SVK, MooneyRivlinPolyconvex, MooneyRivlinInvariant };

struct MaterialModel {
  MaterialKind kind = MaterialKind::SVK;
  // SVK
  double E = 1.0;
  double nu = 0.0;
  // polyconvex Mooney-Rivlin
  double alpha = 0.0;
  double beta = 0.0;
  double lambda = 0.0;
  // invariant Mooney-Rivlin
  double c1 = 0.0;
  double c2 = 0.0;

  static MaterialModel svk(double E, double nu);
  static MaterialModel mooney_rivlin_polyconvex(double alpha, double beta, double lambda);
  static MaterialModel mooney_rivlin_invariant(double c1, double c2);

  double lame_lambda() const { return E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)); }
  double lame_mu() const { return E / (2.0 * (1.0 + nu)); }
  void validate() const;
};

const char* material_name(MaterialKind kind);
MaterialKind material_from_name(const std::string& name);

double energy(const MaterialModel& model, const Mat3& F);
Mat3 first_pk(const MaterialModel& model, const Mat3& F);
Tensor4 material_tangent(const MaterialModel& model, const Mat3& F);

// Stress and tangent in one pass.
void stress_and_tangent(const MaterialModel& model, const Mat3& F, Mat3& P, Tensor4& A);

}  // namespace fibersolve
