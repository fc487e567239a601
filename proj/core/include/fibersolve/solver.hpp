#pragma once

#include <string>
#include <vector>

#include "fibersolve/assembly.hpp"
#include "fibersolve/banded.hpp"

namespace fibersolve {

// Sparse direct LU solve of K x = b. Throws SingularLinearSystem.
VecX solve_sparse(const SpMatR& K, const VecX& b);

// Static condensation of the centerline, force and moment blocks of every fiber.
// The reduced unknowns are the free matrix, quaternion and multiplier
// coefficients, in free numbering with the eliminated blocks removed.
class BlockReduction {
 public:
  explicit BlockReduction(const ReducedSystem& sys);

  const SpMatR& matrix() const { return K_; }
  const VecX& rhs() const { return b_; }
  // Recovers the full free-numbered update from the reduced solution.
  VecX expand(const VecX& y) const;

 private:
  struct FiberPart {
    std::vector<int> cphi;   // free columns of the matrix block in Mp^-1 Kpf
    std::vector<int> cquat;  // free columns of the quaternion block
    int p0 = 0, np = 0, n0 = 0, nn = 0, m0 = 0, nm = 0;
    BandedLU Mp, Mn, Mm;
    MatX Kpf, Knp, Knq, Kmq;
    VecX bp, bn, bm;
  };
  int to_reduced(int free) const { return free < e0_ ? free : free - (e1_ - e0_); }

  int n_free_ = 0, e0_ = 0, e1_ = 0;
  std::vector<FiberPart> parts_;
  SpMatR K_;
  VecX b_;
};

// Newton update solving K d = -R, with or without condensation.
VecX newton_update(ReducedSystem sys, bool condense);

// Norm over free unknowns, each block scaled by its dimension.
double residual_norm(const Model& model, const VecX& R);

// Residual norm of the reference state under the full load; unit if that vanishes.
double reference_load_scale(const Model& model);

struct StepResult {
  bool converged = false;
  int iterations = 0;  // residual evaluations
  std::vector<double> residuals;
};

// Newton iterations at fixed load factor, starting from x.
StepResult newton_solve(const Model& model, VecX& x, double lambda, double load_scale);

struct SolveReport {
  bool converged = false;
  double load_scale = 1.0;
  std::vector<int> iterations;                  // per load step
  std::vector<std::vector<double>> residuals;   // per load step
  int failed_step = -1;
  std::string message;
  Vec3 tip_displacement = Vec3::Zero();  // end of the first fiber
  double tip_magnitude = 0.0;
};

// Linear load stepping; each step warm-starts from the previous converged state.
SolveReport load_stepper(const Model& model, VecX& x, std::vector<VecX>* states = nullptr);

Vec3 tip_displacement(const Model& model, const VecX& x, int fiber = 0);

}  // namespace fibersolve
