#pragma once

#include <array>
#include <vector>

#include "fibersolve/beam.hpp"
#include "fibersolve/bspline.hpp"
#include "fibersolve/case_config.hpp"

namespace fibersolve {

// Unknown blocks in solve order.
enum Block { PHI = 0, PHIT, FORCE, MOMENT, QUAT, MUN, NUM_BLOCKS };
const char* block_name(int b);

struct FiberDofs {
  int n_R = 0;    // centerline / quaternion coefficients
  int n_M = 0;    // resultant coefficients
  int n_bar = 0;  // mean-load test functions
  int n_tau = 0;  // torque test functions
  int n_N = 0;    // pressure/shear multiplier coefficients
  // Global offsets of this fiber's coefficients.
  int phit = 0, force = 0, moment = 0, quat = 0, mun = 0;
};

struct DofMap {
  int n_cp = 0;
  std::array<int, NUM_BLOCKS + 1> start{};  // block b occupies [start[b], start[b+1])
  std::vector<FiberDofs> fibers;
  std::vector<char> fixed;
  std::vector<int> free_index;  // -1 for constrained unknowns
  std::array<int, NUM_BLOCKS + 1> free_start{};

  int size() const { return start[NUM_BLOCKS]; }
  int num_free() const { return free_start[NUM_BLOCKS]; }
  int block_size(int b) const { return start[b + 1] - start[b]; }
  int block_of(int dof) const;
  void set_fixed(int dof) { fixed[dof] = 1; }
  void finalize();
};

// Test-function rows of one family evaluated at a point.
struct RowEval {
  std::vector<int> rows;
  std::vector<double> vals;
  std::vector<double> ders;
};

// Basis data cached at a beam quadrature or end point.
struct BeamPoint {
  double s = 0.0;
  double w = 0.0;  // quadrature weight including ds
  BasisEval R, M, N;
  RowEval bar, tau;
  PatchEval matrix;
};

struct FiberModel {
  FiberConfig cfg;
  Directors D;
  BeamSection section;
  double L = 0.0;
  Vec3 X0 = Vec3::Zero(), axis = Vec3::UnitX();
  KnotVector kvR, kvM, kvBar, kvTau, kvN;
  bool endpoint_rows = false;
  std::vector<BeamPoint> points;
  BeamPoint ends[2];
  std::vector<int> touched_cps;  // matrix control points seen by this fiber, sorted

  Vec3 reference_position(double s) const { return X0 + s * axis; }
  // Rows of the mean-load / torque families at s (endpoint rows excluded).
  RowEval interior_rows(const KnotVector& kv, double s) const;
};

// Builds the per-fiber discretization: knot vectors, cached bases, and block counts.
FiberModel build_fiber(const FiberConfig& cfg, const OrderLadder& orders, bool endpoint_rows, int quad_points,
                       const Patch3D& patch);

DofMap build_dof_map(const CaseConfig& cfg);

}  // namespace fibersolve
