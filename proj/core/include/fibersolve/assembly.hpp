#pragma once

#include <Eigen/SparseCore>
#include <vector>

#include "fibersolve/dofmap.hpp"

namespace fibersolve {

using SpMat = Eigen::SparseMatrix<double>;
using SpMatR = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Triplet = Eigen::Triplet<double>;

// Residual and tangent over all unknowns. Matrix volume stiffness is kept in a
// fixed box-pattern CSR; every other entry (beam lines, endpoints, constraints)
// lives in a triplet list.
struct BlockSystem {
  VecX R;
  SpMatR Kvol;  // size() x size(), nonzero only in the matrix block
  std::vector<Triplet> triplets;
  bool has_tangent = false;

  SpMatR tangent() const;
};

// Linear system restricted to free unknowns, with block boundaries in free numbering.
struct ReducedSystem {
  VecX R;
  SpMatR K;
  std::array<int, NUM_BLOCKS + 1> start{};
  // Free-numbered ranges [begin, end) of each fiber inside the eliminated blocks.
  struct FiberRanges {
    int phit[2], force[2], moment[2];
  };
  std::vector<FiberRanges> fibers;
};

struct EnergySplit {
  double matrix = 0.0;
  double beams = 0.0;
  double total() const { return matrix + beams; }
};

class Model {
 public:
  explicit Model(const CaseConfig& cfg);

  const CaseConfig& config() const { return cfg_; }
  const Patch3D& patch() const { return patch_; }
  const DofMap& dofs() const { return map_; }
  const std::vector<FiberModel>& fibers() const { return fibers_; }

  VecX reference_state() const;
  // Writes prescribed values for load factor lambda into the constrained entries.
  void apply_boundary_values(VecX& x, double lambda) const;

  BlockSystem assemble(const VecX& x, double lambda, bool with_tangent = true) const;

  double matrix_energy(const VecX& x) const;
  EnergySplit energy(const VecX& x) const;
  Mat3 average_piola(const VecX& x) const;

  // Centerline fields of fiber f at arc length s.
  struct CenterlineSample {
    double s;
    Vec3 phi, n, m, mun;
    Vec4 q;
  };
  CenterlineSample sample(const VecX& x, int f, double s) const;

  // Pointwise constraint densities at every beam quadrature point of fiber f.
  struct PointConstraint {
    double s;
    Vec3 pos, tau, area;
  };
  std::vector<PointConstraint> constraint_report(const VecX& x, int f) const;

  // Deformed matrix position and gradient at a reference point.
  void matrix_point(const VecX& x, const Vec3& X, Vec3& phi, Mat3& F) const;

 private:
  void assemble_volume(const VecX& x, double lambda, BlockSystem& sys, bool with_tangent) const;
  void assemble_fiber(const VecX& x, double lambda, int f, BlockSystem& sys, bool with_tangent) const;
  void build_volume_pattern();
  double element_volume(int e0, int e1, int e2) const;

  template <class Fn>
  void for_each_volume_point(const VecX& x, Fn&& fn) const;

  CaseConfig cfg_;
  Patch3D patch_;
  DofMap map_;
  std::vector<FiberModel> fibers_;
  bool endpoint_rows_ = false;

  // One-dimensional basis tables per direction: [element][qp]
  std::array<std::vector<std::vector<BasisEval>>, 3> table_;
  std::array<std::vector<double>, 3> elen_;  // element lengths in parameter space
  QuadratureRule volume_rule_;
  std::vector<int> vol_rowptr_;
  std::vector<int> vol_cols_;
};

ReducedSystem apply_dirichlet(const BlockSystem& sys, const Model& model);

Mat3 average_piola(const Model& model, const VecX& x);

}  // namespace fibersolve
