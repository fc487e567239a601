#pragma once

#include <vector>

#include "fibersolve/types.hpp"

namespace fibersolve {

// LU factorization with partial pivoting of a general banded matrix, stored
// column-wise with room for the pivoting fill (LAPACK gbtrf layout).
class BandedLU {
 public:
  BandedLU() = default;
  // Detects the bandwidths from the nonzeros of A. Throws SingularMassBlock.
  explicit BandedLU(const MatX& A);

  int size() const { return n_; }
  int lower() const { return kl_; }
  int upper() const { return ku_; }

  MatX solve(const MatX& B) const;
  VecX solve(const VecX& b) const;

 private:
  double& at(int i, int j) { return ab_[(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_]; }
  double at(int i, int j) const { return ab_[(kl_ + ku_ + i - j) + static_cast<size_t>(j) * ld_]; }
  void solve_in_place(double* b) const;

  int n_ = 0, kl_ = 0, ku_ = 0, ld_ = 1;
  std::vector<double> ab_;
  std::vector<int> piv_;
};

}  // namespace fibersolve
