#include "fibersolve/banded.hpp"

#include <algorithm>
#include <cmath>

namespace fibersolve {

BandedLU::BandedLU(const MatX& A) : n_(static_cast<int>(A.rows())) {
  if (A.rows() != A.cols()) throw Error(ErrorCode::InvalidArgument, "banded LU needs a square matrix");
  double scale = 0.0;
  for (int j = 0; j < n_; ++j)
    for (int i = 0; i < n_; ++i)
      if (A(i, j) != 0.0) {
        kl_ = std::max(kl_, i - j);
        ku_ = std::max(ku_, j - i);
        scale = std::max(scale, std::abs(A(i, j)));
      }
  ld_ = 2 * kl_ + ku_ + 1;
  ab_.assign(static_cast<size_t>(ld_) * n_, 0.0);
  piv_.resize(n_);
  for (int j = 0; j < n_; ++j)
    for (int i = std::max(0, j - ku_); i <= std::min(n_ - 1, j + kl_); ++i) at(i, j) = A(i, j);

  const double tiny = 1e-14 * scale;
  int ju = 0;
  for (int j = 0; j < n_; ++j) {
    const int km = std::min(kl_, n_ - 1 - j);
    int p = j;
    for (int i = j + 1; i <= j + km; ++i)
      if (std::abs(at(i, j)) > std::abs(at(p, j))) p = i;
    piv_[j] = p;
    if (!(std::abs(at(p, j)) > tiny)) throw Error(ErrorCode::SingularMassBlock, "zero pivot in mass block");
    ju = std::max(ju, std::min(p + ku_, n_ - 1));
    if (p != j)
      for (int c = j; c <= ju; ++c) std::swap(at(p, c), at(j, c));
    const double inv = 1.0 / at(j, j);
    for (int i = j + 1; i <= j + km; ++i) at(i, j) *= inv;
    for (int c = j + 1; c <= ju; ++c) {
      const double u = at(j, c);
      if (u == 0.0) continue;
      for (int i = j + 1; i <= j + km; ++i) at(i, c) -= at(i, j) * u;
    }
  }
}

void BandedLU::solve_in_place(double* b) const {
  for (int j = 0; j < n_; ++j) {
    const int km = std::min(kl_, n_ - 1 - j);
    if (piv_[j] != j) std::swap(b[j], b[piv_[j]]);
    for (int i = j + 1; i <= j + km; ++i) b[i] -= at(i, j) * b[j];
  }
  for (int j = n_ - 1; j >= 0; --j) {
    b[j] /= at(j, j);
    for (int i = std::max(0, j - kl_ - ku_); i < j; ++i) b[i] -= at(i, j) * b[j];
  }
}

MatX BandedLU::solve(const MatX& B) const {
  MatX X = B;
  for (int c = 0; c < X.cols(); ++c) solve_in_place(X.col(c).data());
  return X;
}

VecX BandedLU::solve(const VecX& b) const {
  VecX x = b;
  solve_in_place(x.data());
  return x;
}

}  // namespace fibersolve
