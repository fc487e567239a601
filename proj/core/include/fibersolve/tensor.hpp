#pragma once

#include "fibersolve/types.hpp"

namespace fibersolve {

template <class T> using M3 = Eigen::Matrix<T, 3, 3>;
template <class T> using V3 = Eigen::Matrix<T, 3, 1>;

// [A x B]_iJ = eps_imn eps_JPQ A_mP B_nQ
template <class T>
M3<T> tensor_cross(const M3<T>& A, const M3<T>& B) {
  M3<T> C;
  for (int i = 0; i < 3; ++i) {
    const int i1 = (i + 1) % 3, i2 = (i + 2) % 3;
    for (int J = 0; J < 3; ++J) {
      const int J1 = (J + 1) % 3, J2 = (J + 2) % 3;
      C(i, J) = A(i1, J1) * B(i2, J2) - A(i1, J2) * B(i2, J1) - A(i2, J1) * B(i1, J2) +
                A(i2, J2) * B(i1, J1);
    }
  }
  return C;
}

template <class T>
M3<T> cofactor(const M3<T>& F) {
  return T(0.5) * tensor_cross<T>(F, F);
}

template <class T>
T det_from_cofactor(const M3<T>& H, const M3<T>& F) {
  return (H.cwiseProduct(F)).sum() / T(3);
}

template <class T>
V3<T> axl(const M3<T>& A) {
  return V3<T>(T(0.5) * (A(2, 1) - A(1, 2)), T(0.5) * (A(0, 2) - A(2, 0)), T(0.5) * (A(1, 0) - A(0, 1)));
}

template <class T>
M3<T> spin(const V3<T>& a) {
  M3<T> S;
  S << T(0), -a(2), a(1), a(2), T(0), -a(0), -a(1), a(0), T(0);
  return S;
}

// Non-template conveniences on doubles.
inline Mat3 tensor_cross(const Mat3& A, const Mat3& B) { return tensor_cross<double>(A, B); }
inline Vec3 axl(const Mat3& A) { return axl<double>(A); }
inline Mat3 spin(const Vec3& a) { return spin<double>(a); }

struct CofactorDet {
  Mat3 H;
  double J;
};

inline CofactorDet cofactor_det(const Mat3& F) {
  Mat3 H = cofactor<double>(F);
  return {H, det_from_cofactor<double>(H, F)};
}

// Linear map B -> A x B as a 9x9 matrix acting on row-major flattened B.
Tensor4 cross_operator(const Mat3& A);

}  // namespace fibersolve
