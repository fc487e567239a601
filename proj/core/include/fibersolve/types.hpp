#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>
#include <string>

namespace fibersolve {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

// Fourth-order array A(i,J,k,L) stored as a 9x9 matrix with row 3i+J, column 3k+L.
using Tensor4 = Eigen::Matrix<double, 9, 9>;

// Third-order tensor T(i,J,K); T[K] is the (i,J) slice.
struct Tensor3 {
  Mat3 slice[3] = {Mat3::Zero(), Mat3::Zero(), Mat3::Zero()};
  double operator()(int i, int J, int K) const { return slice[K](i, J); }
  double& operator()(int i, int J, int K) { return slice[K](i, J); }
};

enum class ErrorCode {
  InvalidArgument,
  OutOfRange,
  PointOutsidePatch,
  NonPositiveJacobian,
  InconsistentOrders,
  FiberOutsidePatch,
  SingularJacobian,
  SingularMassBlock,
  NoConvergence,
  SingularLinearSystem,
  ParseError,
  ValidationError,
  IoError,
};

const char* error_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace fibersolve
