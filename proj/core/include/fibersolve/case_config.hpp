#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "fibersolve/materials.hpp"

namespace fibersolve {

enum class UnityMode { Weak, Direct };
enum class EndpointMode { Auto, On, Off };
enum class CouplingMode { Full, PositionOnly };

// Polynomial orders of [phi, phi~, q, n, m, mu_bar, mu_tau, mu_n].
struct OrderLadder {
  std::array<int, 8> p = {4, 4, 4, 3, 3, 4, 4, 2};

  int matrix() const { return p[0]; }
  int centerline() const { return p[1]; }
  int quaternion() const { return p[2]; }
  int force() const { return p[3]; }
  int moment() const { return p[4]; }
  int mu_bar() const { return p[5]; }
  int mu_tau() const { return p[6]; }
  int mu_n() const { return p[7]; }
  std::string str() const;
  static OrderLadder parse(const std::string& text);
  bool operator==(const OrderLadder&) const = default;
};

struct NewtonConfig {
  double abs_tol = 1e-10;  // relative to the reference load scale
  double rel_tol = 1e-12;
  int max_iters = 25;
  int n_load_steps = 1;
  UnityMode unity_mode = UnityMode::Weak;
  EndpointMode endpoint_constraints = EndpointMode::Auto;
  bool operator==(const NewtonConfig&) const = default;
};

struct FiberConfig {
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3::UnitX();
  std::optional<Vec3> d1;  // first reference director; chosen automatically when absent
  double radius = 0.1;
  double E = 1.0;
  double nu = 0.0;
  int elements = 4;
  bool clamp_start = false;
  bool clamp_end = false;
  Vec3 n_ext_start = Vec3::Zero(), n_ext_end = Vec3::Zero();
  Vec3 m_ext_start = Vec3::Zero(), m_ext_end = Vec3::Zero();
  Vec3 line_force = Vec3::Zero(), line_moment = Vec3::Zero();

  double length() const { return (end - start).norm(); }
  bool operator==(const FiberConfig&) const = default;
};

// Parametric faces: 2*direction + side, e.g. 0 = x0, 5 = z1.
enum Face { X0 = 0, X1, Y0, Y1, Z0, Z1 };
const char* face_name(int face);

struct MatrixConfig {
  Vec3 origin = Vec3::Zero();
  Mat3 edges = Mat3::Identity();  // columns span the box
  std::array<int, 3> elements = {1, 1, 1};
  MaterialModel material = MaterialModel::svk(1.0, 0.0);
  Vec3 body_force = Vec3::Zero();

  std::vector<int> fixed_faces;
  std::vector<int> displaced_faces;
  Vec3 displacement = Vec3::Zero();
  std::vector<int> gradient_faces;
  Mat3 boundary_gradient = Mat3::Identity();  // phi = c + F (X - c), c the box center
  bool operator==(const MatrixConfig&) const = default;
};

struct SolverConfig {
  OrderLadder orders;
  NewtonConfig newton;
  CouplingMode coupling = CouplingMode::Full;
  bool area_constraint = true;
  int beam_quadrature = 0;  // points per beam span; 0 means p+1
  bool operator==(const SolverConfig&) const = default;
};

struct OutputConfig {
  std::string name = "case";
  std::string dir = ".";
  int centerline_samples = 101;
  bool vtk = false;
  std::array<int, 3> vtk_resolution = {8, 8, 8};
  bool operator==(const OutputConfig&) const = default;
};

struct CaseConfig {
  MatrixConfig matrix;
  std::vector<FiberConfig> fibers;
  SolverConfig solver;
  OutputConfig output;

  bool endpoint_rows() const;
  void validate() const;
  bool operator==(const CaseConfig&) const = default;
};

bool operator==(const MaterialModel& a, const MaterialModel& b);

CaseConfig parse_case(const std::string& text);
CaseConfig load_case(const std::string& path);
std::string serialize_case(const CaseConfig& cfg);

namespace presets {
CaseConfig bending();
CaseConfig torsion();
CaseConfig shear();
CaseConfig rve(bool full = false);
CaseConfig by_name(const std::string& name, bool full = false);
}  // namespace presets

// Applies a rigid rotation about the origin to geometry, directors, loads and boundary data.
CaseConfig rotate_case(const CaseConfig& cfg, const Mat3& Q);

}  // namespace fibersolve
