#include "fibersolve/case_config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "fibersolve/beam.hpp"
#include "fibersolve/bspline.hpp"

namespace fibersolve {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> tokens(const std::string& value) {
  std::string v = value;
  std::replace(v.begin(), v.end(), ',', ' ');
  std::istringstream in(v);
  std::vector<std::string> out;
  for (std::string t; in >> t;) out.push_back(t);
  return out;
}

struct ParseFail {
  std::string msg;
};

double to_double(const std::string& t) {
  try {
    size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size()) throw ParseFail{"invalid number '" + t + "'"};
    return v;
  } catch (const std::logic_error&) {
    throw ParseFail{"invalid number '" + t + "'"};
  }
}

int to_int(const std::string& t) {
  const double v = to_double(t);
  if (v != std::floor(v)) throw ParseFail{"expected an integer, got '" + t + "'"};
  return static_cast<int>(v);
}

std::vector<double> numbers(const std::string& value, size_t n) {
  auto t = tokens(value);
  if (t.size() != n) throw ParseFail{"expected " + std::to_string(n) + " numbers"};
  std::vector<double> out;
  for (auto& s : t) out.push_back(to_double(s));
  return out;
}

double scalar(const std::string& v) { return numbers(v, 1)[0]; }
int integer(const std::string& v) {
  auto t = tokens(v);
  if (t.size() != 1) throw ParseFail{"expected one integer"};
  return to_int(t[0]);
}
Vec3 vec3(const std::string& v) {
  auto n = numbers(v, 3);
  return {n[0], n[1], n[2]};
}
std::array<int, 3> int3(const std::string& v) {
  auto t = tokens(v);
  if (t.size() != 3) throw ParseFail{"expected three integers"};
  return {to_int(t[0]), to_int(t[1]), to_int(t[2])};
}
bool boolean(const std::string& v) {
  const std::string s = trim(v);
  if (s == "on" || s == "true" || s == "yes" || s == "1") return true;
  if (s == "off" || s == "false" || s == "no" || s == "0") return false;
  throw ParseFail{"expected on/off, got '" + s + "'"};
}

int face_from_name(const std::string& n) {
  static const char* names[] = {"x0", "x1", "y0", "y1", "z0", "z1"};
  for (int f = 0; f < 6; ++f)
    if (n == names[f]) return f;
  throw ParseFail{"unknown face '" + n + "'"};
}

std::vector<int> faces(const std::string& v) {
  std::vector<int> out;
  for (auto& t : tokens(v)) {
    if (t == "none") continue;
    if (t == "all") {
      for (int f = 0; f < 6; ++f) out.push_back(f);
      continue;
    }
    out.push_back(face_from_name(t));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
std::string fmt(const Vec3& v) { return fmt(v[0]) + " " + fmt(v[1]) + " " + fmt(v[2]); }
std::string fmt_faces(const std::vector<int>& f) {
  if (f.empty()) return "none";
  std::string s;
  for (int x : f) s += (s.empty() ? "" : " ") + std::string(face_name(x));
  return s;
}
const char* onoff(bool b) { return b ? "on" : "off"; }

using Handler = std::function<void(const std::string&)>;

}  // namespace

const char* face_name(int face) {
  static const char* names[] = {"x0", "x1", "y0", "y1", "z0", "z1"};
  return names[face];
}

bool operator==(const MaterialModel& a, const MaterialModel& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case MaterialKind::SVK: return a.E == b.E && a.nu == b.nu;
    case MaterialKind::MooneyRivlinPolyconvex: return a.alpha == b.alpha && a.beta == b.beta && a.lambda == b.lambda;
    case MaterialKind::MooneyRivlinInvariant: return a.c1 == b.c1 && a.c2 == b.c2;
  }
  return false;
}

std::string OrderLadder::str() const {
  std::string s;
  for (int i = 0; i < 8; ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s;
}

OrderLadder OrderLadder::parse(const std::string& text) {
  OrderLadder o;
  auto t = tokens(text);
  if (t.size() == 1 && t[0].size() == 8) {
    for (int i = 0; i < 8; ++i) {
      if (!std::isdigit(static_cast<unsigned char>(t[0][i]))) throw ParseFail{"invalid order ladder '" + text + "'"};
      o.p[i] = t[0][i] - '0';
    }
    return o;
  }
  if (t.size() != 8) throw ParseFail{"order ladder needs eight entries"};
  for (int i = 0; i < 8; ++i) o.p[i] = to_int(t[i]);
  return o;
}

bool CaseConfig::endpoint_rows() const {
  switch (solver.newton.endpoint_constraints) {
    case EndpointMode::On: return true;
    case EndpointMode::Off: return false;
    case EndpointMode::Auto: break;
  }
  return solver.orders.mu_bar() == solver.orders.centerline() - 2;
}

void CaseConfig::validate() const {
  matrix.material.validate();
  for (int d = 0; d < 3; ++d)
    if (matrix.elements[d] < 1) throw Error(ErrorCode::ValidationError, "matrix.elements must be positive");
  if (!(std::abs(matrix.edges.determinant()) > 0.0) || matrix.edges.determinant() < 0.0)
    throw Error(ErrorCode::ValidationError, "matrix edges must form a right-handed box");
  const auto& o = solver.orders;
  if (o.matrix() < 1) throw Error(ErrorCode::InconsistentOrders, "matrix order must be at least 1");
  if (!fibers.empty()) {
    const int p = o.centerline();
    if (o.matrix() < 2) throw Error(ErrorCode::InconsistentOrders, "fibers need a matrix order of at least 2");
    if (p < 2) throw Error(ErrorCode::InconsistentOrders, "centerline order must be at least 2");
    if (o.quaternion() != p) throw Error(ErrorCode::InconsistentOrders, "quaternion order must equal centerline order");
    if (o.force() != p - 1 || o.moment() != p - 1)
      throw Error(ErrorCode::InconsistentOrders, "resultant orders must be centerline order - 1");
    if (o.mu_n() != p - 2) throw Error(ErrorCode::InconsistentOrders, "mu_n order must be centerline order - 2");
    if (o.mu_bar() != o.mu_tau()) throw Error(ErrorCode::InconsistentOrders, "mu_bar and mu_tau orders must agree");
    const bool ep = endpoint_rows();
    if (ep && o.mu_bar() != p - 2)
      throw Error(ErrorCode::InconsistentOrders, "endpoint constraints need mu_bar order p - 2 for a square system");
    if (!ep && o.mu_bar() != p)
      throw Error(ErrorCode::InconsistentOrders, "without endpoint constraints mu_bar order must equal p");
  }
  if (solver.beam_quadrature < 0) throw Error(ErrorCode::ValidationError, "solver.beam_quadrature must be >= 0");
  const auto& n = solver.newton;
  if (!(n.abs_tol > 0) || !(n.rel_tol > 0)) throw Error(ErrorCode::ValidationError, "tolerances must be positive");
  if (n.max_iters < 1) throw Error(ErrorCode::ValidationError, "solver.max_iters must be >= 1");
  if (n.n_load_steps < 1) throw Error(ErrorCode::ValidationError, "solver.load_steps must be >= 1");
  if (output.centerline_samples < 2) throw Error(ErrorCode::ValidationError, "output.centerline_samples must be >= 2");

  const Mat3 inv = matrix.edges.inverse();
  for (size_t f = 0; f < fibers.size(); ++f) {
    const auto& fb = fibers[f];
    const std::string tag = "beam." + std::to_string(f + 1);
    if (!(fb.radius > 0)) throw Error(ErrorCode::ValidationError, tag + ".radius must be positive");
    if (!(fb.E > 0)) throw Error(ErrorCode::ValidationError, tag + ".E must be positive");
    if (!(fb.nu > -1.0 && fb.nu < 0.5)) throw Error(ErrorCode::ValidationError, tag + ".nu must lie in (-1, 0.5)");
    if (fb.elements < 1) throw Error(ErrorCode::ValidationError, tag + ".elements must be positive");
    if (!(fb.length() > 0)) throw Error(ErrorCode::ValidationError, tag + " has zero length");
    for (const Vec3& x : {fb.start, fb.end}) {
      const Vec3 xi = inv * (x - matrix.origin);
      for (int d = 0; d < 3; ++d)
        if (xi[d] < -1e-9 || xi[d] > 1.0 + 1e-9)
          throw Error(ErrorCode::ValidationError, "fiber outside matrix (" + tag + ")");
    }
    if (fb.d1 && (fb.d1->cross(fb.end - fb.start)).norm() < 1e-10 * fb.d1->norm() * fb.length())
      throw Error(ErrorCode::ValidationError, tag + ".d1 is parallel to the fiber axis");
  }
}

CaseConfig parse_case(const std::string& text) {
  CaseConfig cfg;
  std::map<int, FiberConfig> beams;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  int beam_id = -1;
  std::string material_kind = "svk";
  MaterialModel mat = MaterialModel::svk(1.0, 0.0);

  auto& m = cfg.matrix;
  auto& s = cfg.solver;
  auto& o = cfg.output;
  auto fb = [&]() -> FiberConfig& { return beams[beam_id]; };

  const std::map<std::string, std::map<std::string, Handler>> table = [&] {
    std::map<std::string, std::map<std::string, Handler>> t;
    t["matrix"] = {
        {"origin", [&](auto& v) { m.origin = vec3(v); }},
        {"size", [&](auto& v) { m.edges = vec3(v).asDiagonal(); }},
        {"edge1", [&](auto& v) { m.edges.col(0) = vec3(v); }},
        {"edge2", [&](auto& v) { m.edges.col(1) = vec3(v); }},
        {"edge3", [&](auto& v) { m.edges.col(2) = vec3(v); }},
        {"elements", [&](auto& v) { m.elements = int3(v); }},
        {"material", [&](auto& v) { material_kind = trim(v); }},
        {"E", [&](auto& v) { mat.E = scalar(v); }},
        {"nu", [&](auto& v) { mat.nu = scalar(v); }},
        {"alpha", [&](auto& v) { mat.alpha = scalar(v); }},
        {"beta", [&](auto& v) { mat.beta = scalar(v); }},
        {"lambda", [&](auto& v) { mat.lambda = scalar(v); }},
        {"c1", [&](auto& v) { mat.c1 = scalar(v); }},
        {"c2", [&](auto& v) { mat.c2 = scalar(v); }},
        {"body_force", [&](auto& v) { m.body_force = vec3(v); }},
        {"fixed_faces", [&](auto& v) { m.fixed_faces = faces(v); }},
        {"displaced_faces", [&](auto& v) { m.displaced_faces = faces(v); }},
        {"displacement", [&](auto& v) { m.displacement = vec3(v); }},
        {"gradient_faces", [&](auto& v) { m.gradient_faces = faces(v); }},
        {"deformation_gradient",
         [&](auto& v) {
           auto n = numbers(v, 9);
           for (int i = 0; i < 9; ++i) m.boundary_gradient(i / 3, i % 3) = n[i];
         }},
    };
    t["beam"] = {
        {"start", [&](auto& v) { fb().start = vec3(v); }},
        {"end", [&](auto& v) { fb().end = vec3(v); }},
        {"d1", [&](auto& v) { fb().d1 = vec3(v); }},
        {"radius", [&](auto& v) { fb().radius = scalar(v); }},
        {"E", [&](auto& v) { fb().E = scalar(v); }},
        {"nu", [&](auto& v) { fb().nu = scalar(v); }},
        {"elements", [&](auto& v) { fb().elements = integer(v); }},
        {"clamp_start", [&](auto& v) { fb().clamp_start = boolean(v); }},
        {"clamp_end", [&](auto& v) { fb().clamp_end = boolean(v); }},
        {"n_ext_start", [&](auto& v) { fb().n_ext_start = vec3(v); }},
        {"n_ext_end", [&](auto& v) { fb().n_ext_end = vec3(v); }},
        {"m_ext_start", [&](auto& v) { fb().m_ext_start = vec3(v); }},
        {"m_ext_end", [&](auto& v) { fb().m_ext_end = vec3(v); }},
        {"line_force", [&](auto& v) { fb().line_force = vec3(v); }},
        {"line_moment", [&](auto& v) { fb().line_moment = vec3(v); }},
    };
    t["solver"] = {
        {"orders", [&](auto& v) { s.orders = OrderLadder::parse(v); }},
        {"unity",
         [&](auto& v) {
           const auto x = trim(v);
           if (x == "weak") s.newton.unity_mode = UnityMode::Weak;
           else if (x == "direct") s.newton.unity_mode = UnityMode::Direct;
           else throw ParseFail{"unity must be weak or direct"};
         }},
        {"endpoint_constraints",
         [&](auto& v) {
           const auto x = trim(v);
           if (x == "auto") s.newton.endpoint_constraints = EndpointMode::Auto;
           else s.newton.endpoint_constraints = boolean(x) ? EndpointMode::On : EndpointMode::Off;
         }},
        {"load_steps", [&](auto& v) { s.newton.n_load_steps = integer(v); }},
        {"max_iters", [&](auto& v) { s.newton.max_iters = integer(v); }},
        {"abs_tol", [&](auto& v) { s.newton.abs_tol = scalar(v); }},
        {"rel_tol", [&](auto& v) { s.newton.rel_tol = scalar(v); }},
        {"coupling",
         [&](auto& v) {
           const auto x = trim(v);
           if (x == "full") s.coupling = CouplingMode::Full;
           else if (x == "position") s.coupling = CouplingMode::PositionOnly;
           else throw ParseFail{"coupling must be full or position"};
         }},
        {"area_constraint", [&](auto& v) { s.area_constraint = boolean(v); }},
        {"beam_quadrature", [&](auto& v) { s.beam_quadrature = integer(v); }},
    };
    t["output"] = {
        {"name", [&](auto& v) { o.name = trim(v); }},
        {"dir", [&](auto& v) { o.dir = trim(v); }},
        {"centerline_samples", [&](auto& v) { o.centerline_samples = integer(v); }},
        {"vtk", [&](auto& v) { o.vtk = boolean(v); }},
        {"vtk_resolution", [&](auto& v) { o.vtk_resolution = int3(v); }},
    };
    return t;
  }();

  auto fail = [&](const std::string& msg) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": " + msg);
  };

  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("unterminated section header");
      std::string name = trim(line.substr(1, line.size() - 2));
      if (name.rfind("beam.", 0) == 0) {
        try {
          beam_id = to_int(name.substr(5));
        } catch (const ParseFail&) {
          fail("invalid beam section '" + name + "'");
        }
        if (beam_id < 1) fail("beam sections are numbered from 1");
        beams[beam_id];
        section = "beam";
      } else if (table.count(name)) {
        section = name;
      } else {
        fail("unknown section [" + name + "]");
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail("key '" + key + "' outside of a section");
    const auto& handlers = table.at(section);
    auto it = handlers.find(key);
    if (it == handlers.end()) fail("unknown key '" + key + "' in [" + (section == "beam" ? "beam.N" : section) + "]");
    if (value.empty()) fail("missing value for '" + key + "'");
    try {
      it->second(value);
    } catch (const ParseFail& e) {
      fail(key + ": " + e.msg);
    }
  }

  try {
    mat.kind = material_from_name(material_kind);
  } catch (const Error& e) {
    throw Error(ErrorCode::ValidationError, "matrix.material: " + std::string(e.what()));
  }
  m.material = mat;
  for (auto& [id, fbc] : beams) cfg.fibers.push_back(fbc);
  cfg.validate();
  return cfg;
}

CaseConfig load_case(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_case(ss.str());
}

std::string serialize_case(const CaseConfig& cfg) {
  std::ostringstream out;
  const auto& m = cfg.matrix;
  out << "[matrix]\n";
  out << "origin = " << fmt(m.origin) << "\n";
  for (int c = 0; c < 3; ++c) out << "edge" << c + 1 << " = " << fmt(Vec3(m.edges.col(c))) << "\n";
  out << "elements = " << m.elements[0] << " " << m.elements[1] << " " << m.elements[2] << "\n";
  out << "material = " << material_name(m.material.kind) << "\n";
  switch (m.material.kind) {
    case MaterialKind::SVK: out << "E = " << fmt(m.material.E) << "\nnu = " << fmt(m.material.nu) << "\n"; break;
    case MaterialKind::MooneyRivlinPolyconvex:
      out << "alpha = " << fmt(m.material.alpha) << "\nbeta = " << fmt(m.material.beta)
          << "\nlambda = " << fmt(m.material.lambda) << "\n";
      break;
    case MaterialKind::MooneyRivlinInvariant:
      out << "c1 = " << fmt(m.material.c1) << "\nc2 = " << fmt(m.material.c2) << "\n";
      break;
  }
  out << "body_force = " << fmt(m.body_force) << "\n";
  out << "fixed_faces = " << fmt_faces(m.fixed_faces) << "\n";
  out << "displaced_faces = " << fmt_faces(m.displaced_faces) << "\n";
  out << "displacement = " << fmt(m.displacement) << "\n";
  out << "gradient_faces = " << fmt_faces(m.gradient_faces) << "\n";
  out << "deformation_gradient =";
  for (int i = 0; i < 9; ++i) out << " " << fmt(m.boundary_gradient(i / 3, i % 3));
  out << "\n";

  for (size_t f = 0; f < cfg.fibers.size(); ++f) {
    const auto& b = cfg.fibers[f];
    out << "\n[beam." << f + 1 << "]\n";
    out << "start = " << fmt(b.start) << "\nend = " << fmt(b.end) << "\n";
    if (b.d1) out << "d1 = " << fmt(*b.d1) << "\n";
    out << "radius = " << fmt(b.radius) << "\nE = " << fmt(b.E) << "\nnu = " << fmt(b.nu) << "\n";
    out << "elements = " << b.elements << "\n";
    out << "clamp_start = " << onoff(b.clamp_start) << "\nclamp_end = " << onoff(b.clamp_end) << "\n";
    out << "n_ext_start = " << fmt(b.n_ext_start) << "\nn_ext_end = " << fmt(b.n_ext_end) << "\n";
    out << "m_ext_start = " << fmt(b.m_ext_start) << "\nm_ext_end = " << fmt(b.m_ext_end) << "\n";
    out << "line_force = " << fmt(b.line_force) << "\nline_moment = " << fmt(b.line_moment) << "\n";
  }

  const auto& s = cfg.solver;
  out << "\n[solver]\n";
  out << "orders = " << s.orders.str() << "\n";
  out << "unity = " << (s.newton.unity_mode == UnityMode::Weak ? "weak" : "direct") << "\n";
  out << "endpoint_constraints = "
      << (s.newton.endpoint_constraints == EndpointMode::Auto ? "auto"
                                                              : onoff(s.newton.endpoint_constraints == EndpointMode::On))
      << "\n";
  out << "load_steps = " << s.newton.n_load_steps << "\nmax_iters = " << s.newton.max_iters << "\n";
  out << "abs_tol = " << fmt(s.newton.abs_tol) << "\nrel_tol = " << fmt(s.newton.rel_tol) << "\n";
  out << "coupling = " << (s.coupling == CouplingMode::Full ? "full" : "position") << "\n";
  out << "area_constraint = " << onoff(s.area_constraint) << "\n";
  out << "beam_quadrature = " << s.beam_quadrature << "\n";

  const auto& o = cfg.output;
  out << "\n[output]\n";
  out << "name = " << o.name << "\ndir = " << o.dir << "\n";
  out << "centerline_samples = " << o.centerline_samples << "\n";
  out << "vtk = " << onoff(o.vtk) << "\n";
  out << "vtk_resolution = " << o.vtk_resolution[0] << " " << o.vtk_resolution[1] << " " << o.vtk_resolution[2]
      << "\n";
  return out.str();
}

namespace presets {

namespace {
CaseConfig beam_in_block() {
  CaseConfig c;
  c.matrix.origin = Vec3::Zero();
  c.matrix.edges = Vec3(5.0, 1.0, 1.0).asDiagonal();
  c.matrix.elements = {20, 4, 4};
  c.matrix.material = MaterialModel::svk(10.0, 0.0);
  FiberConfig f;
  f.start = Vec3(0.0, 0.5, 0.5);
  f.end = Vec3(5.0, 0.5, 0.5);
  f.radius = 0.125;
  f.E = 4346.0;
  f.nu = 0.0;
  f.elements = 20;
  c.fibers.push_back(f);
  c.solver.orders = OrderLadder::parse("44433222");
  return c;
}
}  // namespace

CaseConfig bending() {
  CaseConfig c = beam_in_block();
  c.output.name = "bending";
  c.matrix.fixed_faces = {X0};
  c.fibers[0].clamp_start = true;
  c.fibers[0].m_ext_end = Vec3(0.0, 0.0, 0.025);
  return c;
}

CaseConfig torsion() {
  CaseConfig c = beam_in_block();
  c.output.name = "torsion";
  c.matrix.material = MaterialModel::mooney_rivlin_invariant(2.0, 1.0);
  c.matrix.fixed_faces = {X0};
  c.fibers[0].clamp_start = true;
  c.fibers[0].m_ext_end = Vec3(0.9, 0.0, 0.0);
  c.solver.newton.n_load_steps = 6;
  return c;
}

CaseConfig shear() {
  CaseConfig c = beam_in_block();
  c.output.name = "shear";
  c.matrix.fixed_faces = {Z0};
  c.matrix.displaced_faces = {Z1};
  c.matrix.displacement = Vec3(0.0, 0.1, 0.0);
  return c;
}

CaseConfig rve(bool full) {
  CaseConfig c;
  c.output.name = full ? "rve_full" : "rve";
  c.matrix.origin = Vec3::Zero();
  c.matrix.edges = 20.0 * Mat3::Identity();
  const int n = full ? 20 : 6;
  c.matrix.elements = {n, n, n};
  c.matrix.material = MaterialModel::svk(50000.0, 0.2);
  c.matrix.gradient_faces = {X0, X1, Y0, Y1, Z0, Z1};
  c.matrix.boundary_gradient << 0.999994, 0.000100, -0.000008, -0.000040, 1.000002, -0.000020, -0.000004, 0.000040,
      0.999994;
  c.solver.orders = OrderLadder::parse("44433222");

  auto add = [&](const Vec3& center, const Vec3& dir, int spans) {
    FiberConfig f;
    const Vec3 a = dir.normalized();
    f.start = center - 7.0 * a;
    f.end = center + 7.0 * a;
    f.radius = 0.1;
    f.E = 200000.0;
    f.nu = 0.3;
    f.elements = spans;
    c.fibers.push_back(f);
  };
  if (!full) {
    add(Vec3(7, 7, 10), Vec3(1.0, 0.3, 0.2), 5);
    add(Vec3(13, 10, 7), Vec3(-0.2, 1.0, 0.4), 5);
    add(Vec3(10, 13, 13), Vec3(0.3, -0.4, 1.0), 5);
    return c;
  }
  // Isotropic orientation sample with a fixed seed; centers keep both ends inside the cube.
  std::mt19937 rng(20240517u);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  while (c.fibers.size() < 21) {
    Vec3 dir(gauss(rng), gauss(rng), gauss(rng));
    dir.normalize();
    const Vec3 half = 7.0 * dir;
    Vec3 center;
    bool ok = true;
    for (int d = 0; d < 3; ++d) {
      const double lo = 0.5 + std::abs(half[d]), hi = 19.5 - std::abs(half[d]);
      if (hi <= lo) {
        ok = false;
        break;
      }
      center[d] = lo + (hi - lo) * uni(rng);
    }
    if (ok) add(center, dir, 14);
  }
  return c;
}

CaseConfig by_name(const std::string& name, bool full) {
  if (name == "bending") return bending();
  if (name == "torsion") return torsion();
  if (name == "shear") return shear();
  if (name == "rve") return rve(full);
  throw Error(ErrorCode::ValidationError, "unknown preset '" + name + "'");
}

}  // namespace presets

CaseConfig rotate_case(const CaseConfig& cfg, const Mat3& Q) {
  CaseConfig c = cfg;
  c.matrix.origin = Q * cfg.matrix.origin;
  c.matrix.edges = Q * cfg.matrix.edges;
  c.matrix.body_force = Q * cfg.matrix.body_force;
  c.matrix.displacement = Q * cfg.matrix.displacement;
  c.matrix.boundary_gradient = Q * cfg.matrix.boundary_gradient * Q.transpose();
  for (size_t f = 0; f < cfg.fibers.size(); ++f) {
    const auto& a = cfg.fibers[f];
    auto& b = c.fibers[f];
    const Directors D = a.d1 ? Directors::from_axis(a.end - a.start, *a.d1) : Directors::from_axis(a.end - a.start);
    b.start = Q * a.start;
    b.end = Q * a.end;
    b.d1 = Q * D.D[0];
    b.n_ext_start = Q * a.n_ext_start;
    b.n_ext_end = Q * a.n_ext_end;
    b.m_ext_start = Q * a.m_ext_start;
    b.m_ext_end = Q * a.m_ext_end;
    b.line_force = Q * a.line_force;
    b.line_moment = Q * a.line_moment;
  }
  return c;
}

}  // namespace fibersolve
