#include "fibersolve/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fibersolve {

namespace {

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  if (!out) throw Error(ErrorCode::IoError, "write failed: " + path);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

double von_mises(const MaterialModel& mat, const Mat3& F) {
  const Mat3 s = first_pk(mat, F) * F.transpose() / F.determinant();
  const Mat3 dev = s - s.trace() / 3.0 * Mat3::Identity();
  return std::sqrt(1.5 * dev.squaredNorm());
}

}  // namespace

std::string centerline_csv(const Model& model, const VecX& x, int fiber, int samples) {
  if (samples < 2) throw Error(ErrorCode::InvalidArgument, "centerline needs at least two stations");
  const double L = model.fibers().at(fiber).L;
  std::string out = "s,phix,phiy,phiz,n1,n2,n3,m1,m2,m3,mun1,mun2,mun3\n";
  for (int i = 0; i < samples; ++i) {
    const double s = i == samples - 1 ? L : L * i / (samples - 1);
    const auto c = model.sample(x, fiber, s);
    out += fmt(s);
    for (const Vec3* v : {&c.phi, &c.n, &c.m, &c.mun})
      for (int k = 0; k < 3; ++k) out += "," + fmt((*v)(k));
    out += "\n";
  }
  return out;
}

void export_centerline(const Model& model, const VecX& x, int fiber, int samples, const std::string& path) {
  write_file(path, centerline_csv(model, x, fiber, samples));
}

void export_vtk(const Model& model, const VecX& x, const std::array<int, 3>& res, const std::string& path) {
  const Patch3D& patch = model.patch();
  const MaterialModel& mat = model.config().matrix.material;
  const int n0 = res[0] + 1, n1 = res[1] + 1, n2 = res[2] + 1;
  std::ostringstream pts, disp, vm;
  for (int k = 0; k < n2; ++k)
    for (int j = 0; j < n1; ++j)
      for (int i = 0; i < n0; ++i) {
        const Vec3 xi(double(i) / res[0], double(j) / res[1], double(k) / res[2]);
        const Vec3 X = patch.map(xi);
        Vec3 phi;
        Mat3 F;
        model.matrix_point(x, X, phi, F);
        pts << fmt(X(0)) << ' ' << fmt(X(1)) << ' ' << fmt(X(2)) << '\n';
        const Vec3 u = phi - X;
        disp << fmt(u(0)) << ' ' << fmt(u(1)) << ' ' << fmt(u(2)) << '\n';
        vm << fmt(von_mises(mat, F)) << '\n';
      }
  const int npts = n0 * n1 * n2, ncells = res[0] * res[1] * res[2];
  auto id = [&](int i, int j, int k) { return (k * n1 + j) * n0 + i; };
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\nfibersolve matrix field\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << npts << " double\n" << pts.str();
  out << "CELLS " << ncells << ' ' << 9 * ncells << '\n';
  for (int k = 0; k < res[2]; ++k)
    for (int j = 0; j < res[1]; ++j)
      for (int i = 0; i < res[0]; ++i)
        out << "8 " << id(i, j, k) << ' ' << id(i + 1, j, k) << ' ' << id(i + 1, j + 1, k) << ' '
            << id(i, j + 1, k) << ' ' << id(i, j, k + 1) << ' ' << id(i + 1, j, k + 1) << ' '
            << id(i + 1, j + 1, k + 1) << ' ' << id(i, j + 1, k + 1) << '\n';
  out << "CELL_TYPES " << ncells << '\n';
  for (int c = 0; c < ncells; ++c) out << "12\n";
  out << "POINT_DATA " << npts << "\nVECTORS displacement double\n" << disp.str();
  out << "SCALARS von_mises double 1\nLOOKUP_TABLE default\n" << vm.str();
  write_file(path, out.str());
}

std::string summary_text(const CaseConfig& cfg, const RunResult& res) {
  const auto& r = res.report;
  std::ostringstream out;
  out << "name = " << cfg.output.name << '\n';
  out << "converged = " << (r.converged ? "true" : "false") << '\n';
  if (!r.message.empty()) out << "message = " << r.message << '\n';
  out << "load_steps = " << r.iterations.size() << '\n';
  out << "iterations =";
  for (int it : r.iterations) out << ' ' << it;
  out << '\n';
  if (!r.residuals.empty()) {
    out << "residuals_last_step =";
    for (double v : r.residuals.back()) out << ' ' << fmt(v);
    out << '\n';
  }
  out << "tip_displacement = " << fmt(r.tip_displacement(0)) << ", " << fmt(r.tip_displacement(1)) << ", "
      << fmt(r.tip_displacement(2)) << '\n';
  out << "tip_magnitude = " << fmt(r.tip_magnitude) << '\n';
  out << "energy_matrix = " << fmt(res.energy.matrix) << '\n';
  out << "energy_beams = " << fmt(res.energy.beams) << '\n';
  out << "average_piola =";
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) out << ' ' << fmt(res.average_piola(i, j));
  out << '\n';
  return out.str();
}

RunResult run_case(const CaseConfig& cfg, bool write_outputs) {
  const Model model(cfg);
  RunResult res;
  res.state = model.reference_state();
  res.report = load_stepper(model, res.state);
  res.energy = model.energy(res.state);
  res.average_piola = model.average_piola(res.state);
  if (!write_outputs) return res;

  std::error_code ec;
  std::filesystem::create_directories(cfg.output.dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + cfg.output.dir);
  const std::filesystem::path dir(cfg.output.dir);
  const int nf = static_cast<int>(model.fibers().size());
  for (int f = 0; f < nf; ++f) {
    const std::string file =
        nf == 1 ? cfg.output.name + "_centerline.csv" : cfg.output.name + "_centerline_" + std::to_string(f) + ".csv";
    const std::string path = (dir / file).string();
    export_centerline(model, res.state, f, cfg.output.centerline_samples, path);
    res.files.push_back(path);
  }
  if (cfg.output.vtk) {
    const std::string path = (dir / (cfg.output.name + ".vtk")).string();
    export_vtk(model, res.state, cfg.output.vtk_resolution, path);
    res.files.push_back(path);
  }
  const std::string path = (dir / (cfg.output.name + "_summary.txt")).string();
  write_file(path, summary_text(cfg, res));
  res.files.push_back(path);
  return res;
}

}  // namespace fibersolve
