#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fibersolve/runner.hpp"

using namespace fibersolve;

namespace {

CaseConfig coarse_bending(const std::string& dir) {
  CaseConfig c = presets::bending();
  c.matrix.elements = {5, 1, 1};
  c.fibers[0].elements = 5;
  c.output.dir = dir;
  c.output.name = "case";
  return c;
}

std::string read(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmpdir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("fibersolve_test_" + name);
  std::filesystem::remove_all(p);
  return p.string();
}

}  // namespace

TEST(Centerline, HeaderRowsAndUnloadedZeros) {
  CaseConfig c = coarse_bending(tmpdir("unloaded"));
  c.fibers[0].m_ext_end.setZero();
  const Model m(c);
  const std::string csv = centerline_csv(m, m.reference_state(), 0, 101);
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "s,phix,phiy,phiz,n1,n2,n3,m1,m2,m3,mun1,mun2,mun3");
  int rows = 0;
  double last_s = -1;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<double> v;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 13u);
    EXPECT_GT(v[0], last_s);
    last_s = v[0];
    for (int k = 4; k < 13; ++k) EXPECT_EQ(v[k], 0.0);
  }
  EXPECT_EQ(rows, 101);
  EXPECT_DOUBLE_EQ(last_s, 5.0);
}

TEST(RunCase, WritesOutputsDeterministically) {
  const std::string dir = tmpdir("det");
  CaseConfig c = coarse_bending(dir);
  c.output.vtk = true;
  c.output.vtk_resolution = {4, 2, 2};
  const RunResult a = run_case(c);
  ASSERT_TRUE(a.report.converged);
  const std::string csv1 = read(dir + "/case_centerline.csv");
  const std::string vtk1 = read(dir + "/case.vtk");
  ASSERT_FALSE(csv1.empty());
  ASSERT_FALSE(vtk1.empty());
  const RunResult b = run_case(c);
  EXPECT_EQ(read(dir + "/case_centerline.csv"), csv1);
  EXPECT_EQ(read(dir + "/case.vtk"), vtk1);
  EXPECT_NE(vtk1.find("SCALARS von_mises"), std::string::npos);
  EXPECT_NE(read(dir + "/case_summary.txt").find("converged = true"), std::string::npos);
  EXPECT_GT(a.report.tip_magnitude, 0.1);
}

TEST(RunCase, UnwritableDirectory) {
  CaseConfig c = coarse_bending("/proc/fibersolve_forbidden");
  try {
    run_case(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(Centerline, BendingEndMomentMatchesAppliedLoad) {
  CaseConfig c = presets::bending();
  c.matrix.elements = {10, 2, 2};
  c.fibers[0].elements = 10;
  const Model m(c);
  VecX x = m.reference_state();
  ASSERT_TRUE(load_stepper(m, x).converged);
  std::istringstream in(centerline_csv(m, x, 0, 101));
  std::string line, last;
  while (std::getline(in, line)) last = line;
  std::vector<double> v;
  std::stringstream ls(last);
  std::string cell;
  while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
  ASSERT_EQ(v.size(), 13u);
  EXPECT_DOUBLE_EQ(v[0], 5.0);
  EXPECT_NEAR(v[9], 0.025, 0.025 * 1e-6);
}
