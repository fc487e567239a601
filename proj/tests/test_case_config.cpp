#include <gtest/gtest.h>

#include "fibersolve/case_config.hpp"
#include "test_util.hpp"

using namespace fibersolve;
using namespace fibersolve::test;

namespace {

const char* kMinimal = R"(# minimal bending case
[matrix]
size = 5, 1, 1
elements = 20 4 4
material = svk
E = 10
nu = 0
fixed_faces = x0

[beam.1]
start = 0 0.5 0.5
end = 5 0.5 0.5
radius = 0.125
E = 4346
elements = 20
clamp_start = true
m_ext_end = 0 0 0.025
)";

ErrorCode code_of(const std::string& text) {
  try {
    parse_case(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST(ParseCase, MinimalDefaults) {
  const CaseConfig c = parse_case(kMinimal);
  EXPECT_EQ(c.solver.newton.unity_mode, UnityMode::Weak);
  EXPECT_FALSE(c.endpoint_rows());
  EXPECT_EQ(c.solver.newton.n_load_steps, 1);
  EXPECT_EQ(c.solver.newton.max_iters, 25);
  EXPECT_EQ(c.fibers.size(), 1u);
  EXPECT_DOUBLE_EQ(c.fibers[0].m_ext_end(2), 0.025);
  EXPECT_EQ(c.matrix.fixed_faces, std::vector<int>{X0});
  EXPECT_DOUBLE_EQ(c.matrix.edges(0, 0), 5.0);
}

TEST(ParseCase, FiberOutsideMatrix) {
  std::string text = kMinimal;
  text.replace(text.find("end = 5 0.5 0.5"), 15, "end = 6 0.5 0.5");
  try {
    parse_case(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ValidationError);
    EXPECT_NE(std::string(e.what()).find("fiber outside matrix"), std::string::npos);
  }
}

TEST(ParseCase, OrderLadders) {
  const CaseConfig c = parse_case(std::string(kMinimal) + "[solver]\norders = 4,4,4,3,3,2,2,2\n");
  EXPECT_EQ(c.solver.orders.str(), "4,4,4,3,3,2,2,2");
  EXPECT_TRUE(c.endpoint_rows());
  EXPECT_EQ(parse_case(std::string(kMinimal) + "[solver]\norders = 44433222\n").solver.orders, c.solver.orders);
  EXPECT_EQ(code_of(std::string(kMinimal) + "[solver]\norders = 4,4,4,2,2,2,2,2\n"), ErrorCode::InconsistentOrders);
  EXPECT_EQ(code_of(std::string(kMinimal) + "[solver]\norders = 44433333\n"), ErrorCode::InconsistentOrders);
  EXPECT_EQ(code_of(std::string(kMinimal) + "[solver]\norders = 44433222\nendpoint_constraints = off\n"),
            ErrorCode::InconsistentOrders);
}

TEST(ParseCase, UnknownKeysAndSectionsCarryLineNumbers) {
  try {
    parse_case("[matrix]\nsize = 1 1 1\ncolour = red\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ParseError);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  EXPECT_EQ(code_of("[mesh]\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("size = 1 1 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("[matrix]\nsize = 1 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("[matrix]\nsize 1 1 1\n"), ErrorCode::ParseError);
  EXPECT_EQ(code_of("[matrix]\nmaterial = clay\n"), ErrorCode::ValidationError);
  EXPECT_EQ(code_of("[matrix]\nelements = 0 1 1\n"), ErrorCode::ValidationError);
}

TEST(ParseCase, LoadCaseMissingFile) {
  try {
    load_case("/nonexistent/case.cfg");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoError);
  }
}

TEST(ParseCase, PresetRoundTrip) {
  for (const char* name : {"bending", "torsion", "shear", "rve"}) {
    const CaseConfig c = presets::by_name(name);
    const CaseConfig r = parse_case(serialize_case(c));
    EXPECT_TRUE(r == c) << name;
    EXPECT_EQ(serialize_case(r), serialize_case(c)) << name;
  }
  const CaseConfig full = presets::rve(true);
  EXPECT_TRUE(parse_case(serialize_case(full)) == full);
  EXPECT_EQ(full.fibers.size(), 21u);
  EXPECT_THROW(presets::by_name("tension"), Error);
}

TEST(Presets, BendingParameters) {
  const CaseConfig c = presets::bending();
  EXPECT_EQ(c.solver.orders.str(), "4,4,4,3,3,2,2,2");
  EXPECT_EQ(c.matrix.elements, (std::array<int, 3>{20, 4, 4}));
  EXPECT_DOUBLE_EQ(c.matrix.material.E, 10.0);
  ASSERT_EQ(c.fibers.size(), 1u);
  EXPECT_DOUBLE_EQ(c.fibers[0].length(), 5.0);
  EXPECT_DOUBLE_EQ(c.fibers[0].radius, 0.125);
  EXPECT_DOUBLE_EQ(c.fibers[0].E, 4346.0);
  EXPECT_TRUE(c.fibers[0].clamp_start);
}

TEST(Presets, TorsionAndRve) {
  const CaseConfig t = presets::torsion();
  EXPECT_EQ(t.matrix.material.kind, MaterialKind::MooneyRivlinInvariant);
  EXPECT_DOUBLE_EQ(t.matrix.material.c1, 2.0);
  EXPECT_DOUBLE_EQ(t.matrix.material.c2, 1.0);
  EXPECT_DOUBLE_EQ(t.fibers[0].m_ext_end(0), 0.9);
  const CaseConfig r = presets::rve();
  EXPECT_DOUBLE_EQ(r.matrix.material.E, 50000.0);
  EXPECT_DOUBLE_EQ(r.matrix.material.nu, 0.2);
  for (const auto& f : r.fibers) {
    EXPECT_NEAR(f.length(), 14.0, 1e-12);
    EXPECT_DOUBLE_EQ(f.radius, 0.1);
    EXPECT_DOUBLE_EQ(f.E, 200000.0);
  }
}

TEST(RotateCase, PreservesValidityAndGeometry) {
  const CaseConfig c = presets::bending();
  const Mat3 Q = random_rotation();
  const CaseConfig r = rotate_case(c, Q);
  EXPECT_NO_THROW(r.validate());
  EXPECT_NEAR(r.fibers[0].length(), c.fibers[0].length(), 1e-12);
  EXPECT_LE((r.fibers[0].m_ext_end - Q * c.fibers[0].m_ext_end).norm(), 1e-15);
  EXPECT_LE((r.matrix.edges - Q * c.matrix.edges).norm(), 1e-14);
}
