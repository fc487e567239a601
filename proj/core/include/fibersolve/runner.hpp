#pragma once

#include <string>
#include <vector>

#include "fibersolve/solver.hpp"

namespace fibersolve {

struct RunResult {
  SolveReport report;
  VecX state;
  EnergySplit energy;
  Mat3 average_piola = Mat3::Zero();
  std::vector<std::string> files;  // written outputs
};

// Solves a case and, when write_outputs is set, writes centerline CSVs, a
// summary and the optional VTK file into cfg.output.dir.
RunResult run_case(const CaseConfig& cfg, bool write_outputs = true);

// Centerline table of one fiber at uniformly spaced arc-length stations.
std::string centerline_csv(const Model& model, const VecX& x, int fiber, int samples);
void export_centerline(const Model& model, const VecX& x, int fiber, int samples, const std::string& path);

// Legacy ASCII VTK lattice with displacement and von Mises stress.
void export_vtk(const Model& model, const VecX& x, const std::array<int, 3>& resolution, const std::string& path);

std::string summary_text(const CaseConfig& cfg, const RunResult& res);

}  // namespace fibersolve
