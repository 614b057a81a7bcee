#pragma once

// Benchmark runs: configuration, sweep expansion and the run-directory writer.

#include <iosfwd>
#include <string>
#include <vector>

#include "vdpg/adapt.hpp"

namespace vdpg {

struct RunPoint {
  double wi = 0.1, re = 0.0, alpha = 0.0;
};

struct RunConfig {
  Model model = Model::oldroyd_b;
  Coupling coupling = Coupling::stokes;
  std::vector<double> wi = {0.1}, re = {0.0}, alpha = {0.0};
  double beta = 0.59;
  AdaptConfig adapt;
  NewtonOptions newton;  // tolerance and iteration cap (the callback is not configurable)
  BenchGeometry geometry;
  unsigned seed = 0;
  std::string out = "runs/bench";
  bool vtk = true;
  int gamma_per_side = 8;
  int jobs = 1;

  // Cartesian product wi x re x alpha in that nesting order.
  std::vector<RunPoint> points() const;
  ModelParams model_params(const RunPoint& pt) const;
  // Every violation, one per entry (empty when valid).
  std::vector<std::string> violations() const;
};

// Structured text (JSON) form of the configuration; unknown keys are rejected.
std::string to_json(const RunConfig& cfg);
void apply_json(RunConfig& cfg, const std::string& text);

inline constexpr const char* kRecordsHeader = "ref,dof,drag_flux,drag_field,drag_err,energy_err,newton_iters,quadratic";
inline constexpr const char* kGammaHeader = "s,x,y,T11,T12,T22,that1";

void write_record_row(std::ostream& os, const RefinementRecord& r);
void write_gamma(std::ostream& os, const std::vector<GammaSample>& samples);

struct RunOutcome {
  std::string dir;
  AdaptResult result;
};

// Runs one sweep point into `dir`: config.json, records.csv (streamed), gamma.csv of the last
// mesh, log.txt with per-refinement diagnostics and mesh_NN.vtk snapshots. The returned
// final state carries no element systems.
RunOutcome run_point(const RunConfig& cfg, const RunPoint& pt, const std::string& dir);

// Subdirectory name of a sweep point, e.g. "wi0.3_re1_alpha0".
std::string point_dirname(const RunPoint& pt);

}  // namespace vdpg
