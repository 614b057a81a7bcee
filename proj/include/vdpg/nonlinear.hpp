#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "vdpg/dpg_core.hpp"

namespace vdpg {

enum class RateVerdict { quadratic, not_quadratic, indeterminate };
std::string to_string(RateVerdict v);

// Quadratic-rate detector on a history of relative increments. The history is cut at
// the first value below `floor` (round-off plateau). The fit window is the set of increments below 1e-2 at the end
// of the strictly decreasing tail when it holds at least 3 values, otherwise the whole
// decreasing tail when that holds at least 3 values; with fewer the verdict is
// indeterminate. Quadratic iff the least-squares slope of log e_{k+1} against log e_k
// is >= threshold.
RateVerdict quadratic_rate(const std::vector<double>& increments, double threshold = 1.7, double floor = 1e-12,
                           double* slope = nullptr);

struct NewtonOptions {
  double tol = 1e-8;     // relative L2 field increment
  int max_iter = 20;
  double damping = 1.0;  // experiments only; full steps by default
  // Called after every successful global solve (diagnostics such as SPD audits).
  std::function<void(int iter, const std::vector<LocalSystem>&, const GlobalSystem&, const SparseCholesky&)>
      on_solve;
};

struct NewtonIteration {
  double increment = 0;      // L2 norm of the field increment
  double rel_increment = 0;  // increment / L2 norm of the updated fields
  double eta = 0;            // total energy indicator of the step
  double seconds = 0;
  double rel_residual = 0;   // linear-solve residual
};

struct NewtonReport {
  std::vector<NewtonIteration> iterations;
  bool converged = false, diverged = false, failed = false;
  std::string failure;
  RateVerdict quadratic = RateVerdict::indeterminate;
  double slope = 0;
  int linear_solves() const { return static_cast<int>(iterations.size()); }
  std::vector<double> rel_increments() const;
};

// Result of the nonlinear solve on one mesh: final state and the data of its last step.
struct NewtonResult {
  FieldVectors fields;
  DiscreteSolution solution;          // interface of the last solve with the updated fields
  DiscreteSolution step;              // last linear solve as solved (field increments)
  std::vector<LocalSystem> locals;    // systems of the last step (pair with `step`)
  ErrorIndicators indicators;         // energy indicators of the last step
  NewtonReport report;
};

// Gauss-Newton: each step re-assembles B, l and G at the current fields and solves the DPG
// least-squares problem for the field increment (pressure and interface variables are
// solved for directly).
NewtonResult gauss_newton(const Mesh& mesh, const DofMap& dm, const ModelParams& m, const FieldVectors& init,
                          const LocalExtras& extras = {}, const NewtonOptions& opt = {});

// Exact injection of element fields from `coarse` onto the refined mesh `fine`.
FieldVectors prolong_fields(const Mesh& coarse, const Mesh& fine, const FieldVectors& fields, const PolyOrders& orders);

// L2 norm of element field vectors (all components).
double fields_l2(const std::vector<LocalSystem>& locals, const FieldVectors& f, const Layout& lay);

}  // namespace vdpg
