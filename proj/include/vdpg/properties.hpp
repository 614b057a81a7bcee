#pragma once

// Property suites shared by the `check` subcommand and the acceptance driver.

#include <string>
#include <vector>

#include "vdpg/nonlinear.hpp"

namespace vdpg {

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0;
};

// Accumulates SPD diagnostics over every global solve it is attached to.
struct SpdAudit {
  int solves = 0;
  int factorization_failures = 0;
  int asymmetric_locals = 0;      // element Schur complements with K != K^T
  int upper_entries = 0;          // global entries stored above the diagonal (must be none)
  bool clean() const { return solves > 0 && factorization_failures == 0 && asymmetric_locals == 0 && upper_entries == 0; }
  void attach(NewtonOptions& opt);
};

// Dual-norm decomposition over `instances` random metrics, splits and functionals.
PropertyResult check_dual_norm_split(int instances = 100);
// No random admissible perturbation lowers the minimized residual (four-element Stokes problem).
PropertyResult check_residual_optimality(int trials = 100);
// Sum of squared indicators equals the directly evaluated dual residual on three problems.
PropertyResult check_energy_identity();
// lambda = 0 with fields in the trial space: exact fields after one Newton step.
PropertyResult check_newtonian_exactness();
// Smooth Stokes solution under uniform refinement: observed L2 order of the fields.
PropertyResult check_convergence_rate(int levels = 4, double min_rate = 2.7);
// Element Gram and global Cholesky on every Newton iterate of the benchmark's initial mesh.
PropertyResult check_spd_initial_mesh(double Wi = 0.1);

std::vector<PropertyResult> property_suite();

}  // namespace vdpg
