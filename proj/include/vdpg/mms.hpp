#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>
#include <unsupported/Eigen/AutoDiff>

#include "vdpg/dofmap.hpp"
#include "vdpg/dpg_core.hpp"
#include "vdpg/kernels.hpp"

namespace vdpg {

using ADScalar = Eigen::AutoDiffScalar<Eigen::Vector2d>;

// Exact fields of a manufactured solution, evaluable in double and in forward-mode
// automatic differentiation (the latter supplies the x-derivatives of the fluxes).
struct ExactSolution {
  std::string name;
  std::function<FieldState<double>(const Eigen::Vector2d&)> value;
  std::function<FieldState<ADScalar>(const Vec2<ADScalar>&)> ad;
};

// Build from a generic callable `f(const Vec2<S>& x) -> FieldState<S>`.
template <typename F>
ExactSolution make_exact(std::string name, F f) {
  ExactSolution e;
  e.name = std::move(name);
  e.value = [f](const Eigen::Vector2d& x) { return f(Vec2<double>(x)); };
  e.ad = [f](const Vec2<ADScalar>& x) { return f(x); };
  return e;
}

// Per-component source s with int sum_c w_c s_c test_c equal to the nonlinear field form
// of the exact state (after integration by parts), so that the exact state solves the problem.
SourceFn manufactured_source(const ModelParams& m, const ExactSolution& exact);

// Exact velocity trace on every boundary edge; exact j-hat = (u.n) T where lambda > 0.
BoundaryConditions exact_boundary_conditions(const ModelParams& m, const ExactSolution& exact);

struct FieldErrors {
  double u = 0, p = 0, L = 0, T = 0;          // absolute L2 errors
  double u_rel = 0, p_rel = 0, L_rel = 0, T_rel = 0;
  double total = 0, total_rel = 0;            // all fields together
  double max_rel() const { return std::max({u_rel, p_rel, L_rel, T_rel}); }
};

FieldErrors field_errors(const Mesh& mesh, const DofMap& dm, const FieldVectors& fields, const ExactSolution& exact,
                         int extra_points = 3);

struct ConvergenceLevel {
  int level = 0;
  std::size_t dof = 0, elements = 0;
  double h = 0;         // largest element diameter
  FieldErrors err;
  double rate = 0;      // observed order of the total L2 field error against h (0 on the first level)
  int newton_iters = 0;
  double seconds = 0;
};

// Solves the manufactured problem on `base` and `levels` successive uniform refinements.
std::vector<ConvergenceLevel> convergence_study(const ModelParams& m, const ExactSolution& exact, const Mesh& base,
                                                int levels, const PolyOrders& orders = {});

// Library of manufactured solutions.
// Quadratic Stokes-compatible fields: u = (y^2, x^2), p = xy - 1/4, L = grad u, T = 2 eta_p D(u).
ExactSolution polynomial_newtonian(const ModelParams& m);
// u = (sin pi x cos pi y, -cos pi x sin pi y), p = cos pi x cos pi y, T = 2 eta_p D(u).
ExactSolution smooth_stokes(const ModelParams& m);
// Smooth fields with an independent polymeric stress (exercises every viscoelastic term).
ExactSolution smooth_viscoelastic();

}  // namespace vdpg
