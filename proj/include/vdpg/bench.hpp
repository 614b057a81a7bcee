#pragma once

#include <Eigen/Dense>
#include <vector>

#include "vdpg/dofmap.hpp"
#include "vdpg/dpg_core.hpp"
#include "vdpg/kernels.hpp"

namespace vdpg {

// Fully developed channel flow between walls at y = +-2R (centerline y = 0).
struct PoiseuilleProfiles {
  double ubar = 1, R = 1, lambda = 0, eta_s = 0, eta_p = 0;
  PoiseuilleProfiles() = default;
  explicit PoiseuilleProfiles(const ModelParams& m);

  double u1(double y) const { return 1.5 * ubar * (1 - y * y / (4 * R * R)); }
  double du1(double y) const { return -0.75 * ubar * y / (R * R); }
  double T11(double y) const { return 9 * ubar * ubar * lambda * eta_p * y * y / (8 * R * R * R * R); }
  double T12(double y) const { return -3 * ubar * eta_p * y / (4 * R * R); }
  double T22(double) const { return 0; }
  // Pressure with p(x0) = 0: dp/dx = (eta_s + eta_p) u1''.
  double p(double x, double x0 = 0) const { return -1.5 * ubar * (eta_s + eta_p) / (2 * R * R) * (x - x0); }
  FieldState<double> state(const Eigen::Vector2d& x) const;
};

// Inflow: Poiseuille velocity and j-hat = (u.n) T of the profiles; outflow: Poiseuille
// velocity; walls and cylinder: no slip; reflective (y = 0): u2 = 0, t.e1 = 0, j-hat = 0.
BoundaryConditions benchmark_bcs(const ModelParams& m);

// Straight channel [x0, x1] x [y0, y1] with inflow/outflow at the ends, reflective at y = 0
// and walls elsewhere.
Mesh build_channel_mesh(int nx, int ny, double x0, double x1, double y0, double y1);

// Element fields interpolating the Poiseuille state (exact: all profiles are quadratic).
FieldVectors poiseuille_fields(const Mesh& mesh, const DofMap& dm, const ModelParams& m);

// Least-squares fit of the element field basis to a state function (exact on the field space).
FieldVectors project_state(const Mesh& mesh, const DofMap& dm,
                           const std::function<FieldState<double>(const Eigen::Vector2d&)>& state);

struct DragEstimates {
  double flux = 0;   // -(2/(eta ubar)) int_{Gamma_C+} t_hat . e1 (element-outward t_hat)
  double field = 0;  // same with sigma_h n from the element fields
  double err = 0;    // drag error estimate (adopted convention, see drag_error_conventions)
  double mismatch_l2_half = 0;  // ||(t_hat - sigma_h n) . e1||_{L2(Gamma_C+)}
  double arc_length = 0;        // length of Gamma_C+ by quadrature
};

// sigma_h = -p I + eta_s (L + L^T) + T
Eigen::Matrix2d field_stress(const ModelParams& m, const FieldState<double>& s);

DragEstimates drag_estimates(const Mesh& mesh, const DofMap& dm, const DiscreteSolution& sol, const ModelParams& m);

// Candidate normalizations of the drag error estimate, given the mismatch on the half cylinder:
//   [0] |Gamma_C|^{1/2} * ||.||_{L2(Gamma_C)} with the full-cylinder norm sqrt(2) ||.||_{Gamma_C+}
//   [1] |Gamma_C|^{1/2} * ||.||_{L2(Gamma_C+)}
//   [2] |Gamma_C+|^{1/2} * ||.||_{L2(Gamma_C+)}
std::array<double, 3> drag_error_conventions(double mismatch_l2_half, double R);
constexpr int kDragErrorConvention = 1;

struct GammaSample {
  double s, x, y, T11, T12, T22, that1;  // that1 is NaN off the cylinder
};

// Samples along the cylinder arc from (-R, 0) over the top to (R, 0), then along the wake
// y = 0 to the outflow; `per_side` points per element side, ordered by arclength s.
std::vector<GammaSample> sample_gamma(const Mesh& mesh, const DofMap& dm, const DiscreteSolution& sol,
                                      int per_side = 8);

// max |T12| over sample points of the reflective boundary.
double max_abs_T12_reflective(const Mesh& mesh, const DofMap& dm, const FieldVectors& fields, int per_side = 11);

}  // namespace vdpg
