#include <gtest/gtest.h>

#include <cmath>

#include "vdpg/bench.hpp"
#include "vdpg/nonlinear.hpp"

using namespace vdpg;
using Eigen::Matrix2d;
using Eigen::Vector2d;
using Eigen::VectorXd;

namespace {

DiscreteSolution state_solution(const Mesh& mesh, const DofMap& dm, const FieldState<double>& s) {
  DiscreteSolution sol;
  sol.interface = VectorXd::Zero(dm.n_interface);
  sol.fields = project_state(mesh, dm, [&s](const Vector2d&) { return s; });
  return sol;
}

}  // namespace

TEST(Poiseuille, ProfilesCarryUnitMeanVelocity) {
  const PoiseuilleProfiles prof(ModelParams::nondimensional(0.4, 0.0));
  // Simpson's rule is exact for the quadratic profile.
  const double mean = (prof.u1(0) + 4 * prof.u1(1) + prof.u1(2)) / 6;
  EXPECT_NEAR(mean, 1.0, 1e-15);
  EXPECT_EQ(prof.u1(2), 0.0);
}

TEST(Poiseuille, ProfilesSolveTheConstitutiveAndMomentumEquations) {
  for (double wi : {0.1, 0.7}) {
    const ModelParams m = ModelParams::nondimensional(wi, 0.0);
    const PoiseuilleProfiles prof(m);
    for (double y : {0.0, 0.3, 1.1, 2.0}) {
      const FieldState<double> s = prof.state(Vector2d(0.5, y));
      // Upper-convected derivative of a stress depending on y only, advected along x.
      const Matrix2d r = s.T - m.lambda * (s.L * s.T + s.T * s.L.transpose()) - m.eta_p * (s.L + s.L.transpose());
      EXPECT_NEAR(r.norm(), 0, 1e-14);
      const double h = 1e-4;
      const double d2u = (prof.u1(y + h) - 2 * prof.u1(y) + prof.u1(y - h)) / (h * h);
      const double dT12 = (prof.T12(y + h) - prof.T12(y - h)) / (2 * h);
      const double dp = (prof.p(1.0) - prof.p(0.0));
      EXPECT_NEAR(dp - m.eta_s * d2u - dT12, 0, 1e-6);
    }
  }
}

TEST(Poiseuille, ExactProfilesGiveVanishingFirstIncrement) {
  // The flux j = (u.n) T = u1 T11 is quartic in y on vertical edges: with lambda > 0 the
  // profiles are a discrete solution only when the flux space holds quartics (p = 4).
  struct Case {
    double wi, re;
    int p;
  };
  for (const Case c : {Case{0.0, 0.0, 2}, Case{0.0, 1.0, 2}, Case{0.3, 1.0, 4}}) {
    const ModelParams m = ModelParams::nondimensional(c.wi, c.re);
    const Mesh mesh = build_channel_mesh(4, 2, -2, 2, 0, 2);
    PolyOrders orders;
    orders.p = c.p;
    const DofMap dm = build_dofmap(mesh, benchmark_bcs(m), orders);
    const FieldVectors init = poiseuille_fields(mesh, dm, m);
    const NewtonResult r = gauss_newton(mesh, dm, m, init);
    ASSERT_FALSE(r.report.iterations.empty());
    EXPECT_LE(r.report.iterations[0].rel_increment, 1e-8) << "Wi " << c.wi << " p " << c.p;
    EXPECT_LE(r.report.iterations[0].eta, 1e-8) << "Wi " << c.wi << " p " << c.p;
  }
}

TEST(Drag, FieldEstimateOfConstantStresses) {
  const ModelParams m = ModelParams::nondimensional(0.1, 0.0);
  const Mesh mesh = build_initial_mesh();
  const DofMap dm = build_dofmap(mesh, benchmark_bcs(m));
  // sigma = I exerts no net force on the half cylinder in x.
  FieldState<double> iso;
  iso.p = -1;
  EXPECT_NEAR(drag_estimates(mesh, dm, state_solution(mesh, dm, iso), m).field, 0, 1e-12);
  // sigma_12 = 1: (sigma n).e1 = n_2, and int n_2 ds = -2R for the normal pointing into the cylinder.
  FieldState<double> shear;
  shear.T << 0, 1, 1, 0;
  const DragEstimates d = drag_estimates(mesh, dm, state_solution(mesh, dm, shear), m);
  EXPECT_NEAR(d.field, 4 * m.R / (m.eta() * m.ubar), 1e-10);
  EXPECT_NEAR(d.arc_length, M_PI * m.R, 1e-12);
}

TEST(Drag, FluxEstimateOfConstantTangentialTraction) {
  const ModelParams m = ModelParams::nondimensional(0.1, 0.0);
  const Mesh mesh = build_initial_mesh();
  const DofMap dm = build_dofmap(mesh, benchmark_bcs(m));
  DiscreteSolution sol = state_solution(mesh, dm, FieldState<double>());
  const double c = 0.75;
  int edges = 0;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    if (mesh.edges[e].tag == BoundaryTag::cylinder && dm.edge_dof[e] >= 0) {
      sol.interface(dm.edge_dof[e] + dm.edge_tt()) = c;
      ++edges;
    }
  ASSERT_EQ(edges, 6);
  // t_hat = c tau with tau = (-n_2, n_1): t_hat.e1 = c y / R; its arc integral is 2 R c.
  const DragEstimates d = drag_estimates(mesh, dm, sol, m);
  EXPECT_NEAR(d.flux, -4 * m.R * c / (m.eta() * m.ubar), 1e-10);
  EXPECT_NEAR(d.field, 0, 1e-14);
  // Mismatch ||c y / R||_{L2(half arc)} = c sqrt(pi R / 2).
  EXPECT_NEAR(d.mismatch_l2_half, c * std::sqrt(M_PI * m.R / 2), 1e-10);
  EXPECT_NEAR(d.err, std::sqrt(2 * M_PI * m.R) * d.mismatch_l2_half, 1e-14);
}

TEST(Gamma, SamplesAreOrderedAlongTheCurve) {
  const ModelParams m = ModelParams::nondimensional(0.1, 0.0);
  const Mesh mesh = build_initial_mesh();
  const DofMap dm = build_dofmap(mesh, benchmark_bcs(m));
  FieldState<double> s;
  s.T << 1, 2, 2, 3;
  const std::vector<GammaSample> g = sample_gamma(mesh, dm, state_solution(mesh, dm, s), 4);
  ASSERT_FALSE(g.empty());
  int on_cylinder = 0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i > 0) EXPECT_LT(g[i - 1].s, g[i].s);
    EXPECT_NEAR(g[i].T11, 1, 1e-12);
    EXPECT_NEAR(g[i].T12, 2, 1e-12);
    EXPECT_NEAR(g[i].T22, 3, 1e-12);
    if (g[i].s <= M_PI * m.R) {
      ++on_cylinder;
      EXPECT_NEAR(std::hypot(g[i].x, g[i].y), m.R, 1e-12);
      EXPECT_NEAR(g[i].that1, 0, 1e-14);
    } else {
      EXPECT_EQ(g[i].y, 0.0);
      EXPECT_TRUE(std::isnan(g[i].that1));
      EXPECT_NEAR(g[i].s, M_PI * m.R + g[i].x - m.R, 1e-12);
    }
  }
  EXPECT_EQ(on_cylinder, 6 * 4);
  EXPECT_LT(g.front().x, 0);  // starts at the upstream stagnation side
  EXPECT_NEAR(g.back().x, 7.5, 0.5);
}

TEST(Gamma, MaxShearOnReflectiveBoundary) {
  const ModelParams m = ModelParams::nondimensional(0.1, 0.0);
  const Mesh mesh = build_initial_mesh();
  const DofMap dm = build_dofmap(mesh, benchmark_bcs(m));
  FieldState<double> s;
  s.T << 1, -0.5, -0.5, 3;
  EXPECT_NEAR(max_abs_T12_reflective(mesh, dm, state_solution(mesh, dm, s).fields), 0.5, 1e-12);
  EXPECT_EQ(max_abs_T12_reflective(mesh, dm, state_solution(mesh, dm, FieldState<double>()).fields), 0.0);
}
