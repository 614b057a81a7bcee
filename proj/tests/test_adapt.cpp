#include <gtest/gtest.h>

#include "vdpg/adapt.hpp"

using namespace vdpg;
using Eigen::VectorXd;

namespace {

ErrorIndicators indicators(const std::vector<double>& eta) {
  ErrorIndicators ind;
  ind.eta = eta;
  for (double e : eta) ind.total += e * e;
  ind.total = std::sqrt(ind.total);
  return ind;
}

std::vector<int> iota(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

std::set<int> cylinder_elements(const Mesh& mesh) {
  std::set<int> out;
  for (int id : mesh.active_elements())
    for (int e : mesh.elements[id].side)
      if (mesh.edges[e].tag == BoundaryTag::cylinder) out.insert(id);
  return out;
}

}  // namespace

TEST(Marking, EnergyThreshold) {
  EXPECT_EQ(mark_energy(indicators({1.0, 0.3, 0.1}), iota(3), 0.2), (std::set<int>{0, 1}));
  EXPECT_EQ(mark_energy(indicators({0.4, 0.4, 0.4}), iota(3), 0.2), (std::set<int>{0, 1, 2}));
  EXPECT_EQ(mark_energy(indicators({0.5, 0.9, 0.89}), iota(3), 0.999), (std::set<int>{1}));
}

TEST(Marking, EnergyIsScaleInvariant) {
  const std::vector<double> eta = {0.7, 0.01, 0.2, 0.15, 0.3};
  std::vector<double> scaled;
  for (double e : eta) scaled.push_back(1e5 * e);
  EXPECT_EQ(mark_energy(indicators(eta), iota(5), 0.25), mark_energy(indicators(scaled), iota(5), 0.25));
}

TEST(Marking, EnergyIgnoresInactiveElements) {
  EXPECT_EQ(mark_energy(indicators({5.0, 1.0, 0.9}), {1, 2}, 0.5), (std::set<int>{1, 2}));
}

TEST(Marking, AdhocOneAddsCylinderElements) {
  const Mesh mesh = build_initial_mesh();
  const std::vector<int> act = mesh.active_elements();
  const std::set<int> cyl = cylinder_elements(mesh);
  ASSERT_EQ(cyl.size(), 6u);
  std::vector<double> eta(mesh.elements.size(), 0.0);
  int far = -1;
  for (int id : act)
    if (!cyl.count(id)) far = id;
  eta[far] = 1;
  const std::set<int> marked = mark_adhoc1(indicators(eta), act, 0.2, mesh);
  EXPECT_EQ(marked.size(), cyl.size() + 1);
  EXPECT_TRUE(marked.count(far));
  // Overlap: the energy mark is itself a cylinder element.
  std::vector<double> eta2(mesh.elements.size(), 0.0);
  eta2[*cyl.begin()] = 1;
  EXPECT_EQ(mark_adhoc1(indicators(eta2), act, 0.2, mesh), cyl);
}

TEST(Marking, AdhocTwoBand) {
  const Mesh mesh = build_initial_mesh();
  const std::vector<int> act = mesh.active_elements();
  std::vector<double> eta(mesh.elements.size(), 0.0);
  eta[act.back()] = 1;
  const std::set<int> energy = mark_energy(indicators(eta), act, 0.2);
  std::set<int> expect = cylinder_elements(mesh);
  expect.insert(energy.begin(), energy.end());
  // The O-grid ring touches the circle; the next vertices out lie well beyond 0.1.
  EXPECT_EQ(mark_adhoc2(indicators(eta), act, 0.2, mesh, 0.0), expect);
  EXPECT_EQ(mark_adhoc2(indicators(eta), act, 0.2, mesh, 0.1), expect);
  EXPECT_EQ(mark_adhoc2(indicators(eta), act, 0.2, mesh, 100.0).size(), act.size());
}

TEST(AdaptConfig, ValidatesAndParses) {
  AdaptConfig c;
  EXPECT_NO_THROW(c.validate());
  c.theta = 1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c.theta = 0.2;
  c.dof_budget = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  for (Strategy s : {Strategy::energy, Strategy::adhoc1, Strategy::adhoc2})
    EXPECT_EQ(strategy_from_string(to_string(s)), s);
  EXPECT_THROW(strategy_from_string("goal"), std::invalid_argument);
}

TEST(Penalty, ZeroWeightLeavesTheSystemUnchanged) {
  const ModelParams m = ModelParams::nondimensional(0.4, 0.0);
  const Mesh mesh = build_initial_mesh();
  const PolyOrders orders;
  const Layout lay(orders);
  VectorXd bg = VectorXd::LinSpaced(lay.fields(), -1, 1);
  for (int id : mesh.active_elements()) {
    LocalExtras off;
    off.penalty_T12 = 0;
    const LocalForms a = local_forms(mesh, id, m, bg, orders), b = local_forms(mesh, id, m, bg, orders, off);
    EXPECT_EQ(a.B, b.B);
    EXPECT_EQ(a.G, b.G);
    EXPECT_EQ(a.l, b.l);
  }
}

TEST(Penalty, VanishingShearOnTheAxisAddsNoLoad) {
  const ModelParams m = ModelParams::nondimensional(0.4, 0.0);
  const Mesh mesh = build_channel_mesh(3, 2, -1.5, 1.5, 0, 2);
  const PolyOrders orders;
  // The Poiseuille shear stress is linear in y and vanishes on y = 0.
  const DofMap dm = build_dofmap(mesh, benchmark_bcs(m));
  const FieldVectors bg = poiseuille_fields(mesh, dm, m);
  LocalExtras pen;
  pen.penalty_T12 = 1e4;
  int with_rows = 0;
  for (int id : mesh.active_elements()) {
    const LocalForms f = local_forms(mesh, id, m, bg[id], orders, pen);
    const int extra = static_cast<int>(f.l.size()) - f.ntest;
    if (extra == 0) continue;
    ++with_rows;
    EXPECT_LE(f.l.tail(extra).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GT(f.B.bottomRows(extra).cwiseAbs().maxCoeff(), 0);
  }
  EXPECT_GT(with_rows, 0);
}

TEST(AdaptLoop, NoRefinementGivesOneRecord) {
  AdaptConfig cfg;
  cfg.max_refinements = 0;
  const AdaptResult r = adapt_loop(cfg, ModelParams::nondimensional(0.1, 0.0), build_initial_mesh());
  ASSERT_FALSE(r.failed) << r.failure;
  ASSERT_EQ(r.records.size(), 1u);
  EXPECT_EQ(r.records[0].dof, 5123u);
  EXPECT_EQ(r.records[0].elements, 36u);
  EXPECT_GT(r.records[0].drag.flux, 0);
  EXPECT_GT(r.records[0].energy_err, 0);
}

TEST(AdaptLoop, RefinementGrowsDofsAndWarmStarts) {
  const ModelParams m = ModelParams::nondimensional(0.1, 0.0);
  AdaptConfig cfg;
  cfg.max_refinements = 1;
  cfg.dof_budget = 1000000;
  std::vector<double> first_increment;
  Mesh last_mesh;
  const AdaptResult r =
      adapt_loop(cfg, m, build_initial_mesh(), {}, [&](const RefinementRecord&, const Mesh& mesh, const DofMap&,
                                                       const NewtonResult& nr) {
        first_increment.push_back(nr.report.iterations.front().increment);
        last_mesh = mesh;
      });
  ASSERT_FALSE(r.failed) << r.failure;
  ASSERT_EQ(r.records.size(), 2u);
  EXPECT_LT(r.records[0].dof, r.records[1].dof);
  // Cold start on the refined mesh for comparison.
  const DofMap dm = build_dofmap(last_mesh, benchmark_bcs(m));
  NewtonOptions one;
  one.max_iter = 1;
  const NewtonResult cold = gauss_newton(last_mesh, dm, m, {}, {}, one);
  EXPECT_LT(first_increment[1], cold.report.iterations.front().increment);
}
