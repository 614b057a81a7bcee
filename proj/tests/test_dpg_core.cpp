#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "vdpg/dpg_core.hpp"
#include "vdpg/mms.hpp"

using namespace vdpg;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_spd(int n, std::mt19937& gen) {
  std::normal_distribution<double> N;
  MatrixXd X(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) X(i, j) = N(gen);
  return X * X.transpose() + n * MatrixXd::Identity(n, n);
}

MatrixXd random_matrix(int r, int c, std::mt19937& gen) {
  std::normal_distribution<double> N;
  MatrixXd X(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) X(i, j) = N(gen);
  return X;
}

struct Fixture {
  Mesh mesh;
  ModelParams m;
  DofMap dm;
  FieldVectors bg;
  SourceFn src;
  double penalty = 0;
  // Rebuilt on use: a stored pointer to `src` would dangle after copies.
  LocalExtras extras() const {
    LocalExtras e;
    e.source = &src;
    e.penalty_T12 = penalty;
    return e;
  }
  std::vector<LocalSystem> locals;
  DiscreteSolution sol;
  SolveInfo info;
};

Fixture solve_fixture(Mesh mesh, const ModelParams& m, const ExactSolution& ex, double bg_scale = 0,
                      double penalty = 0) {
  Fixture f;
  f.mesh = std::move(mesh);
  f.m = m;
  f.src = manufactured_source(m, ex);
  f.penalty = penalty;
  f.dm = build_dofmap(f.mesh, exact_boundary_conditions(m, ex));
  f.bg.assign(f.mesh.elements.size(), VectorXd());
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> U(-bg_scale, bg_scale);
  for (int id : f.dm.topo.active) {
    f.bg[id] = VectorXd::Zero(f.dm.layout.fields());
    for (int i = 0; i < f.bg[id].size(); ++i) f.bg[id](i) = U(gen);
  }
  f.locals = build_locals(f.mesh, f.dm, m, f.bg, f.extras());
  SparseCholesky ch;
  f.sol = solve_global(f.dm, f.locals, assemble_global(f.dm, f.locals), ch, true, &f.info);
  return f;
}

Mesh square(int n) { return build_rect_mesh(n, n, 0, 1, 0, 1); }

}  // namespace

TEST(DpgCore, CondenseIdentityGram) {
  std::mt19937 gen(1);
  const MatrixXd B = random_matrix(12, 5, gen);
  const VectorXd l = random_matrix(12, 1, gen);
  const CondensedLocal c = condense_local(B, MatrixXd::Identity(12, 12), l);
  EXPECT_LT((c.A - B.transpose() * B).norm(), 1e-13);
  EXPECT_LT((c.f - B.transpose() * l).norm(), 1e-13);
}

TEST(DpgCore, CondenseZeroB) {
  std::mt19937 gen(2);
  const CondensedLocal c = condense_local(MatrixXd::Zero(8, 3), random_spd(8, gen), VectorXd::Zero(8));
  EXPECT_EQ(c.A.norm(), 0.0);
  EXPECT_EQ(c.f.norm(), 0.0);
}

TEST(DpgCore, CondenseMatchesDenseInverse) {
  std::mt19937 gen(3);
  for (int t = 0; t < 10; ++t) {
    const MatrixXd G = random_spd(30, gen), B = random_matrix(30, 9, gen);
    const VectorXd l = random_matrix(30, 1, gen);
    const MatrixXd Gi = G.inverse();
    const CondensedLocal c = condense_local(B, G, l);
    const MatrixXd A = B.transpose() * Gi * B;
    EXPECT_LT((c.A - A).norm() / A.norm(), 1e-10);
    EXPECT_LT((c.f - B.transpose() * Gi * l).norm() / c.f.norm(), 1e-10);
  }
}

TEST(DpgCore, CondenseReportsIndefiniteGram) {
  MatrixXd G = MatrixXd::Identity(4, 4);
  G(2, 2) = -1;
  try {
    condense_local(MatrixXd::Ones(4, 2), G, VectorXd::Ones(4), 7);
    FAIL();
  } catch (const GramError& e) {
    EXPECT_EQ(e.elem, 7);
  }
}

TEST(DpgCore, SingleElementGlobalMatrixIsTheLocalSchurComplement) {
  const Mesh mesh = square(1);
  const ModelParams m = ModelParams::nondimensional(0.2, 0.0);
  const DofMap dm = build_dofmap(mesh, {});
  const auto locals = build_locals(mesh, dm, m, {});
  const GlobalSystem sys = assemble_global(dm, locals);
  const MatrixXd K = dm.elements[0].C.transpose() * locals[0].K * dm.elements[0].C;
  ASSERT_EQ(dm.n_eq, dm.n_interface - 1);  // only the gauge pin is removed
  MatrixXd Ke(dm.n_eq, dm.n_eq);
  for (int a = 0; a < dm.n_interface; ++a)
    for (int b = 0; b < dm.n_interface; ++b)
      if (dm.eq[a] >= 0 && dm.eq[b] >= 0) Ke(dm.eq[a], dm.eq[b]) = K(a, b);
  const MatrixXd A = MatrixXd(sys.A).selfadjointView<Eigen::Lower>();
  EXPECT_LT((A - Ke).norm(), 1e-12 * Ke.norm());
}

TEST(DpgCore, TwoElementSystemDimension) {
  const DofMap one = build_dofmap(square(1), {});
  const DofMap two = build_dofmap(build_rect_mesh(2, 1, 0, 2, 0, 1), {});
  EXPECT_EQ(two.n_eq, 2 * one.n_interface - (19 + 4) - 1);
}

TEST(DpgCore, LocalMatricesSymmetricPositive) {
  const Mesh mesh = build_initial_mesh();
  const ModelParams m = ModelParams::nondimensional(0.3, 1.0);
  const DofMap dm = build_dofmap(mesh, {});
  const auto locals = build_locals(mesh, dm, m, {});
  for (const LocalSystem& ls : locals) {
    EXPECT_LE((ls.K - ls.K.transpose()).cwiseAbs().maxCoeff(), 1e-12 * ls.K.cwiseAbs().maxCoeff());
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<MatrixXd>(ls.K).eigenvalues().minCoeff(), -1e-10 * ls.K.norm());
  }
}

TEST(DpgCore, PolynomialStokesReproducedOnHangingMesh) {
  const ModelParams m = ModelParams::nondimensional(0.0, 0.0);
  const ExactSolution ex = polynomial_newtonian(m);
  const Fixture f = solve_fixture(refine(refine(square(2), {0}), {4}), m, ex);
  ASSERT_FALSE(f.dm.topo.hanging.empty());
  const FieldErrors e = field_errors(f.mesh, f.dm, f.sol.fields, ex);
  EXPECT_LT(e.max_rel(), 1e-10);
  EXPECT_LT(energy_indicators(f.dm, f.locals, f.sol).total, 1e-10);
  EXPECT_LT(f.info.rel_residual, 1e-10);
  EXPECT_LT(f.info.nullspace_consistency, 1e-12);
}

TEST(DpgCore, PressureHasZeroMean) {
  const ModelParams m = ModelParams::nondimensional(0.0, 0.0);
  const Fixture f = solve_fixture(square(2), m, smooth_stokes(m));
  double mean = 0;
  for (const LocalSystem& ls : f.locals)
    mean += ls.pressure_weights.dot(f.sol.fields[ls.elem].segment(f.dm.layout.field(comp::p), f.dm.layout.nf));
  EXPECT_LT(std::abs(mean), 1e-13);
}

TEST(DpgCore, IndicatorIsRieszNormOfResidual) {
  const ModelParams m = ModelParams::nondimensional(0.3, 1.0);
  const Fixture f = solve_fixture(square(2), m, smooth_viscoelastic(), 0.5);
  const ErrorIndicators ind = energy_indicators(f.dm, f.locals, f.sol);
  std::mt19937 gen(4);
  for (int id : f.dm.topo.active) {
    const LocalForms lf = local_forms(f.mesh, id, m, f.bg[id], f.dm.orders, f.extras());
    const VectorXd r = lf.l - lf.B * local_trial(f.dm, id, f.sol);
    const VectorXd riesz = lf.G.fullPivLu().solve(r);
    const double e2 = r.dot(riesz);
    EXPECT_NEAR(ind.eta[id] * ind.eta[id], e2, 1e-10 * e2);
    // No direction does better than the Riesz representative.
    for (int t = 0; t < 20; ++t) {
      const VectorXd d = random_matrix(static_cast<int>(r.size()), 1, gen);
      EXPECT_LE(std::pow(r.dot(d), 2) / d.dot(lf.G * d), e2 * (1 + 1e-10));
    }
    EXPECT_NEAR(std::pow(r.dot(riesz), 2) / riesz.dot(lf.G * riesz), e2, 1e-10 * e2);
  }
}

TEST(DpgCore, ZeroLoadZeroSolution) {
  const Mesh mesh = square(2);
  const ModelParams m = ModelParams::nondimensional(0.0, 0.0);
  BoundaryConditions bc;
  bc[BoundaryTag::wall].fix_u = {true, true};
  bc.fix_all_j = true;
  const DofMap dm = build_dofmap(mesh, bc);
  const auto locals = build_locals(mesh, dm, m, {});
  SparseCholesky ch;
  const DiscreteSolution sol = solve_global(dm, locals, assemble_global(dm, locals), ch, true);
  EXPECT_EQ(sol.interface.norm(), 0.0);
  EXPECT_EQ(energy_indicators(dm, locals, sol).total, 0.0);
}

TEST(DpgCore, ResidualOptimalityOnStokesFixture) {
  const ModelParams m = ModelParams::nondimensional(0.0, 0.0);
  const Fixture f = solve_fixture(square(2), m, smooth_stokes(m));
  EXPECT_EQ(residual_optimality_check(f.dm, f.locals, f.sol, 0), 0.0);
  EXPECT_GE(residual_optimality_check(f.dm, f.locals, f.sol, 100), -1e-10);
}

TEST(DpgCore, EnergyIdentity) {
  const ModelParams stokes = ModelParams::nondimensional(0.0, 0.0);
  const ModelParams ve = ModelParams::nondimensional(0.3, 1.0);
  const ModelParams gk = ModelParams::nondimensional(0.3, 0.0, 0.59, 0.1, Model::giesekus);
  const std::vector<Fixture> fx = {
      solve_fixture(square(2), stokes, smooth_stokes(stokes)),
      solve_fixture(refine(square(2), {1}), ve, smooth_viscoelastic(), 0.5),
      solve_fixture(refine(build_rect_mesh(3, 2, -1, 2, 0, 1), {2}), gk, smooth_viscoelastic(), 0.3, 1e2)};
  for (const Fixture& f : fx) {
    const double eta = energy_indicators(f.dm, f.locals, f.sol).total;
    const double direct = direct_residual_sq(f.mesh, f.dm, f.m, f.bg, f.sol, f.extras());
    EXPECT_NEAR(eta * eta, direct, 1e-10 * direct);
  }
}

TEST(DpgCore, MatrixMarketExport) {
  const ModelParams m = ModelParams::nondimensional(0.0, 0.0);
  const Fixture f = solve_fixture(square(1), m, polynomial_newtonian(m));
  const GlobalSystem sys = assemble_global(f.dm, f.locals);
  const std::string path = ::testing::TempDir() + "/vdpg_A.mtx";
  write_matrix_market(sys.A, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  EXPECT_EQ(header, "%%MatrixMarket matrix coordinate real symmetric");
  long r, c, nnz;
  is >> r >> c >> nnz;
  EXPECT_EQ(r, sys.A.rows());
  EXPECT_EQ(nnz, sys.A.nonZeros());
  std::remove(path.c_str());
}
