#include "vdpg/dpg_core.hpp"

#include <fstream>
#include <iomanip>
#include <random>

namespace vdpg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

CondensedLocal condense_local(const MatrixXd& B, const MatrixXd& G, const VectorXd& l, int elem) {
  Eigen::LLT<MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw GramError(elem, "Gram matrix of element " + std::to_string(elem) + " is not positive definite");
  CondensedLocal c;
  c.W = llt.matrixL().solve(B);
  c.y = llt.matrixL().solve(l);
  c.A = MatrixXd::Zero(B.cols(), B.cols());
  c.A.selfadjointView<Eigen::Lower>().rankUpdate(c.W.transpose());
  c.A.triangularView<Eigen::StrictlyUpper>() = c.A.transpose();
  c.f = c.W.transpose() * c.y;
  return c;
}

std::vector<LocalSystem> build_locals(const Mesh& mesh, const DofMap& dm, const ModelParams& m,
                                      const FieldVectors& background, const LocalExtras& extras) {
  const Layout& lay = dm.layout;
  const int nf = lay.fields(), ni = lay.interface();
  std::vector<LocalSystem> out(dm.topo.active.size());
  for (std::size_t k = 0; k < dm.topo.active.size(); ++k) {
    const int id = dm.topo.active[k];
    const VectorXd bg =
        static_cast<std::size_t>(id) < background.size() && background[id].size() == nf ? background[id] : VectorXd::Zero(nf);
    const LocalForms lf = local_forms(mesh, id, m, bg, dm.orders, extras);
    CondensedLocal c = condense_local(lf.B, lf.G, lf.l, id);
    LocalSystem& ls = out[k];
    ls.elem = id;
    ls.ntest = lf.ntest;
    ls.field_llt.compute(c.A.topLeftCorner(nf, nf));
    if (ls.field_llt.info() != Eigen::Success)
      throw GramError(id, "field block of element " + std::to_string(id) + " is not positive definite");
    ls.A_fi = c.A.topRightCorner(nf, ni);
    ls.f_f = c.f.head(nf);
    const MatrixXd X = ls.field_llt.solve(ls.A_fi);
    ls.K = c.A.bottomRightCorner(ni, ni) - ls.A_fi.transpose() * X;
    ls.K = 0.5 * (ls.K + ls.K.transpose()).eval();
    ls.r = c.f.tail(ni) - X.transpose() * ls.f_f;
    ls.W = std::move(c.W);
    ls.y = std::move(c.y);

    const ElementQuadrature eq = element_quadrature(mesh, id, dm.orders);
    ls.pressure_weights = VectorXd::Zero(lay.nf);
    ls.field_mass = MatrixXd::Zero(lay.nf, lay.nf);
    VectorXd val(lay.nf);
    Eigen::Matrix<double, Eigen::Dynamic, 2> grad(lay.nf, 2);
    for (int q = 0; q < eq.npts; ++q) {
      tensor_basis<double>(dm.orders.p, eq.ref(q, 0), eq.ref(q, 1), val, grad);
      ls.pressure_weights += eq.w(q) * val;
      ls.field_mass.noalias() += eq.w(q) * val * val.transpose();
    }
    ls.area = eq.w.sum();
  }
  return out;
}

GlobalSystem assemble_global(const DofMap& dm, const std::vector<LocalSystem>& locals) {
  GlobalSystem sys;
  sys.b = VectorXd::Zero(dm.n_eq);
  VectorXd b_all = VectorXd::Zero(dm.n_interface);
  std::vector<Eigen::Triplet<double>> trip;
  for (const LocalSystem& ls : locals) {
    const ElementMap& em = dm.elements[ls.elem];
    const MatrixXd Kg = em.C.transpose() * ls.K * em.C;
    const VectorXd rg = em.C.transpose() * ls.r;
    const int n = static_cast<int>(em.dofs.size());
    for (int a = 0; a < n; ++a) {
      b_all(em.dofs[a]) += rg(a);
      const int ea = dm.eq[em.dofs[a]];
      if (ea < 0) continue;
      sys.b(ea) += rg(a);
      for (int c = 0; c < n; ++c) {
        const int ec = dm.eq[em.dofs[c]];
        if (ec < 0)
          sys.b(ea) -= Kg(a, c) * dm.fixed_value[em.dofs[c]];
        else if (ea >= ec)
          trip.emplace_back(ea, ec, Kg(a, c));
      }
    }
  }
  sys.A.resize(dm.n_eq, dm.n_eq);
  sys.A.setFromTriplets(trip.begin(), trip.end());
  if (dm.pinned >= 0) {
    const VectorXd z = dm.pressure_null_interface();
    const double den = z.norm() * b_all.norm();
    sys.nullspace_consistency = den > 0 ? std::abs(z.dot(b_all)) / den : 0;
  }
  return sys;
}

VectorXd back_substitute(const LocalSystem& ls, const VectorXd& interface_local) {
  return ls.field_llt.solve(ls.f_f - ls.A_fi * interface_local);
}

DiscreteSolution solve_global(const DofMap& dm, const std::vector<LocalSystem>& locals, const GlobalSystem& sys,
                              SparseCholesky& chol, bool analyze, SolveInfo* info) {
  SolveInfo si;
  si.n = dm.n_eq;
  si.nullspace_consistency = sys.nullspace_consistency;
  VectorXd x = VectorXd::Zero(dm.n_eq);
  if (dm.n_eq > 0) {
    if (analyze) chol.analyze(sys.A, dm.group_start);
    if (!chol.factorize(sys.A)) throw std::runtime_error("global Cholesky failed: " + chol.message());
    x = chol.solve_refined(sys.A, sys.b, 1e-10, 3, &si.rel_residual);
  }
  DiscreteSolution sol;
  sol.interface = dm.expand(x);
  sol.fields.assign(dm.elements.size(), VectorXd());
  for (const LocalSystem& ls : locals) sol.fields[ls.elem] = back_substitute(ls, dm.gather(ls.elem, sol.interface));
  if (dm.pinned >= 0) {
    double mean = 0, area = 0;
    const int p0 = dm.layout.field(comp::p);
    for (const LocalSystem& ls : locals) {
      mean += ls.pressure_weights.dot(sol.fields[ls.elem].segment(p0, dm.layout.nf));
      area += ls.area;
    }
    const double alpha = -mean / area;
    for (const LocalSystem& ls : locals)
      for (int i : dm.pressure_constant_modes()) sol.fields[ls.elem](i) += alpha;
    sol.interface += alpha * dm.pressure_null_interface();
    si.pressure_shift = alpha;
  }
  if (info) *info = si;
  return sol;
}

VectorXd local_trial(const DofMap& dm, int elem, const DiscreteSolution& sol) {
  VectorXd u(dm.layout.trial());
  u << sol.fields[elem], dm.gather(elem, sol.interface);
  return u;
}

double local_residual_sq(const LocalSystem& ls, const VectorXd& u_local) {
  return (ls.y.head(ls.ntest) - ls.W.topRows(ls.ntest) * u_local).squaredNorm();
}

ErrorIndicators energy_indicators(const DofMap& dm, const std::vector<LocalSystem>& locals,
                                  const DiscreteSolution& sol) {
  ErrorIndicators ind;
  ind.eta.assign(dm.elements.size(), 0.0);
  double s = 0;
  for (const LocalSystem& ls : locals) {
    const double e2 = local_residual_sq(ls, local_trial(dm, ls.elem, sol));
    ind.eta[ls.elem] = std::sqrt(e2);
    s += e2;
  }
  ind.total = std::sqrt(s);
  return ind;
}

double total_objective(const DofMap& dm, const std::vector<LocalSystem>& locals, const DiscreteSolution& sol) {
  double s = 0;
  for (const LocalSystem& ls : locals) s += (ls.y - ls.W * local_trial(dm, ls.elem, sol)).squaredNorm();
  return s;
}

double residual_optimality_check(const DofMap& dm, const std::vector<LocalSystem>& locals,
                                 const DiscreteSolution& sol, int trials, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> N;
  std::uniform_real_distribution<double> logscale(-6, 0);
  const double base = total_objective(dm, locals, sol);
  double worst = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    const double eps = std::pow(10.0, logscale(gen));
    DiscreteSolution p = sol;
    for (int id = 0; id < dm.n_interface; ++id)
      if (dm.eq[id] >= 0 || id == dm.pinned) p.interface(id) += eps * N(gen);
    for (const LocalSystem& ls : locals)
      for (Eigen::Index i = 0; i < p.fields[ls.elem].size(); ++i) p.fields[ls.elem](i) += eps * N(gen);
    const double margin = (total_objective(dm, locals, p) - base) / std::max(base, 1e-300);
    worst = std::min(worst, margin);
  }
  return trials > 0 ? worst : 0.0;
}

double direct_residual_sq(const Mesh& mesh, const DofMap& dm, const ModelParams& m, const FieldVectors& background,
                          const DiscreteSolution& sol, const LocalExtras& extras) {
  double s = 0;
  const int nf = dm.layout.fields();
  for (int id : dm.topo.active) {
    const VectorXd bg =
        static_cast<std::size_t>(id) < background.size() && background[id].size() == nf ? background[id] : VectorXd::Zero(nf);
    const LocalForms lf = local_forms(mesh, id, m, bg, dm.orders, extras);
    const VectorXd r = (lf.l - lf.B * local_trial(dm, id, sol)).head(lf.ntest);
    s += r.dot(lf.G.topLeftCorner(lf.ntest, lf.ntest).fullPivLu().solve(r));
  }
  return s;
}

void write_matrix_market(const Eigen::SparseMatrix<double>& A, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  Eigen::Index nnz = 0;
  for (Eigen::Index c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it) nnz += it.row() >= c;
  os << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n' << std::setprecision(17);
  for (Eigen::Index c = 0; c < A.outerSize(); ++c)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it)
      if (it.row() >= c) os << it.row() + 1 << ' ' << c + 1 << ' ' << it.value() << '\n';
}

}  // namespace vdpg
