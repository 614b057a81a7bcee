#include "vdpg/spaces.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace vdpg {

void PolyOrders::validate() const {
  if (p < 1) throw std::invalid_argument("PolyOrders: p must be >= 1");
  if (dp < 1) throw std::invalid_argument("PolyOrders: dp must be >= 1");
}

int components(BasisKind kind) {
  switch (kind) {
    case BasisKind::field_scalar:
    case BasisKind::edge_scalar:
    case BasisKind::test_scalar:
      return 1;
    case BasisKind::field_vector:
    case BasisKind::test_vector:
      return 2;
    case BasisKind::field_tensor:
    case BasisKind::test_tensor:
      return 4;
    case BasisKind::field_symtensor:
    case BasisKind::test_symtensor:
      return 3;
  }
  return 1;
}

BasisTable tabulate(int order, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  const int n = (order + 1) * (order + 1);
  BasisTable t;
  t.order = order;
  t.val.resize(pts.rows(), n);
  t.dxi.resize(pts.rows(), n);
  t.deta.resize(pts.rows(), n);
  Eigen::VectorXd v(n);
  Eigen::Matrix<double, Eigen::Dynamic, 2> g(n, 2);
  for (Eigen::Index q = 0; q < pts.rows(); ++q) {
    tensor_basis<double>(order, pts(q, 0), pts(q, 1), v, g);
    t.val.row(q) = v.transpose();
    t.dxi.row(q) = g.col(0).transpose();
    t.deta.row(q) = g.col(1).transpose();
  }
  return t;
}

namespace {

Basis make_basis(int order, BasisKind kind, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  if (order < 0) throw std::invalid_argument("basis order must be >= 0");
  Basis b;
  b.kind = kind;
  b.order = order;
  b.table = tabulate(order, pts.rows() > 0 ? pts : cached_tensor_rule(order + 1).points);
  return b;
}

}  // namespace

Basis field_basis(int order, BasisKind kind, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  return make_basis(order, kind, pts);
}

Basis test_basis(int order, BasisKind kind, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts) {
  return make_basis(order, kind, pts);
}

std::array<Eigen::MatrixXd, 2> divergence_table(const Basis& b) {
  if (b.ncomp() != 4) throw std::invalid_argument("divergence_table: tensor basis required");
  const int nd = b.scalar_dim();
  const Eigen::Index nq = b.table.val.rows();
  std::array<Eigen::MatrixXd, 2> div{Eigen::MatrixXd::Zero(nq, b.dim()), Eigen::MatrixXd::Zero(nq, b.dim())};
  // components ordered M11, M12, M21, M22; (div M)_r = sum_j d_j M_rj
  for (int c = 0; c < 4; ++c) {
    const int r = c / 2, j = c % 2;
    div[r].middleCols(c * nd, nd) = j == 0 ? b.table.dxi : b.table.deta;
  }
  return div;
}

int edge_dim(EdgeFamily, int order) { return order + 1; }

Eigen::VectorXd edge_values(EdgeFamily family, int order, double t) {
  Eigen::VectorXd v(order + 1), d(order + 1);
  if (family == EdgeFamily::legendre)
    legendre<double>(order, t, v, d);
  else
    integrated_legendre<double>(order, t, v, d);
  return v;
}

EdgeBasis edge_basis(int order, EdgeFamily family, const Eigen::VectorXd& pts) {
  if (order < 0) throw std::invalid_argument("edge_basis: order must be >= 0");
  const Eigen::VectorXd& p = pts.size() > 0 ? pts : cached_gauss(order + 1).points;
  EdgeBasis b;
  b.family = family;
  b.order = order;
  b.val.resize(p.size(), order + 1);
  for (Eigen::Index q = 0; q < p.size(); ++q) b.val.row(q) = edge_values(family, order, p(q)).transpose();
  return b;
}

Eigen::MatrixXd restriction_matrix(EdgeFamily family, int order, double a, double b) {
  const GaussRule<double>& g = cached_gauss(order + 2);
  const int n = order + 1;
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(n, n), rhs = Eigen::MatrixXd::Zero(n, n);
  for (int q = 0; q < g.size(); ++q) {
    const Eigen::VectorXd loc = edge_values(family, order, g.points(q));
    const Eigen::VectorXd par = edge_values(family, order, a * g.points(q) + b);
    mass += g.weights(q) * loc * loc.transpose();
    rhs += g.weights(q) * loc * par.transpose();
  }
  return mass.llt().solve(rhs);
}

Eigen::MatrixXd constrain_edge_dofs(EdgeFamily family, int order, int child_index) {
  if (child_index != 0 && child_index != 1) throw std::invalid_argument("child_index must be 0 or 1");
  return restriction_matrix(family, order, 0.5, child_index == 0 ? -0.5 : 0.5);
}

const GaussRule<double>& cached_gauss(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule<double>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule<double>>(gauss_rule<double>(n));
  return *slot;
}

const QuadRule2D<double>& cached_tensor_rule(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<QuadRule2D<double>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadRule2D<double>>(tensor_rule<double>(n));
  return *slot;
}

}  // namespace vdpg
