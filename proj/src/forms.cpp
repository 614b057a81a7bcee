#include "vdpg/forms.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <tuple>

namespace vdpg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

Layout::Layout(const PolyOrders& o) : orders(o) {
  o.validate();
  nf = (o.p + 1) * (o.p + 1);
  nt = (o.test() + 1) * (o.test() + 1);
  ntr = o.trace() + 1;
  nfl = o.flux() + 1;
  side_dim = 2 * ntr + 5 * nfl;
}

namespace {

// Reference tables keyed by (order, points per direction, side or -1 for the volume).
const BasisTable& cached_table(int order, int n, int side) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<BasisTable>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{order, n, side}];
  if (!slot) {
    if (side < 0) {
      slot = std::make_unique<BasisTable>(tabulate(order, cached_tensor_rule(n).points));
    } else {
      const GaussRule<double>& g = cached_gauss(n);
      Eigen::Matrix<double, Eigen::Dynamic, 2> pts(n, 2);
      for (int q = 0; q < n; ++q) pts.row(q) = side_point(side, g.points(q)).transpose();
      slot = std::make_unique<BasisTable>(tabulate(order, pts));
    }
  }
  return *slot;
}

const EdgeBasis& cached_edge(EdgeFamily fam, int order, int n) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::unique_ptr<EdgeBasis>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto& slot = cache[{static_cast<int>(fam), order, n}];
  if (!slot) slot = std::make_unique<EdgeBasis>(edge_basis(order, fam, cached_gauss(n).points));
  return *slot;
}

int quad_points(const Mesh& mesh, int elem, const PolyOrders& o) {
  return element_quadrature_points(mesh, elem, o.p + o.dp + 2);
}

}  // namespace

ElementQuadrature element_quadrature(const Mesh& mesh, int elem, const PolyOrders& orders) {
  const int n = quad_points(mesh, elem, orders);
  const QuadRule2D<double>& rule = cached_tensor_rule(n);
  ElementQuadrature eq;
  eq.npts = rule.size();
  eq.ref = rule.points;
  eq.w.resize(eq.npts);
  eq.x.resize(eq.npts, 2);
  eq.Jinv.resize(eq.npts);
  for (int q = 0; q < eq.npts; ++q) {
    const MapPoint mp = ref_map_eval(mesh, elem, rule.points(q, 0), rule.points(q, 1));
    const double det = mp.J.determinant();
    if (!(det > 0)) throw std::runtime_error("non-positive Jacobian in element " + std::to_string(elem));
    eq.w(q) = rule.weights(q) * det;
    eq.x.row(q) = mp.x.transpose();
    eq.Jinv[q] = mp.J.inverse();
  }
  const GaussRule<double>& g = cached_gauss(n);
  for (int s = 0; s < 4; ++s) {
    ElementQuadrature::Side& sd = eq.sides[s];
    sd.t = g.points;
    sd.ref.resize(n, 2);
    sd.w.resize(n);
    sd.x.resize(n, 2);
    sd.n.resize(n, 2);
    for (int q = 0; q < n; ++q) {
      const Eigen::Vector2d r = side_point(s, g.points(q));
      const MapPoint mp = ref_map_eval(mesh, elem, r.x(), r.y());
      const Eigen::Vector2d tan = mp.J * side_direction(s);
      const double len = tan.norm();
      sd.ref.row(q) = r.transpose();
      sd.w(q) = g.weights(q) * len;
      sd.x.row(q) = mp.x.transpose();
      sd.n.row(q) << tan.y() / len, -tan.x() / len;
    }
  }
  return eq;
}

Eigen::Matrix<double, comp::count, 1> eval_field_components(const Layout& lay, const VectorXd& coeffs, double xi,
                                                            double eta) {
  VectorXd val(lay.nf);
  Eigen::Matrix<double, Eigen::Dynamic, 2> grad(lay.nf, 2);
  tensor_basis<double>(lay.orders.p, xi, eta, val, grad);
  Eigen::Matrix<double, comp::count, 1> c;
  for (int k = 0; k < comp::count; ++k) c(k) = coeffs.segment(lay.field(k), lay.nf).dot(val);
  return c;
}

FieldState<double> eval_fields(const Layout& lay, const VectorXd& coeffs, double xi, double eta) {
  return FieldState<double>::from_components(eval_field_components(lay, coeffs, xi, eta));
}

LocalForms local_forms(const Mesh& mesh, int elem, const ModelParams& m, const VectorXd& bg,
                       const PolyOrders& orders, const LocalExtras& extras) {
  const Layout lay(orders);
  const int nf = lay.nf, nt = lay.nt, NC = comp::count;
  if (bg.size() != lay.fields()) throw std::invalid_argument("local_forms: background has wrong size");
  const int n = quad_points(mesh, elem, orders);
  const ElementQuadrature eq = element_quadrature(mesh, elem, orders);
  const int nq = eq.npts;
  const BasisTable& tt = cached_table(orders.test(), n, -1);
  const BasisTable& ft = cached_table(orders.p, n, -1);
  const auto& W = pairing_weights();
  const Eigen::Matrix<double, NC, 1> gw = graph_group_weights(m);

  // Physical test gradients.
  MatrixXd dx(nq, nt), dy(nq, nt);
  for (int q = 0; q < nq; ++q) {
    const Eigen::Matrix2d& Ji = eq.Jinv[q];
    dx.row(q) = Ji(0, 0) * tt.dxi.row(q) + Ji(1, 0) * tt.deta.row(q);
    dy.row(q) = Ji(0, 1) * tt.dxi.row(q) + Ji(1, 1) * tt.deta.row(q);
  }
  // Background at quadrature points.
  MatrixXd bgq(nq, NC);
  for (int c = 0; c < NC; ++c) bgq.col(c) = ft.val * bg.segment(lay.field(c), nf);
  bgq.col(comp::p).setZero();

  // Probe the kernels with unit jets: coef[c][d](o, q) and load coefficients.
  std::array<std::array<MatrixXd, 3>, NC> coef;
  std::array<MatrixXd, 3> rv;
  for (int d = 0; d < 3; ++d) rv[d] = MatrixXd::Zero(nq, NC);
  for (int c = 0; c < NC; ++c)
    for (int d = 0; d < 3; ++d) coef[c][d] = MatrixXd::Zero(NC, nq);
  for (int q = 0; q < nq; ++q) {
    const FieldState<double> s = FieldState<double>::from_components(bgq.row(q).transpose());
    for (int c = 0; c < NC; ++c)
      for (int d = 0; d < 3; ++d) {
        TestJet<double> jet;
        if (d == 0)
          jet.val(c) = 1;
        else
          jet.grad(c, d - 1) = 1;
        // Symmetric slots: S12 is a single function feeding both off-diagonal entries.
        coef[c][d].col(q) = adjoint_groups(m, s, jet);
        rv[d](q, c) = nonlinear_field_integrand(m, s, jet);
      }
  }
  // Active (output, test component) pairs.
  std::array<std::vector<int>, NC> active;
  for (int o = 0; o < NC; ++o)
    for (int c = 0; c < NC; ++c) {
      double mx = 0;
      for (int d = 0; d < 3; ++d) mx = std::max(mx, coef[c][d].row(o).cwiseAbs().maxCoeff());
      if (mx > 0) active[o].push_back(c);
    }

  int npen = 0;
  std::vector<int> pen_sides;
  if (extras.penalty_T12 > 0)
    for (int s = 0; s < 4; ++s)
      if (mesh.edges[mesh.elements[elem].side[s]].tag == BoundaryTag::reflective) {
        pen_sides.push_back(s);
        npen += n;
      }

  LocalForms out;
  out.ntest = lay.test();
  out.B = MatrixXd::Zero(lay.test() + npen, lay.trial());
  out.G = MatrixXd::Zero(lay.test() + npen, lay.test() + npen);
  out.l = VectorXd::Zero(lay.test() + npen);
  const VectorXd& wq = eq.w;
  const VectorXd sw = wq.cwiseSqrt();

  for (int o = 0; o < NC; ++o) {
    const std::vector<int>& cs = active[o];
    if (cs.empty()) continue;
    const int k = static_cast<int>(cs.size());
    MatrixXd A(nq, k * nt);
    for (int j = 0; j < k; ++j) {
      const int c = cs[j];
      auto blk = A.middleCols(j * nt, nt);
      blk = coef[c][0].row(o).transpose().asDiagonal() * tt.val;
      blk += coef[c][1].row(o).transpose().asDiagonal() * dx;
      blk += coef[c][2].row(o).transpose().asDiagonal() * dy;
    }
    // Field columns of B: w_o * A^T diag(w) Phi.
    const MatrixXd Bo = W(o) * A.transpose() * (wq.asDiagonal() * ft.val);
    for (int j = 0; j < k; ++j) out.B.block(cs[j] * nt, lay.field(o), nt, nf) += Bo.middleRows(j * nt, nt);
    // Graph-norm Gram.
    const MatrixXd As = std::sqrt(gw(o)) * (sw.asDiagonal() * A);
    MatrixXd Go = MatrixXd::Zero(k * nt, k * nt);
    Go.selfadjointView<Eigen::Lower>().rankUpdate(As.transpose());
    Go.triangularView<Eigen::StrictlyUpper>() = Go.transpose();
    for (int a = 0; a < k; ++a)
      for (int b = 0; b < k; ++b) out.G.block(cs[a] * nt, cs[b] * nt, nt, nt) += Go.block(a * nt, b * nt, nt, nt);
  }
  // L2 part of the test norm.
  const MatrixXd mass = tt.val.transpose() * wq.asDiagonal() * tt.val;
  for (int c = 0; c < NC; ++c) out.G.block(c * nt, c * nt, nt, nt) += W(c) * mass;

  // Load: body force minus the nonlinear field form at the background.
  for (int c = 0; c < NC; ++c) {
    const VectorXd a0 = wq.cwiseProduct(rv[0].col(c)), a1 = wq.cwiseProduct(rv[1].col(c)),
                   a2 = wq.cwiseProduct(rv[2].col(c));
    out.l.segment(c * nt, nt) -= tt.val.transpose() * a0 + dx.transpose() * a1 + dy.transpose() * a2;
  }
  if (m.rho != 0 && m.f.squaredNorm() > 0)
    for (int c = 0; c < 2; ++c) out.l.segment(c * nt, nt) += m.rho * m.f(c) * (tt.val.transpose() * wq);
  if (extras.source) {
    MatrixXd src(nq, NC);
    for (int q = 0; q < nq; ++q) src.row(q) = (*extras.source)(eq.x.row(q).transpose()).transpose();
    for (int c = 0; c < NC; ++c) out.l.segment(c * nt, nt) += W(c) * (tt.val.transpose() * wq.cwiseProduct(src.col(c)));
  }

  // Interface terms.
  const EdgeBasis& trb = cached_edge(EdgeFamily::trace, orders.trace(), n);
  const EdgeBasis& flb = cached_edge(EdgeFamily::legendre, orders.flux(), n);
  for (int s = 0; s < 4; ++s) {
    const ElementQuadrature::Side& sd = eq.sides[s];
    const MatrixXd& phi = cached_table(orders.test(), n, s).val;  // n x nt
    const int off = lay.side(s);
    const VectorXd& w = sd.w;
    const VectorXd nx = sd.n.col(0), ny = sd.n.col(1);
    auto add = [&](int test_comp, int col, const MatrixXd& basis, const VectorXd& coefq) {
      out.B.block(test_comp * nt, col, nt, basis.cols()) += phi.transpose() * coefq.asDiagonal() * basis;
    };
    const std::array<VectorXd, 2> nn = {nx, ny};
    const std::array<VectorXd, 2> tau = {-ny, nx};
    for (int c = 0; c < 2; ++c) {
      const int col = off + lay.u_hat(c);
      // -<u_hat, M n>: M_{c d} n_d
      for (int d = 0; d < 2; ++d) add(comp::M11 + 2 * c + d, col, trb.val, -w.cwiseProduct(nn[d]));
      // +<u_hat . n, q>
      add(comp::q, col, trb.val, w.cwiseProduct(nn[c]));
      // -<t_hat, v> with t_hat = tn n + tt tau
      add(comp::v1 + c, off + lay.t_hat(0), flb.val, -w.cwiseProduct(nn[c]));
      add(comp::v1 + c, off + lay.t_hat(1), flb.val, -w.cwiseProduct(tau[c]));
    }
    // +lambda <j_hat, S>
    for (int c = 0; c < 3; ++c) add(comp::S11 + c, off + lay.j_hat(c), flb.val, m.lambda * W(comp::S11 + c) * w);
  }

  // Penalty rows sqrt(weight * w_q) (T12_0 + dT12)(x_q) on reflective sides.
  int row = lay.test();
  for (int s : pen_sides) {
    const MatrixXd& fphi = cached_table(orders.p, n, s).val;  // n x nf
    const VectorXd& w = eq.sides[s].w;
    const VectorXd t12 = fphi * bg.segment(lay.field(comp::T12), nf);
    for (int q = 0; q < n; ++q) {
      const double a = std::sqrt(extras.penalty_T12 * w(q));
      out.B.block(row, lay.field(comp::T12), 1, nf) = a * fphi.row(q);
      out.l(row) = -a * t12(q);
      out.G(row, row) = 1;
      ++row;
    }
  }
  return out;
}

MatrixXd local_B(const Mesh& mesh, int elem, const ModelParams& m, const VectorXd& bg, const PolyOrders& orders) {
  return local_forms(mesh, elem, m, bg, orders).B;
}

MatrixXd local_gram(const Mesh& mesh, int elem, const ModelParams& m, const VectorXd& bg, const PolyOrders& orders) {
  return local_forms(mesh, elem, m, bg, orders).G;
}

VectorXd local_nonlinear_load(const Mesh& mesh, int elem, const ModelParams& m, const VectorXd& bg,
                              const PolyOrders& orders, const LocalExtras& extras) {
  return local_forms(mesh, elem, m, bg, orders, extras).l;
}

double giesekus_linearization_check(const ModelParams& m, const Eigen::Matrix2d& T0, const Eigen::Matrix2d& dT,
                                    int samples, unsigned seed) {
  const double c = m.alpha * m.lambda / m.eta_p;
  auto f = [&](const Eigen::Matrix2d& T) -> Eigen::Matrix2d { return c * T * T; };
  const Eigen::Matrix2d D = c * (T0 * dT + dT * T0);
  // Central differences with one Richardson step.
  auto fd = [&](double h) -> Eigen::Matrix2d { return (f(T0 + h * dT) - f(T0 - h * dT)) / (2 * h); };
  const double h = 1e-3;
  const Eigen::Matrix2d rich = (4 * fd(h / 2) - fd(h)) / 3;
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  double worst = 0;
  for (int k = 0; k < samples; ++k) {
    const double a = U(gen), b = U(gen), d = U(gen);
    Eigen::Matrix2d S;
    S << a, b, b, d;
    worst = std::max(worst, std::abs((D.array() * S.array()).sum() - (rich.array() * S.array()).sum()));
  }
  return worst;
}

double dual_norm_split_check(int dim, unsigned seed) {
  if (dim < 2) throw std::invalid_argument("dual_norm_split_check: dim must be >= 2");
  std::mt19937 gen(seed);
  std::normal_distribution<double> N(0, 1);
  auto rnd = [&](int r, int c) {
    MatrixXd a(r, c);
    for (int i = 0; i < a.size(); ++i) a(i) = N(gen);
    return a;
  };
  const MatrixXd X = rnd(dim, dim);
  const MatrixXd G = X * X.transpose() + dim * MatrixXd::Identity(dim, dim);
  const int k = 1 + static_cast<int>(gen() % static_cast<unsigned>(dim - 1));
  const MatrixXd Q = rnd(dim, k);                                  // basis of M
  // Basis of the G-orthogonal complement N: vectors orthogonal to G Q.
  const MatrixXd P = Eigen::HouseholderQR<MatrixXd>(G * Q).householderQ() * MatrixXd::Identity(dim, dim);
  const MatrixXd Nb = P.rightCols(dim - k);
  const VectorXd l = rnd(dim, 1);
  auto dual2 = [](const MatrixXd& basis, const MatrixXd& gram, const VectorXd& func) {
    const MatrixXd Gs = basis.transpose() * gram * basis;
    const VectorXd ls = basis.transpose() * func;
    return ls.dot(Gs.llt().solve(ls));
  };
  const double total = l.dot(G.llt().solve(l));
  const double split = dual2(Q, G, l) + dual2(Nb, G, l);
  return std::abs(total - split) / total;
}

}  // namespace vdpg
