#pragma once

#include <Eigen/Dense>
#include <array>

#include "vdpg/polynomials.hpp"
#include "vdpg/quadrature.hpp"

namespace vdpg {

struct PolyOrders {
  int p = 2;
  int dp = 2;
  int trace() const { return p + 1; }
  int flux() const { return p; }
  int test() const { return p + dp; }
  void validate() const;
};

enum class BasisKind {
  field_scalar,
  field_vector,
  field_tensor,
  field_symtensor,
  edge_scalar,
  test_scalar,
  test_vector,
  test_tensor,
  test_symtensor
};

int components(BasisKind kind);

// Tensor-product integrated-Legendre basis on [-1,1]^2, index i = a + (order+1) b.
template <typename Scalar>
void tensor_basis(int order, const Scalar& xi, const Scalar& eta,
                  Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> val,
                  Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 2>> grad) {
  const int n = order + 1;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> fx(n), dfx(n), fy(n), dfy(n);
  integrated_legendre<Scalar>(order, xi, fx, dfx);
  integrated_legendre<Scalar>(order, eta, fy, dfy);
  for (int b = 0; b < n; ++b)
    for (int a = 0; a < n; ++a) {
      const int i = a + n * b;
      val(i) = fx(a) * fy(b);
      grad(i, 0) = dfx(a) * fy(b);
      grad(i, 1) = fx(a) * dfy(b);
    }
}

// Scalar-basis tables at a set of reference points (rows).
struct BasisTable {
  int order = 0;
  Eigen::MatrixXd val;   // npts x dim
  Eigen::MatrixXd dxi;   // npts x dim
  Eigen::MatrixXd deta;  // npts x dim
  int dim() const { return static_cast<int>(val.cols()); }
};

BasisTable tabulate(int order, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts);

// A (possibly multi-component) basis: every component uses the same scalar table;
// global index = component * scalar_dim + i.
struct Basis {
  BasisKind kind = BasisKind::field_scalar;
  int order = 0;
  BasisTable table;
  int ncomp() const { return components(kind); }
  int scalar_dim() const { return table.dim(); }
  int dim() const { return ncomp() * scalar_dim(); }
};

Basis field_basis(int order, BasisKind kind = BasisKind::field_scalar,
                  const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts = {});
Basis test_basis(int order, BasisKind kind, const Eigen::Matrix<double, Eigen::Dynamic, 2>& pts = {});

// Row-wise divergence table of a tensor test basis: div(k)(q, j) is component k of the
// divergence of basis function j at point q.
std::array<Eigen::MatrixXd, 2> divergence_table(const Basis& tensor_basis);

// 1D edge bases. Flux variables use Legendre P_0..P_k; trace variables use the
// hierarchical vertex/bubble family so that vertex values are single DoFs.
enum class EdgeFamily { legendre, trace };

int edge_dim(EdgeFamily family, int order);
Eigen::VectorXd edge_values(EdgeFamily family, int order, double t);

struct EdgeBasis {
  EdgeFamily family = EdgeFamily::legendre;
  int order = 0;
  Eigen::MatrixXd val;  // npts x dim
  int dim() const { return static_cast<int>(val.cols()); }
};

EdgeBasis edge_basis(int order, EdgeFamily family = EdgeFamily::legendre, const Eigen::VectorXd& pts = {});

// Coefficients of the restriction of a polynomial in s to the sub-interval s = a t + b,
// expressed in the same basis in t: local = R * parent.
Eigen::MatrixXd restriction_matrix(EdgeFamily family, int order, double a, double b);

// Child 0 covers s in [-1,0], child 1 covers [0,1], both parametrized with increasing s.
Eigen::MatrixXd constrain_edge_dofs(EdgeFamily family, int order, int child_index);

// Cached reference rules.
const GaussRule<double>& cached_gauss(int n);
const QuadRule2D<double>& cached_tensor_rule(int n);

}  // namespace vdpg
