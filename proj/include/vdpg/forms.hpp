#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "vdpg/geometry.hpp"
#include "vdpg/kernels.hpp"
#include "vdpg/model.hpp"
#include "vdpg/spaces.hpp"

namespace vdpg {

// Block layout of the element-local trial and test vectors.
//   trial: [10 field components x nf] then 4 sides x [u1, u2 (trace), tn, tt, j11, j12, j22 (flux)]
//   test:  10 components x nt, ordered v1 v2 q M11 M12 M21 M22 S11 S12 S22
struct Layout {
  PolyOrders orders;
  int nf = 0;      // scalar field basis size
  int nt = 0;      // scalar test basis size
  int ntr = 0;     // trace basis size on one side
  int nfl = 0;     // flux basis size on one side
  int side_dim = 0;

  explicit Layout(const PolyOrders& o = {});
  int fields() const { return comp::count * nf; }
  int interface() const { return 4 * side_dim; }
  int trial() const { return fields() + interface(); }
  int test() const { return comp::count * nt; }
  int field(int c, int i = 0) const { return c * nf + i; }
  int side(int s) const { return fields() + s * side_dim; }
  // Offsets inside one side block.
  int u_hat(int c) const { return c * ntr; }
  int t_hat(int c) const { return 2 * ntr + c * nfl; }  // c = 0: normal, 1: tangential
  int j_hat(int c) const { return 2 * ntr + 2 * nfl + c * nfl; }
};

// Quadrature data of one element in physical space.
struct ElementQuadrature {
  int npts = 0;
  Eigen::Matrix<double, Eigen::Dynamic, 2> ref;  // reference points
  Eigen::VectorXd w;                             // weight * det J
  Eigen::Matrix<double, Eigen::Dynamic, 2> x;
  std::vector<Eigen::Matrix2d> Jinv;
  struct Side {
    Eigen::VectorXd t;                             // side parameter
    Eigen::Matrix<double, Eigen::Dynamic, 2> ref;  // reference points
    Eigen::VectorXd w;                             // weight * |dx/dt|
    Eigen::Matrix<double, Eigen::Dynamic, 2> x, n;  // points, outward unit normals
  };
  std::array<Side, 4> sides;
};

ElementQuadrature element_quadrature(const Mesh& mesh, int elem, const PolyOrders& orders);

// Values of the trial fields of an element at a reference point.
FieldState<double> eval_fields(const Layout& lay, const Eigen::VectorXd& coeffs, double xi, double eta);
Eigen::Matrix<double, comp::count, 1> eval_field_components(const Layout& lay, const Eigen::VectorXd& coeffs,
                                                            double xi, double eta);

// Optional extras of the local problem.
struct LocalExtras {
  const SourceFn* source = nullptr;  // manufactured sources
  double penalty_T12 = 0;            // weight of int_{reflective} T12^2
};

struct LocalForms {
  Eigen::MatrixXd B;  // test x trial (plus penalty rows at the bottom)
  Eigen::MatrixXd G;  // Gram of the graph norm (identity block for penalty rows)
  Eigen::VectorXd l;
  int ntest = 0;      // rows belonging to the DPG test space proper
};

// B, G and l of the Gauss-Newton step at background `bg` (field coefficients).
LocalForms local_forms(const Mesh& mesh, int elem, const ModelParams& m, const Eigen::VectorXd& bg,
                       const PolyOrders& orders, const LocalExtras& extras = {});

Eigen::MatrixXd local_B(const Mesh& mesh, int elem, const ModelParams& m, const Eigen::VectorXd& bg,
                        const PolyOrders& orders);
Eigen::MatrixXd local_gram(const Mesh& mesh, int elem, const ModelParams& m, const Eigen::VectorXd& bg,
                           const PolyOrders& orders);
Eigen::VectorXd local_nonlinear_load(const Mesh& mesh, int elem, const ModelParams& m, const Eigen::VectorXd& bg,
                                     const PolyOrders& orders, const LocalExtras& extras = {});

// max over random symmetric S of |<D_T[a (lam/eta_p) T^2](dT), S> - central FD|.
double giesekus_linearization_check(const ModelParams& m, const Eigen::Matrix2d& T0, const Eigen::Matrix2d& dT,
                                    int samples = 20, unsigned seed = 1);

// Relative error of ||l||^2 = ||l|_M||^2 + ||l|_N||^2 for a random SPD metric on R^dim,
// a random G-orthogonal split M + N and a random functional.
double dual_norm_split_check(int dim, unsigned seed);

}  // namespace vdpg
