#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <stdexcept>
#include <string>
#include <vector>

#include "vdpg/dofmap.hpp"
#include "vdpg/forms.hpp"
#include "vdpg/sparse_cholesky.hpp"

namespace vdpg {

// Raised when a local Gram matrix or field block is not positive definite.
struct GramError : std::runtime_error {
  int elem;
  GramError(int e, const std::string& what) : std::runtime_error(what), elem(e) {}
};

// Optimal-test data of one element: with G = L L^T, W = L^{-1} B and y = L^{-1} l, so that
// B^T G^{-1} B = W^T W and B^T G^{-1} l = W^T y.
struct CondensedLocal {
  Eigen::MatrixXd W;
  Eigen::VectorXd y;
  Eigen::MatrixXd A;  // W^T W
  Eigen::VectorXd f;  // W^T y
};

// Throws GramError(elem) when G is not SPD.
CondensedLocal condense_local(const Eigen::MatrixXd& B, const Eigen::MatrixXd& G, const Eigen::VectorXd& l,
                              int elem = -1);

struct LocalSystem {
  int elem = -1;
  int ntest = 0;                        // rows of W belonging to the test space (penalty rows follow)
  Eigen::MatrixXd W;
  Eigen::VectorXd y;
  Eigen::LLT<Eigen::MatrixXd> field_llt;  // fields x fields block of W^T W
  Eigen::MatrixXd A_fi;                 // fields x interface block
  Eigen::VectorXd f_f;
  Eigen::MatrixXd K;                    // interface Schur complement
  Eigen::VectorXd r;                    // interface right-hand side
  Eigen::VectorXd pressure_weights;     // int_K phi_i for the scalar field basis
  Eigen::MatrixXd field_mass;           // int_K phi_i phi_j
  double area = 0;
};

// Per-element field coefficients (indexed by element id; empty for inactive elements).
using FieldVectors = std::vector<Eigen::VectorXd>;

std::vector<LocalSystem> build_locals(const Mesh& mesh, const DofMap& dm, const ModelParams& m,
                                      const FieldVectors& background, const LocalExtras& extras = {});

struct GlobalSystem {
  Eigen::SparseMatrix<double> A;  // lower triangle
  Eigen::VectorXd b;
  double nullspace_consistency = 0;  // |z^T b| / (|z| |b|) for the pressure null vector z (0 without gauge)
};

GlobalSystem assemble_global(const DofMap& dm, const std::vector<LocalSystem>& locals);

struct DiscreteSolution {
  Eigen::VectorXd interface;  // all interface DoFs (fixed values included)
  FieldVectors fields;        // element field coefficients (p full, other fields as solved for)
};

struct SolveInfo {
  double rel_residual = 0;
  double nullspace_consistency = 0;
  double pressure_shift = 0;
  Eigen::Index n = 0;
};

// Factorizes (analysing on first use of `chol` for this pattern), solves and back-substitutes.
// The pinned pressure gauge is removed by shifting to zero mean pressure.
// Throws std::runtime_error on a failed factorization (message names the pivot).
DiscreteSolution solve_global(const DofMap& dm, const std::vector<LocalSystem>& locals, const GlobalSystem& sys,
                              SparseCholesky& chol, bool analyze, SolveInfo* info = nullptr);

// Field coefficients of an element given its local interface vector.
Eigen::VectorXd back_substitute(const LocalSystem& ls, const Eigen::VectorXd& interface_local);

struct ErrorIndicators {
  std::vector<double> eta;  // by element id (0 for inactive)
  double total = 0;         // sqrt of the sum of squares
};

// eta_K^2 = |y - W u_K|^2 over the test rows (penalty rows excluded).
double local_residual_sq(const LocalSystem& ls, const Eigen::VectorXd& u_local);
ErrorIndicators energy_indicators(const DofMap& dm, const std::vector<LocalSystem>& locals,
                                  const DiscreteSolution& sol);
// Same functional including penalty rows (the quantity minimized by the solve).
double total_objective(const DofMap& dm, const std::vector<LocalSystem>& locals, const DiscreteSolution& sol);

// Element trial vector [fields, interface].
Eigen::VectorXd local_trial(const DofMap& dm, int elem, const DiscreteSolution& sol);

// Worst relative decrease of the minimized functional over random admissible perturbations
// (>= -tol means no perturbation improves on the solution).
double residual_optimality_check(const DofMap& dm, const std::vector<LocalSystem>& locals,
                                 const DiscreteSolution& sol, int trials, unsigned seed = 1);

// sum_K (l_K - B_K u_K)^T G_K^{-1} (l_K - B_K u_K), recomputed from freshly built forms with
// an LU solve (independent of the stored Cholesky data).
double direct_residual_sq(const Mesh& mesh, const DofMap& dm, const ModelParams& m, const FieldVectors& background,
                          const DiscreteSolution& sol, const LocalExtras& extras = {});

// Matrix Market export of a lower-triangular symmetric matrix.
void write_matrix_market(const Eigen::SparseMatrix<double>& A, const std::string& path);

}  // namespace vdpg
