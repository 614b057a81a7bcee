#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <string>
#include <vector>

namespace vdpg {

// Supernodal multifrontal Cholesky factorization A = L L^T of a sparse SPD matrix.
// The symbolic phase works on groups of unknowns (contiguous index ranges that are
// coupled densely, e.g. the DoFs of one edge); the ordering is AMD on the group graph.
// Only the lower triangle of the input is read.
class SparseCholesky {
 public:
  using SpMat = Eigen::SparseMatrix<double>;

  struct Stats {
    Eigen::Index n = 0, supernodes = 0;
    double factor_entries = 0, flops = 0;
  };

  // group_start: ascending range boundaries with front() == 0 and back() == n; empty
  // means one group per unknown.
  void analyze(const SpMat& A, const std::vector<int>& group_start = {});
  // Returns false on a non-positive pivot; failed_pivot() then holds its row of A.
  bool factorize(const SpMat& A);
  bool compute(const SpMat& A, const std::vector<int>& group_start = {}) {
    analyze(A, group_start);
    return factorize(A);
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const;
  // Solve with up to `rounds` steps of iterative refinement until ||Ax-b|| <= tol ||b||.
  Eigen::VectorXd solve_refined(const SpMat& A, const Eigen::VectorXd& b, double tol = 1e-10, int rounds = 3,
                                double* rel_residual = nullptr) const;

  bool ok() const { return ok_; }
  Eigen::Index failed_pivot() const { return failed_pivot_; }
  const std::string& message() const { return message_; }
  const Stats& stats() const { return stats_; }
  // perm()[k] = original index of the k-th eliminated unknown.
  const std::vector<int>& perm() const { return perm_; }

 private:
  struct Supernode {
    int first = 0, ncols = 0;
    std::vector<int> rows;  // permuted indices below the diagonal block, ascending
    int parent = -1, nchildren = 0;
    Eigen::MatrixXd L;      // (ncols + rows) x ncols
  };

  Eigen::Index n_ = 0;
  std::vector<int> perm_, iperm_;
  std::vector<Supernode> snodes_;
  bool ok_ = false;
  Eigen::Index failed_pivot_ = -1;
  std::string message_;
  Stats stats_;
};

}  // namespace vdpg
