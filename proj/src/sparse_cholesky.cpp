#include "vdpg/sparse_cholesky.hpp"

#include <Eigen/OrderingMethods>
#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace vdpg {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Elimination tree of a symmetric pattern given as adjacency lists (Liu's algorithm).
std::vector<int> elimination_tree(const std::vector<std::vector<int>>& adj) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> parent(n, -1), ancestor(n, -1);
  for (int k = 0; k < n; ++k)
    for (int j : adj[k]) {
      if (j >= k) continue;
      for (int r = j; r != -1 && r != k;) {
        const int next = ancestor[r];
        ancestor[r] = k;
        if (next == -1) parent[r] = k;
        r = next;
      }
    }
  return parent;
}

std::vector<int> postorder(const std::vector<int>& parent) {
  const int n = static_cast<int>(parent.size());
  std::vector<std::vector<int>> children(n);
  std::vector<int> roots;
  for (int i = 0; i < n; ++i) (parent[i] < 0 ? roots : children[parent[i]]).push_back(i);
  std::vector<int> post;
  post.reserve(n);
  std::vector<std::pair<int, std::size_t>> stack;
  for (int root : roots) {
    stack.emplace_back(root, 0);
    while (!stack.empty()) {
      auto& [node, next] = stack.back();
      if (next < children[node].size()) {
        const int c = children[node][next++];
        stack.emplace_back(c, 0);
      } else {
        post.push_back(node);
        stack.pop_back();
      }
    }
  }
  return post;  // post[k] = node visited k-th
}

// First column of a dense block whose Cholesky breaks down.
Index failing_column(MatrixXd a) {
  for (Index j = 0; j < a.cols(); ++j) {
    const double d = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(d > 0)) return j;
    a(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < a.rows(); ++i) a(i, j) = (a(i, j) - a.row(i).head(j).dot(a.row(j).head(j))) / a(j, j);
  }
  return a.cols() - 1;
}

}  // namespace

void SparseCholesky::analyze(const SpMat& A, const std::vector<int>& group_start) {
  if (A.rows() != A.cols()) throw std::invalid_argument("SparseCholesky: matrix is not square");
  n_ = A.rows();
  std::vector<int> gs = group_start;
  if (gs.empty()) {
    gs.resize(n_ + 1);
    std::iota(gs.begin(), gs.end(), 0);
  }
  if (gs.front() != 0 || gs.back() != n_) throw std::invalid_argument("SparseCholesky: groups do not cover the matrix");
  const int ng = static_cast<int>(gs.size()) - 1;
  std::vector<int> group_of(n_);
  for (int g = 0; g < ng; ++g)
    for (int i = gs[g]; i < gs[g + 1]; ++i) group_of[i] = g;

  // Group graph and its AMD ordering.
  std::vector<std::vector<int>> adj(ng);
  for (Index c = 0; c < A.outerSize(); ++c)
    for (SpMat::InnerIterator it(A, c); it; ++it)
      if (it.row() > c) {
        const int a = group_of[it.row()], b = group_of[c];
        if (a != b) {
          adj[a].push_back(b);
          adj[b].push_back(a);
        }
      }
  std::vector<Eigen::Triplet<double>> trip;
  for (int g = 0; g < ng; ++g) {
    std::sort(adj[g].begin(), adj[g].end());
    adj[g].erase(std::unique(adj[g].begin(), adj[g].end()), adj[g].end());
    trip.emplace_back(g, g, 1.0);
    for (int h : adj[g]) trip.emplace_back(h, g, 1.0);
  }
  SpMat pattern(ng, ng);
  pattern.setFromTriplets(trip.begin(), trip.end());
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> amd;
  Eigen::AMDOrdering<int>()(pattern, amd);
  std::vector<int> order(ng);  // position -> group
  for (int k = 0; k < ng; ++k) order[k] = amd.indices()(k);

  // Etree in AMD order, then renumber by postorder (same fill, children precede parents).
  auto renumbered = [&](const std::vector<int>& ord) {
    std::vector<int> pos(ng);
    for (int k = 0; k < ng; ++k) pos[ord[k]] = k;
    std::vector<std::vector<int>> a(ng);
    for (int k = 0; k < ng; ++k) {
      for (int h : adj[ord[k]]) a[k].push_back(pos[h]);
      std::sort(a[k].begin(), a[k].end());
    }
    return a;
  };
  {
    const std::vector<int> post = postorder(elimination_tree(renumbered(order)));
    std::vector<int> o2(ng);
    for (int k = 0; k < ng; ++k) o2[k] = order[post[k]];
    order.swap(o2);
  }
  const std::vector<std::vector<int>> padj = renumbered(order);
  const std::vector<int> parent = elimination_tree(padj);

  // Scalar permutation.
  std::vector<int> size(ng), start(ng + 1, 0);
  perm_.clear();
  perm_.reserve(n_);
  for (int k = 0; k < ng; ++k) {
    const int g = order[k];
    size[k] = gs[g + 1] - gs[g];
    start[k + 1] = start[k] + size[k];
    for (int i = gs[g]; i < gs[g + 1]; ++i) perm_.push_back(i);
  }
  iperm_.assign(n_, 0);
  for (Index k = 0; k < n_; ++k) iperm_[perm_[k]] = static_cast<int>(k);

  // Group structures (rows strictly below) by union over children.
  std::vector<std::vector<int>> gstruct(ng);
  std::vector<int> scalar_rows(ng, 0);
  for (int k = 0; k < ng; ++k) {
    std::vector<int>& s = gstruct[k];
    for (int h : padj[k])
      if (h > k) s.push_back(h);
    std::sort(s.begin(), s.end());
  }
  {
    std::vector<std::vector<int>> children(ng);
    for (int k = 0; k < ng; ++k)
      if (parent[k] >= 0) children[parent[k]].push_back(k);
    for (int k = 0; k < ng; ++k) {
      std::vector<int>& s = gstruct[k];
      for (int c : children[k]) {
        std::vector<int> merged;
        merged.reserve(s.size() + gstruct[c].size());
        std::set_union(s.begin(), s.end(), gstruct[c].begin(), gstruct[c].end(), std::back_inserter(merged));
        s.swap(merged);
      }
      s.erase(std::remove_if(s.begin(), s.end(), [k](int h) { return h <= k; }), s.end());
      for (int h : s) scalar_rows[k] += size[h];
    }
  }

  // Supernodes: merge a group into the one ending just before it when that is its child
  // and the extra explicit zeros stay small (relaxed amalgamation).
  std::vector<int> snode_of(ng, -1);
  std::vector<int> sn_first_group, sn_last_group;
  std::vector<double> sn_zeros;
  for (int k = 0; k < ng; ++k) {
    bool merge = false;
    if (k > 0 && parent[k - 1] == k) {
      const int s = snode_of[k - 1];
      const double kS = start[k] - start[sn_first_group[s]], kg = size[k];
      const double extra = kS * (kg + scalar_rows[k] - scalar_rows[k - 1]);
      const double total = (kS + kg) * (kS + kg + 1) / 2 + (kS + kg) * scalar_rows[k];
      const double zeros = sn_zeros[s] + extra;
      merge = extra == 0 || kS + kg <= 16 || zeros <= 0.1 * total;
      if (merge) {
        sn_zeros[s] = zeros;
        sn_last_group[s] = k;
        snode_of[k] = s;
      }
    }
    if (!merge) {
      snode_of[k] = static_cast<int>(sn_first_group.size());
      sn_first_group.push_back(k);
      sn_last_group.push_back(k);
      sn_zeros.push_back(0);
    }
  }
  snodes_.assign(sn_first_group.size(), {});
  stats_ = {};
  stats_.n = n_;
  stats_.supernodes = static_cast<Index>(snodes_.size());
  for (std::size_t s = 0; s < snodes_.size(); ++s) {
    Supernode& sn = snodes_[s];
    const int top = sn_last_group[s];
    sn.first = start[sn_first_group[s]];
    sn.ncols = start[top + 1] - sn.first;
    for (int h : gstruct[top])
      for (int i = start[h]; i < start[h + 1]; ++i) sn.rows.push_back(i);
    if (parent[top] >= 0) {
      sn.parent = snode_of[parent[top]];
      ++snodes_[sn.parent].nchildren;
    }
    const double k = sn.ncols, r = static_cast<double>(sn.rows.size());
    stats_.factor_entries += k * (k + 1) / 2 + k * r;
    stats_.flops += k * k * k / 3 + r * k * k + r * r * k;
  }
  ok_ = false;
}

bool SparseCholesky::factorize(const SpMat& A) {
  if (A.rows() != n_) throw std::invalid_argument("SparseCholesky: factorize before analyze");
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic, int> P(static_cast<int>(n_));
  for (Index i = 0; i < n_; ++i) P.indices()(i) = iperm_[i];
  SpMat C(n_, n_);
  C.selfadjointView<Eigen::Lower>() = A.selfadjointView<Eigen::Lower>().twistedBy(P);

  ok_ = true;
  failed_pivot_ = -1;
  message_.clear();
  std::vector<int> pos(n_, -1);
  struct Update {
    MatrixXd U;
    const std::vector<int>* rows;
  };
  std::vector<Update> stack;
  for (Supernode& sn : snodes_) {
    const int k = sn.ncols, r = static_cast<int>(sn.rows.size()), m = k + r;
    for (int j = 0; j < k; ++j) pos[sn.first + j] = j;
    for (int i = 0; i < r; ++i) pos[sn.rows[i]] = k + i;
    MatrixXd F = MatrixXd::Zero(m, m);
    for (int j = 0; j < k; ++j)
      for (SpMat::InnerIterator it(C, sn.first + j); it; ++it)
        if (it.row() >= sn.first + j) F(pos[it.row()], j) += it.value();
    for (int c = 0; c < sn.nchildren; ++c) {
      const Update& up = stack.back();
      const std::vector<int>& rows = *up.rows;
      const int ru = static_cast<int>(rows.size());
      for (int b = 0; b < ru; ++b) {
        const int pb = pos[rows[b]];
        for (int a = b; a < ru; ++a) F(pos[rows[a]], pb) += up.U(a, b);
      }
      stack.pop_back();
    }
    Eigen::LLT<MatrixXd> llt(F.topLeftCorner(k, k));
    if (llt.info() != Eigen::Success) {
      ok_ = false;
      const Index col = failing_column(F.topLeftCorner(k, k));
      failed_pivot_ = perm_[sn.first + col];
      message_ = "non-positive pivot at row " + std::to_string(failed_pivot_) + " of the matrix";
      return false;
    }
    sn.L.resize(m, k);
    sn.L.topRows(k) = llt.matrixL();
    if (r > 0) {
      sn.L.bottomRows(r) = F.bottomLeftCorner(r, k);
      llt.matrixU().solveInPlace<Eigen::OnTheRight>(sn.L.bottomRows(r));
      MatrixXd U = F.bottomRightCorner(r, r);
      U.selfadjointView<Eigen::Lower>().rankUpdate(sn.L.bottomRows(r), -1.0);
      stack.push_back({std::move(U), &sn.rows});
    }
    for (int j = 0; j < k; ++j) pos[sn.first + j] = -1;
    for (int i = 0; i < r; ++i) pos[sn.rows[i]] = -1;
  }
  return true;
}

VectorXd SparseCholesky::solve(const VectorXd& b) const {
  if (!ok_) throw std::logic_error("SparseCholesky: solve without a successful factorization");
  VectorXd y(n_);
  for (Index k = 0; k < n_; ++k) y(k) = b(perm_[k]);
  VectorXd tmp;
  for (const Supernode& sn : snodes_) {
    const int k = sn.ncols, r = static_cast<int>(sn.rows.size());
    auto yc = y.segment(sn.first, k);
    sn.L.topRows(k).triangularView<Eigen::Lower>().solveInPlace(yc);
    if (r > 0) {
      tmp.noalias() = sn.L.bottomRows(r) * yc;
      for (int i = 0; i < r; ++i) y(sn.rows[i]) -= tmp(i);
    }
  }
  for (auto it = snodes_.rbegin(); it != snodes_.rend(); ++it) {
    const Supernode& sn = *it;
    const int k = sn.ncols, r = static_cast<int>(sn.rows.size());
    auto yc = y.segment(sn.first, k);
    if (r > 0) {
      tmp.resize(r);
      for (int i = 0; i < r; ++i) tmp(i) = y(sn.rows[i]);
      yc.noalias() -= sn.L.bottomRows(r).transpose() * tmp;
    }
    sn.L.topRows(k).triangularView<Eigen::Lower>().transpose().solveInPlace(yc);
  }
  VectorXd x(n_);
  for (Index k = 0; k < n_; ++k) x(perm_[k]) = y(k);
  return x;
}

VectorXd SparseCholesky::solve_refined(const SpMat& A, const VectorXd& b, double tol, int rounds,
                                       double* rel_residual) const {
  VectorXd x = solve(b);
  const double bn = b.norm();
  double rel = 0;
  for (int it = 0;; ++it) {
    const VectorXd res = b - A.selfadjointView<Eigen::Lower>() * x;
    rel = bn > 0 ? res.norm() / bn : res.norm();
    if (rel <= tol || it >= rounds) break;
    x += solve(res);
  }
  if (rel_residual) *rel_residual = rel;
  return x;
}

}  // namespace vdpg
