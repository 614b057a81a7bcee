#include "vdpg/nonlinear.hpp"

#include <chrono>
#include <cmath>

namespace vdpg {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string to_string(RateVerdict v) {
  switch (v) {
    case RateVerdict::quadratic: return "true";
    case RateVerdict::not_quadratic: return "false";
    default: return "indeterminate";
  }
}

RateVerdict quadratic_rate(const std::vector<double>& increments, double threshold, double floor, double* slope) {
  // History up to the first increment at round-off level; later entries are noise.
  std::vector<double> e;
  for (double x : increments) {
    if (!(x >= floor)) break;
    e.push_back(x);
  }
  // Strictly decreasing tail.
  std::size_t start = e.empty() ? 0 : e.size() - 1;
  while (start > 0 && e[start - 1] > e[start]) --start;
  std::vector<double> tail(e.begin() + static_cast<long>(start), e.end());
  std::vector<double> small;
  for (double x : tail)
    if (x < 1e-2) small.push_back(x);
  const std::vector<double>& w = small.size() >= 3 ? small : tail;
  if (w.size() < 3) return RateVerdict::indeterminate;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(w.size() - 1);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const double x = std::log(w[k]), y = std::log(w[k + 1]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double s = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  if (slope) *slope = s;
  return s >= threshold ? RateVerdict::quadratic : RateVerdict::not_quadratic;
}

std::vector<double> NewtonReport::rel_increments() const {
  std::vector<double> r;
  for (const auto& it : iterations) r.push_back(it.rel_increment);
  return r;
}

double fields_l2(const std::vector<LocalSystem>& locals, const FieldVectors& f, const Layout& lay) {
  double s = 0;
  for (const LocalSystem& ls : locals)
    for (int c = 0; c < comp::count; ++c) {
      const VectorXd v = f[ls.elem].segment(lay.field(c), lay.nf);
      s += pairing_weights()(c) * v.dot(ls.field_mass * v);
    }
  return std::sqrt(s);
}

NewtonResult gauss_newton(const Mesh& mesh, const DofMap& dm, const ModelParams& m, const FieldVectors& init,
                          const LocalExtras& extras, const NewtonOptions& opt) {
  using clock = std::chrono::steady_clock;
  const Layout& lay = dm.layout;
  const int nf = lay.fields();
  NewtonResult res;
  res.fields.assign(mesh.elements.size(), VectorXd());
  for (int id : dm.topo.active)
    res.fields[id] = static_cast<std::size_t>(id) < init.size() && init[id].size() == nf ? init[id] : VectorXd::Zero(nf);
  SparseCholesky chol;
  NewtonReport& rep = res.report;
  for (int k = 0; k < opt.max_iter; ++k) {
    const auto t0 = clock::now();
    NewtonIteration it;
    try {
      res.locals = build_locals(mesh, dm, m, res.fields, extras);
      const GlobalSystem sys = assemble_global(dm, res.locals);
      SolveInfo info;
      res.solution = solve_global(dm, res.locals, sys, chol, k == 0, &info);
      it.rel_residual = info.rel_residual;
      if (opt.on_solve) opt.on_solve(k, res.locals, sys, chol);
    } catch (const std::exception& e) {
      rep.failed = true;
      rep.failure = "iteration " + std::to_string(k + 1) + ": " + e.what();
      break;
    }
    res.step = res.solution;
    res.indicators = energy_indicators(dm, res.locals, res.step);
    // Increment: solved fields are increments except the pressure, which is solved for in full.
    FieldVectors delta(mesh.elements.size());
    const int p0 = lay.field(comp::p);
    for (int id : dm.topo.active) {
      VectorXd d = res.solution.fields[id];
      d.segment(p0, lay.nf) -= res.fields[id].segment(p0, lay.nf);
      delta[id] = opt.damping * d;
      res.fields[id] += delta[id];
    }
    res.solution.fields = res.fields;
    it.increment = fields_l2(res.locals, delta, lay);
    const double norm = fields_l2(res.locals, res.fields, lay);
    it.rel_increment = norm > 0 ? it.increment / norm : it.increment;
    it.eta = res.indicators.total;
    it.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    rep.iterations.push_back(it);
    if (it.rel_increment <= opt.tol || it.increment == 0) {
      rep.converged = true;
      break;
    }
    const std::size_t n = rep.iterations.size();
    if (n >= 4 && it.increment > 10 * rep.iterations[n - 4].increment) {
      rep.diverged = true;
      break;
    }
    if (!std::isfinite(it.increment)) {
      rep.diverged = true;
      break;
    }
  }
  rep.quadratic = quadratic_rate(rep.rel_increments(), 1.7, 1e-12, &rep.slope);
  return res;
}

FieldVectors prolong_fields(const Mesh& coarse, const Mesh& fine, const FieldVectors& fields, const PolyOrders& orders) {
  const Layout lay(orders);
  const int n1 = orders.p + 1;
  FieldVectors out(fine.elements.size());
  for (int id : fine.active_elements()) {
    int a = id;
    while (a >= static_cast<int>(coarse.elements.size()) || !coarse.elements[a].active) {
      a = fine.elements[a].parent;
      if (a < 0) throw std::logic_error("prolong_fields: element without an active coarse ancestor");
    }
    const VectorXd& src = static_cast<std::size_t>(a) < fields.size() && fields[a].size() == lay.fields()
                              ? fields[a]
                              : VectorXd::Zero(lay.fields()).eval();
    if (a == id) {
      out[id] = src;
      continue;
    }
    const RefBox& A = coarse.elements[a].box;
    const RefBox& E = fine.elements[id].box;
    const MatrixXd Rx = restriction_matrix(EdgeFamily::trace, orders.p, (E.x1 - E.x0) / (A.x1 - A.x0),
                                           ((E.x0 + E.x1) - (A.x0 + A.x1)) / (A.x1 - A.x0));
    const MatrixXd Ry = restriction_matrix(EdgeFamily::trace, orders.p, (E.y1 - E.y0) / (A.y1 - A.y0),
                                           ((E.y0 + E.y1) - (A.y0 + A.y1)) / (A.y1 - A.y0));
    MatrixXd R(lay.nf, lay.nf);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n1; ++j)
        for (int k = 0; k < n1; ++k)
          for (int l = 0; l < n1; ++l) R(i + n1 * j, k + n1 * l) = Rx(i, k) * Ry(j, l);
    out[id].resize(lay.fields());
    for (int c = 0; c < comp::count; ++c) out[id].segment(lay.field(c), lay.nf) = R * src.segment(lay.field(c), lay.nf);
  }
  return out;
}

}  // namespace vdpg
