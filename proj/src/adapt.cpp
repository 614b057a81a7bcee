#include "vdpg/adapt.hpp"

#include <chrono>
#include <stdexcept>

namespace vdpg {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::energy: return "energy";
    case Strategy::adhoc1: return "adhoc1";
    default: return "adhoc2";
  }
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "energy") return Strategy::energy;
  if (s == "adhoc1") return Strategy::adhoc1;
  if (s == "adhoc2") return Strategy::adhoc2;
  throw std::invalid_argument("unknown strategy '" + s + "' (energy, adhoc1, adhoc2)");
}

void AdaptConfig::validate() const {
  if (!(theta > 0 && theta < 1)) throw std::invalid_argument("theta must lie in (0, 1)");
  if (max_refinements < 0) throw std::invalid_argument("max_refinements must be >= 0");
  if (dof_budget < 0) throw std::invalid_argument("dof_budget must be >= 0");
  if (cylinder_band < 0) throw std::invalid_argument("cylinder_band must be >= 0");
  if (penalty_T12 < 0) throw std::invalid_argument("penalty_T12 must be >= 0");
  orders.validate();
}

std::set<int> mark_energy(const ErrorIndicators& ind, const std::vector<int>& active, double theta) {
  double mx = 0;
  for (int id : active) mx = std::max(mx, ind.eta[id]);
  std::set<int> out;
  for (int id : active)
    if (ind.eta[id] >= theta * mx) out.insert(id);
  return out;
}

std::set<int> mark_adhoc1(const ErrorIndicators& ind, const std::vector<int>& active, double theta, const Mesh& mesh) {
  std::set<int> out = mark_energy(ind, active, theta);
  for (int id : active)
    for (int e : mesh.elements[id].side)
      if (mesh.edges[e].tag == BoundaryTag::cylinder) out.insert(id);
  return out;
}

std::set<int> mark_adhoc2(const ErrorIndicators& ind, const std::vector<int>& active, double theta, const Mesh& mesh,
                          double band) {
  std::set<int> out = mark_energy(ind, active, theta);
  for (int id : active)
    for (int v : mesh.elements[id].v)
      if (std::abs((mesh.vertices[v] - mesh.circle_center).norm() - mesh.circle_radius) <= band) {
        out.insert(id);
        break;
      }
  return out;
}

AdaptResult adapt_loop(const AdaptConfig& cfg, const ModelParams& m, const Mesh& mesh0, const NewtonOptions& newton,
                       const RecordCallback& on_record) {
  cfg.validate();
  m.validate();
  using clock = std::chrono::steady_clock;
  AdaptResult res;
  const BoundaryConditions bc = benchmark_bcs(m);
  LocalExtras extras;
  extras.penalty_T12 = cfg.penalty_T12;
  Mesh mesh = mesh0;
  FieldVectors init;
  for (int ref = 0;; ++ref) {
    const auto t0 = clock::now();
    DofMap dm = build_dofmap(mesh, bc, cfg.orders);
    NewtonResult nr = gauss_newton(mesh, dm, m, init, extras, newton);
    RefinementRecord rec;
    rec.ref = ref;
    rec.dof = dm.total_dofs();
    rec.elements = dm.topo.active.size();
    rec.newton = nr.report;
    rec.newton_iters = nr.report.linear_solves();
    rec.quadratic = nr.report.quadratic;
    const bool ok = !nr.report.failed && !nr.report.diverged && !nr.locals.empty();
    if (ok) {
      rec.drag = drag_estimates(mesh, dm, nr.solution, m);
      rec.energy_err = nr.indicators.total;
      rec.max_T12_reflective = max_abs_T12_reflective(mesh, dm, nr.fields);
    }
    rec.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    if (!ok) {
      res.failed = true;
      res.failure = nr.report.failed ? nr.report.failure : "Newton iteration diverged";
      res.failure = "refinement " + std::to_string(ref) + ": " + res.failure;
      break;
    }
    res.records.push_back(rec);
    if (on_record) on_record(rec, mesh, dm, nr);
    const bool done = ref >= cfg.max_refinements || static_cast<long>(rec.dof) >= cfg.dof_budget;
    std::set<int> marked;
    if (!done) {
      const std::vector<int>& act = dm.topo.active;
      switch (cfg.strategy) {
        case Strategy::energy: marked = mark_energy(nr.indicators, act, cfg.theta); break;
        case Strategy::adhoc1: marked = mark_adhoc1(nr.indicators, act, cfg.theta, mesh); break;
        case Strategy::adhoc2: marked = mark_adhoc2(nr.indicators, act, cfg.theta, mesh, cfg.cylinder_band); break;
      }
    }
    if (done || marked.empty()) {
      res.mesh = std::move(mesh);
      res.dofmap = std::move(dm);
      res.last = std::move(nr);
      break;
    }
    Mesh fine = refine(mesh, marked);
    init = prolong_fields(mesh, fine, nr.fields, dm.orders);
    mesh = std::move(fine);
  }
  return res;
}

}  // namespace vdpg
