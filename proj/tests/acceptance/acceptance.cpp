// Acceptance driver: one PASS/FAIL line per criterion. Benchmark runs are shared between
// criteria and written as ordinary run directories under --out.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "vdpg/properties.hpp"
#include "vdpg/run.hpp"

using namespace vdpg;

namespace {

constexpr long kBudget = 100000;

struct Run {
  RunOutcome outcome;
  SpdAudit audit;
  double seconds = 0;
  const std::vector<RefinementRecord>& records() const { return outcome.result.records; }
  const RefinementRecord& last() const { return records().back(); }
  bool ok() const { return !outcome.result.failed && !records().empty(); }
};

struct Key {
  double wi, re, alpha, penalty;
  auto operator<=>(const Key&) const = default;
};

class Runs {
 public:
  explicit Runs(std::string out) : out_(std::move(out)) {}

  const Run& get(double wi, double re = 0, double alpha = 0, double penalty = 0) {
    const Key k{wi, re, alpha, penalty};
    auto it = cache_.find(k);
    if (it != cache_.end()) return *it->second;
    RunConfig cfg;
    cfg.wi = {wi};
    cfg.re = {re};
    cfg.alpha = {alpha};
    if (re > 0) cfg.coupling = Coupling::navier_stokes;
    if (alpha > 0) cfg.model = Model::giesekus;
    cfg.adapt.dof_budget = kBudget;
    cfg.adapt.penalty_T12 = penalty;
    cfg.vtk = false;
    auto run = std::make_unique<Run>();
    run->audit.attach(cfg.newton);
    std::string dir = out_ + "/" + point_dirname({wi, re, alpha}) + (penalty > 0 ? "_penalty" : "");
    std::cerr << "running " << dir << " ..." << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    run->outcome = run_point(cfg, {wi, re, alpha}, dir);
    run->seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // Only the records are needed by the criteria.
    run->outcome.result.last = NewtonResult{};
    run->outcome.result.mesh = Mesh{};
    run->outcome.result.dofmap = DofMap{};
    std::cerr << "  " << run->records().size() << " records, " << run->seconds << " s" << std::endl;
    return *cache_.emplace(k, std::move(run)).first->second;
  }

 private:
  std::string out_;
  std::map<Key, std::unique_ptr<Run>> cache_;
};

std::string num(double x, int digits = 6) {
  std::ostringstream os;
  os << std::setprecision(digits) << x;
  return os.str();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Verdict {
  bool pass = false;
  std::string detail;
};

Verdict failed_run(const Run& r) { return {false, "run failed: " + r.outcome.result.failure}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_runs";
  std::vector<int> only;
  app.add_option("--out", out, "directory for the benchmark runs");
  app.add_option("--criteria", only, "subset of criteria to evaluate")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  Runs runs(out);

  std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"dual-norm split over 100 random instances, relative error <= 1e-10, < 5 s",
       [] {
         const PropertyResult r = check_dual_norm_split(100);
         return Verdict{r.pass && r.seconds < 5, r.detail + ", " + num(r.seconds, 3) + " s"};
       }},
      {"SPD: symmetric stiffness and successful Cholesky on every mesh and iterate (Wi=0.1, 5 refinements)",
       [&] {
         const Run& r = runs.get(0.1);
         if (!r.ok()) return failed_run(r);
         const bool enough = r.records().size() >= 6;
         return Verdict{enough && r.audit.clean(),
                        std::to_string(r.records().size() - 1) + " refinements, " + std::to_string(r.audit.solves) +
                            " solves, " + std::to_string(r.audit.factorization_failures) + " factorization failures, " +
                            std::to_string(r.audit.asymmetric_locals) + " asymmetric element matrices, " +
                            std::to_string(r.audit.upper_entries) + " entries off the symmetric storage"};
       }},
      {"residual optimality on a 4-element Stokes problem (100 perturbations, tolerance 1e-10)",
       [] {
         const PropertyResult r = check_residual_optimality(100);
         return Verdict{r.pass, r.detail};
       }},
      {"energy identity on 3 problems (relative 1e-10)",
       [] {
         const PropertyResult r = check_energy_identity();
         return Verdict{r.pass, r.detail};
       }},
      {"Newtonian limit with trial-space fields: errors <= 1e-8, one Newton step, < 30 s",
       [] {
         const PropertyResult r = check_newtonian_exactness();
         return Verdict{r.pass && r.seconds < 30, r.detail + ", " + num(r.seconds, 3) + " s"};
       }},
      {"smooth Stokes solution, 4 uniform refinements, p=2: L2 rate >= 2.7, < 10 min",
       [] {
         const PropertyResult r = check_convergence_rate(4, 2.7);
         return Verdict{r.pass && r.seconds < 600, r.detail + ", " + num(r.seconds, 3) + " s"};
       }},
      {"Wi=0.1 energy strategy to ~1e5 DoF: drag within 0.5% of 130.3626 from below, energy error decreasing, < 30 min",
       [&] {
         const Run& r = runs.get(0.1);
         if (!r.ok()) return failed_run(r);
         const auto& rec = r.records();
         const double ref = 130.3626;
         bool increasing = true, below = true, decreasing = rec.size() >= 6;
         for (std::size_t k = 0; k < rec.size(); ++k) {
           if (k > 0 && !(rec[k].drag.flux > rec[k - 1].drag.flux)) increasing = false;
           if (rec[k].drag.flux > ref * 1.005) below = false;
           if (k > 0 && k <= 5 && !(rec[k].energy_err < rec[k - 1].energy_err)) decreasing = false;
         }
         const double dev = rel(r.last().drag.flux, ref);
         std::ostringstream os;
         os << "drag " << num(r.last().drag.flux, 8) << " at " << r.last().dof << " DoF (deviation " << num(100 * dev, 3)
            << "%), increasing " << increasing << ", below " << below << ", energy error decreasing " << decreasing
            << ", " << num(r.seconds, 4) << " s";
         return Verdict{dev <= 0.005 && increasing && below && decreasing && r.seconds < 1800, os.str()};
       }},
      {"Wi sweep 0.1..0.5 at 1e5 DoF: drag strictly decreasing, each within 1% of the reference",
       [&] {
         const double wis[] = {0.1, 0.2, 0.3, 0.4, 0.5};
         const double refs[] = {130.3626, 126.6251, 123.1909, 120.5906, 118.8229};
         bool pass = true;
         double prev = 1e300;
         std::ostringstream os;
         for (int k = 0; k < 5; ++k) {
           const Run& r = runs.get(wis[k]);
           if (!r.ok()) return failed_run(r);
           const double d = r.last().drag.flux, dev = rel(d, refs[k]);
           pass = pass && d < prev && dev <= 0.01;
           prev = d;
           os << (k ? "; " : "") << "Wi " << wis[k] << ": " << num(d, 7) << " (" << num(100 * dev, 3) << "%)";
         }
         return Verdict{pass, os.str()};
       }},
      {"Re effect at Wi=0.3: drag gap Re=1 minus Re=0 positive and within 1% of 0.4031",
       [&] {
         const Run& a = runs.get(0.3);
         const Run& b = runs.get(0.3, 1.0);
         if (!a.ok()) return failed_run(a);
         if (!b.ok()) return failed_run(b);
         const double gap = b.last().drag.flux - a.last().drag.flux, target = 123.5957 - 123.1926;
         std::ostringstream os;
         os << "Re=0 " << num(a.last().drag.flux, 7) << ", Re=1 " << num(b.last().drag.flux, 7) << ", gap "
            << num(gap, 4) << " vs " << num(target, 4) << " (" << num(100 * rel(gap, target), 3) << "%)";
         return Verdict{gap > 0 && rel(gap, target) <= 0.01, os.str()};
       }},
      {"Giesekus at Wi=0.3: alpha 0.01 and 0.1 within 1.5% of the reference, decreasing in alpha",
       [&] {
         const Run& a = runs.get(0.3, 0, 0.01);
         const Run& b = runs.get(0.3, 0, 0.1);
         if (!a.ok()) return failed_run(a);
         if (!b.ok()) return failed_run(b);
         const double da = a.last().drag.flux, db = b.last().drag.flux;
         const double ea = rel(da, 120.0840), eb = rel(db, 111.0985);
         std::ostringstream os;
         os << "alpha 0.01: " << num(da, 7) << " (" << num(100 * ea, 3) << "%), alpha 0.1: " << num(db, 7) << " ("
            << num(100 * eb, 3) << "%)";
         return Verdict{ea <= 0.015 && eb <= 0.015 && db < da, os.str()};
       }},
      {"quadratic Newton detector: true for Wi=0.1 on the initial mesh and early refinements; synthetic histories",
       [&] {
         const bool synthetic =
             quadratic_rate({1e-1, 1e-2, 1e-4, 1e-8}) == RateVerdict::quadratic &&
             quadratic_rate({1e-1, 5e-2, 2.5e-2, 1.2e-2}) == RateVerdict::not_quadratic &&
             quadratic_rate({1e-1, 1e-2}) == RateVerdict::indeterminate &&
             quadratic_rate({1e-1, 1e-2, 1e-4, 1e-8, 3e-13, 5e-13, 2e-13}) == RateVerdict::quadratic;
         const Run& r = runs.get(0.1);
         if (!r.ok()) return failed_run(r);
         bool early = true;
         std::ostringstream os;
         os << "synthetic " << (synthetic ? "ok" : "wrong") << "; Wi=0.1 refinements 0-2:";
         for (std::size_t k = 0; k < std::min<std::size_t>(3, r.records().size()); ++k) {
           const RefinementRecord& rec = r.records()[k];
           early = early && rec.quadratic == RateVerdict::quadratic;
           os << " " << to_string(rec.quadratic) << " (slope " << num(rec.newton.slope, 3) << ")";
         }
         return Verdict{synthetic && early, os.str()};
       }},
      {"T12 penalty at Wi=0.4: drag matches the plain run to 1e-3, max |T12| on y=0 drops >= 10x",
       [&] {
         const Run& a = runs.get(0.4);
         const Run& b = runs.get(0.4, 0, 0, 1e4);
         if (!a.ok()) return failed_run(a);
         if (!b.ok()) return failed_run(b);
         const double d = rel(b.last().drag.flux, a.last().drag.flux);
         const double ta = a.last().max_T12_reflective, tb = b.last().max_T12_reflective;
         std::ostringstream os;
         os << "drag " << num(a.last().drag.flux, 8) << " vs " << num(b.last().drag.flux, 8) << " (relative "
            << num(d, 3) << "), max |T12| " << num(ta, 3) << " -> " << num(tb, 3) << " at " << a.last().dof << " / "
            << b.last().dof << " DoF";
         return Verdict{d <= 1e-3 && tb * 10 <= ta, os.str()};
       }},
      {"drag error estimate for Wi=0.1: final < 1/100 of the initial-mesh value",
       [&] {
         const Run& r = runs.get(0.1);
         if (!r.ok()) return failed_run(r);
         const double e0 = r.records().front().drag.err, e1 = r.last().drag.err;
         return Verdict{e1 < e0 / 100, num(e0, 5) + " -> " + num(e1, 5) + " (ratio " + num(e0 / e1, 4) + ")"};
       }},
  };

  const std::set<int> subset(only.begin(), only.end());
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!subset.empty() && !subset.count(id)) continue;
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << (v.pass ? "PASS" : "FAIL") << " [" << std::setw(2) << id << "] " << criteria[k].first << " -- "
              << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
