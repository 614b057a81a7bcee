// Command-line front end: `bench` (single point or sweep), `mms` (convergence study),
// `check` (property suites).

#include <sys/wait.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "vdpg/mms.hpp"
#include "vdpg/properties.hpp"
#include "vdpg/run.hpp"

using namespace vdpg;

namespace {

enum Exit { ok = 0, config_error = 2, solver_failure = 3, property_failure = 4 };

std::string read_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::invalid_argument("cannot read config file " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

// Flag values land here; only flags actually given override the file and the defaults.
struct Flags {
  std::string config, model, coupling, strategy, out;
  std::vector<double> wi, re, alpha;
  double beta = 0, theta = 0, band = 0, penalty = 0, newton_tol = 0, radius = 0, half_height = 0, upstream = 0,
         downstream = 0;
  int p = 0, dp = 0, max_refs = 0, newton_max_iter = 0, gamma_per_side = 0, jobs = 0;
  long budget = 0;
  unsigned seed = 0;
  bool no_vtk = false;
  std::map<std::string, CLI::Option*> opt;
};

void add_model_flags(CLI::App* app, Flags& f) {
  f.opt["model"] = app->add_option("--model", f.model, "oldroyd_b | giesekus");
  f.opt["coupling"] = app->add_option("--coupling", f.coupling, "stokes | navier_stokes (implied by --re > 0)");
  f.opt["wi"] = app->add_option("--wi", f.wi, "Weissenberg number(s), comma separated")->delimiter(',');
  f.opt["re"] = app->add_option("--re", f.re, "Reynolds number(s), comma separated")->delimiter(',');
  f.opt["alpha"] = app->add_option("--alpha", f.alpha, "Giesekus mobility value(s), comma separated")->delimiter(',');
  f.opt["beta"] = app->add_option("--beta", f.beta, "viscosity ratio eta_s / eta");
  f.opt["p"] = app->add_option("--p", f.p, "field polynomial order");
  f.opt["dp"] = app->add_option("--dp", f.dp, "test space enrichment");
  f.opt["newton_tol"] = app->add_option("--newton-tol", f.newton_tol, "relative field increment tolerance");
  f.opt["newton_max_iter"] = app->add_option("--newton-max-iter", f.newton_max_iter, "Newton iteration cap");
  f.opt["out"] = app->add_option("--out", f.out, "output directory");
}

void add_bench_flags(CLI::App* app, Flags& f) {
  f.opt["config"] = app->add_option("--config", f.config, "JSON config file (flags take precedence)");
  f.opt["strategy"] = app->add_option("--strategy", f.strategy, "energy | adhoc1 | adhoc2");
  f.opt["theta"] = app->add_option("--theta", f.theta, "marking fraction in (0, 1)");
  f.opt["max_refs"] = app->add_option("--max-refs", f.max_refs, "maximum number of refinements");
  f.opt["budget"] = app->add_option("--budget", f.budget, "stop after the first mesh with at least this many DoFs");
  f.opt["band"] = app->add_option("--band", f.band, "adhoc2 distance band around the cylinder");
  f.opt["penalty"] = app->add_option("--penalty", f.penalty, "T12 = 0 penalty weight on y = 0 (0: off)");
  f.opt["radius"] = app->add_option("--radius", f.radius, "cylinder radius");
  f.opt["half_height"] = app->add_option("--half-height", f.half_height, "channel half height");
  f.opt["upstream"] = app->add_option("--upstream", f.upstream, "channel length upstream of the cylinder centre");
  f.opt["downstream"] = app->add_option("--downstream", f.downstream, "channel length downstream of the centre");
  f.opt["seed"] = app->add_option("--seed", f.seed, "recorded seed (the solver is deterministic)");
  f.opt["gamma_per_side"] = app->add_option("--gamma-per-side", f.gamma_per_side, "gamma samples per element side");
  f.opt["jobs"] = app->add_option("--jobs", f.jobs, "sweep points run as parallel processes");
  f.opt["no_vtk"] = app->add_flag("--no-vtk", f.no_vtk, "skip VTK snapshots");
}

bool given(const Flags& f, const std::string& k) {
  const auto it = f.opt.find(k);
  return it != f.opt.end() && it->second->count() > 0;
}

RunConfig build_config(const Flags& f) {
  RunConfig c;
  if (given(f, "config")) apply_json(c, read_file(f.config));
  if (given(f, "model")) c.model = model_from_string(f.model);
  if (given(f, "coupling")) c.coupling = coupling_from_string(f.coupling);
  if (given(f, "wi")) c.wi = f.wi;
  if (given(f, "re")) c.re = f.re;
  if (given(f, "alpha")) c.alpha = f.alpha;
  // Convenience: Re > 0 implies Navier-Stokes, alpha > 0 implies Giesekus, unless set explicitly.
  if (!given(f, "coupling"))
    for (double r : c.re)
      if (r > 0) c.coupling = Coupling::navier_stokes;
  if (!given(f, "model"))
    for (double a : c.alpha)
      if (a > 0) c.model = Model::giesekus;
  if (given(f, "beta")) c.beta = f.beta;
  if (given(f, "p")) c.adapt.orders.p = f.p;
  if (given(f, "dp")) c.adapt.orders.dp = f.dp;
  if (given(f, "strategy")) c.adapt.strategy = strategy_from_string(f.strategy);
  if (given(f, "theta")) c.adapt.theta = f.theta;
  if (given(f, "max_refs")) c.adapt.max_refinements = f.max_refs;
  if (given(f, "budget")) c.adapt.dof_budget = f.budget;
  if (given(f, "band")) c.adapt.cylinder_band = f.band;
  if (given(f, "penalty")) c.adapt.penalty_T12 = f.penalty;
  if (given(f, "newton_tol")) c.newton.tol = f.newton_tol;
  if (given(f, "newton_max_iter")) c.newton.max_iter = f.newton_max_iter;
  if (given(f, "radius")) c.geometry.cylinder_radius = f.radius;
  if (given(f, "half_height")) c.geometry.half_channel_height = f.half_height;
  if (given(f, "upstream")) c.geometry.upstream_length = f.upstream;
  if (given(f, "downstream")) c.geometry.downstream_length = f.downstream;
  if (given(f, "seed")) c.seed = f.seed;
  if (given(f, "out")) c.out = f.out;
  if (given(f, "gamma_per_side")) c.gamma_per_side = f.gamma_per_side;
  if (given(f, "jobs")) c.jobs = f.jobs;
  if (f.no_vtk) c.vtk = false;
  const std::vector<std::string> bad = c.violations();
  if (!bad.empty()) {
    std::string msg;
    for (const std::string& b : bad) msg += "\n  " + b;
    throw std::invalid_argument("invalid configuration:" + msg);
  }
  return c;
}

int run_one(const RunConfig& cfg, const RunPoint& pt, const std::string& dir) {
  const RunOutcome o = run_point(cfg, pt, dir);
  for (const RefinementRecord& r : o.result.records)
    std::cout << point_dirname(pt) << " ref " << r.ref << " dof " << r.dof << " drag_flux " << std::setprecision(8)
              << r.drag.flux << " drag_err " << r.drag.err << " energy_err " << r.energy_err << '\n';
  if (o.result.failed) {
    std::cerr << point_dirname(pt) << ": solver failure: " << o.result.failure << '\n';
    return solver_failure;
  }
  return ok;
}

int run_bench(const RunConfig& cfg) {
  const std::vector<RunPoint> pts = cfg.points();
  std::filesystem::create_directories(cfg.out);
  std::ofstream(cfg.out + "/config.json") << to_json(cfg) << '\n';
  auto dir_of = [&](const RunPoint& pt) { return pts.size() == 1 ? cfg.out : cfg.out + "/" + point_dirname(pt); };
  int status = ok;
  if (cfg.jobs <= 1 || pts.size() == 1) {
    for (const RunPoint& pt : pts) status = std::max(status, run_one(cfg, pt, dir_of(pt)));
    return status;
  }
  // Independent runs in child processes, at most `jobs` at a time.
  std::size_t next = 0;
  int running = 0;
  while (next < pts.size() || running > 0) {
    while (running < cfg.jobs && next < pts.size()) {
      std::cout.flush();
      const pid_t pid = fork();
      if (pid < 0) throw std::runtime_error("fork failed");
      if (pid == 0) {
        int rc = solver_failure;
        try {
          rc = run_one(cfg, pts[next], dir_of(pts[next]));
        } catch (const std::exception& e) {
          std::cerr << e.what() << '\n';
        }
        std::cout.flush();
        _exit(rc);
      }
      ++next;
      ++running;
    }
    int ws = 0;
    if (wait(&ws) > 0) {
      --running;
      status = std::max(status, WIFEXITED(ws) ? WEXITSTATUS(ws) : static_cast<int>(solver_failure));
    }
  }
  return status;
}

ExactSolution mms_case(const std::string& name, const ModelParams& m) {
  if (name == "smooth_stokes") return smooth_stokes(m);
  if (name == "polynomial_newtonian") return polynomial_newtonian(m);
  if (name == "smooth_viscoelastic") return smooth_viscoelastic();
  throw std::invalid_argument("unknown mms case: " + name);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ultraweak DPG solver for viscoelastic flow past a confined cylinder"};
  app.require_subcommand(1);
  Flags bf, mf;
  CLI::App* bench = app.add_subcommand("bench", "adaptive benchmark run (single point or sweep)");
  add_model_flags(bench, bf);
  add_bench_flags(bench, bf);
  CLI::App* mms = app.add_subcommand("mms", "manufactured-solution convergence study");
  add_model_flags(mms, mf);
  int levels = 4, base = 2;
  std::string mcase = "smooth_stokes";
  mms->add_option("--levels", levels, "number of uniform refinements")->check(CLI::Range(0, 8));
  mms->add_option("--base", base, "base mesh: n x n squares of the unit square")->check(CLI::Range(1, 64));
  mms->add_option("--case", mcase, "smooth_stokes | polynomial_newtonian | smooth_viscoelastic");
  CLI::App* check = app.add_subcommand("check", "property suites");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : config_error;
  }
  try {
    if (*bench) {
      RunConfig cfg;
      try {
        cfg = build_config(bf);
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return config_error;
      }
      return run_bench(cfg);
    }
    if (*mms) {
      RunConfig cfg;
      try {
        cfg = build_config(mf);
        if (!given(mf, "wi")) cfg.wi = {0.0};
        if (!given(mf, "out")) cfg.out = "runs/mms";
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return config_error;
      }
      const ModelParams m = cfg.model_params(cfg.points().front());
      std::vector<ConvergenceLevel> rows;
      try {
        rows = convergence_study(m, mms_case(mcase, m), build_rect_mesh(base, base), levels, cfg.adapt.orders);
      } catch (const std::invalid_argument& e) {
        std::cerr << e.what() << '\n';
        return config_error;
      } catch (const std::exception& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return solver_failure;
      }
      std::filesystem::create_directories(cfg.out);
      std::ofstream csv(cfg.out + "/mms.csv");
      csv << "level,dof,h,err_u,err_p,err_L,err_T,err_total,rate,newton_iters\n" << std::setprecision(12);
      std::cout << "case " << mcase << "  Wi " << m.Wi() << "  p " << cfg.adapt.orders.p << '\n'
                << "level      dof        h    L2 error   rate\n";
      for (const ConvergenceLevel& c : rows) {
        csv << c.level << ',' << c.dof << ',' << c.h << ',' << c.err.u << ',' << c.err.p << ',' << c.err.L << ','
            << c.err.T << ',' << c.err.total << ',' << c.rate << ',' << c.newton_iters << '\n';
        std::cout << std::setw(5) << c.level << std::setw(9) << c.dof << std::setw(9) << std::setprecision(4)
                  << c.h << std::setw(12) << c.err.total << std::setw(7) << std::setprecision(3)
                  << (c.level > 0 ? c.rate : 0.0) << '\n';
      }
      return ok;
    }
    if (*check) {
      bool all = true;
      for (const PropertyResult& r : property_suite()) {
        all = all && r.pass;
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " (" << std::setprecision(3)
                  << r.seconds << " s)\n";
      }
      return all ? ok : property_failure;
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << '\n';
    return solver_failure;
  }
  return ok;
}
