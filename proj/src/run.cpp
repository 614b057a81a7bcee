#include "vdpg/run.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace vdpg {

using json = nlohmann::json;

std::vector<RunPoint> RunConfig::points() const {
  std::vector<RunPoint> out;
  for (double w : wi)
    for (double r : re)
      for (double a : alpha) out.push_back({w, r, a});
  return out;
}

ModelParams RunConfig::model_params(const RunPoint& pt) const {
  ModelParams m = ModelParams::nondimensional(pt.wi, pt.re, beta, pt.alpha, model);
  m.R = geometry.cylinder_radius;
  m.lambda = pt.wi * m.R / m.ubar;
  m.rho = pt.re * m.eta() / (m.ubar * m.R);
  m.coupling = coupling;
  return m;
}

std::vector<std::string> RunConfig::violations() const {
  std::vector<std::string> v;
  auto check = [&v](const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      v.push_back(e.what());
    }
  };
  if (wi.empty() || re.empty() || alpha.empty()) v.push_back("wi, re and alpha lists must be non-empty");
  for (double w : wi)
    if (!(w >= 0)) v.push_back("wi must be >= 0");
  for (double r : re) {
    if (!(r >= 0)) v.push_back("re must be >= 0");
    if (r > 0 && coupling == Coupling::stokes) v.push_back("re > 0 requires navier_stokes coupling");
  }
  for (double a : alpha) {
    if (!(a >= 0 && a <= 1)) v.push_back("alpha must lie in [0, 1]");
    if (a > 0 && model != Model::giesekus) v.push_back("alpha > 0 requires the giesekus model");
  }
  if (!(beta > 0 && beta < 1)) v.push_back("beta must lie in (0, 1)");
  check([&] { adapt.validate(); });
  check([&] { geometry.validate(); });
  if (!(newton.tol > 0)) v.push_back("newton tolerance must be > 0");
  if (newton.max_iter < 1) v.push_back("newton iteration cap must be >= 1");
  if (gamma_per_side < 2) v.push_back("gamma samples per side must be >= 2");
  if (jobs < 1) v.push_back("jobs must be >= 1");
  if (out.empty()) v.push_back("output directory must be given");
  return v;
}

std::string to_json(const RunConfig& c) {
  const json j = {
      {"model", to_string(c.model)},
      {"coupling", to_string(c.coupling)},
      {"wi", c.wi},
      {"re", c.re},
      {"alpha", c.alpha},
      {"beta", c.beta},
      {"p", c.adapt.orders.p},
      {"dp", c.adapt.orders.dp},
      {"strategy", to_string(c.adapt.strategy)},
      {"theta", c.adapt.theta},
      {"max_refs", c.adapt.max_refinements},
      {"dof_budget", c.adapt.dof_budget},
      {"cylinder_band", c.adapt.cylinder_band},
      {"penalty", c.adapt.penalty_T12},
      {"newton_tol", c.newton.tol},
      {"newton_max_iter", c.newton.max_iter},
      {"radius", c.geometry.cylinder_radius},
      {"half_height", c.geometry.half_channel_height},
      {"upstream", c.geometry.upstream_length},
      {"downstream", c.geometry.downstream_length},
      {"seed", c.seed},
      {"out", c.out},
      {"vtk", c.vtk},
      {"gamma_per_side", c.gamma_per_side},
      {"jobs", c.jobs}};
  return j.dump(2);
}

void apply_json(RunConfig& c, const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  auto list = [](const json& v) {
    return v.is_array() ? v.get<std::vector<double>>() : std::vector<double>{v.get<double>()};
  };
  for (const auto& [key, v] : j.items()) {
    try {
      if (key == "model") c.model = model_from_string(v.get<std::string>());
      else if (key == "coupling") c.coupling = coupling_from_string(v.get<std::string>());
      else if (key == "wi") c.wi = list(v);
      else if (key == "re") c.re = list(v);
      else if (key == "alpha") c.alpha = list(v);
      else if (key == "beta") c.beta = v.get<double>();
      else if (key == "p") c.adapt.orders.p = v.get<int>();
      else if (key == "dp") c.adapt.orders.dp = v.get<int>();
      else if (key == "strategy") c.adapt.strategy = strategy_from_string(v.get<std::string>());
      else if (key == "theta") c.adapt.theta = v.get<double>();
      else if (key == "max_refs") c.adapt.max_refinements = v.get<int>();
      else if (key == "dof_budget") c.adapt.dof_budget = v.get<long>();
      else if (key == "cylinder_band") c.adapt.cylinder_band = v.get<double>();
      else if (key == "penalty") c.adapt.penalty_T12 = v.get<double>();
      else if (key == "newton_tol") c.newton.tol = v.get<double>();
      else if (key == "newton_max_iter") c.newton.max_iter = v.get<int>();
      else if (key == "radius") c.geometry.cylinder_radius = v.get<double>();
      else if (key == "half_height") c.geometry.half_channel_height = v.get<double>();
      else if (key == "upstream") c.geometry.upstream_length = v.get<double>();
      else if (key == "downstream") c.geometry.downstream_length = v.get<double>();
      else if (key == "seed") c.seed = v.get<unsigned>();
      else if (key == "out") c.out = v.get<std::string>();
      else if (key == "vtk") c.vtk = v.get<bool>();
      else if (key == "gamma_per_side") c.gamma_per_side = v.get<int>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else throw std::invalid_argument("unknown key");
    } catch (const json::exception& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config key '" + key + "': " + e.what());
    }
  }
}

void write_record_row(std::ostream& os, const RefinementRecord& r) {
  os << std::setprecision(12) << r.ref << ',' << r.dof << ',' << r.drag.flux << ',' << r.drag.field << ','
     << r.drag.err << ',' << r.energy_err << ',' << r.newton_iters << ',' << to_string(r.quadratic) << '\n';
}

void write_gamma(std::ostream& os, const std::vector<GammaSample>& samples) {
  os << kGammaHeader << '\n' << std::setprecision(12);
  for (const GammaSample& g : samples) {
    os << g.s << ',' << g.x << ',' << g.y << ',' << g.T11 << ',' << g.T12 << ',' << g.T22 << ',';
    if (std::isnan(g.that1))
      os << "nan";
    else
      os << g.that1;
    os << '\n';
  }
}

std::string point_dirname(const RunPoint& pt) {
  std::ostringstream os;
  os << "wi" << pt.wi << "_re" << pt.re << "_alpha" << pt.alpha;
  return os.str();
}

RunOutcome run_point(const RunConfig& cfg, const RunPoint& pt, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  RunConfig echo = cfg;
  echo.wi = {pt.wi};
  echo.re = {pt.re};
  echo.alpha = {pt.alpha};
  std::ofstream(dir + "/config.json") << to_json(echo) << '\n';
  const ModelParams m = cfg.model_params(pt);
  std::ofstream records(dir + "/records.csv");
  records << kRecordsHeader << '\n';
  std::ofstream log(dir + "/log.txt");
  log << std::setprecision(10);
  RunOutcome out;
  out.dir = dir;
  auto on_record = [&](const RefinementRecord& r, const Mesh& mesh, const DofMap& dm, const NewtonResult& nr) {
    write_record_row(records, r);
    records.flush();
    log << "ref " << r.ref << " dof " << r.dof << " elements " << r.elements << " flux " << r.drag.flux << " field "
        << r.drag.field << " err " << r.drag.err << " energy " << r.energy_err << " newton " << r.newton_iters
        << (r.newton.converged ? "" : " (not converged)") << " slope " << r.newton.slope << " max|T12|(y=0) "
        << r.max_T12_reflective << " seconds " << r.seconds << "\n  increments";
    for (double e : r.newton.rel_increments()) log << ' ' << e;
    log << std::endl;
    if (!cfg.vtk) return;
    const Layout& lay = dm.layout;
    auto comps = [&](std::vector<int> idx) {
      return [&nr, &lay, idx](int e, double xi, double eta) {
        const auto c = eval_field_components(lay, nr.fields[e], xi, eta);
        Eigen::VectorXd v(idx.size());
        for (std::size_t k = 0; k < idx.size(); ++k) v(k) = c(idx[k]);
        return v;
      };
    };
    std::ostringstream name;
    name << dir << "/mesh_" << std::setw(2) << std::setfill('0') << r.ref << ".vtk";
    write_vtk(mesh, name.str(),
              {{"u", 2, comps({comp::u1, comp::u2})},
               {"p", 1, comps({comp::p})},
               {"L", 4, comps({comp::L11, comp::L12, comp::L21, comp::L22})},
               {"T", 3, comps({comp::T11, comp::T12, comp::T22})},
               {"eta", 1, [&nr](int e, double, double) { return Eigen::VectorXd::Constant(1, nr.indicators.eta[e]); }}});
  };
  out.result = adapt_loop(cfg.adapt, m, build_initial_mesh(cfg.geometry), cfg.newton, on_record);
  if (out.result.failed) {
    log << "FAILED: " << out.result.failure << std::endl;
  } else {
    std::ofstream gamma(dir + "/gamma.csv");
    write_gamma(gamma, sample_gamma(out.result.mesh, out.result.dofmap, out.result.last.solution, cfg.gamma_per_side));
  }
  // The element systems dominate memory and are not needed once the run is written.
  out.result.last.locals.clear();
  out.result.last.locals.shrink_to_fit();
  return out;
}

}  // namespace vdpg
