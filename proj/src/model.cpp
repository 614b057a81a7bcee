#include "vdpg/model.hpp"

#include <sstream>
#include <stdexcept>

namespace vdpg {

const char* to_string(Model m) { return m == Model::giesekus ? "giesekus" : "oldroyd_b"; }
const char* to_string(Coupling c) { return c == Coupling::navier_stokes ? "navier_stokes" : "stokes"; }

Model model_from_string(const std::string& s) {
  if (s == "oldroyd_b" || s == "oldroyd-b") return Model::oldroyd_b;
  if (s == "giesekus") return Model::giesekus;
  throw std::invalid_argument("unknown model: " + s);
}

Coupling coupling_from_string(const std::string& s) {
  if (s == "stokes") return Coupling::stokes;
  if (s == "navier_stokes" || s == "navier-stokes") return Coupling::navier_stokes;
  throw std::invalid_argument("unknown coupling: " + s);
}

void ModelParams::validate() const {
  std::ostringstream err;
  if (!(eta_s > 0)) err << "eta_s must be > 0; ";
  if (!(eta_p > 0)) err << "eta_p must be > 0; ";
  if (!(lambda >= 0)) err << "lambda must be >= 0; ";
  if (!(alpha >= 0 && alpha <= 1)) err << "alpha must lie in [0,1]; ";
  if (!(rho >= 0)) err << "rho must be >= 0; ";
  if (!(l0 > 0 && ubar > 0 && R > 0)) err << "l0, ubar, R must be > 0; ";
  if (coupling == Coupling::stokes && rho != 0) err << "stokes coupling requires rho = 0; ";
  if (!err.str().empty()) throw std::invalid_argument("ModelParams: " + err.str());
}

ModelParams ModelParams::nondimensional(double Wi, double Re, double beta, double alpha, Model model) {
  ModelParams m;
  m.ubar = m.R = m.l0 = 1;
  m.lambda = Wi;
  m.rho = Re;
  m.eta_s = beta;
  m.eta_p = 1 - beta;
  m.alpha = alpha;
  m.model = model;
  m.coupling = Re > 0 ? Coupling::navier_stokes : Coupling::stokes;
  m.validate();
  return m;
}

}  // namespace vdpg
