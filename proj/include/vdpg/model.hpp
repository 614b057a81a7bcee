#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace vdpg {

enum class Model { oldroyd_b, giesekus };
enum class Coupling { stokes, navier_stokes };

const char* to_string(Model m);
const char* to_string(Coupling c);
Model model_from_string(const std::string& s);
Coupling coupling_from_string(const std::string& s);

struct ModelParams {
  double rho = 0.0;
  double eta_s = 0.59;
  double eta_p = 0.41;
  double lambda = 0.1;
  double alpha = 0.0;
  double l0 = 1.0;
  double ubar = 1.0;
  double R = 1.0;
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  Model model = Model::oldroyd_b;
  Coupling coupling = Coupling::stokes;

  double eta() const { return eta_s + eta_p; }
  double beta() const { return eta_s / eta(); }
  double Re() const { return rho * ubar * R / eta(); }
  double Wi() const { return lambda * ubar / R; }
  // Mobility factor entering the form (zero for Oldroyd-B).
  double mobility() const { return model == Model::giesekus ? alpha : 0.0; }
  void validate() const;

  // ubar = R = eta = 1: lambda = Wi, rho = Re, eta_s = beta, eta_p = 1 - beta.
  static ModelParams nondimensional(double Wi, double Re, double beta = 0.59, double alpha = 0.0,
                                    Model model = Model::oldroyd_b);
};

// Index layout shared by trial fields and test slots (10 scalar components).
namespace comp {
enum : int { u1 = 0, u2, p, L11, L12, L21, L22, T11, T12, T22 };
enum : int { v1 = 0, v2, q, M11, M12, M21, M22, S11, S12, S22 };
constexpr int count = 10;
}  // namespace comp

// Pairing weights: symmetric tensors are stored as (11, 12, 22) and the
// off-diagonal entry counts twice in the Frobenius product.
inline const Eigen::Matrix<double, comp::count, 1>& pairing_weights() {
  static const Eigen::Matrix<double, comp::count, 1> w =
      (Eigen::Matrix<double, comp::count, 1>() << 1, 1, 1, 1, 1, 1, 1, 1, 2, 1).finished();
  return w;
}

// Manufactured source terms, paired with the test slots as sum_c w_c s_c(x) test_c.
using SourceFn = std::function<Eigen::Matrix<double, comp::count, 1>(const Eigen::Vector2d&)>;

}  // namespace vdpg
