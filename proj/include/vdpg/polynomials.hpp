#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace vdpg {

// Legendre polynomials P_0..P_order at t, with derivatives.
template <typename Scalar>
void legendre(int order, const Scalar& t, Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> val,
              Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> der) {
  val(0) = 1;
  der(0) = 0;
  if (order >= 1) {
    val(1) = t;
    der(1) = 1;
  }
  for (int k = 2; k <= order; ++k) {
    val(k) = ((2 * k - 1) * t * val(k - 1) - (k - 1) * val(k - 2)) / Scalar(k);
    der(k) = der(k - 2) + Scalar(2 * k - 1) * val(k - 1);
  }
}

// Hierarchical H1 basis on [-1,1]: (1-t)/2, (1+t)/2, then integrated Legendre bubbles
// phi_j = (P_j - P_{j-2}) / sqrt(2(2j-1)), j = 2..order.
template <typename Scalar>
void integrated_legendre(int order, const Scalar& t, Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> val,
                         Eigen::Ref<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>> der) {
  if (order == 0) {
    val(0) = 1;
    der(0) = 0;
    return;
  }
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> p(order + 1), dp(order + 1);
  legendre<Scalar>(order, t, p, dp);
  val(0) = (1 - t) / 2;
  der(0) = Scalar(-0.5);
  val(1) = (1 + t) / 2;
  der(1) = Scalar(0.5);
  for (int j = 2; j <= order; ++j) {
    const Scalar s = std::sqrt(Scalar(2 * (2 * j - 1)));
    val(j) = (p(j) - p(j - 2)) / s;
    der(j) = (dp(j) - dp(j - 2)) / s;
  }
}

}  // namespace vdpg
