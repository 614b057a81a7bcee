#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace vdpg {

// Gauss-Legendre rule on [-1,1].
template <typename Scalar>
struct GaussRule {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> points;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  int size() const { return static_cast<int>(points.size()); }
};

// Tensorized rule on [-1,1]^2; point k = (points(k,0), points(k,1)).
template <typename Scalar>
struct QuadRule2D {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 2> points;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> weights;
  int size() const { return static_cast<int>(weights.size()); }
};

template <typename Scalar = double>
GaussRule<Scalar> gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n must be >= 1");
  GaussRule<Scalar> rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const Scalar pi = Scalar(3.14159265358979323846264338327950288);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Scalar x = std::cos(pi * (Scalar(i) + Scalar(0.75)) / (Scalar(n) + Scalar(0.5)));
    Scalar dp = 1;
    for (int it = 0; it < 100; ++it) {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const Scalar dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < Scalar(1e-16)) break;
    }
    {
      Scalar p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const Scalar pk = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
    }
    const Scalar w = 2 / ((1 - x * x) * dp * dp);
    rule.points(i) = -x;
    rule.points(n - 1 - i) = x;
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  if (n % 2 == 1) rule.points(n / 2) = 0;
  return rule;
}

template <typename Scalar = double>
QuadRule2D<Scalar> tensor_rule(int n) {
  const GaussRule<Scalar> g = gauss_rule<Scalar>(n);
  QuadRule2D<Scalar> rule;
  rule.points.resize(n * n, 2);
  rule.weights.resize(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int k = i + n * j;
      rule.points(k, 0) = g.points(i);
      rule.points(k, 1) = g.points(j);
      rule.weights(k) = g.weights(i) * g.weights(j);
    }
  return rule;
}

}  // namespace vdpg
