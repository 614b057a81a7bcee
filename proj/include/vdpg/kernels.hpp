#pragma once

// Pointwise integrands of the ultraweak viscoelastic system, templated on the
// scalar type so they can be probed with unit jets or differentiated.

#include <Eigen/Dense>

#include "vdpg/model.hpp"

namespace vdpg {

template <typename Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;
template <typename Scalar>
using Mat2 = Eigen::Matrix<Scalar, 2, 2>;

template <typename Scalar>
struct FieldState {
  Vec2<Scalar> u = Vec2<Scalar>::Zero();
  Scalar p = Scalar(0);
  Mat2<Scalar> L = Mat2<Scalar>::Zero();
  Mat2<Scalar> T = Mat2<Scalar>::Zero();  // symmetric

  static FieldState from_components(const Eigen::Matrix<Scalar, comp::count, 1>& c) {
    FieldState s;
    s.u << c(comp::u1), c(comp::u2);
    s.p = c(comp::p);
    s.L << c(comp::L11), c(comp::L12), c(comp::L21), c(comp::L22);
    s.T << c(comp::T11), c(comp::T12), c(comp::T12), c(comp::T22);
    return s;
  }
};

// Values and physical gradients of the ten test components at one point.
template <typename Scalar>
struct TestJet {
  Eigen::Matrix<Scalar, comp::count, 1> val = Eigen::Matrix<Scalar, comp::count, 1>::Zero();
  Eigen::Matrix<Scalar, comp::count, 2> grad = Eigen::Matrix<Scalar, comp::count, 2>::Zero();

  Vec2<Scalar> v() const { return Vec2<Scalar>(val(comp::v1), val(comp::v2)); }
  Scalar q() const { return val(comp::q); }
  Mat2<Scalar> M() const {
    Mat2<Scalar> m;
    m << val(comp::M11), val(comp::M12), val(comp::M21), val(comp::M22);
    return m;
  }
  Mat2<Scalar> S() const {
    Mat2<Scalar> s;
    s << val(comp::S11), val(comp::S12), val(comp::S12), val(comp::S22);
    return s;
  }
  // (grad v)_ij = d_j v_i
  Mat2<Scalar> grad_v() const { return grad.template topRows<2>(); }
  Vec2<Scalar> grad_q() const { return grad.row(comp::q).transpose(); }
  Vec2<Scalar> div_M() const {
    return Vec2<Scalar>(grad(comp::M11, 0) + grad(comp::M12, 1), grad(comp::M21, 0) + grad(comp::M22, 1));
  }
  // d_k S
  Mat2<Scalar> dS(int k) const {
    Mat2<Scalar> s;
    s << grad(comp::S11, k), grad(comp::S12, k), grad(comp::S12, k), grad(comp::S22, k);
    return s;
  }
};

template <typename Scalar>
Scalar frob(const Mat2<Scalar>& a, const Mat2<Scalar>& b) {
  return (a.array() * b.array()).sum();
}

// Integrand of the nonlinear field form b_nl^fld(state, test).
template <typename Scalar>
Scalar nonlinear_field_integrand(const ModelParams& m, const FieldState<Scalar>& s, const TestJet<Scalar>& t) {
  const Mat2<Scalar> gv = t.grad_v(), S = t.S();
  const Mat2<Scalar> uS = s.u(0) * t.dS(0) + s.u(1) * t.dS(1);  // (u . grad) S
  const double lam = m.lambda, a = m.mobility();
  Scalar r = m.rho * (s.L * s.u).dot(t.v()) - s.p * gv.trace() + m.eta_s * frob(s.L, gv) + frob(s.T, gv) +
             frob(s.L, t.M()) + s.u.dot(t.div_M()) - s.u.dot(t.grad_q()) + frob(s.T, S) - lam * frob(s.T, uS) -
             2 * lam * frob<Scalar>(s.L * s.T, S) - 2 * m.eta_p * frob(s.L, S);
  if (a != 0) r += a * lam / m.eta_p * frob<Scalar>(s.T * s.T, S);
  return r;
}

// Adjoint groups of the linearized field form at background `bg`: the linearized
// form equals sum_c w_c delta_c out_c with the pairing weights w. The symmetric
// T-group is returned through its (11, 12, 22) components.
template <typename Scalar>
Eigen::Matrix<Scalar, comp::count, 1> adjoint_groups(const ModelParams& m, const FieldState<Scalar>& bg,
                                                     const TestJet<Scalar>& t) {
  const Mat2<Scalar> gv = t.grad_v(), S = t.S(), M = t.M();
  const Vec2<Scalar> v = t.v();
  const double lam = m.lambda, a = m.mobility();
  Vec2<Scalar> gu = m.rho * bg.L.transpose() * v - t.grad_q() + t.div_M();
  for (int k = 0; k < 2; ++k) gu(k) -= lam * frob(t.dS(k), bg.T);
  const Mat2<Scalar> gL = m.eta_s * gv + m.rho * v * bg.u.transpose() + M - 2 * m.eta_p * S - 2 * lam * S * bg.T;
  const Scalar gp = -gv.trace();
  Mat2<Scalar> gT = gv + S - lam * (bg.u(0) * t.dS(0) + bg.u(1) * t.dS(1)) - 2 * lam * bg.L.transpose() * S;
  if (a != 0) gT += a * lam / m.eta_p * (bg.T * S + S * bg.T);
  const Mat2<Scalar> sT = 0.5 * (gT + gT.transpose());
  Eigen::Matrix<Scalar, comp::count, 1> out;
  out << gu(0), gu(1), gp, gL(0, 0), gL(0, 1), gL(1, 0), gL(1, 1), sT(0, 0), sT(0, 1), sT(1, 1);
  return out;
}

// Weights of the adjoint groups in the graph norm (per output component).
inline Eigen::Matrix<double, comp::count, 1> graph_group_weights(const ModelParams& m) {
  const double wu = (m.l0 / m.eta()) * (m.l0 / m.eta()), wl = 1.0 / (m.eta_s * m.eta_s);
  Eigen::Matrix<double, comp::count, 1> w;
  w << wu, wu, 1, wl, wl, wl, wl, 1, 1, 1;
  return w.cwiseProduct(pairing_weights());
}

}  // namespace vdpg
