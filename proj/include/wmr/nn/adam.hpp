#pragma once

#include "wmr/error.hpp"

#include <Eigen/Core>

#include <cmath>
#include <vector>

namespace wmr::nn {

/// Adam moments for a flat list of parameter vectors.
template <class Scalar>
struct AdamState {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  std::vector<Vector> m, v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double lr = 1e-4;
};

template <class Scalar>
void adam_step(const std::vector<Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*>& params,
               const std::vector<const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>*>& grads, AdamState<Scalar>& state) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (params.size() != grads.size()) throw Error(ErrorKind::shape_error, "adam: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const Vector* p : params) {
      state.m.push_back(Vector::Zero(p->size()));
      state.v.push_back(Vector::Zero(p->size()));
    }
  }
  if (state.m.size() != params.size()) throw Error(ErrorKind::shape_error, "adam: state does not match parameters");
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i]->size() != grads[i]->size() || state.m[i].size() != params[i]->size())
      throw Error(ErrorKind::shape_error, "adam: shape mismatch in parameter " + std::to_string(i));
    if (!grads[i]->allFinite()) throw Error(ErrorKind::numeric_error, "adam: non-finite gradient");
  }

  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  const Scalar b1 = static_cast<Scalar>(state.beta1), b2 = static_cast<Scalar>(state.beta2);
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Vector& g = *grads[i];
    state.m[i] = b1 * state.m[i] + (Scalar(1) - b1) * g;
    state.v[i] = b2 * state.v[i] + (Scalar(1) - b2) * g.cwiseProduct(g);
    const auto m_hat = state.m[i].array() / static_cast<Scalar>(c1);
    const auto v_hat = state.v[i].array() / static_cast<Scalar>(c2);
    params[i]->array() -= static_cast<Scalar>(state.lr) * m_hat / (v_hat.sqrt() + static_cast<Scalar>(state.eps));
  }
}

}  // namespace wmr::nn
