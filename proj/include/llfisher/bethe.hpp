#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "llfisher/types.hpp"

namespace llfisher {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// State constructors
// ---------------------------------------------------------------------------

StateSpec ground_state(BoundaryCondition bc, int n);
// Highest particle lifted by q: maximal energy at fixed (pseudo-)momentum.
StateSpec type1_excitation(BoundaryCondition bc, int n, int q);
// Hole at position q, 1 <= q <= N-1. Periodic q = 1 is the Umklapp state.
StateSpec type2_excitation(BoundaryCondition bc, int n, int q);

// ---------------------------------------------------------------------------
// Bethe equations in logarithmic form, templated on the scalar so tests can
// evaluate them in extended precision.
//
//   periodic : L k_j + 2 sum_l atan((k_j - k_l)/c) - 2 pi I_j
//   hard wall: L k_j + sum_{l != j} [atan((k_j - k_l)/c) + atan((k_j + k_l)/c)] - pi I_j
// ---------------------------------------------------------------------------

template <typename Scalar>
VectorX<Scalar> bethe_residual(const VectorX<Scalar>& k, std::span<const double> quantum_numbers, Scalar c,
                               Scalar length, BoundaryCondition bc) {
  using std::atan;
  const Eigen::Index n = k.size();
  const Scalar pi = std::numbers::pi_v<Scalar>;
  VectorX<Scalar> r(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    Scalar phase = Scalar(0);
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == j) continue;
      if (bc == BoundaryCondition::periodic) {
        phase += Scalar(2) * atan((k(j) - k(l)) / c);
      } else {
        phase += atan((k(j) - k(l)) / c) + atan((k(j) + k(l)) / c);
      }
    }
    const Scalar scale = bc == BoundaryCondition::periodic ? Scalar(2) * pi : pi;
    r(j) = length * k(j) + phase - scale * Scalar(quantum_numbers[j]);
  }
  return r;
}

// Norm matrix H. For both boundary conditions it is also the exact Jacobian
// of bethe_residual with respect to k (the Hessian of the Yang-Yang action).
template <typename Scalar>
MatrixX<Scalar> gaudin_matrix(const VectorX<Scalar>& k, Scalar c, Scalar length, BoundaryCondition bc) {
  const Eigen::Index n = k.size();
  MatrixX<Scalar> h = MatrixX<Scalar>::Zero(n, n);
  const Scalar c2 = c * c;
  for (Eigen::Index i = 0; i < n; ++i) {
    h(i, i) = length;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const Scalar dm = k(i) - k(j);
      if (bc == BoundaryCondition::periodic) {
        const Scalar w = Scalar(2) * c / (dm * dm + c2);
        h(i, i) += w;
        h(i, j) = -w;
      } else {
        const Scalar dp = k(i) + k(j);
        const Scalar wm = c / (dm * dm + c2);
        const Scalar wp = c / (dp * dp + c2);
        h(i, i) += wm + wp;
        h(i, j) = -wm + wp;
      }
    }
  }
  return h;
}

// ---------------------------------------------------------------------------
// Solutions
// ---------------------------------------------------------------------------

struct BetheSolution {
  Eigen::VectorXd k;      // quasimomenta, ordered like the quantum numbers
  Eigen::VectorXd dk_dc;  // derivative along the solution branch
  double energy = 0.0;    // sum k_j^2
  double momentum = 0.0;  // total momentum (periodic) or pseudo-momentum (hard wall)
  double residual = 0.0;  // max-norm of the Bethe residual
  int iterations = 0;
};

struct SolverOptions {
  int max_iterations = 200;
  double tolerance_scale = 1e-12;  // residual <= scale * max(1, L max|k|)
  int continuation_steps = 10;
};

// Damped Newton on the logarithmic Bethe equations, started from the
// c -> infinity quasimomenta; continuation in c when c L < 1 and the direct
// iteration stalls. c = 0 returns the free limit when it is non-degenerate
// and throws InvalidArgument otherwise.
BetheSolution solve_bethe(const StateSpec& spec, const ModelParams& params, const SolverOptions& options = {});

double residual_tolerance(const Eigen::VectorXd& k, const ModelParams& params, const SolverOptions& options = {});

Eigen::MatrixXd gaudin_matrix(const Eigen::VectorXd& k, const ModelParams& params, BoundaryCondition bc);

// dk_j/dc from differentiating the Bethe equations at fixed quantum numbers.
Eigen::VectorXd dk_dc(const Eigen::VectorXd& k, const ModelParams& params, BoundaryCondition bc);

struct NormData {
  Eigen::MatrixXd matrix;  // H (periodic) or Hessian H(B) (hard wall)
  double determinant = 0.0;
  double norm_sq = 0.0;    // squared norm of the unnormalized ansatz on 0 < x_1 < ... < x_N < L
};

NormData norm_sq(const Eigen::VectorXd& k, const ModelParams& params, BoundaryCondition bc);

// d(N^2)/dc along k(c), by central differences of re-solved states.
double dnorm_sq_dc(const StateSpec& spec, const ModelParams& params, const SolverOptions& options = {});

double momentum(const StateSpec& spec, const BetheSolution& solution, const ModelParams& params);

}  // namespace llfisher
