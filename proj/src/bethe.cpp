#include "llfisher/bethe.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace llfisher {

using std::numbers::pi;

StateSpec ground_state(BoundaryCondition bc, int n) {
  if (n < 1) throw InvalidArgument("ground_state: particle count must be >= 1");
  std::vector<HalfInteger> qn;
  qn.reserve(n);
  for (int j = 1; j <= n; ++j) {
    // periodic: I_j = -(N-1)/2 + (j-1), i.e. twice = 2j - N - 1
    qn.push_back(bc == BoundaryCondition::periodic ? HalfInteger::from_twice(2 * j - n - 1) : HalfInteger(j));
  }
  return make_state(bc, std::move(qn));
}

StateSpec type1_excitation(BoundaryCondition bc, int n, int q) {
  if (q < 1) throw InvalidArgument("type1_excitation: q must be >= 1");
  StateSpec spec = ground_state(bc, n);
  spec.quantum_numbers.back() = spec.quantum_numbers.back() + HalfInteger(q);
  validate(spec);
  return spec;
}

StateSpec type2_excitation(BoundaryCondition bc, int n, int q) {
  if (n < 2 || q < 1 || q > n - 1)
    throw InvalidArgument("type2_excitation: q must lie in [1, N-1], got q=" + std::to_string(q) +
                          " for N=" + std::to_string(n));
  StateSpec spec = ground_state(bc, n);
  for (int j = q; j <= n; ++j) spec.quantum_numbers[j - 1] = spec.quantum_numbers[j - 1] + HalfInteger(1);
  validate(spec);
  return spec;
}

double residual_tolerance(const Eigen::VectorXd& k, const ModelParams& params, const SolverOptions& options) {
  const double kmax = k.size() ? k.cwiseAbs().maxCoeff() : 0.0;
  return options.tolerance_scale * std::max(1.0, params.length * kmax);
}

Eigen::MatrixXd gaudin_matrix(const Eigen::VectorXd& k, const ModelParams& params, BoundaryCondition bc) {
  return gaudin_matrix<double>(k, params.c, params.length, bc);
}

namespace {

Eigen::VectorXd residual(const Eigen::VectorXd& k, const std::vector<double>& qn, double c, double length,
                         BoundaryCondition bc) {
  return bethe_residual<double>(k, qn, c, length, bc);
}

Eigen::VectorXd large_c_guess(const std::vector<double>& qn, double length, BoundaryCondition bc) {
  const double scale = (bc == BoundaryCondition::periodic ? 2.0 * pi : pi) / length;
  Eigen::VectorXd k(qn.size());
  for (std::size_t j = 0; j < qn.size(); ++j) k(j) = scale * qn[j];
  return k;
}

bool ordered(const Eigen::VectorXd& k, BoundaryCondition bc) {
  for (Eigen::Index j = 1; j < k.size(); ++j)
    if (!(k(j) > k(j - 1))) return false;
  if (bc == BoundaryCondition::hard_wall && k.size() && !(k(0) > 0.0)) return false;
  return k.allFinite();
}

struct NewtonOutcome {
  Eigen::VectorXd k;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

NewtonOutcome newton(const std::vector<double>& qn, const ModelParams& params, BoundaryCondition bc,
                     Eigen::VectorXd k, const SolverOptions& options, int max_iterations) {
  NewtonOutcome out;
  Eigen::VectorXd r = residual(k, qn, params.c, params.length, bc);
  double rnorm = r.cwiseAbs().maxCoeff();
  for (int it = 0; it < max_iterations; ++it) {
    out.iterations = it;
    if (rnorm <= residual_tolerance(k, params, options)) {
      out.converged = true;
      break;
    }
    const Eigen::MatrixXd h = gaudin_matrix(k, params, bc);
    const Eigen::VectorXd step = h.ldlt().solve(-r);
    if (!step.allFinite()) break;

    double t = 1.0;
    bool accepted = false;
    while (t > 1e-12) {
      Eigen::VectorXd trial = k + t * step;
      if (ordered(trial, bc)) {
        Eigen::VectorXd rt = residual(trial, qn, params.c, params.length, bc);
        const double tn = rt.cwiseAbs().maxCoeff();
        if (tn < rnorm) {
          k = std::move(trial);
          r = std::move(rt);
          rnorm = tn;
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) break;
  }
  if (!out.converged && rnorm <= residual_tolerance(k, params, options)) out.converged = true;
  out.k = std::move(k);
  out.residual = rnorm;
  return out;
}

// c -> 0+ limit of the logarithmic equations, where every arctan saturates.
Eigen::VectorXd free_limit(const StateSpec& spec, double length) {
  const int n = spec.n();
  Eigen::VectorXd k(n);
  for (int j = 1; j <= n; ++j) {
    const double ij = spec.quantum_numbers[j - 1].value();
    if (spec.bc == BoundaryCondition::periodic) {
      k(j - 1) = 2.0 * pi / length * (ij - j + 0.5 * (n + 1));
    } else {
      k(j - 1) = pi / length * (ij - j + 1);
    }
  }
  return k;
}

}  // namespace

BetheSolution solve_bethe(const StateSpec& spec, const ModelParams& params, const SolverOptions& options) {
  validate(spec);
  validate(params);
  const auto qn = spec.quantum_values();
  const BoundaryCondition bc = spec.bc;

  BetheSolution sol;
  if (params.c == 0.0) {
    Eigen::VectorXd k = free_limit(spec, params.length);
    if (!ordered(k, bc))
      throw InvalidArgument("state " + spec.label() +
                            " is degenerate at c = 0; the Bethe parametrization is singular there, use c > 0");
    sol.k = std::move(k);
    sol.residual = residual(sol.k, qn, 0.0, params.length, bc).cwiseAbs().maxCoeff();
  } else {
    NewtonOutcome out;
    const Eigen::VectorXd guess = large_c_guess(qn, params.length, bc);
    const bool weak = params.c * params.length < 1.0;
    out = newton(qn, params, bc, guess, options, weak ? std::min(50, options.max_iterations) : options.max_iterations);
    if (!out.converged && weak) {
      // Geometric continuation from c L = 10 down to the requested coupling.
      const double c_start = 10.0 / params.length;
      const int steps = std::max(1, options.continuation_steps);
      Eigen::VectorXd k = guess;
      int total = 0;
      for (int s = 0; s <= steps; ++s) {
        const double cs = c_start * std::pow(params.c / c_start, static_cast<double>(s) / steps);
        ModelParams p{s == steps ? params.c : cs, params.length};
        out = newton(qn, p, bc, k, options, options.max_iterations);
        total += out.iterations;
        if (!out.converged)
          throw SolverFailure("continuation failed at c = " + std::to_string(p.c) + " for state " + spec.label(),
                              out.residual);
        k = out.k;
      }
      out.iterations = total;
    }
    if (!out.converged)
      throw SolverFailure("Bethe equations did not converge for state " + spec.label(), out.residual);
    sol.k = std::move(out.k);
    sol.residual = out.residual;
    sol.iterations = out.iterations;
  }
  if (!ordered(sol.k, bc)) throw SolverFailure("solution lost its ordering for state " + spec.label(), sol.residual);

  sol.dk_dc = dk_dc(sol.k, params, bc);
  sol.energy = sol.k.squaredNorm();
  sol.momentum = momentum(spec, sol, params);
  return sol;
}

Eigen::VectorXd dk_dc(const Eigen::VectorXd& k, const ModelParams& params, BoundaryCondition bc) {
  const Eigen::Index n = k.size();
  const double c2 = params.c * params.c;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index l = 0; l < n; ++l) {
      if (l == a) continue;
      const double dm = k(a) - k(l);
      if (bc == BoundaryCondition::periodic) {
        rhs(a) += 2.0 * dm / (c2 + dm * dm);
      } else {
        const double dp = k(a) + k(l);
        rhs(a) += dm / (c2 + dm * dm) + dp / (c2 + dp * dp);
      }
    }
  }
  const Eigen::MatrixXd h = gaudin_matrix(k, params, bc);
  Eigen::LLT<Eigen::MatrixXd> llt(h);
  if (llt.info() != Eigen::Success) throw NumericalFailure("dk_dc: norm matrix is not positive definite");
  Eigen::VectorXd out = llt.solve(rhs);
  if (!out.allFinite()) throw NumericalFailure("dk_dc: singular norm matrix");
  return out;
}

NormData norm_sq(const Eigen::VectorXd& k, const ModelParams& params, BoundaryCondition bc) {
  NormData out;
  out.matrix = gaudin_matrix(k, params, bc);
  out.determinant = out.matrix.determinant();
  const double c2 = params.c * params.c;
  double prefactor = bc == BoundaryCondition::hard_wall ? std::ldexp(1.0, static_cast<int>(k.size())) : 1.0;
  for (Eigen::Index j = 0; j < k.size(); ++j) {
    for (Eigen::Index l = j + 1; l < k.size(); ++l) {
      const double dm = k(j) - k(l);
      prefactor *= 1.0 + c2 / (dm * dm);
      if (bc == BoundaryCondition::hard_wall) {
        const double dp = k(j) + k(l);
        prefactor *= 1.0 + c2 / (dp * dp);
      }
    }
  }
  out.norm_sq = prefactor * out.determinant;
  if (!(out.determinant > 0.0) || !std::isfinite(out.norm_sq))
    throw NumericalFailure("norm_sq: Gaudin determinant is not positive");
  return out;
}

double dnorm_sq_dc(const StateSpec& spec, const ModelParams& params, const SolverOptions& options) {
  if (!(params.c > 0.0)) throw InvalidArgument("dnorm_sq_dc requires c > 0");
  double h = 1e-5 * std::max(params.c, 1.0);
  if (params.c - h <= 0.0) h = 0.5 * params.c;
  auto at = [&](double c) {
    const ModelParams p{c, params.length};
    return norm_sq(solve_bethe(spec, p, options).k, p, spec.bc).norm_sq;
  };
  return (at(params.c + h) - at(params.c - h)) / (2.0 * h);
}

double momentum(const StateSpec& spec, const BetheSolution& solution, const ModelParams& params) {
  if (spec.bc == BoundaryCondition::periodic) return solution.k.sum();
  double s = 0.0;
  for (int j = 1; j <= spec.n(); ++j) s += spec.quantum_numbers[j - 1].value() - j + 1;
  return pi / params.length * s;
}

}  // namespace llfisher
