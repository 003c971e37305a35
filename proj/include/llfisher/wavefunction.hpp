#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "llfisher/bethe.hpp"
#include "llfisher/types.hpp"

namespace llfisher {

using cdouble = std::complex<double>;

// One plane-wave component of the ansatz on 0 <= x_1 <= ... <= x_N <= L:
//   sign * A * exp(i wavevector . x)
// Periodic terms have sign +1 and wavevector k_P; hard-wall terms carry the
// reflection signs eps and wavevector (eps_j k_{P_j}).
struct AmplitudeTerm {
  std::vector<int> permutation;  // P, 0-based
  std::vector<int> signs;        // eps_j in {+1,-1}; all +1 for periodic
  int sign_product = 1;          // pi_eps
  cdouble amplitude;             // A(P) or A(eps, P)
  cdouble amplitude_dc;          // dA/dc along the solution branch
  Eigen::VectorXd wavevector;
  Eigen::VectorXd wavevector_dc;

  cdouble weight() const { return static_cast<double>(sign_product) * amplitude; }
  cdouble weight_dc() const { return static_cast<double>(sign_product) * amplitude_dc; }
};

struct WavefunctionOptions {
  bool allow_large_n = false;  // lift the default particle caps
};

// Immutable once built; evaluation is O(terms * N) per point.
class AmplitudeTable {
 public:
  AmplitudeTable(BoundaryCondition bc, ModelParams params, std::vector<AmplitudeTerm> terms);

  BoundaryCondition bc() const { return bc_; }
  const ModelParams& params() const { return params_; }
  int n() const { return n_; }
  const std::vector<AmplitudeTerm>& terms() const { return terms_; }

  // Value and c-derivative of the unnormalized ansatz at an ordered point,
  // without bounds checks or allocation.
  std::pair<cdouble, cdouble> evaluate(std::span<const double> ordered_x) const;
  cdouble value(std::span<const double> ordered_x) const;

 private:
  BoundaryCondition bc_;
  ModelParams params_;
  int n_ = 0;
  std::vector<AmplitudeTerm> terms_;
  // Flattened copies of the wavevectors for the evaluation loop.
  std::vector<double> kappa_;
  std::vector<double> dkappa_;
};

AmplitudeTable amplitudes(const BetheSolution& solution, const ModelParams& params, BoundaryCondition bc,
                          const WavefunctionOptions& options = {});

struct PointEval {
  cdouble value;
  cdouble dvalue_dc;
  Eigen::VectorXd at;
};

// x must satisfy 0 <= x_1 <= ... <= x_N <= L.
PointEval eval_ordered(const AmplitudeTable& table, const Eigen::VectorXd& x);
// Bosonic extension to the whole box [0, L]^N.
PointEval eval_symmetric(const AmplitudeTable& table, const Eigen::VectorXd& x);

enum class PhaseClass { real, imaginary, general };

std::string to_string(PhaseClass pc);

// Real / Imaginary mean the wavefunction is e^{i phi} times a real function
// with phi independent of x and c (for periodic states after removing the
// c-independent centre-of-mass factor exp(i K sum x)).
PhaseClass global_phase_class(const StateSpec& spec, const BetheSolution& solution);

// The centre K of a periodic state whose quasimomenta are symmetric about K;
// zero for hard-wall states.
double symmetry_center(const StateSpec& spec, const BetheSolution& solution);

}  // namespace llfisher
