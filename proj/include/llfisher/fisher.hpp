#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "llfisher/bethe.hpp"
#include "llfisher/integrals.hpp"
#include "llfisher/types.hpp"
#include "llfisher/wavefunction.hpp"

namespace llfisher {

struct FisherOptions {
  SolverOptions solver;
  WavefunctionOptions wavefunction;
  IntegralMethod integrals = IntegralMethod::automatic;
  double fallback_tolerance = 1e-12;
  int quadrature_order = 0;  // 0: default_quadrature_order(N)
  int threads = 0;           // 0: LLFISHER_THREADS, else hardware concurrency
};

// Pieces of the permutation-pair expansion, all over the ordered simplex
// with the unnormalized ansatz psi~ and its c-derivative psi~':
//   s0 = <psi~|psi~>, s1 = <psi~'|psi~'>, s2 = <psi~|psi~'>.
struct QfiBreakdown {
  double qfi = 0.0;
  double norm_sq = 0.0;  // Gaudin determinant form
  cdouble s0, s1, s2;
  double imaginary_residue = 0.0;  // |Im s1| / |s1| before truncation
  std::size_t pairs = 0;
  std::size_t distinct_lambdas = 0;
  std::size_t divided_difference_bundles = 0;
};

QfiBreakdown qfi_breakdown(const StateSpec& spec, const ModelParams& params, const FisherOptions& options = {});
double qfi_analytic(const StateSpec& spec, const ModelParams& params, const FisherOptions& options = {});

// <psi_a|psi_b> over [0, L]^N for two normalized eigenstates of the same
// quantum numbers at couplings a and b.
cdouble normalized_overlap(const StateSpec& spec, const ModelParams& a, const ModelParams& b,
                           const FisherOptions& options = {});

inline double default_overlap_delta(double c) { return 1e-3 * c; }

// Fidelity estimate 8 (1 - |<psi_c|psi_{c+-delta}>|) / delta^2, averaged over
// both sides. delta <= 0 selects default_overlap_delta; requires c > delta.
double qfi_overlap_oracle(const StateSpec& spec, const ModelParams& params, double delta = 0.0,
                          const FisherOptions& options = {});

enum class CfiMethod { analytic, quadrature };
std::string to_string(CfiMethod method);

// Real- and Imaginary-class states return the QFI; otherwise 4 (d|psi|/dc)^2
// is integrated with simplex quadrature.
double cfi(const StateSpec& spec, const ModelParams& params, const FisherOptions& options = {});
double cfi_quadrature(const StateSpec& spec, const ModelParams& params, const FisherOptions& options = {});

struct FisherReport {
  StateSpec state;
  ModelParams params;
  double qfi = 0.0;
  double cfi = 0.0;
  double phase_variance_term = 0.0;  // max(qfi - cfi, 0)
  double raw_gap = 0.0;              // qfi - cfi before clamping
  PhaseClass phase_class = PhaseClass::general;
  CfiMethod cfi_method = CfiMethod::analytic;
  int quadrature_order = 0;
  double imaginary_residue = 0.0;
  double norm_sq = 0.0;
  double norm_sq_direct = 0.0;
  std::size_t divided_difference_bundles = 0;
};

FisherReport fisher_report(const StateSpec& spec, const ModelParams& params, const FisherOptions& options = {});

// ---------------------------------------------------------------------------
// Optimal length
// ---------------------------------------------------------------------------

struct LmaxResult {
  double l_max = 0.0;
  double f_max = 0.0;
  double c = 0.0;
  double tolerance = 0.0;
  int evaluations = 0;
  double cl_max() const { return c * l_max; }
};

// Default bracket [2/c, 60/c].
std::pair<double, double> default_lmax_bracket(double c);

// Golden-section maximization of the CFI over L with absolute tolerance
// 1e-3 * upper bracket end. Throws BracketError when the maximum is not
// interior.
LmaxResult lmax(const StateSpec& spec, double c, std::pair<double, double> bracket,
                const FisherOptions& options = {});

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

enum class SweepAxis { c, length };
std::string to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& text);

struct SweepPoint {
  double value = 0.0;
  std::optional<FisherReport> report;
  std::string error;  // empty when report is set
};

struct SweepResult {
  SweepAxis axis = SweepAxis::c;
  StateSpec state;
  double fixed_value = 0.0;
  std::vector<SweepPoint> points;

  std::size_t failures() const;
  // Over consecutive successful points, using the CFI.
  bool strictly_decreasing() const;
  bool strictly_increasing() const;
  std::optional<std::size_t> argmax() const;
};

// Grid must be non-empty and strictly increasing; failures are recorded per
// point and the sweep continues.
SweepResult sweep(const StateSpec& spec, SweepAxis axis, const std::vector<double>& grid, double fixed_value,
                  const FisherOptions& options = {});

}  // namespace llfisher
