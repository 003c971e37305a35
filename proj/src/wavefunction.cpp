#include "llfisher/wavefunction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "llfisher/detail/summation.hpp"

namespace llfisher {

namespace {

constexpr double kCoincidence = 1e-14;

// A(kappa) = prod_{j<l} (1 + ic/(kappa_j - kappa_l)) [ (1 - ic/(kappa_j + kappa_l)) for hard wall ]
// and its c-derivative through the product rule, with kappa' = d kappa / dc.
std::pair<cdouble, cdouble> amplitude_and_derivative(const Eigen::VectorXd& kappa, const Eigen::VectorXd& dkappa,
                                                     double c, BoundaryCondition bc, double scale) {
  const cdouble i(0.0, 1.0);
  const Eigen::Index n = kappa.size();
  cdouble a = 1.0;
  cdouble log_derivative = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index l = j + 1; l < n; ++l) {
      const double d = kappa(j) - kappa(l);
      const double dd = dkappa(j) - dkappa(l);
      if (std::abs(d) < kCoincidence * scale)
        throw NumericalFailure("amplitudes: coincident quasimomenta make the state degenerate");
      const cdouble f = 1.0 + i * c / d;
      const cdouble df = i / d - i * c * dd / (d * d);
      a *= f;
      log_derivative += df / f;
      if (bc == BoundaryCondition::hard_wall) {
        const double s = kappa(j) + kappa(l);
        const double ds = dkappa(j) + dkappa(l);
        if (std::abs(s) < kCoincidence * scale)
          throw NumericalFailure("amplitudes: coincident quasimomenta make the state degenerate");
        const cdouble g = 1.0 - i * c / s;
        const cdouble dg = -i / s + i * c * ds / (s * s);
        a *= g;
        log_derivative += dg / g;
      }
    }
  }
  return {a, a * log_derivative};
}

}  // namespace

AmplitudeTable::AmplitudeTable(BoundaryCondition bc, ModelParams params, std::vector<AmplitudeTerm> terms)
    : bc_(bc), params_(params), terms_(std::move(terms)) {
  n_ = terms_.empty() ? 0 : static_cast<int>(terms_.front().wavevector.size());
  kappa_.reserve(terms_.size() * n_);
  dkappa_.reserve(terms_.size() * n_);
  for (const auto& t : terms_) {
    for (int j = 0; j < n_; ++j) {
      kappa_.push_back(t.wavevector(j));
      dkappa_.push_back(t.wavevector_dc(j));
    }
  }
}

std::pair<cdouble, cdouble> AmplitudeTable::evaluate(std::span<const double> x) const {
  const cdouble i(0.0, 1.0);
  const std::size_t nt = terms_.size();
  if (n_ >= 4) {
    detail::CompensatedSum<cdouble> value, dvalue;
    for (std::size_t t = 0; t < nt; ++t) {
      const double* kap = kappa_.data() + t * n_;
      const double* dkap = dkappa_.data() + t * n_;
      double phase = 0.0, dphase = 0.0;
      for (int j = 0; j < n_; ++j) {
        phase += kap[j] * x[j];
        dphase += dkap[j] * x[j];
      }
      const cdouble e = std::polar(1.0, phase);
      const cdouble w = terms_[t].weight();
      value.add(w * e);
      dvalue.add((terms_[t].weight_dc() + w * i * dphase) * e);
    }
    return {value.value(), dvalue.value()};
  }
  cdouble value = 0.0, dvalue = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const double* kap = kappa_.data() + t * n_;
    const double* dkap = dkappa_.data() + t * n_;
    double phase = 0.0, dphase = 0.0;
    for (int j = 0; j < n_; ++j) {
      phase += kap[j] * x[j];
      dphase += dkap[j] * x[j];
    }
    const cdouble e = std::polar(1.0, phase);
    const cdouble w = terms_[t].weight();
    value += w * e;
    dvalue += (terms_[t].weight_dc() + w * i * dphase) * e;
  }
  return {value, dvalue};
}

cdouble AmplitudeTable::value(std::span<const double> x) const { return evaluate(x).first; }

AmplitudeTable amplitudes(const BetheSolution& solution, const ModelParams& params, BoundaryCondition bc,
                          const WavefunctionOptions& options) {
  const int n = static_cast<int>(solution.k.size());
  if (n < 1) throw InvalidArgument("amplitudes: empty solution");
  if (!options.allow_large_n && n > particle_cap(bc))
    throw ResourceLimit("amplitudes: N = " + std::to_string(n) + " exceeds the default cap of " +
                        std::to_string(particle_cap(bc)) + " for " + to_string(bc) + " (use allow_large_n)");
  const double scale = std::max(1.0, solution.k.cwiseAbs().maxCoeff());

  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  const int sign_patterns = bc == BoundaryCondition::periodic ? 1 : (1 << n);

  std::vector<AmplitudeTerm> terms;
  do {
    for (int mask = 0; mask < sign_patterns; ++mask) {
      AmplitudeTerm t;
      t.permutation = perm;
      t.signs.assign(n, 1);
      t.wavevector.resize(n);
      t.wavevector_dc.resize(n);
      for (int j = 0; j < n; ++j) {
        if (mask & (1 << j)) {
          t.signs[j] = -1;
          t.sign_product = -t.sign_product;
        }
        t.wavevector(j) = t.signs[j] * solution.k(perm[j]);
        t.wavevector_dc(j) = t.signs[j] * solution.dk_dc(perm[j]);
      }
      std::tie(t.amplitude, t.amplitude_dc) =
          amplitude_and_derivative(t.wavevector, t.wavevector_dc, params.c, bc, scale);
      terms.push_back(std::move(t));
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return AmplitudeTable(bc, params, std::move(terms));
}

PointEval eval_ordered(const AmplitudeTable& table, const Eigen::VectorXd& x) {
  if (x.size() != table.n()) throw InvalidArgument("eval_ordered: point has wrong dimension");
  for (Eigen::Index j = 1; j < x.size(); ++j)
    if (x(j) < x(j - 1)) throw InvalidArgument("eval_ordered: coordinates must be non-decreasing");
  const auto [v, dv] = table.evaluate(std::span<const double>(x.data(), x.size()));
  return {v, dv, x};
}

PointEval eval_symmetric(const AmplitudeTable& table, const Eigen::VectorXd& x) {
  if (x.size() != table.n()) throw InvalidArgument("eval_symmetric: point has wrong dimension");
  const double length = table.params().length;
  for (Eigen::Index j = 0; j < x.size(); ++j)
    if (!(x(j) >= 0.0 && x(j) <= length)) throw InvalidArgument("eval_symmetric: coordinate outside [0, L]");
  Eigen::VectorXd sorted = x;
  std::sort(sorted.begin(), sorted.end());
  const auto [v, dv] = table.evaluate(std::span<const double>(sorted.data(), sorted.size()));
  return {v, dv, x};
}

std::string to_string(PhaseClass pc) {
  switch (pc) {
    case PhaseClass::real: return "real";
    case PhaseClass::imaginary: return "imaginary";
    default: return "general";
  }
}

PhaseClass global_phase_class(const StateSpec& spec, const BetheSolution&) {
  const int n = spec.n();
  if (spec.bc == BoundaryCondition::hard_wall) return n % 2 == 0 ? PhaseClass::real : PhaseClass::imaginary;
  // Symmetric about some centre iff I_j + I_{N+1-j} is the same for every j.
  const int total = spec.quantum_numbers.front().twice() + spec.quantum_numbers.back().twice();
  for (int j = 0; j < n; ++j)
    if (spec.quantum_numbers[j].twice() + spec.quantum_numbers[n - 1 - j].twice() != total)
      return PhaseClass::general;
  return PhaseClass::real;
}

double symmetry_center(const StateSpec& spec, const BetheSolution& solution) {
  if (spec.bc == BoundaryCondition::hard_wall) return 0.0;
  return solution.k.mean();
}

}  // namespace llfisher
