#include "llfisher/fisher.hpp"

#include <cmath>
#include <map>

#include "llfisher/detail/parallel.hpp"
#include "llfisher/detail/summation.hpp"

namespace llfisher {

namespace {

const cdouble I(0.0, 1.0);

struct Prepared {
  BetheSolution solution;
  AmplitudeTable table;
  NormData norm;
};

Prepared prepare(const StateSpec& spec, const ModelParams& params, const FisherOptions& options) {
  BetheSolution sol = solve_bethe(spec, params, options.solver);
  AmplitudeTable table = amplitudes(sol, params, spec.bc, options.wavefunction);
  NormData norm = norm_sq(sol.k, params, spec.bc);
  return {std::move(sol), std::move(table), std::move(norm)};
}

struct RowSums {
  cdouble s0, s1, s2;
};

}  // namespace

QfiBreakdown qfi_breakdown(const StateSpec& spec, const ModelParams& params, const FisherOptions& options) {
  const Prepared prep = prepare(spec, params, options);
  const auto& terms = prep.table.terms();
  const std::size_t nt = terms.size();
  const double length = params.length;

  // Distinct lambda = kappa_sigma - kappa_tau over the upper triangle.
  std::map<std::vector<double>, std::size_t> index;
  std::vector<std::vector<std::size_t>> pair_slot(nt);
  std::vector<Eigen::VectorXd> lambdas;
  for (std::size_t s = 0; s < nt; ++s) {
    pair_slot[s].reserve(nt - s);
    for (std::size_t t = s; t < nt; ++t) {
      const Eigen::VectorXd lam = terms[s].wavevector - terms[t].wavevector;
      std::vector<double> key(lam.data(), lam.data() + lam.size());
      auto [it, inserted] = index.emplace(std::move(key), lambdas.size());
      if (inserted) lambdas.push_back(lam);
      pair_slot[s].push_back(it->second);
    }
  }

  const int threads = detail::resolve_threads(options.threads);
  std::vector<SimplexMoments> moments(lambdas.size());
  detail::parallel_for(lambdas.size(), threads, [&](std::size_t u) {
    moments[u] = simplex_moments(lambdas[u], length, options.integrals, options.fallback_tolerance);
  });

  std::vector<RowSums> rows(nt);
  detail::parallel_for(nt, threads, [&](std::size_t s) {
    const AmplitudeTerm& ts = terms[s];
    const cdouble as = ts.weight(), das = ts.weight_dc();
    const Eigen::VectorXd& ps = ts.wavevector_dc;
    detail::CompensatedSum<cdouble> s0, s1, s2;
    for (std::size_t t = s; t < nt; ++t) {
      const AmplitudeTerm& tt = terms[t];
      const cdouble at = tt.weight(), dat = tt.weight_dc();
      const Eigen::VectorXd& pt = tt.wavevector_dc;
      const SimplexMoments& m = moments[pair_slot[s][t - s]];

      const cdouble first_t = pt.cast<cdouble>().dot(m.first);  // sum_l kappa'_tau,l I^1_l
      const cdouble first_s = ps.cast<cdouble>().dot(m.first);
      const cdouble second = ps.cast<cdouble>().dot(m.second * pt.cast<cdouble>());

      const cdouble t0 = std::conj(as) * at * m.base;
      const cdouble t1 = std::conj(das) * dat * m.base + I * std::conj(das) * at * first_t -
                         I * std::conj(as) * dat * first_s + std::conj(as) * at * second;
      const cdouble t2 = std::conj(as) * (dat * m.base + I * at * first_t);
      if (t == s) {
        s0.add(t0);
        s1.add(t1);
        s2.add(t2);
      } else {
        s0.add(t0 + std::conj(t0));
        s1.add(t1 + std::conj(t1));
        s2.add(t2);
        // (tau, sigma) uses the moments at -lambda, i.e. their conjugates.
        const cdouble first_s_conj = ps.cast<cdouble>().dot(m.first.conjugate());
        s2.add(std::conj(at) * (das * std::conj(m.base) + I * as * first_s_conj));
      }
    }
    rows[s] = {s0.value(), s1.value(), s2.value()};
  });

  detail::CompensatedSum<cdouble> s0, s1, s2;
  for (const auto& r : rows) {
    s0.add(r.s0);
    s1.add(r.s1);
    s2.add(r.s2);
  }

  QfiBreakdown out;
  out.norm_sq = prep.norm.norm_sq;
  out.s0 = s0.value();
  out.s1 = s1.value();
  out.s2 = s2.value();
  out.pairs = nt * (nt + 1) / 2;
  out.distinct_lambdas = lambdas.size();
  for (const auto& m : moments)
    if (m.used == IntegralMethod::divided_difference) ++out.divided_difference_bundles;
  out.imaginary_residue = std::abs(out.s1) > 0.0 ? std::abs(out.s1.imag()) / std::abs(out.s1) : 0.0;
  if (out.imaginary_residue > 1e-8)
    throw ConsistencyError("qfi_analytic: imaginary residue " + std::to_string(out.imaginary_residue) +
                           " exceeds 1e-8");
  const double n2 = out.norm_sq;
  const double value = 4.0 / n2 * (out.s1.real() - std::norm(out.s2) / n2);
  out.qfi = std::max(value, 0.0);
  return out;
}

double qfi_analytic(const StateSpec& spec, const ModelParams& params, const FisherOptions& options) {
  return qfi_breakdown(spec, params, options).qfi;
}

cdouble normalized_overlap(const StateSpec& spec, const ModelParams& a, const ModelParams& b,
                           const FisherOptions& options) {
  if (a.length != b.length) throw InvalidArgument("normalized_overlap: lengths must match");
  const Prepared pa = prepare(spec, a, options);
  const Prepared pb = prepare(spec, b, options);
  const auto& ta = pa.table.terms();
  const auto& tb = pb.table.terms();
  std::vector<cdouble> rows(ta.size());
  detail::parallel_for(ta.size(), detail::resolve_threads(options.threads), [&](std::size_t s) {
    detail::CompensatedSum<cdouble> sum;
    SimplexIntegralRequest req;
    req.length = a.length;
    for (const auto& t : tb) {
      const Eigen::VectorXd lam = ta[s].wavevector - t.wavevector;
      req.lambda.assign(lam.data(), lam.data() + lam.size());
      sum.add(std::conj(ta[s].weight()) * t.weight() *
              simplex_exp_integral(req, options.integrals, options.fallback_tolerance));
    }
    rows[s] = sum.value();
  });
  detail::CompensatedSum<cdouble> total;
  for (const auto& r : rows) total.add(r);
  return total.value() / std::sqrt(pa.norm.norm_sq * pb.norm.norm_sq);
}

double qfi_overlap_oracle(const StateSpec& spec, const ModelParams& params, double delta,
                          const FisherOptions& options) {
  if (delta <= 0.0) delta = default_overlap_delta(params.c);
  if (!(params.c - delta > 0.0)) throw InvalidArgument("qfi_overlap_oracle: requires c > delta > 0");
  const ModelParams up{params.c + delta, params.length};
  const ModelParams down{params.c - delta, params.length};
  const double plus = std::abs(normalized_overlap(spec, params, up, options));
  const double minus = std::abs(normalized_overlap(spec, params, down, options));
  return 4.0 * ((1.0 - plus) + (1.0 - minus)) / (delta * delta);
}

std::string to_string(CfiMethod method) { return method == CfiMethod::analytic ? "analytic" : "quadrature"; }

double cfi_quadrature(const StateSpec& spec, const ModelParams& params, const FisherOptions& options) {
  const Prepared prep = prepare(spec, params, options);
  const double n2 = prep.norm.norm_sq;
  const double dn2 = dnorm_sq_dc(spec, params, options.solver);
  const int n = spec.n();
  const int order = options.quadrature_order > 0 ? options.quadrature_order : default_quadrature_order(n);
  const AmplitudeTable& table = prep.table;
  const double value = simplex_quadrature(
      [&](std::span<const double> x) {
        const auto [v, dv] = table.evaluate(x);
        const double prob = std::norm(v) / n2;
        if (prob < 1e-300) return 0.0;
        const double re = (std::conj(v) * dv).real() / n2 - std::norm(v) * dn2 / (2.0 * n2 * n2);
        const double out = 4.0 * re * re / prob;
        if (!std::isfinite(out)) throw NumericalFailure("cfi: non-finite integrand at a quadrature node");
        return out;
      },
      n, params.length, order);
  return value;
}

double cfi(const StateSpec& spec, const ModelParams& params, const FisherOptions& options) {
  const PhaseClass pc = global_phase_class(spec, BetheSolution{});
  if (pc != PhaseClass::general) return qfi_analytic(spec, params, options);
  return cfi_quadrature(spec, params, options);
}

FisherReport fisher_report(const StateSpec& spec, const ModelParams& params, const FisherOptions& options) {
  FisherReport r;
  r.state = spec;
  r.params = params;
  const QfiBreakdown b = qfi_breakdown(spec, params, options);
  r.qfi = b.qfi;
  r.imaginary_residue = b.imaginary_residue;
  r.norm_sq = b.norm_sq;
  r.norm_sq_direct = b.s0.real();
  r.divided_difference_bundles = b.divided_difference_bundles;
  r.phase_class = global_phase_class(spec, BetheSolution{});
  if (r.phase_class == PhaseClass::general) {
    r.cfi_method = CfiMethod::quadrature;
    r.quadrature_order = options.quadrature_order > 0 ? options.quadrature_order : default_quadrature_order(spec.n());
    r.cfi = cfi_quadrature(spec, params, options);
  } else {
    r.cfi = r.qfi;
  }
  r.raw_gap = r.qfi - r.cfi;
  r.phase_variance_term = std::max(r.raw_gap, 0.0);
  return r;
}

std::pair<double, double> default_lmax_bracket(double c) {
  if (!(c > 0.0)) throw InvalidArgument("lmax: c must be positive");
  return {2.0 / c, 60.0 / c};
}

LmaxResult lmax(const StateSpec& spec, double c, std::pair<double, double> bracket, const FisherOptions& options) {
  auto [a, b] = bracket;
  if (!(c > 0.0)) throw InvalidArgument("lmax: c must be positive");
  if (!(a > 0.0 && b > a)) throw InvalidArgument("lmax: bracket must satisfy 0 < lo < hi");
  LmaxResult out;
  out.c = c;
  out.tolerance = 1e-3 * b;
  auto f = [&](double length) {
    ++out.evaluations;
    return cfi(spec, {c, length}, options);
  };
  const double lo = a, hi = b;
  const double fa = f(a), fb = f(b);
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = f(x1), f2 = f(x2);
  while (b - a > out.tolerance) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = f(x2);
    }
  }
  if (f1 >= f2) {
    out.l_max = x1;
    out.f_max = f1;
  } else {
    out.l_max = x2;
    out.f_max = f2;
  }
  if (out.l_max - lo <= out.tolerance || hi - out.l_max <= out.tolerance || out.f_max <= std::max(fa, fb))
    throw BracketError("lmax: no interior maximum in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return out;
}

std::string to_string(SweepAxis axis) { return axis == SweepAxis::c ? "c" : "L"; }

SweepAxis parse_sweep_axis(const std::string& text) {
  if (text == "c") return SweepAxis::c;
  if (text == "L" || text == "l" || text == "length") return SweepAxis::length;
  throw InvalidArgument("unknown sweep axis '" + text + "' (expected c or L)");
}

std::size_t SweepResult::failures() const {
  std::size_t n = 0;
  for (const auto& p : points) n += p.report ? 0 : 1;
  return n;
}

bool SweepResult::strictly_decreasing() const {
  std::optional<double> prev;
  for (const auto& p : points) {
    if (!p.report) continue;
    if (prev && !(p.report->cfi < *prev)) return false;
    prev = p.report->cfi;
  }
  return true;
}

bool SweepResult::strictly_increasing() const {
  std::optional<double> prev;
  for (const auto& p : points) {
    if (!p.report) continue;
    if (prev && !(p.report->cfi > *prev)) return false;
    prev = p.report->cfi;
  }
  return true;
}

std::optional<std::size_t> SweepResult::argmax() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!points[i].report) continue;
    if (!best || points[i].report->cfi > points[*best].report->cfi) best = i;
  }
  return best;
}

SweepResult sweep(const StateSpec& spec, SweepAxis axis, const std::vector<double>& grid, double fixed_value,
                  const FisherOptions& options) {
  validate(spec);
  if (grid.empty()) throw InvalidArgument("sweep: grid is empty");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw InvalidArgument("sweep: grid must be strictly increasing");
  if (axis == SweepAxis::c ? !(fixed_value > 0.0) : !(fixed_value >= 0.0))
    throw InvalidArgument("sweep: invalid fixed value");

  SweepResult out;
  out.axis = axis;
  out.state = spec;
  out.fixed_value = fixed_value;
  out.points.resize(grid.size());
  const int threads = detail::resolve_threads(options.threads);
  FisherOptions inner = options;
  if (threads > 1) inner.threads = 1;
  detail::parallel_for(grid.size(), threads, [&](std::size_t i) {
    SweepPoint& p = out.points[i];
    p.value = grid[i];
    const ModelParams params = axis == SweepAxis::c ? ModelParams{grid[i], fixed_value} : ModelParams{fixed_value, grid[i]};
    try {
      validate(params);
      p.report = fisher_report(spec, params, inner);
    } catch (const std::exception& e) {
      p.error = e.what();
    }
  });
  return out;
}

}  // namespace llfisher
