#include "llfisher/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#ifndef LLFISHER_VERSION
#define LLFISHER_VERSION "0.0.0"
#endif

namespace llfisher::cli {

namespace {

constexpr const char* kVersion = LLFISHER_VERSION;

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char ch : s) {
    switch (ch) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(ch) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\u%04x", ch);
          out += buf;
        } else {
          out += ch;
        }
    }
  }
  return out + "\"";
}

std::string num(double x) { return std::isfinite(x) ? format_double(x) : "null"; }

template <typename Range, typename Fn>
std::string array(const Range& r, Fn fn) {
  std::string s = "[";
  bool first = true;
  for (const auto& v : r) {
    if (!first) s += ",";
    first = false;
    s += fn(v);
  }
  return s + "]";
}

std::string vec(const Eigen::VectorXd& v) {
  return array(std::vector<double>(v.data(), v.data() + v.size()), num);
}

// Insertion-ordered JSON object; values are pre-rendered JSON text.
class Object {
 public:
  Object& add(const std::string& key, std::string raw) {
    fields_.emplace_back(key, std::move(raw));
    return *this;
  }
  std::string compact() const {
    std::string s = "{";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      if (i) s += ",";
      s += quote(fields_[i].first) + ":" + fields_[i].second;
    }
    return s + "}";
  }
  std::string pretty() const {
    std::string s = "{\n";
    for (std::size_t i = 0; i < fields_.size(); ++i) {
      s += "  " + quote(fields_[i].first) + ": " + fields_[i].second;
      s += i + 1 < fields_.size() ? ",\n" : "\n";
    }
    return s + "}\n";
  }

 private:
  std::vector<std::pair<std::string, std::string>> fields_;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch == '\n' ? ' ' : ch;
  }
  return out + "\"";
}

std::string hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string provenance(const RunConfig& c) {
  return Object()
      .add("version", quote(kVersion))
      .add("config_hash", quote(hex(config_hash(c))))
      .add("solver_tolerance_scale", num(c.options.solver.tolerance_scale))
      .add("solver_max_iterations", std::to_string(c.options.solver.max_iterations))
      .add("integral_method", quote(to_string(c.options.integrals)))
      .add("integral_fallback_tolerance", num(c.options.fallback_tolerance))
      .add("quadrature_order", std::to_string(c.options.quadrature_order))
      .compact();
}

std::string state_json(const StateSpec& s) {
  return Object()
      .add("bc", quote(to_string(s.bc)))
      .add("n", std::to_string(s.n()))
      .add("quantum_numbers", array(s.quantum_numbers, [](const HalfInteger& h) { return num(h.value()); }))
      .add("label", quote(s.label()))
      .compact();
}

StateSpec parse_explicit(BoundaryCondition bc, const std::string& text) {
  std::string cleaned;
  const std::string body = !text.empty() && text.front() == '=' ? text.substr(1) : text;
  for (char ch : body) cleaned += (ch == '[' || ch == ']') ? ' ' : (ch == ',' ? ' ' : ch);
  std::istringstream is(cleaned);
  std::vector<HalfInteger> qn;
  std::string tok;
  while (is >> tok) qn.push_back(HalfInteger::parse(tok));
  if (qn.empty()) throw InvalidArgument("empty quantum-number list '" + text + "'");
  return make_state(bc, std::move(qn));
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidArgument("cannot open output file '" + path + "'");
  f << text;
  if (!f) throw InvalidArgument("failed writing output file '" + path + "'");
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::solve: return "solve";
    case Command::fisher: return "fisher";
    case Command::lmax: return "lmax";
    default: return "imaging";
  }
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  auto to_double = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      const double v = std::stod(s, &used);
      if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw InvalidArgument("invalid number '" + s + "' in grid '" + text + "'");
    }
  };
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw InvalidArgument("grid range must be lo:hi:count, got '" + text + "'");
    const double lo = to_double(parts[0]), hi = to_double(parts[1]);
    const double count = to_double(parts[2]);
    if (count < 1 || count != std::floor(count)) throw InvalidArgument("grid count must be a positive integer");
    const int n = static_cast<int>(count);
    if (n == 1) return {lo};
    for (int i = 0; i < n; ++i) out.push_back(lo + (hi - lo) * i / (n - 1));
    return out;
  }
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) {
    if (p.empty()) continue;
    out.push_back(to_double(p));
  }
  return out;
}

std::vector<StateSpec> states(const RunConfig& c) {
  std::vector<StateSpec> out;
  if (!c.explicit_states.empty()) {
    for (const auto& s : c.explicit_states) out.push_back(parse_explicit(c.bc, s));
    return out;
  }
  if (!c.n) throw InvalidArgument("-N is required unless quantum numbers are given with -I");
  if (c.type1) return {type1_excitation(c.bc, *c.n, *c.type1)};
  if (c.type2) return {type2_excitation(c.bc, *c.n, *c.type2)};
  return {ground_state(c.bc, *c.n)};
}

void validate(const RunConfig& c) {
  const int selectors = (c.ground ? 1 : 0) + (c.type1 ? 1 : 0) + (c.type2 ? 1 : 0) + (c.explicit_states.empty() ? 0 : 1);
  if (selectors > 1) throw InvalidArgument("choose only one of --ground, --type1, --type2, -I");
  if (c.n && *c.n < 1) throw InvalidArgument("-N must be >= 1");
  const auto specs = states(c);
  for (const auto& s : specs) {
    if (c.n && s.n() != *c.n)
      throw InvalidArgument("state " + s.label() + " has " + std::to_string(s.n()) + " particles but -N is " +
                            std::to_string(*c.n));
    if (c.command != Command::solve && !c.options.wavefunction.allow_large_n && s.n() > particle_cap(s.bc))
      throw ResourceLimit("N = " + std::to_string(s.n()) + " exceeds the default cap of " +
                          std::to_string(particle_cap(s.bc)) + " for " + to_string(s.bc) + " (use --allow-large-n)");
  }
  auto need_c = [&] {
    if (!c.c) throw InvalidArgument("-c is required");
    validate(ModelParams{*c.c, 1.0});
  };
  auto need_l = [&] {
    if (!c.length) throw InvalidArgument("-L is required");
    validate(ModelParams{0.0, *c.length});
  };
  if (c.options.solver.tolerance_scale <= 0.0 || c.options.solver.max_iterations < 1)
    throw InvalidArgument("solver tolerance overrides must be positive");
  if (c.options.quadrature_order < 0 || c.options.quadrature_order == 1)
    throw InvalidArgument("--order must be >= 2");
  switch (c.command) {
    case Command::solve:
      if (specs.size() != 1) throw InvalidArgument("solve takes a single state");
      need_c();
      need_l();
      if (c.format && *c.format != OutputFormat::json) throw InvalidArgument("solve writes JSON only");
      break;
    case Command::fisher: {
      if (!c.axis) throw InvalidArgument("--axis is required (c or L)");
      const auto grid = parse_grid(c.grid);
      if (grid.empty()) throw InvalidArgument("--grid is empty");
      for (std::size_t i = 1; i < grid.size(); ++i)
        if (!(grid[i] > grid[i - 1])) throw InvalidArgument("--grid must be strictly increasing");
      if (*c.axis == SweepAxis::c) {
        if (c.c) throw InvalidArgument("-c conflicts with --axis c");
        need_l();
        if (grid.front() < 0.0) throw InvalidArgument("c grid values must be >= 0");
      } else {
        if (c.length) throw InvalidArgument("-L conflicts with --axis L");
        need_c();
        if (!(grid.front() > 0.0)) throw InvalidArgument("L grid values must be > 0");
      }
      break;
    }
    case Command::lmax:
      need_c();
      if (!(*c.c > 0.0)) throw InvalidArgument("lmax requires c > 0");
      if (c.length) throw InvalidArgument("-L conflicts with lmax (L is the search variable)");
      if (c.bracket && !(c.bracket->first > 0.0 && c.bracket->second > c.bracket->first))
        throw InvalidArgument("--bracket must satisfy 0 < lo < hi");
      if (c.format && *c.format != OutputFormat::json) throw InvalidArgument("lmax writes JSON only");
      break;
    case Command::imaging:
      if (specs.size() != 1) throw InvalidArgument("imaging takes a single state");
      need_c();
      need_l();
      if (c.pixels.empty()) throw InvalidArgument("--pixels is empty");
      for (int np : c.pixels)
        if (np < 1) throw InvalidArgument("pixel counts must be >= 1");
      if (c.sample > 0 && !(*c.c > 0.0)) throw InvalidArgument("--sample requires c > 0");
      break;
  }
}

std::string canonical(const RunConfig& c) {
  std::ostringstream s;
  s << "command=" << to_string(c.command) << ";bc=" << to_string(c.bc);
  s << ";n=" << (c.n ? std::to_string(*c.n) : "-");
  s << ";states=";
  for (const auto& st : states(c)) s << st.label();
  s << ";c=" << (c.c ? format_double(*c.c) : "-") << ";L=" << (c.length ? format_double(*c.length) : "-");
  s << ";axis=" << (c.axis ? to_string(*c.axis) : "-") << ";grid=";
  if (c.command == Command::fisher)
    for (double v : parse_grid(c.grid)) s << format_double(v) << ' ';
  s << ";bracket=";
  if (c.bracket) s << format_double(c.bracket->first) << ',' << format_double(c.bracket->second);
  s << ";pixels=";
  for (int p : c.pixels) s << p << ',';
  s << ";sample=" << c.sample << ";seed=" << c.seed;
  s << ";format=" << (c.format ? (*c.format == OutputFormat::json ? "json" : "csv") : "-");
  s << ";tol=" << format_double(c.options.solver.tolerance_scale) << ";maxit=" << c.options.solver.max_iterations;
  s << ";order=" << c.options.quadrature_order << ";integrals=" << to_string(c.options.integrals);
  s << ";fallback=" << format_double(c.options.fallback_tolerance);
  s << ";large_n=" << c.options.wavefunction.allow_large_n;
  return s.str();
}

std::uint64_t config_hash(const RunConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : canonical(c)) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string cmd_solve(const RunConfig& c) {
  const StateSpec spec = states(c).front();
  const ModelParams params{*c.c, *c.length};
  const BetheSolution sol = solve_bethe(spec, params, c.options.solver);
  const NormData nd = norm_sq(sol.k, params, spec.bc);
  return Object()
      .add("command", quote("solve"))
      .add("provenance", provenance(c))
      .add("state", state_json(spec))
      .add("c", num(params.c))
      .add("L", num(params.length))
      .add("k", vec(sol.k))
      .add("dk_dc", vec(sol.dk_dc))
      .add("energy", num(sol.energy))
      .add("momentum", num(sol.momentum))
      .add("norm_sq", num(nd.norm_sq))
      .add("gaudin_determinant", num(nd.determinant))
      .add("residual", num(sol.residual))
      .add("residual_tolerance", num(residual_tolerance(sol.k, params, c.options.solver)))
      .add("iterations", std::to_string(sol.iterations))
      .add("phase_class", quote(to_string(global_phase_class(spec, sol))))
      .pretty();
}

std::string cmd_fisher(const RunConfig& c, std::ostream& warnings, bool* all_failed) {
  const auto grid = parse_grid(c.grid);
  const SweepAxis axis = *c.axis;
  const double fixed = axis == SweepAxis::c ? *c.length : *c.c;
  const OutputFormat format = c.format.value_or(OutputFormat::csv);
  const std::string hash = hex(config_hash(c));

  std::vector<SweepResult> results;
  std::size_t failures = 0, total = 0;
  for (const auto& spec : states(c)) {
    results.push_back(sweep(spec, axis, grid, fixed, c.options));
    for (const auto& p : results.back().points) {
      ++total;
      if (!p.report) {
        ++failures;
        warnings << "warning: " << spec.label() << " at " << to_string(axis) << " = " << format_double(p.value)
                 << " failed: " << p.error << "\n";
      }
    }
  }
  if (all_failed) *all_failed = failures == total;

  if (format == OutputFormat::csv) {
    std::string s =
        "state,bc,axis,value,c,L,qfi,cfi,gap,phase_class,cfi_method,quadrature_order,imaginary_residue,"
        "dd_bundles,status,error,config_hash,version,solver_tolerance_scale,integral_method\n";
    for (const auto& r : results) {
      for (const auto& p : r.points) {
        const double cval = axis == SweepAxis::c ? p.value : fixed;
        const double lval = axis == SweepAxis::c ? fixed : p.value;
        s += csv_field(r.state.label()) + "," + to_string(r.state.bc) + "," + to_string(axis) + "," +
             format_double(p.value) + "," + format_double(cval) + "," + format_double(lval) + ",";
        if (p.report) {
          const auto& f = *p.report;
          s += format_double(f.qfi) + "," + format_double(f.cfi) + "," + format_double(f.phase_variance_term) + "," +
               to_string(f.phase_class) + "," + to_string(f.cfi_method) + "," + std::to_string(f.quadrature_order) +
               "," + format_double(f.imaginary_residue) + "," + std::to_string(f.divided_difference_bundles) +
               ",ok,,";
        } else {
          s += ",,,,,,,,error," + csv_field(p.error) + ",";
        }
        s += hash + "," + kVersion + "," + format_double(c.options.solver.tolerance_scale) + "," +
             to_string(c.options.integrals) + "\n";
      }
    }
    return s;
  }

  std::vector<std::string> series;
  for (const auto& r : results) {
    std::vector<std::string> pts;
    for (const auto& p : r.points) {
      Object o;
      o.add("value", num(p.value));
      if (p.report) {
        const auto& f = *p.report;
        o.add("status", quote("ok"))
            .add("qfi", num(f.qfi))
            .add("cfi", num(f.cfi))
            .add("gap", num(f.phase_variance_term))
            .add("phase_class", quote(to_string(f.phase_class)))
            .add("cfi_method", quote(to_string(f.cfi_method)))
            .add("quadrature_order", std::to_string(f.quadrature_order))
            .add("imaginary_residue", num(f.imaginary_residue))
            .add("dd_bundles", std::to_string(f.divided_difference_bundles));
      } else {
        o.add("status", quote("error")).add("error", quote(p.error));
      }
      pts.push_back(o.compact());
    }
    const auto am = r.argmax();
    series.push_back(Object()
                         .add("state", state_json(r.state))
                         .add("strictly_decreasing", r.strictly_decreasing() ? "true" : "false")
                         .add("strictly_increasing", r.strictly_increasing() ? "true" : "false")
                         .add("argmax_value", am ? num(r.points[*am].value) : "null")
                         .add("failures", std::to_string(r.failures()))
                         .add("points", array(pts, [](const std::string& x) { return x; }))
                         .compact());
  }
  return Object()
      .add("command", quote("fisher"))
      .add("provenance", provenance(c))
      .add("axis", quote(to_string(axis)))
      .add("fixed", num(fixed))
      .add("series", array(series, [](const std::string& x) { return x; }))
      .pretty();
}

std::string cmd_lmax(const RunConfig& c) {
  const double coupling = *c.c;
  const auto bracket = c.bracket.value_or(default_lmax_bracket(coupling));
  std::vector<std::string> rows;
  for (const auto& spec : states(c)) {
    const LmaxResult r = lmax(spec, coupling, bracket, c.options);
    rows.push_back(Object()
                       .add("state", state_json(spec))
                       .add("L_max", num(r.l_max))
                       .add("cL_max", num(r.cl_max()))
                       .add("F_max", num(r.f_max))
                       .add("tolerance", num(r.tolerance))
                       .add("evaluations", std::to_string(r.evaluations))
                       .compact());
  }
  return Object()
      .add("command", quote("lmax"))
      .add("provenance", provenance(c))
      .add("c", num(coupling))
      .add("bracket", array(std::vector<double>{bracket.first, bracket.second}, num))
      .add("results", array(rows, [](const std::string& x) { return x; }))
      .pretty();
}

std::string cmd_imaging(const RunConfig& c, std::ostream& warnings) {
  const StateSpec spec = states(c).front();
  const ModelParams params{*c.c, *c.length};
  const OutputFormat format = c.format.value_or(OutputFormat::csv);
  const std::string hash = hex(config_hash(c));
  ImagingOptions opts;
  opts.fisher = c.options;
  opts.quadrature_order = c.options.quadrature_order;
  const double f = cfi(spec, params, c.options);

  struct Row {
    int np;
    double icfi;
    double ratio;
    std::size_t images;
    int order;
  };
  std::vector<Row> rows;
  std::optional<ImageDistribution> last;
  for (int np : c.pixels) {
    ImageDistribution d = image_distribution(spec, params, PixelGrid::tiling(params.length, np), opts);
    const double icfi = imaging_cfi(d);
    rows.push_back({np, icfi, f > 0.0 ? icfi / f : std::nan(""), d.entries.size(), d.quadrature_order});
    last = std::move(d);
  }

  if (c.sample > 0) {
    const ImageDistribution& d = *last;
    const double icfi = rows.back().icfi;
    if (!(icfi > 0.0)) throw InvalidArgument("--sample needs a grid with nonzero imaging CFI");
    const auto idx = sample_indices(d, c.sample, c.seed);
    const std::string shots_path = !c.shots_out.empty() ? c.shots_out : (c.out.empty() ? "shots.jsonl" : c.out + ".shots.jsonl");
    std::string shots = Object()
                            .add("type", quote("header"))
                            .add("provenance", provenance(c))
                            .add("seed", std::to_string(c.seed))
                            .add("shots", std::to_string(c.sample))
                            .add("state", state_json(spec))
                            .add("c", num(params.c))
                            .add("L", num(params.length))
                            .add("grid", Object()
                                             .add("a0", num(d.grid.a0))
                                             .add("dx", num(d.grid.dx))
                                             .add("n_pixels", std::to_string(d.grid.n_pixels))
                                             .compact())
                            .compact() +
                        "\n";
    for (std::size_t i : idx) shots += d.entries[i].image.json() + "\n";
    write_file(shots_path, shots);

    const double sigma = 1.0 / std::sqrt(static_cast<double>(c.sample) * icfi);
    std::vector<double> cgrid;
    for (int j = -40; j <= 40; ++j) {
      const double v = params.c + 0.15 * sigma * j;
      if (v > 0.0) cgrid.push_back(v);
    }
    std::vector<ImageDistribution> dists;
    dists.reserve(cgrid.size());
    for (double cv : cgrid) dists.push_back(image_distribution(spec, {cv, params.length}, d.grid, opts));
    const MleResult m = mle_estimate(idx, dists, cgrid);
    if (m.at_edge) warnings << "warning: likelihood maximum at the edge of the c grid\n";
    const std::string mle_path = !c.mle_out.empty() ? c.mle_out : shots_path + ".mle.json";
    write_file(mle_path, Object()
                             .add("command", quote("imaging-mle"))
                             .add("provenance", provenance(c))
                             .add("shots_file", quote(shots_path))
                             .add("c_true", num(params.c))
                             .add("c_hat", num(m.c_hat))
                             .add("crb_sigma", num(sigma))
                             .add("imaging_cfi", num(icfi))
                             .add("n_pixels", std::to_string(d.grid.n_pixels))
                             .add("at_edge", m.at_edge ? "true" : "false")
                             .add("c_grid", array(m.c_grid, num))
                             .add("loglik", array(m.loglik, num))
                             .pretty());
  }

  if (format == OutputFormat::csv) {
    std::string s = "state,bc,c,L,n_pixels,imaging_cfi,cfi,ratio,images,quadrature_order,config_hash,version\n";
    for (const auto& r : rows)
      s += csv_field(spec.label()) + "," + to_string(spec.bc) + "," + format_double(params.c) + "," +
           format_double(params.length) + "," + std::to_string(r.np) + "," + format_double(r.icfi) + "," +
           format_double(f) + "," + format_double(r.ratio) + "," + std::to_string(r.images) + "," +
           std::to_string(r.order) + "," + hash + "," + kVersion + "\n";
    return s;
  }
  std::vector<std::string> items;
  for (const auto& r : rows)
    items.push_back(Object()
                        .add("n_pixels", std::to_string(r.np))
                        .add("imaging_cfi", num(r.icfi))
                        .add("ratio", num(r.ratio))
                        .add("images", std::to_string(r.images))
                        .add("quadrature_order", std::to_string(r.order))
                        .compact());
  return Object()
      .add("command", quote("imaging"))
      .add("provenance", provenance(c))
      .add("state", state_json(spec))
      .add("c", num(params.c))
      .add("L", num(params.length))
      .add("cfi", num(f))
      .add("rows", array(items, [](const std::string& x) { return x; }))
      .pretty();
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    std::string text;
    int code = kOk;
    switch (config.command) {
      case Command::solve: text = cmd_solve(config); break;
      case Command::fisher: {
        bool all_failed = false;
        text = cmd_fisher(config, err, &all_failed);
        if (all_failed) {
          err << "error: every sweep point failed\n";
          code = kSolver;
        }
        break;
      }
      case Command::lmax: text = cmd_lmax(config); break;
      case Command::imaging: text = cmd_imaging(config, err); break;
    }
    if (config.out.empty()) {
      out << text;
    } else {
      write_file(config.out, text);
    }
    return code;
  } catch (const BracketError& e) {
    err << "error: " << e.what() << "\n";
    return kBracket;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const ResourceLimit& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kSolver;
  }
}

int main_entry(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fisher information of the interaction strength for few-boson Lieb-Liniger eigenstates"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunConfig config;
  std::string bc_text = "periodic";
  std::string axis_text;
  std::string format_text;
  std::string bracket_text;
  std::string integrals_text = "auto";
  std::string pixels_text = "2,4,8,16,32";

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--bc", bc_text, "Boundary condition: periodic | hardwall")->capture_default_str();
    sub->add_option("-N", config.n, "Particle number");
    sub->add_flag("--ground", config.ground, "Ground state (default selector)");
    sub->add_option("--type1", config.type1, "Type-I excitation with shift q");
    sub->add_option("--type2", config.type2, "Type-II excitation, hole at q in [1, N-1]");
    sub->add_option("-I", config.explicit_states, "Explicit quantum numbers, e.g. -I=-1,0,2 (repeatable)")
        ->allow_extra_args(false);
    sub->add_option("-o,--out", config.out, "Output file (default stdout)");
    sub->add_option("--format", format_text, "json | csv");
    sub->add_option("--tol-scale", config.options.solver.tolerance_scale, "Solver residual tolerance scale")
        ->capture_default_str();
    sub->add_option("--max-iter", config.options.solver.max_iterations, "Solver iteration cap")->capture_default_str();
    sub->add_option("--order", config.options.quadrature_order, "Gauss-Legendre order (0 = automatic)")
        ->capture_default_str();
    sub->add_option("--integrals", integrals_text, "auto | recursion | dd")->capture_default_str();
    sub->add_option("--fallback-tol", config.options.fallback_tolerance, "Recursion error tolerance before fallback")
        ->capture_default_str();
    sub->add_flag("--allow-large-n", config.options.wavefunction.allow_large_n, "Lift the default particle caps");
    sub->add_option("--threads", config.options.threads, "Worker threads (default LLFISHER_THREADS or all cores)");
  };

  auto* solve = app.add_subcommand("solve", "Solve the Bethe equations and report k, dk/dc, E, P and the norm");
  add_common(solve);
  solve->add_option("-c", config.c, "Coupling c >= 0");
  solve->add_option("-L", config.length, "System length L > 0");

  auto* fisher = app.add_subcommand("fisher", "QFI/CFI sweep over c or L");
  add_common(fisher);
  fisher->add_option("-c", config.c, "Fixed coupling (for --axis L)");
  fisher->add_option("-L", config.length, "Fixed length (for --axis c)");
  fisher->add_option("--axis", axis_text, "Sweep axis: c | L");
  fisher->add_option("--grid", config.grid, "lo:hi:count or v1,v2,...");

  auto* lmax_cmd = app.add_subcommand("lmax", "Locate the length maximizing the CFI at fixed c");
  add_common(lmax_cmd);
  lmax_cmd->add_option("-c", config.c, "Coupling c > 0");
  lmax_cmd->add_option("-L", config.length, "Rejected: L is the search variable");
  lmax_cmd->add_option("--bracket", bracket_text, "lo,hi (default 2/c,60/c)");

  auto* imaging = app.add_subcommand("imaging", "Absorption-imaging CFI versus pixel count");
  add_common(imaging);
  imaging->add_option("-c", config.c, "Coupling c");
  imaging->add_option("-L", config.length, "System length L");
  imaging->add_option("--pixels", pixels_text, "Comma-separated pixel counts")->capture_default_str();
  imaging->add_option("--sample", config.sample, "Simulated shots for the MLE demo (0 = none)");
  imaging->add_option("--seed", config.seed, "Sampling seed");
  imaging->add_option("--shots", config.shots_out, "Shot file (line-delimited JSON)");
  imaging->add_option("--mle-out", config.mle_out, "MLE summary file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kValidation;
  }

  try {
    config.bc = parse_boundary_condition(bc_text);
    if (solve->parsed()) config.command = Command::solve;
    if (fisher->parsed()) config.command = Command::fisher;
    if (lmax_cmd->parsed()) config.command = Command::lmax;
    if (imaging->parsed()) config.command = Command::imaging;
    if (!axis_text.empty()) config.axis = parse_sweep_axis(axis_text);
    if (!format_text.empty()) {
      if (format_text == "json") config.format = OutputFormat::json;
      else if (format_text == "csv") config.format = OutputFormat::csv;
      else throw InvalidArgument("--format must be json or csv");
    }
    if (integrals_text == "auto" || integrals_text == "automatic") config.options.integrals = IntegralMethod::automatic;
    else if (integrals_text == "recursion") config.options.integrals = IntegralMethod::recursion;
    else if (integrals_text == "dd" || integrals_text == "divided-difference")
      config.options.integrals = IntegralMethod::divided_difference;
    else throw InvalidArgument("--integrals must be auto, recursion or dd");
    if (!bracket_text.empty()) {
      const auto b = parse_grid(bracket_text);
      if (b.size() != 2) throw InvalidArgument("--bracket needs exactly two values lo,hi");
      config.bracket = std::make_pair(b[0], b[1]);
    }
    if (config.command == Command::imaging) {
      for (double v : parse_grid(pixels_text)) {
        if (v != std::floor(v)) throw InvalidArgument("pixel counts must be integers");
        config.pixels.push_back(static_cast<int>(v));
      }
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kValidation;
  }
  return run(config, out, err);
}

}  // namespace llfisher::cli
