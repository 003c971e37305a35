#include "llfisher/types.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace llfisher {

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::periodic ? "periodic" : "hardwall";
}

BoundaryCondition parse_boundary_condition(std::string_view text) {
  if (text == "periodic" || text == "p" || text == "ring") return BoundaryCondition::periodic;
  if (text == "hardwall" || text == "hard-wall" || text == "h" || text == "box")
    return BoundaryCondition::hard_wall;
  throw InvalidArgument("unknown boundary condition '" + std::string(text) + "'");
}

namespace {

bool parse_int(std::string_view text, int& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

HalfInteger HalfInteger::parse(std::string_view text) {
  int numerator = 0;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    int denominator = 0;
    if (parse_int(text.substr(0, slash), numerator) && parse_int(text.substr(slash + 1), denominator)) {
      if (denominator == 1) return HalfInteger(numerator);
      if (denominator == 2) return from_twice(numerator);
    }
    throw InvalidArgument("quantum number '" + std::string(text) + "' is not a half-integer");
  }
  if (parse_int(text, numerator)) return HalfInteger(numerator);

  double value = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(value))
    throw InvalidArgument("cannot parse quantum number '" + std::string(text) + "'");
  const double twice = 2.0 * value;
  if (std::abs(twice - std::round(twice)) > 1e-12 || std::abs(twice) > 1e9)
    throw InvalidArgument("quantum number '" + std::string(text) + "' is not a half-integer");
  return from_twice(static_cast<int>(std::lround(twice)));
}

std::string HalfInteger::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  std::ostringstream os;
  os << value();
  return os.str();
}

std::vector<double> StateSpec::quantum_values() const {
  std::vector<double> out;
  out.reserve(quantum_numbers.size());
  for (const auto& q : quantum_numbers) out.push_back(q.value());
  return out;
}

std::string StateSpec::label() const {
  std::string out = "[";
  for (std::size_t j = 0; j < quantum_numbers.size(); ++j) {
    if (j) out += ',';
    out += quantum_numbers[j].str();
  }
  return out + "]";
}

void validate(const StateSpec& spec) {
  const int n = spec.n();
  if (n < 1) throw InvalidArgument("state needs at least one particle");
  for (int j = 1; j < n; ++j) {
    if (!(spec.quantum_numbers[j - 1] < spec.quantum_numbers[j]))
      throw InvalidArgument("quantum numbers must be strictly increasing: " + spec.label());
  }
  for (const auto& q : spec.quantum_numbers) {
    if (spec.bc == BoundaryCondition::periodic) {
      const bool want_integer = (n % 2 == 1);
      if (q.is_integer() != want_integer)
        throw InvalidArgument(std::string("periodic quantum numbers must be ") +
                              (want_integer ? "integers for odd N: " : "half-odd-integers for even N: ") +
                              spec.label());
    } else {
      if (!q.is_integer() || q.twice() <= 0)
        throw InvalidArgument("hard-wall quantum numbers must be positive integers: " + spec.label());
    }
  }
}

StateSpec make_state(BoundaryCondition bc, std::vector<HalfInteger> quantum_numbers) {
  StateSpec spec{bc, std::move(quantum_numbers)};
  validate(spec);
  return spec;
}

void validate(const ModelParams& params) {
  if (!std::isfinite(params.c) || params.c < 0.0)
    throw InvalidArgument("coupling c must be finite and non-negative");
  if (!std::isfinite(params.length) || params.length <= 0.0)
    throw InvalidArgument("system size L must be finite and positive");
}

int particle_cap(BoundaryCondition bc) {
  return bc == BoundaryCondition::periodic ? kMaxParticlesPeriodic : kMaxParticlesHardWall;
}

}  // namespace llfisher
