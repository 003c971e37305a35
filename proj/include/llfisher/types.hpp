#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "llfisher/errors.hpp"

namespace llfisher {

enum class BoundaryCondition { periodic, hard_wall };

std::string to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(std::string_view text);

// An integer or half-odd-integer, stored as twice its value so that
// arithmetic and comparisons stay exact.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  constexpr explicit HalfInteger(int value) : twice_(2 * value) {}

  static constexpr HalfInteger from_twice(int twice) {
    HalfInteger h;
    h.twice_ = twice;
    return h;
  }
  // Accepts "3", "-2", "0.5", "-1.5", "5/2".
  static HalfInteger parse(std::string_view text);

  constexpr int twice() const { return twice_; }
  constexpr double value() const { return 0.5 * twice_; }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }

  constexpr HalfInteger operator+(HalfInteger other) const { return from_twice(twice_ + other.twice_); }
  constexpr HalfInteger operator-(HalfInteger other) const { return from_twice(twice_ - other.twice_); }
  constexpr HalfInteger operator-() const { return from_twice(-twice_); }

  constexpr auto operator<=>(const HalfInteger&) const = default;

  std::string str() const;

 private:
  int twice_ = 0;
};

// Identifies one eigenstate: boundary condition plus the quantum numbers
// I_1 < ... < I_N.
struct StateSpec {
  BoundaryCondition bc = BoundaryCondition::periodic;
  std::vector<HalfInteger> quantum_numbers;

  int n() const { return static_cast<int>(quantum_numbers.size()); }
  std::vector<double> quantum_values() const;
  std::string label() const;  // e.g. "[-0.5,0.5]"

  bool operator==(const StateSpec&) const = default;
};

// Throws InvalidArgument unless the quantum numbers are strictly increasing
// and obey the parity rule of the boundary condition.
void validate(const StateSpec& spec);
StateSpec make_state(BoundaryCondition bc, std::vector<HalfInteger> quantum_numbers);

// Units hbar = 2m = 1. c is the coupling (1/length), length is L.
struct ModelParams {
  double c = 1.0;
  double length = 1.0;
};

void validate(const ModelParams& params);

// Default particle-number caps for the permutation kernels.
inline constexpr int kMaxParticlesPeriodic = 5;
inline constexpr int kMaxParticlesHardWall = 4;

int particle_cap(BoundaryCondition bc);

}  // namespace llfisher
