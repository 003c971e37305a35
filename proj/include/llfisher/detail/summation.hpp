#pragma once

#include <cmath>
#include <complex>
#include <type_traits>

namespace llfisher::detail {

// Neumaier-compensated accumulator for real or complex terms.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_floating_point_v<T>) {
      add_real(sum_, comp_, x);
    } else {
      typename T::value_type re = sum_.real(), cre = comp_.real();
      typename T::value_type im = sum_.imag(), cim = comp_.imag();
      add_real(re, cre, x.real());
      add_real(im, cim, x.imag());
      sum_ = T(re, im);
      comp_ = T(cre, cim);
    }
  }
  T value() const { return sum_ + comp_; }

 private:
  template <typename R>
  static void add_real(R& sum, R& comp, R x) {
    const R t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  T sum_{};
  T comp_{};
};

}  // namespace llfisher::detail
