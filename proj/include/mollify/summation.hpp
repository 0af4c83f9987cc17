#pragma once

#include <cmath>
#include <complex>

namespace mollify {

/// Neumaier-compensated accumulator.
template <typename T>
struct CompensatedSum {
  T sum{};
  T c{};

  void add(T x) noexcept {
    const T t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      c += (sum - t) + x;
    else
      c += (x - t) + sum;
    sum = t;
  }
  CompensatedSum& operator+=(T x) noexcept {
    add(x);
    return *this;
  }
  T value() const noexcept { return sum + c; }
};

template <typename T>
struct CompensatedSum<std::complex<T>> {
  CompensatedSum<T> re, im;

  void add(std::complex<T> x) noexcept {
    re.add(x.real());
    im.add(x.imag());
  }
  CompensatedSum& operator+=(std::complex<T> x) noexcept {
    add(x);
    return *this;
  }
  std::complex<T> value() const noexcept { return {re.value(), im.value()}; }
};

}  // namespace mollify
