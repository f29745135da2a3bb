/*
 * Copyright 2026 The crossrisk Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CROSSRISK_SRC_DUAL_HPP_
#define CROSSRISK_SRC_DUAL_HPP_

#include <cmath>
#include <numbers>

namespace crossrisk::internal {

// Forward-mode dual number: v + d * eps with eps^2 = 0.
struct Dual {
  double v = 0.0;
  double d = 0.0;

  Dual() = default;
  Dual(double value) : v(value) {}  // NOLINT: implicit constant lift
  Dual(double value, double tangent) : v(value), d(tangent) {}

  Dual& operator+=(const Dual& o) {
    v += o.v;
    d += o.d;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v -= o.v;
    d -= o.d;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    d = d * o.v + v * o.d;
    v *= o.v;
    return *this;
  }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator*(const Dual& a, double b) { return {a.v * b, a.d * b}; }
inline Dual operator*(double a, const Dual& b) { return {a * b.v, a * b.d}; }
inline Dual operator+(const Dual& a, double b) { return {a.v + b, a.d}; }
inline Dual operator-(const Dual& a, double b) { return {a.v - b, a.d}; }
inline Dual operator/(const Dual& a, double b) { return {a.v / b, a.d / b}; }
inline Dual operator/(const Dual& a, const Dual& b) {
  return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}

inline double Value(double x) { return x; }
inline double Value(const Dual& x) { return x.v; }

inline double Exp(double x) { return std::exp(x); }
inline Dual Exp(const Dual& x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}

inline double Log(double x) { return std::log(x); }
inline Dual Log(const Dual& x) { return {std::log(x.v), x.d / x.v}; }

inline double Sqrt(double x) { return std::sqrt(x); }
inline Dual Sqrt(const Dual& x) {
  const double s = std::sqrt(x.v);
  return {s, x.d / (2.0 * s)};
}

// Exact GELU: x * Phi(x).
inline double Gelu(double x) {
  return 0.5 * x * (1.0 + std::erf(x * std::numbers::sqrt2 / 2.0));
}
inline Dual Gelu(const Dual& x) {
  const double cdf = 0.5 * (1.0 + std::erf(x.v * std::numbers::sqrt2 / 2.0));
  const double pdf =
      std::exp(-0.5 * x.v * x.v) / std::sqrt(2.0 * std::numbers::pi);
  return {x.v * cdf, (cdf + x.v * pdf) * x.d};
}

// Clamp with zero derivative outside the band.
inline double Clamp(double x, double bound) {
  return x > bound ? bound : (x < -bound ? -bound : x);
}
inline Dual Clamp(const Dual& x, double bound) {
  if (x.v > bound) return Dual(bound);
  if (x.v < -bound) return Dual(-bound);
  return x;
}

}  // namespace crossrisk::internal

#endif  // CROSSRISK_SRC_DUAL_HPP_
