#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace minimax_lab {

using Vec = std::vector<double>;

inline bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline void check_dim(std::size_t actual, std::size_t expected, const char* what) {
  if (actual != expected) {
    throw std::invalid_argument(std::string(what) + ": dimension mismatch (got " +
                                std::to_string(actual) + ", expected " +
                                std::to_string(expected) + ")");
  }
}

inline double dot(const Vec& a, const Vec& b) {
  check_dim(b.size(), a.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(const Vec& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double norm(const Vec& v) { return std::sqrt(norm_sq(v)); }

inline double dist_sq(const Vec& a, const Vec& b) {
  check_dim(b.size(), a.size(), "dist_sq");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

inline double dist(const Vec& a, const Vec& b) { return std::sqrt(dist_sq(a, b)); }

// y += a * x
inline void axpy(Vec& y, double a, const Vec& x) {
  check_dim(x.size(), y.size(), "axpy");
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

inline Vec scaled(const Vec& v, double a) {
  Vec out(v);
  for (double& x : out) x *= a;
  return out;
}

inline Vec sub(const Vec& a, const Vec& b) {
  check_dim(b.size(), a.size(), "sub");
  Vec out(a);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

}  // namespace minimax_lab
