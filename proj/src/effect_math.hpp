#ifndef VCANOVA_SRC_EFFECT_MATH_HPP
#define VCANOVA_SRC_EFFECT_MATH_HPP

#include <cstddef>
#include <vector>

namespace vcanova::detail {

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// sum_i (v_i - vbar)^2
inline double centered_ss(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s;
}

// Row means of an a x b row-major matrix.
inline std::vector<double> row_means(const std::vector<double>& m, int a, int b) {
  std::vector<double> out(static_cast<std::size_t>(a), 0.0);
  for (int i = 0; i < a; ++i) {
    double s = 0.0;
    for (int j = 0; j < b; ++j) s += m[static_cast<std::size_t>(i * b + j)];
    out[static_cast<std::size_t>(i)] = s / b;
  }
  return out;
}

inline std::vector<double> col_means(const std::vector<double>& m, int a, int b) {
  std::vector<double> out(static_cast<std::size_t>(b), 0.0);
  for (int j = 0; j < b; ++j) {
    double s = 0.0;
    for (int i = 0; i < a; ++i) s += m[static_cast<std::size_t>(i * b + j)];
    out[static_cast<std::size_t>(j)] = s / a;
  }
  return out;
}

// sum_ij (m_ij - mbar_i. - mbar_.j + mbar_..)^2
inline double double_centered_ss(const std::vector<double>& m, int a, int b) {
  const auto rm = row_means(m, a, b);
  const auto cm = col_means(m, a, b);
  const double g = mean_of(m);
  double s = 0.0;
  for (int i = 0; i < a; ++i) {
    for (int j = 0; j < b; ++j) {
      const double d = m[static_cast<std::size_t>(i * b + j)] - rm[static_cast<std::size_t>(i)] -
                       cm[static_cast<std::size_t>(j)] + g;
      s += d * d;
    }
  }
  return s;
}

inline std::vector<double> add_vectors(std::vector<double> x, const std::vector<double>& y) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  return x;
}

}  // namespace vcanova::detail

#endif
