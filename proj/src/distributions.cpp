#include "vcanova/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "vcanova/special_functions.hpp"

namespace vcanova {

namespace {

// Poisson-mixture truncation: stop once the accumulated Poisson weight
// exceeds 1 - kTailWeight.
constexpr double kTailWeight = 1e-14;

double poisson_log_pmf(double half_lambda, long k) {
  return -half_lambda + static_cast<double>(k) * std::log(half_lambda) -
         std::lgamma(static_cast<double>(k) + 1.0);
}

// cdf of chi-square(df, lambda) at x, as a Poisson-weighted mixture of
// central chi-square cdfs, summed from the modal Poisson term outward.
double noncentral_chi_square_cdf(double x, int df, double lambda) {
  if (x <= 0.0) return 0.0;
  const double y = 0.5 * x;
  if (lambda == 0.0) return lower_regularized_gamma(0.5 * df, y);

  const double half = 0.5 * lambda;
  const long m = static_cast<long>(std::floor(half));
  const double am = 0.5 * df + static_cast<double>(m);

  const double wm = std::exp(poisson_log_pmf(half, m));
  const double cm = lower_regularized_gamma(am, y);
  // t(a) = y^a e^-y / Gamma(a+1), the step between P(a, y) and P(a+1, y).
  const double tm = std::exp(am * std::log(y) - y - std::lgamma(am + 1.0));

  double sum = wm * cm;
  double wsum = wm;

  {
    double w = wm, c = cm, t = tm, a = am;
    for (long k = m; k > 0 && 1.0 - wsum > kTailWeight; --k) {
      w *= static_cast<double>(k) / half;
      t *= a / y;  // t(a-1)
      c += t;      // P(a-1, y) = P(a, y) + t(a-1)
      if (c > 1.0) c = 1.0;
      a -= 1.0;
      sum += w * c;
      wsum += w;
    }
  }
  {
    double w = wm, c = cm, t = tm, a = am;
    long k = m;
    while (1.0 - wsum > kTailWeight) {
      c -= t;  // P(a+1, y) = P(a, y) - t(a)
      if (c < 0.0) c = 0.0;
      t *= y / (a + 1.0);
      a += 1.0;
      w *= half / static_cast<double>(k + 1);
      ++k;
      sum += w * c;
      wsum += w;
      // c decreases in k, so the tail contributes at most (1-wsum)*c.
      if ((1.0 - wsum) * c <= 1e-17 * sum) break;
      if (k > m + 100000) break;
    }
  }
  return std::fmin(1.0, std::fmax(0.0, sum));
}

// pdf counterpart; g(a) = (1/2) y^(a-1) e^-y / Gamma(a) is the central
// chi-square(2a) density at x = 2y. Unlike the cdf mixture, the per-term
// magnitude w_k*g_k can peak far from the Poisson mode (the gamma factor
// grows with k in the right tail), so termination tracks the terms
// themselves: ln(w_k*g_k) is concave in k, hence the sequence is unimodal
// and a small, descending term bounds the remainder.
double noncentral_chi_square_pdf(double x, int df, double lambda) {
  if (x <= 0.0) return 0.0;
  const double y = 0.5 * x;
  const auto central = [y](double a) {
    return 0.5 * std::exp((a - 1.0) * std::log(y) - y - std::lgamma(a));
  };
  if (lambda == 0.0) return central(0.5 * df);

  const double half = 0.5 * lambda;
  const long m = static_cast<long>(std::floor(half));
  const double am = 0.5 * df + static_cast<double>(m);
  const double wm = std::exp(poisson_log_pmf(half, m));
  const double gm = central(am);

  double sum = wm * gm;
  {
    double w = wm, g = gm, a = am;
    double prev = wm * gm;
    for (long k = m; k > 0; --k) {
      w *= static_cast<double>(k) / half;
      g *= (a - 1.0) / y;  // g(a-1)
      a -= 1.0;
      const double term = w * g;
      sum += term;
      if (term <= 1e-17 * sum && term <= prev) break;
      prev = term;
    }
  }
  {
    double w = wm, g = gm, a = am;
    double prev = wm * gm;
    for (long k = m; k < m + 1000000; ++k) {
      g *= y / a;  // g(a+1)
      a += 1.0;
      w *= half / static_cast<double>(k + 1);
      const double term = w * g;
      sum += term;
      if (term <= 1e-17 * sum && term <= prev) break;
      prev = term;
    }
  }
  return sum;
}

double noncentral_f_cdf(double x, int df1, int df2, double lambda) {
  if (x <= 0.0) return 0.0;
  const double d1 = df1, d2 = df2;
  const double y = d1 * x / (d1 * x + d2);
  const double b = 0.5 * d2;
  if (lambda == 0.0) return regularized_incomplete_beta(0.5 * d1, b, y);

  const double half = 0.5 * lambda;
  const long m = static_cast<long>(std::floor(half));
  const double am = 0.5 * d1 + static_cast<double>(m);

  const double wm = std::exp(poisson_log_pmf(half, m));
  const double bm = regularized_incomplete_beta(am, b, y);
  // T(a) = y^a (1-y)^b Gamma(a+b) / (Gamma(a+1) Gamma(b)); the step between
  // I_y(a, b) and I_y(a+1, b).
  const double tm = std::exp(am * std::log(y) + b * std::log1p(-y) + std::lgamma(am + b) -
                             std::lgamma(am + 1.0) - std::lgamma(b));

  double sum = wm * bm;
  double wsum = wm;
  {
    double w = wm, c = bm, t = tm, a = am;
    for (long k = m; k > 0 && 1.0 - wsum > kTailWeight; --k) {
      w *= static_cast<double>(k) / half;
      t *= a / (y * (a + b - 1.0));  // T(a-1)
      c += t;
      if (c > 1.0) c = 1.0;
      a -= 1.0;
      sum += w * c;
      wsum += w;
    }
  }
  {
    double w = wm, c = bm, t = tm, a = am;
    long k = m;
    while (1.0 - wsum > kTailWeight) {
      c -= t;
      if (c < 0.0) c = 0.0;
      t *= y * (a + b) / (a + 1.0);  // T(a+1)
      a += 1.0;
      w *= half / static_cast<double>(k + 1);
      ++k;
      sum += w * c;
      wsum += w;
      if ((1.0 - wsum) * c <= 1e-17 * sum) break;
      if (k > m + 100000) break;
    }
  }
  return std::fmin(1.0, std::fmax(0.0, sum));
}

// Bisect a nondecreasing cdf to its q-quantile; converges to the last
// representable bracket. The computed cdf saturates near 1 at the series
// truncation level, so the bracket expansion is capped rather than chased.
template <typename Cdf>
double bisect_quantile(const Cdf& cdf, double q, double hi_start) {
  double lo = 0.0;
  double hi = hi_start;
  for (int i = 0; i < 200 && cdf(hi) < q; ++i) {
    hi *= 2.0;
    if (!std::isfinite(hi)) {
      hi = std::numeric_limits<double>::max() / 4.0;
      break;
    }
  }
  for (int i = 0; i < 2000; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (cdf(mid) < q) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScaledNoncentralChiSquare::ScaledNoncentralChiSquare(double scale, int df, double noncentrality)
    : scale(scale), df(df), noncentrality(noncentrality) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("ScaledNoncentralChiSquare: scale must be positive");
  }
  if (df < 1) {
    throw std::invalid_argument("ScaledNoncentralChiSquare: df must be >= 1");
  }
  if (!(noncentrality >= 0.0) || !std::isfinite(noncentrality)) {
    throw std::invalid_argument("ScaledNoncentralChiSquare: noncentrality must be >= 0");
  }
}

double ScaledNoncentralChiSquare::fourth_central_moment() const {
  const double l = lambda();
  const double p = df;
  const double c4 = scale * scale * scale * scale;
  return c4 * (12.0 * (p + 2.0 * l) * (p + 2.0 * l) + 48.0 * (p + 4.0 * l));
}

double ScaledNoncentralChiSquare::cdf(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("ScaledNoncentralChiSquare::cdf: x must be finite");
  }
  return noncentral_chi_square_cdf(x / scale, df, lambda());
}

double ScaledNoncentralChiSquare::pdf(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("ScaledNoncentralChiSquare::pdf: x must be finite");
  }
  return noncentral_chi_square_pdf(x / scale, df, lambda()) / scale;
}

double ScaledNoncentralChiSquare::quantile(double q) const {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::invalid_argument("ScaledNoncentralChiSquare::quantile: q must be in (0,1)");
  }
  const double hi = mean() + 10.0 * std::sqrt(variance()) + scale;
  return bisect_quantile([this](double x) { return cdf(x); }, q, hi);
}

double ScaledNoncentralChiSquare::mgf(double t) const {
  if (!(t < 0.5 / scale)) {
    throw std::domain_error("ScaledNoncentralChiSquare::mgf: t must be < 1/(2*scale)");
  }
  const double u = 1.0 - 2.0 * t * scale;
  return std::exp(-0.5 * df * std::log(u) + noncentrality * t / u);
}

double ScaledNoncentralChiSquare::draw(Rng& rng) const {
  const double shift = std::sqrt(noncentrality / scale);
  double s = rng.chi_square(df - 1);
  const double z = rng.normal() + shift;
  return scale * (s + z * z);
}

std::vector<double> sample(const ScaledNoncentralChiSquare& d, std::uint64_t seed, std::size_t n) {
  if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = d.draw(rng);
  return out;
}

ScaledNoncentralChiSquare compound(double c1, int p, double c2, double gamma2) {
  if (!(c1 > 0.0)) throw std::invalid_argument("compound: c1 must be positive");
  if (!(c2 >= 0.0)) throw std::invalid_argument("compound: c2 must be >= 0");
  if (!(gamma2 >= 0.0)) throw std::invalid_argument("compound: gamma2 must be >= 0");
  return ScaledNoncentralChiSquare(c1 + c2, p, gamma2);
}

ScaledF::ScaledF(double scale, int df_num, int df_den, double noncentrality)
    : scale(scale), df_num(df_num), df_den(df_den), noncentrality(noncentrality) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw std::invalid_argument("ScaledF: scale must be positive");
  }
  if (df_num < 1 || df_den < 1) {
    throw std::invalid_argument("ScaledF: degrees of freedom must be >= 1");
  }
  if (!(noncentrality >= 0.0) || !std::isfinite(noncentrality)) {
    throw std::invalid_argument("ScaledF: noncentrality must be >= 0");
  }
}

double ScaledF::cdf(double x) const {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("ScaledF::cdf: x must be finite");
  }
  return noncentral_f_cdf(x / scale, df_num, df_den, noncentrality);
}

double ScaledF::quantile(double q) const {
  if (!(q > 0.0) || !(q < 1.0)) {
    throw std::invalid_argument("ScaledF::quantile: q must be in (0,1)");
  }
  const double hi = scale * ((df_den > 2) ? 4.0 * df_den / (df_den - 2.0) + noncentrality : 16.0 + noncentrality);
  return bisect_quantile([this](double x) { return cdf(x); }, q, hi);
}

}  // namespace vcanova
