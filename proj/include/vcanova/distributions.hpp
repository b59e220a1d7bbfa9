#ifndef VCANOVA_DISTRIBUTIONS_HPP
#define VCANOVA_DISTRIBUTIONS_HPP

#include <cstdint>
#include <vector>

#include "vcanova/rng.hpp"

namespace vcanova {

// Law of scale * chi-square(df, noncentrality/scale). The noncentrality is
// carried in the same units as the variate (variance units), so the usual
// chi-square noncentrality parameter is lambda() = noncentrality/scale.
// Closed under compound() below.
struct ScaledNoncentralChiSquare {
  double scale;          // c > 0
  int df;                // p >= 1
  double noncentrality;  // gamma >= 0

  ScaledNoncentralChiSquare(double scale, int df, double noncentrality);

  double lambda() const { return noncentrality / scale; }
  double mean() const { return scale * df + noncentrality; }
  double variance() const { return 2.0 * scale * scale * df + 4.0 * scale * noncentrality; }
  // Fourth central moment; used for the standard error of sample variances.
  double fourth_central_moment() const;

  double cdf(double x) const;
  double pdf(double x) const;
  double quantile(double q) const;

  // E exp(tX) = (1-2tc)^(-p/2) exp(gamma*t/(1-2tc)), defined for t < 1/(2c).
  double mgf(double t) const;

  // One draw via scale * [chisq(df-1) + (Z + sqrt(noncentrality/scale))^2].
  double draw(Rng& rng) const;
};

// Deterministic sample of size n for the given seed.
std::vector<double> sample(const ScaledNoncentralChiSquare& d, std::uint64_t seed, std::size_t n);

// The compounding operator: if x | g1 ~ c1*chisq(p, g1/c1) and
// g1 ~ c2*chisq(p, gamma2/c2), the marginal of x is
// (c1+c2)*chisq(p, gamma2/(c1+c2)). c2 == 0 is the degenerate mixing
// distribution (g1 fixed at gamma2) and returns the conditional law.
ScaledNoncentralChiSquare compound(double c1, int p, double c2, double gamma2);

// Law of scale * F(df_num, df_den, noncentrality), noncentrality in the
// numerator; 0 gives the central case.
struct ScaledF {
  double scale;
  int df_num;
  int df_den;
  double noncentrality;  // lambda

  ScaledF(double scale, int df_num, int df_den, double noncentrality);

  double cdf(double x) const;
  double quantile(double q) const;
};

}  // namespace vcanova

#endif
