#ifndef VCANOVA_SPECIAL_FUNCTIONS_HPP
#define VCANOVA_SPECIAL_FUNCTIONS_HPP

namespace vcanova {

// Regularized lower incomplete gamma P(a, x), a > 0, x >= 0.
// Series expansion for x < a+1, Lentz continued fraction otherwise.
double lower_regularized_gamma(double a, double x);

// Regularized incomplete beta I_x(a, b), a, b > 0, x in [0, 1].
double regularized_incomplete_beta(double a, double b, double x);

// Central chi-square cdf with (possibly non-integer) df > 0.
double chi_square_cdf(double x, double df);

// Central F cdf and survival function, df1, df2 > 0.
double f_cdf(double x, double df1, double df2);
double f_sf(double x, double df1, double df2);

// Central F quantile (bisection on f_cdf).
double f_quantile(double q, double df1, double df2);

// Kolmogorov distribution tail Q(t) = P(sup|B| > t) for the asymptotic
// one-sample KS statistic sqrt(n)*D_n.
double kolmogorov_tail(double t);

}  // namespace vcanova

#endif
