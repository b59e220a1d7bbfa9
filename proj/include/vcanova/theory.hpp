#ifndef VCANOVA_THEORY_HPP
#define VCANOVA_THEORY_HPP

#include <string>
#include <utility>
#include <vector>

#include "vcanova/designs.hpp"
#include "vcanova/distributions.hpp"

namespace vcanova {

// Conditional law of one SS given all random effects:
//   SS | gamma1  ~  scale * chisq(df, gamma1/scale),
// with scale the error variance of the stratum. The noncentrality gamma1 is
// degenerate at gamma2 when c2 == 0; otherwise gamma1 ~ c2*chisq(df, gamma2/c2)
// (gamma2 > 0 exactly when fixed effects enter the conditioning quadratic
// form alongside random ones).
struct ConditionalLaw {
  std::string source;
  double scale = 1.0;  // c1
  int df = 1;          // p, shared with the mixing law
  double c2 = 0.0;
  double gamma2 = 0.0;

  bool gamma1_random() const { return c2 > 0.0; }
  ScaledNoncentralChiSquare mixing_law() const;
  ScaledNoncentralChiSquare marginal() const;  // compound(scale, df, c2, gamma2)
};

std::vector<ConditionalLaw> conditional_laws(const ModelSpec& spec, const ModelParams& params);

// Exact marginal law of every SS in the decomposition. The laws are mutually
// independent for all supported balanced designs.
struct SsLawSet {
  std::vector<std::pair<std::string, ScaledNoncentralChiSquare>> laws;
  bool independent = true;

  const ScaledNoncentralChiSquare& law(const std::string& source) const;
};

SsLawSet ss_laws(const ModelSpec& spec, const ModelParams& params);

struct FLaw {
  std::string source;
  std::string denominator;
  ScaledF law;
};

// Distribution of each F statistic under the given parameters (not the null):
// scale = numerator SS scale / denominator SS scale, noncentrality from the
// numerator. Supported designs always have central denominators.
std::vector<FLaw> f_laws(const ModelSpec& spec, const ModelParams& params);

}  // namespace vcanova

#endif
