#ifndef VCANOVA_ANOVA_HPP
#define VCANOVA_ANOVA_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "vcanova/designs.hpp"

namespace vcanova {

// Symbolic expected mean square, e.g. sigma^2 + 4*sigma^2(A) + gamma(A)/2.
struct EmsTerm {
  double coef = 1.0;
  std::string symbol;
};

struct EmsExpr {
  std::vector<EmsTerm> terms;
  std::string str() const;
};

struct AnovaRow {
  std::string source;
  int df = 0;
  double ss = 0.0;
  double ms = 0.0;
  EmsExpr ems;
  std::optional<double> f;
  std::optional<std::string> denominator;
  std::optional<double> p_value;
};

struct AnovaTable {
  std::vector<AnovaRow> rows;
  double total_ss = 0.0;
  int total_df = 0;

  const AnovaRow& row(const std::string& source) const;
  AnovaRow* find(const std::string& source);
};

// Orthogonal SS decomposition with df, MS and symbolic EMS per source.
AnovaTable decompose(const BalancedDataset& data);

// Adds F statistics against the EMS-matching denominator, and p-values from
// the central F distribution. A zero denominator MS leaves F undefined.
void attach_tests(AnovaTable& table, const ModelSpec& spec);

// Numeric E(MS) per source under the given parameters.
std::map<std::string, double> expected_mean_squares(const ModelSpec& spec,
                                                    const ModelParams& params);

struct ComponentEstimate {
  std::string term;  // random term name, or "sigma^2" for the error variance
  double raw = 0.0;
  double value = 0.0;  // raw truncated at zero
  bool truncated = false;
};

// Method-of-moments estimates from the EMS linear system over the pure-random
// sources. Negative solutions are reported raw and truncated.
std::vector<ComponentEstimate> estimate_components(const AnovaTable& table,
                                                   const ModelSpec& spec);

// Probability that each F test rejects at level alpha under the given
// parameters; equals alpha when the tested source is null.
std::map<std::string, double> power(const ModelSpec& spec, const ModelParams& params,
                                    double alpha);

}  // namespace vcanova

#endif
