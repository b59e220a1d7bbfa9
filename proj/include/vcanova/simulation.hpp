#ifndef VCANOVA_SIMULATION_HPP
#define VCANOVA_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "vcanova/designs.hpp"
#include "vcanova/theory.hpp"

namespace vcanova {

// Pinned verification thresholds.
inline constexpr double kKsMinP = 0.01;
inline constexpr double kMeanSigmas = 4.0;
inline constexpr double kVarianceSigmas = 5.0;  // variance estimates are noisier
inline constexpr double kCorrelationSigmas = 4.0;
inline constexpr double kRejectionSigmas = 4.0;
inline constexpr double kMgfRelTol = 1e-8;
inline constexpr std::size_t kMinVerificationReps = 1000;

struct SeedPolicy {
  std::uint64_t master_seed = 0;
  unsigned worker_count = 1;
};

// Replication r always uses the stream derive_stream_seed(master_seed, r), so
// results do not depend on how replications are partitioned across workers.
void parallel_for_reps(std::size_t reps, unsigned workers,
                       const std::function<void(std::size_t)>& fn);

// Draws every random effect and error term from its normal law and assembles
// the response array. Level labels are "1".."L".
BalancedDataset simulate_dataset(const ModelSpec& spec, const ModelParams& params, Rng& rng);
BalancedDataset simulate_dataset(const ModelSpec& spec, const ModelParams& params,
                                 std::uint64_t seed);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS test of an iid sample against a fully specified continuous
// cdf; p-value from the asymptotic Kolmogorov distribution.
KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);

struct SourceCheck {
  std::string source;
  int df = 0;
  double scale = 1.0;          // marginal law
  double noncentrality = 0.0;
  double cond_scale = 1.0;     // compound inputs: c1, (df), c2, gamma2
  double mixing_c2 = 0.0;
  double mixing_gamma2 = 0.0;
  bool compound_gamma2_positive = false;  // compounding invoked with gamma2 > 0
  double empirical_mean = 0.0;
  double theoretical_mean = 0.0;
  double mean_se = 0.0;
  double empirical_variance = 0.0;
  double theoretical_variance = 0.0;
  double variance_se = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  bool mean_ok = true;
  bool variance_ok = true;
  bool ks_ok = true;
};

struct RejectionCheck {
  std::string source;
  std::string denominator;
  double alpha = 0.0;
  double rate = 0.0;
  double expected = 0.0;  // theoretical power; alpha under the null
  double se = 0.0;
  bool ok = true;
};

struct CorrelationCheck {
  std::string source_a;
  std::string source_b;
  double correlation = 0.0;
  double limit = 0.0;
  bool ok = true;
};

struct LemmaCheck {
  std::string source;  // empty for direct invocations
  double c1 = 1.0;
  int p = 1;
  double c2 = 0.0;
  double gamma2 = 0.0;
  double ks_statistic = 0.0;
  double ks_p_value = 1.0;
  bool ks_ok = true;
  double mgf_max_rel_error = 0.0;
  bool mgf_ok = true;
};

struct SimReport {
  ModelSpec spec;
  ModelParams params;
  std::size_t reps = 0;
  std::vector<double> alphas;
  SeedPolicy policy;
  bool laws_overridden = false;
  bool independent = true;
  std::vector<SourceCheck> sources;
  std::vector<RejectionCheck> rejections;
  std::vector<CorrelationCheck> correlations;
  std::vector<LemmaCheck> lemma_checks;
  bool all_passed = true;
};

// Simulates `reps` datasets, decomposes each, and checks every SS against its
// derived law (moments + KS), pairwise SS correlations, F rejection rates at
// each alpha against the theoretical power, and the compounding lemma for
// every source with a nondegenerate mixing distribution. `law_override`
// substitutes the SS laws under test (negative-control hook); expectations for
// rejection rates still come from the true parameter laws.
SimReport run_verification(const ModelSpec& spec, const ModelParams& params, std::size_t reps,
                           const std::vector<double>& alphas, const SeedPolicy& policy,
                           const SsLawSet* law_override = nullptr);

// Hierarchical sampling vs. compound law (KS), plus the MGF quadrature
// identity on a t-grid.
LemmaCheck lemma_check(double c1, int p, double c2, double gamma2, std::size_t reps,
                       const SeedPolicy& policy);

// Numerical quadrature of E[mgf((c1, p, gamma1), t)] over
// gamma1 ~ c2*chisq(p, gamma2/c2). Valid for t < 1/(2(c1+c2)).
double mgf_mixture_quadrature(double c1, int p, double c2, double gamma2, double t);

// Max relative error of the quadrature against mgf(compound(...), t) over ts.
double mgf_compound_quadrature_error(double c1, int p, double c2, double gamma2,
                                     const std::vector<double>& ts);

}  // namespace vcanova

#endif
