#include "vcanova/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "vcanova/anova.hpp"
#include "vcanova/special_functions.hpp"

namespace vcanova {

namespace {

// 20-point Gauss-Legendre rule on [-1, 1] (positive abscissas; symmetric).
constexpr int kGlPoints = 10;
constexpr double kGlX[kGlPoints] = {
    0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
    0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
    0.9639719272779138, 0.9931285991850949};
constexpr double kGlW[kGlPoints] = {
    0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
    0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
    0.0406014298003869, 0.0176140071391521};

template <typename F>
double gauss_legendre_panels(const F& f, double lo, double hi, int panels) {
  const double width = (hi - lo) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = lo + (p + 0.5) * width;
    const double half = 0.5 * width;
    double s = 0.0;
    for (int i = 0; i < kGlPoints; ++i) {
      s += kGlW[i] * (f(mid + half * kGlX[i]) + f(mid - half * kGlX[i]));
    }
    total += s * half;
  }
  return total;
}

std::vector<double> draw_effects(Rng& rng, EffectKind kind, const ModelParams& params,
                                 const std::string& term, std::size_t count) {
  if (kind == EffectKind::fixed) {
    if (const auto* v = params.effects(term)) return *v;
    return std::vector<double>(count, 0.0);
  }
  const double sd = std::sqrt(params.variance(term));
  std::vector<double> out(count);
  for (auto& x : out) x = sd * rng.normal();
  return out;
}

double pearson_correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

void parallel_for_reps(std::size_t reps, unsigned workers,
                       const std::function<void(std::size_t)>& fn) {
  if (workers < 1) throw std::invalid_argument("worker count must be >= 1");
  if (workers == 1 || reps < 2 * workers) {
    for (std::size_t r = 0; r < reps; ++r) fn(r);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t lo = reps * w / workers;
    const std::size_t hi = reps * (w + 1) / workers;
    pool.emplace_back([&, lo, hi] {
      try {
        for (std::size_t r = lo; r < hi; ++r) fn(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

BalancedDataset simulate_dataset(const ModelSpec& spec, const ModelParams& params, Rng& rng) {
  check_params(spec, params);

  BalancedDataset data;
  data.spec = spec;
  data.level_labels.resize(spec.factors.size());
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    for (int l = 0; l < spec.factors[f].levels; ++l) {
      data.level_labels[f].push_back(std::to_string(l + 1));
    }
  }
  data.values.assign(spec.observation_count(), 0.0);

  const double err_sd = std::sqrt(params.sigma2);
  const double mu = params.mu;

  // Draw order: factor effects in spec order, then interaction effects, then
  // (split plot) whole-plot errors, then observation errors in dense order.
  switch (spec.design) {
    case DesignKind::one_way: {
      const auto& fa = spec.factors[0];
      const int n = spec.replicates;
      const auto ea = draw_effects(rng, fa.kind, params, fa.name, fa.levels);
      std::size_t idx = 0;
      for (int i = 0; i < fa.levels; ++i) {
        for (int k = 0; k < n; ++k) {
          data.values[idx++] = mu + ea[i] + err_sd * rng.normal();
        }
      }
      break;
    }
    case DesignKind::rcbd: {
      const auto& fa = spec.factors[0];
      const auto& fb = spec.factors[1];
      const auto ea = draw_effects(rng, fa.kind, params, fa.name, fa.levels);
      const auto eb = draw_effects(rng, fb.kind, params, fb.name, fb.levels);
      std::size_t idx = 0;
      for (int i = 0; i < fa.levels; ++i) {
        for (int j = 0; j < fb.levels; ++j) {
          data.values[idx++] = mu + ea[i] + eb[j] + err_sd * rng.normal();
        }
      }
      break;
    }
    case DesignKind::two_way_interaction: {
      const auto& fa = spec.factors[0];
      const auto& fb = spec.factors[1];
      const int n = spec.replicates;
      const auto ea = draw_effects(rng, fa.kind, params, fa.name, fa.levels);
      const auto eb = draw_effects(rng, fb.kind, params, fb.name, fb.levels);
      const auto eab = draw_effects(rng, *spec.interaction_kind, params, spec.interaction_name(),
                                    static_cast<std::size_t>(fa.levels) * fb.levels);
      std::size_t idx = 0;
      for (int i = 0; i < fa.levels; ++i) {
        for (int j = 0; j < fb.levels; ++j) {
          const double cell = mu + ea[i] + eb[j] + eab[static_cast<std::size_t>(i) * fb.levels + j];
          for (int k = 0; k < n; ++k) {
            data.values[idx++] = cell + err_sd * rng.normal();
          }
        }
      }
      break;
    }
    case DesignKind::split_plot: {
      const auto& fblk = spec.factors[0];
      const auto& fa = spec.factors[1];
      const auto& fb = spec.factors[2];
      const int r = fblk.levels, a = fa.levels, b = fb.levels;
      const auto eblk = draw_effects(rng, EffectKind::random, params, fblk.name, r);
      const auto ea = draw_effects(rng, fa.kind, params, fa.name, a);
      const double wp_sd = std::sqrt(params.variance(kWholePlotKey));
      std::vector<double> wp(static_cast<std::size_t>(r) * a);
      for (auto& x : wp) x = wp_sd * rng.normal();
      const auto eb = draw_effects(rng, fb.kind, params, fb.name, b);
      const auto eab = draw_effects(rng, *spec.interaction_kind, params, spec.interaction_name(),
                                    static_cast<std::size_t>(a) * b);
      std::size_t idx = 0;
      for (int h = 0; h < r; ++h) {
        for (int i = 0; i < a; ++i) {
          const double plot = mu + eblk[h] + ea[i] + wp[static_cast<std::size_t>(h) * a + i];
          for (int j = 0; j < b; ++j) {
            data.values[idx++] = plot + eb[j] + eab[static_cast<std::size_t>(i) * b + j] +
                                 err_sd * rng.normal();
          }
        }
      }
      break;
    }
  }
  return data;
}

BalancedDataset simulate_dataset(const ModelSpec& spec, const ModelParams& params,
                                 std::uint64_t seed) {
  Rng rng(seed);
  return simulate_dataset(spec, params, rng);
}

KsResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw std::invalid_argument("ks_test: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double fi = cdf(sample[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - fi);
    d = std::max(d, fi - static_cast<double>(i) / n);
  }
  return {d, kolmogorov_tail(std::sqrt(n) * d)};
}

double mgf_mixture_quadrature(double c1, int p, double c2, double gamma2, double t) {
  if (!(t < 0.5 / (c1 + c2))) {
    throw std::domain_error("mgf_mixture_quadrature: t outside the compound MGF domain");
  }
  if (c2 == 0.0) {
    return ScaledNoncentralChiSquare(c1, p, gamma2).mgf(t);
  }
  const ScaledNoncentralChiSquare mixing(c2, p, gamma2);
  const double theta = t / (1.0 - 2.0 * t * c1);
  const double cond_front = std::exp(-0.5 * p * std::log1p(-2.0 * t * c1));

  // Truncation point from the exponentially tilted mixing law, which is again
  // a scaled noncentral chi-square.
  const double u = 1.0 - 2.0 * theta * c2;
  const ScaledNoncentralChiSquare tilted(c2 / u, p, gamma2 / (u * u));
  const double upper = tilted.quantile(1.0 - 1e-13);

  // Substitute gamma = s^2 to smooth the s^(p-2) endpoint behaviour.
  const auto integrand = [&](double s) {
    const double gamma1 = s * s;
    return 2.0 * s * mixing.pdf(gamma1) * std::exp(theta * gamma1);
  };
  const double hi = std::sqrt(upper);
  double prev = gauss_legendre_panels(integrand, 0.0, hi, 8);
  for (int panels = 16; panels <= 512; panels *= 2) {
    const double next = gauss_legendre_panels(integrand, 0.0, hi, panels);
    if (std::fabs(next - prev) <= 1e-11 * std::fabs(next)) {
      prev = next;
      break;
    }
    prev = next;
  }
  return cond_front * prev;
}

double mgf_compound_quadrature_error(double c1, int p, double c2, double gamma2,
                                     const std::vector<double>& ts) {
  const auto law = compound(c1, p, c2, gamma2);
  double worst = 0.0;
  for (double t : ts) {
    const double closed = law.mgf(t);
    const double quad = mgf_mixture_quadrature(c1, p, c2, gamma2, t);
    worst = std::max(worst, std::fabs(quad - closed) / std::fabs(closed));
  }
  return worst;
}

LemmaCheck lemma_check(double c1, int p, double c2, double gamma2, std::size_t reps,
                       const SeedPolicy& policy) {
  if (reps < 1) throw std::invalid_argument("lemma_check: reps must be >= 1");
  const auto law = compound(c1, p, c2, gamma2);

  std::vector<double> draws(reps);
  parallel_for_reps(reps, policy.worker_count, [&](std::size_t rep) {
    Rng rng(derive_stream_seed(policy.master_seed, rep));
    double gamma1 = gamma2;
    if (c2 > 0.0) gamma1 = ScaledNoncentralChiSquare(c2, p, gamma2).draw(rng);
    draws[rep] = ScaledNoncentralChiSquare(c1, p, gamma1).draw(rng);
  });

  LemmaCheck check;
  check.c1 = c1;
  check.p = p;
  check.c2 = c2;
  check.gamma2 = gamma2;
  const auto ks = ks_test(std::move(draws), [&](double x) { return law.cdf(x); });
  check.ks_statistic = ks.statistic;
  check.ks_p_value = ks.p_value;
  check.ks_ok = ks.p_value > kKsMinP;

  const double tmax = 0.5 / (c1 + c2);
  check.mgf_max_rel_error = mgf_compound_quadrature_error(
      c1, p, c2, gamma2, {-0.75 * tmax, 0.2 * tmax, 0.45 * tmax, 0.7 * tmax});
  check.mgf_ok = check.mgf_max_rel_error < kMgfRelTol;
  return check;
}

SimReport run_verification(const ModelSpec& spec, const ModelParams& params, std::size_t reps,
                           const std::vector<double>& alphas, const SeedPolicy& policy,
                           const SsLawSet* law_override) {
  check_params(spec, params);
  if (reps < kMinVerificationReps) {
    throw ValidationError("reps below minimum (" + std::to_string(kMinVerificationReps) + ")");
  }
  for (double a : alphas) {
    if (!(a > 0.0) || !(a < 1.0)) throw ValidationError("alpha must be in (0,1)");
  }

  SimReport report;
  report.spec = spec;
  report.params = params;
  report.reps = reps;
  report.alphas = alphas;
  report.policy = policy;
  report.laws_overridden = law_override != nullptr;

  const auto conds = conditional_laws(spec, params);
  const auto true_laws = ss_laws(spec, params);
  const SsLawSet& tested_laws = law_override ? *law_override : true_laws;
  report.independent = tested_laws.independent;
  const auto flaws = f_laws(spec, params);
  const auto sources = source_table(spec);
  const std::size_t n_sources = sources.size();

  std::vector<std::vector<double>> ss_values(n_sources, std::vector<double>(reps));
  std::vector<std::vector<double>> f_values(flaws.size(), std::vector<double>(reps));

  parallel_for_reps(reps, policy.worker_count, [&](std::size_t rep) {
    Rng rng(derive_stream_seed(policy.master_seed, rep));
    const auto data = simulate_dataset(spec, params, rng);
    const auto table = decompose(data);
    for (std::size_t s = 0; s < n_sources; ++s) {
      ss_values[s][rep] = table.rows[s].ss;
    }
    for (std::size_t fidx = 0; fidx < flaws.size(); ++fidx) {
      const auto& num = table.row(flaws[fidx].source);
      const auto& den = table.row(flaws[fidx].denominator);
      f_values[fidx][rep] = den.ms > 0.0 ? num.ms / den.ms
                                         : std::numeric_limits<double>::infinity();
    }
  });

  for (std::size_t s = 0; s < n_sources; ++s) {
    const auto& cond = conds[s];
    const auto& law = tested_laws.law(sources[s].name);
    SourceCheck check;
    check.source = sources[s].name;
    check.df = law.df;
    check.scale = law.scale;
    check.noncentrality = law.noncentrality;
    check.cond_scale = cond.scale;
    check.mixing_c2 = cond.c2;
    check.mixing_gamma2 = cond.gamma2;
    check.compound_gamma2_positive = cond.c2 > 0.0 && cond.gamma2 > 0.0;

    const auto& values = ss_values[s];
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(reps);
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(reps - 1);

    check.empirical_mean = mean;
    check.theoretical_mean = law.mean();
    check.mean_se = std::sqrt(law.variance() / static_cast<double>(reps));
    check.mean_ok =
        std::fabs(mean - check.theoretical_mean) <= kMeanSigmas * check.mean_se;

    check.empirical_variance = var;
    check.theoretical_variance = law.variance();
    const double mu4 = law.fourth_central_moment();
    check.variance_se =
        std::sqrt((mu4 - law.variance() * law.variance()) / static_cast<double>(reps));
    check.variance_ok =
        std::fabs(var - check.theoretical_variance) <= kVarianceSigmas * check.variance_se;

    const auto ks = ks_test(values, [&law](double x) { return law.cdf(x); });
    check.ks_statistic = ks.statistic;
    check.ks_p_value = ks.p_value;
    check.ks_ok = ks.p_value > kKsMinP;

    report.sources.push_back(check);
  }

  const double corr_limit = kCorrelationSigmas / std::sqrt(static_cast<double>(reps));
  for (std::size_t i = 0; i < n_sources; ++i) {
    for (std::size_t j = i + 1; j < n_sources; ++j) {
      CorrelationCheck check;
      check.source_a = sources[i].name;
      check.source_b = sources[j].name;
      check.correlation = pearson_correlation(ss_values[i], ss_values[j]);
      check.limit = corr_limit;
      check.ok = std::fabs(check.correlation) <= corr_limit;
      report.correlations.push_back(check);
    }
  }

  for (std::size_t fidx = 0; fidx < flaws.size(); ++fidx) {
    const auto& fl = flaws[fidx];
    for (double alpha : alphas) {
      const double crit = f_quantile(1.0 - alpha, fl.law.df_num, fl.law.df_den);
      std::size_t rejections = 0;
      for (double f : f_values[fidx]) {
        if (f > crit) ++rejections;
      }
      RejectionCheck check;
      check.source = fl.source;
      check.denominator = fl.denominator;
      check.alpha = alpha;
      check.rate = static_cast<double>(rejections) / static_cast<double>(reps);
      check.expected = 1.0 - fl.law.cdf(crit);
      check.se = std::sqrt(check.expected * (1.0 - check.expected) / static_cast<double>(reps));
      check.ok = std::fabs(check.rate - check.expected) <= kRejectionSigmas * check.se;
      report.rejections.push_back(check);
    }
  }

  // Compounding check for every source whose noncentrality is itself random.
  std::size_t lemma_index = 0;
  for (const auto& cond : conds) {
    if (!cond.gamma1_random()) continue;
    SeedPolicy sub = policy;
    sub.master_seed = derive_stream_seed(policy.master_seed, 0x4c454d4d41ull + lemma_index);
    auto check = lemma_check(cond.scale, cond.df, cond.c2, cond.gamma2, reps, sub);
    check.source = cond.source;
    report.lemma_checks.push_back(check);
    ++lemma_index;
  }

  bool ok = true;
  for (const auto& c : report.sources) ok = ok && c.mean_ok && c.variance_ok && c.ks_ok;
  for (const auto& c : report.correlations) ok = ok && c.ok;
  for (const auto& c : report.rejections) ok = ok && c.ok;
  for (const auto& c : report.lemma_checks) ok = ok && c.ks_ok && c.mgf_ok;
  report.all_passed = ok;
  return report;
}

}  // namespace vcanova
