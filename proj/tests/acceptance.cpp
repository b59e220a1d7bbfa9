// Acceptance suite. Each criterion prints one [PASS]/[FAIL] line; the exit
// code is the number of failed criteria. Run all with no arguments or a
// single criterion with `acceptance <n>`.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "vcanova/anova.hpp"
#include "vcanova/designs.hpp"
#include "vcanova/distributions.hpp"
#include "vcanova/io.hpp"
#include "vcanova/rng.hpp"
#include "vcanova/simulation.hpp"
#include "vcanova/theory.hpp"

using namespace vcanova;

namespace {

constexpr std::size_t kReps = 100000;
constexpr unsigned kWorkers = 4;

double elapsed_seconds(const std::chrono::steady_clock::time_point& start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

ModelSpec one_way(int a, int n, EffectKind kind) {
  return {DesignKind::one_way, {{"A", a, kind}}, n, std::nullopt};
}

ModelSpec rcbd_mixed(int a, int b) {
  return {DesignKind::rcbd,
          {{"A", a, EffectKind::fixed}, {"B", b, EffectKind::random}},
          1,
          std::nullopt};
}

ModelSpec two_way_random_inter(int a, int b, int n) {
  return {DesignKind::two_way_interaction,
          {{"A", a, EffectKind::random}, {"B", b, EffectKind::fixed}},
          n,
          EffectKind::random};
}

ModelSpec split_plot(int r, int a, int b) {
  return {DesignKind::split_plot,
          {{"Block", r, EffectKind::random},
           {"A", a, EffectKind::fixed},
           {"B", b, EffectKind::fixed}},
          1,
          EffectKind::fixed};
}

bool law_equals(const ScaledNoncentralChiSquare& law, double scale, int df, double gamma,
                std::ostream& os, const std::string& name) {
  const bool ok = std::fabs(law.scale - scale) < 1e-12 && law.df == df &&
                  std::fabs(law.noncentrality - gamma) < 1e-12;
  if (!ok) {
    os << " [" << name << " law (" << law.scale << "," << law.df << "," << law.noncentrality
       << ") != (" << scale << "," << df << "," << gamma << ")]";
  }
  return ok;
}

// ---- criterion 1: compounding MGF identity by quadrature --------------------

bool criterion_mgf_identity(std::ostream& os) {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  int tuples = 0;
  int noncentral_tuples = 0;
  for (double c1 : {0.5, 1.0, 2.0}) {
    for (int p : {1, 2, 5}) {
      for (double c2 : {0.5, 3.0}) {
        for (double gamma2 : {0.0, 4.0}) {
          const double tmax = 0.5 / (c1 + c2);
          const double err = mgf_compound_quadrature_error(
              c1, p, c2, gamma2, {-0.6 * tmax, 0.3 * tmax, 0.7 * tmax});
          worst = std::max(worst, err);
          ++tuples;
          if (gamma2 > 0.0) ++noncentral_tuples;
        }
      }
    }
  }
  const double secs = elapsed_seconds(start);
  os << tuples << " tuples (" << noncentral_tuples << " with gamma2>0), max rel err " << worst
     << ", " << secs << " s";
  return tuples >= 20 && noncentral_tuples > 0 && worst < 1e-8 && secs < 10.0;
}

// ---- criterion 2: compounding sampling equivalence ---------------------------

bool criterion_lemma_sampling(std::ostream& os) {
  const auto start = std::chrono::steady_clock::now();
  const auto a = lemma_check(1.0, 3, 2.0, 0.0, kReps, {11, kWorkers});
  const auto b = lemma_check(2.0, 5, 3.0, 4.0, kReps, {12, kWorkers});
  const double secs = elapsed_seconds(start);
  os << "KS p = " << a.ks_p_value << " for (1,3,2,0), " << b.ks_p_value << " for (2,5,3,4), "
     << secs << " s";
  return a.ks_p_value > 0.01 && b.ks_p_value > 0.01 && secs < 30.0;
}

// ---- criterion 3: one-way random laws ------------------------------------

bool criterion_one_way_laws(std::ostream& os) {
  ModelParams p;
  p.sigma2 = 1.0;
  p.variance_components["A"] = 2.0;
  const auto report = run_verification(one_way(3, 4, EffectKind::random), p, kReps, {0.05},
                                       {13, kWorkers});
  bool ok = true;
  ok = law_equals(ss_laws(one_way(3, 4, EffectKind::random), p).law("A"), 9, 2, 0, os, "A") && ok;
  ok = law_equals(ss_laws(one_way(3, 4, EffectKind::random), p).law("Error"), 1, 9, 0, os,
                  "Error") &&
       ok;
  for (const auto& s : report.sources) {
    ok = ok && s.mean_ok && s.ks_ok;
    os << " " << s.source << ": mean " << s.empirical_mean << "/" << s.theoretical_mean
       << ", KS p=" << s.ks_p_value << ";";
  }
  for (const auto& c : report.correlations) {
    ok = ok && c.ok;
    os << " |corr|=" << std::fabs(c.correlation) << " (<" << c.limit << ")";
  }
  return ok;
}

// ---- criterion 4: RCBD mixed laws ----------------------------------------

bool criterion_rcbd_laws(std::ostream& os) {
  ModelParams p;
  p.sigma2 = 2.0;
  p.fixed_effects["A"] = {-1.0, 0.0, 1.0};
  p.variance_components["B"] = 1.0;
  const auto spec = rcbd_mixed(3, 4);
  const auto laws = ss_laws(spec, p);
  bool ok = law_equals(laws.law("A"), 2, 2, 8, os, "A") &&
            law_equals(laws.law("B"), 5, 3, 0, os, "B") &&
            law_equals(laws.law("Error"), 2, 6, 0, os, "Error");
  const auto report = run_verification(spec, p, kReps, {0.05}, {14, kWorkers});
  for (const auto& s : report.sources) {
    ok = ok && s.ks_ok;
    os << " " << s.source << " KS p=" << s.ks_p_value << ";";
  }
  for (const auto& c : report.correlations) ok = ok && c.ok;
  os << " all |corr| within 4/sqrt(reps): " << (ok ? "yes" : "no");
  return ok;
}

// ---- criterion 5: two-way interaction law ---------------------------------

bool criterion_interaction_law(std::ostream& os) {
  ModelParams p;
  p.sigma2 = 1.0;
  p.variance_components["A"] = 0.0;
  p.variance_components["A:B"] = 1.5;
  const auto spec = two_way_random_inter(2, 3, 2);
  bool ok = law_equals(ss_laws(spec, p).law("A:B"), 4, 2, 0, os, "A:B");
  const auto report = run_verification(spec, p, kReps, {0.05}, {99, kWorkers});
  for (const auto& s : report.sources) {
    if (s.source == "A:B") {
      ok = ok && s.ks_ok;
      os << "SS_AB vs (4,2,0): KS p=" << s.ks_p_value;
    }
  }
  return ok;
}

// ---- criterion 6: split-plot gamma2 > 0 path -------------------------------

bool criterion_split_plot(std::ostream& os) {
  ModelParams p;
  p.sigma2 = 1.0;
  p.variance_components["Block"] = 1.0;
  p.variance_components[kWholePlotKey] = 0.5;
  p.fixed_effects["A"] = {-1.0, 0.0, 1.0};
  p.fixed_effects["B"] = {0.3, -0.3};
  const auto spec = split_plot(4, 3, 2);
  const auto report = run_verification(spec, p, kReps, {0.05}, {16, kWorkers});
  bool ok = true;
  std::string noncentral_compound;
  for (const auto& s : report.sources) {
    ok = ok && s.ks_ok;
    os << " " << s.source << " KS p=" << s.ks_p_value << ";";
    if (s.compound_gamma2_positive) noncentral_compound = s.source;
  }
  // the verify report must identify the stratum whose compounding used
  // gamma2 > 0
  const std::string json = report_to_json(report);
  ok = ok && !noncentral_compound.empty() &&
       json.find("\"gamma2_positive\": true") != std::string::npos;
  os << " gamma2>0 compound at source: "
     << (noncentral_compound.empty() ? "NONE" : noncentral_compound);
  return ok;
}

// ---- criterion 7: null calibration ----------------------------------------

bool criterion_null_calibration(std::ostream& os) {
  struct Config {
    std::string label;
    ModelSpec spec;
    ModelParams params;
    std::vector<std::string> null_sources;
  };
  std::vector<Config> configs;

  {
    Config c{"one_way fixed", one_way(3, 4, EffectKind::fixed), {}, {"A"}};
    c.params.sigma2 = 1.3;
    configs.push_back(c);
  }
  {
    Config c{"one_way random", one_way(3, 4, EffectKind::random), {}, {"A"}};
    c.params.sigma2 = 1.0;
    c.params.variance_components["A"] = 0.0;
    configs.push_back(c);
  }
  {
    Config c{"rcbd A-null", rcbd_mixed(3, 4), {}, {"A"}};
    c.params.sigma2 = 2.0;
    c.params.variance_components["B"] = 0.8;
    configs.push_back(c);
  }
  {
    Config c{"rcbd B-null", rcbd_mixed(3, 4), {}, {"B"}};
    c.params.sigma2 = 2.0;
    c.params.fixed_effects["A"] = {-1.0, 0.0, 1.0};
    c.params.variance_components["B"] = 0.0;
    configs.push_back(c);
  }
  {
    Config c{"two_way A-null", two_way_random_inter(2, 3, 2), {}, {"A"}};
    c.params.variance_components["A"] = 0.0;
    c.params.variance_components["A:B"] = 0.7;
    c.params.fixed_effects["B"] = {0.5, 0.0, -0.5};
    configs.push_back(c);
  }
  {
    Config c{"two_way B-null", two_way_random_inter(2, 3, 2), {}, {"B"}};
    c.params.variance_components["A"] = 0.6;
    c.params.variance_components["A:B"] = 0.7;
    configs.push_back(c);
  }
  {
    Config c{"two_way AB-null", two_way_random_inter(2, 3, 2), {}, {"A:B"}};
    c.params.variance_components["A"] = 0.6;
    c.params.variance_components["A:B"] = 0.0;
    c.params.fixed_effects["B"] = {0.5, 0.0, -0.5};
    configs.push_back(c);
  }
  {
    Config c{"split_plot Blocks/A-null", split_plot(4, 3, 2), {}, {"Block", "A"}};
    c.params.variance_components["Block"] = 0.0;
    c.params.variance_components[kWholePlotKey] = 0.5;
    c.params.fixed_effects["B"] = {0.4, -0.4};
    configs.push_back(c);
  }
  {
    Config c{"split_plot B/AB-null", split_plot(4, 3, 2), {}, {"B", "A:B"}};
    c.params.variance_components["Block"] = 1.0;
    c.params.variance_components[kWholePlotKey] = 0.5;
    c.params.fixed_effects["A"] = {-1.0, 0.0, 1.0};
    configs.push_back(c);
  }

  bool ok = true;
  std::uint64_t seed = 17;
  for (const auto& config : configs) {
    const auto report =
        run_verification(config.spec, config.params, kReps, {0.05}, {seed++, kWorkers});
    for (const auto& source : config.null_sources) {
      for (const auto& r : report.rejections) {
        if (r.source != source) continue;
        const bool in_window = r.rate >= 0.045 && r.rate <= 0.055;
        ok = ok && in_window;
        os << " " << config.label << " " << source << ": " << r.rate << ";";
      }
    }
  }
  return ok;
}

// ---- criterion 8: exact small-case oracle ----------------------------------

bool criterion_exact_tables(std::ostream& os) {
  bool ok = true;
  {
    ModelSpec spec = one_way(2, 2, EffectKind::fixed);
    auto data = validate(spec, {{{"1"}, 1.0}, {{"1"}, 2.0}, {{"2"}, 3.0}, {{"2"}, 4.0}});
    auto table = decompose(data);
    attach_tests(table, spec);
    ok = ok && std::fabs(table.row("A").ss - 4.0) <= 1e-12;
    ok = ok && std::fabs(table.row("Error").ss - 1.0) <= 1e-12;
    ok = ok && std::fabs(table.total_ss - 5.0) <= 1e-12;
    ok = ok && std::fabs(*table.row("A").f - 8.0) <= 1e-12;
    os << "one-way SS_A=" << table.row("A").ss << " SS_E=" << table.row("Error").ss
       << " F=" << *table.row("A").f << ";";
  }
  {
    ModelSpec spec = rcbd_mixed(2, 2);
    auto data = validate(spec, {{{"1", "1"}, 1.0}, {{"1", "2"}, 2.0}, {{"2", "1"}, 3.0},
                                {{"2", "2"}, 5.0}});
    auto table = decompose(data);
    attach_tests(table, spec);
    ok = ok && std::fabs(table.row("A").ss - 6.25) <= 1e-12;
    ok = ok && std::fabs(table.row("B").ss - 2.25) <= 1e-12;
    ok = ok && std::fabs(table.row("Error").ss - 0.25) <= 1e-12;
    ok = ok && std::fabs(*table.row("A").f - 25.0) <= 1e-12;
    ok = ok && std::fabs(*table.row("B").f - 9.0) <= 1e-12;
    os << " rcbd SS=" << table.row("A").ss << "/" << table.row("B").ss << "/"
       << table.row("Error").ss;
  }
  return ok;
}

// ---- criterion 9: invariant suite ------------------------------------------

bool criterion_invariants(std::ostream& os) {
  Rng rng(18);
  bool ok = true;
  int datasets = 0;
  for (int design = 0; design < 4 && ok; ++design) {
    for (int rep = 0; rep < 100 && ok; ++rep) {
      ModelSpec spec;
      const auto levels = [&](int lo, int hi) {
        return lo + static_cast<int>(rng.uniform() * (hi - lo + 1));
      };
      switch (design) {
        case 0:
          spec = one_way(levels(2, 5), levels(1, 3),
                         rng.uniform() < 0.5 ? EffectKind::fixed : EffectKind::random);
          break;
        case 1:
          spec = rcbd_mixed(levels(2, 5), levels(2, 5));
          break;
        case 2:
          spec = two_way_random_inter(levels(2, 4), levels(2, 4), levels(1, 3));
          break;
        default:
          spec = split_plot(levels(2, 4), levels(2, 4), levels(2, 3));
          break;
      }
      std::vector<Record> records;
      std::vector<int> lv(spec.factors.size(), 0);
      const std::size_t cells = spec.cell_count();
      for (std::size_t cell = 0; cell < cells; ++cell) {
        for (int k = 0; k < spec.replicates; ++k) {
          Record rec;
          for (std::size_t f = 0; f < spec.factors.size(); ++f) {
            rec.labels.push_back(std::to_string(lv[f] + 1));
          }
          rec.y = 2.0 * rng.normal() - 0.5;
          records.push_back(std::move(rec));
        }
        for (std::size_t f = spec.factors.size(); f-- > 0;) {
          if (++lv[f] < spec.factors[f].levels) break;
          lv[f] = 0;
        }
      }
      auto data = validate(spec, records);
      auto table = decompose(data);
      ++datasets;

      double ss_sum = 0.0;
      for (const auto& r : table.rows) ss_sum += r.ss;
      ok = ok && std::fabs(ss_sum - table.total_ss) <=
                     1e-10 * std::max(1.0, std::fabs(table.total_ss));

      auto shifted = data;
      for (auto& v : shifted.values) v += 11.25;
      auto t_shift = decompose(shifted);
      auto scaled = data;
      for (auto& v : scaled.values) v *= 1.75;
      auto t_scale = decompose(scaled);
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const double base = std::max(1.0, std::fabs(table.rows[i].ss));
        ok = ok && std::fabs(t_shift.rows[i].ss - table.rows[i].ss) <= 1e-10 * base;
        ok = ok &&
             std::fabs(t_scale.rows[i].ss - 1.75 * 1.75 * table.rows[i].ss) <= 1e-9 * base;
      }

      // permute the labels of one random factor
      const std::size_t pf =
          static_cast<std::size_t>(rng.uniform() * static_cast<double>(spec.factors.size()));
      for (auto& rec : records) {
        const int lvl = std::stoi(rec.labels[pf]);
        rec.labels[pf] = std::to_string(1 + (lvl % spec.factors[pf].levels));
      }
      auto t_perm = decompose(validate(spec, records));
      for (std::size_t i = 0; i < table.rows.size(); ++i) {
        ok = ok && std::fabs(t_perm.rows[i].ss - table.rows[i].ss) <=
                       1e-10 * std::max(1.0, std::fabs(table.rows[i].ss));
      }
    }
  }
  os << datasets << " randomized datasets, additivity/shift/scale/permutation";
  return ok;
}

// ---- criterion 10: numerics -------------------------------------------------

bool criterion_numerics(std::ostream& os) {
  bool ok = true;
  double worst_roundtrip = 0.0;
  Rng rng(19);
  const std::vector<double> qs = {0.001, 0.01, 0.1, 0.5, 0.9, 0.99, 0.999};
  for (int i = 0; i < 50; ++i) {
    const double c = 0.1 + 9.9 * rng.uniform();
    const int p = 1 + static_cast<int>(rng.uniform() * 30.0);
    const double lambda = 100.0 * rng.uniform();
    const ScaledNoncentralChiSquare d(c, p, c * lambda);
    for (double q : qs) {
      const double err = std::fabs(d.cdf(d.quantile(q)) - q);
      worst_roundtrip = std::max(worst_roundtrip, err);
    }
  }
  ok = ok && worst_roundtrip < 1e-9;

  double worst_exp = 0.0;
  const ScaledNoncentralChiSquare expo(1.0, 2, 0.0);
  const ScaledNoncentralChiSquare expo3(3.0, 2, 0.0);
  for (double x = 0.1; x < 20.0; x += 0.37) {
    worst_exp = std::max(worst_exp, std::fabs(expo.cdf(x) - (1.0 - std::exp(-0.5 * x))));
    worst_exp = std::max(worst_exp,
                         std::fabs(expo3.cdf(3.0 * x) - (1.0 - std::exp(-0.5 * x))));
  }
  for (double q : qs) {
    worst_exp =
        std::max(worst_exp, std::fabs(expo.quantile(q) - (-2.0 * std::log1p(-q))) / 2.0);
  }
  ok = ok && worst_exp < 1e-12;
  os << "50 parameter draws: worst |cdf(quantile(q))-q| = " << worst_roundtrip
     << "; exponential special case err = " << worst_exp;
  return ok;
}

struct Criterion {
  int id;
  std::string title;
  std::function<bool(std::ostream&)> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "compounding MGF identity (quadrature vs closed form)", criterion_mgf_identity},
      {2, "compounding sampling equivalence (hierarchical vs compound)", criterion_lemma_sampling},
      {3, "one-way random SS laws", criterion_one_way_laws},
      {4, "RCBD mixed SS laws", criterion_rcbd_laws},
      {5, "two-way random interaction SS law", criterion_interaction_law},
      {6, "split-plot laws with the gamma2>0 compound path", criterion_split_plot},
      {7, "null calibration of every F test", criterion_null_calibration},
      {8, "exact small-case ANOVA tables", criterion_exact_tables},
      {9, "decomposition invariants on randomized datasets", criterion_invariants},
      {10, "cdf/quantile numerics", criterion_numerics},
  };

  int selected = 0;
  if (argc > 1) selected = std::atoi(argv[1]);

  int failures = 0;
  for (const auto& c : criteria) {
    if (selected != 0 && c.id != selected) continue;
    std::ostringstream details;
    bool ok = false;
    try {
      ok = c.run(details);
    } catch (const std::exception& e) {
      details << " exception: " << e.what();
    }
    std::printf("[%s] criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", c.id, c.title.c_str(),
                details.str().c_str());
    if (!ok) ++failures;
  }
  return failures;
}
