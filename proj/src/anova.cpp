#include "vcanova/anova.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "effect_math.hpp"
#include "vcanova/special_functions.hpp"
#include "vcanova/theory.hpp"

namespace vcanova {

namespace {

std::string format_coef(double c) {
  std::ostringstream os;
  os << c;
  return os.str();
}

EmsTerm sigma2_term() { return {1.0, "sigma^2"}; }

EmsTerm vc_term(double coef, const std::string& term) {
  return {coef, "sigma^2(" + term + ")"};
}

EmsTerm gamma_term(const std::string& source, int df) {
  return {1.0, "gamma(" + source + ")/" + std::to_string(df)};
}

// Symbolic EMS per source, unconstrained-model convention.
std::map<std::string, EmsExpr> symbolic_ems(const ModelSpec& spec) {
  std::map<std::string, EmsExpr> out;
  const auto sources = source_table(spec);
  for (const auto& src : sources) {
    EmsExpr e;
    e.terms.push_back(sigma2_term());
    switch (spec.design) {
      case DesignKind::one_way: {
        const auto& fa = spec.factors[0];
        if (src.role == SourceRole::factor_a) {
          if (fa.kind == EffectKind::random) {
            e.terms.push_back(vc_term(spec.replicates, fa.name));
          } else {
            e.terms.push_back(gamma_term(src.name, src.df));
          }
        }
        break;
      }
      case DesignKind::rcbd: {
        const auto& fa = spec.factors[0];
        const auto& fb = spec.factors[1];
        if (src.role == SourceRole::factor_a) {
          if (fa.kind == EffectKind::random) {
            e.terms.push_back(vc_term(fb.levels, fa.name));
          } else {
            e.terms.push_back(gamma_term(src.name, src.df));
          }
        } else if (src.role == SourceRole::factor_b) {
          if (fb.kind == EffectKind::random) {
            e.terms.push_back(vc_term(fa.levels, fb.name));
          } else {
            e.terms.push_back(gamma_term(src.name, src.df));
          }
        }
        break;
      }
      case DesignKind::two_way_interaction: {
        const auto& fa = spec.factors[0];
        const auto& fb = spec.factors[1];
        const int a = fa.levels, b = fb.levels, n = spec.replicates;
        const bool inter_random = *spec.interaction_kind == EffectKind::random;
        const std::string ab = spec.interaction_name();
        if (src.role == SourceRole::factor_a) {
          if (inter_random) e.terms.push_back(vc_term(n, ab));
          if (fa.kind == EffectKind::random) {
            e.terms.push_back(vc_term(static_cast<double>(b) * n, fa.name));
          } else {
            e.terms.push_back(gamma_term(src.name, src.df));
          }
        } else if (src.role == SourceRole::factor_b) {
          if (inter_random) e.terms.push_back(vc_term(n, ab));
          if (fb.kind == EffectKind::random) {
            e.terms.push_back(vc_term(static_cast<double>(a) * n, fb.name));
          } else {
            e.terms.push_back(gamma_term(src.name, src.df));
          }
        } else if (src.role == SourceRole::interaction) {
          if (inter_random) {
            e.terms.push_back(vc_term(n, ab));
          } else {
            e.terms.push_back(gamma_term(src.name, src.df));
          }
        }
        break;
      }
      case DesignKind::split_plot: {
        const auto& fblk = spec.factors[0];
        const int a = spec.factors[1].levels, b = spec.factors[2].levels;
        switch (src.role) {
          case SourceRole::blocks:
            e.terms.push_back(vc_term(b, kWholePlotKey));
            e.terms.push_back(vc_term(static_cast<double>(a) * b, fblk.name));
            break;
          case SourceRole::factor_a:
            e.terms.push_back(vc_term(b, kWholePlotKey));
            e.terms.push_back(gamma_term(src.name, src.df));
            break;
          case SourceRole::whole_plot_error:
            e.terms.push_back(vc_term(b, kWholePlotKey));
            break;
          case SourceRole::factor_b:
          case SourceRole::interaction:
            e.terms.push_back(gamma_term(src.name, src.df));
            break;
          default:
            break;
        }
        break;
      }
    }
    out[src.name] = std::move(e);
  }
  return out;
}

double squared(double x) { return x * x; }

}  // namespace

std::string EmsExpr::str() const {
  std::ostringstream os;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (i) os << " + ";
    if (terms[i].coef != 1.0) os << format_coef(terms[i].coef) << "*";
    os << terms[i].symbol;
  }
  return os.str();
}

const AnovaRow& AnovaTable::row(const std::string& source) const {
  for (const auto& r : rows) {
    if (r.source == source) return r;
  }
  throw std::invalid_argument("AnovaTable: no row for source \"" + source + "\"");
}

AnovaRow* AnovaTable::find(const std::string& source) {
  for (auto& r : rows) {
    if (r.source == source) return &r;
  }
  return nullptr;
}

AnovaTable decompose(const BalancedDataset& data) {
  const ModelSpec& spec = data.spec;
  const auto sources = source_table(spec);
  const double g = grand_mean(data);
  const std::size_t n_obs = data.values.size();

  std::map<std::string, double> ss;
  switch (spec.design) {
    case DesignKind::one_way: {
      const int a = spec.factors[0].levels;
      const int n = spec.replicates;
      const auto ma = cell_means(data, std::vector<int>{0}).means;
      double ss_a = 0.0;
      for (int i = 0; i < a; ++i) ss_a += squared(ma[i] - g);
      ss_a *= n;
      double ss_e = 0.0;
      for (int i = 0; i < a; ++i) {
        for (int k = 0; k < n; ++k) {
          ss_e += squared(data.values[static_cast<std::size_t>(i) * n + k] - ma[i]);
        }
      }
      ss[spec.factors[0].name] = ss_a;
      if (n > 1) ss["Error"] = ss_e;
      break;
    }
    case DesignKind::rcbd: {
      const int a = spec.factors[0].levels;
      const int b = spec.factors[1].levels;
      const auto ma = cell_means(data, std::vector<int>{0}).means;
      const auto mb = cell_means(data, std::vector<int>{1}).means;
      double ss_a = 0.0, ss_b = 0.0, ss_e = 0.0;
      for (int i = 0; i < a; ++i) ss_a += squared(ma[i] - g);
      for (int j = 0; j < b; ++j) ss_b += squared(mb[j] - g);
      for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) {
          ss_e += squared(data.values[static_cast<std::size_t>(i) * b + j] - ma[i] - mb[j] + g);
        }
      }
      ss[spec.factors[0].name] = static_cast<double>(b) * ss_a;
      ss[spec.factors[1].name] = static_cast<double>(a) * ss_b;
      ss["Error"] = ss_e;
      break;
    }
    case DesignKind::two_way_interaction: {
      const int a = spec.factors[0].levels;
      const int b = spec.factors[1].levels;
      const int n = spec.replicates;
      const auto ma = cell_means(data, std::vector<int>{0}).means;
      const auto mb = cell_means(data, std::vector<int>{1}).means;
      const auto mab = cell_means(data, std::vector<int>{0, 1}).means;
      double ss_a = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_e = 0.0;
      for (int i = 0; i < a; ++i) ss_a += squared(ma[i] - g);
      for (int j = 0; j < b; ++j) ss_b += squared(mb[j] - g);
      for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) {
          const double cm = mab[static_cast<std::size_t>(i) * b + j];
          ss_ab += squared(cm - ma[i] - mb[j] + g);
          for (int k = 0; k < n; ++k) {
            ss_e += squared(
                data.values[(static_cast<std::size_t>(i) * b + j) * n + k] - cm);
          }
        }
      }
      ss[spec.factors[0].name] = static_cast<double>(b) * n * ss_a;
      ss[spec.factors[1].name] = static_cast<double>(a) * n * ss_b;
      ss[spec.interaction_name()] = static_cast<double>(n) * ss_ab;
      if (n > 1) ss["Error"] = ss_e;
      break;
    }
    case DesignKind::split_plot: {
      const int r = spec.factors[0].levels;
      const int a = spec.factors[1].levels;
      const int b = spec.factors[2].levels;
      const auto mh = cell_means(data, std::vector<int>{0}).means;
      const auto ma = cell_means(data, std::vector<int>{1}).means;
      const auto mb = cell_means(data, std::vector<int>{2}).means;
      const auto mha = cell_means(data, std::vector<int>{0, 1}).means;
      const auto mab = cell_means(data, std::vector<int>{1, 2}).means;
      double ss_blk = 0.0, ss_a = 0.0, ss_wpe = 0.0, ss_b = 0.0, ss_ab = 0.0, ss_spe = 0.0;
      for (int h = 0; h < r; ++h) ss_blk += squared(mh[h] - g);
      for (int i = 0; i < a; ++i) ss_a += squared(ma[i] - g);
      for (int j = 0; j < b; ++j) ss_b += squared(mb[j] - g);
      for (int h = 0; h < r; ++h) {
        for (int i = 0; i < a; ++i) {
          ss_wpe += squared(mha[static_cast<std::size_t>(h) * a + i] - mh[h] - ma[i] + g);
        }
      }
      for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) {
          ss_ab += squared(mab[static_cast<std::size_t>(i) * b + j] - ma[i] - mb[j] + g);
        }
      }
      for (int h = 0; h < r; ++h) {
        for (int i = 0; i < a; ++i) {
          for (int j = 0; j < b; ++j) {
            const double y = data.values[(static_cast<std::size_t>(h) * a + i) * b + j];
            ss_spe += squared(y - mha[static_cast<std::size_t>(h) * a + i] -
                              mab[static_cast<std::size_t>(i) * b + j] + ma[i]);
          }
        }
      }
      ss[spec.factors[0].name] = static_cast<double>(a) * b * ss_blk;
      ss[spec.factors[1].name] = static_cast<double>(r) * b * ss_a;
      ss["WholePlotError"] = static_cast<double>(b) * ss_wpe;
      ss[spec.factors[2].name] = static_cast<double>(r) * a * ss_b;
      ss[spec.interaction_name()] = static_cast<double>(r) * ss_ab;
      ss["SubplotError"] = ss_spe;
      break;
    }
  }

  double total = 0.0;
  for (double y : data.values) total += squared(y - g);

  AnovaTable table;
  table.total_ss = total;
  table.total_df = static_cast<int>(n_obs) - 1;
  auto ems = symbolic_ems(spec);
  for (const auto& src : sources) {
    AnovaRow row;
    row.source = src.name;
    row.df = src.df;
    row.ss = ss.at(src.name);
    row.ms = row.ss / src.df;
    row.ems = ems.at(src.name);
    table.rows.push_back(std::move(row));
  }
  return table;
}

void attach_tests(AnovaTable& table, const ModelSpec& spec) {
  for (const auto& src : source_table(spec)) {
    if (!src.denominator) continue;
    AnovaRow* num = table.find(src.name);
    const AnovaRow* den = table.find(*src.denominator);
    if (num == nullptr || den == nullptr) {
      throw std::invalid_argument("attach_tests: table does not match the model spec");
    }
    num->denominator = *src.denominator;
    if (den->ms > 0.0) {
      num->f = num->ms / den->ms;
      num->p_value = f_sf(*num->f, num->df, den->df);
    }
  }
}

std::map<std::string, double> expected_mean_squares(const ModelSpec& spec,
                                                    const ModelParams& params) {
  check_params(spec, params);
  const double s2 = params.sigma2;
  std::map<std::string, double> out;

  auto fixed_vec = [&](const std::string& term, std::size_t len) {
    if (const auto* v = params.effects(term)) return *v;
    return std::vector<double>(len, 0.0);
  };

  for (const auto& src : source_table(spec)) {
    double ems = s2;
    switch (spec.design) {
      case DesignKind::one_way: {
        const auto& fa = spec.factors[0];
        const double n = spec.replicates;
        if (src.role == SourceRole::factor_a) {
          if (fa.kind == EffectKind::random) {
            ems += n * params.variance(fa.name);
          } else {
            ems += n * detail::centered_ss(fixed_vec(fa.name, fa.levels)) / src.df;
          }
        }
        break;
      }
      case DesignKind::rcbd: {
        const auto& fa = spec.factors[0];
        const auto& fb = spec.factors[1];
        if (src.role == SourceRole::factor_a) {
          if (fa.kind == EffectKind::random) {
            ems += fb.levels * params.variance(fa.name);
          } else {
            ems += fb.levels * detail::centered_ss(fixed_vec(fa.name, fa.levels)) / src.df;
          }
        } else if (src.role == SourceRole::factor_b) {
          if (fb.kind == EffectKind::random) {
            ems += fa.levels * params.variance(fb.name);
          } else {
            ems += fa.levels * detail::centered_ss(fixed_vec(fb.name, fb.levels)) / src.df;
          }
        }
        break;
      }
      case DesignKind::two_way_interaction: {
        const auto& fa = spec.factors[0];
        const auto& fb = spec.factors[1];
        const int a = fa.levels, b = fb.levels, n = spec.replicates;
        const bool inter_random = *spec.interaction_kind == EffectKind::random;
        const std::string ab = spec.interaction_name();
        if (src.role == SourceRole::factor_a) {
          if (inter_random) ems += n * params.variance(ab);
          if (fa.kind == EffectKind::random) {
            ems += static_cast<double>(b) * n * params.variance(fa.name);
          } else {
            auto t = fixed_vec(fa.name, fa.levels);
            if (!inter_random) {
              t = detail::add_vectors(
                  t, detail::row_means(fixed_vec(ab, static_cast<std::size_t>(a) * b), a, b));
            }
            ems += static_cast<double>(b) * n * detail::centered_ss(t) / src.df;
          }
        } else if (src.role == SourceRole::factor_b) {
          if (inter_random) ems += n * params.variance(ab);
          if (fb.kind == EffectKind::random) {
            ems += static_cast<double>(a) * n * params.variance(fb.name);
          } else {
            auto t = fixed_vec(fb.name, fb.levels);
            if (!inter_random) {
              t = detail::add_vectors(
                  t, detail::col_means(fixed_vec(ab, static_cast<std::size_t>(a) * b), a, b));
            }
            ems += static_cast<double>(a) * n * detail::centered_ss(t) / src.df;
          }
        } else if (src.role == SourceRole::interaction) {
          if (inter_random) {
            ems += n * params.variance(ab);
          } else {
            ems += n *
                   detail::double_centered_ss(fixed_vec(ab, static_cast<std::size_t>(a) * b), a,
                                              b) /
                   src.df;
          }
        }
        break;
      }
      case DesignKind::split_plot: {
        const auto& fblk = spec.factors[0];
        const int r = fblk.levels;
        const int a = spec.factors[1].levels;
        const int b = spec.factors[2].levels;
        const std::string ab = spec.interaction_name();
        const auto ab_eff = fixed_vec(ab, static_cast<std::size_t>(a) * b);
        switch (src.role) {
          case SourceRole::blocks:
            ems += static_cast<double>(b) * params.variance(kWholePlotKey) +
                   static_cast<double>(a) * b * params.variance(fblk.name);
            break;
          case SourceRole::factor_a: {
            ems += static_cast<double>(b) * params.variance(kWholePlotKey);
            auto t = detail::add_vectors(fixed_vec(spec.factors[1].name, a),
                                         detail::row_means(ab_eff, a, b));
            ems += static_cast<double>(r) * b * detail::centered_ss(t) / src.df;
            break;
          }
          case SourceRole::whole_plot_error:
            ems += static_cast<double>(b) * params.variance(kWholePlotKey);
            break;
          case SourceRole::factor_b: {
            auto t = detail::add_vectors(fixed_vec(spec.factors[2].name, b),
                                         detail::col_means(ab_eff, a, b));
            ems += static_cast<double>(r) * a * detail::centered_ss(t) / src.df;
            break;
          }
          case SourceRole::interaction:
            ems += static_cast<double>(r) * detail::double_centered_ss(ab_eff, a, b) / src.df;
            break;
          default:
            break;
        }
        break;
      }
    }
    out[src.name] = ems;
  }
  return out;
}

std::vector<ComponentEstimate> estimate_components(const AnovaTable& table,
                                                   const ModelSpec& spec) {
  spec.validate();

  // Unknowns paired with their defining source; sigma^2 comes from the pure
  // error stratum.
  std::vector<std::pair<std::string, std::string>> unknowns;  // (term, source)
  const bool split = spec.design == DesignKind::split_plot;
  const std::string error_source = split ? "SubplotError" : "Error";
  bool has_error = false;
  for (const auto& src : source_table(spec)) {
    if (src.name == error_source) has_error = true;
  }
  if (!has_error) {
    throw ValidationError(
        "variance components are not estimable without replication (no pure error stratum)");
  }

  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    const auto& fac = spec.factors[f];
    if (fac.kind != EffectKind::random) continue;
    if (split && f == 0) {
      unknowns.emplace_back(fac.name, fac.name);  // blocks
    } else if (!split) {
      unknowns.emplace_back(fac.name, fac.name);
    }
  }
  if (spec.interaction_kind == EffectKind::random) {
    unknowns.emplace_back(spec.interaction_name(), spec.interaction_name());
  }
  if (split) unknowns.emplace_back(kWholePlotKey, "WholePlotError");
  unknowns.emplace_back("sigma^2", error_source);

  const std::size_t m = unknowns.size();

  // EMS coefficient of each unknown in each defining source's row.
  auto coef = [&](const std::string& source, const std::string& term) -> double {
    if (term == "sigma^2") return 1.0;
    const int a = spec.factors[0].levels;
    const int b = spec.factors.size() > 1 ? spec.factors[1].levels : 0;
    switch (spec.design) {
      case DesignKind::one_way:
        return source == spec.factors[0].name && term == spec.factors[0].name
                   ? static_cast<double>(spec.replicates)
                   : 0.0;
      case DesignKind::rcbd:
        if (source == spec.factors[0].name && term == spec.factors[0].name) return b;
        if (source == spec.factors[1].name && term == spec.factors[1].name) return a;
        return 0.0;
      case DesignKind::two_way_interaction: {
        const int n = spec.replicates;
        const std::string ab = spec.interaction_name();
        if (term == ab) {
          // A random interaction appears in its own row and both main rows.
          return (source == ab || source == spec.factors[0].name ||
                  source == spec.factors[1].name)
                     ? static_cast<double>(n)
                     : 0.0;
        }
        if (source == spec.factors[0].name && term == spec.factors[0].name) {
          return static_cast<double>(b) * n;
        }
        if (source == spec.factors[1].name && term == spec.factors[1].name) {
          return static_cast<double>(a) * n;
        }
        return 0.0;
      }
      case DesignKind::split_plot: {
        const int bb = spec.factors[2].levels;
        const int aa = spec.factors[1].levels;
        if (term == kWholePlotKey) {
          return (source == "WholePlotError" || source == spec.factors[0].name ||
                  source == spec.factors[1].name)
                     ? static_cast<double>(bb)
                     : 0.0;
        }
        if (term == spec.factors[0].name) {
          return source == spec.factors[0].name ? static_cast<double>(aa) * bb : 0.0;
        }
        return 0.0;
      }
    }
    return 0.0;
  };

  std::vector<std::vector<double>> mat(m, std::vector<double>(m + 1, 0.0));
  for (std::size_t i = 0; i < m; ++i) {
    const std::string& source = unknowns[i].second;
    for (std::size_t j = 0; j < m; ++j) mat[i][j] = coef(source, unknowns[j].first);
    mat[i][m] = table.row(source).ms;
  }

  // Gaussian elimination with partial pivoting; the system is tiny.
  for (std::size_t col = 0; col < m; ++col) {
    std::size_t piv = col;
    for (std::size_t r2 = col + 1; r2 < m; ++r2) {
      if (std::fabs(mat[r2][col]) > std::fabs(mat[piv][col])) piv = r2;
    }
    if (std::fabs(mat[piv][col]) < 1e-12) {
      throw std::logic_error("internal error: singular EMS system");
    }
    std::swap(mat[piv], mat[col]);
    for (std::size_t r2 = 0; r2 < m; ++r2) {
      if (r2 == col) continue;
      const double factor = mat[r2][col] / mat[col][col];
      for (std::size_t c2 = col; c2 <= m; ++c2) mat[r2][c2] -= factor * mat[col][c2];
    }
  }

  std::vector<ComponentEstimate> out;
  for (std::size_t i = 0; i < m; ++i) {
    ComponentEstimate est;
    est.term = unknowns[i].first;
    est.raw = mat[i][m] / mat[i][i];
    est.truncated = est.raw < 0.0;
    est.value = est.truncated ? 0.0 : est.raw;
    out.push_back(est);
  }
  return out;
}

std::map<std::string, double> power(const ModelSpec& spec, const ModelParams& params,
                                    double alpha) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw ValidationError("alpha must be in (0,1)");
  }
  std::map<std::string, double> out;
  for (const auto& fl : f_laws(spec, params)) {
    const double q = f_quantile(1.0 - alpha, fl.law.df_num, fl.law.df_den);
    out[fl.source] = 1.0 - fl.law.cdf(q);
  }
  return out;
}

}  // namespace vcanova
