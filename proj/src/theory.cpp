#include "vcanova/theory.hpp"

#include <stdexcept>

#include "effect_math.hpp"

namespace vcanova {

ScaledNoncentralChiSquare ConditionalLaw::mixing_law() const {
  if (!gamma1_random()) {
    throw std::logic_error("mixing_law: gamma1 is degenerate (c2 == 0)");
  }
  return ScaledNoncentralChiSquare(c2, df, gamma2);
}

ScaledNoncentralChiSquare ConditionalLaw::marginal() const {
  return compound(scale, df, c2, gamma2);
}

namespace {

std::vector<double> effects_or_zero(const ModelParams& params, const std::string& term,
                                    std::size_t len) {
  if (const auto* v = params.effects(term)) return *v;
  return std::vector<double>(len, 0.0);
}

}  // namespace

std::vector<ConditionalLaw> conditional_laws(const ModelSpec& spec, const ModelParams& params) {
  check_params(spec, params);
  const double s2 = params.sigma2;
  std::vector<ConditionalLaw> out;
  const auto sources = source_table(spec);

  switch (spec.design) {
    case DesignKind::one_way: {
      const auto& fa = spec.factors[0];
      const double n = spec.replicates;
      for (const auto& src : sources) {
        ConditionalLaw law{src.name, s2, src.df, 0.0, 0.0};
        if (src.role == SourceRole::factor_a) {
          if (fa.kind == EffectKind::fixed) {
            law.gamma2 = n * detail::centered_ss(
                                 effects_or_zero(params, fa.name, fa.levels));
          } else {
            law.c2 = n * params.variance(fa.name);
          }
        }
        out.push_back(law);
      }
      break;
    }
    case DesignKind::rcbd: {
      const auto& fa = spec.factors[0];
      const auto& fb = spec.factors[1];
      for (const auto& src : sources) {
        ConditionalLaw law{src.name, s2, src.df, 0.0, 0.0};
        if (src.role == SourceRole::factor_a) {
          if (fa.kind == EffectKind::fixed) {
            law.gamma2 = static_cast<double>(fb.levels) *
                         detail::centered_ss(effects_or_zero(params, fa.name, fa.levels));
          } else {
            law.c2 = static_cast<double>(fb.levels) * params.variance(fa.name);
          }
        } else if (src.role == SourceRole::factor_b) {
          if (fb.kind == EffectKind::fixed) {
            law.gamma2 = static_cast<double>(fa.levels) *
                         detail::centered_ss(effects_or_zero(params, fb.name, fb.levels));
          } else {
            law.c2 = static_cast<double>(fa.levels) * params.variance(fb.name);
          }
        }
        out.push_back(law);
      }
      break;
    }
    case DesignKind::two_way_interaction: {
      const auto& fa = spec.factors[0];
      const auto& fb = spec.factors[1];
      const int a = fa.levels, b = fb.levels, n = spec.replicates;
      const std::string ab = spec.interaction_name();
      const bool inter_fixed = *spec.interaction_kind == EffectKind::fixed;
      const auto ab_eff = inter_fixed
                              ? effects_or_zero(params, ab, static_cast<std::size_t>(a) * b)
                              : std::vector<double>();
      for (const auto& src : sources) {
        ConditionalLaw law{src.name, s2, src.df, 0.0, 0.0};
        if (src.role == SourceRole::factor_a) {
          // Level means of A shift by alpha_i plus the interaction row means.
          const double m = static_cast<double>(b) * n;
          if (fa.kind == EffectKind::fixed) {
            auto t = effects_or_zero(params, fa.name, fa.levels);
            if (inter_fixed) t = detail::add_vectors(t, detail::row_means(ab_eff, a, b));
            law.gamma2 = m * detail::centered_ss(t);
          } else {
            law.c2 += m * params.variance(fa.name);
          }
          if (!inter_fixed) law.c2 += n * params.variance(ab);
        } else if (src.role == SourceRole::factor_b) {
          const double m = static_cast<double>(a) * n;
          if (fb.kind == EffectKind::fixed) {
            auto t = effects_or_zero(params, fb.name, fb.levels);
            if (inter_fixed) t = detail::add_vectors(t, detail::col_means(ab_eff, a, b));
            law.gamma2 = m * detail::centered_ss(t);
          } else {
            law.c2 += m * params.variance(fb.name);
          }
          if (!inter_fixed) law.c2 += n * params.variance(ab);
        } else if (src.role == SourceRole::interaction) {
          if (inter_fixed) {
            law.gamma2 = n * detail::double_centered_ss(ab_eff, a, b);
          } else {
            law.c2 = n * params.variance(ab);
          }
        }
        out.push_back(law);
      }
      break;
    }
    case DesignKind::split_plot: {
      const auto& fblk = spec.factors[0];
      const auto& fa = spec.factors[1];
      const auto& fb = spec.factors[2];
      const int r = fblk.levels, a = fa.levels, b = fb.levels;
      const std::string ab = spec.interaction_name();
      const auto ab_eff = effects_or_zero(params, ab, static_cast<std::size_t>(a) * b);
      const double v_blk = params.variance(fblk.name);
      const double v_wp = params.variance(kWholePlotKey);
      for (const auto& src : sources) {
        ConditionalLaw law{src.name, s2, src.df, 0.0, 0.0};
        switch (src.role) {
          case SourceRole::blocks:
            // Block means carry the block effect plus the average of the a
            // whole-plot errors in the block.
            law.c2 = static_cast<double>(a) * b * v_blk + static_cast<double>(b) * v_wp;
            break;
          case SourceRole::factor_a: {
            // Whole-plot treatment means average r whole-plot errors; fixed A
            // and interaction row means shift them, so gamma2 > 0 here.
            const double m = static_cast<double>(r) * b;
            auto t = detail::add_vectors(effects_or_zero(params, fa.name, fa.levels),
                                          detail::row_means(ab_eff, a, b));
            law.gamma2 = m * detail::centered_ss(t);
            law.c2 = static_cast<double>(b) * v_wp;
            break;
          }
          case SourceRole::whole_plot_error:
            law.c2 = static_cast<double>(b) * v_wp;
            break;
          case SourceRole::factor_b: {
            const double m = static_cast<double>(r) * a;
            auto t = detail::add_vectors(effects_or_zero(params, fb.name, fb.levels),
                                          detail::col_means(ab_eff, a, b));
            law.gamma2 = m * detail::centered_ss(t);
            break;
          }
          case SourceRole::interaction:
            law.gamma2 = static_cast<double>(r) * detail::double_centered_ss(ab_eff, a, b);
            break;
          case SourceRole::subplot_error:
          case SourceRole::error:
            break;
        }
        out.push_back(law);
      }
      break;
    }
  }
  return out;
}

const ScaledNoncentralChiSquare& SsLawSet::law(const std::string& source) const {
  for (const auto& [name, l] : laws) {
    if (name == source) return l;
  }
  throw std::invalid_argument("SsLawSet: no law for source \"" + source + "\"");
}

SsLawSet ss_laws(const ModelSpec& spec, const ModelParams& params) {
  SsLawSet out;
  for (const auto& cond : conditional_laws(spec, params)) {
    out.laws.emplace_back(cond.source, cond.marginal());
  }
  return out;
}

std::vector<FLaw> f_laws(const ModelSpec& spec, const ModelParams& params) {
  const auto laws = ss_laws(spec, params);
  std::vector<FLaw> out;
  for (const auto& src : source_table(spec)) {
    if (!src.denominator) continue;
    const auto& num = laws.law(src.name);
    const auto& den = laws.law(*src.denominator);
    if (den.noncentrality != 0.0) {
      throw std::logic_error("f_laws: noncentral denominator for source \"" + src.name + "\"");
    }
    out.push_back({src.name, *src.denominator,
                   ScaledF(num.scale / den.scale, num.df, den.df, num.lambda())});
  }
  return out;
}

}  // namespace vcanova
