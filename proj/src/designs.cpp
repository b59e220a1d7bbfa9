#include "vcanova/designs.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <unordered_map>

namespace vcanova {

namespace {

const std::set<std::string> kReservedNames = {
    "y", "Error", "WholePlotError", "SubplotError", kWholePlotKey, "Total"};

void check_factor(const Factor& f) {
  if (f.name.empty()) throw ValidationError("factor name must not be empty");
  if (f.name.find_first_of(":,=\n\r") != std::string::npos) {
    throw ValidationError("factor name \"" + f.name + "\" contains a reserved character");
  }
  if (kReservedNames.count(f.name)) {
    throw ValidationError("factor name \"" + f.name + "\" is reserved");
  }
  if (f.levels < 2) {
    throw ValidationError("factor \"" + f.name + "\" must have at least 2 levels");
  }
}

std::string cell_description(const ModelSpec& spec,
                             const std::vector<std::vector<std::string>>& labels,
                             const std::vector<int>& levels) {
  std::ostringstream os;
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    if (f) os << ",";
    os << spec.factors[f].name << "=" << labels[f][levels[f]];
  }
  return os.str();
}

}  // namespace

void ModelSpec::validate() const {
  std::size_t expected_factors = 0;
  switch (design) {
    case DesignKind::one_way:
      expected_factors = 1;
      break;
    case DesignKind::rcbd:
    case DesignKind::two_way_interaction:
      expected_factors = 2;
      break;
    case DesignKind::split_plot:
      expected_factors = 3;
      break;
  }
  if (factors.size() != expected_factors) {
    throw ValidationError("design expects " + std::to_string(expected_factors) +
                          " factor(s), got " + std::to_string(factors.size()));
  }
  std::set<std::string> names;
  for (const auto& f : factors) {
    check_factor(f);
    if (!names.insert(f.name).second) {
      throw ValidationError("duplicate factor name \"" + f.name + "\"");
    }
  }
  if (replicates < 1) throw ValidationError("replicates must be >= 1");
  if (design == DesignKind::rcbd && replicates != 1) {
    throw ValidationError("rcbd has one observation per cell; replicates must be 1");
  }
  if (design == DesignKind::split_plot && replicates != 1) {
    throw ValidationError(
        "split_plot has one observation per (block, whole-plot, subplot) cell; "
        "replicates must be 1 (the block count provides replication)");
  }

  const bool wants_interaction =
      design == DesignKind::two_way_interaction || design == DesignKind::split_plot;
  if (wants_interaction && !interaction_kind.has_value()) {
    throw ValidationError("interaction_kind is required for this design");
  }
  if (!wants_interaction && interaction_kind.has_value()) {
    throw ValidationError("interaction_kind is only valid for two_way_interaction and split_plot");
  }

  if (design == DesignKind::two_way_interaction) {
    const bool any_random_parent =
        factors[0].kind == EffectKind::random || factors[1].kind == EffectKind::random;
    if (interaction_kind == EffectKind::random && !any_random_parent) {
      throw ValidationError(
          "unsupported: a random interaction requires at least one random parent factor");
    }
    if (interaction_kind == EffectKind::fixed && any_random_parent) {
      throw ValidationError(
          "unsupported: a fixed interaction requires both parent factors fixed");
    }
  }
  if (design == DesignKind::split_plot) {
    if (factors[0].kind != EffectKind::random) {
      throw ValidationError("split_plot blocks (first factor) must be random");
    }
    if (interaction_kind == EffectKind::random) {
      throw ValidationError(
          "unsupported: split_plot with a random interaction has no exact F denominator "
          "for the subplot factor; only a fixed interaction is supported");
    }
    if (factors[1].kind != EffectKind::fixed || factors[2].kind != EffectKind::fixed) {
      throw ValidationError(
          "unsupported: split_plot treatment factors must be fixed (blocks and the "
          "whole-plot error stratum carry the random variation)");
    }
  }
}

std::string ModelSpec::interaction_name() const {
  if (design == DesignKind::two_way_interaction) {
    return factors[0].name + ":" + factors[1].name;
  }
  if (design == DesignKind::split_plot) {
    return factors[1].name + ":" + factors[2].name;
  }
  throw std::logic_error("interaction_name: design has no interaction term");
}

std::size_t ModelSpec::cell_count() const {
  std::size_t n = 1;
  for (const auto& f : factors) n *= static_cast<std::size_t>(f.levels);
  return n;
}

std::size_t ModelSpec::observation_count() const {
  return cell_count() * static_cast<std::size_t>(replicates);
}

const std::vector<double>* ModelParams::effects(const std::string& term) const {
  auto it = fixed_effects.find(term);
  return it == fixed_effects.end() ? nullptr : &it->second;
}

double ModelParams::variance(const std::string& term) const {
  auto it = variance_components.find(term);
  return it == variance_components.end() ? 0.0 : it->second;
}

void check_params(const ModelSpec& spec, const ModelParams& params) {
  spec.validate();
  if (!std::isfinite(params.mu)) throw ValidationError("mu must be finite");
  if (!(params.sigma2 > 0.0) || !std::isfinite(params.sigma2)) {
    throw ValidationError("sigma2 must be a positive finite value");
  }

  std::map<std::string, std::size_t> fixed_terms;   // term -> expected length
  std::set<std::string> random_terms;
  for (const auto& f : spec.factors) {
    if (f.kind == EffectKind::fixed) {
      fixed_terms[f.name] = static_cast<std::size_t>(f.levels);
    } else {
      random_terms.insert(f.name);
    }
  }
  if (spec.interaction_kind.has_value()) {
    const std::size_t a = spec.design == DesignKind::split_plot
                              ? static_cast<std::size_t>(spec.factors[1].levels)
                              : static_cast<std::size_t>(spec.factors[0].levels);
    const std::size_t b = spec.design == DesignKind::split_plot
                              ? static_cast<std::size_t>(spec.factors[2].levels)
                              : static_cast<std::size_t>(spec.factors[1].levels);
    if (*spec.interaction_kind == EffectKind::fixed) {
      fixed_terms[spec.interaction_name()] = a * b;
    } else {
      random_terms.insert(spec.interaction_name());
    }
  }
  if (spec.design == DesignKind::split_plot) random_terms.insert(kWholePlotKey);

  for (const auto& [term, values] : params.fixed_effects) {
    auto it = fixed_terms.find(term);
    if (it == fixed_terms.end()) {
      throw ValidationError("\"" + term + "\" is not a fixed term of this model");
    }
    if (values.size() != it->second) {
      throw ValidationError("effects for \"" + term + "\" must have " +
                            std::to_string(it->second) + " values, got " +
                            std::to_string(values.size()));
    }
    for (double v : values) {
      if (!std::isfinite(v)) throw ValidationError("effects for \"" + term + "\" must be finite");
    }
  }
  for (const auto& [term, value] : params.variance_components) {
    if (!random_terms.count(term)) {
      throw ValidationError("\"" + term + "\" is not a random term of this model");
    }
    if (!(value >= 0.0) || !std::isfinite(value)) {
      throw ValidationError("variance component \"" + term + "\" must be >= 0");
    }
  }
}

std::size_t BalancedDataset::index_of(const std::vector<int>& levels, int replicate) const {
  std::size_t idx = 0;
  for (std::size_t f = 0; f < spec.factors.size(); ++f) {
    idx = idx * static_cast<std::size_t>(spec.factors[f].levels) +
          static_cast<std::size_t>(levels[f]);
  }
  return idx * static_cast<std::size_t>(spec.replicates) + static_cast<std::size_t>(replicate);
}

BalancedDataset validate(const ModelSpec& spec, const std::vector<Record>& records) {
  spec.validate();
  const std::size_t nf = spec.factors.size();

  BalancedDataset data;
  data.spec = spec;
  data.level_labels.resize(nf);
  std::vector<std::unordered_map<std::string, int>> label_index(nf);

  // First pass: assign dense level indices in first-appearance order.
  for (const auto& rec : records) {
    if (rec.labels.size() != nf) {
      throw ValidationError("record has " + std::to_string(rec.labels.size()) +
                            " factor labels, expected " + std::to_string(nf));
    }
    if (!std::isfinite(rec.y)) {
      throw ValidationError("non-numeric response value");
    }
    for (std::size_t f = 0; f < nf; ++f) {
      auto& idx = label_index[f];
      const std::string& label = rec.labels[f];
      if (idx.find(label) == idx.end()) {
        if (static_cast<int>(idx.size()) == spec.factors[f].levels) {
          throw ValidationError("unknown level \"" + label + "\" for factor \"" +
                                spec.factors[f].name + "\" (declared levels: " +
                                std::to_string(spec.factors[f].levels) + ")");
        }
        const int next = static_cast<int>(idx.size());
        idx.emplace(label, next);
        data.level_labels[f].push_back(label);
      }
    }
  }
  for (std::size_t f = 0; f < nf; ++f) {
    if (static_cast<int>(data.level_labels[f].size()) < spec.factors[f].levels) {
      throw ValidationError("unbalanced: factor \"" + spec.factors[f].name + "\" has " +
                            std::to_string(data.level_labels[f].size()) + " of " +
                            std::to_string(spec.factors[f].levels) + " levels");
    }
  }

  // Second pass: fill cells and count replicates.
  const std::size_t cells = spec.cell_count();
  std::vector<int> counts(cells, 0);
  data.values.assign(spec.observation_count(), 0.0);
  std::vector<int> levels(nf);
  for (const auto& rec : records) {
    std::size_t cell = 0;
    for (std::size_t f = 0; f < nf; ++f) {
      levels[f] = label_index[f].at(rec.labels[f]);
      cell = cell * static_cast<std::size_t>(spec.factors[f].levels) +
             static_cast<std::size_t>(levels[f]);
    }
    const int k = counts[cell]++;
    if (k >= spec.replicates) {
      throw ValidationError("duplicate: cell " + cell_description(spec, data.level_labels, levels) +
                            " has more than " + std::to_string(spec.replicates) +
                            " replicate(s)");
    }
    data.values[cell * static_cast<std::size_t>(spec.replicates) + static_cast<std::size_t>(k)] =
        rec.y;
  }
  for (std::size_t cell = 0; cell < cells; ++cell) {
    if (counts[cell] < spec.replicates) {
      std::size_t rem = cell;
      for (std::size_t f = nf; f-- > 0;) {
        levels[f] = static_cast<int>(rem % static_cast<std::size_t>(spec.factors[f].levels));
        rem /= static_cast<std::size_t>(spec.factors[f].levels);
      }
      throw ValidationError("unbalanced: cell " + cell_description(spec, data.level_labels, levels) +
                            " has " + std::to_string(counts[cell]) + " of " +
                            std::to_string(spec.replicates) + " replicates");
    }
  }
  return data;
}

MeanArray cell_means(const BalancedDataset& data, const std::vector<int>& margin) {
  const std::size_t nf = data.spec.factors.size();
  MeanArray out;
  out.margin = margin;
  std::sort(out.margin.begin(), out.margin.end());
  for (std::size_t i = 0; i < out.margin.size(); ++i) {
    const int f = out.margin[i];
    if (f < 0 || f >= static_cast<int>(nf)) {
      throw ValidationError("unknown factor index in margin");
    }
    if (i > 0 && out.margin[i] == out.margin[i - 1]) {
      throw ValidationError("duplicate factor in margin");
    }
    out.shape.push_back(data.spec.factors[f].levels);
  }
  std::size_t bins = 1;
  for (int s : out.shape) bins *= static_cast<std::size_t>(s);
  out.means.assign(bins, 0.0);

  std::vector<int> levels(nf, 0);
  std::size_t flat = 0;
  const std::size_t n_obs = data.values.size();
  const std::size_t reps = static_cast<std::size_t>(data.spec.replicates);
  while (flat < n_obs) {
    // All replicates of one cell are contiguous.
    double cell_sum = 0.0;
    for (std::size_t k = 0; k < reps; ++k) cell_sum += data.values[flat + k];
    std::size_t bin = 0;
    for (std::size_t i = 0; i < out.margin.size(); ++i) {
      bin = bin * static_cast<std::size_t>(out.shape[i]) +
            static_cast<std::size_t>(levels[out.margin[i]]);
    }
    out.means[bin] += cell_sum;
    flat += reps;
    for (std::size_t f = nf; f-- > 0;) {
      if (++levels[f] < data.spec.factors[f].levels) break;
      levels[f] = 0;
    }
  }
  const double per_bin = static_cast<double>(n_obs) / static_cast<double>(bins);
  for (auto& m : out.means) m /= per_bin;
  return out;
}

MeanArray cell_means(const BalancedDataset& data, const std::vector<std::string>& margin_names) {
  std::vector<int> margin;
  for (const auto& name : margin_names) {
    bool found = false;
    for (std::size_t f = 0; f < data.spec.factors.size(); ++f) {
      if (data.spec.factors[f].name == name) {
        margin.push_back(static_cast<int>(f));
        found = true;
        break;
      }
    }
    if (!found) throw ValidationError("unknown factor \"" + name + "\" in margin");
  }
  return cell_means(data, margin);
}

double grand_mean(const BalancedDataset& data) {
  return cell_means(data, std::vector<int>{}).means.at(0);
}

std::vector<SourceInfo> source_table(const ModelSpec& spec) {
  spec.validate();
  std::vector<SourceInfo> out;
  switch (spec.design) {
    case DesignKind::one_way: {
      const int a = spec.factors[0].levels;
      const int n = spec.replicates;
      if (n > 1) {
        out.push_back({spec.factors[0].name, SourceRole::factor_a, a - 1, "Error"});
        out.push_back({"Error", SourceRole::error, a * (n - 1), std::nullopt});
      } else {
        out.push_back({spec.factors[0].name, SourceRole::factor_a, a - 1, std::nullopt});
      }
      break;
    }
    case DesignKind::rcbd: {
      const int a = spec.factors[0].levels;
      const int b = spec.factors[1].levels;
      out.push_back({spec.factors[0].name, SourceRole::factor_a, a - 1, "Error"});
      out.push_back({spec.factors[1].name, SourceRole::factor_b, b - 1, "Error"});
      out.push_back({"Error", SourceRole::error, (a - 1) * (b - 1), std::nullopt});
      break;
    }
    case DesignKind::two_way_interaction: {
      const int a = spec.factors[0].levels;
      const int b = spec.factors[1].levels;
      const int n = spec.replicates;
      const bool random_inter = *spec.interaction_kind == EffectKind::random;
      const bool has_error = n > 1;
      const std::string ab = spec.interaction_name();
      std::optional<std::string> main_den;
      if (random_inter) {
        main_den = ab;
      } else if (has_error) {
        main_den = "Error";
      }
      out.push_back({spec.factors[0].name, SourceRole::factor_a, a - 1, main_den});
      out.push_back({spec.factors[1].name, SourceRole::factor_b, b - 1, main_den});
      out.push_back({ab, SourceRole::interaction, (a - 1) * (b - 1),
                     has_error ? std::optional<std::string>("Error") : std::nullopt});
      if (has_error) {
        out.push_back({"Error", SourceRole::error, a * b * (n - 1), std::nullopt});
      }
      break;
    }
    case DesignKind::split_plot: {
      const int r = spec.factors[0].levels;
      const int a = spec.factors[1].levels;
      const int b = spec.factors[2].levels;
      out.push_back({spec.factors[0].name, SourceRole::blocks, r - 1, "WholePlotError"});
      out.push_back({spec.factors[1].name, SourceRole::factor_a, a - 1, "WholePlotError"});
      out.push_back({"WholePlotError", SourceRole::whole_plot_error, (r - 1) * (a - 1),
                     std::nullopt});
      out.push_back({spec.factors[2].name, SourceRole::factor_b, b - 1, "SubplotError"});
      out.push_back({spec.interaction_name(), SourceRole::interaction, (a - 1) * (b - 1),
                     "SubplotError"});
      out.push_back({"SubplotError", SourceRole::subplot_error, a * (r - 1) * (b - 1),
                     std::nullopt});
      break;
    }
  }
  return out;
}

}  // namespace vcanova
