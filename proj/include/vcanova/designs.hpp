#ifndef VCANOVA_DESIGNS_HPP
#define VCANOVA_DESIGNS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vcanova {

// Raised for anything a caller can fix: malformed input, unbalanced data,
// parameter/spec mismatches, unsupported kind combinations.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EffectKind { fixed, random };
enum class DesignKind { one_way, rcbd, two_way_interaction, split_plot };

struct Factor {
  std::string name;
  int levels = 0;
  EffectKind kind = EffectKind::fixed;
};

// Reserved name for the split-plot whole-plot error variance component.
inline constexpr const char* kWholePlotKey = "WholePlot";

struct ModelSpec {
  DesignKind design = DesignKind::one_way;
  // one_way: {A}; rcbd/two_way_interaction: {A, B};
  // split_plot: {block, whole-plot A, subplot B}.
  std::vector<Factor> factors;
  int replicates = 1;  // exactly 1 for rcbd and split_plot
  std::optional<EffectKind> interaction_kind;  // two_way_interaction / split_plot only

  void validate() const;

  std::string interaction_name() const;  // crossed treatment factors, "A:B"
  std::size_t cell_count() const;
  std::size_t observation_count() const;
};

struct ModelParams {
  double mu = 0.0;
  double sigma2 = 1.0;
  // Keyed by factor name or interaction name ("A:B"); vectors are
  // level-ordered (interactions row-major over the two factors).
  std::map<std::string, std::vector<double>> fixed_effects;
  // Keyed by random factor / interaction name, plus kWholePlotKey for the
  // split-plot whole-plot error variance.
  std::map<std::string, double> variance_components;

  const std::vector<double>* effects(const std::string& term) const;
  double variance(const std::string& term) const;  // 0 when absent
};

// Rejects params inconsistent with the model: wrong-length effect vectors,
// negative variances, keys that name no term of the model.
void check_params(const ModelSpec& spec, const ModelParams& params);

// One long-format observation: a label per factor (spec order) plus the
// response.
struct Record {
  std::vector<std::string> labels;
  double y = 0.0;
};

struct BalancedDataset {
  ModelSpec spec;
  std::vector<std::vector<std::string>> level_labels;  // first-appearance order
  std::vector<double> values;  // dense, replicate index fastest

  std::size_t index_of(const std::vector<int>& levels, int replicate) const;
};

// Checks completeness and builds the dense array. Errors name the first
// offending cell or label.
BalancedDataset validate(const ModelSpec& spec, const std::vector<Record>& records);

struct MeanArray {
  std::vector<int> margin;  // factor indices, ascending
  std::vector<int> shape;   // levels of the margin factors
  std::vector<double> means;
};

// Means over every index (including replicates) not in the margin; the empty
// margin gives the grand mean.
MeanArray cell_means(const BalancedDataset& data, const std::vector<int>& margin);
MeanArray cell_means(const BalancedDataset& data, const std::vector<std::string>& margin_names);
double grand_mean(const BalancedDataset& data);

enum class SourceRole {
  factor_a,
  factor_b,
  blocks,
  interaction,
  error,
  whole_plot_error,
  subplot_error,
};

// One ANOVA source: display name, df, and the F denominator assigned by
// expected-mean-square matching (empty when the source is not tested).
struct SourceInfo {
  std::string name;
  SourceRole role;
  int df;
  std::optional<std::string> denominator;
};

// The decomposition layout for a design. Designs with replicates == 1 and no
// blocking have no pure-error row (its df would be zero).
std::vector<SourceInfo> source_table(const ModelSpec& spec);

}  // namespace vcanova

#endif
