#ifndef VCANOVA_IO_HPP
#define VCANOVA_IO_HPP

#include <string>
#include <vector>

#include "vcanova/anova.hpp"
#include "vcanova/designs.hpp"
#include "vcanova/simulation.hpp"

namespace vcanova {

enum class OutputFormat { text, csv, json };
OutputFormat parse_format(const std::string& name);  // "text" | "csv" | "json"

// CSV interchange: comma-separated, header row, one column per factor plus a
// numeric response column named "y", UTF-8, '.' decimal separator.
std::vector<Record> parse_csv_records(const ModelSpec& spec, const std::string& csv_text);
std::string write_csv(const BalancedDataset& data);

// Model file: {"design": ..., "factors": [{"name","levels","kind"}, ...],
// "replicates": n, "interaction": "fixed"|"random"}; unknown fields rejected.
ModelSpec model_from_json(const std::string& text);
std::string model_to_json(const ModelSpec& spec);

std::string render_table(const AnovaTable& table, const ModelSpec& spec, OutputFormat format);

std::string laws_to_json(const SsLawSet& laws);
std::string report_to_json(const SimReport& report);
std::string report_summary(const SimReport& report);

}  // namespace vcanova

#endif
