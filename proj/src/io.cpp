#include "vcanova/io.hpp"

#include <charconv>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace vcanova {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  for (char c : line) {
    if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

std::string design_name(DesignKind d) {
  switch (d) {
    case DesignKind::one_way:
      return "one_way";
    case DesignKind::rcbd:
      return "rcbd";
    case DesignKind::two_way_interaction:
      return "two_way_interaction";
    case DesignKind::split_plot:
      return "split_plot";
  }
  return "";
}

DesignKind design_from_name(const std::string& name) {
  if (name == "one_way") return DesignKind::one_way;
  if (name == "rcbd") return DesignKind::rcbd;
  if (name == "two_way_interaction") return DesignKind::two_way_interaction;
  if (name == "split_plot") return DesignKind::split_plot;
  throw ValidationError("unknown design \"" + name + "\"");
}

std::string kind_name(EffectKind k) {
  return k == EffectKind::fixed ? "fixed" : "random";
}

EffectKind kind_from_name(const std::string& name) {
  if (name == "fixed") return EffectKind::fixed;
  if (name == "random") return EffectKind::random;
  throw ValidationError("effect kind must be \"fixed\" or \"random\", got \"" + name + "\"");
}

ordered_json model_json_obj(const ModelSpec& spec) {
  ordered_json j;
  j["design"] = design_name(spec.design);
  j["factors"] = ordered_json::array();
  for (const auto& f : spec.factors) {
    ordered_json jf;
    jf["name"] = f.name;
    jf["levels"] = f.levels;
    jf["kind"] = kind_name(f.kind);
    j["factors"].push_back(jf);
  }
  j["replicates"] = spec.replicates;
  if (spec.interaction_kind.has_value()) {
    j["interaction"] = kind_name(*spec.interaction_kind);
  }
  return j;
}

ordered_json law_json(const ScaledNoncentralChiSquare& law) {
  return ordered_json{{"scale", law.scale}, {"df", law.df}, {"noncentrality", law.noncentrality}};
}

ordered_json params_json(const ModelParams& params) {
  ordered_json j;
  j["mu"] = params.mu;
  j["sigma2"] = params.sigma2;
  j["fixed_effects"] = ordered_json::object();
  for (const auto& [term, values] : params.fixed_effects) j["fixed_effects"][term] = values;
  j["variance_components"] = ordered_json::object();
  for (const auto& [term, value] : params.variance_components) {
    j["variance_components"][term] = value;
  }
  return j;
}

std::string fmt(double v, int precision = 6) {
  if (!std::isfinite(v)) return "inf";
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

OutputFormat parse_format(const std::string& name) {
  if (name == "text") return OutputFormat::text;
  if (name == "csv") return OutputFormat::csv;
  if (name == "json") return OutputFormat::json;
  throw ValidationError("unknown output format \"" + name + "\" (expected text, csv or json)");
}

std::vector<Record> parse_csv_records(const ModelSpec& spec, const std::string& csv_text) {
  spec.validate();
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("empty CSV input");
  const auto header = split_line(line);

  const std::size_t nf = spec.factors.size();
  std::vector<int> factor_column(nf, -1);
  int y_column = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& name = header[c];
    if (name == "y") {
      if (y_column >= 0) throw ValidationError("duplicate column \"y\"");
      y_column = static_cast<int>(c);
      continue;
    }
    bool matched = false;
    for (std::size_t f = 0; f < nf; ++f) {
      if (spec.factors[f].name == name) {
        if (factor_column[f] >= 0) throw ValidationError("duplicate column \"" + name + "\"");
        factor_column[f] = static_cast<int>(c);
        matched = true;
        break;
      }
    }
    if (!matched) throw ValidationError("unexpected column \"" + name + "\"");
  }
  if (y_column < 0) throw ValidationError("missing response column \"y\"");
  for (std::size_t f = 0; f < nf; ++f) {
    if (factor_column[f] < 0) {
      throw ValidationError("missing column for factor \"" + spec.factors[f].name + "\"");
    }
  }

  std::vector<Record> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size()) {
      throw ValidationError("line " + std::to_string(line_no) + " has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(header.size()));
    }
    Record rec;
    rec.labels.resize(nf);
    for (std::size_t f = 0; f < nf; ++f) rec.labels[f] = fields[factor_column[f]];
    const std::string& ytext = fields[y_column];
    const char* begin = ytext.data();
    const char* end = begin + ytext.size();
    auto [ptr, ec] = std::from_chars(begin, end, rec.y);
    if (ec != std::errc() || ptr != end) {
      throw ValidationError("non-numeric response \"" + ytext + "\" at line " +
                            std::to_string(line_no));
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::string write_csv(const BalancedDataset& data) {
  std::ostringstream os;
  const std::size_t nf = data.spec.factors.size();
  for (std::size_t f = 0; f < nf; ++f) os << data.spec.factors[f].name << ",";
  os << "y\n";

  std::vector<int> levels(nf, 0);
  const std::size_t reps = static_cast<std::size_t>(data.spec.replicates);
  for (std::size_t flat = 0; flat < data.values.size(); flat += reps) {
    for (std::size_t k = 0; k < reps; ++k) {
      for (std::size_t f = 0; f < nf; ++f) os << data.level_labels[f][levels[f]] << ",";
      os << format_double(data.values[flat + k]) << "\n";
    }
    for (std::size_t f = nf; f-- > 0;) {
      if (++levels[f] < data.spec.factors[f].levels) break;
      levels[f] = 0;
    }
  }
  return os.str();
}

ModelSpec model_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ValidationError("model file must be a JSON object");

  ModelSpec spec;
  bool saw_design = false, saw_factors = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "design") {
      if (!value.is_string()) throw ValidationError("\"design\" must be a string");
      spec.design = design_from_name(value.get<std::string>());
      saw_design = true;
    } else if (key == "factors") {
      if (!value.is_array()) throw ValidationError("\"factors\" must be an array");
      for (const auto& jf : value) {
        if (!jf.is_object()) throw ValidationError("each factor must be an object");
        Factor f;
        bool saw_name = false, saw_levels = false, saw_kind = false;
        for (const auto& [fkey, fvalue] : jf.items()) {
          if (fkey == "name") {
            if (!fvalue.is_string()) throw ValidationError("factor \"name\" must be a string");
            f.name = fvalue.get<std::string>();
            saw_name = true;
          } else if (fkey == "levels") {
            if (!fvalue.is_number_integer()) {
              throw ValidationError("factor \"levels\" must be an integer");
            }
            f.levels = fvalue.get<int>();
            saw_levels = true;
          } else if (fkey == "kind") {
            if (!fvalue.is_string()) throw ValidationError("factor \"kind\" must be a string");
            f.kind = kind_from_name(fvalue.get<std::string>());
            saw_kind = true;
          } else {
            throw ValidationError("unknown factor field \"" + fkey + "\"");
          }
        }
        if (!saw_name || !saw_levels || !saw_kind) {
          throw ValidationError("each factor needs \"name\", \"levels\" and \"kind\"");
        }
        spec.factors.push_back(std::move(f));
      }
      saw_factors = true;
    } else if (key == "replicates") {
      if (!value.is_number_integer()) throw ValidationError("\"replicates\" must be an integer");
      spec.replicates = value.get<int>();
    } else if (key == "interaction") {
      if (!value.is_string()) throw ValidationError("\"interaction\" must be a string");
      spec.interaction_kind = kind_from_name(value.get<std::string>());
    } else {
      throw ValidationError("unknown model field \"" + key + "\"");
    }
  }
  if (!saw_design) throw ValidationError("model file is missing \"design\"");
  if (!saw_factors) throw ValidationError("model file is missing \"factors\"");
  spec.validate();
  return spec;
}

std::string model_to_json(const ModelSpec& spec) {
  return model_json_obj(spec).dump(2) + "\n";
}

std::string render_table(const AnovaTable& table, const ModelSpec& spec, OutputFormat format) {
  // Variance-component estimates are included when the model has random terms
  // and a pure error stratum exists.
  std::vector<ComponentEstimate> estimates;
  bool have_estimates = false;
  const bool any_random = [&] {
    for (const auto& f : spec.factors) {
      if (f.kind == EffectKind::random) return true;
    }
    return spec.interaction_kind == EffectKind::random;
  }();
  if (any_random) {
    try {
      estimates = estimate_components(table, spec);
      have_estimates = true;
    } catch (const ValidationError&) {
      // Not estimable (no replication); the table is still rendered.
    }
  }

  if (format == OutputFormat::json) {
    ordered_json j;
    j["rows"] = ordered_json::array();
    for (const auto& r : table.rows) {
      ordered_json jr;
      jr["source"] = r.source;
      jr["df"] = r.df;
      jr["ss"] = r.ss;
      jr["ms"] = r.ms;
      jr["ems"] = r.ems.str();
      jr["f"] = r.f ? ordered_json(*r.f) : ordered_json(nullptr);
      jr["denominator"] = r.denominator ? ordered_json(*r.denominator) : ordered_json(nullptr);
      jr["p"] = r.p_value ? ordered_json(*r.p_value) : ordered_json(nullptr);
      j["rows"].push_back(jr);
    }
    j["total"] = ordered_json{{"df", table.total_df}, {"ss", table.total_ss}};
    if (have_estimates) {
      j["variance_component_estimates"] = ordered_json::array();
      for (const auto& e : estimates) {
        j["variance_component_estimates"].push_back(ordered_json{
            {"term", e.term}, {"raw", e.raw}, {"estimate", e.value}, {"truncated", e.truncated}});
      }
    }
    return j.dump(2) + "\n";
  }

  if (format == OutputFormat::csv) {
    std::ostringstream os;
    os << "source,df,ss,ms,ems,f,denominator,p\n";
    for (const auto& r : table.rows) {
      os << r.source << "," << r.df << "," << format_double(r.ss) << "," << format_double(r.ms)
         << "," << r.ems.str() << "," << (r.f ? format_double(*r.f) : "") << ","
         << (r.denominator ? *r.denominator : "") << ","
         << (r.p_value ? format_double(*r.p_value) : "") << "\n";
    }
    os << "Total," << table.total_df << "," << format_double(table.total_ss) << ",,,,,\n";
    return os.str();
  }

  // Plain text.
  std::vector<std::vector<std::string>> cells;
  cells.push_back({"Source", "Df", "SS", "MS", "EMS", "F", "Denominator", "p"});
  for (const auto& r : table.rows) {
    cells.push_back({r.source, std::to_string(r.df), fmt(r.ss), fmt(r.ms), r.ems.str(),
                     r.f ? fmt(*r.f) : "", r.denominator ? *r.denominator : "",
                     r.p_value ? fmt(*r.p_value, 4) : ""});
  }
  cells.push_back({"Total", std::to_string(table.total_df), fmt(table.total_ss), "", "", "", "",
                   ""});
  std::vector<std::size_t> width(cells[0].size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      os << row[c];
      if (c + 1 < row.size()) os << std::string(width[c] - row[c].size() + 2, ' ');
    }
    os << "\n";
  }
  if (have_estimates) {
    os << "\nVariance component estimates (method of moments):\n";
    for (const auto& e : estimates) {
      os << "  " << e.term << " = " << fmt(e.value);
      if (e.truncated) os << "  (raw " << fmt(e.raw) << ", truncated at 0)";
      os << "\n";
    }
  }
  return os.str();
}

std::string laws_to_json(const SsLawSet& laws) {
  ordered_json j;
  j["independent"] = laws.independent;
  j["sources"] = ordered_json::array();
  for (const auto& [name, law] : laws.laws) {
    ordered_json jl = law_json(law);
    jl["source"] = name;
    j["sources"].push_back(jl);
  }
  return j.dump(2) + "\n";
}

std::string report_to_json(const SimReport& report) {
  ordered_json j;
  j["model"] = model_json_obj(report.spec);
  j["params"] = params_json(report.params);
  j["reps"] = report.reps;
  j["alphas"] = report.alphas;
  j["master_seed"] = report.policy.master_seed;
  j["workers"] = report.policy.worker_count;
  j["laws_overridden"] = report.laws_overridden;
  j["thresholds"] = ordered_json{{"ks_min_p", kKsMinP},
                                 {"mean_sigmas", kMeanSigmas},
                                 {"variance_sigmas", kVarianceSigmas},
                                 {"correlation_sigmas", kCorrelationSigmas},
                                 {"rejection_sigmas", kRejectionSigmas},
                                 {"mgf_rel_tol", kMgfRelTol}};

  j["ss_laws"] = ordered_json::object();
  j["ss_laws"]["independent"] = report.independent;
  j["ss_laws"]["sources"] = ordered_json::array();
  for (const auto& c : report.sources) {
    ordered_json js;
    js["source"] = c.source;
    js["law"] = ordered_json{{"scale", c.scale}, {"df", c.df}, {"noncentrality", c.noncentrality}};
    js["compound"] = ordered_json{
        {"c1", c.cond_scale}, {"p", c.df}, {"c2", c.mixing_c2}, {"gamma2", c.mixing_gamma2}};
    js["gamma2_positive"] = c.compound_gamma2_positive;
    j["ss_laws"]["sources"].push_back(js);
  }

  j["sources"] = ordered_json::array();
  for (const auto& c : report.sources) {
    ordered_json js;
    js["source"] = c.source;
    js["empirical_mean"] = c.empirical_mean;
    js["theoretical_mean"] = c.theoretical_mean;
    js["mean_se"] = c.mean_se;
    js["mean_ok"] = c.mean_ok;
    js["empirical_variance"] = c.empirical_variance;
    js["theoretical_variance"] = c.theoretical_variance;
    js["variance_se"] = c.variance_se;
    js["variance_ok"] = c.variance_ok;
    js["ks_statistic"] = c.ks_statistic;
    js["ks_p_value"] = c.ks_p_value;
    js["ks_ok"] = c.ks_ok;
    j["sources"].push_back(js);
  }

  j["correlations"] = ordered_json::array();
  for (const auto& c : report.correlations) {
    j["correlations"].push_back(ordered_json{{"source_a", c.source_a},
                                             {"source_b", c.source_b},
                                             {"correlation", c.correlation},
                                             {"limit", c.limit},
                                             {"ok", c.ok}});
  }

  j["f_tests"] = ordered_json::array();
  for (const auto& c : report.rejections) {
    j["f_tests"].push_back(ordered_json{{"source", c.source},
                                        {"denominator", c.denominator},
                                        {"alpha", c.alpha},
                                        {"rate", c.rate},
                                        {"expected", c.expected},
                                        {"se", c.se},
                                        {"ok", c.ok}});
  }

  j["lemma_checks"] = ordered_json::array();
  for (const auto& c : report.lemma_checks) {
    j["lemma_checks"].push_back(ordered_json{{"source", c.source},
                                             {"c1", c.c1},
                                             {"p", c.p},
                                             {"c2", c.c2},
                                             {"gamma2", c.gamma2},
                                             {"gamma2_positive", c.gamma2 > 0.0},
                                             {"ks_statistic", c.ks_statistic},
                                             {"ks_p_value", c.ks_p_value},
                                             {"ks_ok", c.ks_ok},
                                             {"mgf_max_rel_error", c.mgf_max_rel_error},
                                             {"mgf_ok", c.mgf_ok}});
  }

  j["all_passed"] = report.all_passed;
  return j.dump(2) + "\n";
}

std::string report_summary(const SimReport& report) {
  std::ostringstream os;
  const auto flag = [](bool ok) { return ok ? "[pass]" : "[FAIL]"; };
  os << "verification: " << design_name(report.spec.design) << ", reps=" << report.reps
     << ", seed=" << report.policy.master_seed << ", workers=" << report.policy.worker_count;
  if (report.laws_overridden) os << " (laws overridden)";
  os << "\n";

  os << "sum-of-squares laws:\n";
  for (const auto& c : report.sources) {
    os << "  " << flag(c.mean_ok && c.variance_ok && c.ks_ok) << " " << c.source << " ~ "
       << fmt(c.scale) << "*chisq(" << c.df << ", gamma=" << fmt(c.noncentrality) << ")"
       << "  mean " << fmt(c.empirical_mean) << "/" << fmt(c.theoretical_mean) << "  var "
       << fmt(c.empirical_variance) << "/" << fmt(c.theoretical_variance) << "  KS p="
       << fmt(c.ks_p_value, 4);
    if (c.compound_gamma2_positive) os << "  [compound gamma2>0]";
    os << "\n";
  }
  os << "pairwise SS correlations:\n";
  for (const auto& c : report.correlations) {
    os << "  " << flag(c.ok) << " |corr(" << c.source_a << ", " << c.source_b
       << ")| = " << fmt(std::fabs(c.correlation), 4) << " (limit " << fmt(c.limit, 4) << ")\n";
  }
  os << "F-test rejection rates:\n";
  for (const auto& c : report.rejections) {
    os << "  " << flag(c.ok) << " " << c.source << " vs " << c.denominator << " @ alpha="
       << fmt(c.alpha, 4) << ": rate " << fmt(c.rate, 4) << ", expected " << fmt(c.expected, 4)
       << "\n";
  }
  if (!report.lemma_checks.empty()) {
    os << "compounding lemma checks:\n";
    for (const auto& c : report.lemma_checks) {
      os << "  " << flag(c.ks_ok && c.mgf_ok);
      if (!c.source.empty()) os << " " << c.source << ":";
      os << " compound(c1=" << fmt(c.c1) << ", p=" << c.p << ", c2=" << fmt(c.c2)
         << ", gamma2=" << fmt(c.gamma2) << ")  KS p=" << fmt(c.ks_p_value, 4)
         << "  mgf rel err=" << fmt(c.mgf_max_rel_error, 3);
      if (c.gamma2 > 0.0) os << "  [gamma2>0]";
      os << "\n";
    }
  }
  os << "overall: " << (report.all_passed ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace vcanova
