#include "vcanova.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "vcanova/anova.hpp"
#include "vcanova/designs.hpp"
#include "vcanova/io.hpp"
#include "vcanova/simulation.hpp"
#include "vcanova/theory.hpp"

struct vca_model {
  vcanova::ModelSpec spec;
  vcanova::ModelParams params;
};

struct vca_dataset {
  vcanova::BalancedDataset data;
};

struct vca_table {
  vcanova::AnovaTable table;
  vcanova::ModelSpec spec;
};

struct vca_report {
  vcanova::SimReport report;
};

namespace {

thread_local std::string g_last_error;

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename Fn>
vca_status guarded(Fn&& fn) {
  try {
    fn();
    return VCA_OK;
  } catch (const vcanova::ValidationError& e) {
    g_last_error = e.what();
    return VCA_ERROR_INVALID;
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return VCA_ERROR_INVALID;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return VCA_ERROR_INTERNAL;
  }
}

vca_status require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return VCA_ERROR_INVALID;
  }
  return VCA_OK;
}

}  // namespace

extern "C" {

const char* vca_version(void) { return "1.0.0"; }

const char* vca_last_error(void) { return g_last_error.c_str(); }

void vca_string_free(char* s) { std::free(s); }

vca_status vca_model_parse(const char* json_text, vca_model** out_model) {
  if (auto rc = require(json_text && out_model, "null argument")) return rc;
  return guarded([&] {
    auto model = std::make_unique<vca_model>();
    model->spec = vcanova::model_from_json(json_text);
    *out_model = model.release();
  });
}

vca_status vca_model_to_json(const vca_model* model, char** out_json) {
  if (auto rc = require(model && out_json, "null argument")) return rc;
  return guarded([&] { *out_json = dup_string(vcanova::model_to_json(model->spec)); });
}

void vca_model_free(vca_model* model) { delete model; }

vca_status vca_model_set_mu(vca_model* model, double mu) {
  if (auto rc = require(model != nullptr, "null model")) return rc;
  return guarded([&] {
    auto params = model->params;
    params.mu = mu;
    vcanova::check_params(model->spec, params);
    model->params = std::move(params);
  });
}

vca_status vca_model_set_error_variance(vca_model* model, double sigma2) {
  if (auto rc = require(model != nullptr, "null model")) return rc;
  return guarded([&] {
    auto params = model->params;
    params.sigma2 = sigma2;
    vcanova::check_params(model->spec, params);
    model->params = std::move(params);
  });
}

vca_status vca_model_set_variance(vca_model* model, const char* term, double value) {
  if (auto rc = require(model && term, "null argument")) return rc;
  return guarded([&] {
    auto params = model->params;
    params.variance_components[term] = value;
    vcanova::check_params(model->spec, params);
    model->params = std::move(params);
  });
}

vca_status vca_model_set_effects(vca_model* model, const char* term, const double* values,
                                 size_t count) {
  if (auto rc = require(model && term && (values || count == 0), "null argument")) return rc;
  return guarded([&] {
    auto params = model->params;
    params.fixed_effects[term] = std::vector<double>(values, values + count);
    vcanova::check_params(model->spec, params);
    model->params = std::move(params);
  });
}

vca_status vca_dataset_parse_csv(const vca_model* model, const char* csv_text,
                                 vca_dataset** out_dataset) {
  if (auto rc = require(model && csv_text && out_dataset, "null argument")) return rc;
  return guarded([&] {
    auto records = vcanova::parse_csv_records(model->spec, csv_text);
    auto ds = std::make_unique<vca_dataset>();
    ds->data = vcanova::validate(model->spec, records);
    *out_dataset = ds.release();
  });
}

vca_status vca_dataset_to_csv(const vca_dataset* dataset, char** out_csv) {
  if (auto rc = require(dataset && out_csv, "null argument")) return rc;
  return guarded([&] { *out_csv = dup_string(vcanova::write_csv(dataset->data)); });
}

void vca_dataset_free(vca_dataset* dataset) { delete dataset; }

vca_status vca_simulate(const vca_model* model, uint64_t seed, vca_dataset** out_dataset) {
  if (auto rc = require(model && out_dataset, "null argument")) return rc;
  return guarded([&] {
    auto ds = std::make_unique<vca_dataset>();
    ds->data = vcanova::simulate_dataset(model->spec, model->params, seed);
    *out_dataset = ds.release();
  });
}

vca_status vca_analyze(const vca_model* model, const vca_dataset* dataset,
                       vca_table** out_table) {
  if (auto rc = require(model && dataset && out_table, "null argument")) return rc;
  return guarded([&] {
    auto t = std::make_unique<vca_table>();
    t->spec = model->spec;
    t->table = vcanova::decompose(dataset->data);
    vcanova::attach_tests(t->table, model->spec);
    *out_table = t.release();
  });
}

vca_status vca_table_render(const vca_table* table, const char* format, char** out_text) {
  if (auto rc = require(table && format && out_text, "null argument")) return rc;
  return guarded([&] {
    *out_text =
        dup_string(vcanova::render_table(table->table, table->spec, vcanova::parse_format(format)));
  });
}

void vca_table_free(vca_table* table) { delete table; }

vca_status vca_ss_laws(const vca_model* model, char** out_json) {
  if (auto rc = require(model && out_json, "null argument")) return rc;
  return guarded([&] {
    *out_json = dup_string(vcanova::laws_to_json(vcanova::ss_laws(model->spec, model->params)));
  });
}

vca_status vca_power(const vca_model* model, double alpha, char** out_json) {
  if (auto rc = require(model && out_json, "null argument")) return rc;
  return guarded([&] {
    const auto p = vcanova::power(model->spec, model->params, alpha);
    nlohmann::ordered_json j;
    for (const auto& [source, value] : p) j[source] = value;
    *out_json = dup_string(j.dump(2) + "\n");
  });
}

vca_status vca_verify(const vca_model* model, uint64_t reps, uint64_t master_seed,
                      unsigned workers, const double* alphas, size_t alpha_count,
                      int inject_wrong_laws, vca_report** out_report) {
  if (auto rc = require(model && out_report && (alphas || alpha_count == 0), "null argument")) {
    return rc;
  }
  return guarded([&] {
    vcanova::SeedPolicy policy{master_seed, workers == 0 ? 1u : workers};
    std::vector<double> alpha_vec(alphas, alphas + alpha_count);

    vcanova::SsLawSet wrong;
    const vcanova::SsLawSet* override_laws = nullptr;
    if (inject_wrong_laws) {
      wrong = vcanova::ss_laws(model->spec, model->params);
      for (auto& [name, law] : wrong.laws) {
        law = vcanova::ScaledNoncentralChiSquare(law.scale * 1.25, law.df, law.noncentrality);
      }
      override_laws = &wrong;
    }

    auto rep = std::make_unique<vca_report>();
    rep->report = vcanova::run_verification(model->spec, model->params, reps, alpha_vec, policy,
                                            override_laws);
    *out_report = rep.release();
  });
}

vca_status vca_report_passed(const vca_report* report, int* out_passed) {
  if (auto rc = require(report && out_passed, "null argument")) return rc;
  *out_passed = report->report.all_passed ? 1 : 0;
  return VCA_OK;
}

vca_status vca_report_json(const vca_report* report, char** out_json) {
  if (auto rc = require(report && out_json, "null argument")) return rc;
  return guarded([&] { *out_json = dup_string(vcanova::report_to_json(report->report)); });
}

vca_status vca_report_summary(const vca_report* report, char** out_text) {
  if (auto rc = require(report && out_text, "null argument")) return rc;
  return guarded([&] { *out_text = dup_string(vcanova::report_summary(report->report)); });
}

void vca_report_free(vca_report* report) { delete report; }

}  // extern "C"
