#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "vcanova.h"

namespace {

constexpr const char* kOneWayModel = R"({
  "design": "one_way",
  "factors": [{"name": "A", "levels": 2, "kind": "fixed"}],
  "replicates": 2
})";

constexpr const char* kOneWayCsv = "A,y\n1,1\n1,2\n2,3\n2,4\n";

struct Owned {
  char* s = nullptr;
  ~Owned() { vca_string_free(s); }
  std::string str() const { return s ? std::string(s) : std::string(); }
};

}  // namespace

TEST_CASE("model parse, round trip and errors") {
  vca_model* model = nullptr;
  REQUIRE(vca_model_parse(kOneWayModel, &model) == VCA_OK);
  Owned json;
  REQUIRE(vca_model_to_json(model, &json.s) == VCA_OK);
  CHECK(json.str().find("\"one_way\"") != std::string::npos);

  vca_model* round = nullptr;
  REQUIRE(vca_model_parse(json.s, &round) == VCA_OK);
  Owned json2;
  REQUIRE(vca_model_to_json(round, &json2.s) == VCA_OK);
  CHECK(json.str() == json2.str());
  vca_model_free(round);
  vca_model_free(model);

  vca_model* bad = nullptr;
  CHECK(vca_model_parse("{\"design\": \"nope\"}", &bad) == VCA_ERROR_INVALID);
  CHECK(std::strlen(vca_last_error()) > 0);
  CHECK(vca_model_parse("not json", &bad) == VCA_ERROR_INVALID);
  CHECK(vca_model_parse(R"({"design": "one_way", "factors": [], "bogus": 1})", &bad) ==
        VCA_ERROR_INVALID);
}

TEST_CASE("analyze pipeline through the C API") {
  vca_model* model = nullptr;
  REQUIRE(vca_model_parse(kOneWayModel, &model) == VCA_OK);
  vca_dataset* data = nullptr;
  REQUIRE(vca_dataset_parse_csv(model, kOneWayCsv, &data) == VCA_OK);
  vca_table* table = nullptr;
  REQUIRE(vca_analyze(model, data, &table) == VCA_OK);

  Owned text;
  REQUIRE(vca_table_render(table, "text", &text.s) == VCA_OK);
  CHECK(text.str().find("A") != std::string::npos);
  CHECK(text.str().find("8") != std::string::npos);

  Owned csv;
  REQUIRE(vca_table_render(table, "csv", &csv.s) == VCA_OK);
  CHECK(csv.str().find("A,1,4,4,") != std::string::npos);

  Owned json;
  REQUIRE(vca_table_render(table, "json", &json.s) == VCA_OK);
  CHECK(json.str().find("\"ss\": 4.0") != std::string::npos);

  Owned bad;
  CHECK(vca_table_render(table, "yaml", &bad.s) == VCA_ERROR_INVALID);

  vca_table_free(table);
  vca_dataset_free(data);
  vca_model_free(model);
}

TEST_CASE("unbalanced data is reported with the offending cell") {
  vca_model* model = nullptr;
  REQUIRE(vca_model_parse(kOneWayModel, &model) == VCA_OK);
  vca_dataset* data = nullptr;
  CHECK(vca_dataset_parse_csv(model, "A,y\n1,1\n1,2\n2,3\n", &data) == VCA_ERROR_INVALID);
  CHECK(std::string(vca_last_error()).find("unbalanced: cell A=2") != std::string::npos);
  vca_model_free(model);
}

TEST_CASE("simulate / csv round trip and params") {
  const char* spec = R"({
    "design": "one_way",
    "factors": [{"name": "A", "levels": 3, "kind": "random"}],
    "replicates": 4
  })";
  vca_model* model = nullptr;
  REQUIRE(vca_model_parse(spec, &model) == VCA_OK);
  REQUIRE(vca_model_set_mu(model, 1.5) == VCA_OK);
  REQUIRE(vca_model_set_error_variance(model, 1.0) == VCA_OK);
  REQUIRE(vca_model_set_variance(model, "A", 2.0) == VCA_OK);
  CHECK(vca_model_set_variance(model, "Bogus", 2.0) == VCA_ERROR_INVALID);
  CHECK(vca_model_set_error_variance(model, -1.0) == VCA_ERROR_INVALID);

  vca_dataset* data = nullptr;
  REQUIRE(vca_simulate(model, 42, &data) == VCA_OK);
  Owned csv;
  REQUIRE(vca_dataset_to_csv(data, &csv.s) == VCA_OK);

  vca_dataset* parsed = nullptr;
  REQUIRE(vca_dataset_parse_csv(model, csv.s, &parsed) == VCA_OK);
  Owned csv2;
  REQUIRE(vca_dataset_to_csv(parsed, &csv2.s) == VCA_OK);
  CHECK(csv.str() == csv2.str());

  Owned laws;
  REQUIRE(vca_ss_laws(model, &laws.s) == VCA_OK);
  CHECK(laws.str().find("\"scale\": 9.0") != std::string::npos);

  Owned pw;
  REQUIRE(vca_power(model, 0.05, &pw.s) == VCA_OK);
  CHECK(pw.str().find("\"A\"") != std::string::npos);

  vca_dataset_free(parsed);
  vca_dataset_free(data);
  vca_model_free(model);
}

TEST_CASE("verify pass and negative control") {
  const char* spec = R"({
    "design": "one_way",
    "factors": [{"name": "A", "levels": 3, "kind": "random"}],
    "replicates": 4
  })";
  vca_model* model = nullptr;
  REQUIRE(vca_model_parse(spec, &model) == VCA_OK);
  REQUIRE(vca_model_set_variance(model, "A", 2.0) == VCA_OK);

  const double alphas[] = {0.05};
  vca_report* report = nullptr;
  REQUIRE(vca_verify(model, 4000, 2030, 2, alphas, 1, 0, &report) == VCA_OK);
  int passed = 0;
  REQUIRE(vca_report_passed(report, &passed) == VCA_OK);
  CHECK(passed == 1);
  Owned json;
  REQUIRE(vca_report_json(report, &json.s) == VCA_OK);
  CHECK(json.str().find("\"all_passed\": true") != std::string::npos);
  Owned summary;
  REQUIRE(vca_report_summary(report, &summary.s) == VCA_OK);
  CHECK(summary.str().find("overall: PASS") != std::string::npos);
  vca_report_free(report);

  vca_report* bad = nullptr;
  REQUIRE(vca_verify(model, 4000, 2030, 2, alphas, 1, 1, &bad) == VCA_OK);
  REQUIRE(vca_report_passed(bad, &passed) == VCA_OK);
  CHECK(passed == 0);
  vca_report_free(bad);

  // reps below the minimum is a validation error
  vca_report* small = nullptr;
  CHECK(vca_verify(model, 10, 1, 1, alphas, 1, 0, &small) == VCA_ERROR_INVALID);
  CHECK(std::string(vca_last_error()).find("reps below minimum") != std::string::npos);

  vca_model_free(model);
}

TEST_CASE("null arguments are rejected, not dereferenced") {
  CHECK(vca_model_parse(nullptr, nullptr) == VCA_ERROR_INVALID);
  CHECK(vca_model_set_mu(nullptr, 0.0) == VCA_ERROR_INVALID);
  CHECK(vca_report_passed(nullptr, nullptr) == VCA_ERROR_INVALID);
  CHECK(std::strlen(vca_version()) > 0);
}
