// Command-line front end for the vcanova library. Talks to the shared
// library exclusively through the C API in vcanova.h.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "vcanova.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitVerifyFailed = 3;

[[noreturn]] void die_invalid(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(kExitInvalid);
}

[[noreturn]] void die_io(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  std::exit(kExitIo);
}

void check(vca_status rc) {
  if (rc != VCA_OK) die_invalid(vca_last_error());
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die_io("cannot open \"" + path + "\"");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) die_io("cannot read \"" + path + "\"");
  return os.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) die_io("cannot open \"" + path + "\" for writing");
  out << content;
  out.flush();
  if (!out) die_io("cannot write \"" + path + "\"");
}

struct OwnedString {
  char* ptr = nullptr;
  ~OwnedString() { vca_string_free(ptr); }
  std::string str() const { return ptr ? std::string(ptr) : std::string(); }
};

double parse_number(const std::string& text, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size() || text.empty()) {
    die_invalid("invalid number \"" + text + "\" in " + what);
  }
  return v;
}

struct ParamFlags {
  double mu = 0.0;
  bool mu_set = false;
  double sigma2 = 1.0;
  bool sigma2_set = false;
  std::vector<std::string> variances;  // TERM=VALUE
  std::vector<std::string> effects;    // TERM=v1,v2,...
};

void add_param_flags(CLI::App* cmd, ParamFlags& flags) {
  cmd->add_option("--mu", flags.mu, "Grand mean")->each([&flags](const std::string&) {
    flags.mu_set = true;
  });
  cmd->add_option("--sigma2", flags.sigma2, "Error variance")
      ->each([&flags](const std::string&) { flags.sigma2_set = true; });
  cmd->add_option("--var", flags.variances,
                  "Variance component, TERM=VALUE (factor name, interaction \"A:B\", or "
                  "\"WholePlot\"); repeatable");
  cmd->add_option("--effect", flags.effects,
                  "Fixed-effect vector, TERM=v1,v2,... (interactions row-major); repeatable");
}

using ModelHandle = std::unique_ptr<vca_model, decltype(&vca_model_free)>;

ModelHandle load_model(const std::string& model_path, const ParamFlags& flags) {
  const std::string text = read_file(model_path);
  vca_model* raw = nullptr;
  check(vca_model_parse(text.c_str(), &raw));
  ModelHandle model(raw, &vca_model_free);

  if (flags.mu_set) check(vca_model_set_mu(model.get(), flags.mu));
  if (flags.sigma2_set) check(vca_model_set_error_variance(model.get(), flags.sigma2));
  for (const auto& spec : flags.variances) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) die_invalid("--var expects TERM=VALUE, got \"" + spec + "\"");
    check(vca_model_set_variance(model.get(), spec.substr(0, eq).c_str(),
                                 parse_number(spec.substr(eq + 1), "--var")));
  }
  for (const auto& spec : flags.effects) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos) {
      die_invalid("--effect expects TERM=v1,v2,..., got \"" + spec + "\"");
    }
    const std::string term = spec.substr(0, eq);
    std::vector<double> values;
    std::stringstream ss(spec.substr(eq + 1));
    std::string item;
    while (std::getline(ss, item, ',')) values.push_back(parse_number(item, "--effect"));
    check(vca_model_set_effects(model.get(), term.c_str(), values.data(), values.size()));
  }
  return model;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ANOVA for balanced variance component models"};
  app.require_subcommand(1);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "ANOVA table from a CSV dataset");
  std::string an_data, an_model, an_format = "text", an_out;
  analyze->add_option("--data", an_data, "CSV data file")->required();
  analyze->add_option("--model", an_model, "Model JSON file")->required();
  analyze->add_option("--format", an_format, "Output format: text, csv or json");
  analyze->add_option("--out", an_out, "Output file (default: stdout)");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Simulate a dataset from the model");
  std::string sim_model, sim_out;
  std::uint64_t sim_seed = 0;
  ParamFlags sim_params;
  simulate->add_option("--model", sim_model, "Model JSON file")->required();
  add_param_flags(simulate, sim_params);
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--out", sim_out, "Output CSV file (default: stdout)");

  // verify
  auto* verify = app.add_subcommand(
      "verify", "Monte Carlo verification of the derived sum-of-squares laws");
  std::string ver_model, ver_out;
  std::uint64_t ver_seed = 0;
  std::uint64_t ver_reps = 100000;
  unsigned ver_workers = 1;
  std::vector<double> ver_alphas;
  bool ver_inject = false;
  ParamFlags ver_params;
  verify->add_option("--model", ver_model, "Model JSON file")->required();
  add_param_flags(verify, ver_params);
  verify->add_option("--reps", ver_reps, "Replications (>= 1000)");
  verify->add_option("--seed", ver_seed, "Master seed");
  verify->add_option("--workers", ver_workers, "Worker threads");
  verify->add_option("--alpha", ver_alphas, "Test level; repeatable (default 0.05)");
  verify->add_option("--out", ver_out, "Write the JSON report to this file");
  verify
      ->add_flag("--inject-wrong-laws", ver_inject,
                 "Negative control: perturb the laws under test; the run must fail")
      ->group("");  // hidden

  // power
  auto* power = app.add_subcommand("power", "Rejection probability of each F test");
  std::string pow_model, pow_format = "text", pow_out;
  double pow_alpha = 0.05;
  ParamFlags pow_params;
  power->add_option("--model", pow_model, "Model JSON file")->required();
  add_param_flags(power, pow_params);
  power->add_option("--alpha", pow_alpha, "Test level");
  power->add_option("--format", pow_format, "Output format: text or json");
  power->add_option("--out", pow_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return kExitInvalid;
  }

  if (analyze->parsed()) {
    auto model = load_model(an_model, ParamFlags{});
    const std::string csv = read_file(an_data);
    vca_dataset* ds = nullptr;
    check(vca_dataset_parse_csv(model.get(), csv.c_str(), &ds));
    std::unique_ptr<vca_dataset, decltype(&vca_dataset_free)> dataset(ds, &vca_dataset_free);
    vca_table* t = nullptr;
    check(vca_analyze(model.get(), dataset.get(), &t));
    std::unique_ptr<vca_table, decltype(&vca_table_free)> table(t, &vca_table_free);
    OwnedString text;
    check(vca_table_render(table.get(), an_format.c_str(), &text.ptr));
    write_output(an_out, text.str());
    return kExitOk;
  }

  if (simulate->parsed()) {
    auto model = load_model(sim_model, sim_params);
    vca_dataset* ds = nullptr;
    check(vca_simulate(model.get(), sim_seed, &ds));
    std::unique_ptr<vca_dataset, decltype(&vca_dataset_free)> dataset(ds, &vca_dataset_free);
    OwnedString csv;
    check(vca_dataset_to_csv(dataset.get(), &csv.ptr));
    write_output(sim_out, csv.str());
    return kExitOk;
  }

  if (verify->parsed()) {
    auto model = load_model(ver_model, ver_params);
    if (ver_alphas.empty()) ver_alphas.push_back(0.05);
    vca_report* r = nullptr;
    check(vca_verify(model.get(), ver_reps, ver_seed, ver_workers, ver_alphas.data(),
                     ver_alphas.size(), ver_inject ? 1 : 0, &r));
    std::unique_ptr<vca_report, decltype(&vca_report_free)> report(r, &vca_report_free);
    OwnedString summary;
    check(vca_report_summary(report.get(), &summary.ptr));
    std::cout << summary.str();
    if (!ver_out.empty()) {
      OwnedString json;
      check(vca_report_json(report.get(), &json.ptr));
      write_output(ver_out, json.str());
    }
    int passed = 0;
    check(vca_report_passed(report.get(), &passed));
    return passed ? kExitOk : kExitVerifyFailed;
  }

  if (power->parsed()) {
    auto model = load_model(pow_model, pow_params);
    OwnedString json;
    check(vca_power(model.get(), pow_alpha, &json.ptr));
    if (pow_format == "json") {
      write_output(pow_out, json.str());
    } else if (pow_format == "text") {
      // The JSON is a flat {source: power} object; print one line per source.
      std::string text;
      const std::string src = json.str();
      std::istringstream in(src);
      std::string line;
      while (std::getline(in, line)) {
        const auto colon = line.find("\":");
        if (colon == std::string::npos) continue;
        const auto open = line.find('"');
        std::string source = line.substr(open + 1, colon - open - 1);
        std::string value = line.substr(colon + 2);
        if (!value.empty() && value.back() == ',') value.pop_back();
        text += source + ": " + value.substr(value.find_first_not_of(' ')) + "\n";
      }
      write_output(pow_out, text);
    } else {
      die_invalid("power supports --format text or json");
    }
    return kExitOk;
  }

  return kExitInvalid;
}
