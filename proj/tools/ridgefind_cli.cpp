// Command-line front end over the C API.
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "ridgefind.h"

namespace {

using Json = nlohmann::json;

// 0 pass, 1 threshold fail, 2 config/input/io error, 3 budget error.
int exit_code_for(rf_status s) {
  switch (s) {
    case RF_OK:
      return 0;
    case RF_ERR_BUDGET:
      return 3;
    case RF_ERR_NUMERICAL:
      return 1;
    default:
      return 2;
  }
}

int report_error(rf_status s) {
  std::cerr << "ridgefind: " << rf_status_name(s) << " error: " << rf_last_error_message() << '\n';
  return exit_code_for(s);
}

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string oracle;
  std::string out;
  std::optional<int> threads;
};

void add_common(CLI::App* cmd, Common& c, bool needs_out) {
  cmd->add_option("--config", c.config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "Override the pipeline seed");
  cmd->add_option("--oracle", c.oracle, "Oracle backend")->check(CLI::IsMember({"mc", "quadrature"}));
  auto* out = cmd->add_option("--out", c.out, "Output path");
  if (needs_out) out->required();
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
}

// Loads the config through the library and applies command-line overrides.
std::optional<std::string> load_config(const Common& c, const char* mode, rf_status& status) {
  char* text = nullptr;
  status = rf_config_load(c.config.c_str(), &text);
  if (status != RF_OK) return std::nullopt;
  Json j = Json::parse(text);
  rf_string_free(text);
  if (c.seed) j["seed"] = *c.seed;
  if (!c.oracle.empty()) j["pipeline"]["backend"] = c.oracle;
  if (c.threads) j["pipeline"]["threads"] = *c.threads;
  if (mode) j["pipeline"]["mode"] = mode;
  return j.dump();
}

int finish_report(rf_status s, rf_report* rep) {
  if (s != RF_OK) return report_error(s);
  char* json = nullptr;
  rf_status js = rf_report_json(rep, 0, &json);
  if (js != RF_OK) {
    rf_report_free(rep);
    return report_error(js);
  }
  std::cout << json << '\n';
  rf_string_free(json);
  rf_status failure = RF_OK;
  int passed = 0;
  rf_report_failure(rep, &failure);
  rf_report_passed(rep, &passed);
  rf_report_free(rep);
  if (failure != RF_OK) return exit_code_for(failure);
  return passed ? 0 : 1;
}

int run_pipeline(const Common& c, const char* mode, rf_scope scope) {
  rf_status s = RF_OK;
  auto cfg = load_config(c, mode, s);
  if (!cfg) return report_error(s);
  rf_report* rep = nullptr;
  s = rf_run_experiment(cfg->c_str(), c.out.empty() ? nullptr : c.out.c_str(), scope, &rep);
  return finish_report(s, rep);
}

int generate(const Common& c) {
  rf_status s = RF_OK;
  auto cfg = load_config(c, nullptr, s);
  if (!cfg) return report_error(s);
  rf_instance* inst = nullptr;
  if ((s = rf_instance_from_config(cfg->c_str(), &inst)) != RF_OK) return report_error(s);
  if (c.out.empty()) {
    char* json = nullptr;
    s = rf_instance_json(inst, &json);
    if (s == RF_OK) {
      std::cout << json << '\n';
      rf_string_free(json);
    }
  } else {
    s = rf_instance_save(inst, c.out.c_str());
  }
  rf_instance_free(inst);
  return s == RF_OK ? 0 : report_error(s);
}

int report(const std::string& dir) {
  rf_report* rep = nullptr;
  rf_status s = rf_render_report(dir.c_str(), &rep);
  return finish_report(s, rep);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recover sums of ridge features from query access"};
  app.require_subcommand(1);

  Common gen_opts, search_opts, recover_opts, run_opts, reduce_opts;
  auto* gen = app.add_subcommand("generate", "Write the ground-truth instance named by a config");
  add_common(gen, gen_opts, false);
  auto* search = app.add_subcommand("search", "Find directions; writes directions.json into --out");
  add_common(search, search_opts, true);
  auto* recover = app.add_subcommand("recover", "Recover ridges for the directions stored in --out");
  add_common(recover, recover_opts, true);
  auto* run = app.add_subcommand("run", "Full bounded pipeline");
  add_common(run, run_opts, false);
  auto* reduce = app.add_subcommand("reduce-run", "Pipeline for unbounded Lipschitz activations");
  add_common(reduce, reduce_opts, false);
  std::string report_dir;
  auto* rep = app.add_subcommand("report", "Re-render metrics from a run directory");
  rep->add_option("--out,run_dir", report_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*gen) return generate(gen_opts);
    if (*search) return run_pipeline(search_opts, "bounded", RF_SCOPE_SEARCH);
    if (*recover) return run_pipeline(recover_opts, "bounded", RF_SCOPE_RECOVER);
    if (*run) return run_pipeline(run_opts, "bounded", RF_SCOPE_FULL);
    if (*reduce) return run_pipeline(reduce_opts, "reduction", RF_SCOPE_FULL);
    if (*rep) return report(report_dir);
  } catch (const std::exception& e) {
    std::cerr << "ridgefind: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
