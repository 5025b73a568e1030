#include "ridgefind.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <string>

#include "ridgefind/harness.hpp"

using namespace ridgefind;

struct rf_instance {
  std::shared_ptr<const SumOfFeaturesModel> model;
  NoiseSpec noise;
};

struct rf_oracle {
  std::shared_ptr<const SumOfFeaturesModel> model;
  QueryOracle oracle;
};

struct rf_report {
  RunReport report;
};

namespace {

thread_local std::string g_last_error;

rf_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInput:
      return RF_ERR_INPUT;
    case ErrorKind::kConfig:
      return RF_ERR_CONFIG;
    case ErrorKind::kBudget:
      return RF_ERR_BUDGET;
    case ErrorKind::kNumerical:
      return RF_ERR_NUMERICAL;
    case ErrorKind::kGeneration:
      return RF_ERR_GENERATION;
    case ErrorKind::kUnsupported:
      return RF_ERR_UNSUPPORTED;
    case ErrorKind::kIo:
      return RF_ERR_IO;
  }
  return RF_ERR_INTERNAL;
}

rf_status fail(rf_status s, const char* msg) {
  g_last_error = msg;
  return s;
}

template <class F>
rf_status guarded(F&& f) {
  try {
    f();
    g_last_error.clear();
    return RF_OK;
  } catch (const Error& e) {
    return fail(status_of(e.kind()), e.what());
  } catch (const Json::exception& e) {
    return fail(RF_ERR_INPUT, e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(RF_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(RF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(RF_ERR_INTERNAL, e.what());
  }
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

Json parse(const char* text, const char* what) {
  if (!text) throw InputError(std::string(what) + " is NULL");
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed ") + what + ": " + e.what());
  }
}

void need(const void* p, const char* what) {
  if (!p) throw InputError(std::string(what) + " is NULL");
}

}  // namespace

extern "C" {

const char* rf_last_error_message(void) { return g_last_error.c_str(); }

const char* rf_status_name(rf_status status) {
  switch (status) {
    case RF_OK:
      return "ok";
    case RF_ERR_INPUT:
      return "input";
    case RF_ERR_CONFIG:
      return "config";
    case RF_ERR_BUDGET:
      return "budget";
    case RF_ERR_NUMERICAL:
      return "numerical";
    case RF_ERR_GENERATION:
      return "generation";
    case RF_ERR_UNSUPPORTED:
      return "unsupported";
    case RF_ERR_IO:
      return "io";
    case RF_ERR_INTERNAL:
      return "internal";
  }
  return "unknown";
}

void rf_string_free(char* s) { std::free(s); }

rf_status rf_config_load(const char* path, char** out_json) {
  return guarded([&] {
    need(path, "path");
    need(out_json, "out_json");
    *out_json = copy_string(dump_json(to_json(load_experiment_config(path))));
  });
}

rf_status rf_instance_from_config(const char* config_json, rf_instance** out) {
  return guarded([&] {
    need(out, "out");
    auto cfg = experiment_config_from_json(parse(config_json, "config"));
    auto inst = resolve_instance(cfg);
    *out = new rf_instance{std::make_shared<const SumOfFeaturesModel>(std::move(inst.model)), inst.noise};
  });
}

rf_status rf_instance_load(const char* path, rf_instance** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    auto inst = instance_from_json(read_json_file(path));
    *out = new rf_instance{std::make_shared<const SumOfFeaturesModel>(std::move(inst.model)), inst.noise};
  });
}

rf_status rf_instance_save(const rf_instance* inst, const char* path) {
  return guarded([&] {
    need(inst, "instance");
    need(path, "path");
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    write_json_file(p, instance_to_json(*inst->model, inst->noise));
  });
}

rf_status rf_instance_json(const rf_instance* inst, char** out_json) {
  return guarded([&] {
    need(inst, "instance");
    need(out_json, "out_json");
    *out_json = copy_string(dump_json(instance_to_json(*inst->model, inst->noise)));
  });
}

rf_status rf_instance_dim(const rf_instance* inst, size_t* out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = inst->model->dim();
  });
}

rf_status rf_instance_size(const rf_instance* inst, size_t* out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = inst->model->size();
  });
}

rf_status rf_instance_evaluate(const rf_instance* inst, const double* x, size_t dim, double* out) {
  return guarded([&] {
    need(inst, "instance");
    need(x, "x");
    need(out, "out");
    if (dim != inst->model->dim()) throw InputError("evaluate: dimension mismatch");
    *out = inst->model->evaluate_raw(x);
  });
}

void rf_instance_free(rf_instance* inst) { delete inst; }

rf_status rf_oracle_create(const rf_instance* inst, rf_oracle** out) {
  return guarded([&] {
    need(inst, "instance");
    need(out, "out");
    *out = new rf_oracle{inst->model, QueryOracle(inst->model, inst->noise)};
  });
}

rf_status rf_oracle_query(rf_oracle* oracle, const double* x, size_t dim, double* out) {
  return guarded([&] {
    need(oracle, "oracle");
    need(x, "x");
    need(out, "out");
    if (dim != oracle->oracle.dim()) throw InputError("query: dimension mismatch");
    *out = oracle->oracle.query_raw(x);
  });
}

rf_status rf_oracle_count(const rf_oracle* oracle, uint64_t* out) {
  return guarded([&] {
    need(oracle, "oracle");
    need(out, "out");
    *out = oracle->oracle.query_count();
  });
}

void rf_oracle_free(rf_oracle* oracle) { delete oracle; }

rf_status rf_run_experiment(const char* config_json, const char* out_dir, rf_scope scope, rf_report** out) {
  return guarded([&] {
    need(out, "out");
    auto cfg = experiment_config_from_json(parse(config_json, "config"));
    RunOptions opt;
    if (out_dir) opt.out_dir = std::filesystem::path(out_dir);
    switch (scope) {
      case RF_SCOPE_FULL:
        opt.scope = RunScope::kFull;
        break;
      case RF_SCOPE_SEARCH:
        opt.scope = RunScope::kSearch;
        break;
      case RF_SCOPE_RECOVER:
        opt.scope = RunScope::kRecover;
        break;
      default:
        throw InputError("unknown run scope");
    }
    *out = new rf_report{run_experiment(cfg, opt)};
  });
}

rf_status rf_render_report(const char* run_dir, rf_report** out) {
  return guarded([&] {
    need(run_dir, "run_dir");
    need(out, "out");
    *out = new rf_report{render_report(run_dir)};
  });
}

rf_status rf_report_json(const rf_report* report, int stable, char** out_json) {
  return guarded([&] {
    need(report, "report");
    need(out_json, "out_json");
    *out_json = copy_string(dump_json(stable ? report->report.stable_json() : to_json(report->report)));
  });
}

rf_status rf_report_passed(const rf_report* report, int* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.passed ? 1 : 0;
  });
}

rf_status rf_report_failure(const rf_report* report, rf_status* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = report->report.failed_stage.empty() ? RF_OK : status_of(report->report.error_kind);
  });
}

void rf_report_free(rf_report* report) { delete report; }

}  // extern "C"
