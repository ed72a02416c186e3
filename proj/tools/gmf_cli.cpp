#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "gmf/gmf.h"

namespace {

int exit_code(gmf_status status) {
  switch (status) {
    case GMF_OK: return 0;
    case GMF_ERR_CONFIG: return 2;
    case GMF_ERR_INVARIANT: return 3;
    default: return 1;
  }
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

int finish(gmf_status status, char* result) {
  if (status != GMF_OK) {
    std::cerr << "error (" << gmf_status_name(status) << "): " << gmf_last_error() << '\n';
    return exit_code(status);
  }
  std::cout << result << '\n';
  gmf_string_free(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graphon mean field experiments: simulate, solve and compare"};
  app.set_version_flag("--version", std::string(gmf_version()));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  unsigned threads = 0;

  auto add_common = [&](CLI::App* sub, bool writes) {
    sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    if (writes) {
      sub->add_option("--out", out_dir, "Output directory (overrides the config)");
      sub->add_option("--threads", threads, "Worker threads for the ensemble")
          ->check(CLI::PositiveNumber);
    }
  };
  auto* run = app.add_subcommand("run", "Run one experiment and write its artifacts");
  add_common(run, true);
  auto* sweep = app.add_subcommand("sweep", "Run an experiment for every n in n_list and fit the error rate");
  add_common(sweep, true);
  auto* bounds = app.add_subcommand("check-bounds", "Evaluate the closed-form bounds without simulating");
  add_common(bounds, false);

  CLI11_PARSE(app, argc, argv);

  std::string text;
  if (!read_file(config_path, text)) {
    std::cerr << "error (config error): cannot read " << config_path << '\n';
    return 2;
  }
  const char* out = out_dir.empty() ? nullptr : out_dir.c_str();
  char* result = nullptr;
  gmf_status status = GMF_OK;
  if (*run) {
    status = gmf_run(text.c_str(), out, threads, &result);
  } else if (*sweep) {
    status = gmf_sweep(text.c_str(), out, threads, &result);
  } else {
    status = gmf_check_bounds(text.c_str(), &result);
  }
  return finish(status, result);
}
