#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "interimkm/interimkm.h"
#include "service.hpp"

namespace {

enum Exit { ok = 0, tolerance_failed = 1, bad_input = 2, domain = 3, simulation = 4, internal = 5 };

int exit_code(ikm_status s) {
  switch (s) {
    case IKM_OK: return ok;
    case IKM_ERR_INVALID_ARGUMENT:
    case IKM_ERR_INVALID_CONFIG: return bad_input;
    case IKM_ERR_DOMAIN: return domain;
    case IKM_ERR_SIMULATION: return simulation;
    default: return internal;
  }
}

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

bool write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  return static_cast<bool>(out);
}

std::string fmt(const nlohmann::json& v, const char* spec = "%.3f") {
  if (!v.is_number()) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v.get<double>());
  return buf;
}

void print_summary(const std::string& json_text, std::ostream& out) {
  const auto j = nlohmann::json::parse(json_text);
  const std::string kind = j.value("kind", "");
  for (const auto& r : j["rows"]) {
    if (kind == "design") {
      out << r["scenario"].get<std::string>() << ": n+m=" << r["n_total"] << " accrual="
          << fmt(r["accrual_months"], "%g") << " d=" << r["total_events"]
          << " p=" << fmt(r["p"], "%.4g") << " t_p=" << fmt(r["t_p"], "%.2f") << '\n';
      continue;
    }
    out << r["scenario"].get<std::string>() << " delta=" << fmt(r["delta"], "%g") << ' '
        << r["label"].get<std::string>() << ": t_p=" << fmt(r["t_p"], "%.2f")
        << " p=" << fmt(r["p"], "%.4g") << " S=" << fmt(r["center"]) << " ["
        << fmt(r["lower"]) << "; " << fmt(r["upper"]) << "]";
    if (kind == "simulate") {
      out << " | MC " << fmt(r["mc_mean"]) << " [" << fmt(r["mc_lower"]) << "; "
          << fmt(r["mc_upper"]) << "] coverage=" << fmt(r["coverage"])
          << (r["pass"].get<bool>() ? " ok" : " OUT OF TOLERANCE");
    }
    out << '\n';
  }
}

int emit(ikm_result* result, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << ikm_result_csv(result);
    return ok;
  }
  const bool as_json = ends_with(out_path, ".json");
  if (!write_file(out_path, as_json ? ikm_result_json(result) : ikm_result_csv(result))) {
    std::cerr << "error: cannot write " << out_path << '\n';
    return internal;
  }
  print_summary(ikm_result_json(result), std::cout);
  return ok;
}

int fail_with(ikm_status s) {
  std::cerr << "error: " << ikm_last_error() << '\n';
  return exit_code(s);
}

interimkm::service::Service* running = nullptr;

void on_signal(int) {
  if (running) running->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Expected Kaplan-Meier curves at an event-driven interim analysis"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(ikm_version()));

  std::string config_path, out_path, dump_path, bind;
  std::uint64_t seed = 0;
  int reps = 0, threads = 0;
  double tolerance = 0.03;
  bool clip = false;

  auto* design = app.add_subcommand("design", "Solve sample size, accrual and interim trigger");
  auto* plan = app.add_subcommand("plan", "Asymptotic prediction intervals per scenario, delta and arm");
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the prediction intervals");
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");

  for (auto* sub : {design, plan, simulate}) {
    sub->add_option("--config", config_path, "Scenario configuration (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_path, "Output file; .json writes JSON, anything else CSV");
  }
  for (auto* sub : {plan, simulate}) {
    sub->add_flag("--clip-bounds", clip, "Report interval bounds clipped to [0, 1]");
  }
  auto* seed_opt = simulate->add_option("--seed", seed, "Override every scenario's seed");
  simulate->add_option("--reps", reps, "Override every scenario's replicate count")->check(CLI::PositiveNumber);
  simulate->add_option("--tolerance", tolerance, "Allowed |MC - asymptotic| per endpoint")->check(CLI::NonNegativeNumber);
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
  simulate->add_option("--dump", dump_path, "Write per-replicate estimates to this CSV file");
  serve->add_option("--bind", bind, "host:port (default from INTERIMKM_BIND or 127.0.0.1:8080)");
  int max_reps = 5000;
  serve->add_option("--max-replicates", max_reps, "Replicate cap per simulate request")->check(CLI::PositiveNumber);
  std::string ui_dir;
  serve->add_option("--ui", ui_dir, "Directory of static UI files to serve")->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  if (*serve) {
    if (bind.empty()) {
      const char* env = std::getenv("INTERIMKM_BIND");
      bind = env && *env ? env : "127.0.0.1:8080";
    }
    interimkm::service::BindAddress address;
    try {
      address = interimkm::service::parse_bind_address(bind);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return bad_input;
    }
    interimkm::service::Service svc({max_reps, 0, ui_dir});
    running = &svc;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    std::cerr << "listening on " << address.host << ':' << address.port << '\n';
    if (!svc.listen(address)) {
      std::cerr << "error: cannot listen on " << bind << '\n';
      running = nullptr;
      return internal;
    }
    running = nullptr;
    return ok;
  }

  std::string config;
  if (!read_file(config_path, config)) {
    std::cerr << "error: cannot read " << config_path << '\n';
    return bad_input;
  }
  ikm_run_options opts;
  ikm_run_options_init(&opts);
  opts.clip_bounds = clip ? 1 : 0;
  ikm_result* result = nullptr;
  ikm_status s = IKM_OK;

  if (*design) {
    s = ikm_design_json(config.c_str(), &result);
  } else if (*plan) {
    s = ikm_plan_json(config.c_str(), &opts, &result);
  } else {
    if (*seed_opt) {
      opts.has_seed = 1;
      opts.seed = seed;
    }
    opts.replicates = reps;
    opts.tolerance = tolerance;
    opts.threads = threads;
    opts.dump = dump_path.empty() ? 0 : 1;
    s = ikm_simulate_json(
        config.c_str(), &opts,
        [](int done, int total, void*) {
          if (done == total || done % std::max(1, total / 10) == 0) {
            std::fprintf(stderr, "\rsimulating %d/%d", done, total);
            if (done == total) std::fputc('\n', stderr);
          }
        },
        nullptr, &result);
  }
  if (s != IKM_OK) return fail_with(s);

  int code = emit(result, out_path);
  if (code == ok && !dump_path.empty() && !write_file(dump_path, ikm_result_dump_csv(result))) {
    std::cerr << "error: cannot write " << dump_path << '\n';
    code = internal;
  }
  if (code == ok && *simulate && !ikm_result_passed(result)) {
    std::cerr << "Monte Carlo summaries outside tolerance " << tolerance << '\n';
    code = tolerance_failed;
  }
  ikm_result_free(result);
  return code;
}
