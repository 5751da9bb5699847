#include <doctest.h>

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "interimkm/interimkm.h"

namespace {

std::string read(const std::string& name) {
  std::ifstream in(std::string(FIXTURE_DIR) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("version and building blocks") {
  CHECK(std::strlen(ikm_version()) > 0);
  int d = 0;
  CHECK(ikm_schoenfeld_events(0.65, 0.05, 0.8, 0.5, 0.5, &d) == IKM_OK);
  CHECK(d == 170);
  CHECK(ikm_schoenfeld_events(1.0, 0.05, 0.8, 0.5, 0.5, &d) == IKM_ERR_DOMAIN);
  CHECK(std::string(ikm_last_error()).find("hazard ratio") != std::string::npos);
  CHECK(ikm_schoenfeld_events(0.65, 2.0, 0.8, 0.5, 0.5, &d) == IKM_ERR_INVALID_ARGUMENT);
  CHECK(ikm_schoenfeld_events(0.65, 0.05, 0.8, 0.5, 0.5, nullptr) == IKM_ERR_INVALID_ARGUMENT);

  ikm_interval pi;
  CHECK(ikm_prediction_interval(0.06, 0.9, 98, 0.05, &pi) == IKM_OK);
  CHECK(pi.lower < 0.0);
  CHECK(pi.clipped_lower == 0.0);
}

TEST_CASE("model handles drive t_p and the variance") {
  ikm_survival* a = nullptr;
  ikm_survival* b = nullptr;
  ikm_accrual* acc = nullptr;
  REQUIRE(ikm_survival_exponential_median(6.0, &a) == IKM_OK);
  REQUIRE(ikm_survival_scaled(a, 0.65, &b) == IKM_OK);
  REQUIRE(ikm_accrual_uniform(13.0, &acc) == IKM_OK);
  double s = 0;
  CHECK(ikm_survival_eval(a, 6.0, &s) == IKM_OK);
  CHECK(s == doctest::Approx(0.5));

  const ikm_survival* arms[] = {a, b};
  const double weights[] = {0.5, 0.5};
  double tp = 0;
  REQUIRE(ikm_solve_tp(arms, weights, 2, acc, 0.26, &tp) == IKM_OK);
  CHECK(tp == doctest::Approx(9.77).epsilon(1e-3));
  ikm_variance v;
  REQUIRE(ikm_sigma2_two_arm(arms, weights, 2, acc, 0, 0.26, tp, 0.1 * tp, &v) == IKM_OK);
  CHECK(v.total == doctest::Approx(v.term_estimation + v.term_timing + v.term_cross));
  CHECK(ikm_solve_tp(arms, weights, 2, acc, 1.5, &tp) == IKM_ERR_INVALID_ARGUMENT);
  CHECK(ikm_survival_weibull(-1.0, 2.0, &a) == IKM_ERR_INVALID_ARGUMENT);

  ikm_survival_free(const_cast<ikm_survival*>(arms[0]));
  ikm_survival_free(b);
  ikm_accrual_free(acc);
}

TEST_CASE("config entry points") {
  ikm_run_options opts;
  ikm_run_options_init(&opts);
  ikm_result* r = nullptr;
  REQUIRE(ikm_plan_json(read("keynote204.json").c_str(), &opts, &r) == IKM_OK);
  CHECK(std::string(ikm_result_json(r)).find("\"kind\": \"plan\"") != std::string::npos);
  CHECK(std::string(ikm_result_csv(r)).rfind("scenario,", 0) == 0);
  ikm_result_free(r);

  REQUIRE(ikm_design_json(read("table1.json").c_str(), &r) == IKM_OK);
  ikm_result_free(r);

  CHECK(ikm_plan_json("{\"delta\": []}", &opts, &r) == IKM_ERR_INVALID_CONFIG);
  CHECK(r == nullptr);
  CHECK(std::string(ikm_last_error_json()).find("\"path\":\"/delta\"") != std::string::npos);
  CHECK(ikm_plan_json("{not json", &opts, &r) == IKM_ERR_INVALID_CONFIG);
  CHECK(ikm_plan_json(nullptr, &opts, &r) == IKM_ERR_INVALID_ARGUMENT);

  opts.replicates = 20;
  opts.has_seed = 1;
  opts.seed = 3;
  int calls = 0;
  REQUIRE(ikm_simulate_json(read("keynote204.json").c_str(), &opts,
                            [](int, int total, void* user) {
                              CHECK(total == 60);
                              ++*static_cast<int*>(user);
                            },
                            &calls, &r) == IKM_OK);
  CHECK(calls == 60);
  CHECK(ikm_result_passed(r) == 1);
  ikm_result_free(r);
  long long total = 0;
  CHECK(ikm_requested_replicates(read("table3.json").c_str(), nullptr, &total) == IKM_OK);
  CHECK(total == 6000);
}
