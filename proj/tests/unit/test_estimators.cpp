#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "core/errors.hpp"
#include "core/estimators.hpp"
#include "core/rng.hpp"
#include "core/survival_models.hpp"

using namespace interimkm;

namespace {

std::vector<PatientRecord> cohort(const std::vector<double>& entries, const std::vector<double>& times) {
  std::vector<PatientRecord> out;
  for (std::size_t i = 0; i < entries.size(); ++i) out.push_back({0, entries[i], times[i], 0.0, false});
  return out;
}

const std::vector<Observation> small = {{1, true}, {2, false}, {3, true}};

}  // namespace

TEST_CASE("interim cut by hand") {
  const auto c = cohort({0, 1, 2, 3}, {5, 1, 4, 2});
  const auto d = interim_cut(c, 0.5);
  CHECK(d.t_hat == 5.0);
  CHECK(d.events == 3);  // the tie at 5 counts
  CHECK(d.records.size() == 4);
  for (const auto& r : d.records) {
    CHECK(r.entry < d.t_hat);
    CHECK(r.observed_time <= d.t_hat - r.entry);
  }
  CHECK(interim_cut(c, 0.25).t_hat == 2.0);
  // entrants at 2 and 3 are excluded when the cut falls at 2
  CHECK(interim_cut(c, 0.25).records.size() == 2);
}

TEST_CASE("interim cut failures") {
  const auto c = cohort({0, 1, 2, 3}, {5, 1, 4, 2});
  try {
    interim_cut(c, 0.75, 4.5);
    FAIL("expected insufficient events");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::insufficient_events);
    CHECK(std::string(e.what()).find("0.25") != std::string::npos);
  }
  CHECK_THROWS_AS(interim_cut({}, 0.5), Error);
}

TEST_CASE("interim cut always observes ceil(pN) events") {
  const auto s = SurvivalModel::exponential_median(8.0);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const int n = 20 + rep % 97;
    std::vector<PatientRecord> c;
    for (int i = 0; i < n; ++i) c.push_back({i % 2, 12.0 * u(gen), s.quantile(u(gen)), 0.0, false});
    const double p = 0.05 + 0.9 * u(gen);
    const auto d = interim_cut(c, p);
    CHECK(d.events == static_cast<int>(std::ceil(p * n - 1e-9)));
    CHECK(d.n_included[0] + d.n_included[1] == static_cast<int>(d.records.size()));
  }
}

TEST_CASE("empirical subdistributions") {
  const std::vector<Observation> all = {{1, true}, {2, true}, {3, true}, {4, true}};
  CHECK(empirical_subdistributions(all).h_uc(2.5) == 0.5);
  const std::vector<Observation> none = {{1, false}, {2, false}};
  CHECK(empirical_subdistributions(none).h_uc(5.0) == 0.0);
  CHECK(empirical_subdistributions(none).h(5.0) == 1.0);
  const auto e = empirical_subdistributions(small);
  CHECK(e.h(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(e.h_uc(2.0) == doctest::Approx(1.0 / 3.0));
  CHECK(e.h_uc.quantile(0.5) == 3.0);
  CHECK(e.h_uc.quantile(0.3) == 1.0);
  CHECK(e.h_uc(0.99) == 0.0);
}

TEST_CASE("hazard and survival estimators by hand") {
  CHECK(nelson_aalen(small, 3.0) == doctest::Approx(4.0 / 3.0));
  CHECK(nelson_aalen(small, 0.5) == 0.0);
  CHECK(breslow(small, 3.0) == doctest::Approx(0.263597138115727).epsilon(1e-14));
  CHECK(breslow(small, 0.0) == 1.0);
  CHECK(kaplan_meier(small, 3.0) == 0.0);
  CHECK(kaplan_meier(small, 2.5) == doctest::Approx(2.0 / 3.0));
  const std::vector<Observation> three = {{1, true}, {2, true}, {3, true}};
  CHECK(kaplan_meier(three, 2.5) == 1.0 / 3.0);
  const ProductLimit pl(small);
  CHECK(pl.kaplan_meier(1.0) == doctest::Approx(2.0 / 3.0));  // right-continuous
  CHECK(pl.beyond_support(3.5));
  CHECK_FALSE(pl.beyond_support(3.0));
}

TEST_CASE("events precede censorings at tied times") {
  const std::vector<Observation> tied = {{2, false}, {2, true}, {4, true}};
  // risk set at 2 holds all three
  CHECK(kaplan_meier(tied, 2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(kaplan_meier(tied, 4.0) == 0.0);
}

TEST_CASE("without censoring the product limit is the empirical survival") {
  std::mt19937_64 gen(5);
  std::exponential_distribution<double> ex(0.2);
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 5 + rep * 7;
    std::vector<Observation> obs;
    for (int i = 0; i < n; ++i) obs.push_back({ex(gen), true});
    obs.push_back(obs[rep % n]);  // one tie
    const ProductLimit pl(obs);
    const double size = static_cast<double>(obs.size());
    for (const auto& o : obs) {
      const auto alive = std::count_if(obs.begin(), obs.end(), [&](const Observation& x) { return x.time > o.time; });
      CHECK(pl.kaplan_meier(o.time) == static_cast<double>(alive) / size);
      CHECK(pl.breslow(o.time) >= pl.kaplan_meier(o.time));
    }
  }
}

TEST_CASE("KM at the interim time equals 1 - k/n without censoring") {
  const auto s = SurvivalModel::weibull(1.2, 7.0);
  for (int rep = 0; rep < 200; ++rep) {
    CounterStream rng(17, rep);
    const int n = 30 + rep;
    std::vector<PatientRecord> c;
    for (int i = 0; i < n; ++i) c.push_back({0, 0.0, s.quantile(rng.uniform()), 0.0, false});
    const double p = 0.1 + 0.8 * rng.uniform();
    const auto d = interim_cut(c, p);
    const auto obs = d.observations(0);
    const int k = static_cast<int>(std::ceil(p * n - 1e-9));
    CHECK(ProductLimit(obs).kaplan_meier(d.t_hat) == static_cast<double>(n - k) / n);
  }
}

TEST_CASE("KM and Breslow agree with large risk sets") {
  std::mt19937_64 gen(9);
  std::exponential_distribution<double> ex(0.1), cens(0.05);
  std::vector<Observation> obs;
  for (int i = 0; i < 400; ++i) {
    const double t = ex(gen), c = cens(gen);
    obs.push_back({std::min(t, c), t <= c});
  }
  const ProductLimit pl(obs);
  for (std::size_t i = 0; i < pl.event_times().size(); ++i) {
    if (pl.at_risk()[i] < 20) break;
    const double t = pl.event_times()[i];
    CHECK(std::abs(pl.kaplan_meier(t) - pl.breslow(t)) <= 1.0 / pl.at_risk()[i]);
  }
}

TEST_CASE("estimators ignore record order") {
  std::mt19937_64 gen(13);
  std::exponential_distribution<double> ex(0.3);
  std::vector<Observation> obs;
  for (int i = 0; i < 60; ++i) obs.push_back({std::round(ex(gen) * 4) / 4, i % 3 != 0});
  const ProductLimit a(obs);
  std::shuffle(obs.begin(), obs.end(), gen);
  const ProductLimit b(obs);
  for (double t = 0; t < 10; t += 0.1) {
    CHECK(a.kaplan_meier(t) == b.kaplan_meier(t));
    CHECK(a.nelson_aalen(t) == b.nelson_aalen(t));
  }
}

TEST_CASE("Nelson-Aalen is consistent") {
  std::mt19937_64 gen(21);
  std::exponential_distribution<double> ex(0.1);
  std::vector<Observation> obs;
  for (int i = 0; i < 10000; ++i) obs.push_back({ex(gen), true});
  CHECK(std::abs(nelson_aalen(obs, 5.0) - 0.5) <= 0.03);
}

TEST_CASE("datasets round-trip through CSV") {
  const auto d = interim_cut(cohort({0, 1, 2, 3}, {5, 1, 4, 2.125}), 0.5);
  const auto back = dataset_from_csv(dataset_to_csv(d));
  REQUIRE(back.records.size() == d.records.size());
  for (std::size_t i = 0; i < d.records.size(); ++i) {
    CHECK(back.records[i].entry == d.records[i].entry);
    CHECK(back.records[i].observed_time == d.records[i].observed_time);
    CHECK(back.records[i].event == d.records[i].event);
  }
  CHECK(back.events == d.events);
  CHECK_THROWS_AS(dataset_from_csv("arm,entry,observed_time,event\n0,1,x,1\n"), Error);
}
