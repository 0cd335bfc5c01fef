#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "ndsim/experiments.hpp"
#include "ndsim/oracles.hpp"
#include "ndsim/sim_core.hpp"

using namespace ndsim;

namespace {

SimConfig base_config(int k, double lambda) {
    SimConfig cfg;
    cfg.k = k;
    cfg.lambda = lambda;
    cfg.mu = 1.0;
    cfg.service_dist = ServiceDistribution::exponential(1.0);
    cfg.horizon_arrivals = 200'000;
    cfg.seed = 1;
    return cfg;
}

}  // namespace

TEST_CASE("ctmc rejects non-exponential service") {
    auto cfg = base_config(2, 1.0);
    cfg.service_dist = ServiceDistribution::preset("det");
    CHECK_THROWS_AS(run_ctmc(cfg), std::invalid_argument);
}

TEST_CASE("zero horizon is an error") {
    auto cfg = base_config(2, 1.0);
    cfg.horizon_arrivals = 0;
    CHECK_THROWS_AS(run_ctmc(cfg), std::invalid_argument);
    CHECK_THROWS_AS(run_event_driven(cfg), std::invalid_argument);
}

TEST_CASE("M/M/1 mean via CQ policy") {
    auto cfg = base_config(1, 0.5);
    cfg.policy = Policy::cq();
    cfg.horizon_arrivals = 2'000'000;
    auto m = run_ctmc(cfg);
    CHECK(m.time_avg_N == doctest::Approx(1.0).epsilon(0.05));  // rho/(1-rho)
    CHECK_FALSE(m.stability_warning);
}

TEST_CASE("near-empty system limit") {
    auto cfg = base_config(2, 1e-6);
    cfg.policy = Policy::jsq();
    cfg.horizon_arrivals = 5'000;
    auto m = run_ctmc(cfg);
    CHECK(m.time_avg_I == doctest::Approx(2.0).epsilon(0.01));
    CHECK(m.time_avg_N < 0.01);
}

TEST_CASE("unstable CQ run is flagged") {
    auto cfg = base_config(2, 2.5);
    cfg.policy = Policy::cq();
    cfg.horizon_arrivals = 20'000;
    CHECK(run_ctmc(cfg).stability_warning);
}

TEST_CASE("identical config gives bit-identical metrics") {
    auto cfg = base_config(4, 3.5);
    cfg.policy = Policy::jsq();
    cfg.horizon_arrivals = 100'000;
    auto a = run_ctmc(cfg);
    auto b = run_ctmc(cfg);
    CHECK(a.time_avg_N == b.time_avg_N);
    CHECK(a.time_avg_I == b.time_avg_I);
    CHECK(a.ssc_sup == b.ssc_sup);
    CHECK(a.nhat_time == b.nhat_time);

    cfg.discipline = Discipline::PS;
    auto c = run_event_driven(cfg);
    auto d = run_event_driven(cfg);
    CHECK(c.time_avg_N == d.time_avg_N);
    CHECK(c.nhat_time == d.nhat_time);
}

TEST_CASE("occupancy fractions sum to one and bins integrate to the mean") {
    auto cfg = base_config(8, 6.5);
    cfg.policy = Policy::pod(2);
    auto m = run_ctmc(cfg);
    double total = 0.0;
    for (double f : m.occupancy) total += f;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(m.mean_nhat_from_bins() * cfg.k ==
          doctest::Approx(m.time_avg_N).epsilon(0.01));  // bin-center discretization
}

TEST_CASE("engines agree on E[N] for exponential FIFO across policies") {
    for (auto policy : {Policy::jsq(), Policy::random(), Policy::pod(2), Policy::iqf(),
                        Policy::i1f(), Policy::cq()}) {
        std::vector<double> ctmc_e, event_e;
        for (int rep = 0; rep < 5; ++rep) {
            auto cfg = base_config(4, 3.4);
            cfg.policy = policy;
            cfg.horizon_arrivals = 400'000;
            cfg.seed = 100 + rep;
            ctmc_e.push_back(run_ctmc(cfg).time_avg_N);
            event_e.push_back(run_event_driven(cfg).time_avg_N);
        }
        auto a = batch_means(ctmc_e);
        auto b = batch_means(event_e);
        INFO("policy ", policy.name());
        CHECK(std::abs(a.estimate - b.estimate) <= a.ci_halfwidth + b.ci_halfwidth);
    }
}

TEST_CASE("event-driven FIFO vs PS identical law for exponential jobs") {
    std::vector<double> fifo_e, ps_e;
    for (int rep = 0; rep < 5; ++rep) {
        auto cfg = base_config(4, 3.4);
        cfg.policy = Policy::jsq();
        cfg.horizon_arrivals = 300'000;
        cfg.seed = 300 + rep;
        cfg.discipline = Discipline::FIFO;
        fifo_e.push_back(run_event_driven(cfg).time_avg_N);
        cfg.discipline = Discipline::PS;
        ps_e.push_back(run_event_driven(cfg).time_avg_N);
    }
    auto a = batch_means(fifo_e);
    auto b = batch_means(ps_e);
    CHECK(std::abs(a.estimate - b.estimate) <= a.ci_halfwidth + b.ci_halfwidth);
}

TEST_CASE("LWL runs in the event engine and balances work") {
    auto cfg = base_config(2, 1.8);
    cfg.policy = Policy::lwl();
    cfg.discipline = Discipline::PS;
    cfg.horizon_arrivals = 200'000;
    auto m = run_event_driven(cfg);
    CHECK(m.time_avg_N > 0.0);
    CHECK(std::isfinite(m.time_avg_N));
}

TEST_CASE("ssc deviation metric formula") {
    MetricsAccumulator acc(2);
    // all-empty epoch: N̂ = 0, M̂_1 = 0 -> deviation 2
    std::array<std::int64_t, 3> empty{2, 0, 0};
    acc.observe(1.0, 0, 2, empty);
    CHECK(ssc_deviation(acc.finalize()) == doctest::Approx(2.0));

    // balanced N = 1.5k with half the servers at 1 and half at 2 -> 0
    MetricsAccumulator acc2(2);
    std::array<std::int64_t, 3> balanced{0, 1, 1};
    acc2.observe(1.0, 3, 0, balanced);
    CHECK(ssc_deviation(acc2.finalize()) == doctest::Approx(0.0));
}

TEST_CASE("idle conditional mean aggregation") {
    MetricsAccumulator acc(100);
    std::array<std::int64_t, 1> dummy{100};
    // N̂ = 1.5 for 2 time units with I = 1, N̂ = 2.5 for 1 unit with I = 0.
    acc.observe(2.0, 150, 1, dummy);
    acc.observe(1.0, 250, 0, dummy);
    auto t = acc.finalize();
    std::vector<double> edges{1.4, 1.6, 1.8, 2.0};
    auto bins = idle_conditional_mean(t, edges);
    REQUIRE(bins.size() == 3);
    CHECK(bins[0].has_value());
    CHECK(*bins[0] == doctest::Approx(1.0));
    CHECK_FALSE(bins[1].has_value());  // empty bin marked missing
    std::vector<double> above{2.0, 3.0};
    auto high = idle_conditional_mean(t, above);
    CHECK(*high[0] == doctest::Approx(0.0));
}

TEST_CASE("trace sampler emits decimated rows") {
    auto cfg = base_config(2, 1.5);
    cfg.policy = Policy::jsq();
    cfg.horizon_arrivals = 20'000;
    int rows = 0;
    std::int64_t last_n = -1;
    TraceSampler sampler{5.0, [&](double, std::int64_t n, std::int64_t i, std::int64_t m1,
                                  std::int64_t ge3) {
                             ++rows;
                             last_n = n;
                             CHECK(i >= 0);
                             CHECK(m1 >= 0);
                             CHECK(ge3 >= 0);
                         }};
    run_ctmc(cfg, sampler);
    CHECK(rows > 100);
    CHECK(last_n >= 0);
}
