#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ndsim/oracles.hpp"
#include "ndsim/rng.hpp"

using namespace ndsim;

namespace {

BirthDeathChain constant_chain(double up, double down, int x) {
    BirthDeathChain c;
    c.up_rates.assign(x, up);
    c.down_rates.assign(x, down);
    return c;
}

// Exact Poisson upper tail P(X >= x) by direct pmf summation in log space.
double poisson_tail_exact(double mean, int x) {
    double log_p = -mean + x * std::log(mean) - std::lgamma(x + 1.0);
    double p = std::exp(log_p);
    double total = 0.0;
    for (int n = x; p > 0.0 && total + p != total; ++n) {
        total += p;
        p *= mean / (n + 1);
    }
    return total;
}

}  // namespace

TEST_CASE("gambler's ruin with symmetric rates") {
    // f == g: hitting x before 0 from 1 has probability 1/x.
    CHECK(hitting_probability(constant_chain(1.0, 1.0, 4)) ==
          doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("biased chain closed form") {
    // f == 2, g == 1, x = 3: 1/(1 + 1/2 + 1/4) = 4/7.
    CHECK(hitting_probability(constant_chain(2.0, 1.0, 3)) ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-12));
}

TEST_CASE("chain validation") {
    BirthDeathChain bad;
    bad.up_rates = {1.0, 0.0};
    bad.down_rates = {1.0, 1.0};
    CHECK_THROWS_AS(hitting_probability(bad), std::invalid_argument);
    BirthDeathChain mismatched;
    mismatched.up_rates = {1.0, 1.0};
    mismatched.down_rates = {1.0};
    CHECK_THROWS_AS(hitting_probability(mismatched), std::invalid_argument);
    CHECK_THROWS_AS(hitting_probability(constant_chain(1.0, 1.0, 0)),
                    std::invalid_argument);
}

TEST_CASE("closed form agrees with the first-step linear solve on random chains") {
    RandomStream s(314, 0);
    for (int trial = 0; trial < 200; ++trial) {
        int x = 2 + static_cast<int>(s.uniform_below(30));
        BirthDeathChain c;
        for (int n = 0; n < x; ++n) {
            c.up_rates.push_back(0.1 + 5.0 * s.uniform());
            c.down_rates.push_back(0.1 + 5.0 * s.uniform());
        }
        double a = hitting_probability(c);
        double b = hitting_probability_linear_solve(c);
        CHECK(a == doctest::Approx(b).epsilon(1e-10));
        CHECK(a > 0.0);
        CHECK(a <= 1.0);
    }
}

TEST_CASE("hitting probability against Monte Carlo") {
    auto c = constant_chain(1.0, 2.0, 5);
    double p = hitting_probability(c);
    RandomStream s(2718, 0);
    const int trials = 400'000;
    int hits = 0;
    for (int t = 0; t < trials; ++t) {
        int state = 1;
        while (state > 0 && state < 5)
            state += (s.uniform() < 1.0 / 3.0) ? 1 : -1;  // up rate 1 vs down 2
        hits += (state == 5);
    }
    double mc = static_cast<double>(hits) / trials;
    CHECK(p == doctest::Approx(mc).epsilon(0.03));
}

TEST_CASE("M/M/k stationary law basics") {
    auto r = mmk_stationary(0.5, 1.0, 1);
    // M/M/1 at rho = 0.5: geometric, mean rho/(1-rho) = 1.
    CHECK(r.mean == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.pmf[0] == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(r.pmf[3] == doctest::Approx(0.5 * std::pow(0.5, 3.0)).epsilon(1e-10));

    auto mmk = mmk_stationary(3.4, 1.0, 4);
    double mass = 0.0;
    for (double p : mmk.pmf) mass += p;
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
    // Detailed balance: pi(n) lambda = pi(n+1) mu min(n+1, k).
    for (std::size_t n = 0; n + 1 < mmk.pmf.size() && mmk.pmf[n + 1] > 1e-300; ++n) {
        double flow_up = mmk.pmf[n] * 3.4;
        double flow_down = mmk.pmf[n + 1] * std::min<double>(n + 1, 4) * 1.0;
        CHECK(flow_up == doctest::Approx(flow_down).epsilon(1e-12));
    }
    CHECK_THROWS_AS(mmk_stationary(4.0, 1.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(mmk_stationary(5.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("M/M/k mean matches Erlang-C arithmetic") {
    // E[N] = k rho + rho/(1-rho) * C(k, lambda/mu) with rho = lambda/(k mu).
    const double lambda = 3.4, mu = 1.0;
    const int k = 4;
    const double a = lambda / mu, rho = a / k;
    double erlang_b = 1.0;
    for (int n = 1; n <= k; ++n) erlang_b = a * erlang_b / (n + a * erlang_b);
    double erlang_c = erlang_b / (1.0 - rho + rho * erlang_b);
    double expected = k * rho + rho / (1.0 - rho) * erlang_c;
    CHECK(mmk_stationary(lambda, mu, k).mean == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("poisson tail bound dominates the exact tail") {
    CHECK(poisson_tail_bound(1.0, 8.0) == doctest::Approx(std::exp(-9.0)).epsilon(1e-12));
    CHECK_THROWS_AS(poisson_tail_bound(1.0, 7.0), std::domain_error);  // x < mean e^2

    RandomStream s(555, 0);
    for (int trial = 0; trial < 500; ++trial) {
        double mean = 0.05 + 3.0 * s.uniform();
        double x = mean * std::exp(2.0) * (1.0 + 4.0 * s.uniform());
        double bound = poisson_tail_bound(mean, x);
        double exact = poisson_tail_exact(mean, static_cast<int>(std::ceil(x)));
        CHECK(exact <= bound * (1.0 + 1e-9));
    }
}

TEST_CASE("excursion statistics") {
    ExcursionStats st(1.0, 4.0);
    CHECK(st.theta_star() == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-12));
    // phi at theta*: 1*(2-1) + 4*(1/2-1) = -1 = -(sqrt(4)-sqrt(1))^2.
    CHECK(st.phi(st.theta_star()) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(excursion_tail_bound(st, 3.0) == doctest::Approx(2.0 * std::exp(-3.0)).epsilon(1e-12));
    double unsquared = excursion_tail_bound(st, 3.0, false);
    CHECK(unsquared == doctest::Approx(2.0 * std::exp(-3.0 * (2.0 - 1.0))).epsilon(1e-12));
    CHECK_THROWS_AS(ExcursionStats(2.0, 1.0), std::invalid_argument);
}

TEST_CASE("excursion tail bound dominates Monte Carlo cycle lengths") {
    const double arrival = 1.0, service = 4.0;
    ExcursionStats st(arrival, service);
    RandomStream s(777, 0);
    const int cycles = 200'000;
    std::vector<double> ts{1.0, 2.0, 4.0};
    std::vector<int> exceed(ts.size(), 0);
    for (int c = 0; c < cycles; ++c) {
        // Busy-period length started from one job.
        int q = 1;
        double t = 0.0;
        while (q > 0) {
            t += s.exponential(arrival + service);
            q += (s.uniform() < arrival / (arrival + service)) ? 1 : -1;
        }
        for (std::size_t i = 0; i < ts.size(); ++i) exceed[i] += (t > ts[i]);
    }
    for (std::size_t i = 0; i < ts.size(); ++i) {
        double mc = static_cast<double>(exceed[i]) / cycles;
        CHECK(mc <= excursion_tail_bound(st, ts[i]) * (1.0 + 0.02) + 1e-4);
    }
}

TEST_CASE("excursion area centering constant zeroes the cycle integral") {
    const double arrival = 1.0, service = 3.0;
    ExcursionStats st(arrival, service);
    double c = excursion_area_center(st);
    CHECK(c == doctest::Approx(0.5).epsilon(1e-12));  // arrival/(service - arrival)

    // Monte Carlo over full empty-to-empty renewal cycles (idle stretch plus
    // busy period): E[int (Q - c) ds] must vanish at c and only at c.
    RandomStream s(888, 0);
    const int cycles = 400'000;
    double area = 0.0, length = 0.0;
    for (int cyc = 0; cyc < cycles; ++cyc) {
        double t = s.exponential(arrival);  // idle wait for the first arrival
        int q = 1;
        while (q > 0) {
            double dt = s.exponential(arrival + service);
            area += q * dt;
            t += dt;
            q += (s.uniform() < arrival / (arrival + service)) ? 1 : -1;
        }
        length += t;
    }
    CHECK(area / length == doctest::Approx(c).epsilon(0.01));
}
