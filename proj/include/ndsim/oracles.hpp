#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace ndsim {

// Finite birth-death chain on {0..x}: up_rates[n] is the rate n -> n+1 for
// n in {0..x-1}, down_rates[n-1] the rate n -> n-1 for n in {1..x}.
struct BirthDeathChain {
    std::vector<double> up_rates;
    std::vector<double> down_rates;

    int top() const { return static_cast<int>(up_rates.size()); }
    void validate() const;
};

// Probability of hitting x before 0, started from state 1:
// 1 / sum_{n=1}^x prod_{m=1}^{n-1} g(m)/f(m). The closed form is cross
// checked internally against a first-step-equation linear solve.
double hitting_probability(const BirthDeathChain& chain);

// The first-step linear system solved directly (tridiagonal); exposed so
// tests can compare the two routes independently.
double hitting_probability_linear_solve(const BirthDeathChain& chain);

struct MmkResult {
    std::vector<double> pmf;  // stationary law on {0..cap}
    double mean;
};

// Exact M/M/k stationary distribution via detailed balance, computed in log
// space. cap = 0 auto-extends until the tail mass is below 1e-12.
MmkResult mmk_stationary(double lambda, double mu, int k, int cap = 0);

// M/M/1 excursion statistics (arrival < service rate).
struct ExcursionStats {
    double arrival;
    double service;

    ExcursionStats(double arrival_rate, double service_rate)
        : arrival(arrival_rate), service(service_rate) {
        if (!(arrival > 0) || !(service > arrival))
            throw std::invalid_argument("excursion stats require 0 < arrival < service");
    }

    // Log-MGF of the net-input process.
    double phi(double theta) const {
        return arrival * (std::exp(theta) - 1.0) + service * (std::exp(-theta) - 1.0);
    }
    double theta_star() const { return 0.5 * std::log(service / arrival); }
};

// Tail bound for the renewal-cycle length from queue length 1 back to 0:
// sqrt(service/arrival) * exp(-(sqrt(service)-sqrt(arrival))^2 t). The
// unsquared-exponent variant is kept for reference; the squared form is the
// one the derivation supports.
double excursion_tail_bound(const ExcursionStats& stats, double t, bool squared = true);

// Centering constant c with E[ int_0^T (Q(s) - c) ds ] = 0 over a renewal
// cycle from empty to empty: arrival/(service - arrival).
double excursion_area_center(const ExcursionStats& stats);

// Poisson tail bound exp(-x - mean), valid for x >= mean * e^2.
double poisson_tail_bound(double mean, double x);

}  // namespace ndsim
