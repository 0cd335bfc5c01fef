#include "ndsim/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ndsim {

void BirthDeathChain::validate() const {
    if (up_rates.empty() || down_rates.size() != up_rates.size())
        throw std::invalid_argument("birth-death chain: need x up rates and x down rates");
    for (double r : up_rates)
        if (!(r > 0)) throw std::invalid_argument("birth-death chain: rates must be positive");
    for (double r : down_rates)
        if (!(r > 0)) throw std::invalid_argument("birth-death chain: rates must be positive");
}

double hitting_probability_linear_solve(const BirthDeathChain& chain) {
    chain.validate();
    const int x = chain.top();
    if (x == 1) return 1.0;
    // (f(n)+g(n)) h_n = f(n) h_{n+1} + g(n) h_{n-1}, h_0 = 0, h_x = 1.
    // Thomas algorithm on the x-1 interior unknowns h_1..h_{x-1}.
    // Extended precision keeps the elimination error well under the 1e-12
    // agreement demanded of the two routes, even for long ill-scaled chains.
    const int m = x - 1;
    std::vector<long double> diag(m), upper(m), rhs(m, 0.0L);
    for (int i = 0; i < m; ++i) {
        int n = i + 1;
        long double f = chain.up_rates[n];       // rate n -> n+1
        long double g = chain.down_rates[n - 1];  // rate n -> n-1
        diag[i] = f + g;
        upper[i] = -f;
        if (n + 1 == x) {
            rhs[i] = f;
            upper[i] = 0.0L;
        }
        if (i > 0) {
            // lower coefficient is -g; eliminate against previous row
            long double w = -g / diag[i - 1];
            diag[i] -= w * upper[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
    }
    std::vector<long double> h(m);
    h[m - 1] = rhs[m - 1] / diag[m - 1];
    for (int i = m - 2; i >= 0; --i) h[i] = (rhs[i] - upper[i] * h[i + 1]) / diag[i];
    return static_cast<double>(h[0]);
}

double hitting_probability(const BirthDeathChain& chain) {
    chain.validate();
    const int x = chain.top();
    double denom = 0.0;
    double prod = 1.0;  // prod_{m=1}^{n-1} g(m)/f(m)
    for (int n = 1; n <= x; ++n) {
        denom += prod;
        if (n < x) prod *= chain.down_rates[n - 1] / chain.up_rates[n];
    }
    double closed = 1.0 / denom;
    double solved = hitting_probability_linear_solve(chain);
    if (std::abs(closed - solved) > 1e-12 * std::max(1.0, std::abs(closed)))
        throw std::runtime_error("hitting_probability: closed form and linear solve disagree");
    return closed;
}

MmkResult mmk_stationary(double lambda, double mu, int k, int cap) {
    if (!(lambda > 0) || !(mu > 0) || k < 1)
        throw std::invalid_argument("mmk_stationary: bad parameters");
    if (lambda >= k * mu)
        throw std::invalid_argument("mmk_stationary: unstable (lambda >= k mu)");

    // log pi(n+1) = log pi(n) + log lambda - log(mu min(n+1, k)), pi(0) = 1.
    std::vector<double> logpi{0.0};
    const double log_rho_tail = std::log(lambda / (k * mu));
    auto extend = [&](int upto) {
        while (static_cast<int>(logpi.size()) <= upto) {
            int n = static_cast<int>(logpi.size());
            logpi.push_back(logpi.back() + std::log(lambda) -
                            std::log(mu * std::min(n, k)));
        }
    };
    if (cap > 0) {
        extend(cap);
    } else {
        extend(k);
        // Beyond k the terms decay geometrically; stop once the remaining
        // geometric tail is below 1e-12 of the running mass.
        double max_log = *std::max_element(logpi.begin(), logpi.end());
        while (true) {
            int n = static_cast<int>(logpi.size());
            double next = logpi.back() + log_rho_tail;
            double tail = std::exp(next - max_log) / (1.0 - lambda / (k * mu));
            double mass = 0.0;
            for (double lp : logpi) mass += std::exp(lp - max_log);
            if (tail < 1e-12 * mass && n > k + 2) break;
            logpi.push_back(next);
        }
    }

    double max_log = *std::max_element(logpi.begin(), logpi.end());
    double z = 0.0;
    for (double lp : logpi) z += std::exp(lp - max_log);
    MmkResult out;
    out.pmf.resize(logpi.size());
    out.mean = 0.0;
    for (std::size_t n = 0; n < logpi.size(); ++n) {
        out.pmf[n] = std::exp(logpi[n] - max_log) / z;
        out.mean += static_cast<double>(n) * out.pmf[n];
    }
    return out;
}

double excursion_tail_bound(const ExcursionStats& stats, double t, bool squared) {
    double gap = std::sqrt(stats.service) - std::sqrt(stats.arrival);
    double exponent = squared ? gap * gap * t : gap * t;
    return std::sqrt(stats.service / stats.arrival) * std::exp(-exponent);
}

double excursion_area_center(const ExcursionStats& stats) {
    return stats.arrival / (stats.service - stats.arrival);
}

double poisson_tail_bound(double mean, double x) {
    if (!(mean > 0)) throw std::invalid_argument("poisson_tail_bound: mean must be positive");
    constexpr double e2 = 7.38905609893065;
    if (x < mean * e2)
        throw std::domain_error("poisson_tail_bound: requires x >= mean * e^2");
    return std::exp(-x - mean);
}

}  // namespace ndsim
