#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "ndsim/rng.hpp"

namespace ndsim {

struct NdsParams {
    double alpha;
    double mu = 1.0;
};

enum class DiffusionPolicy { Jsq, Cq, Iqf };

struct DriftSpec {
    DiffusionPolicy policy = DiffusionPolicy::Jsq;
    NdsParams params{0.5, 1.0};

    static DriftSpec jsq(double alpha, double mu = 1.0) {
        return {DiffusionPolicy::Jsq, {alpha, mu}};
    }
    static DriftSpec cq(double alpha, double mu = 1.0) {
        return {DiffusionPolicy::Cq, {alpha, mu}};
    }
    static DriftSpec iqf(double alpha, double mu = 1.0) {
        return {DiffusionPolicy::Iqf, {alpha, mu}};
    }
};

// Drift b(n) of the limiting diffusion, in jobs-per-server per unit time.
// JSQ: mu[(2-n)_+/(n-1) - alpha] for n > 1; IQF: mu[1/(n-1) - alpha] for
// n > 1; CQ: -alpha*mu (reflection handled by the integrator).
double drift(const DriftSpec& spec, double n);

struct SdePath {
    double dt = 0.0;
    std::uint64_t thin = 1;  // one recorded value per `thin` steps
    std::vector<double> values;
    double min_value = 0.0;  // over every step, not just recorded ones
};

struct EulerOptions {
    std::uint64_t thin = 1;
    bool zero_noise = false;  // test hook: Z == 0
    double delta_floor = 1e-9;
};

// Euler-Maruyama with sqrt(2 mu) noise. CQ paths reflect at 1. The singular
// JSQ/IQF pull toward the boundary is handled drift-implicitly (the update
// solves n' = c + dt b_sing(n')), which keeps n' > 1 for every noise draw;
// delta_floor only guards round-off.
SdePath euler_maruyama(const DriftSpec& spec, double n0, double dt, double horizon,
                       RandomStream& stream, const EulerOptions& opts = {});

// Closed forms (support [1, inf), all require alpha > 0).
double normalizer_jsq(double alpha);
double density_jsq(double n, double alpha);
double mean_jsq(double alpha);
double density_cq(double n, double alpha);
double mean_cq(double alpha);
double density_iqf(double n, double alpha);
double mean_iqf(double alpha);

// Piecewise stationary density on [1, infinity).
struct StationaryDensity {
    double support_start = 1.0;
    double truncation = 0.0;  // numeric upper limit used for normalization
    double normalizer = 0.0;  // C such that pdf = C * exp(-V)
    std::function<double(double)> potential;  // V(n), zero at n = 2
    std::function<double(double)> pdf;
};

// Generic Langevin route: density ~ exp(-V) with V' = -drift/mu, normalized
// numerically on [1 + delta, truncation]. Independent of the closed forms.
StationaryDensity density_from_drift(const DriftSpec& spec, double delta = 1e-9,
                                     std::optional<double> truncation = std::nullopt);

struct RatioSupResult {
    double alpha_star;
    double sup_ratio;
};

// sup over alpha in [1e-4, 50] of mean_num(alpha)/mean_den(alpha); log-grid
// bracketing followed by golden-section refinement.
RatioSupResult ratio_sup(DiffusionPolicy numerator, DiffusionPolicy denominator);

// Mean-field Power-of-d per-queue tail: P(queue >= level) = rho^{(d^level - 1)/(d-1)}.
double pod_meanfield_tail(double rho, int level, int d);

struct DominanceResult {
    bool holds;
    double max_violation;
};

// Checks CCDF_a(x) <= CCDF_b(x) + tol for all grid points (a stochastically
// below b). CCDFs are computed by cumulative trapezoid over the grid.
DominanceResult check_stochastic_dominance(const std::function<double(double)>& density_a,
                                           const std::function<double(double)>& density_b,
                                           const std::vector<double>& grid,
                                           double tol = 1e-9);

// Truncation point with tail mass below 1e-26 for all three densities.
double default_truncation(double alpha);

}  // namespace ndsim
