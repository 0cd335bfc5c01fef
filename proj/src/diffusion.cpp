#include "ndsim/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "ndsim/quadrature.hpp"

namespace ndsim {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0)) throw std::invalid_argument("alpha must be positive");
}

}  // namespace

double drift(const DriftSpec& spec, double n) {
    const double alpha = spec.params.alpha;
    const double mu = spec.params.mu;
    switch (spec.policy) {
        case DiffusionPolicy::Cq:
            if (n < 1.0) throw std::domain_error("CQ drift defined for n >= 1");
            return -alpha * mu;
        case DiffusionPolicy::Jsq:
            if (n <= 1.0) throw std::domain_error("JSQ drift defined for n > 1");
            return mu * (std::max(2.0 - n, 0.0) / (n - 1.0) - alpha);
        case DiffusionPolicy::Iqf:
            if (n <= 1.0) throw std::domain_error("IQF drift defined for n > 1");
            return mu * (1.0 / (n - 1.0) - alpha);
    }
    throw std::logic_error("unreachable");
}

SdePath euler_maruyama(const DriftSpec& spec, double n0, double dt, double horizon,
                       RandomStream& stream, const EulerOptions& opts) {
    if (!(dt > 0)) throw std::invalid_argument("euler_maruyama: dt must be positive");
    const bool reflecting = spec.policy == DiffusionPolicy::Cq;
    const double floor = reflecting ? 1.0 : 1.0 + opts.delta_floor;
    if (n0 < floor) throw std::invalid_argument("euler_maruyama: n0 outside domain");

    const double sigma = std::sqrt(2.0 * spec.params.mu * dt);
    const auto steps = static_cast<std::uint64_t>(horizon / dt);
    SdePath path;
    path.dt = dt;
    path.thin = opts.thin;
    path.values.reserve(steps / opts.thin + 1);
    path.min_value = n0;
    path.values.push_back(n0);

    const double mu = spec.params.mu;
    const double alpha = spec.params.alpha;
    const double h = mu * dt;

    double n = n0;
    for (std::uint64_t i = 0; i < steps; ++i) {
        double z = opts.zero_noise ? 0.0 : stream.normal();
        // Explicit part: regular drift terms plus noise.
        double c = n - alpha * mu * dt + sigma * z;
        switch (spec.policy) {
            case DiffusionPolicy::Cq:
                n = c;
                break;
            case DiffusionPolicy::Jsq:
                // The singular pull (2-n)_+/(n-1) is taken implicitly:
                // n' = c + h (2-n')/(n'-1) for n' < 2. The positive root stays
                // strictly above 1 for any noise, matching the Bessel-like
                // repulsion of the true diffusion.
                if (c >= 2.0) {
                    n = c;
                } else {
                    double s = 1.0 + c - h;
                    n = 0.5 * (s + std::sqrt(s * s - 4.0 * (c - 2.0 * h)));
                }
                break;
            case DiffusionPolicy::Iqf:
                // n' = c + h/(n'-1); the discriminant is always positive.
                n = 0.5 * (1.0 + c +
                           std::sqrt((1.0 - c) * (1.0 - c) + 4.0 * h));
                break;
        }
        if (n < floor) n = floor;  // CQ reflection / round-off safety
        if (std::isnan(n))
            throw std::runtime_error("euler_maruyama: NaN at step " + std::to_string(i));
        if (n < path.min_value) path.min_value = n;
        if ((i + 1) % opts.thin == 0) path.values.push_back(n);
    }
    return path;
}

double normalizer_jsq(double alpha) {
    check_alpha(alpha);
    double inv = 1.0 / (alpha * (1.0 + alpha) * (1.0 + alpha)) +
                 std::exp(1.0 + alpha) / ((1.0 + alpha) * (1.0 + alpha));
    return 1.0 / inv;
}

double density_jsq(double n, double alpha) {
    check_alpha(alpha);
    if (n < 1.0) return 0.0;
    double c = normalizer_jsq(alpha);
    if (n >= 2.0) return c * std::exp(-alpha * (n - 2.0));
    return c * (n - 1.0) * std::exp(-(alpha + 1.0) * (n - 2.0));
}

double mean_jsq(double alpha) {
    check_alpha(alpha);
    double ap1 = 1.0 + alpha;
    double c = normalizer_jsq(alpha);
    return 1.0 + c * ((alpha * alpha + 4.0 * alpha + 1.0) / (alpha * alpha * ap1 * ap1 * ap1) +
                      2.0 * std::exp(alpha + 1.0) / (ap1 * ap1 * ap1));
}

double density_cq(double n, double alpha) {
    check_alpha(alpha);
    if (n < 1.0) return 0.0;
    return alpha * std::exp(-alpha * (n - 1.0));
}

double mean_cq(double alpha) {
    check_alpha(alpha);
    return 1.0 + 1.0 / alpha;
}

double density_iqf(double n, double alpha) {
    check_alpha(alpha);
    if (n < 1.0) return 0.0;
    return alpha * alpha * (n - 1.0) * std::exp(-alpha * (n - 1.0));
}

double mean_iqf(double alpha) {
    check_alpha(alpha);
    return 1.0 + 2.0 / alpha;
}

double default_truncation(double alpha) {
    return 1.0 + 60.0 / std::min(alpha, alpha + 1.0);
}

StationaryDensity density_from_drift(const DriftSpec& spec, double delta,
                                     std::optional<double> truncation) {
    const double alpha = spec.params.alpha;
    const double mu = spec.params.mu;
    check_alpha(alpha);
    const double lo = (spec.policy == DiffusionPolicy::Cq ? 1.0 : 1.0 + delta);
    const double hi = truncation.value_or(default_truncation(alpha));

    // V(n) = -int_2^n drift(u)/mu du; the integrand kinks at 2 (JSQ).
    auto v = [spec, mu, lo](double n) {
        double x = std::max(n, lo);
        auto integrand = [&](double u) { return -drift(spec, std::max(u, lo)) / mu; };
        return integrate_split(integrand, 2.0, x, {}, 1e-13);
    };

    auto unnormalized = [v](double n) { return std::exp(-v(n)); };
    double z = integrate_split(unnormalized, lo, hi, {2.0}, 1e-12);
    if (!(z > 0) || !std::isfinite(z))
        throw std::runtime_error("density_from_drift: divergent normalizer");

    StationaryDensity d;
    d.support_start = 1.0;
    d.truncation = hi;
    d.normalizer = 1.0 / z;
    d.potential = v;
    d.pdf = [v, z, lo, hi](double n) {
        if (n < lo || n > hi) return 0.0;
        return std::exp(-v(n)) / z;
    };
    return d;
}

namespace {

double policy_mean(DiffusionPolicy p, double alpha) {
    switch (p) {
        case DiffusionPolicy::Jsq: return mean_jsq(alpha);
        case DiffusionPolicy::Cq: return mean_cq(alpha);
        case DiffusionPolicy::Iqf: return mean_iqf(alpha);
    }
    throw std::logic_error("unreachable");
}

}  // namespace

RatioSupResult ratio_sup(DiffusionPolicy numerator, DiffusionPolicy denominator) {
    auto ratio = [&](double alpha) {
        return policy_mean(numerator, alpha) / policy_mean(denominator, alpha);
    };

    // Bracket on a log-spaced grid, then golden-section refine.
    const double lo = 1e-4, hi = 50.0;
    const int grid = 200;
    double best_a = lo, best_r = ratio(lo);
    int best_i = 0;
    for (int i = 1; i < grid; ++i) {
        double a = lo * std::pow(hi / lo, static_cast<double>(i) / (grid - 1));
        double r = ratio(a);
        if (r > best_r) {
            best_r = r;
            best_a = a;
            best_i = i;
        }
    }
    if (best_i == 0 || best_i == grid - 1) return {best_a, best_r};

    double a_lo = lo * std::pow(hi / lo, static_cast<double>(best_i - 1) / (grid - 1));
    double a_hi = lo * std::pow(hi / lo, static_cast<double>(best_i + 1) / (grid - 1));
    const double gr = 0.6180339887498949;
    double x1 = a_hi - gr * (a_hi - a_lo);
    double x2 = a_lo + gr * (a_hi - a_lo);
    double f1 = ratio(x1), f2 = ratio(x2);
    for (int it = 0; it < 200 && a_hi - a_lo > 1e-10; ++it) {
        if (f1 < f2) {
            a_lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = a_lo + gr * (a_hi - a_lo);
            f2 = ratio(x2);
        } else {
            a_hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = a_hi - gr * (a_hi - a_lo);
            f1 = ratio(x1);
        }
    }
    double a_star = 0.5 * (a_lo + a_hi);
    return {a_star, ratio(a_star)};
}

double pod_meanfield_tail(double rho, int level, int d) {
    if (!(rho > 0 && rho < 1)) throw std::invalid_argument("rho must be in (0,1)");
    if (level < 1) throw std::invalid_argument("level must be >= 1");
    if (d < 2) throw std::invalid_argument("d must be >= 2");
    double exponent = (std::pow(d, level) - 1.0) / (d - 1.0);
    return std::pow(rho, exponent);
}

DominanceResult check_stochastic_dominance(const std::function<double(double)>& density_a,
                                           const std::function<double(double)>& density_b,
                                           const std::vector<double>& grid, double tol) {
    if (grid.size() < 2)
        throw std::invalid_argument("check_stochastic_dominance: grid too small");
    const std::size_t m = grid.size();
    // Cumulative Simpson per interval; each CDF is normalized by its own grid
    // mass so unequal truncation error cannot masquerade as a violation.
    std::vector<double> cdf_a(m, 0.0), cdf_b(m, 0.0);
    for (std::size_t i = 1; i < m; ++i) {
        double h = grid[i] - grid[i - 1];
        double mid = 0.5 * (grid[i] + grid[i - 1]);
        cdf_a[i] = cdf_a[i - 1] + h / 6.0 * (density_a(grid[i - 1]) +
                                             4.0 * density_a(mid) + density_a(grid[i]));
        cdf_b[i] = cdf_b[i - 1] + h / 6.0 * (density_b(grid[i - 1]) +
                                             4.0 * density_b(mid) + density_b(grid[i]));
    }
    if (!(cdf_a[m - 1] > 0) || !(cdf_b[m - 1] > 0))
        throw std::invalid_argument("check_stochastic_dominance: zero mass on grid");
    double max_violation = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double ccdf_a = 1.0 - cdf_a[i] / cdf_a[m - 1];
        double ccdf_b = 1.0 - cdf_b[i] / cdf_b[m - 1];
        max_violation = std::max(max_violation, ccdf_a - ccdf_b);
    }
    return {max_violation <= tol, max_violation};
}

}  // namespace ndsim
