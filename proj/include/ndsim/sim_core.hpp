#pragma once

#include <cstdint>
#include <functional>
#include <optional>

#include "ndsim/distributions.hpp"
#include "ndsim/metrics.hpp"
#include "ndsim/policies.hpp"

namespace ndsim {

enum class Discipline { FIFO, PS };

struct SimConfig {
    int k = 1;
    double lambda = 0.5;
    double mu = 1.0;
    ServiceDistribution service_dist = ServiceDistribution::exponential(1.0);
    Discipline discipline = Discipline::FIFO;
    Policy policy = Policy::jsq();
    std::uint64_t horizon_arrivals = 1'000'000;
    double warmup_fraction = 0.2;
    std::uint64_t seed = 1;

    // NDS parameterization: lambda = (k - alpha) * mu.
    static SimConfig nds(int k, double alpha, double mu = 1.0) {
        if (!(alpha > 0 && alpha < k))
            throw std::invalid_argument("NDS requires 0 < alpha < k");
        SimConfig c;
        c.k = k;
        c.mu = mu;
        c.lambda = (k - alpha) * mu;
        c.service_dist = ServiceDistribution::exponential(mu);
        return c;
    }
};

// Optional decimated trace export hook: called at most once per `interval`
// of simulated time with (time, N, I, M_1, M_{>=3}).
struct TraceSampler {
    double interval = 1.0;
    std::function<void(double, std::int64_t, std::int64_t, std::int64_t, std::int64_t)> emit;
};

// CTMC fast path on level counts; requires exponential service.
TraceMetrics run_ctmc(const SimConfig& cfg,
                      const std::optional<TraceSampler>& sampler = std::nullopt);

// General event-driven engine (FIFO or PS, any service distribution).
TraceMetrics run_event_driven(const SimConfig& cfg,
                              const std::optional<TraceSampler>& sampler = std::nullopt);

}  // namespace ndsim
