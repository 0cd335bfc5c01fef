#include <cassert>
#include <cmath>
#include <limits>
#include <vector>

#include "ndsim/sim_core.hpp"

namespace ndsim {

namespace {

struct LevelState {
    std::vector<std::int64_t> m;  // m[l] = servers with l jobs
    std::int64_t n = 0;           // total jobs, including central buffer
    std::int64_t buffer = 0;      // CQ only

    std::int64_t idle() const { return m[0]; }
    std::int64_t busy(int k) const { return k - m[0]; }

    void ensure_level(std::size_t l) {
        if (m.size() <= l) m.resize(l + 1, 0);
    }

    void check(int k) const {
#ifndef NDEBUG
        std::int64_t servers = 0, jobs = 0;
        for (std::size_t l = 0; l < m.size(); ++l) {
            servers += m[l];
            jobs += static_cast<std::int64_t>(l) * m[l];
        }
        assert(servers == k);
        assert(jobs + buffer == n);
#else
        (void)k;
#endif
    }
};

}  // namespace

TraceMetrics run_ctmc(const SimConfig& cfg, const std::optional<TraceSampler>& sampler) {
    if (!cfg.service_dist.is_exponential())
        throw std::invalid_argument("run_ctmc requires exponential service times");
    if (cfg.horizon_arrivals == 0)
        throw std::invalid_argument("run_ctmc: horizon of zero arrivals");
    const int k = cfg.k;
    const double mu = cfg.service_dist.exponential_rate();
    const double lambda = cfg.lambda;
    const bool is_cq = cfg.policy.kind == Policy::Kind::CQ;
    const bool unstable = lambda >= k * mu;

    RandomStream stream(cfg.seed, 0);
    MetricsAccumulator acc(k);

    // Balanced start nearest ceil(rho * k) jobs.
    LevelState st;
    {
        auto n0 = static_cast<std::int64_t>(std::ceil(lambda / mu));
        if (n0 < 0) n0 = 0;
        st.n = n0;
        if (is_cq) {
            std::int64_t busy = std::min<std::int64_t>(n0, k);
            st.m = {k - busy, busy};
            st.buffer = n0 - busy;
        } else {
            std::int64_t base = n0 / k, rem = n0 % k;
            st.ensure_level(static_cast<std::size_t>(base) + 1);
            st.m[base] = k - rem;
            st.m[base + 1] = rem;
        }
    }
    st.check(k);

    const std::uint64_t warmup_arrivals =
        static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.horizon_arrivals));
    std::uint64_t arrivals = 0;
    double t = 0.0;
    double next_emit = sampler ? 0.0 : std::numeric_limits<double>::infinity();

    while (arrivals < cfg.horizon_arrivals) {
        std::int64_t busy = is_cq ? std::min<std::int64_t>(st.n, k) : st.busy(k);
        double total_rate = lambda + mu * static_cast<double>(busy);
        double dt = stream.exponential(total_rate);

        while (t + dt >= next_emit) {
            sampler->emit(next_emit, st.n, k - busy, st.m.size() > 1 ? st.m[1] : 0,
                          [&] {
                              std::int64_t ge3 = 0;
                              for (std::size_t l = 3; l < st.m.size(); ++l) ge3 += st.m[l];
                              return ge3;
                          }());
            next_emit += sampler->interval;
        }

        acc.observe(dt, st.n, k - busy, st.m);
        t += dt;

        bool is_arrival = stream.uniform() * total_rate < lambda;
        if (is_arrival) {
            ++arrivals;
            if (is_cq) {
                ++st.n;
                if (st.n <= k) {
                    st.m[0] -= 1;
                    st.m[1] += 1;
                } else {
                    ++st.buffer;
                }
            } else {
                int l = dispatch_level(cfg.policy, st.m, k, stream);
                st.ensure_level(static_cast<std::size_t>(l) + 1);
                st.m[l] -= 1;
                st.m[l + 1] += 1;
                ++st.n;
            }
            if (arrivals == warmup_arrivals) acc.reset();
        } else {
            if (is_cq) {
                --st.n;
                if (st.buffer > 0) {
                    --st.buffer;  // an idle slot immediately takes the next job
                } else {
                    st.m[1] -= 1;
                    st.m[0] += 1;
                }
            } else {
                // Pick a busy server uniformly; its level l >= 1 w.p. m[l]/busy.
                auto r = static_cast<std::int64_t>(
                    stream.uniform_below(static_cast<std::uint64_t>(busy)));
                std::size_t l = 1;
                while (r >= st.m[l]) {
                    r -= st.m[l];
                    ++l;
                }
                st.m[l] -= 1;
                st.m[l - 1] += 1;
                --st.n;
            }
        }
        st.check(k);
    }

    TraceMetrics out = acc.finalize();
    out.stability_warning = unstable;
    out.warmup_fraction = cfg.warmup_fraction;
    out.seed = cfg.seed;
    return out;
}

}  // namespace ndsim
