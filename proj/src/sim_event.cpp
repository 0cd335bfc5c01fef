#include <algorithm>
#include <cassert>
#include <cmath>
#include <deque>
#include <limits>
#include <queue>
#include <vector>

#include "ndsim/sim_core.hpp"

namespace ndsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Server {
    std::vector<double> residual;  // per-job remaining work
    double last_sync = 0.0;
    double work = 0.0;  // total remaining work at last_sync
    std::uint64_t version = 0;

    int jobs() const { return static_cast<int>(residual.size()); }

    // Advance residuals to time t. Total work depletes at rate 1 while busy;
    // PS splits it evenly, FIFO spends it all on the head job.
    void sync(double t, Discipline disc) {
        double elapsed = t - last_sync;
        last_sync = t;
        if (residual.empty() || elapsed <= 0) return;
        if (disc == Discipline::PS) {
            double dec = elapsed / residual.size();
            for (double& r : residual) r -= dec;
        } else {
            residual.front() -= elapsed;
        }
        work -= elapsed;
    }

    double work_at(double t) const {
        return residual.empty() ? 0.0 : work - (t - last_sync);
    }

    // Absolute next departure time, assuming state as of last_sync.
    double next_departure(Discipline disc) const {
        if (residual.empty()) return kInf;
        if (disc == Discipline::PS) {
            double m = *std::min_element(residual.begin(), residual.end());
            return last_sync + m * residual.size();
        }
        return last_sync + residual.front();
    }

    // Remove the job completing now; residuals must already be synced.
    void complete_one(Discipline disc) {
        if (disc == Discipline::PS) {
            auto it = std::min_element(residual.begin(), residual.end());
            work -= *it;
            residual.erase(it);
        } else {
            work -= residual.front();
            residual.erase(residual.begin());
        }
        // Guard accumulated rounding in the cached total.
        if (residual.empty()) work = 0.0;
    }

    void add_job(double service) {
        residual.push_back(service);
        work += service;
    }
};

struct HeapEntry {
    double time;
    int server;
    std::uint64_t version;
    bool operator>(const HeapEntry& o) const { return time > o.time; }
};

}  // namespace

TraceMetrics run_event_driven(const SimConfig& cfg,
                              const std::optional<TraceSampler>& sampler) {
    if (cfg.horizon_arrivals == 0)
        throw std::invalid_argument("run_event_driven: horizon of zero arrivals");
    const int k = cfg.k;
    const bool is_cq = cfg.policy.kind == Policy::Kind::CQ;
    const auto [mean_service, var_service] = cfg.service_dist.moments();
    const bool unstable = cfg.lambda * mean_service >= k;

    RandomStream stream(cfg.seed, 0);
    MetricsAccumulator acc(k);

    std::vector<Server> servers(k);
    std::deque<double> central;  // service times of buffered jobs (CQ)
    std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<HeapEntry>> heap;

    auto schedule = [&](int j) {
        double td = servers[j].next_departure(cfg.discipline);
        ++servers[j].version;
        if (td < kInf) heap.push({td, j, servers[j].version});
    };

    // Bookkeeping for metrics: queue-length histogram and totals.
    std::vector<std::int64_t> level_counts(2, 0);
    level_counts[0] = k;
    std::int64_t n_total = 0, idle = k;
    auto move_level = [&](int from, int to) {
        if (static_cast<std::size_t>(std::max(from, to)) >= level_counts.size())
            level_counts.resize(std::max(from, to) + 1, 0);
        level_counts[from] -= 1;
        level_counts[to] += 1;
        if (from == 0) --idle;
        if (to == 0) ++idle;
    };

    auto assign_job = [&](int j, double service, double t) {
        servers[j].sync(t, cfg.discipline);
        move_level(servers[j].jobs(), servers[j].jobs() + 1);
        servers[j].add_job(service);
        schedule(j);
    };

    // Balanced start: ceil(rho * k) jobs round-robin with fresh service draws.
    {
        double rho = cfg.lambda * mean_service / k;
        auto n0 = static_cast<std::int64_t>(std::ceil(rho * k));
        for (std::int64_t i = 0; i < n0; ++i) {
            double s = cfg.service_dist.sample(stream);
            if (is_cq && servers[i % k].jobs() > 0) {
                central.push_back(s);
                ++n_total;
            } else {
                assign_job(static_cast<int>(i % k), s, 0.0);
                ++n_total;
            }
        }
    }

    std::vector<int> lengths(k);
    std::vector<double> works(k);
    const std::uint64_t warmup_arrivals =
        static_cast<std::uint64_t>(cfg.warmup_fraction * static_cast<double>(cfg.horizon_arrivals));
    std::uint64_t arrivals = 0;
    double t = 0.0;
    double next_arrival = exp_interarrival(cfg.lambda, stream);
    double next_emit = sampler ? 0.0 : kInf;

    while (arrivals < cfg.horizon_arrivals) {
        // Next valid departure.
        while (!heap.empty() && heap.top().version != servers[heap.top().server].version)
            heap.pop();
        double dep_time = heap.empty() ? kInf : heap.top().time;
        bool is_arrival = next_arrival <= dep_time;
        double ev_time = is_arrival ? next_arrival : dep_time;

        while (ev_time >= next_emit) {
            std::int64_t ge3 = 0;
            for (std::size_t l = 3; l < level_counts.size(); ++l) ge3 += level_counts[l];
            sampler->emit(next_emit, n_total, idle,
                          level_counts.size() > 1 ? level_counts[1] : 0, ge3);
            next_emit += sampler->interval;
        }

        acc.observe(ev_time - t, n_total, idle, level_counts);
        t = ev_time;

        if (is_arrival) {
            ++arrivals;
            double service = cfg.service_dist.sample(stream);
            int dest;
            if (is_cq) {
                dest = idle > 0 ? -2 : kCentralBuffer;
                if (dest == -2) {
                    // Work conservation: take any idle server.
                    for (int j = 0; j < k; ++j)
                        if (servers[j].jobs() == 0) { dest = j; break; }
                }
            } else {
                for (int j = 0; j < k; ++j) lengths[j] = servers[j].jobs();
                StateView view{lengths, {}};
                if (cfg.policy.needs_residual_work()) {
                    for (int j = 0; j < k; ++j) works[j] = servers[j].work_at(t);
                    view.residual_work = works;
                }
                dest = dispatch(cfg.policy, view, stream);
            }
            if (dest == kCentralBuffer) {
                central.push_back(service);
            } else {
                assign_job(dest, service, t);
            }
            ++n_total;
            next_arrival = t + exp_interarrival(cfg.lambda, stream);
            if (arrivals == warmup_arrivals) acc.reset();
        } else {
            int j = heap.top().server;
            heap.pop();
            servers[j].sync(t, cfg.discipline);
            move_level(servers[j].jobs(), servers[j].jobs() - 1);
            servers[j].complete_one(cfg.discipline);
            --n_total;
            if (is_cq && !central.empty() && servers[j].jobs() == 0) {
                double s = central.front();
                central.pop_front();
                assign_job(j, s, t);
            } else {
                schedule(j);
            }
        }
        assert(!is_cq || central.empty() || idle == 0);
    }

    TraceMetrics out = acc.finalize();
    out.stability_warning = unstable;
    out.warmup_fraction = cfg.warmup_fraction;
    out.seed = cfg.seed;
    return out;
}

}  // namespace ndsim
