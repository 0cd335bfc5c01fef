#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace ndsim {

// Time-weighted trace summaries. State is piecewise constant between events,
// so every integral below is exact given the event sequence.
struct TraceMetrics {
    double time_avg_N = 0.0;
    double time_avg_I = 0.0;
    double total_time = 0.0;
    std::uint64_t event_count = 0;

    // Time-average fraction of servers per queue-length level; sums to 1.
    std::vector<double> occupancy;

    // Fine-grained joint accumulators over N̂ = N/k, bin width nhat_bin:
    // nhat_time[b]  = time with N̂ in bin b,
    // nhat_idle[b]  = ∫ I dt restricted to N̂ in bin b.
    double nhat_bin = 0.01;
    std::vector<double> nhat_time;
    std::vector<double> nhat_idle;

    // sup over post-warmup event epochs of |(2 - N̂)_+ - M̂_1|.
    double ssc_sup = 0.0;

    bool stability_warning = false;
    double warmup_fraction = 0.0;
    std::uint64_t seed = 0;

    // Empirical CCDF of N̂ at x, from the bin grid.
    double ccdf_nhat(double x) const {
        if (total_time <= 0) return 0.0;
        double mass = 0.0;
        for (std::size_t b = 0; b < nhat_time.size(); ++b) {
            double center = (static_cast<double>(b) + 0.5) * nhat_bin;
            if (center >= x) mass += nhat_time[b];
        }
        return mass / total_time;
    }

    double mean_nhat_from_bins() const {
        double s = 0.0;
        for (std::size_t b = 0; b < nhat_time.size(); ++b)
            s += (static_cast<double>(b) + 0.5) * nhat_bin * nhat_time[b];
        return s / total_time;
    }
};

inline double ssc_deviation(const TraceMetrics& trace) { return trace.ssc_sup; }

// Time-weighted mean of I conditional on N̂ falling in each [edge_i, edge_{i+1})
// bin. Empty bins are reported as missing.
inline std::vector<std::optional<double>> idle_conditional_mean(
    const TraceMetrics& trace, std::span<const double> bin_edges) {
    if (bin_edges.size() < 2)
        throw std::invalid_argument("idle_conditional_mean: need at least two edges");
    std::vector<std::optional<double>> out(bin_edges.size() - 1);
    for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i) {
        double t = 0.0, idt = 0.0;
        for (std::size_t b = 0; b < trace.nhat_time.size(); ++b) {
            double center = (static_cast<double>(b) + 0.5) * trace.nhat_bin;
            if (center >= bin_edges[i] && center < bin_edges[i + 1]) {
                t += trace.nhat_time[b];
                idt += trace.nhat_idle[b];
            }
        }
        if (t > 0) out[i] = idt / t;
    }
    return out;
}

// Accumulator shared by the two engines.
class MetricsAccumulator {
public:
    explicit MetricsAccumulator(int k) : k_(k) {}

    void reset() {
        sum_n_dt_ = sum_i_dt_ = total_time_ = 0.0;
        occupancy_dt_.assign(occupancy_dt_.size(), 0.0);
        nhat_time_.assign(nhat_time_.size(), 0.0);
        nhat_idle_.assign(nhat_idle_.size(), 0.0);
        ssc_sup_ = 0.0;
        events_ = 0;
    }

    // State held for dt: total jobs n, idle count i, level counts m (m[l] =
    // servers with l jobs; absent tail levels treated as zero).
    void observe(double dt, std::int64_t n, std::int64_t i,
                 std::span<const std::int64_t> m) {
        ++events_;
        if (dt <= 0) {
            note_epoch(n, m);
            return;
        }
        total_time_ += dt;
        sum_n_dt_ += static_cast<double>(n) * dt;
        sum_i_dt_ += static_cast<double>(i) * dt;
        if (occupancy_dt_.size() < m.size()) occupancy_dt_.resize(m.size(), 0.0);
        for (std::size_t l = 0; l < m.size(); ++l)
            occupancy_dt_[l] += static_cast<double>(m[l]) * dt;

        double nhat = static_cast<double>(n) / k_;
        auto b = static_cast<std::size_t>(nhat / nhat_bin_);
        if (b >= nhat_time_.size()) {
            nhat_time_.resize(b + 1, 0.0);
            nhat_idle_.resize(b + 1, 0.0);
        }
        nhat_time_[b] += dt;
        nhat_idle_[b] += static_cast<double>(i) * dt;
        note_epoch(n, m);
    }

    TraceMetrics finalize() const {
        TraceMetrics t;
        t.total_time = total_time_;
        t.event_count = events_;
        if (total_time_ > 0) {
            t.time_avg_N = sum_n_dt_ / total_time_;
            t.time_avg_I = sum_i_dt_ / total_time_;
            t.occupancy.resize(occupancy_dt_.size());
            for (std::size_t l = 0; l < occupancy_dt_.size(); ++l)
                t.occupancy[l] = occupancy_dt_[l] / (total_time_ * k_);
        }
        t.nhat_bin = nhat_bin_;
        t.nhat_time = nhat_time_;
        t.nhat_idle = nhat_idle_;
        t.ssc_sup = ssc_sup_;
        return t;
    }

private:
    void note_epoch(std::int64_t n, std::span<const std::int64_t> m) {
        double nhat = static_cast<double>(n) / k_;
        double m1hat = m.size() > 1 ? static_cast<double>(m[1]) / k_ : 0.0;
        double dev = std::abs(std::max(2.0 - nhat, 0.0) - m1hat);
        if (dev > ssc_sup_) ssc_sup_ = dev;
    }

    int k_;
    double nhat_bin_ = 0.01;
    double sum_n_dt_ = 0.0;
    double sum_i_dt_ = 0.0;
    double total_time_ = 0.0;
    std::vector<double> occupancy_dt_;
    std::vector<double> nhat_time_;
    std::vector<double> nhat_idle_;
    double ssc_sup_ = 0.0;
    std::uint64_t events_ = 0;
};

}  // namespace ndsim
