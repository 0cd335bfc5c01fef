#include "ndsim/policies.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace ndsim {

namespace {

int parse_param(std::string_view s) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw std::invalid_argument("bad policy parameter: " + std::string(s));
    return value;
}

// Uniformly random index among argmin entries of `values`.
template <typename T>
int random_argmin(std::span<const T> values, RandomStream& stream) {
    T best = values[0];
    int ties = 1;
    int pick = 0;
    for (int i = 1; i < static_cast<int>(values.size()); ++i) {
        if (values[i] < best) {
            best = values[i];
            ties = 1;
            pick = i;
        } else if (values[i] == best) {
            ++ties;
            if (stream.uniform_below(static_cast<std::uint64_t>(ties)) == 0) pick = i;
        }
    }
    return pick;
}

}  // namespace

Policy Policy::parse(std::string_view s) {
    if (s == "random") return random();
    if (s == "jsq") return jsq();
    if (s == "iqf") return iqf();
    if (s == "i1f") return i1f();
    if (s == "cq") return cq();
    if (s == "lwl") return lwl();
    if (s.starts_with("pod:")) return pod(parse_param(s.substr(4)));
    if (s.starts_with("idf:")) return idf(parse_param(s.substr(4)));
    throw std::invalid_argument("unknown policy: " + std::string(s));
}

std::string Policy::name() const {
    switch (kind) {
        case Kind::Random: return "random";
        case Kind::JSQ: return "jsq";
        case Kind::PoD: return "pod:" + std::to_string(param);
        case Kind::IQF: return "iqf";
        case Kind::I1F: return "i1f";
        case Kind::IdF: return "idf:" + std::to_string(param);
        case Kind::CQ: return "cq";
        case Kind::LWL: return "lwl";
    }
    return "?";
}

int dispatch(const Policy& policy, const StateView& view, RandomStream& stream) {
    const auto& q = view.queue_lengths;
    const int k = static_cast<int>(q.size());
    if (k == 0) throw std::invalid_argument("dispatch: empty state view");

    auto uniform_server = [&] { return static_cast<int>(stream.uniform_below(k)); };
    auto uniform_at_length = [&](int len) {
        // Uniform among servers with queue length exactly len.
        int ties = 0, pick = -1;
        for (int i = 0; i < k; ++i) {
            if (q[i] == len) {
                ++ties;
                if (stream.uniform_below(static_cast<std::uint64_t>(ties)) == 0) pick = i;
            }
        }
        return pick;
    };

    switch (policy.kind) {
        case Policy::Kind::Random:
            return uniform_server();
        case Policy::Kind::JSQ:
            return random_argmin(q, stream);
        case Policy::Kind::PoD: {
            const int d = policy.param;
            if (d > k) throw std::invalid_argument("PoD: d exceeds server count");
            // Partial Fisher-Yates for d distinct indices.
            std::vector<int> idx(k);
            for (int i = 0; i < k; ++i) idx[i] = i;
            int best = -1;
            int best_len = std::numeric_limits<int>::max();
            int ties = 0;
            for (int j = 0; j < d; ++j) {
                int r = j + static_cast<int>(stream.uniform_below(k - j));
                std::swap(idx[j], idx[r]);
                int i = idx[j];
                if (q[i] < best_len) {
                    best_len = q[i];
                    best = i;
                    ties = 1;
                } else if (q[i] == best_len) {
                    ++ties;
                    if (stream.uniform_below(static_cast<std::uint64_t>(ties)) == 0) best = i;
                }
            }
            return best;
        }
        case Policy::Kind::IQF: {
            int idle = uniform_at_length(0);
            return idle >= 0 ? idle : uniform_server();
        }
        case Policy::Kind::I1F: {
            int idle = uniform_at_length(0);
            if (idle >= 0) return idle;
            int one = uniform_at_length(1);
            return one >= 0 ? one : uniform_server();
        }
        case Policy::Kind::IdF: {
            // JSQ among queues of length <= q; random if none.
            int best = -1;
            int best_len = policy.param + 1;
            int ties = 0;
            for (int i = 0; i < k; ++i) {
                if (q[i] < best_len) {
                    best_len = q[i];
                    best = i;
                    ties = 1;
                } else if (q[i] == best_len && best >= 0) {
                    ++ties;
                    if (stream.uniform_below(static_cast<std::uint64_t>(ties)) == 0) best = i;
                }
            }
            return best >= 0 ? best : uniform_server();
        }
        case Policy::Kind::CQ:
            return kCentralBuffer;
        case Policy::Kind::LWL: {
            if (view.residual_work.size() != q.size())
                throw std::invalid_argument("LWL requires residual work in the state view");
            return random_argmin(view.residual_work, stream);
        }
    }
    throw std::logic_error("unreachable");
}

int dispatch_level(const Policy& policy, std::span<const std::int64_t> level_counts,
                   int k, RandomStream& stream) {
    const int levels = static_cast<int>(level_counts.size());
    auto uniform_level = [&] {
        // Level of a uniformly chosen server.
        std::int64_t r = static_cast<std::int64_t>(stream.uniform_below(k));
        for (int l = 0; l < levels; ++l) {
            if (r < level_counts[l]) return l;
            r -= level_counts[l];
        }
        throw std::logic_error("level counts do not sum to k");
    };
    auto lowest_occupied = [&] {
        for (int l = 0; l < levels; ++l)
            if (level_counts[l] > 0) return l;
        throw std::logic_error("no occupied level");
    };

    switch (policy.kind) {
        case Policy::Kind::Random:
            return uniform_level();
        case Policy::Kind::JSQ:
            return lowest_occupied();
        case Policy::Kind::PoD: {
            const int d = policy.param;
            if (d > k) throw std::invalid_argument("PoD: d exceeds server count");
            // d distinct uniform servers; only the minimum sampled level matters.
            // Sample positions into the canonical by-level ordering of servers.
            std::vector<std::int64_t> pos(d);
            for (int j = 0; j < d; ++j) {
                std::int64_t r;
                bool fresh;
                do {
                    r = static_cast<std::int64_t>(stream.uniform_below(k));
                    fresh = true;
                    for (int m = 0; m < j; ++m)
                        if (pos[m] == r) { fresh = false; break; }
                } while (!fresh);
                pos[j] = r;
            }
            std::int64_t min_pos = *std::min_element(pos.begin(), pos.end());
            for (int l = 0; l < levels; ++l) {
                if (min_pos < level_counts[l]) return l;
                min_pos -= level_counts[l];
            }
            throw std::logic_error("level counts do not sum to k");
        }
        case Policy::Kind::IQF:
            return level_counts[0] > 0 ? 0 : uniform_level();
        case Policy::Kind::I1F:
            if (level_counts[0] > 0) return 0;
            if (levels > 1 && level_counts[1] > 0) return 1;
            return uniform_level();
        case Policy::Kind::IdF: {
            for (int l = 0; l <= policy.param && l < levels; ++l)
                if (level_counts[l] > 0) return l;
            return uniform_level();
        }
        case Policy::Kind::CQ:
            return kCentralBuffer;
        case Policy::Kind::LWL:
            throw std::invalid_argument("LWL needs residual work; use the event-driven engine");
    }
    throw std::logic_error("unreachable");
}

}  // namespace ndsim
