#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ndsim/rng.hpp"

namespace ndsim {

// Destination returned by dispatch() when the job joins the central buffer.
inline constexpr int kCentralBuffer = -1;

struct Policy {
    enum class Kind { Random, JSQ, PoD, IQF, I1F, IdF, CQ, LWL };

    Kind kind = Kind::JSQ;
    int param = 0;  // d for PoD, q for IdF

    static Policy random() { return {Kind::Random, 0}; }
    static Policy jsq() { return {Kind::JSQ, 0}; }
    static Policy pod(int d) {
        if (d < 2) throw std::invalid_argument("PoD requires d >= 2");
        return {Kind::PoD, d};
    }
    static Policy iqf() { return {Kind::IQF, 0}; }
    static Policy i1f() { return {Kind::I1F, 0}; }
    static Policy idf(int q) {
        if (q < 0) throw std::invalid_argument("IdF requires q >= 0");
        return {Kind::IdF, q};
    }
    static Policy cq() { return {Kind::CQ, 0}; }
    static Policy lwl() { return {Kind::LWL, 0}; }

    // CLI strings: "random", "jsq", "pod:d", "iqf", "i1f", "idf:q", "cq", "lwl".
    static Policy parse(std::string_view s);
    std::string name() const;

    bool needs_residual_work() const { return kind == Kind::LWL; }
};

// Read-only snapshot of the system at an arrival epoch.
struct StateView {
    std::span<const int> queue_lengths;
    std::span<const double> residual_work;  // populated for LWL only
};

// Pure dispatch decision. Returns a server index or kCentralBuffer.
int dispatch(const Policy& policy, const StateView& view, RandomStream& stream);

// Level-count fast path used by the CTMC engine: decisions that depend only
// on the level-count vector return the destination *level*. level_counts[l]
// is the number of servers holding l jobs; they sum to k.
int dispatch_level(const Policy& policy, std::span<const std::int64_t> level_counts,
                   int k, RandomStream& stream);

}  // namespace ndsim
