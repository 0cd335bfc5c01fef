#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>

#include "ndsim/rng.hpp"

namespace ndsim {

struct Deterministic {
    double value;
};

struct Exponential {
    double rate;
};

struct Bimodal {
    double p_low;
    double low_value;
    double high_value;
};

struct Weibull {
    double shape;
    double scale;
};

class ServiceDistribution {
public:
    using Variant = std::variant<Deterministic, Exponential, Bimodal, Weibull>;

    static ServiceDistribution deterministic(double value) {
        require(value > 0, "deterministic value must be positive");
        return ServiceDistribution(Deterministic{value});
    }
    static ServiceDistribution exponential(double rate) {
        require(rate > 0, "exponential rate must be positive");
        return ServiceDistribution(Exponential{rate});
    }
    static ServiceDistribution bimodal(double p_low, double low, double high) {
        require(p_low > 0 && p_low < 1, "bimodal p_low must be in (0,1)");
        require(low > 0 && high > 0, "bimodal values must be positive");
        return ServiceDistribution(Bimodal{p_low, low, high});
    }
    static ServiceDistribution weibull(double shape, double scale) {
        require(shape > 0 && scale > 0, "weibull parameters must be positive");
        return ServiceDistribution(Weibull{shape, scale});
    }

    // The six named presets, all mean 1.
    static ServiceDistribution preset(std::string_view name) {
        if (name == "det") return deterministic(1.0);
        if (name == "exp") return exponential(1.0);
        if (name == "bim1") return bimodal(0.9, 0.5, 5.5);
        if (name == "weib1") return weibull(0.5, 0.5);
        if (name == "weib2") return weibull(1.0 / 3.0, 1.0 / 6.0);
        if (name == "bim2") return bimodal(0.99, 0.5, 50.5);
        throw std::invalid_argument("unknown distribution preset: " + std::string(name));
    }

    double sample(RandomStream& stream) const {
        return std::visit(
            [&stream](const auto& d) { return sample_impl(d, stream); }, v_);
    }

    // Exact analytic (mean, variance).
    std::pair<double, double> moments() const {
        return std::visit([](const auto& d) { return moments_impl(d); }, v_);
    }

    bool is_exponential() const { return std::holds_alternative<Exponential>(v_); }
    double exponential_rate() const { return std::get<Exponential>(v_).rate; }
    const Variant& variant() const { return v_; }

private:
    explicit ServiceDistribution(Variant v) : v_(v) {}

    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }

    static double sample_impl(const Deterministic& d, RandomStream&) { return d.value; }
    static double sample_impl(const Exponential& d, RandomStream& s) {
        return s.exponential(d.rate);
    }
    static double sample_impl(const Bimodal& d, RandomStream& s) {
        return s.uniform() < d.p_low ? d.low_value : d.high_value;
    }
    static double sample_impl(const Weibull& d, RandomStream& s) {
        // Inverse CDF: scale * (-ln U)^{1/shape}.
        return d.scale * std::pow(-std::log1p(-s.uniform()), 1.0 / d.shape);
    }

    static std::pair<double, double> moments_impl(const Deterministic& d) {
        return {d.value, 0.0};
    }
    static std::pair<double, double> moments_impl(const Exponential& d) {
        return {1.0 / d.rate, 1.0 / (d.rate * d.rate)};
    }
    static std::pair<double, double> moments_impl(const Bimodal& d) {
        double m = d.p_low * d.low_value + (1.0 - d.p_low) * d.high_value;
        double m2 = d.p_low * d.low_value * d.low_value +
                    (1.0 - d.p_low) * d.high_value * d.high_value;
        return {m, m2 - m * m};
    }
    static std::pair<double, double> moments_impl(const Weibull& d) {
        double g1 = std::tgamma(1.0 + 1.0 / d.shape);
        double g2 = std::tgamma(1.0 + 2.0 / d.shape);
        return {d.scale * g1, d.scale * d.scale * (g2 - g1 * g1)};
    }

    Variant v_;
};

inline double exp_interarrival(double rate, RandomStream& stream) {
    if (!(rate > 0)) throw std::invalid_argument("arrival rate must be positive");
    return stream.exponential(rate);
}

}  // namespace ndsim
