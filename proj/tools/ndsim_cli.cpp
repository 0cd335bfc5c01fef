#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ndsim/diffusion.hpp"
#include "ndsim/experiments.hpp"
#include "ndsim/oracles.hpp"
#include "ndsim/sim_core.hpp"

namespace {

using namespace ndsim;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write output file: " + path);
    out << content;
}

struct SimulateArgs {
    int k = 1;
    double alpha = 0.0;
    double rho = 0.0;
    double mu = 1.0;
    std::string policy = "jsq";
    std::string discipline = "fifo";
    std::string dist = "exp";
    std::uint64_t arrivals = 1'000'000;
    double warmup = 0.2;
    std::uint64_t seed = 1;
    std::string engine = "auto";
    std::string out;
    std::string trace_out;
    double trace_every = 1.0;
};

int cmd_simulate(const SimulateArgs& a) {
    SimConfig cfg;
    cfg.k = a.k;
    cfg.mu = a.mu;
    cfg.service_dist = ServiceDistribution::preset(a.dist);
    double mean_service = cfg.service_dist.moments().first;
    if (a.alpha > 0) {
        cfg.lambda = (a.k - a.alpha) * a.mu;
    } else if (a.rho > 0) {
        cfg.lambda = a.rho * a.k / mean_service;
    } else {
        throw std::invalid_argument("simulate: provide --alpha or --rho");
    }
    cfg.discipline = a.discipline == "ps" ? Discipline::PS : Discipline::FIFO;
    cfg.policy = Policy::parse(a.policy);
    cfg.horizon_arrivals = a.arrivals;
    cfg.warmup_fraction = a.warmup;
    cfg.seed = a.seed;

    bool use_ctmc;
    if (a.engine == "ctmc") {
        use_ctmc = true;
    } else if (a.engine == "event") {
        use_ctmc = false;
    } else {
        use_ctmc = cfg.service_dist.is_exponential() &&
                   cfg.policy.kind != Policy::Kind::LWL;
    }

    std::ofstream trace_file;
    std::optional<TraceSampler> sampler;
    if (!a.trace_out.empty()) {
        trace_file.open(a.trace_out, std::ios::binary);
        if (!trace_file) throw std::runtime_error("cannot write trace file: " + a.trace_out);
        trace_file << "time,N,I,M1,Mge3\n";
        sampler = TraceSampler{
            a.trace_every,
            [&trace_file](double t, std::int64_t n, std::int64_t i, std::int64_t m1,
                          std::int64_t ge3) {
                trace_file << fmt(t) << ',' << n << ',' << i << ',' << m1 << ',' << ge3
                           << '\n';
            }};
    }

    TraceMetrics m = use_ctmc ? run_ctmc(cfg, sampler) : run_event_driven(cfg, sampler);

    ResultRow row;
    row.figure = "simulate";
    row.k = a.k;
    row.alpha = a.alpha > 0 ? a.alpha : std::nan("");
    row.rho = a.rho > 0 ? a.rho : std::nan("");
    row.policy = a.policy;
    row.discipline = a.discipline;
    row.dist = a.dist;
    row.seed = a.seed;
    row.en_per_k = m.time_avg_N / a.k;
    row.ei = m.time_avg_I;
    row.ssc_sup = m.ssc_sup;
    row.ci_halfwidth = std::nan("");
    row.flagged = m.stability_warning;
    write_output(a.out, csv_header() + "\n" + to_csv(row) + "\n");
    return 0;
}

struct DiffusionArgs {
    std::string table = "mean";  // density | mean | ratio
    std::string policy = "jsq";
    double alpha = 0.5;
    double n_max = 20.0;
    double step = 0.01;
    std::string out;
};

int cmd_diffusion(const DiffusionArgs& a) {
    std::string csv = "alpha_or_n,value\n";
    auto density = [&](double n) {
        if (a.policy == "jsq") return density_jsq(n, a.alpha);
        if (a.policy == "cq") return density_cq(n, a.alpha);
        if (a.policy == "iqf") return density_iqf(n, a.alpha);
        throw std::invalid_argument("diffusion: unknown policy " + a.policy);
    };
    auto mean = [&](double alpha) {
        if (a.policy == "jsq") return mean_jsq(alpha);
        if (a.policy == "cq") return mean_cq(alpha);
        if (a.policy == "iqf") return mean_iqf(alpha);
        throw std::invalid_argument("diffusion: unknown policy " + a.policy);
    };
    if (a.table == "density") {
        for (double n = 1.0; n <= a.n_max + 1e-12; n += a.step)
            csv += fmt(n) + "," + fmt(density(n)) + "\n";
    } else if (a.table == "mean") {
        csv += fmt(a.alpha) + "," + fmt(mean(a.alpha)) + "\n";
    } else if (a.table == "ratio") {
        auto parse = [](const std::string& p) {
            if (p == "jsq") return DiffusionPolicy::Jsq;
            if (p == "cq") return DiffusionPolicy::Cq;
            if (p == "iqf") return DiffusionPolicy::Iqf;
            throw std::invalid_argument("diffusion: unknown policy " + p);
        };
        auto r = ratio_sup(parse(a.policy), DiffusionPolicy::Cq);
        csv += "alpha_star," + fmt(r.alpha_star) + "\n";
        csv += "sup_ratio," + fmt(r.sup_ratio) + "\n";
    } else {
        throw std::invalid_argument("diffusion: unknown table " + a.table);
    }
    write_output(a.out, csv);
    return 0;
}

struct OracleArgs {
    std::string what = "mmk";
    double lambda = 0.5;
    double mu = 1.0;
    int k = 1;
    double arrival = 1.0;
    double service = 2.0;
    double t = 1.0;
    double mean = 1.0;
    double x = 10.0;
    std::string out;
};

int cmd_oracle(const OracleArgs& a) {
    std::string csv;
    if (a.what == "mmk") {
        auto r = mmk_stationary(a.lambda, a.mu, a.k);
        csv = "n,pi\n";
        for (std::size_t n = 0; n < r.pmf.size(); ++n)
            csv += std::to_string(n) + "," + fmt(r.pmf[n]) + "\n";
        csv += "mean," + fmt(r.mean) + "\n";
    } else if (a.what == "excursion-tail") {
        ExcursionStats s(a.arrival, a.service);
        csv = "t,bound\n" + fmt(a.t) + "," + fmt(excursion_tail_bound(s, a.t)) + "\n";
    } else if (a.what == "excursion-center") {
        ExcursionStats s(a.arrival, a.service);
        csv = "center," + fmt(excursion_area_center(s)) + "\n";
    } else if (a.what == "poisson-tail") {
        csv = "bound," + fmt(poisson_tail_bound(a.mean, a.x)) + "\n";
    } else {
        throw std::invalid_argument("oracle: unknown kind " + a.what);
    }
    write_output(a.out, csv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NDS load balancing simulator and diffusion analytics"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "run a single simulation");
    simulate->add_option("--k", sim.k)->required();
    simulate->add_option("--alpha", sim.alpha);
    simulate->add_option("--rho", sim.rho);
    simulate->add_option("--mu", sim.mu);
    simulate->add_option("--policy", sim.policy);
    simulate->add_option("--discipline", sim.discipline);
    simulate->add_option("--dist", sim.dist);
    simulate->add_option("--arrivals", sim.arrivals);
    simulate->add_option("--warmup", sim.warmup);
    simulate->add_option("--seed", sim.seed);
    simulate->add_option("--engine", sim.engine);
    simulate->add_option("--out", sim.out);
    simulate->add_option("--trace-out", sim.trace_out);
    simulate->add_option("--trace-every", sim.trace_every);

    DiffusionArgs dif;
    auto* diffusion = app.add_subcommand("diffusion", "density/mean/ratio tables");
    diffusion->add_option("--table", dif.table);
    diffusion->add_option("--policy", dif.policy);
    diffusion->add_option("--alpha", dif.alpha);
    diffusion->add_option("--n-max", dif.n_max);
    diffusion->add_option("--step", dif.step);
    diffusion->add_option("--out", dif.out);

    OracleArgs ora;
    auto* oracle = app.add_subcommand("oracle", "exact analytic values");
    oracle->add_option("--what", ora.what);
    oracle->add_option("--lambda", ora.lambda);
    oracle->add_option("--mu", ora.mu);
    oracle->add_option("--k", ora.k);
    oracle->add_option("--arrival", ora.arrival);
    oracle->add_option("--service", ora.service);
    oracle->add_option("--t", ora.t);
    oracle->add_option("--mean", ora.mean);
    oracle->add_option("--x", ora.x);
    oracle->add_option("--out", ora.out);

    std::string config_path;
    auto* experiment = app.add_subcommand("experiment", "run a config-file experiment grid");
    experiment->add_option("config", config_path)->required();

    std::string figure_id, repro_out;
    int repro_reps = 0;
    std::uint64_t repro_arrivals = 0, repro_seed = 1;
    auto* repro = app.add_subcommand("reproduce", "emit the data grid behind a figure");
    repro->add_option("figure", figure_id)->required();
    repro->add_option("--reps", repro_reps);
    repro->add_option("--arrivals", repro_arrivals);
    repro->add_option("--seed", repro_seed);
    repro->add_option("--out", repro_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (diffusion->parsed()) return cmd_diffusion(dif);
        if (oracle->parsed()) return cmd_oracle(ora);
        if (experiment->parsed()) {
            auto cfg = ndsim::parse_config_file(config_path);
            auto rows = ndsim::run_experiment(cfg);
            write_output(cfg.out, ndsim::rows_to_csv(rows));
            return 0;
        }
        if (repro->parsed()) {
            auto rows = ndsim::reproduce(
                figure_id, repro_reps > 0 ? std::optional<int>(repro_reps) : std::nullopt,
                repro_arrivals > 0 ? std::optional<std::uint64_t>(repro_arrivals)
                                   : std::nullopt,
                repro_seed);
            write_output(repro_out, ndsim::rows_to_csv(rows));
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
