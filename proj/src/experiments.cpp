#include "ndsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ndsim/diffusion.hpp"

namespace ndsim {

namespace {

// Two-sided 95% Student t quantiles by degrees of freedom.
double t_quantile_975(int df) {
    static constexpr double table[] = {
        12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
        2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086,
        2.080,  2.074, 2.069, 2.064, 2.060, 2.056, 2.052, 2.048, 2.045, 2.042};
    if (df < 1) throw std::invalid_argument("t quantile: df < 1");
    if (df <= 30) return table[df - 1];
    if (df <= 40) return 2.021;
    if (df <= 60) return 2.000;
    if (df <= 120) return 1.980;
    return 1.960;
}

std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

unsigned worker_count() {
    if (const char* env = std::getenv("NDSIM_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return static_cast<unsigned>(w);
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 4;
}

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

struct Cell {
    std::string figure;
    int k;
    double alpha;  // NaN if rho-parameterized
    double rho;    // NaN if alpha-parameterized
    std::string policy;
    std::string discipline;
    std::string dist;
};

ResultRow run_cell(const Cell& cell, std::uint64_t cell_index, int replications,
                   std::uint64_t arrivals, std::uint64_t seed_base, double warmup) {
    SimConfig cfg;
    cfg.k = cell.k;
    cfg.mu = 1.0;
    cfg.service_dist = ServiceDistribution::preset(cell.dist);
    double mean_service = cfg.service_dist.moments().first;
    if (!std::isnan(cell.alpha)) {
        cfg.lambda = (cell.k - cell.alpha) * cfg.mu;
    } else {
        cfg.lambda = cell.rho * cell.k / mean_service;
    }
    cfg.discipline = cell.discipline == "ps" ? Discipline::PS : Discipline::FIFO;
    cfg.policy = Policy::parse(cell.policy);
    cfg.horizon_arrivals = arrivals;
    cfg.warmup_fraction = warmup;

    const bool ctmc_ok = cell.dist == "exp" && cfg.policy.kind != Policy::Kind::LWL;

    std::vector<double> en, ei;
    double ssc = 0.0;
    bool flagged = false;
    for (int r = 0; r < replications; ++r) {
        cfg.seed = cell_seed(seed_base, cell_index, r);
        TraceMetrics m = ctmc_ok ? run_ctmc(cfg) : run_event_driven(cfg);
        en.push_back(m.time_avg_N / cell.k);
        ei.push_back(m.time_avg_I);
        ssc = std::max(ssc, m.ssc_sup);
        flagged = flagged || m.stability_warning;
    }
    SummaryStats sn = batch_means(en);
    SummaryStats si = batch_means(ei);

    ResultRow row;
    row.figure = cell.figure;
    row.k = cell.k;
    // Fill in the derived load parameter so every row is self-describing.
    row.alpha = std::isnan(cell.alpha) ? cell.k - cfg.lambda / cfg.mu : cell.alpha;
    row.rho = std::isnan(cell.rho) ? cfg.lambda * mean_service / cell.k : cell.rho;
    row.policy = cell.policy;
    row.discipline = cell.discipline;
    row.dist = cell.dist;
    row.seed = cell_seed(seed_base, cell_index, 0);
    row.en_per_k = sn.estimate;
    row.ei = si.estimate;
    row.ssc_sup = ssc;
    row.ci_halfwidth = sn.ci_available ? sn.ci_halfwidth : std::nan("");
    row.flagged = flagged;
    return row;
}

std::vector<ResultRow> run_cells(const std::vector<Cell>& cells, int replications,
                                 std::uint64_t arrivals, std::uint64_t seed_base,
                                 double warmup) {
    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0};
    unsigned workers = std::min<std::size_t>(worker_count(), cells.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            rows[i] = run_cell(cells[i], i, replications, arrivals, seed_base, warmup);
        return rows;
    }
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                std::size_t i = next.fetch_add(1);
                if (i >= cells.size()) return;
                try {
                    rows[i] = run_cell(cells[i], i, replications, arrivals, seed_base, warmup);
                } catch (...) {
                    std::lock_guard lk(error_mu);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
    return rows;
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

ResultRow analytic_row(std::string figure, std::string policy, double alpha, double rho,
                       double value) {
    ResultRow row;
    row.figure = std::move(figure);
    row.k = 0;
    row.alpha = alpha;
    row.rho = rho;
    row.policy = std::move(policy);
    row.discipline = "";
    row.dist = "";
    row.seed = 0;
    row.en_per_k = value;
    row.ei = kNaN;
    row.ssc_sup = kNaN;
    row.ci_halfwidth = kNaN;
    return row;
}

}  // namespace

std::uint64_t cell_seed(std::uint64_t seed_base, std::uint64_t cell_index, int replication) {
    return mix64(mix64(seed_base + 0x9e3779b97f4a7c15ull * (cell_index + 1)) +
                 static_cast<std::uint64_t>(replication));
}

SummaryStats batch_means(const std::vector<double>& estimates) {
    if (estimates.empty()) throw std::invalid_argument("batch_means: no estimates");
    SummaryStats s;
    s.replications = static_cast<int>(estimates.size());
    double sum = 0.0;
    for (double v : estimates) sum += v;
    s.estimate = sum / s.replications;
    if (s.replications < 2) return s;
    double ss = 0.0;
    for (double v : estimates) ss += (v - s.estimate) * (v - s.estimate);
    double se = std::sqrt(ss / (s.replications - 1) / s.replications);
    s.ci_halfwidth = t_quantile_975(s.replications - 1) * se;
    s.ci_available = true;
    return s;
}

void ExperimentConfig::validate() const {
    if (ks.empty()) throw std::invalid_argument("experiment: no k values");
    if (alphas.empty() == rhos.empty())
        throw std::invalid_argument("experiment: provide alphas or rhos (exactly one)");
    if (policies.empty()) throw std::invalid_argument("experiment: no policies");
    if (dists.empty()) throw std::invalid_argument("experiment: no distributions");
    if (replications < 1) throw std::invalid_argument("experiment: replications >= 1");
    if (!(warmup_fraction >= 0 && warmup_fraction < 1))
        throw std::invalid_argument("experiment: warmup_fraction in [0,1)");
    for (const auto& p : policies) Policy::parse(p);
    for (const auto& d : dists) ServiceDistribution::preset(d);
}

std::string csv_header() {
    return "figure,k,alpha,rho,policy,discipline,dist,seed,EN_per_k,EI,ssc_sup,ci_halfwidth";
}

std::string to_csv(const ResultRow& r) {
    std::string s;
    s += r.figure;
    s += ',';
    s += std::to_string(r.k);
    s += ',';
    s += fmt(r.alpha);
    s += ',';
    s += fmt(r.rho);
    s += ',';
    s += r.policy;
    s += ',';
    s += r.discipline;
    s += ',';
    s += r.dist;
    s += ',';
    s += std::to_string(r.seed);
    s += ',';
    s += fmt(r.en_per_k);
    s += ',';
    s += fmt(r.ei);
    s += ',';
    s += fmt(r.ssc_sup);
    s += ',';
    s += fmt(r.ci_halfwidth);
    if (r.flagged) s += ",unstable";
    return s;
}

std::string rows_to_csv(const std::vector<ResultRow>& rows) {
    std::string out = csv_header();
    out += '\n';
    for (const auto& r : rows) {
        out += to_csv(r);
        out += '\n';
    }
    return out;
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<Cell> cells;
    for (int k : cfg.ks) {
        auto add = [&](double alpha, double rho) {
            for (const auto& p : cfg.policies)
                for (const auto& d : cfg.dists)
                    cells.push_back({cfg.id, k, alpha, rho, p, cfg.discipline, d});
        };
        for (double a : cfg.alphas) add(a, kNaN);
        for (double r : cfg.rhos) add(kNaN, r);
    }
    return run_cells(cells, cfg.replications, cfg.arrivals_per_rep, cfg.seed_base,
                     cfg.warmup_fraction);
}

std::vector<ResultRow> reproduce(const std::string& figure_id,
                                 std::optional<int> replications,
                                 std::optional<std::uint64_t> arrivals,
                                 std::uint64_t seed_base) {
    const int reps = replications.value_or(10);
    const std::uint64_t arr = arrivals.value_or(1'000'000);

    std::vector<double> thetas;  // rho^k grid, = e^{-alpha} in NDS
    for (double t = 0.05; t < 0.96; t += 0.10) thetas.push_back(t);

    auto sim_grid = [&](const std::string& fig, std::vector<int> ks,
                        std::vector<std::string> policies) {
        std::vector<Cell> cells;
        for (int k : ks)
            for (double th : thetas)
                for (const auto& p : policies)
                    cells.push_back({fig, k, -std::log(th), kNaN, p, "fifo", "exp"});
        return run_cells(cells, reps, arr, seed_base, 0.2);
    };

    auto ps_grid = [&](const std::string& fig, std::vector<int> ks,
                       std::vector<double> alphas, std::vector<double> rhos) {
        std::vector<Cell> cells;
        const std::vector<std::string> dists = {"det", "exp", "bim1", "weib1", "weib2", "bim2"};
        const std::vector<std::string> policies = {"jsq", "lwl", "random"};
        for (int k : ks)
            for (const auto& p : policies)
                for (const auto& d : dists) {
                    for (double a : alphas) cells.push_back({fig, k, a, kNaN, p, "ps", d});
                    for (double r : rhos) cells.push_back({fig, k, kNaN, r, p, "ps", d});
                }
        return run_cells(cells, reps, arr, seed_base, 0.2);
    };

    if (figure_id == "fig1") {
        auto rows = sim_grid("fig1", {4, 16, 64}, {"jsq"});
        for (double th : thetas)
            rows.push_back(analytic_row("fig1", "nds_jsq", -std::log(th), th,
                                        mean_jsq(-std::log(th))));
        return rows;
    }
    if (figure_id == "fig2a") {
        auto rows = sim_grid("fig2a", {4, 16, 64}, {"iqf"});
        for (double th : thetas)
            rows.push_back(analytic_row("fig2a", "nds_iqf", -std::log(th), th,
                                        mean_iqf(-std::log(th))));
        return rows;
    }
    if (figure_id == "fig2b") {
        auto rows = sim_grid("fig2b", {4, 16, 64}, {"i1f"});
        for (double th : thetas)
            rows.push_back(analytic_row("fig2b", "nds_jsq", -std::log(th), th,
                                        mean_jsq(-std::log(th))));
        return rows;
    }
    if (figure_id == "fig3") {
        std::vector<ResultRow> rows;
        for (int i = 1; i <= 99; ++i) {
            double th = i / 100.0;
            double a = -std::log(th);
            rows.push_back(analytic_row("fig3", "jsq_over_cq", a, th, mean_jsq(a) / mean_cq(a)));
            rows.push_back(analytic_row("fig3", "iqf_over_cq", a, th, mean_iqf(a) / mean_cq(a)));
        }
        return rows;
    }
    if (figure_id == "fig4a") return sim_grid("fig4a", {4, 16, 64}, {"iqf", "jsq"});
    if (figure_id == "fig4b") return sim_grid("fig4b", {4, 16, 64}, {"i1f", "jsq"});
    if (figure_id == "fig5a") return ps_grid("fig5a", {4}, {}, {0.9});
    if (figure_id == "fig5b") return ps_grid("fig5b", {64, 256}, {0.4}, {});
    if (figure_id == "fig5c") return ps_grid("fig5c", {2}, {}, {0.975, 0.99});
    if (figure_id == "fig5d") {
        // Halfin-Whitt contrast column: lambda = k - 0.4 sqrt(k).
        std::vector<ResultRow> rows;
        for (int k : {64, 256}) {
            double rho = 1.0 - 0.4 / std::sqrt(static_cast<double>(k));
            auto part = ps_grid("fig5d", {k}, {}, {rho});
            rows.insert(rows.end(), part.begin(), part.end());
        }
        return rows;
    }
    throw std::invalid_argument("unknown figure id: " + figure_id);
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    cfg.policies.clear();
    cfg.dists.clear();
    std::string line;
    auto split_list = [](const std::string& v) {
        std::vector<std::string> out;
        std::stringstream ss(v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item.erase(0, item.find_first_not_of(" \t"));
            item.erase(item.find_last_not_of(" \t") + 1);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    };
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line.erase(0, line.find_first_not_of(" \t\r\n"));
        line.erase(line.find_last_not_of(" \t\r\n") + 1);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            cfg.id = line.substr(1, line.size() - 2);
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("bad config line: " + line);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 1);
        key.erase(key.find_last_not_of(" \t") + 1);
        value.erase(0, value.find_first_not_of(" \t"));
        auto items = split_list(value);
        if (key == "k") {
            for (const auto& s : items) cfg.ks.push_back(std::stoi(s));
        } else if (key == "alpha") {
            for (const auto& s : items) cfg.alphas.push_back(std::stod(s));
        } else if (key == "rho") {
            for (const auto& s : items) cfg.rhos.push_back(std::stod(s));
        } else if (key == "policy") {
            cfg.policies = items;
        } else if (key == "dist") {
            cfg.dists = items;
        } else if (key == "discipline") {
            cfg.discipline = value;
        } else if (key == "reps") {
            cfg.replications = std::stoi(value);
        } else if (key == "arrivals") {
            cfg.arrivals_per_rep = std::stoull(value);
        } else if (key == "seed") {
            cfg.seed_base = std::stoull(value);
        } else if (key == "warmup") {
            cfg.warmup_fraction = std::stod(value);
        } else if (key == "out") {
            cfg.out = value;
        } else {
            throw std::runtime_error("unknown config key: " + key);
        }
    }
    if (cfg.dists.empty()) cfg.dists = {"exp"};
    return cfg;
}

}  // namespace ndsim
