#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ndsim/sim_core.hpp"

namespace ndsim {

struct SummaryStats {
    double estimate = 0.0;
    double ci_halfwidth = 0.0;
    int replications = 0;
    bool ci_available = false;
};

// Mean and 95% t-interval across per-replication estimates.
SummaryStats batch_means(const std::vector<double>& estimates);

struct ExperimentConfig {
    std::string id = "custom";
    std::vector<int> ks;
    std::vector<double> alphas;  // either alphas or rhos per grid axis
    std::vector<double> rhos;
    std::vector<std::string> policies;
    std::string discipline = "fifo";
    std::vector<std::string> dists = {"exp"};
    int replications = 10;
    std::uint64_t arrivals_per_rep = 1'000'000;
    std::uint64_t seed_base = 1;
    double warmup_fraction = 0.2;
    std::string out;  // empty = stdout

    void validate() const;
};

// One output row per grid cell; the full parameter tuple plus seed makes any
// cell independently re-runnable.
struct ResultRow {
    std::string figure;
    int k = 0;
    double alpha = 0.0;  // simulation rows carry both alpha and rho, derived
                         // from whichever axis parameterized the cell
    double rho = 0.0;
    std::string policy;
    std::string discipline;
    std::string dist;
    std::uint64_t seed = 0;
    double en_per_k = 0.0;
    double ei = 0.0;
    double ssc_sup = 0.0;
    double ci_halfwidth = 0.0;
    bool flagged = false;  // stability warning on any replication
};

std::string csv_header();
std::string to_csv(const ResultRow& row);
std::string rows_to_csv(const std::vector<ResultRow>& rows);

// Runs the full grid x replications on a bounded worker pool (override with
// NDSIM_WORKERS); rows come back sorted and deterministic in seed_base.
std::vector<ResultRow> run_experiment(const ExperimentConfig& cfg);

// Data grids behind the standard comparison figures: fig1, fig2a, fig2b, fig3,
// fig4a, fig4b, fig5a, fig5b, fig5c, fig5d.
std::vector<ResultRow> reproduce(const std::string& figure_id,
                                 std::optional<int> replications = std::nullopt,
                                 std::optional<std::uint64_t> arrivals = std::nullopt,
                                 std::uint64_t seed_base = 1);

// Flat key/value config file; "[section]" line sets the experiment id.
ExperimentConfig parse_config_file(const std::string& path);

// Per-cell replication seed, stable under grid reordering.
std::uint64_t cell_seed(std::uint64_t seed_base, std::uint64_t cell_index, int replication);

}  // namespace ndsim
