#ifndef MLTSPEC_HARNESS_HPP
#define MLTSPEC_HARNESS_HPP

#include <optional>
#include <string>
#include <vector>

#include "mltspec/baselines.hpp"
#include "mltspec/channel.hpp"
#include "mltspec/solver.hpp"

namespace mltspec {

/// Monte-Carlo sweep description. Parsed from JSON; invalid configurations
/// throw std::invalid_argument (the CLI exits nonzero only on those).
struct ExperimentConfig {
    std::string name = "results";
    DimensionVector tx_dims;
    DimensionVector rx_dims;
    std::vector<int> tx_selection;  // empty = all
    std::vector<int> rx_selection;  // empty = all
    std::vector<int> k_list;
    std::vector<PilotAlphabet> alphabets;
    std::vector<int> p_list;
    std::vector<double> snr_db_list;  // empty = noiseless
    int trials = 200;
    std::vector<std::string> methods{"an"};
    std::uint64_t seed = 1;
    SolverConfig solver;
    double budget_epsilon = 1e-7;
    std::optional<int> music_h;
    long dict_max = 1000000;

    bool noiseless() const { return snr_db_list.empty(); }
};

ExperimentConfig config_from_json(const std::string& text);

struct MetricRecord {
    std::string method;
    PilotAlphabet alphabet;
    int p = 0;
    int k = 0;
    std::optional<double> snr_db;
    double channel_mse = 0.0;              // (1/L_u) mean ||h_u - h_hat||^2
    std::optional<double> freq_mse;        // (1/d_L) mean matched wrap-around error
    int trials = 0;
    int failures = 0;
    double runtime_seconds = 0.0;
};

struct ExperimentResult {
    std::vector<MetricRecord> records;
    std::string results_csv;     // deterministic under (config, seed)
    std::string conditions_csv;  // checker annotation per K
    std::string timing_csv;      // wall-clock, not covered by determinism
};

/// Runs the sweep with a worker pool; per-trial RNG streams are derived from
/// (seed, grid point, trial index) so results do not depend on scheduling.
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 0);

/// Convenience wrapper writing <name>.csv, <name>_conditions.csv and
/// <name>_timing.csv under out_dir.
ExperimentResult run_experiment_to_dir(const ExperimentConfig& config, const std::string& out_dir,
                                       int threads = 0);

struct FrequencyMatch {
    std::vector<int> permutation;  // truth column k matched to estimate column permutation[k]
    VectorXd per_path_error;       // squared wrap-around distance per matched pair
    double total = 0.0;
};

/// Minimum-total-cost assignment between truth and estimate columns under the
/// per-coordinate squared wrap-around distance.
FrequencyMatch match_frequencies(const FrequencySet& truth, const FrequencySet& estimate);

/// Minimum-norm least-squares channel estimate from an observation.
VectorXcd ls_channel_estimate(const MeasurementOperator& op, const VectorXcd& y);

}  // namespace mltspec

#endif  // MLTSPEC_HARNESS_HPP
