#include "mltspec/harness.hpp"

#include <Eigen/QR>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <map>
#include <thread>

#include "json.hpp"
#include "mltspec/assignment.hpp"
#include "mltspec/rng.hpp"
#include "mltspec/serialize.hpp"

namespace mltspec {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct GridPoint {
    PilotAlphabet alphabet;
    int p;
    int k;
    std::optional<double> snr_db;
    int snr_index;  // for seed derivation
};

struct TrialOutcome {
    // One slot per method, aligned with config.methods.
    std::vector<double> channel_se;          // ||h - h_hat||^2, NaN when the solve failed
    std::vector<double> freq_err;            // sum over paths of matched wrap error, NaN on failure
    std::vector<char> failed;
};

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
    }
    ExperimentConfig c;
    try {
        c.name = j.value("name", std::string("results"));
        c.tx_dims = DimensionVector(j.at("tx_dims").get<std::vector<int>>());
        c.rx_dims = DimensionVector(j.at("rx_dims").get<std::vector<int>>());
        if (j.contains("tx_selection") && !j["tx_selection"].is_string())
            c.tx_selection = j["tx_selection"].get<std::vector<int>>();
        if (j.contains("rx_selection") && !j["rx_selection"].is_string())
            c.rx_selection = j["rx_selection"].get<std::vector<int>>();
        c.k_list = j.at("k_list").get<std::vector<int>>();
        for (const auto& a : j.at("alphabets")) c.alphabets.push_back(pilot_alphabet_from_string(a.get<std::string>()));
        c.p_list = j.at("p_list").get<std::vector<int>>();
        if (j.contains("snr_db_list")) c.snr_db_list = j["snr_db_list"].get<std::vector<double>>();
        c.trials = j.value("trials", 200);
        if (j.contains("methods")) c.methods = j["methods"].get<std::vector<std::string>>();
        c.seed = j.value("seed", 1ULL);
        c.budget_epsilon = j.value("budget_epsilon", 1e-7);
        if (j.contains("music_h")) c.music_h = j["music_h"].get<int>();
        c.dict_max = j.value("dict_max", 1000000L);
        if (j.contains("solver")) {
            const auto& s = j["solver"];
            c.solver.tol_noiseless = s.value("tol_noiseless", c.solver.tol_noiseless);
            c.solver.tol_noisy = s.value("tol_noisy", c.solver.tol_noisy);
            c.solver.max_iterations = s.value("max_iterations", c.solver.max_iterations);
            c.solver.rho_init = s.value("rho_init", c.solver.rho_init);
            c.solver.relaxation = s.value("relaxation", c.solver.relaxation);
            c.solver.rank_tol = s.value("rank_tol", c.solver.rank_tol);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: ") + e.what());
    }

    if (c.trials < 1) throw std::invalid_argument("config: trials must be >= 1");
    if (c.k_list.empty()) throw std::invalid_argument("config: k_list must be nonempty");
    for (int k : c.k_list)
        if (k < 1) throw std::invalid_argument("config: K must be >= 1");
    if (c.p_list.empty()) throw std::invalid_argument("config: p_list must be nonempty");
    for (int p : c.p_list)
        if (p < 1) throw std::invalid_argument("config: P must be >= 1");
    if (c.alphabets.empty()) throw std::invalid_argument("config: alphabets must be nonempty");
    if (c.methods.empty()) throw std::invalid_argument("config: methods must be nonempty");
    for (const auto& m : c.methods)
        if (m != "an" && m != "omp" && m != "music" && m != "lmmse" && m != "ls")
            throw std::invalid_argument("config: unknown method " + m);
    return c;
}

FrequencyMatch match_frequencies(const FrequencySet& truth, const FrequencySet& estimate) {
    if (truth.count() != estimate.count() || truth.order() != estimate.order())
        throw std::invalid_argument("match_frequencies: shape mismatch");
    const int k = truth.count(), d = truth.order();
    FrequencyMatch out;
    if (k == 0) return out;
    MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) {
            double acc = 0.0;
            for (int q = 0; q < d; ++q) {
                double w = wrap_dist(truth.matrix()(q, i), estimate.matrix()(q, j));
                acc += w * w;
            }
            cost(i, j) = acc;
        }
    out.permutation = min_cost_assignment(cost);
    out.per_path_error.resize(k);
    for (int i = 0; i < k; ++i) {
        out.per_path_error(i) = cost(i, out.permutation[static_cast<size_t>(i)]);
        out.total += out.per_path_error(i);
    }
    return out;
}

VectorXcd ls_channel_estimate(const MeasurementOperator& op, const VectorXcd& y) {
    const OperatorSvd& svd = op.svd();
    VectorXcd yhat = svd.u.adjoint() * y;
    for (Eigen::Index i = 0; i < yhat.size(); ++i) yhat(i) /= svd.s(i);
    return svd.v * yhat;
}

ExperimentResult run_experiment(const ExperimentConfig& config, int threads) {
    const SensingMatrix tx_sensing = config.tx_selection.empty()
                                         ? SensingMatrix::identity(config.tx_dims)
                                         : SensingMatrix(config.tx_selection, config.tx_dims);
    const SensingMatrix rx_sensing = config.rx_selection.empty()
                                         ? SensingMatrix::identity(config.rx_dims)
                                         : SensingMatrix(config.rx_selection, config.rx_dims);
    const SensingMatrix composite = compose_sensing(tx_sensing, rx_sensing);
    const DimensionVector dims = composite.source_dims();
    const long lu = dims.total();
    const int d_l = dims.order();
    const int n_rx = rx_sensing.n_selected();
    const int m_tx = tx_sensing.n_selected();

    // Checker annotation per K before running.
    std::string conditions_csv = "K,last_dim_exceeds_k,dim_sum_ok,kappa_ok,kappa\n";
    {
        const int kappa = reconstruction_degree(composite).kappa;
        for (int k : config.k_list) {
            RecoveryConditions rc = check_recovery_conditions(dims, k);
            rc.kappa = kappa;
            rc.kappa_ok = kappa >= 2L * k + (d_l - 1);
            conditions_csv += std::to_string(k) + "," + std::to_string(rc.last_dim_exceeds_k) + "," +
                              std::to_string(rc.dim_sum_ok) + "," + std::to_string(rc.kappa_ok) + "," +
                              std::to_string(rc.kappa) + "\n";
        }
    }

    // Grid points in deterministic order.
    std::vector<GridPoint> points;
    for (const auto& alphabet : config.alphabets)
        for (int p : config.p_list)
            for (int k : config.k_list) {
                if (config.noiseless()) {
                    points.push_back({alphabet, p, k, std::nullopt, 0});
                } else {
                    for (size_t si = 0; si < config.snr_db_list.size(); ++si)
                        points.push_back({alphabet, p, k, config.snr_db_list[si], static_cast<int>(si)});
                }
            }

    // Shared read-only dictionaries, built before the pool starts.
    const bool want_omp = std::count(config.methods.begin(), config.methods.end(), "omp") > 0;
    const bool want_music = std::count(config.methods.begin(), config.methods.end(), "music") > 0;
    const double target_ops = an_target_ops(dims, config.budget_epsilon);
    std::map<int, GridDictionary> omp_dicts, music_dicts;
    for (int k : config.k_list) {
        if (want_omp) {
            long len = complexity_budget(BaselineMethod::Omp, dims, k, target_ops, std::nullopt, config.dict_max);
            GridDictionary dict(dims, grid_sizes_for_length(dims, len));
            dict.atoms();  // materialize once, shared read-only afterwards
            omp_dicts.emplace(k, std::move(dict));
        }
        if (want_music) {
            long len = complexity_budget(BaselineMethod::Music, dims, k, target_ops, config.music_h, config.dict_max);
            music_dicts.emplace(k, GridDictionary(dims, grid_sizes_for_length(dims, len)));
        }
    }

    const size_t n_methods = config.methods.size();
    std::vector<std::vector<TrialOutcome>> outcomes(points.size());
    for (auto& v : outcomes) v.resize(static_cast<size_t>(config.trials));
    std::vector<double> point_runtime(points.size(), 0.0);

    auto run_trial = [&](size_t pi, int trial) {
        const GridPoint& gp = points[pi];
        TrialOutcome& out = outcomes[pi][static_cast<size_t>(trial)];
        out.channel_se.assign(n_methods, std::numeric_limits<double>::quiet_NaN());
        out.freq_err.assign(n_methods, std::numeric_limits<double>::quiet_NaN());
        out.failed.assign(n_methods, 0);

        const std::uint64_t point_tag =
            derive_seed(config.seed, static_cast<std::uint64_t>(gp.alphabet) + 1,
                        static_cast<std::uint64_t>(gp.p), static_cast<std::uint64_t>(gp.k),
                        static_cast<std::uint64_t>(gp.snr_index));
        SparseChannel ch = draw_channel(gp.k, config.tx_dims, config.rx_dims,
                                        derive_seed(point_tag, 11, static_cast<std::uint64_t>(trial)));
        PilotMatrix pilot = generate_pilots(gp.alphabet, m_tx, gp.p,
                                            derive_seed(point_tag, 13, static_cast<std::uint64_t>(trial)));
        MeasurementOperator op = build_operator(pilot, composite, n_rx);
        VectorXcd h_u = composite_model(ch);
        Observation obs = observe(op, h_u, gp.snr_db,
                                  derive_seed(point_tag, 17, static_cast<std::uint64_t>(trial)),
                                  static_cast<double>(gp.k));

        for (size_t mi = 0; mi < n_methods; ++mi) {
            const std::string& method = config.methods[mi];
            VectorXcd l_hat;
            std::optional<FrequencySet> freqs;
            bool solve_failed = false, freq_failed = false;
            try {
                if (method == "an") {
                    ANProblem prob;
                    prob.op = &op;
                    prob.y = obs.y;
                    prob.dims = dims;
                    prob.mode = config.noiseless() ? SolveMode::NoiselessEquality : SolveMode::NoisyBall;
                    prob.noise_bound = config.noiseless() ? 0.0 : obs.noise_variance;
                    prob.config = config.solver;
                    SolveReport rep = solve(prob);
                    if (rep.status != SolveStatus::Optimal) {
                        solve_failed = true;
                    } else {
                        l_hat = rep.l_u_hat;
                        try {
                            ExtractedModel em = extract_frequencies(rep, gp.k);
                            freqs = em.freqs;
                        } catch (const DecompositionError&) {
                            freq_failed = true;
                        }
                    }
                } else if (method == "omp") {
                    OmpResult r = omp_estimate(op, obs.y, gp.k, omp_dicts.at(gp.k));
                    l_hat = r.l_u_hat;
                    if (r.freqs.count() == gp.k)
                        freqs = r.freqs;
                    else
                        freq_failed = true;
                } else if (method == "music") {
                    VectorXcd pre = ls_channel_estimate(op, obs.y);
                    MusicResult r = music_estimate(pre, dims, gp.k, config.music_h, music_dicts.at(gp.k));
                    freqs = r.freqs;
                    MatrixXcd atoms = atom_matrix(dims, r.freqs);
                    MatrixXcd through = op.dense() * atoms;
                    VectorXcd gains = through.colPivHouseholderQr().solve(obs.y);
                    l_hat = atoms * gains;
                } else if (method == "lmmse") {
                    l_hat = lmmse_estimate(op, obs.y, gp.k, obs.noise_variance);
                } else if (method == "ls") {
                    l_hat = ls_channel_estimate(op, obs.y);
                }
            } catch (const std::exception&) {
                solve_failed = true;  // per-trial failures never abort the sweep
            }

            if (!solve_failed && l_hat.size() == lu)
                out.channel_se[mi] = (h_u - l_hat).squaredNorm();
            if (!solve_failed && !freq_failed && freqs && freqs->count() == gp.k)
                out.freq_err[mi] = match_frequencies(ch.freqs, *freqs).total;
            out.failed[mi] = solve_failed || freq_failed;
        }
    };

    // Worker pool over all (point, trial) tasks.
    const int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    const long total_tasks = static_cast<long>(points.size()) * config.trials;
    std::atomic<long> next{0};
    auto t0 = std::chrono::steady_clock::now();
    auto worker = [&]() {
        while (true) {
            long task = next.fetch_add(1);
            if (task >= total_tasks) break;
            run_trial(static_cast<size_t>(task / config.trials), static_cast<int>(task % config.trials));
        }
    };
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    auto t1 = std::chrono::steady_clock::now();
    const double wall = std::chrono::duration<double>(t1 - t0).count();

    // Deterministic aggregation (fixed trial order).
    ExperimentResult result;
    result.conditions_csv = conditions_csv;
    result.results_csv = "method,alphabet,P,K,snr_db,channel_mse,freq_mse,trials,failures\n";
    result.timing_csv = "method,alphabet,P,K,snr_db,runtime_seconds\n";
    for (size_t pi = 0; pi < points.size(); ++pi) {
        const GridPoint& gp = points[pi];
        for (size_t mi = 0; mi < n_methods; ++mi) {
            MetricRecord rec;
            rec.method = config.methods[mi];
            rec.alphabet = gp.alphabet;
            rec.p = gp.p;
            rec.k = gp.k;
            rec.snr_db = gp.snr_db;
            rec.trials = config.trials;
            double ch_acc = 0.0;
            long ch_n = 0;
            double fr_acc = 0.0;
            long fr_n = 0;
            int failures = 0;
            for (int t = 0; t < config.trials; ++t) {
                const TrialOutcome& o = outcomes[pi][static_cast<size_t>(t)];
                if (!std::isnan(o.channel_se[mi])) {
                    ch_acc += o.channel_se[mi];
                    ++ch_n;
                }
                if (!std::isnan(o.freq_err[mi])) {
                    fr_acc += o.freq_err[mi];
                    ++fr_n;
                }
                failures += o.failed[mi];
            }
            rec.failures = failures;
            rec.channel_mse = ch_n ? ch_acc / (static_cast<double>(ch_n) * static_cast<double>(lu))
                                   : std::numeric_limits<double>::quiet_NaN();
            const bool has_freq = rec.method == "an" || rec.method == "omp" || rec.method == "music";
            if (has_freq && fr_n > 0)
                rec.freq_mse = fr_acc / (static_cast<double>(fr_n) * gp.k * d_l);
            rec.runtime_seconds = wall / static_cast<double>(points.size() * n_methods);

            std::string snr_field = gp.snr_db ? fmt_double(*gp.snr_db) : "";
            result.results_csv += rec.method + "," + to_string(rec.alphabet) + "," + std::to_string(rec.p) +
                                  "," + std::to_string(rec.k) + "," + snr_field + "," +
                                  fmt_double(rec.channel_mse) + "," +
                                  (rec.freq_mse ? fmt_double(*rec.freq_mse) : "") + "," +
                                  std::to_string(rec.trials) + "," + std::to_string(rec.failures) + "\n";
            result.timing_csv += rec.method + "," + to_string(rec.alphabet) + "," + std::to_string(rec.p) +
                                 "," + std::to_string(rec.k) + "," + snr_field + "," +
                                 fmt_double(rec.runtime_seconds) + "\n";
            result.records.push_back(std::move(rec));
        }
    }
    return result;
}

ExperimentResult run_experiment_to_dir(const ExperimentConfig& config, const std::string& out_dir,
                                       int threads) {
    ExperimentResult res = run_experiment(config, threads);
    std::filesystem::create_directories(out_dir);
    write_text_file(out_dir + "/" + config.name + ".csv", res.results_csv);
    write_text_file(out_dir + "/" + config.name + "_conditions.csv", res.conditions_csv);
    write_text_file(out_dir + "/" + config.name + "_timing.csv", res.timing_csv);
    return res;
}

}  // namespace mltspec
