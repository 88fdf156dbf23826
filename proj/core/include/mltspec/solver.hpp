#ifndef MLTSPEC_SOLVER_HPP
#define MLTSPEC_SOLVER_HPP

#include <optional>

#include "mltspec/measurement.hpp"
#include "mltspec/mlt.hpp"
#include "mltspec/vandermonde.hpp"

namespace mltspec {

enum class SolveMode { NoiselessEquality, NoisyBall };
enum class SolveStatus { Optimal, MaxIter, Infeasible };

const char* to_string(SolveStatus s);

struct SolverConfig {
    double tol_noiseless = 1e-7;
    double tol_noisy = 1e-6;
    int max_iterations = 50000;
    double rho_init = 1.0;
    double rho_ratio = 10.0;       // residual-balancing trigger
    double rho_factor = 2.0;       // multiply/divide step
    int rho_interval = 50;         // iterations between balance checks
    double relaxation = 1.6;       // over-relaxation factor (1 = plain ADMM)
    double rank_tol = 1e-6;        // eigenvalue threshold for rank_estimate
    int trace_interval = 0;        // > 0: progress lines on stderr every so many iterations
};

/// Nuclear atomic-norm program over the bordered PSD matrix: minimize
/// (t + tr T)/2 subject to [[T, l],[l^H, t]] PSD, T multi-level Toeplitz,
/// and the data constraint (Q l = y, or ||Q l - y||^2 <= P N sigma^2_w).
struct ANProblem {
    const MeasurementOperator* op = nullptr;
    VectorXcd y;
    DimensionVector dims;
    SolveMode mode = SolveMode::NoiselessEquality;
    double noise_bound = 0.0;  // sigma^2_w; the ball radius squared is P*N*noise_bound
    SolverConfig config;
};

struct SolveReport {
    VectorXcd l_u_hat;
    MLTGenerator t_hat;
    double t_scalar = 0.0;
    double objective = 0.0;
    int rank_estimate = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIter;
    double psd_slack = 0.0;       // min eigenvalue of the bordered matrix
    double data_residual = 0.0;   // ||Q l - y||
    double rho = 0.0;
};

/// First-order operator-splitting (ADMM) solve of the program above.
SolveReport solve(const ANProblem& problem);

struct ExtractedModel {
    FrequencySet freqs;
    VectorXcd gains;
    VandermondeDecomposition decomposition;
};

/// Frequencies from the optimal MLT block via Vandermonde decomposition
/// (rank forced to K when known), gains by least squares of l_u_hat on the
/// recovered atoms.
ExtractedModel extract_frequencies(const SolveReport& report, std::optional<int> k_known = std::nullopt);

struct RecoveryConditions {
    // Structural conditions on the dimension vector and sparsity degree.
    bool last_dim_exceeds_k = false;   // L_d > K
    bool dim_sum_ok = false;           // sum L_i >= 2K + (d_L - 1)
    bool kappa_ok = false;             // kappa_L >= 2K + (d_L - 1)
    int kappa = 0;
    // Pilot conditions (left pseudo-inverse; Kruskal rank equal to P with
    // P > 2K for the k-rank route). Present when an operator is supplied.
    bool pilot_left_pseudo_inverse = false;
    int pilot_krank = 0;
    bool pilot_krank_ok = false;
    // Post-hoc variants with the solved rank in place of K (strict forms).
    std::optional<bool> posthoc_dim_ok;
    std::optional<bool> posthoc_kappa_ok;
};

RecoveryConditions check_recovery_conditions(const DimensionVector& dims, int k,
                                             const MeasurementOperator* op = nullptr,
                                             std::optional<int> solved_rank = std::nullopt);

/// Objective value; equals the atomic norm sum |gamma_k| on exact-recovery
/// instances.
double atomic_norm_value(const SolveReport& report);

}  // namespace mltspec

#endif  // MLTSPEC_SOLVER_HPP
