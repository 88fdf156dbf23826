#ifndef MLTSPEC_MEASUREMENT_HPP
#define MLTSPEC_MEASUREMENT_HPP

#include <memory>
#include <optional>

#include "mltspec/array.hpp"
#include "mltspec/common.hpp"

namespace mltspec {

enum class PilotAlphabet { BPSK, QPSK, Gaussian };

const char* to_string(PilotAlphabet a);
PilotAlphabet pilot_alphabet_from_string(const std::string& s);

/// Known transmitted symbol block, M antennas x P uses.
struct PilotMatrix {
    MatrixXcd entries;
    PilotAlphabet alphabet = PilotAlphabet::QPSK;

    int m() const { return static_cast<int>(entries.rows()); }
    int p() const { return static_cast<int>(entries.cols()); }
};

/// i.i.d. pilots from the requested alphabet; deterministic under the seed.
/// BPSK: +-1. QPSK: +-1 +- j (unnormalized). Gaussian: real standard normal.
PilotMatrix generate_pilots(PilotAlphabet alphabet, int m, int p, std::uint64_t rng_seed);

struct PilotConditionReport {
    bool has_left_pseudo_inverse = false;  // rank(P^T) = M and P >= M
    int krank = 0;                         // Kruskal rank of P^T
};

/// Left-pseudo-inverse and Kruskal-rank check (exhaustive column subsets;
/// refused for M or P above 8).
PilotConditionReport check_pilot_conditions(const PilotMatrix& pilot);

/// Thin SVD of the realized measurement matrix, truncated to numerical rank.
struct OperatorSvd {
    MatrixXcd u;   // L x r
    VectorXd s;    // r
    MatrixXcd v;   // L_u x r
    int rank = 0;
};

/// Factored measurement operator Q = (P^T kron I_N) A^L mapping the composite
/// channel vector (length L_u) to L = P*N observations.
class MeasurementOperator {
  public:
    MeasurementOperator() = default;
    MeasurementOperator(PilotMatrix pilot, SensingMatrix composite_sensing, int n_rx);

    int n_rx() const { return n_rx_; }
    int n_pilot() const { return pilot_.p(); }
    int m_tx() const { return pilot_.m(); }
    long l() const { return static_cast<long>(pilot_.p()) * n_rx_; }
    long l_u() const { return sensing_.n_uniform(); }
    const PilotMatrix& pilot() const { return pilot_; }
    const SensingMatrix& sensing() const { return sensing_; }
    const DimensionVector& dims() const { return sensing_.source_dims(); }

    /// y = Q x via the factored path (gather, reshape, pilot multiply).
    VectorXcd apply(const VectorXcd& x) const;
    /// x = Q^dagger y (adjoint of apply).
    VectorXcd apply_adjoint(const VectorXcd& y) const;

    /// Dense realization; cached when L * L_u <= 1e6 entries.
    const MatrixXcd& dense() const;
    /// Rank-truncated SVD of the dense realization (cached).
    const OperatorSvd& svd() const;
    int rank() const { return svd().rank; }

  private:
    PilotMatrix pilot_;
    SensingMatrix sensing_;
    int n_rx_ = 0;
    mutable std::shared_ptr<MatrixXcd> dense_;
    mutable std::shared_ptr<OperatorSvd> svd_;
};

/// Builds Q = (P^T kron I_N) A^L; the composite sensing must select N*M rows.
MeasurementOperator build_operator(const PilotMatrix& pilot, const SensingMatrix& composite_sensing,
                                   int n_rx);

struct Observation {
    VectorXcd y;
    double noise_variance = 0.0;            // per-component sigma^2_w
    std::optional<double> snr_db;
};

/// Noiseless when snr_db is absent; otherwise adds circular complex Gaussian
/// noise with sigma^2_w = expected_signal_power / SNR, where the expected
/// power of the sparse model is its path count K (unit atoms, unit gains).
Observation observe(const MeasurementOperator& op, const VectorXcd& h_u,
                    std::optional<double> snr_db, std::uint64_t rng_seed,
                    double expected_signal_power = 1.0);

/// Numerical rank with the 1e-9 * sigma_max threshold used throughout.
int numerical_rank(const MatrixXcd& m, double rel_tol = 1e-9);

}  // namespace mltspec

#endif  // MLTSPEC_MEASUREMENT_HPP
