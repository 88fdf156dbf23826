#ifndef MLTSPEC_VANDERMONDE_HPP
#define MLTSPEC_VANDERMONDE_HPP

#include <optional>
#include <vector>

#include "mltspec/mlt.hpp"

namespace mltspec {

/// Atoms-and-weights factorization T = U D U^dagger of a PSD rank-deficient
/// multi-level Toeplitz matrix.
struct VandermondeDecomposition {
    DimensionVector dims;
    FrequencySet freqs;   // d x r
    VectorXd weights;     // r, positive
    double residual = 0.0;  // relative Frobenius reconstruction error

    MatrixXcd realize() const;
};

enum class DecomposeErrorCode {
    NotPsd,
    Inadmissible,
    RankTooLarge,
    ShiftRankDeficient,
    PairingAmbiguous,
    NonPositiveWeight,
    ResidualTooLarge,
};

class DecompositionError : public std::runtime_error {
  public:
    DecompositionError(DecomposeErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    DecomposeErrorCode code() const { return code_; }

  private:
    DecomposeErrorCode code_;
};

/// Per-level shift-invariance stage: the factor rows restricted to the level,
/// the unitary rotation solving the shift equation and its eigen-frequencies.
struct ShiftStage {
    int level = 0;
    MatrixXcd factor;      // C_{i:d}, (prod_{s>=i} L_s) x r
    MatrixXcd rotation;    // O_i, r x r near-unitary
    MatrixXcd eigvecs;     // K_i, eigenvector basis of O_i
    VectorXd eigfreqs;     // l'_i in eigenvalue order
    double residual = 0.0;  // relative shift-equation residual
};

struct DecomposeOptions {
    std::optional<int> forced_rank;  // override the numerical rank (noisy use)
    bool strict = true;              // enforce admissibility, tolerances, positivity
    double rank_tol = 1e-7;          // eigenvalue threshold relative to lambda_max
    double stage_tol = 1e-6;         // relative shift-equation residual bound
    double pairing_margin = 1.01;    // best/second-best assignment ratio per row
    std::optional<std::uint64_t> shuffle_seed;  // test knob: permute eigen order per stage
};

/// Rank-revealing PSD factor C with C C^dagger = realize(gen); realized via
/// the top-r eigenpairs (classical Cholesky fails off the full-rank case).
MatrixXcd low_rank_factor(const MLTGenerator& gen, const DecomposeOptions& opts = {});

/// Solve the level-i shift equation on the factor rows and extract the
/// per-level frequencies from the rotation's eigenvalues.
ShiftStage shift_stage(const MatrixXcd& factor, const DimensionVector& dims, int level,
                       const DecomposeOptions& opts = {});

/// Pair per-level eigenfrequencies into consistent d-tuples via the
/// amplitude-coupling assignment.
FrequencySet pair_frequencies(const std::vector<ShiftStage>& stages, const DimensionVector& dims,
                              const DecomposeOptions& opts = {});

/// Full multi-level Vandermonde decomposition (factor, stages, pairing,
/// weights). Strict mode enforces the admissibility hypotheses and the
/// reconstruction residual; non-strict mode degrades gracefully on noisy
/// input with a forced rank.
VandermondeDecomposition decompose(const MLTGenerator& gen, const DecomposeOptions& opts = {});

}  // namespace mltspec

#endif  // MLTSPEC_VANDERMONDE_HPP
