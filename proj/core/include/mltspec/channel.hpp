#ifndef MLTSPEC_CHANNEL_HPP
#define MLTSPEC_CHANNEL_HPP

#include "mltspec/array.hpp"
#include "mltspec/common.hpp"

namespace mltspec {

/// Sparse parametric channel: composite torus frequencies (one column per
/// path, in the canonical merged dimension order) plus complex path gains.
struct SparseChannel {
    FrequencySet freqs;            // d_L x K composite frequencies
    VectorXcd gains;               // K complex path gains
    DimensionVector tx_dims;
    DimensionVector rx_dims;
    std::vector<int> dim_perm;     // slot p of the composite order reads merged[dim_perm[p]]

    int paths() const { return static_cast<int>(gains.size()); }
    DimensionVector composite_dims() const;

    /// Transmit-side frequencies g_k (departure), recovered from the composite set.
    MatrixXd tx_freqs() const;
    /// Receive-side frequencies f_k (arrival).
    MatrixXd rx_freqs() const;
};

/// Draw K paths with frequencies i.i.d. uniform on the torus and standard
/// complex normal gains. Deterministic under the seed.
SparseChannel draw_channel(int K, const DimensionVector& tx_dims, const DimensionVector& rx_dims,
                           std::uint64_t rng_seed);

/// N x M channel matrix H = sum_k gamma_k v_N(f_k) v_M^T(-g_k).
MatrixXcd channel_matrix(const SparseChannel& ch, const SensingMatrix& tx_sensing,
                         const SensingMatrix& rx_sensing);

/// Composite parametric channel vector h_u = U_L(l_{1:K}) gamma.
VectorXcd composite_model(const SparseChannel& ch);

/// L_u x K matrix whose columns are the atoms at the given frequencies.
MatrixXcd atom_matrix(const DimensionVector& dims, const FrequencySet& freqs);

/// True iff sum_i L_i >= 2K + (d_L - 1): a K-atom model with element-wise
/// distinct frequencies has a unique linear representation.
bool check_unique_representation(const DimensionVector& dims, int K);

}  // namespace mltspec

#endif  // MLTSPEC_CHANNEL_HPP
