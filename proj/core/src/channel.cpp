#include "mltspec/channel.hpp"

#include "mltspec/rng.hpp"

namespace mltspec {

DimensionVector SparseChannel::composite_dims() const {
    return canonical_dim_permutation(tx_dims, rx_dims).second;
}

MatrixXd SparseChannel::tx_freqs() const {
    // Composite column k stores Pi_d [-g_k, f_k]; invert the permutation and
    // negate the transmit block.
    const int d_tx = tx_dims.order();
    MatrixXd g(d_tx, paths());
    for (size_t p = 0; p < dim_perm.size(); ++p) {
        int q = dim_perm[p];
        if (q < d_tx)
            for (int k = 0; k < paths(); ++k) g(q, k) = wrap01(-freqs.matrix()(static_cast<int>(p), k));
    }
    return g;
}

MatrixXd SparseChannel::rx_freqs() const {
    const int d_tx = tx_dims.order();
    MatrixXd f(rx_dims.order(), paths());
    for (size_t p = 0; p < dim_perm.size(); ++p) {
        int q = dim_perm[p];
        if (q >= d_tx)
            for (int k = 0; k < paths(); ++k) f(q - d_tx, k) = freqs.matrix()(static_cast<int>(p), k);
    }
    return f;
}

SparseChannel draw_channel(int K, const DimensionVector& tx_dims, const DimensionVector& rx_dims,
                           std::uint64_t rng_seed) {
    if (K < 1) throw std::invalid_argument("draw_channel: K must be >= 1");
    auto [perm, sorted] = canonical_dim_permutation(tx_dims, rx_dims);
    const int d_l = sorted.order();

    Rng rng(rng_seed);
    MatrixXd cat(d_l, K);  // merged-order frequencies [-g; f], uniform on the torus either way
    for (int k = 0; k < K; ++k)
        for (int q = 0; q < d_l; ++q) cat(q, k) = rng.uniform01();
    MatrixXd composite(d_l, K);
    for (int p = 0; p < d_l; ++p) composite.row(p) = cat.row(perm[static_cast<size_t>(p)]);

    VectorXcd gains(K);
    for (int k = 0; k < K; ++k) gains(k) = rng.complex_normal();

    SparseChannel ch;
    ch.freqs = FrequencySet(std::move(composite));
    ch.gains = std::move(gains);
    ch.tx_dims = tx_dims;
    ch.rx_dims = rx_dims;
    ch.dim_perm = std::move(perm);
    return ch;
}

MatrixXcd channel_matrix(const SparseChannel& ch, const SensingMatrix& tx_sensing,
                         const SensingMatrix& rx_sensing) {
    if (!(tx_sensing.source_dims() == ch.tx_dims) || !(rx_sensing.source_dims() == ch.rx_dims))
        throw std::invalid_argument("channel_matrix: sensing matrices incompatible with channel dims");
    const int n = rx_sensing.n_selected();
    const int m = tx_sensing.n_selected();
    MatrixXcd h = MatrixXcd::Zero(n, m);
    MatrixXd g = ch.tx_freqs();
    MatrixXd f = ch.rx_freqs();
    for (int k = 0; k < ch.paths(); ++k) {
        VectorXd minus_g = -g.col(k);
        VectorXcd vm = heterogeneous_steering(tx_sensing, ch.tx_dims, minus_g);
        VectorXcd vn = heterogeneous_steering(rx_sensing, ch.rx_dims, f.col(k));
        h.noalias() += ch.gains(k) * vn * vm.transpose();
    }
    return h;
}

VectorXcd composite_model(const SparseChannel& ch) {
    return atom_matrix(ch.composite_dims(), ch.freqs) * ch.gains;
}

MatrixXcd atom_matrix(const DimensionVector& dims, const FrequencySet& freqs) {
    if (freqs.order() != dims.order()) throw std::invalid_argument("atom_matrix: dimension mismatch");
    MatrixXcd u(dims.total(), freqs.count());
    for (int k = 0; k < freqs.count(); ++k) u.col(k) = steering_vector(dims, freqs.column(k));
    return u;
}

bool check_unique_representation(const DimensionVector& dims, int K) {
    long sum = 0;
    for (int i = 0; i < dims.order(); ++i) sum += dims[i];
    return sum >= 2L * K + (dims.order() - 1);
}

}  // namespace mltspec
