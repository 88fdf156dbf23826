#include "mltspec/array.hpp"

#include <algorithm>
#include <numeric>

namespace mltspec {

SensingMatrix::SensingMatrix(std::vector<int> row_selection, DimensionVector source_dims)
    : rows_(std::move(row_selection)), source_(std::move(source_dims)) {
    const long nu = source_.total();
    if (rows_.empty() || static_cast<long>(rows_.size()) > nu)
        throw std::invalid_argument("SensingMatrix: need 1..N_u selected rows");
    std::vector<char> seen(static_cast<size_t>(nu), 0);
    for (int r : rows_) {
        if (r < 0 || r >= nu) throw std::invalid_argument("SensingMatrix: index out of range");
        if (seen[static_cast<size_t>(r)]) throw std::invalid_argument("SensingMatrix: duplicate index");
        seen[static_cast<size_t>(r)] = 1;
    }
}

SensingMatrix SensingMatrix::identity(const DimensionVector& dims) {
    std::vector<int> sel(static_cast<size_t>(dims.total()));
    std::iota(sel.begin(), sel.end(), 0);
    return SensingMatrix(std::move(sel), dims);
}

bool SensingMatrix::is_identity() const {
    if (static_cast<long>(rows_.size()) != source_.total()) return false;
    for (size_t i = 0; i < rows_.size(); ++i)
        if (rows_[i] != static_cast<int>(i)) return false;
    return true;
}

MatrixXd SensingMatrix::realize() const {
    MatrixXd a = MatrixXd::Zero(n_selected(), n_uniform());
    for (int i = 0; i < n_selected(); ++i) a(i, rows_[static_cast<size_t>(i)]) = 1.0;
    return a;
}

VectorXcd SensingMatrix::apply(const VectorXcd& x) const {
    if (x.size() != n_uniform()) throw std::invalid_argument("SensingMatrix::apply: size mismatch");
    VectorXcd y(n_selected());
    for (int i = 0; i < n_selected(); ++i) y(i) = x(rows_[static_cast<size_t>(i)]);
    return y;
}

VectorXcd SensingMatrix::adjoint(const VectorXcd& y) const {
    if (y.size() != n_selected()) throw std::invalid_argument("SensingMatrix::adjoint: size mismatch");
    VectorXcd x = VectorXcd::Zero(n_uniform());
    for (int i = 0; i < n_selected(); ++i) x(rows_[static_cast<size_t>(i)]) = y(i);
    return x;
}

VectorXcd steering_vector(const DimensionVector& dims, const VectorXd& freq) {
    if (freq.size() != dims.order())
        throw std::invalid_argument("steering_vector: dimension mismatch between dims and freq");
    VectorXcd v = VectorXcd::Ones(1);
    for (int i = 0; i < dims.order(); ++i) {
        const int li = dims[i];
        VectorXcd ui(li);
        const double f = freq(i);
        for (int n = 0; n < li; ++n) ui(n) = std::polar(1.0 / std::sqrt(double(li)), two_pi * f * n);
        VectorXcd w(v.size() * li);
        for (Eigen::Index a = 0; a < v.size(); ++a)
            for (int b = 0; b < li; ++b) w(a * li + b) = v(a) * ui(b);
        v.swap(w);
    }
    return v;
}

VectorXd angles_to_frequency(double theta, double phi, const std::vector<double>& spacing, int d) {
    if (d < 1 || d > 3) throw std::invalid_argument("angles_to_frequency: d must be in 1..3");
    if (static_cast<int>(spacing.size()) < d)
        throw std::invalid_argument("angles_to_frequency: spacing needs at least d entries");
    for (int i = 0; i < d; ++i)
        if (spacing[static_cast<size_t>(i)] <= 0.0)
            throw std::invalid_argument("angles_to_frequency: spacing entries must be positive");
    double raw[3] = {spacing[0] * std::cos(theta),
                     d > 1 ? spacing[1] * std::sin(theta) * std::sin(phi) : 0.0,
                     d > 2 ? spacing[2] * std::sin(theta) * std::cos(phi) : 0.0};
    VectorXd f(d);
    for (int i = 0; i < d; ++i) f(i) = wrap01(raw[i]);
    return f;
}

VectorXcd heterogeneous_steering(const SensingMatrix& sensing, const DimensionVector& dims,
                                 const VectorXd& freq) {
    if (!(sensing.source_dims() == dims))
        throw std::invalid_argument("heterogeneous_steering: sensing built on different dims");
    return sensing.apply(steering_vector(dims, freq));
}

namespace {

struct BoxCandidate {
    int delta;
    int stride;
    int extent;
};

// Per-dimension arithmetic-progression candidates, sorted by extent descending
// so that large embeddings are found early and bound-pruning bites.
std::vector<BoxCandidate> dim_candidates(int l) {
    std::vector<BoxCandidate> out;
    for (int extent = l; extent >= 1; --extent) {
        if (extent == 1) {
            for (int delta = 0; delta < l; ++delta) out.push_back({delta, 1, 1});
            continue;
        }
        for (int stride = 1; stride * (extent - 1) <= l - 1; ++stride)
            for (int delta = 0; delta + stride * (extent - 1) <= l - 1; ++delta)
                out.push_back({delta, stride, extent});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const BoxCandidate& a, const BoxCandidate& b) { return a.extent > b.extent; });
    return out;
}

struct KappaSearch {
    const std::vector<char>& occupied;
    const MultiIndex& mi;
    int d;
    std::vector<std::vector<BoxCandidate>> cands;
    std::vector<int> max_extent_suffix;  // max achievable sum of extents for dims >= t

    std::vector<BoxCandidate> current;
    int best_kappa = 0;
    std::vector<int> best_delta, best_stride, best_extent;

    bool box_contained() const {
        std::vector<int> idx(static_cast<size_t>(d), 0);
        while (true) {
            long flat = 0;
            for (int i = 0; i < d; ++i) {
                const BoxCandidate& c = current[static_cast<size_t>(i)];
                flat += static_cast<long>(c.delta + c.stride * idx[static_cast<size_t>(i)]) * mi.stride(i);
            }
            if (!occupied[static_cast<size_t>(flat)]) return false;
            int i = d - 1;
            while (i >= 0 && ++idx[static_cast<size_t>(i)] == current[static_cast<size_t>(i)].extent) {
                idx[static_cast<size_t>(i)] = 0;
                --i;
            }
            if (i < 0) return true;
        }
    }

    void consider_leaf() {
        int kappa = 0;
        for (const auto& c : current) kappa += c.extent;
        if (kappa < best_kappa) return;
        if (!box_contained()) return;
        std::vector<int> delta(static_cast<size_t>(d)), stride(static_cast<size_t>(d)), extent(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) {
            delta[static_cast<size_t>(i)] = current[static_cast<size_t>(i)].delta;
            stride[static_cast<size_t>(i)] = current[static_cast<size_t>(i)].stride;
            extent[static_cast<size_t>(i)] = current[static_cast<size_t>(i)].extent;
        }
        if (kappa > best_kappa ||
            std::tie(delta, stride) < std::tie(best_delta, best_stride)) {
            best_kappa = kappa;
            best_delta = std::move(delta);
            best_stride = std::move(stride);
            best_extent = std::move(extent);
        }
    }

    void dfs(int t, int partial) {
        if (t == d) {
            consider_leaf();
            return;
        }
        for (const auto& c : cands[static_cast<size_t>(t)]) {
            if (partial + c.extent + max_extent_suffix[static_cast<size_t>(t) + 1] < best_kappa) break;
            current[static_cast<size_t>(t)] = c;
            dfs(t + 1, partial + c.extent);
        }
    }
};

}  // namespace

ReconstructionDegree reconstruction_degree(const SensingMatrix& sensing) {
    const DimensionVector& dims = sensing.source_dims();
    if (dims.total() > 4096)
        throw std::invalid_argument("reconstruction_degree: exhaustive search bounded to L_u <= 4096");
    const int d = dims.order();
    MultiIndex mi(dims);

    std::vector<char> occupied(static_cast<size_t>(dims.total()), 0);
    for (int r : sensing.row_selection()) occupied[static_cast<size_t>(r)] = 1;

    KappaSearch s{occupied, mi, d, {}, {}, {}, 0, {}, {}, {}};
    s.cands.resize(static_cast<size_t>(d));
    s.max_extent_suffix.assign(static_cast<size_t>(d) + 1, 0);
    for (int i = 0; i < d; ++i) s.cands[static_cast<size_t>(i)] = dim_candidates(dims[i]);
    for (int i = d - 1; i >= 0; --i)
        s.max_extent_suffix[static_cast<size_t>(i)] =
            s.max_extent_suffix[static_cast<size_t>(i) + 1] + dims[i];
    s.current.resize(static_cast<size_t>(d));
    s.dfs(0, 0);

    ReconstructionDegree out;
    out.kappa = s.best_kappa;
    out.embed_dims = DimensionVector(s.best_extent);
    out.delta = s.best_delta;
    out.strides = s.best_stride;
    out.nontrivial = (out.kappa >= d + 1);
    return out;
}

std::pair<std::vector<int>, DimensionVector> canonical_dim_permutation(const DimensionVector& tx_dims,
                                                                       const DimensionVector& rx_dims) {
    std::vector<int> merged(tx_dims.dims());
    merged.insert(merged.end(), rx_dims.dims().begin(), rx_dims.dims().end());
    std::vector<int> perm(merged.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::stable_sort(perm.begin(), perm.end(),
                     [&](int a, int b) { return merged[static_cast<size_t>(a)] < merged[static_cast<size_t>(b)]; });
    std::vector<int> sorted(merged.size());
    for (size_t p = 0; p < perm.size(); ++p) sorted[p] = merged[static_cast<size_t>(perm[p])];
    return {perm, DimensionVector(sorted)};
}

SensingMatrix compose_sensing(const SensingMatrix& tx, const SensingMatrix& rx) {
    auto [perm, sorted] = canonical_dim_permutation(tx.source_dims(), rx.source_dims());
    const int d_tx = tx.source_dims().order();
    const int d_l = sorted.order();
    MultiIndex mi_tx(tx.source_dims()), mi_rx(rx.source_dims()), mi_l(sorted);

    std::vector<int> sel;
    sel.reserve(static_cast<size_t>(tx.n_selected()) * static_cast<size_t>(rx.n_selected()));
    for (int a = 0; a < tx.n_selected(); ++a) {
        std::vector<int> m = mi_tx.unrank(tx.row_selection()[static_cast<size_t>(a)]);
        for (int b = 0; b < rx.n_selected(); ++b) {
            std::vector<int> n = mi_rx.unrank(rx.row_selection()[static_cast<size_t>(b)]);
            std::vector<int> c(static_cast<size_t>(d_l));
            for (int p = 0; p < d_l; ++p) {
                int q = perm[static_cast<size_t>(p)];
                c[static_cast<size_t>(p)] = (q < d_tx) ? m[static_cast<size_t>(q)] : n[static_cast<size_t>(q - d_tx)];
            }
            sel.push_back(static_cast<int>(mi_l.rank(c)));
        }
    }
    return SensingMatrix(std::move(sel), sorted);
}

}  // namespace mltspec
