#include "mltspec/baselines.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <algorithm>
#include <cmath>

#include "mltspec/channel.hpp"

namespace mltspec {

GridDictionary::GridDictionary(DimensionVector dims, std::vector<int> grid_sizes)
    : dims_(std::move(dims)), sizes_(std::move(grid_sizes)) {
    if (static_cast<int>(sizes_.size()) != dims_.order())
        throw std::invalid_argument("GridDictionary: one grid size per dimension");
    length_ = 1;
    for (int g : sizes_) {
        if (g < 1) throw std::invalid_argument("GridDictionary: grid sizes must be >= 1");
        length_ *= g;
    }
}

VectorXd GridDictionary::freq(long index) const {
    VectorXd f(dims_.order());
    for (int i = dims_.order() - 1; i >= 0; --i) {
        const int g = sizes_[static_cast<size_t>(i)];
        f(i) = static_cast<double>(index % g) / g;
        index /= g;
    }
    return f;
}

const MatrixXcd& GridDictionary::atoms() const {
    if (!atoms_) {
        auto a = std::make_shared<MatrixXcd>(dims_.total(), length_);
        for (long j = 0; j < length_; ++j) a->col(j) = steering_vector(dims_, freq(j));
        atoms_ = std::move(a);
    }
    return *atoms_;
}

std::vector<int> grid_sizes_for_length(const DimensionVector& dims, long length) {
    const int d = dims.order();
    std::vector<int> g(static_cast<size_t>(d), 1);
    if (length < 1) return g;
    while (true) {
        // Grow the currently smallest grid size; ties prefer larger physical
        // dimensions, then lower index.
        int pick = -1;
        for (int i = 0; i < d; ++i) {
            if (pick < 0 || g[static_cast<size_t>(i)] < g[static_cast<size_t>(pick)] ||
                (g[static_cast<size_t>(i)] == g[static_cast<size_t>(pick)] && dims[i] > dims[pick]))
                pick = i;
        }
        long prod = 1;
        for (int i = 0; i < d; ++i) prod *= g[static_cast<size_t>(i)];
        if (prod / g[static_cast<size_t>(pick)] * (g[static_cast<size_t>(pick)] + 1) > length) break;
        ++g[static_cast<size_t>(pick)];
    }
    return g;
}

OmpResult omp_estimate(const MeasurementOperator& op, const VectorXcd& y, int k,
                       const GridDictionary& dict) {
    if (k < 1) throw std::invalid_argument("omp_estimate: K must be >= 1");
    const MatrixXcd& atoms = dict.atoms();
    MatrixXcd effective = op.dense() * atoms;  // L x G
    const long g = dict.length();

    VectorXd col_norm(g);
    for (long j = 0; j < g; ++j) col_norm(j) = effective.col(j).norm();
    const double norm_floor = 1e-12 * std::max(col_norm.maxCoeff(), 1e-300);

    std::vector<long> selected;
    std::vector<char> taken(static_cast<size_t>(g), 0);
    VectorXcd residual = y;
    VectorXcd gains;
    MatrixXcd e_sel;
    for (int step = 0; step < k; ++step) {
        long best = -1;
        double best_score = -1.0;
        for (long j = 0; j < g; ++j) {
            if (taken[static_cast<size_t>(j)] || col_norm(j) <= norm_floor) continue;
            const double score = std::abs(effective.col(j).dot(residual)) / col_norm(j);
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        if (best < 0) break;
        taken[static_cast<size_t>(best)] = 1;
        selected.push_back(best);

        e_sel.conservativeResize(effective.rows(), static_cast<long>(selected.size()));
        e_sel.col(static_cast<long>(selected.size()) - 1) = effective.col(best);
        gains = e_sel.colPivHouseholderQr().solve(y);
        residual = y - e_sel * gains;
    }

    OmpResult out;
    MatrixXd f(dict.dims().order(), static_cast<int>(selected.size()));
    MatrixXcd a_sel(dict.dims().total(), static_cast<long>(selected.size()));
    for (size_t i = 0; i < selected.size(); ++i) {
        f.col(static_cast<int>(i)) = dict.freq(selected[i]);
        a_sel.col(static_cast<long>(i)) = atoms.col(selected[i]);
    }
    out.freqs = FrequencySet(f);
    out.gains = gains;
    out.l_u_hat = a_sel * gains;
    out.selected = std::move(selected);
    return out;
}

MusicResult music_estimate(const VectorXcd& h_estimate, const DimensionVector& dims, int k,
                           std::optional<int> h_param, const GridDictionary& grid) {
    const int d = dims.order();
    if (h_estimate.size() != dims.total()) throw std::invalid_argument("music_estimate: size mismatch");

    // Per-dimension Hankel split: 1-D uses the requested H directly, higher
    // dimensions a two-factor split closest to square.
    std::vector<int> hs(static_cast<size_t>(d));
    if (d == 1) {
        int h = h_param.value_or(static_cast<int>(dims.total()) - 1);
        if (h < 1 || h >= dims.total()) throw std::invalid_argument("music_estimate: need 1 <= H < L_u");
        hs[0] = h;
    } else {
        for (int i = 0; i < d; ++i) hs[static_cast<size_t>(i)] = (dims[i] + 2) / 2;
    }
    long h_total = 1, s_total = 1;
    for (int i = 0; i < d; ++i) {
        h_total *= hs[static_cast<size_t>(i)];
        s_total *= dims[i] - hs[static_cast<size_t>(i)] + 1;
    }
    if (k >= h_total) throw std::invalid_argument("music_estimate: K must be below the stacking size");

    // Multi-level Hankel: X[(p),(q)] = h[p + q].
    std::vector<int> hdims_v(hs.begin(), hs.end());
    DimensionVector hdims(hdims_v);
    std::vector<int> sdims_v(static_cast<size_t>(d));
    for (int i = 0; i < d; ++i) sdims_v[static_cast<size_t>(i)] = dims[i] - hs[static_cast<size_t>(i)] + 1;
    DimensionVector sdims(sdims_v);
    MultiIndex mi_h(hdims), mi_s(sdims), mi_full(dims);
    MatrixXcd x(h_total, s_total);
    for (long p = 0; p < h_total; ++p) {
        std::vector<int> cp = mi_h.unrank(p);
        for (long q = 0; q < s_total; ++q) {
            std::vector<int> cq = mi_s.unrank(q);
            std::vector<int> c(static_cast<size_t>(d));
            for (int i = 0; i < d; ++i) c[static_cast<size_t>(i)] = cp[static_cast<size_t>(i)] + cq[static_cast<size_t>(i)];
            x(p, q) = h_estimate(mi_full.rank(c));
        }
    }

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(x * x.adjoint());
    MatrixXcd noise = es.eigenvectors().leftCols(h_total - k);  // H - K minor eigenvectors

    // Pseudo-spectrum over the grid, evaluated chunkwise through the noise
    // subspace.
    const long g = grid.length();
    VectorXd spectrum(g);
    const long chunk = 4096;
    MatrixXcd a_chunk(h_total, std::min(chunk, g));
    for (long start = 0; start < g; start += chunk) {
        const long cols = std::min(chunk, g - start);
        for (long j = 0; j < cols; ++j) a_chunk.col(j) = steering_vector(hdims, grid.freq(start + j));
        MatrixXcd proj = noise.adjoint() * a_chunk.leftCols(cols);
        for (long j = 0; j < cols; ++j) spectrum(start + j) = 1.0 / std::max(proj.col(j).squaredNorm(), 1e-300);
    }

    // Strict local maxima on the wrapped grid.
    const std::vector<int>& gs = grid.grid_sizes();
    MultiIndex mi_g{DimensionVector(gs)};
    std::vector<long> peaks;
    for (long j = 0; j < g; ++j) {
        std::vector<int> c = mi_g.unrank(j);
        bool is_peak = true;
        std::vector<int> nb(c);
        std::vector<int> offset(static_cast<size_t>(d), -1);
        while (is_peak) {
            bool all_zero = true;
            for (int i = 0; i < d && all_zero; ++i) all_zero = offset[static_cast<size_t>(i)] == 0;
            if (!all_zero) {
                for (int i = 0; i < d; ++i) {
                    int v = c[static_cast<size_t>(i)] + offset[static_cast<size_t>(i)];
                    const int gi = gs[static_cast<size_t>(i)];
                    nb[static_cast<size_t>(i)] = (v + gi) % gi;
                }
                long nj = mi_g.rank(nb);
                if (nj != j && spectrum(nj) >= spectrum(j)) is_peak = false;
            }
            int i = d - 1;
            while (i >= 0 && ++offset[static_cast<size_t>(i)] == 2) {
                offset[static_cast<size_t>(i)] = -1;
                --i;
            }
            if (i < 0) break;
        }
        if (is_peak) peaks.push_back(j);
    }
    std::sort(peaks.begin(), peaks.end(), [&](long a, long b) {
        if (spectrum(a) != spectrum(b)) return spectrum(a) > spectrum(b);
        return a < b;
    });
    // Not enough strict maxima (flat or noise-dominated spectra): pad with the
    // largest remaining grid values so K points are always reported.
    if (static_cast<int>(peaks.size()) < k) {
        std::vector<long> order(static_cast<size_t>(g));
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](long a, long b) {
            if (spectrum(a) != spectrum(b)) return spectrum(a) > spectrum(b);
            return a < b;
        });
        std::vector<char> have(static_cast<size_t>(g), 0);
        for (long p : peaks) have[static_cast<size_t>(p)] = 1;
        for (long j : order) {
            if (static_cast<int>(peaks.size()) >= k) break;
            if (!have[static_cast<size_t>(j)]) peaks.push_back(j);
        }
    }

    MusicResult out;
    MatrixXd f(d, k);
    out.peak_values.resize(k);
    for (int i = 0; i < k; ++i) {
        f.col(i) = grid.freq(peaks[static_cast<size_t>(i)]);
        out.peak_values(i) = spectrum(peaks[static_cast<size_t>(i)]);
    }
    out.freqs = FrequencySet(f);
    out.effective_h = static_cast<int>(h_total);
    return out;
}

VectorXcd lmmse_estimate(const MeasurementOperator& op, const VectorXcd& y, int k, double sigma2) {
    if (sigma2 < 0.0) throw std::invalid_argument("lmmse_estimate: sigma2 must be >= 0");
    const double c = static_cast<double>(k) / static_cast<double>(op.l_u());
    const OperatorSvd& svd = op.svd();
    // l = c Q^H (c Q Q^H + sigma^2 I)^{-1} y; singular directions drop out of
    // Q^H, so the thin SVD evaluates the regularized solve exactly.
    VectorXcd yhat = svd.u.adjoint() * y;
    VectorXcd scaled(yhat.size());
    for (Eigen::Index i = 0; i < yhat.size(); ++i) {
        const double s = svd.s(i);
        scaled(i) = c * s / (c * s * s + sigma2) * yhat(i);
    }
    return svd.v * scaled;
}

double an_target_ops(const DimensionVector& dims, double epsilon) {
    const double lu = static_cast<double>(dims.total());
    return (std::pow(lu, 3.5) + std::pow(lu, 2.5) + std::sqrt(lu)) * std::log(1.0 / epsilon);
}

double omp_ops(long dict_length, int k, long l_u) {
    const double l = static_cast<double>(dict_length);
    const double lu = static_cast<double>(l_u);
    double acc = k * (l * l * k + lu * k + l);
    for (int j = 1; j <= k; ++j)
        acc += static_cast<double>(j) * j * j + 2.0 * lu * j * j + 2.0 * lu * k * j;
    return acc;
}

double music_ops(long dict_length, int h, int k, int d) {
    const double l = static_cast<double>(dict_length);
    const double hd = static_cast<double>(h);
    return l * (hd * hd + hd * d - hd * k + 2.0 * hd - k + 1.0) + hd * (hd - k) * (hd - k);
}

long complexity_budget(BaselineMethod method, const DimensionVector& dims, int k, double target_ops,
                       std::optional<int> music_h, long max_length) {
    int h = 0;
    if (method == BaselineMethod::Music) {
        if (music_h) {
            h = *music_h;
        } else if (dims.order() == 1) {
            h = static_cast<int>(dims.total()) - 1;
        } else {
            h = 1;
            for (int i = 0; i < dims.order(); ++i) h *= (dims[i] + 2) / 2;
        }
    }
    auto cost = [&](long len) {
        return method == BaselineMethod::Omp ? omp_ops(len, k, dims.total()) : music_ops(len, h, k, dims.order());
    };
    if (cost(1) > target_ops) return 1;
    long lo = 1, hi = max_length;
    if (cost(hi) <= target_ops) return hi;
    while (lo + 1 < hi) {
        long mid = lo + (hi - lo) / 2;
        (cost(mid) <= target_ops ? lo : hi) = mid;
    }
    return lo;
}

}  // namespace mltspec
