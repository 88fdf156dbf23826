#include "mltspec/vandermonde.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <numeric>
#include <random>

#include "mltspec/assignment.hpp"
#include "mltspec/channel.hpp"

namespace mltspec {

namespace {

MatrixXcd pseudo_inverse(const MatrixXcd& a, double rel_tol = 1e-12) {
    Eigen::JacobiSVD<MatrixXcd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& s = svd.singularValues();
    const double cut = (s.size() ? s(0) : 0.0) * rel_tol;
    VectorXd inv = VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) inv(i) = (s(i) > cut) ? 1.0 / s(i) : 0.0;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint();
}

DimensionVector tail_dims(const DimensionVector& dims, int from_level) {
    std::vector<int> t(dims.dims().begin() + from_level, dims.dims().end());
    return DimensionVector(t);
}

}  // namespace

MatrixXcd VandermondeDecomposition::realize() const {
    if (freqs.count() == 0) return MatrixXcd::Zero(dims.total(), dims.total());
    MatrixXcd u = atom_matrix(dims, freqs);
    return u * weights.asDiagonal() * u.adjoint();
}

MatrixXcd low_rank_factor(const MLTGenerator& gen, const DecomposeOptions& opts) {
    MatrixXcd t = gen.realize();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(t);
    const VectorXd& ev = es.eigenvalues();  // ascending
    const long n = t.rows();
    const double lmax = std::max(ev(n - 1), 0.0);
    if (ev(0) < -1e-9 * std::max(1.0, lmax))
        throw DecompositionError(DecomposeErrorCode::NotPsd, "low_rank_factor: matrix is not PSD");

    int r;
    if (opts.forced_rank) {
        r = std::min<int>(*opts.forced_rank, static_cast<int>(n));
    } else {
        r = 0;
        for (long i = 0; i < n; ++i)
            if (ev(i) > opts.rank_tol * lmax) ++r;
    }
    MatrixXcd c(n, r);
    for (int j = 0; j < r; ++j) {
        const long idx = n - 1 - j;  // descending eigenvalues
        c.col(j) = es.eigenvectors().col(idx) * std::sqrt(std::max(ev(idx), 0.0));
    }
    return c;
}

ShiftStage shift_stage(const MatrixXcd& factor, const DimensionVector& dims, int level,
                       const DecomposeOptions& opts) {
    const int d = dims.order();
    if (level < 0 || level >= d) throw std::invalid_argument("shift_stage: bad level");
    long tail = 1;
    for (int s = level + 1; s < d; ++s) tail *= dims[s];
    const long rows = static_cast<long>(dims[level]) * tail;
    if (factor.rows() != rows) throw std::invalid_argument("shift_stage: factor row count mismatch");
    const int r = static_cast<int>(factor.cols());

    const long nsel = (dims[level] - 1) * tail;
    MatrixXcd cl = factor.topRows(nsel);
    MatrixXcd cu = factor.middleRows(tail, nsel);

    Eigen::JacobiSVD<MatrixXcd> svd(cl, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const VectorXd& s = svd.singularValues();
    const double smax = s.size() ? s(0) : 0.0;
    int numeric_rank = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-10 * smax) ++numeric_rank;
    if (opts.strict && numeric_rank < r)
        throw DecompositionError(DecomposeErrorCode::ShiftRankDeficient,
                                 "shift_stage: shift system rank-deficient at level " + std::to_string(level));

    VectorXd sinv = VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i) sinv(i) = (s(i) > 1e-10 * smax) ? 1.0 / s(i) : 0.0;
    MatrixXcd o_ls = svd.matrixV() * sinv.asDiagonal() * (svd.matrixU().adjoint() * cu);

    // Nearest unitary (polar factor): the shift relation holds exactly only in
    // exact arithmetic.
    Eigen::JacobiSVD<MatrixXcd> polar(o_ls, Eigen::ComputeFullU | Eigen::ComputeFullV);
    MatrixXcd o = polar.matrixU() * polar.matrixV().adjoint();

    ShiftStage stage;
    stage.level = level;
    stage.factor = factor;
    stage.rotation = o;
    stage.residual = (cl * o - cu).norm() / std::max(cu.norm(), 1e-300);
    if (opts.strict && stage.residual > opts.stage_tol)
        throw DecompositionError(DecomposeErrorCode::ResidualTooLarge,
                                 "shift_stage: residual " + std::to_string(stage.residual) +
                                     " above tolerance at level " + std::to_string(level));

    Eigen::ComplexEigenSolver<MatrixXcd> eig(o);
    stage.eigvecs = eig.eigenvectors();
    stage.eigfreqs.resize(r);
    for (int k = 0; k < r; ++k) stage.eigfreqs(k) = wrap01(std::arg(eig.eigenvalues()(k)) / two_pi);

    if (opts.shuffle_seed) {
        std::mt19937_64 g(*opts.shuffle_seed + static_cast<std::uint64_t>(level));
        std::vector<int> p(static_cast<size_t>(r));
        std::iota(p.begin(), p.end(), 0);
        std::shuffle(p.begin(), p.end(), g);
        VectorXd f(r);
        MatrixXcd k(r, r);
        for (int j = 0; j < r; ++j) {
            f(j) = stage.eigfreqs(p[static_cast<size_t>(j)]);
            k.col(j) = stage.eigvecs.col(p[static_cast<size_t>(j)]);
        }
        stage.eigfreqs = f;
        stage.eigvecs = k;
    }
    return stage;
}

FrequencySet pair_frequencies(const std::vector<ShiftStage>& stages, const DimensionVector& dims,
                              const DecomposeOptions& opts) {
    const int d = dims.order();
    if (static_cast<int>(stages.size()) != d) throw std::invalid_argument("pair_frequencies: need one stage per level");
    const int r = static_cast<int>(stages.back().eigfreqs.size());
    for (const auto& st : stages)
        if (st.eigfreqs.size() != r) throw std::invalid_argument("pair_frequencies: stage ranks differ");
    if (r == 0) return FrequencySet(MatrixXd(d, 0));

    // Current tuple estimate for levels j+1..d-1, columns in a fixed working
    // order; each loop turn aligns level j's eigen-order to it.
    MatrixXd paired(1, r);
    paired.row(0) = stages[static_cast<size_t>(d - 1)].eigfreqs.transpose();

    for (int j = d - 2; j >= 0; --j) {
        const ShiftStage& next = stages[static_cast<size_t>(j + 1)];
        MatrixXcd u = atom_matrix(tail_dims(dims, j + 1), FrequencySet(paired));
        MatrixXcd u_pinv = pseudo_inverse(u);
        MatrixXcd gram = next.factor * next.factor.adjoint();
        MatrixXcd m = u_pinv * gram * u_pinv.adjoint();

        // Hermitian inverse square root of the (near-diagonal, PSD) coupling
        // normalizer.
        MatrixXcd m_sym = 0.5 * (m + m.adjoint());
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m_sym);
        VectorXd lam = es.eigenvalues();
        const double clamp = std::max(lam.maxCoeff(), 1.0) * 1e-14;
        VectorXd inv_sqrt(r);
        for (int k = 0; k < r; ++k) inv_sqrt(k) = 1.0 / std::sqrt(std::max(lam(k), clamp));
        MatrixXcd m_inv_sqrt = es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();

        MatrixXcd coupling = m_inv_sqrt * (u_pinv * next.factor);
        MatrixXd weight = (coupling * stages[static_cast<size_t>(j)].eigvecs).cwiseAbs();

        std::vector<int> assign = max_weight_assignment(weight);

        // Ambiguity test: per row the winner must beat the best alternative
        // carrying a different frequency by the configured margin.
        const VectorXd& lvl = stages[static_cast<size_t>(j)].eigfreqs;
        for (int k = 0; k < r; ++k) {
            const double best = weight(k, assign[static_cast<size_t>(k)]);
            double second = 0.0;
            for (int c = 0; c < r; ++c) {
                if (c == assign[static_cast<size_t>(k)]) continue;
                if (wrap_dist(lvl(c), lvl(assign[static_cast<size_t>(k)])) <= 1e-9) continue;
                second = std::max(second, weight(k, c));
            }
            if (best < opts.pairing_margin * second)
                throw DecompositionError(DecomposeErrorCode::PairingAmbiguous,
                                         "pair_frequencies: ambiguous assignment at level " + std::to_string(j));
        }

        MatrixXd grown(paired.rows() + 1, r);
        for (int k = 0; k < r; ++k) grown(0, k) = lvl(assign[static_cast<size_t>(k)]);
        grown.bottomRows(paired.rows()) = paired;
        paired.swap(grown);
    }
    return FrequencySet(paired);
}

VandermondeDecomposition decompose(const MLTGenerator& gen, const DecomposeOptions& opts) {
    const DimensionVector& dims = gen.dims();
    const int d = dims.order();
    const int ld = dims[d - 1];

    MatrixXcd t = gen.realize();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(t);
    const VectorXd& ev = es.eigenvalues();
    const long n = t.rows();
    const double lmax = std::max(ev(n - 1), 0.0);
    if (opts.strict && ev(0) < -1e-9 * std::max(1.0, lmax))
        throw DecompositionError(DecomposeErrorCode::NotPsd, "decompose: input is not PSD");

    int r;
    if (opts.forced_rank) {
        r = *opts.forced_rank;
    } else {
        r = 0;
        for (long i = 0; i < n; ++i)
            if (ev(i) > opts.rank_tol * lmax) ++r;
    }
    if (r > ld)
        throw DecompositionError(DecomposeErrorCode::RankTooLarge,
                                 "decompose: rank " + std::to_string(r) + " exceeds the last dimension " +
                                     std::to_string(ld));
    if (opts.strict) {
        AdmissibilityReport rep = decomposition_admissible(gen, opts.rank_tol);
        if (!rep.admissible)
            throw DecompositionError(DecomposeErrorCode::Inadmissible,
                                     "decompose: inadmissible input (rank " + std::to_string(rep.rank) +
                                         ", corner rank " + std::to_string(rep.corner_rank) + ")");
    }

    VandermondeDecomposition out;
    out.dims = dims;
    if (r == 0) {
        out.freqs = FrequencySet(MatrixXd(d, 0));
        out.weights = VectorXd(0);
        out.residual = 0.0;
        return out;
    }

    MatrixXcd c(n, r);
    for (int j = 0; j < r; ++j) {
        const long idx = n - 1 - j;
        c.col(j) = es.eigenvectors().col(idx) * std::sqrt(std::max(ev(idx), 0.0));
    }

    std::vector<ShiftStage> stages;
    stages.reserve(static_cast<size_t>(d));
    MatrixXcd cur = c;
    for (int i = 0; i < d; ++i) {
        stages.push_back(shift_stage(cur, dims, i, opts));
        long tail = 1;
        for (int s = i + 1; s < d; ++s) tail *= dims[s];
        if (i + 1 < d) cur = cur.topRows(tail).eval();
    }

    out.freqs = pair_frequencies(stages, dims, opts);

    // Weights by least squares on the outer-product mixture:
    // s um_p d_p |u_k^H u_p|^2 = u_k^H T u_k.
    MatrixXcd u = atom_matrix(dims, out.freqs);
    MatrixXcd overlaps = u.adjoint() * u;
    MatrixXd gram = overlaps.cwiseAbs2();
    VectorXd rhs(r);
    MatrixXcd tu = t * u;
    for (int k = 0; k < r; ++k) rhs(k) = (u.col(k).adjoint() * tu.col(k))(0).real();
    VectorXd w = gram.ldlt().solve(rhs);
    for (int k = 0; k < r; ++k) {
        if (w(k) <= 0.0) {
            if (opts.strict)
                throw DecompositionError(DecomposeErrorCode::NonPositiveWeight,
                                         "decompose: non-positive weight at atom " + std::to_string(k));
            w(k) = 1e-15;
        }
    }
    out.weights = w;

    out.residual = (u * w.asDiagonal() * u.adjoint() - t).norm() / std::max(t.norm(), 1e-300);
    if (opts.strict && out.residual > 1e-7)
        throw DecompositionError(DecomposeErrorCode::ResidualTooLarge,
                                 "decompose: reconstruction residual " + std::to_string(out.residual));
    return out;
}

}  // namespace mltspec
