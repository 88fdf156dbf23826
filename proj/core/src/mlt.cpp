#include "mltspec/mlt.hpp"

#include <Eigen/Eigenvalues>
#include <map>
#include <mutex>

namespace mltspec {

LagTable::LagTable(const DimensionVector& dims) : dims_(dims) {
    const int d = dims.order();
    MultiIndex mi(dims);
    l_u_ = mi.total();

    std::vector<long> lag_strides(static_cast<size_t>(d), 1);
    for (int i = d - 2; i >= 0; --i)
        lag_strides[static_cast<size_t>(i)] =
            lag_strides[static_cast<size_t>(i) + 1] * (2L * dims[i + 1] - 1);
    n_lags_ = lag_strides[0] * (2L * dims[0] - 1);

    std::vector<int> zero(static_cast<size_t>(d), 0);
    zero_lag_ = 0;
    for (int i = 0; i < d; ++i) zero_lag_ += static_cast<int>((dims[i] - 1) * lag_strides[static_cast<size_t>(i)]);

    pair_lag_.resize(static_cast<size_t>(l_u_ * l_u_));
    counts_.assign(static_cast<size_t>(n_lags_), 0);
    std::vector<std::vector<int>> coords(static_cast<size_t>(l_u_));
    for (long n = 0; n < l_u_; ++n) coords[static_cast<size_t>(n)] = mi.unrank(n);
    for (long m = 0; m < l_u_; ++m) {
        const auto& cm = coords[static_cast<size_t>(m)];
        for (long n = 0; n < l_u_; ++n) {
            const auto& cn = coords[static_cast<size_t>(n)];
            long id = 0;
            for (int i = 0; i < d; ++i)
                id += (cm[static_cast<size_t>(i)] - cn[static_cast<size_t>(i)] + dims[i] - 1) *
                      lag_strides[static_cast<size_t>(i)];
            pair_lag_[static_cast<size_t>(m * l_u_ + n)] = static_cast<int>(id);
            ++counts_[static_cast<size_t>(id)];
        }
    }

    negate_.resize(static_cast<size_t>(n_lags_));
    for (long id = 0; id < n_lags_; ++id) {
        long rem = id, neg = 0;
        for (int i = 0; i < d; ++i) {
            long a = rem / lag_strides[static_cast<size_t>(i)] - (dims[i] - 1);
            rem %= lag_strides[static_cast<size_t>(i)];
            neg += (-a + dims[i] - 1) * lag_strides[static_cast<size_t>(i)];
        }
        negate_[static_cast<size_t>(id)] = static_cast<int>(neg);
    }
}

std::vector<int> LagTable::lag_tuple(int lag) const {
    const int d = dims_.order();
    std::vector<long> lag_strides(static_cast<size_t>(d), 1);
    for (int i = d - 2; i >= 0; --i)
        lag_strides[static_cast<size_t>(i)] = lag_strides[static_cast<size_t>(i) + 1] * (2L * dims_[i + 1] - 1);
    std::vector<int> t(static_cast<size_t>(d));
    long rem = lag;
    for (int i = 0; i < d; ++i) {
        t[static_cast<size_t>(i)] = static_cast<int>(rem / lag_strides[static_cast<size_t>(i)]) - (dims_[i] - 1);
        rem %= lag_strides[static_cast<size_t>(i)];
    }
    return t;
}

int LagTable::lag_id(const std::vector<int>& tuple) const {
    const int d = dims_.order();
    if (static_cast<int>(tuple.size()) != d) throw std::invalid_argument("LagTable::lag_id: bad tuple size");
    long id = 0, stride = 1;
    for (int i = d - 1; i >= 0; --i) {
        int a = tuple[static_cast<size_t>(i)];
        if (a <= -dims_[i] || a >= dims_[i]) throw std::invalid_argument("LagTable::lag_id: lag out of range");
        id += (a + dims_[i] - 1) * stride;
        stride *= 2L * dims_[i] - 1;
    }
    return static_cast<int>(id);
}

std::shared_ptr<const LagTable> LagTable::shared(const DimensionVector& dims) {
    static std::mutex mu;
    static std::map<std::vector<int>, std::shared_ptr<const LagTable>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(dims.dims());
    if (it != cache.end()) return it->second;
    auto t = std::make_shared<const LagTable>(dims);
    cache.emplace(dims.dims(), t);
    return t;
}

MLTGenerator::MLTGenerator(const DimensionVector& dims)
    : table_(LagTable::shared(dims)), coeffs_(VectorXcd::Zero(table_->n_lags())) {}

MLTGenerator::MLTGenerator(std::shared_ptr<const LagTable> table, VectorXcd coeffs)
    : table_(std::move(table)), coeffs_(std::move(coeffs)) {
    if (coeffs_.size() != table_->n_lags()) throw std::invalid_argument("MLTGenerator: coefficient count mismatch");
}

void MLTGenerator::symmetrize() {
    for (int id = 0; id < table_->n_lags(); ++id) {
        int neg = table_->negate(id);
        if (neg < id) continue;
        cxd avg = 0.5 * (coeffs_(id) + std::conj(coeffs_(neg)));
        coeffs_(id) = avg;
        coeffs_(neg) = std::conj(avg);
    }
    coeffs_(table_->zero_lag()) = coeffs_(table_->zero_lag()).real();
}

MatrixXcd MLTGenerator::realize() const {
    MatrixXcd out(table_->l_u(), table_->l_u());
    realize_into(out);
    return out;
}

void MLTGenerator::realize_into(MatrixXcd& out) const {
    const long n = table_->l_u();
    out.resize(n, n);
    const cxd* c = coeffs_.data();
    for (long m = 0; m < n; ++m)
        for (long j = 0; j < n; ++j) out(m, j) = c[table_->pair_lag(m, j)];
}

void project_to_mlt_into(const MatrixXcd& m, const LagTable& table, VectorXcd& coeffs) {
    const long n = table.l_u();
    if (m.rows() != n || m.cols() != n) throw std::invalid_argument("project_to_mlt: size mismatch");
    coeffs.setZero(table.n_lags());
    for (long r = 0; r < n; ++r)
        for (long j = 0; j < n; ++j) coeffs(table.pair_lag(r, j)) += m(r, j);
    const auto& cnt = table.counts();
    for (long id = 0; id < table.n_lags(); ++id) coeffs(id) /= static_cast<double>(cnt[static_cast<size_t>(id)]);
    // Hermitian input makes the conjugate symmetry automatic; enforce it so
    // tiny asymmetries cannot accumulate.
    for (int id = 0; id < table.n_lags(); ++id) {
        int neg = table.negate(id);
        if (neg < id) continue;
        cxd avg = 0.5 * (coeffs(id) + std::conj(coeffs(neg)));
        coeffs(id) = avg;
        coeffs(neg) = std::conj(avg);
    }
    coeffs(table.zero_lag()) = coeffs(table.zero_lag()).real();
}

MLTGenerator project_to_mlt(const MatrixXcd& m, const DimensionVector& dims) {
    auto table = LagTable::shared(dims);
    VectorXcd coeffs;
    project_to_mlt_into(m, *table, coeffs);
    return MLTGenerator(table, std::move(coeffs));
}

MLTGenerator from_atoms(const DimensionVector& dims, const FrequencySet& freqs, const VectorXd& weights) {
    if (freqs.order() != dims.order()) throw std::invalid_argument("from_atoms: dimension mismatch");
    if (weights.size() != freqs.count()) throw std::invalid_argument("from_atoms: weight count mismatch");
    for (Eigen::Index k = 0; k < weights.size(); ++k)
        if (weights(k) <= 0.0) throw std::invalid_argument("from_atoms: weights must be positive");

    auto table = LagTable::shared(dims);
    VectorXcd coeffs = VectorXcd::Zero(table->n_lags());
    const double lu = static_cast<double>(table->l_u());
    for (int id = 0; id < table->n_lags(); ++id) {
        std::vector<int> a = table->lag_tuple(id);
        cxd acc = 0.0;
        for (int k = 0; k < freqs.count(); ++k) {
            double phase = 0.0;
            for (int i = 0; i < dims.order(); ++i) phase += freqs.matrix()(i, k) * a[static_cast<size_t>(i)];
            acc += weights(k) * std::polar(1.0 / lu, two_pi * phase);
        }
        coeffs(id) = acc;
    }
    return MLTGenerator(table, std::move(coeffs));
}

MatrixXcd upper_left_corner(const MLTGenerator& gen, long size) {
    if (size < 1 || size > gen.table().l_u())
        throw std::invalid_argument("upper_left_corner: size out of range");
    MatrixXcd out(size, size);
    for (long m = 0; m < size; ++m)
        for (long n = 0; n < size; ++n) out(m, n) = gen.coeffs()(gen.table().pair_lag(m, n));
    return out;
}

namespace {
int count_rank(const VectorXd& eigenvalues, double rank_tol) {
    const double lmax = eigenvalues.size() ? eigenvalues.maxCoeff() : 0.0;
    if (lmax <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < eigenvalues.size(); ++i)
        if (eigenvalues(i) > rank_tol * lmax) ++r;
    return r;
}
}  // namespace

AdmissibilityReport decomposition_admissible(const MLTGenerator& gen, double rank_tol) {
    AdmissibilityReport rep;
    MatrixXcd t = gen.realize();
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(t, Eigen::EigenvaluesOnly);
    const VectorXd& ev = es.eigenvalues();
    rep.min_eigenvalue = ev.minCoeff();
    const double lmax = std::max(ev.maxCoeff(), 0.0);
    rep.psd = rep.min_eigenvalue >= -1e-9 * std::max(1.0, lmax);
    rep.rank = count_rank(ev, rank_tol);

    const int ld = gen.dims()[gen.dims().order() - 1];
    Eigen::SelfAdjointEigenSolver<MatrixXcd> esc(upper_left_corner(gen, ld), Eigen::EigenvaluesOnly);
    rep.corner_rank = count_rank(esc.eigenvalues(), rank_tol);

    rep.admissible = rep.psd && rep.rank < gen.table().l_u() && rep.corner_rank == rep.rank &&
                     rep.rank < ld;
    return rep;
}

}  // namespace mltspec
