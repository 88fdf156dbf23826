#include "mltspec/measurement.hpp"

#include <Eigen/SVD>

#include "mltspec/rng.hpp"

namespace mltspec {

const char* to_string(PilotAlphabet a) {
    switch (a) {
        case PilotAlphabet::BPSK: return "bpsk";
        case PilotAlphabet::QPSK: return "qpsk";
        case PilotAlphabet::Gaussian: return "gauss";
    }
    return "?";
}

PilotAlphabet pilot_alphabet_from_string(const std::string& s) {
    if (s == "bpsk" || s == "BPSK") return PilotAlphabet::BPSK;
    if (s == "qpsk" || s == "QPSK") return PilotAlphabet::QPSK;
    if (s == "gauss" || s == "gaussian" || s == "Gaussian") return PilotAlphabet::Gaussian;
    throw std::invalid_argument("unknown pilot alphabet: " + s);
}

PilotMatrix generate_pilots(PilotAlphabet alphabet, int m, int p, std::uint64_t rng_seed) {
    if (m < 1 || p < 1) throw std::invalid_argument("generate_pilots: M, P must be >= 1");
    Rng rng(rng_seed);
    MatrixXcd e(m, p);
    for (int j = 0; j < p; ++j) {
        for (int i = 0; i < m; ++i) {
            switch (alphabet) {
                case PilotAlphabet::BPSK:
                    e(i, j) = (rng.uniform_int(2) == 0) ? 1.0 : -1.0;
                    break;
                case PilotAlphabet::QPSK: {
                    double re = (rng.uniform_int(2) == 0) ? 1.0 : -1.0;
                    double im = (rng.uniform_int(2) == 0) ? 1.0 : -1.0;
                    e(i, j) = cxd(re, im);
                    break;
                }
                case PilotAlphabet::Gaussian:
                    e(i, j) = rng.normal();
                    break;
            }
        }
    }
    return PilotMatrix{std::move(e), alphabet};
}

int numerical_rank(const MatrixXcd& m, double rel_tol) {
    Eigen::JacobiSVD<MatrixXcd> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) <= 0.0) return 0;
    int r = 0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

PilotConditionReport check_pilot_conditions(const PilotMatrix& pilot) {
    PilotConditionReport rep;
    const int m = pilot.m(), p = pilot.p();
    MatrixXcd pt = pilot.entries.transpose();
    rep.has_left_pseudo_inverse = (p >= m) && (numerical_rank(pt) == m);

    if (m > 8 || p > 8)
        throw std::invalid_argument("check_pilot_conditions: krank refused for M or P above 8");

    // Kruskal rank of P^T by exhaustive testing of column subsets.
    int krank = 0;
    for (int k = 1; k <= m; ++k) {
        bool all_independent = true;
        std::vector<int> subset(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i) subset[static_cast<size_t>(i)] = i;
        while (true) {
            MatrixXcd cols(p, k);
            for (int i = 0; i < k; ++i) cols.col(i) = pt.col(subset[static_cast<size_t>(i)]);
            if (numerical_rank(cols) < k) {
                all_independent = false;
                break;
            }
            int i = k - 1;
            while (i >= 0 && subset[static_cast<size_t>(i)] == m - k + i) --i;
            if (i < 0) break;
            ++subset[static_cast<size_t>(i)];
            for (int j = i + 1; j < k; ++j) subset[static_cast<size_t>(j)] = subset[static_cast<size_t>(j - 1)] + 1;
        }
        if (!all_independent) break;
        krank = k;
    }
    rep.krank = krank;
    return rep;
}

MeasurementOperator::MeasurementOperator(PilotMatrix pilot, SensingMatrix composite_sensing, int n_rx)
    : pilot_(std::move(pilot)), sensing_(std::move(composite_sensing)), n_rx_(n_rx) {
    if (static_cast<long>(pilot_.m()) * n_rx_ != sensing_.n_selected())
        throw std::invalid_argument("MeasurementOperator: composite sensing must select N*M rows");
}

MeasurementOperator build_operator(const PilotMatrix& pilot, const SensingMatrix& composite_sensing,
                                   int n_rx) {
    return MeasurementOperator(pilot, composite_sensing, n_rx);
}

VectorXcd MeasurementOperator::apply(const VectorXcd& x) const {
    if (x.size() != l_u()) throw std::invalid_argument("MeasurementOperator::apply: size mismatch");
    // Gather to vec(H); composite rows are ordered (tx index, rx index) with
    // the rx index fastest, i.e. column-major N x M.
    VectorXcd vec_h = sensing_.apply(x);
    Eigen::Map<const MatrixXcd> h(vec_h.data(), n_rx_, pilot_.m());
    MatrixXcd y = h * pilot_.entries;  // N x P
    return Eigen::Map<const VectorXcd>(y.data(), y.size());
}

VectorXcd MeasurementOperator::apply_adjoint(const VectorXcd& yv) const {
    if (yv.size() != l()) throw std::invalid_argument("MeasurementOperator::apply_adjoint: size mismatch");
    Eigen::Map<const MatrixXcd> y(yv.data(), n_rx_, pilot_.p());
    MatrixXcd h = y * pilot_.entries.adjoint();  // N x M
    VectorXcd vec_h = Eigen::Map<const VectorXcd>(h.data(), h.size());
    return sensing_.adjoint(vec_h);
}

const MatrixXcd& MeasurementOperator::dense() const {
    if (!dense_) {
        if (l() * l_u() > 1'000'000)
            throw std::runtime_error("MeasurementOperator::dense: realization above cache bound");
        auto q = std::make_shared<MatrixXcd>(l(), l_u());
        VectorXcd e = VectorXcd::Zero(l_u());
        for (long j = 0; j < l_u(); ++j) {
            e(j) = 1.0;
            q->col(j) = apply(e);
            e(j) = 0.0;
        }
        dense_ = std::move(q);
    }
    return *dense_;
}

const OperatorSvd& MeasurementOperator::svd() const {
    if (!svd_) {
        Eigen::JacobiSVD<MatrixXcd> svd(dense(), Eigen::ComputeThinU | Eigen::ComputeThinV);
        const VectorXd& s = svd.singularValues();
        int r = 0;
        for (Eigen::Index i = 0; i < s.size(); ++i)
            if (s(i) > 1e-12 * s(0)) ++r;
        auto out = std::make_shared<OperatorSvd>();
        out->u = svd.matrixU().leftCols(r);
        out->s = s.head(r);
        out->v = svd.matrixV().leftCols(r);
        out->rank = r;
        svd_ = std::move(out);
    }
    return *svd_;
}

Observation observe(const MeasurementOperator& op, const VectorXcd& h_u,
                    std::optional<double> snr_db, std::uint64_t rng_seed,
                    double expected_signal_power) {
    Observation obs;
    obs.y = op.apply(h_u);
    obs.snr_db = snr_db;
    if (snr_db) {
        const double snr = std::pow(10.0, *snr_db / 10.0);
        obs.noise_variance = expected_signal_power / snr;
        Rng rng(rng_seed);
        const double scale = std::sqrt(obs.noise_variance);
        for (Eigen::Index i = 0; i < obs.y.size(); ++i) obs.y(i) += scale * rng.complex_normal();
    }
    return obs;
}

}  // namespace mltspec
