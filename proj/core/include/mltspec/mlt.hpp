#ifndef MLTSPEC_MLT_HPP
#define MLTSPEC_MLT_HPP

#include <memory>

#include "mltspec/common.hpp"

namespace mltspec {

/// Lag bookkeeping for a d-level Toeplitz structure: every entry pair (m, n)
/// maps to the lag tuple n_m - n_n; distinct lags number prod_i (2 L_i - 1).
/// The pair->lag map is precomputed once per dimension vector because the SDP
/// solver projects onto this subspace every iteration.
class LagTable {
  public:
    explicit LagTable(const DimensionVector& dims);

    const DimensionVector& dims() const { return dims_; }
    long n_lags() const { return n_lags_; }
    long l_u() const { return l_u_; }
    /// Lag id for the entry (row m, col n).
    int pair_lag(long m, long n) const { return pair_lag_[static_cast<size_t>(m * l_u_ + n)]; }
    /// Number of matrix entries sharing each lag.
    const std::vector<int>& counts() const { return counts_; }
    /// Lag id of the negated lag tuple.
    int negate(int lag) const { return negate_[static_cast<size_t>(lag)]; }
    int zero_lag() const { return zero_lag_; }
    /// Lag tuple (a_1, ..., a_d) of a lag id, entries in [-(L_i-1), L_i-1].
    std::vector<int> lag_tuple(int lag) const;
    int lag_id(const std::vector<int>& tuple) const;

    static std::shared_ptr<const LagTable> shared(const DimensionVector& dims);

  private:
    DimensionVector dims_;
    long l_u_ = 0;
    long n_lags_ = 0;
    int zero_lag_ = 0;
    std::vector<int> pair_lag_;
    std::vector<int> counts_;
    std::vector<int> negate_;
};

/// Lag-indexed Hermitian generating coefficients of a d-level Toeplitz
/// matrix; realize() has entry (m, n) = coeff(n_m - n_n).
class MLTGenerator {
  public:
    MLTGenerator() = default;
    /// Zero generator on the given (canonical) dims.
    explicit MLTGenerator(const DimensionVector& dims);
    MLTGenerator(std::shared_ptr<const LagTable> table, VectorXcd coeffs);

    const DimensionVector& dims() const { return table_->dims(); }
    const LagTable& table() const { return *table_; }
    std::shared_ptr<const LagTable> table_ptr() const { return table_; }
    const VectorXcd& coeffs() const { return coeffs_; }
    VectorXcd& coeffs() { return coeffs_; }

    cxd coeff(const std::vector<int>& lag_tuple) const {
        return coeffs_(table_->lag_id(lag_tuple));
    }

    /// Trace of the realization: L_u * coeff(0).
    double trace() const { return static_cast<double>(table_->l_u()) * coeffs_(table_->zero_lag()).real(); }

    /// Enforce coeff(-a) = conj(coeff(a)) and a real zero lag (averages the
    /// conjugate pair; used after reading external data).
    void symmetrize();

    MatrixXcd realize() const;
    void realize_into(MatrixXcd& out) const;

  private:
    std::shared_ptr<const LagTable> table_;
    VectorXcd coeffs_;
};

/// Adjoint of realize: coeff(a) = mean of the entries of m with lag a.
/// realize(project_to_mlt(m)) is the orthogonal projection onto the MLT
/// subspace.
MLTGenerator project_to_mlt(const MatrixXcd& m, const DimensionVector& dims);
void project_to_mlt_into(const MatrixXcd& m, const LagTable& table, VectorXcd& coeffs);

/// Generator of sum_k d_k u(l_k) u(l_k)^dagger, computed in the lag domain.
MLTGenerator from_atoms(const DimensionVector& dims, const FrequencySet& freqs, const VectorXd& weights);

/// Leading principal submatrix of the realization.
MatrixXcd upper_left_corner(const MLTGenerator& gen, long size);

struct AdmissibilityReport {
    int rank = 0;
    int corner_rank = 0;
    bool admissible = false;
    bool psd = false;
    double min_eigenvalue = 0.0;
};

/// Lemma-style admissibility of the Vandermonde decomposition: rank below
/// both L_u and L_d with a matching-rank L_d x L_d upper-left corner.
/// rank_tol is the eigenvalue threshold relative to the largest eigenvalue.
AdmissibilityReport decomposition_admissible(const MLTGenerator& gen, double rank_tol = 1e-7);

}  // namespace mltspec

#endif  // MLTSPEC_MLT_HPP
