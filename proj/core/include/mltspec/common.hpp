#ifndef MLTSPEC_COMMON_HPP
#define MLTSPEC_COMMON_HPP

#include <Eigen/Core>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace mltspec {

using cxd = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

inline constexpr double two_pi = 6.283185307179586476925286766559;

/// Reduce x to the torus [0, 1).
inline double wrap01(double x) {
    double r = x - std::floor(x);
    return (r >= 1.0) ? 0.0 : r;  // guard against floor rounding at 1.0-eps
}

/// Wrap-around (torus) distance between two normalized frequencies.
inline double wrap_dist(double a, double b) {
    double d = std::abs(wrap01(a) - wrap01(b));
    return std::min(d, 1.0 - d);
}

/// Ordered antenna/grid counts per dimension. Immutable after construction.
class DimensionVector {
  public:
    DimensionVector() = default;
    explicit DimensionVector(std::vector<int> dims) : dims_(std::move(dims)) {
        if (dims_.empty() || dims_.size() > 6)
            throw std::invalid_argument("DimensionVector: need 1..6 dimensions");
        for (int v : dims_)
            if (v < 1) throw std::invalid_argument("DimensionVector: entries must be >= 1");
        canonical_ = std::is_sorted(dims_.begin(), dims_.end());
    }
    DimensionVector(std::initializer_list<int> dims) : DimensionVector(std::vector<int>(dims)) {}

    int order() const { return static_cast<int>(dims_.size()); }
    int operator[](int i) const { return dims_[static_cast<size_t>(i)]; }
    const std::vector<int>& dims() const { return dims_; }
    bool canonical() const { return canonical_; }

    /// Total element count prod_i L_i.
    long total() const {
        long t = 1;
        for (int v : dims_) t *= v;
        return t;
    }

    bool operator==(const DimensionVector& o) const { return dims_ == o.dims_; }

    std::string to_string() const {
        std::string s = "[";
        for (size_t i = 0; i < dims_.size(); ++i) s += (i ? "," : "") + std::to_string(dims_[i]);
        return s + "]";
    }

  private:
    std::vector<int> dims_;
    bool canonical_ = false;
};

/// Row-major multi-index arithmetic (first dimension varies slowest).
class MultiIndex {
  public:
    explicit MultiIndex(const DimensionVector& dims) : dims_(dims.dims()) {
        strides_.assign(dims_.size(), 1);
        for (int i = static_cast<int>(dims_.size()) - 2; i >= 0; --i)
            strides_[static_cast<size_t>(i)] = strides_[static_cast<size_t>(i) + 1] * dims_[static_cast<size_t>(i) + 1];
        total_ = strides_.empty() ? 1 : strides_[0] * dims_[0];
    }

    long total() const { return total_; }
    int order() const { return static_cast<int>(dims_.size()); }
    long stride(int i) const { return strides_[static_cast<size_t>(i)]; }

    long rank(const std::vector<int>& coords) const {
        long n = 0;
        for (size_t i = 0; i < dims_.size(); ++i) n += coords[i] * strides_[i];
        return n;
    }

    std::vector<int> unrank(long n) const {
        std::vector<int> c(dims_.size());
        for (size_t i = 0; i < dims_.size(); ++i) {
            c[i] = static_cast<int>(n / strides_[i]);
            n %= strides_[i];
        }
        return c;
    }

  private:
    std::vector<int> dims_;
    std::vector<long> strides_;
    long total_ = 1;
};

/// d x K matrix of torus-valued normalized frequencies, one column per atom.
class FrequencySet {
  public:
    FrequencySet() = default;
    explicit FrequencySet(MatrixXd freqs) : freqs_(std::move(freqs)) {
        for (Eigen::Index j = 0; j < freqs_.cols(); ++j)
            for (Eigen::Index i = 0; i < freqs_.rows(); ++i) freqs_(i, j) = wrap01(freqs_(i, j));
    }

    int order() const { return static_cast<int>(freqs_.rows()); }
    int count() const { return static_cast<int>(freqs_.cols()); }
    const MatrixXd& matrix() const { return freqs_; }
    VectorXd column(int k) const { return freqs_.col(k); }

    /// True when l_ik != l_ip for every coordinate i and every pair k != p.
    bool elementwise_distinct(double tol = 1e-12) const {
        for (int i = 0; i < order(); ++i)
            for (int k = 0; k < count(); ++k)
                for (int p = k + 1; p < count(); ++p)
                    if (wrap_dist(freqs_(i, k), freqs_(i, p)) <= tol) return false;
        return true;
    }

  private:
    MatrixXd freqs_;
};

}  // namespace mltspec

#endif  // MLTSPEC_COMMON_HPP
