#ifndef MLTSPEC_ARRAY_HPP
#define MLTSPEC_ARRAY_HPP

#include <optional>
#include <vector>

#include "mltspec/common.hpp"

namespace mltspec {

/// 0/1 row-selection onto a uniform array: each retained entry is a flat
/// (row-major) index into the underlying uniform grid. The realized matrix is
/// [I_N | 0] Pi for some column permutation Pi.
class SensingMatrix {
  public:
    SensingMatrix() = default;
    SensingMatrix(std::vector<int> row_selection, DimensionVector source_dims);

    static SensingMatrix identity(const DimensionVector& dims);

    int n_selected() const { return static_cast<int>(rows_.size()); }
    long n_uniform() const { return source_.total(); }
    const std::vector<int>& row_selection() const { return rows_; }
    const DimensionVector& source_dims() const { return source_; }
    bool is_identity() const;

    /// Dense {0,1} realization, N x N_u.
    MatrixXd realize() const;

    /// Gather: y[i] = x[row_selection[i]].
    VectorXcd apply(const VectorXcd& x) const;
    /// Scatter (adjoint of apply).
    VectorXcd adjoint(const VectorXcd& y) const;

  private:
    std::vector<int> rows_;
    DimensionVector source_;
};

/// Largest embedded uniform sub-array of a heterogeneous deployment
/// (offsets, strides and extents per dimension; kappa = sum of extents).
struct ReconstructionDegree {
    int kappa = 0;
    DimensionVector embed_dims;      // R^max
    std::vector<int> delta;          // per-dimension offsets
    std::vector<int> strides;        // per-dimension integer strides
    bool nontrivial = false;         // kappa >= d + 1
};

/// Unit-norm steering vector of a uniform array: entry n is
/// exp(j 2 pi f . n) / sqrt(L_u) over row-major multi-indices; equals the
/// Kronecker product of the 1-D factors.
VectorXcd steering_vector(const DimensionVector& dims, const VectorXd& freq);

/// Map (azimuth, elevation) angles to normalized torus frequencies given the
/// per-dimension element spacings in wavelengths.
VectorXd angles_to_frequency(double theta, double phi, const std::vector<double>& spacing, int d);

/// Steering vector of the thinned deployment: gather of the uniform one.
VectorXcd heterogeneous_steering(const SensingMatrix& sensing, const DimensionVector& dims,
                                 const VectorXd& freq);

/// Exact exhaustive search for the reconstruction degree. Bounded to
/// L_u <= 4096; ties resolved by lexicographically smallest (delta, strides).
ReconstructionDegree reconstruction_degree(const SensingMatrix& sensing);

/// Composite sensing matrix A^L = (A_tx kron A_rx) Pi_u over the canonical
/// (nondecreasing) merged dimension vector.
SensingMatrix compose_sensing(const SensingMatrix& tx, const SensingMatrix& rx);

/// Stable-sort permutation pi with merged[pi[p]] placed at slot p; ties keep
/// transmit dimensions first. Returns (permutation, sorted dims).
std::pair<std::vector<int>, DimensionVector> canonical_dim_permutation(const DimensionVector& tx_dims,
                                                                       const DimensionVector& rx_dims);

}  // namespace mltspec

#endif  // MLTSPEC_ARRAY_HPP
