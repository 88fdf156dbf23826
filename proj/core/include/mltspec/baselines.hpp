#ifndef MLTSPEC_BASELINES_HPP
#define MLTSPEC_BASELINES_HPP

#include <optional>

#include "mltspec/measurement.hpp"

namespace mltspec {

/// Uniform grid over [0,1)^d with unit-norm steering-vector atoms.
class GridDictionary {
  public:
    GridDictionary() = default;
    GridDictionary(DimensionVector dims, std::vector<int> grid_sizes);

    const DimensionVector& dims() const { return dims_; }
    const std::vector<int>& grid_sizes() const { return sizes_; }
    long length() const { return length_; }
    VectorXd freq(long index) const;
    /// L_u x length atom matrix (built lazily, then cached).
    const MatrixXcd& atoms() const;

  private:
    DimensionVector dims_;
    std::vector<int> sizes_;
    long length_ = 0;
    mutable std::shared_ptr<MatrixXcd> atoms_;
};

/// Near-uniform per-dimension grid sizes with product <= length.
std::vector<int> grid_sizes_for_length(const DimensionVector& dims, long length);

struct OmpResult {
    FrequencySet freqs;
    VectorXcd gains;
    VectorXcd l_u_hat;
    std::vector<long> selected;
};

/// Greedy matched-filter selection of K dictionary atoms through the
/// measurement operator, with least-squares gain refit.
OmpResult omp_estimate(const MeasurementOperator& op, const VectorXcd& y, int k,
                       const GridDictionary& dict);

struct MusicResult {
    FrequencySet freqs;
    VectorXd peak_values;   // pseudo-spectrum at the returned grid points
    int effective_h = 0;    // realized stacking size
};

/// Single-snapshot MUSIC on a multi-level Hankel stacking of the channel
/// estimate; scans the grid for the K largest local maxima of the
/// pseudo-spectrum. For d = 1 the stacking size is H (default L_u - 1);
/// for d > 1 each dimension is split closest to square.
MusicResult music_estimate(const VectorXcd& h_estimate, const DimensionVector& dims, int k,
                           std::optional<int> h_param, const GridDictionary& grid);

/// LMMSE channel estimate under the sparse-model prior C_h = (K/L_u) I.
VectorXcd lmmse_estimate(const MeasurementOperator& op, const VectorXcd& y, int k, double sigma2);

enum class BaselineMethod { Omp, Music };

/// Per-run operation count of the complexity-matched atomic-norm solve.
double an_target_ops(const DimensionVector& dims, double epsilon);

/// Largest dictionary length whose cost model stays within target_ops.
long complexity_budget(BaselineMethod method, const DimensionVector& dims, int k, double target_ops,
                       std::optional<int> music_h = std::nullopt, long max_length = 1000000);

double omp_ops(long dict_length, int k, long l_u);
double music_ops(long dict_length, int h, int k, int d);

}  // namespace mltspec

#endif  // MLTSPEC_BASELINES_HPP
