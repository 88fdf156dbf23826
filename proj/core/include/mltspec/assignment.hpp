#ifndef MLTSPEC_ASSIGNMENT_HPP
#define MLTSPEC_ASSIGNMENT_HPP

#include <vector>

#include "mltspec/common.hpp"

namespace mltspec {

/// Minimum-total-cost bipartite assignment on a square cost matrix.
/// Returns perm with perm[row] = assigned column. O(n^3) Hungarian method.
std::vector<int> min_cost_assignment(const MatrixXd& cost);

/// Maximum-total-weight assignment (negated costs).
std::vector<int> max_weight_assignment(const MatrixXd& weight);

}  // namespace mltspec

#endif  // MLTSPEC_ASSIGNMENT_HPP
