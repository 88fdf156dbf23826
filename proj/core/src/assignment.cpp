#include "mltspec/assignment.hpp"

#include <limits>

namespace mltspec {

// Hungarian algorithm with row/column potentials (shortest augmenting paths).
std::vector<int> min_cost_assignment(const MatrixXd& cost) {
    if (cost.rows() != cost.cols()) throw std::invalid_argument("min_cost_assignment: square matrix required");
    const int n = static_cast<int>(cost.rows());
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<size_t>(n) + 1, 0), way(static_cast<size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, false);
        do {
            used[static_cast<size_t>(j0)] = true;
            int i0 = p[static_cast<size_t>(j0)], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                double cur = cost(i0 - 1, j - 1) - u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(p[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<size_t>(j0)] != 0);
        do {
            int j1 = way[static_cast<size_t>(j0)];
            p[static_cast<size_t>(j0)] = p[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0);
    }

    std::vector<int> perm(static_cast<size_t>(n));
    for (int j = 1; j <= n; ++j)
        if (p[static_cast<size_t>(j)] > 0) perm[static_cast<size_t>(p[static_cast<size_t>(j)]) - 1] = j - 1;
    return perm;
}

std::vector<int> max_weight_assignment(const MatrixXd& weight) { return min_cost_assignment(-weight); }

}  // namespace mltspec
