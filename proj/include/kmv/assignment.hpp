#pragma once

// Exact min-cost assignment on a dense square cost matrix
// (Jonker-Volgenant style shortest augmenting paths, O(n^3)).

#include <limits>
#include <stdexcept>
#include <vector>

namespace kmv {

// cost is row-major n x n; returns optimal total cost; rowsol[i] = column of row i.
inline double solve_assignment(const std::vector<double>& cost, int n,
                               std::vector<int>* rowsol = nullptr) {
    if (n == 0) return 0.0;
    if (static_cast<std::size_t>(n) * n != cost.size())
        throw std::invalid_argument("solve_assignment: bad matrix size");
    const double INF = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, INF);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = INF;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[(i0 - 1) * static_cast<std::size_t>(n) + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> sol(n, -1);
    double total = 0.0;
    for (int j = 1; j <= n; ++j) {
        if (p[j]) {
            sol[p[j] - 1] = j - 1;
            total += cost[(p[j] - 1) * static_cast<std::size_t>(n) + (j - 1)];
        }
    }
    if (rowsol) *rowsol = std::move(sol);
    return total;
}

} // namespace kmv
