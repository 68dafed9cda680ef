#include "sirs/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sirs {

TriGrid::TriGrid(int n) : n_(n), h_(1.0 / n) {
    if (n < 1) throw std::invalid_argument("grid needs at least one subdivision");
    offsets_.resize(n + 2);
    offsets_[0] = 0;
    for (int j = 0; j <= n; ++j) offsets_[j + 1] = offsets_[j] + (n - j + 1);
    jk_.reserve(node_count());
    for (int j = 0; j <= n; ++j)
        for (int k = 0; k + j <= n; ++k) jk_.emplace_back(j, k);
}

double TriGrid::interpolate(std::span<const double> values, double s, double i) const {
    // Clamp into D the same way the simulator does.
    s = std::clamp(s, 0.0, 1.0);
    i = std::clamp(i, 0.0, 1.0);
    if (s + i > 1.0) {
        const double scale = 1.0 / (s + i);
        s *= scale;
        i *= scale;
    }

    int j = std::min(static_cast<int>(s / h_), n_ - 1);
    int k = std::min(static_cast<int>(i / h_), n_ - 1);
    double u = s / h_ - j;
    double w = i / h_ - k;
    // A query in D can place (j, k) on the hypotenuse only when it is the
    // node itself (u = w = 0 up to rounding); step back into a valid cell.
    while (j + k > n_ - 1) {
        if (k > 0) {
            --k;
            w += 1.0;
        } else {
            --j;
            u += 1.0;
        }
    }
    u = std::clamp(u, 0.0, 1.0);
    w = std::clamp(w, 0.0, 1.0);
    if (j + k == n_ - 1 && u + w > 1.0) {
        // Rounding pushed an in-D point past the hypotenuse of its cell.
        const double scale = 1.0 / (u + w);
        u *= scale;
        w *= scale;
    }

    if (u + w <= 1.0) {
        return values[index(j, k)] * (1.0 - u - w) + values[index(j + 1, k)] * u +
               values[index(j, k + 1)] * w;
    }
    // Upper triangle of the cell; its apex (j+1, k+1) exists because cells
    // straddling the hypotenuse are reached only through the lower triangle.
    return values[index(j + 1, k + 1)] * (u + w - 1.0) + values[index(j + 1, k)] * (1.0 - w) +
           values[index(j, k + 1)] * (1.0 - u);
}

}  // namespace sirs
