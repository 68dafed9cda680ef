#pragma once

#include <span>
#include <vector>

#include "sirs/model.hpp"

namespace sirs {

/// Uniform triangular grid over D: nodes (j*h, k*h) with j, k >= 0 and
/// j + k <= n, h = 1/n. Node count is (n+1)(n+2)/2. Linear indices run
/// lexicographically by (j, k).
class TriGrid {
  public:
    explicit TriGrid(int n);

    int n() const { return n_; }
    double spacing() const { return h_; }
    int node_count() const { return static_cast<int>(offsets_.back()); }

    bool contains(int j, int k) const { return j >= 0 && k >= 0 && j + k <= n_; }
    int index(int j, int k) const { return offsets_[j] + k; }
    int j_of(int idx) const { return jk_[idx].first; }
    int k_of(int idx) const { return jk_[idx].second; }
    State node(int idx) const { return {jk_[idx].first * h_, jk_[idx].second * h_}; }
    State node(int j, int k) const { return {j * h_, k * h_}; }

    bool on_s0_edge(int idx) const { return jk_[idx].first == 0; }
    bool on_i0_edge(int idx) const { return jk_[idx].second == 0; }
    bool on_hypotenuse(int idx) const { return jk_[idx].first + jk_[idx].second == n_; }

    /// Piecewise-linear (barycentric) interpolation of nodal values at an
    /// arbitrary point of D. Points outside D are projected onto it first.
    double interpolate(std::span<const double> values, double s, double i) const;

  private:
    int n_;
    double h_;
    std::vector<int> offsets_;                  // offsets_[j] = index of (j, 0)
    std::vector<std::pair<int, int>> jk_;       // inverse of index()
};

}  // namespace sirs
