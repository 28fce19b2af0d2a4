#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace est::detail {

struct BasicCell {
  std::size_t row;
  std::size_t col;
  double flow;
};

/// Primal network simplex for the balanced transportation problem
///   min ∑ c_ij f_ij  s.t.  ∑_j f_ij = a_i,  ∑_i f_ij = b_j,  f ≥ 0.
///
/// The basis is a spanning tree over n row nodes and m column nodes
/// (n + m − 1 cells). Rows act as supplies, columns as demands, and the tree
/// is rooted at row 0. The initial basis comes from a north-west-corner pass
/// that advances the column on ties, which keeps every zero-flow cell pointing
/// away from the root (a strongly feasible tree). The leaving cell is the
/// last blocking cell met when walking the pivot cycle from its apex, which
/// preserves strong feasibility and rules out cycling on degenerate pivots.
class TransportSimplex {
 public:
  TransportSimplex(std::span<const double> supply, std::span<const double> demand,
                   std::vector<double> cost)
      : n_(supply.size()), m_(demand.size()), cost_(std::move(cost)) {
    if (cost_.size() != n_ * m_) throw std::invalid_argument("cost matrix has wrong size");
    double scale = 0.0;
    for (double c : cost_) scale = std::max(scale, std::abs(c));
    eps_ = 1e-13 * std::max(1.0, scale);
    initial_basis(supply, demand);
  }

  void solve(std::size_t max_iterations) {
    const std::size_t nodes = n_ + m_;
    u_.assign(n_, 0.0);
    v_.assign(m_, 0.0);
    parent_cell_.assign(nodes, npos);
    depth_.assign(nodes, 0);
    block_ = std::max<std::size_t>(static_cast<std::size_t>(std::sqrt(double(n_ * m_))), 10);
    for (iterations_ = 0; iterations_ < max_iterations; ++iterations_) {
      rebuild_tree();
      std::size_t in_row = 0, in_col = 0;
      if (!price(in_row, in_col)) return;
      pivot(in_row, in_col);
    }
    throw std::runtime_error("transportation simplex hit its iteration limit");
  }

  const std::vector<BasicCell>& basis() const noexcept { return cells_; }
  std::size_t iterations() const noexcept { return iterations_; }

 private:
  static constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

  std::size_t col_node(std::size_t j) const noexcept { return n_ + j; }
  double cost(std::size_t i, std::size_t j) const noexcept { return cost_[i * m_ + j]; }

  void initial_basis(std::span<const double> supply, std::span<const double> demand) {
    std::size_t i = 0, j = 0;
    double ra = supply[0], rb = demand[0];
    cells_.reserve(n_ + m_ - 1);
    while (true) {
      const double f = std::max(0.0, std::min(ra, rb));
      cells_.push_back({i, j, f});
      if (i + 1 == n_ && j + 1 == m_) break;
      if (i + 1 == n_) {
        rb -= f;
        ra -= f;
        rb = demand[++j];
      } else if (j + 1 == m_) {
        ra -= f;
        rb -= f;
        ra = supply[++i];
      } else if (ra < rb) {
        rb -= f;
        ra = supply[++i];
      } else {
        ra -= f;
        rb = demand[++j];
      }
    }
    // The last cell absorbs whatever round-off the sweep left behind.
    if (cells_.size() > 1) {
      double row_rest = supply[n_ - 1], col_rest = demand[m_ - 1];
      for (std::size_t k = 0; k + 1 < cells_.size(); ++k) {
        if (cells_[k].row == n_ - 1) row_rest -= cells_[k].flow;
        if (cells_[k].col == m_ - 1) col_rest -= cells_[k].flow;
      }
      cells_.back().flow = std::max(0.0, 0.5 * (row_rest + col_rest));
    }
  }

  // Potentials u_i + v_j = c_ij on basic cells, plus parent/depth from the root.
  void rebuild_tree() {
    const std::size_t nodes = n_ + m_;
    adjacency_.assign(nodes, {});
    for (std::size_t k = 0; k < cells_.size(); ++k) {
      adjacency_[cells_[k].row].push_back(k);
      adjacency_[col_node(cells_[k].col)].push_back(k);
    }
    std::fill(parent_cell_.begin(), parent_cell_.end(), npos);
    std::vector<char> seen(nodes, 0);
    queue_.clear();
    queue_.push_back(0);
    seen[0] = 1;
    u_[0] = 0.0;
    depth_[0] = 0;
    for (std::size_t head = 0; head < queue_.size(); ++head) {
      const std::size_t node = queue_[head];
      for (std::size_t k : adjacency_[node]) {
        const auto& c = cells_[k];
        const std::size_t other = node < n_ ? col_node(c.col) : c.row;
        if (seen[other]) continue;
        seen[other] = 1;
        parent_cell_[other] = k;
        depth_[other] = depth_[node] + 1;
        if (other < n_) {
          u_[c.row] = cost(c.row, c.col) - v_[c.col];
        } else {
          v_[c.col] = cost(c.row, c.col) - u_[c.row];
        }
        queue_.push_back(other);
      }
    }
    if (queue_.size() != nodes) throw std::logic_error("simplex basis is not a spanning tree");
  }

  // Block pricing: scan blocks from a rotating start, take the most negative
  // reduced cost of the first block that has one.
  bool price(std::size_t& in_row, std::size_t& in_col) {
    const std::size_t total = n_ * m_;
    double best = -eps_;
    bool found = false;
    std::size_t scanned_in_block = 0;
    for (std::size_t step = 0; step < total; ++step) {
      const std::size_t idx = (cursor_ + step) % total;
      const std::size_t i = idx / m_, j = idx % m_;
      const double reduced = cost_[idx] - u_[i] - v_[j];
      if (reduced < best) {
        best = reduced;
        in_row = i;
        in_col = j;
        found = true;
      }
      if (++scanned_in_block == block_) {
        scanned_in_block = 0;
        if (found) {
          cursor_ = (idx + 1) % total;
          return true;
        }
      }
    }
    return found;
  }

  void pivot(std::size_t in_row, std::size_t in_col) {
    // Paths from both endpoints up to the apex (lowest common ancestor).
    std::vector<std::size_t> from_row, from_col;
    std::size_t a = in_row, b = col_node(in_col);
    auto step_up = [&](std::size_t node, std::vector<std::size_t>& path) {
      const std::size_t k = parent_cell_[node];
      path.push_back(k);
      const auto& c = cells_[k];
      return node < n_ ? col_node(c.col) : c.row;
    };
    while (depth_[a] > depth_[b]) a = step_up(a, from_row);
    while (depth_[b] > depth_[a]) b = step_up(b, from_col);
    while (a != b) {
      a = step_up(a, from_row);
      b = step_up(b, from_col);
    }

    // Walk the cycle along the entering orientation starting at the apex:
    // down to the row endpoint, across the entering cell, up from the column.
    // Cells at odd distance from the entering cell lose flow.
    struct Step {
      std::size_t cell;
      bool decreases;
    };
    std::vector<Step> cycle;
    cycle.reserve(from_row.size() + from_col.size());
    for (std::size_t r = from_row.size(); r-- > 0;) cycle.push_back({from_row[r], r % 2 == 0});
    for (std::size_t c = 0; c < from_col.size(); ++c) cycle.push_back({from_col[c], c % 2 == 0});

    double theta = std::numeric_limits<double>::infinity();
    for (const auto& s : cycle) {
      if (s.decreases) theta = std::min(theta, cells_[s.cell].flow);
    }
    std::size_t leaving = npos;
    for (const auto& s : cycle) {
      if (s.decreases && cells_[s.cell].flow == theta) leaving = s.cell;
    }
    for (const auto& s : cycle) {
      auto& f = cells_[s.cell].flow;
      f = s.decreases ? std::max(0.0, f - theta) : f + theta;
    }
    cells_[leaving] = {in_row, in_col, theta};
  }

  std::size_t n_, m_;
  std::vector<double> cost_;
  double eps_ = 0.0;
  std::vector<BasicCell> cells_;
  std::vector<double> u_, v_;
  std::vector<std::vector<std::size_t>> adjacency_;
  std::vector<std::size_t> parent_cell_, depth_, queue_;
  std::size_t block_ = 0, cursor_ = 0, iterations_ = 0;
};

}  // namespace est::detail
