#pragma once

#include <algorithm>
#include <compare>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace pbt {

/// A Young diagram: weakly decreasing positive parts. The empty partition is valid.
class Partition {
  public:
    Partition() = default;

    explicit Partition(std::vector<int> parts) : parts_(std::move(parts)) {
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (parts_[i] < 1)
                throw std::invalid_argument("Partition: parts must be positive");
            if (i > 0 && parts_[i] > parts_[i - 1])
                throw std::invalid_argument("Partition: parts must be weakly decreasing");
        }
    }

    Partition(std::initializer_list<int> parts) : Partition(std::vector<int>(parts)) {}

    int rows() const { return static_cast<int>(parts_.size()); }
    int weight() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
    bool empty() const { return parts_.empty(); }

    /// Row length, 1-based; rows beyond the diagram have length 0.
    int row(int r) const {
        if (r < 1)
            throw std::out_of_range("Partition::row: rows are 1-based");
        return r <= rows() ? parts_[r - 1] : 0;
    }

    const std::vector<int>& parts() const { return parts_; }

    auto operator<=>(const Partition&) const = default;

    std::string str() const {
        std::string s = "(";
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i)
                s += ',';
            s += std::to_string(parts_[i]);
        }
        return s + ")";
    }

  private:
    std::vector<int> parts_;
};

/// One box of a Young diagram, 1-based (row, col).
struct Cell {
    int row = 1;
    int col = 1;
    auto operator<=>(const Cell&) const = default;
};

inline int content(Cell c) { return c.col - c.row; }

/// Length-d weakly decreasing integer weight vector; entries may be negative.
/// Labels mixed unitary irreps such as (mu, [1]) = (mu_1, ..., mu_{d-1}, -1).
struct Staircase {
    std::vector<long long> weights;

    explicit Staircase(std::vector<long long> w) : weights(std::move(w)) {
        for (std::size_t i = 1; i < weights.size(); ++i)
            if (weights[i] > weights[i - 1])
                throw std::invalid_argument("Staircase: weights must be weakly decreasing");
    }

    int length() const { return static_cast<int>(weights.size()); }
};

/// Staircase (left_1,...,left_k, 0,...,0, -right_m,...,-right_1) of length d.
inline Staircase staircase_of(const Partition& left, const Partition& right, int d) {
    if (left.rows() + right.rows() > d)
        throw std::invalid_argument("staircase_of: rows of left and right overlap at length " +
                                    std::to_string(d));
    std::vector<long long> w(static_cast<std::size_t>(d), 0);
    for (int i = 0; i < left.rows(); ++i)
        w[i] = left.parts()[i];
    for (int i = 0; i < right.rows(); ++i)
        w[d - 1 - i] = -right.parts()[i];
    return Staircase(std::move(w));
}

/// All partitions of n with at most d parts, in descending lexicographic order.
/// This order is the row/column order of every partition-indexed matrix in the library.
inline std::vector<Partition> enum_partitions(int n, int d) {
    if (n < 0 || d < 1)
        throw std::invalid_argument("enum_partitions: need n >= 0, d >= 1");
    std::vector<Partition> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int rem, int maxpart) -> void {
        if (rem == 0) {
            out.emplace_back(cur);
            return;
        }
        if (static_cast<int>(cur.size()) == d)
            return;
        for (int p = std::min(rem, maxpart); p >= 1; --p) {
            cur.push_back(p);
            self(self, rem - p, p);
            cur.pop_back();
        }
    };
    rec(rec, n, n);
    return out;
}

/// Position of p in the canonical (descending lex) enumeration; the list must be sorted.
inline std::size_t partition_index(const std::vector<Partition>& canon, const Partition& p) {
    auto it = std::lower_bound(canon.begin(), canon.end(), p, std::greater<>{});
    if (it == canon.end() || *it != p)
        throw std::invalid_argument("partition_index: " + p.str() + " not in list");
    return static_cast<std::size_t>(it - canon.begin());
}

/// Cells a such that lambda + a is a partition with at most d rows, ordered by row.
inline std::vector<Cell> addable_cells(const Partition& lam, int d) {
    std::vector<Cell> cells;
    for (int r = 1; r <= std::min(lam.rows() + 1, d); ++r) {
        int len = lam.row(r);
        if (r == 1 || len < lam.row(r - 1))
            cells.push_back({r, len + 1});
    }
    return cells;
}

/// Cells whose removal leaves a valid partition; empty partition gives an empty list.
inline std::vector<Cell> removable_cells(const Partition& lam) {
    std::vector<Cell> cells;
    for (int r = 1; r <= lam.rows(); ++r)
        if (lam.row(r) > lam.row(r + 1))
            cells.push_back({r, lam.row(r)});
    return cells;
}

inline Partition add_cell(const Partition& lam, Cell a) {
    std::vector<int> parts = lam.parts();
    if (a.row == lam.rows() + 1) {
        if (a.col != 1)
            throw std::invalid_argument("add_cell: cell not addable to " + lam.str());
        parts.push_back(1);
    } else if (a.row >= 1 && a.row <= lam.rows() && a.col == parts[a.row - 1] + 1) {
        parts[a.row - 1] += 1;
    } else {
        throw std::invalid_argument("add_cell: cell not addable to " + lam.str());
    }
    return Partition(std::move(parts));
}

inline Partition remove_cell(const Partition& lam, Cell r) {
    std::vector<int> parts = lam.parts();
    if (r.row < 1 || r.row > lam.rows() || r.col != parts[r.row - 1])
        throw std::invalid_argument("remove_cell: cell not removable from " + lam.str());
    parts[r.row - 1] -= 1;
    if (parts[r.row - 1] == 0)
        parts.pop_back();
    return Partition(std::move(parts));
}

/// Addable cells with no row bound (every partition has rows()+1 of them).
inline std::vector<Cell> addable_cells_unbounded(const Partition& lam) {
    return addable_cells(lam, lam.rows() + 1);
}

/// Cycle type of a permutation given as images sigma[i] (0-based).
inline Partition cycle_type(const std::vector<int>& sigma) {
    std::vector<char> seen(sigma.size(), 0);
    std::vector<int> lens;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        if (seen[i])
            continue;
        int len = 0;
        for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(sigma[j]))
            seen[j] = 1, ++len;
        lens.push_back(len);
    }
    std::sort(lens.begin(), lens.end(), std::greater<>{});
    return Partition(std::move(lens));
}

} // namespace pbt
