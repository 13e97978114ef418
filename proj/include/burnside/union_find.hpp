#pragma once

#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

namespace burnside {

/// Disjoint sets over 0..n-1 with path halving and union by size.
class DisjointSets {
  public:
    explicit DisjointSets(std::size_t n) : parent_(n), size_(n, 1), sets_(n) {
        std::iota(parent_.begin(), parent_.end(), std::size_t{0});
    }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// False when a and b were already joined.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (size_[a] < size_[b]) std::swap(a, b);
        parent_[b] = a;
        size_[a] += size_[b];
        --sets_;
        return true;
    }

    std::size_t set_size(std::size_t x) { return size_[find(x)]; }
    std::size_t set_count() const noexcept { return sets_; }

    /// Dense labels 0..set_count()-1, numbered by first appearance.
    std::vector<std::size_t> labels() {
        std::vector<std::size_t> label(parent_.size());
        std::vector<std::size_t> root_label(parent_.size(), parent_.size());
        std::size_t next = 0;
        for (std::size_t x = 0; x < parent_.size(); ++x) {
            const std::size_t r = find(x);
            if (root_label[r] == parent_.size()) root_label[r] = next++;
            label[x] = root_label[r];
        }
        return label;
    }

  private:
    std::vector<std::size_t> parent_;
    std::vector<std::size_t> size_;
    std::size_t sets_;
};

}  // namespace burnside
