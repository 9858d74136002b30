// Sorted index sets over [0, N) and the small set algebra the code layouts use.
#pragma once

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pbc {

using IndexSet = std::vector<std::int32_t>;  // sorted ascending, unique

inline IndexSet set_intersect(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet set_diff(const IndexSet& a, const IndexSet& b) {
    IndexSet out;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline IndexSet set_complement(const IndexSet& a, int n) {
    IndexSet out;
    std::size_t j = 0;
    for (int i = 0; i < n; ++i) {
        if (j < a.size() && a[j] == i) {
            ++j;
        } else {
            out.push_back(i);
        }
    }
    return out;
}

inline bool set_contains(const IndexSet& a, int i) {
    return std::binary_search(a.begin(), a.end(), i);
}

inline bool set_subset(const IndexSet& a, const IndexSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

inline IndexSet set_prefix(const IndexSet& a, std::size_t count) {
    if (count > a.size()) throw std::logic_error("set_prefix: count exceeds set size");
    return IndexSet(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(count));
}

inline bool set_disjoint(const IndexSet& a, const IndexSet& b) {
    return set_intersect(a, b).empty();
}

}  // namespace pbc
