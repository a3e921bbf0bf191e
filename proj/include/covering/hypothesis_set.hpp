#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

namespace covering {

/// 1-based index of a null hypothesis within its family.
using HypothesisId = int;

/// Sorted, duplicate-free set of hypothesis ids. Ordering is lexicographic on
/// the sorted ids, which is the canonical order for families and leaves.
class HypothesisSet {
public:
    using const_iterator = std::vector<HypothesisId>::const_iterator;

    HypothesisSet() = default;
    HypothesisSet(std::initializer_list<HypothesisId> ids) : ids_(ids) { normalize(); }
    explicit HypothesisSet(std::vector<HypothesisId> ids) : ids_(std::move(ids)) { normalize(); }

    /// {1, ..., n}
    static HypothesisSet range(int n) {
        HypothesisSet s;
        s.ids_.reserve(static_cast<std::size_t>(std::max(n, 0)));
        for (int i = 1; i <= n; ++i) s.ids_.push_back(i);
        return s;
    }

    const_iterator begin() const noexcept { return ids_.begin(); }
    const_iterator end() const noexcept { return ids_.end(); }
    std::size_t size() const noexcept { return ids_.size(); }
    bool empty() const noexcept { return ids_.empty(); }
    HypothesisId front() const { return ids_.front(); }
    HypothesisId back() const { return ids_.back(); }
    const std::vector<HypothesisId>& ids() const noexcept { return ids_; }

    bool contains(HypothesisId id) const { return std::binary_search(ids_.begin(), ids_.end(), id); }

    bool includes(const HypothesisSet& other) const {
        return std::includes(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end());
    }

    void insert(HypothesisId id) {
        auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
        if (it == ids_.end() || *it != id) ids_.insert(it, id);
    }

    HypothesisSet without(HypothesisId id) const {
        HypothesisSet out;
        out.ids_.reserve(ids_.size());
        for (HypothesisId i : ids_)
            if (i != id) out.ids_.push_back(i);
        return out;
    }

    HypothesisSet minus(const HypothesisSet& other) const {
        HypothesisSet out;
        std::set_difference(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                            std::back_inserter(out.ids_));
        return out;
    }

    HypothesisSet intersect(const HypothesisSet& other) const {
        HypothesisSet out;
        std::set_intersection(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                              std::back_inserter(out.ids_));
        return out;
    }

    HypothesisSet unite(const HypothesisSet& other) const {
        HypothesisSet out;
        std::set_union(ids_.begin(), ids_.end(), other.ids_.begin(), other.ids_.end(),
                       std::back_inserter(out.ids_));
        return out;
    }

    bool disjoint(const HypothesisSet& other) const { return intersect(other).empty(); }

    /// "{1,2,3}"
    std::string to_string() const {
        std::string s = "{";
        for (std::size_t k = 0; k < ids_.size(); ++k) {
            if (k) s += ',';
            s += std::to_string(ids_[k]);
        }
        return s + "}";
    }

    friend bool operator==(const HypothesisSet&, const HypothesisSet&) = default;
    friend auto operator<=>(const HypothesisSet& a, const HypothesisSet& b) { return a.ids_ <=> b.ids_; }

private:
    void normalize() {
        std::sort(ids_.begin(), ids_.end());
        ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
    }

    std::vector<HypothesisId> ids_;
};

}  // namespace covering
