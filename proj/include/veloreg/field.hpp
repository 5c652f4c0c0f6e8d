#pragma once

#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "veloreg/grid.hpp"

namespace veloreg {

/// Process-wide accounting of live field storage, in scalar elements.
/// Used by the memory-contract tests; negligible overhead otherwise.
struct FieldAllocStats {
    static std::atomic<std::int64_t>& live() {
        static std::atomic<std::int64_t> v{0};
        return v;
    }
    static std::atomic<std::int64_t>& peak() {
        static std::atomic<std::int64_t> v{0};
        return v;
    }
    static void add(std::int64_t n) {
        std::int64_t now = live().fetch_add(n) + n;
        std::int64_t p = peak().load();
        while (now > p && !peak().compare_exchange_weak(p, now)) {
        }
    }
    static void sub(std::int64_t n) { live().fetch_sub(n); }
    static void reset_peak() { peak().store(live().load()); }
};

/// Real-valued function sampled on a periodic regular 3D grid.
template <typename T>
class ScalarField {
public:
    using value_type = T;

    ScalarField() = default;
    explicit ScalarField(const Grid3& g, T fill = T(0)) : grid_(g), values_(g.size(), fill) {
        FieldAllocStats::add(grid_.size());
    }
    ScalarField(const ScalarField& o) : grid_(o.grid_), values_(o.values_) {
        FieldAllocStats::add(static_cast<std::int64_t>(values_.size()));
    }
    ScalarField(ScalarField&& o) noexcept
        : grid_(o.grid_), values_(std::move(o.values_)) {
        o.values_.clear();
        o.grid_ = Grid3();
    }
    ScalarField& operator=(const ScalarField& o) {
        if (this != &o) {
            FieldAllocStats::sub(static_cast<std::int64_t>(values_.size()));
            grid_ = o.grid_;
            values_ = o.values_;
            FieldAllocStats::add(static_cast<std::int64_t>(values_.size()));
        }
        return *this;
    }
    ScalarField& operator=(ScalarField&& o) noexcept {
        if (this != &o) {
            FieldAllocStats::sub(static_cast<std::int64_t>(values_.size()));
            grid_ = o.grid_;
            values_ = std::move(o.values_);
            o.values_.clear();
            o.grid_ = Grid3();
        }
        return *this;
    }
    ~ScalarField() { FieldAllocStats::sub(static_cast<std::int64_t>(values_.size())); }

    const Grid3& grid() const { return grid_; }
    std::int64_t size() const { return static_cast<std::int64_t>(values_.size()); }
    bool empty() const { return values_.empty(); }

    T* data() { return values_.data(); }
    const T* data() const { return values_.data(); }
    T& operator[](std::int64_t i) { return values_[static_cast<std::size_t>(i)]; }
    const T& operator[](std::int64_t i) const { return values_[static_cast<std::size_t>(i)]; }
    T& at(int i1, int i2, int i3) { return values_[static_cast<std::size_t>(grid_.index(i1, i2, i3))]; }
    const T& at(int i1, int i2, int i3) const {
        return values_[static_cast<std::size_t>(grid_.index(i1, i2, i3))];
    }

    void fill(T v) { std::fill(values_.begin(), values_.end(), v); }

    bool all_finite() const {
        for (T v : values_)
            if (!std::isfinite(static_cast<double>(v))) return false;
        return true;
    }

private:
    Grid3 grid_;
    std::vector<T> values_;
};

/// Three scalar components on a shared grid.
template <typename T>
class VectorField {
public:
    using value_type = T;

    VectorField() = default;
    explicit VectorField(const Grid3& g, T fill = T(0))
        : comps_{ScalarField<T>(g, fill), ScalarField<T>(g, fill), ScalarField<T>(g, fill)} {}

    const Grid3& grid() const { return comps_[0].grid(); }
    std::int64_t size() const { return comps_[0].size(); }
    bool empty() const { return comps_[0].empty(); }

    ScalarField<T>& operator[](int c) { return comps_[c]; }
    const ScalarField<T>& operator[](int c) const { return comps_[c]; }

    void fill(T v) {
        for (auto& c : comps_) c.fill(v);
    }
    bool all_finite() const {
        return comps_[0].all_finite() && comps_[1].all_finite() && comps_[2].all_finite();
    }

private:
    std::array<ScalarField<T>, 3> comps_;
};

/// Nodal-in-time space-time variable: n_t + 1 slices at t_j = j / n_t.
template <typename T>
class TimeSeries {
public:
    TimeSeries() = default;
    TimeSeries(const Grid3& g, int nt) : nt_(nt) {
        if (nt < 1) throw ArgumentError("TimeSeries: n_t must be >= 1");
        slices_.reserve(static_cast<std::size_t>(nt) + 1);
        for (int j = 0; j <= nt; ++j) slices_.emplace_back(g);
    }

    int nt() const { return nt_; }
    int slice_count() const { return static_cast<int>(slices_.size()); }
    const Grid3& grid() const { return slices_.at(0).grid(); }

    ScalarField<T>& slice(int j) { return slices_.at(static_cast<std::size_t>(j)); }
    const ScalarField<T>& slice(int j) const { return slices_.at(static_cast<std::size_t>(j)); }
    ScalarField<T>& final() { return slices_.back(); }
    const ScalarField<T>& final() const { return slices_.back(); }

private:
    int nt_ = 0;
    std::vector<ScalarField<T>> slices_;
};

template <typename T>
void require_same_grid(const ScalarField<T>& a, const ScalarField<T>& b, const char* what) {
    if (a.grid() != b.grid())
        throw DimensionError(std::string(what) + ": grid mismatch " + a.grid().str() + " vs " +
                             b.grid().str());
}

template <typename T>
void require_same_grid(const VectorField<T>& a, const VectorField<T>& b, const char* what) {
    if (a.grid() != b.grid())
        throw DimensionError(std::string(what) + ": grid mismatch " + a.grid().str() + " vs " +
                             b.grid().str());
}

} // namespace veloreg
