#pragma once
// One-dimensional parameter grids. The parameter space is discretized to a
// finite strictly increasing grid; every sup/max over the space is computed
// as a grid maximum.

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace imfuse {

// Closed interval [lo, hi] on the parameter line. Also used (with open-set
// semantics) for alpha-cut components.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double length() const { return hi - lo; }
    bool operator==(const Interval&) const = default;
};

inline double total_length(const std::vector<Interval>& intervals) {
    double w = 0.0;
    for (const auto& iv : intervals) w += iv.length();
    return w;
}

class ParameterGrid {
public:
    explicit ParameterGrid(std::vector<double> points) : points_(std::move(points)) {
        if (points_.size() < 2)
            throw std::invalid_argument("ParameterGrid: need at least 2 points");
        for (std::size_t i = 0; i + 1 < points_.size(); ++i) {
            if (!(points_[i] < points_[i + 1]))
                throw std::invalid_argument("ParameterGrid: points must be strictly increasing");
        }
        if (!std::isfinite(points_.front()) || !std::isfinite(points_.back()))
            throw std::invalid_argument("ParameterGrid: points must be finite");
    }

    // Evenly spaced grid; the last point is pinned to hi exactly.
    static ParameterGrid uniform(double lo, double hi, std::size_t m) {
        if (m < 2) throw std::invalid_argument("ParameterGrid::uniform: need m >= 2");
        if (!(lo < hi)) throw std::invalid_argument("ParameterGrid::uniform: need lo < hi");
        std::vector<double> pts(m);
        const double span = hi - lo;
        for (std::size_t i = 0; i < m; ++i)
            pts[i] = lo + span * (static_cast<double>(i) / static_cast<double>(m - 1));
        pts.front() = lo;
        pts.back() = hi;
        return ParameterGrid(std::move(pts));
    }

    const std::vector<double>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    double theta_min() const { return points_.front(); }
    double theta_max() const { return points_.back(); }
    double operator[](std::size_t i) const { return points_[i]; }

    bool contains(double theta) const {
        return theta >= theta_min() && theta <= theta_max();
    }

    bool operator==(const ParameterGrid& other) const { return points_ == other.points_; }

private:
    std::vector<double> points_;
};

}  // namespace imfuse
