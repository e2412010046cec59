#pragma once
// Possibility contours and intermediate score fields on a parameter grid.
//
// A ScoreField is any grid function with values in [0,1]. A Contour is a
// ScoreField that additionally attains 1 (consonance), which is what makes
// it a possibility contour. Off-grid evaluation is linear interpolation.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imfuse/errors.hpp"
#include "imfuse/grid.hpp"

namespace imfuse {

inline constexpr double kConsonanceTol = 1e-9;

enum class RuleKind { min, product, mean, custom };

inline const char* to_string(RuleKind k) {
    switch (k) {
        case RuleKind::min: return "min";
        case RuleKind::product: return "product";
        case RuleKind::mean: return "mean";
        case RuleKind::custom: return "custom";
    }
    return "?";
}

// Which fusion produced a field; stamped by fuse_pointwise and checked by
// validify so a field cannot be calibrated against the wrong null law.
struct Provenance {
    RuleKind kind = RuleKind::custom;
    std::string rule_name;
    int k = 0;

    bool operator==(const Provenance&) const = default;
};

namespace detail {

inline void validate_unit_values(const ParameterGrid& grid, const std::vector<double>& values,
                                 const char* who) {
    if (values.size() != grid.size())
        throw std::invalid_argument(std::string(who) + ": values length must match grid size");
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument(std::string(who) + ": values must lie in [0,1]");
    }
}

inline double max_value(const std::vector<double>& values) {
    return *std::max_element(values.begin(), values.end());
}

// Interpolated lookup. Exact grid points return the stored value.
inline double evaluate_on(const ParameterGrid& grid, const std::vector<double>& values,
                          double theta) {
    if (!grid.contains(theta))
        throw out_of_domain_error("evaluate: theta outside [" + std::to_string(grid.theta_min()) +
                                  ", " + std::to_string(grid.theta_max()) + "]");
    const auto& xs = grid.points();
    auto it = std::lower_bound(xs.begin(), xs.end(), theta);
    if (it != xs.end() && *it == theta)
        return values[static_cast<std::size_t>(it - xs.begin())];
    const std::size_t j = static_cast<std::size_t>(it - xs.begin());  // xs[j-1] < theta < xs[j]
    const double t = (theta - xs[j - 1]) / (xs[j] - xs[j - 1]);
    return std::lerp(values[j - 1], values[j], t);
}

}  // namespace detail

class Contour;

class ScoreField {
public:
    ScoreField(ParameterGrid grid, std::vector<double> values,
               std::optional<Provenance> provenance = std::nullopt)
        : grid_(std::move(grid)), values_(std::move(values)), provenance_(std::move(provenance)) {
        detail::validate_unit_values(grid_, values_, "ScoreField");
    }

    const ParameterGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::optional<Provenance>& provenance() const { return provenance_; }
    double max_value() const { return detail::max_value(values_); }

private:
    ParameterGrid grid_;
    std::vector<double> values_;
    std::optional<Provenance> provenance_;
};

class Contour {
public:
    Contour(ParameterGrid grid, std::vector<double> values,
            std::optional<Provenance> provenance = std::nullopt)
        : grid_(std::move(grid)), values_(std::move(values)),
          provenance_(std::move(provenance)) {
        detail::validate_unit_values(grid_, values_, "Contour");
        if (std::fabs(detail::max_value(values_) - 1.0) > kConsonanceTol)
            throw std::invalid_argument("Contour: max value must equal 1 (consonance)");
    }

    const ParameterGrid& grid() const { return grid_; }
    const std::vector<double>& values() const { return values_; }
    const std::optional<Provenance>& provenance() const { return provenance_; }
    double max_value() const { return detail::max_value(values_); }

    ScoreField to_field() const { return ScoreField(grid_, values_, provenance_); }

private:
    ParameterGrid grid_;
    std::vector<double> values_;
    std::optional<Provenance> provenance_;
};

inline double evaluate(const ScoreField& f, double theta) {
    return detail::evaluate_on(f.grid(), f.values(), theta);
}

inline double evaluate(const Contour& c, double theta) {
    return detail::evaluate_on(c.grid(), c.values(), theta);
}

inline bool check_consonance(const ScoreField& f, double tol = kConsonanceTol) {
    return std::fabs(f.max_value() - 1.0) <= tol;
}

// Divide by the grid maximum so the result attains 1. Only inflates values,
// so the validity direction of the input is preserved.
inline Contour normalize(const ScoreField& f) {
    const double m = f.max_value();
    if (m <= 0.0)
        throw degenerate_field_error("normalize: field is identically zero");
    std::vector<double> scaled(f.values());
    for (double& v : scaled) v = std::min(v / m, 1.0);
    return Contour(f.grid(), std::move(scaled), f.provenance());
}

// Maximal intervals where the interpolated contour exceeds alpha (strict).
// Endpoints are the exact linear crossing points; the set is open, so a value
// equal to alpha is outside. Non-empty for every alpha < 1 by consonance.
inline std::vector<Interval> alpha_cut(const Contour& c, double alpha) {
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw std::invalid_argument("alpha_cut: level must lie in [0,1)");
    const auto& xs = c.grid().points();
    const auto& vs = c.values();
    std::vector<Interval> cut;
    bool inside = vs[0] > alpha;
    double left = xs[0];
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const bool next_inside = vs[i + 1] > alpha;
        if (next_inside == inside) continue;
        const double cross =
            xs[i] + (alpha - vs[i]) * (xs[i + 1] - xs[i]) / (vs[i + 1] - vs[i]);
        if (next_inside) {
            left = cross;
        } else {
            cut.push_back({left, cross});
        }
        inside = next_inside;
    }
    if (inside) cut.push_back({left, xs.back()});
    return cut;
}

}  // namespace imfuse
