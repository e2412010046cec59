#pragma once
// Pointwise combination rules for k contour values: any continuous function
// [0,1]^k -> R that is monotone in each coordinate is admissible. Built-ins
// are min, product (Fisher-style), and arithmetic mean. Custom rules declare
// a monotonicity direction per coordinate and can be audited by sampling.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imfuse/contour.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/grid.hpp"
#include "imfuse/rng.hpp"

namespace imfuse {

enum class Monotonicity { nondecreasing, nonincreasing };

class FusionRule {
public:
    using Fn = std::function<double(std::span<const double>)>;

    static FusionRule min() { return FusionRule(RuleKind::min, "min"); }
    static FusionRule product() { return FusionRule(RuleKind::product, "product"); }
    static FusionRule mean() { return FusionRule(RuleKind::mean, "mean"); }

    static FusionRule custom(std::string name, Fn fn, std::vector<Monotonicity> directions) {
        if (!fn) throw std::invalid_argument("FusionRule::custom: null function");
        if (directions.empty())
            throw std::invalid_argument("FusionRule::custom: need one direction per coordinate");
        FusionRule r(RuleKind::custom, std::move(name));
        r.fn_ = std::move(fn);
        r.directions_ = std::move(directions);
        return r;
    }

    RuleKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    bool is_builtin() const { return kind_ != RuleKind::custom; }

    // Declared arity; 0 means any k (built-ins).
    int arity() const { return static_cast<int>(directions_.size()); }

    Monotonicity direction(std::size_t coordinate) const {
        if (is_builtin()) return Monotonicity::nondecreasing;
        return directions_.at(coordinate);
    }

private:
    FusionRule(RuleKind kind, std::string name) : kind_(kind), name_(std::move(name)) {}

    RuleKind kind_;
    std::string name_;
    Fn fn_;
    std::vector<Monotonicity> directions_;

    friend double combine(const FusionRule&, std::span<const double>);
};

inline FusionRule rule_from_string(const std::string& s) {
    if (s == "min") return FusionRule::min();
    if (s == "product") return FusionRule::product();
    if (s == "mean") return FusionRule::mean();
    throw std::invalid_argument("unknown rule '" + s + "' (expected min|product|mean)");
}

inline double combine(const FusionRule& rule, std::span<const double> values) {
    if (values.empty())
        throw std::invalid_argument("combine: need at least one value");
    if (rule.kind() == RuleKind::custom &&
        values.size() != static_cast<std::size_t>(rule.arity()))
        throw std::invalid_argument("combine: custom rule expects k=" +
                                    std::to_string(rule.arity()));
    for (double v : values) {
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("combine: values must lie in [0,1]");
    }
    switch (rule.kind()) {
        case RuleKind::min:
            return *std::min_element(values.begin(), values.end());
        case RuleKind::product: {
            double p = 1.0;
            for (double v : values) p *= v;
            return p;
        }
        case RuleKind::mean: {
            double s = 0.0;
            for (double v : values) s += v;
            return s / static_cast<double>(values.size());
        }
        case RuleKind::custom:
            return rule.fn_(values);
    }
    throw std::logic_error("combine: unreachable");
}

// Combine k contours pointwise on their (shared) grid. All inputs must live
// on an identical grid; use the common-grid overload otherwise.
inline ScoreField fuse_pointwise(const FusionRule& rule, std::span<const Contour> contours) {
    if (contours.empty())
        throw std::invalid_argument("fuse_pointwise: need at least one contour");
    const ParameterGrid& grid = contours.front().grid();
    for (const Contour& c : contours) {
        if (!(c.grid() == grid))
            throw grid_mismatch_error(
                "fuse_pointwise: contours live on different grids; supply a common grid");
    }
    const int k = static_cast<int>(contours.size());
    const std::size_t m = grid.size();
    std::vector<double> fused(m);
    std::vector<double> at_point(contours.size());
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t c = 0; c < contours.size(); ++c)
            at_point[c] = contours[c].values()[i];
        fused[i] = combine(rule, at_point);
    }
    return ScoreField(grid, std::move(fused), Provenance{rule.kind(), rule.name(), k});
}

// Resample every contour onto the supplied common grid (linear interpolation)
// and fuse there. The common grid must lie inside every input's domain.
inline ScoreField fuse_pointwise(const FusionRule& rule, std::span<const Contour> contours,
                                 const ParameterGrid& common) {
    if (contours.empty())
        throw std::invalid_argument("fuse_pointwise: need at least one contour");
    for (const Contour& c : contours) {
        if (common.theta_min() < c.grid().theta_min() || common.theta_max() > c.grid().theta_max())
            throw out_of_domain_error(
                "fuse_pointwise: common grid extends outside an input contour's domain");
    }
    const int k = static_cast<int>(contours.size());
    const std::size_t m = common.size();
    std::vector<double> fused(m);
    std::vector<double> at_point(contours.size());
    for (std::size_t i = 0; i < m; ++i) {
        const double theta = common[i];
        for (std::size_t c = 0; c < contours.size(); ++c)
            at_point[c] = evaluate(contours[c], theta);
        fused[i] = combine(rule, at_point);
    }
    return ScoreField(common, std::move(fused), Provenance{rule.kind(), rule.name(), k});
}

// Sampled check of the declared monotonicity: draws componentwise-ordered
// pairs and verifies the combined values respect the declared directions.
// Necessary, not sufficient.
inline bool audit_monotonicity(const FusionRule& rule, int k, std::size_t samples,
                               std::uint64_t seed) {
    if (k < 1) throw std::invalid_argument("audit_monotonicity: need k >= 1");
    if (samples < 1) throw std::invalid_argument("audit_monotonicity: need samples >= 1");
    if (rule.kind() == RuleKind::custom && k != rule.arity())
        throw std::invalid_argument("audit_monotonicity: k must match the rule's arity");
    Rng rng(seed);
    std::vector<double> lo(static_cast<std::size_t>(k)), hi(static_cast<std::size_t>(k));
    for (std::size_t s = 0; s < samples; ++s) {
        for (int i = 0; i < k; ++i) {
            double a = rng.uniform();
            double b = rng.uniform();
            if (a > b) std::swap(a, b);
            if (rule.direction(static_cast<std::size_t>(i)) == Monotonicity::nondecreasing) {
                lo[static_cast<std::size_t>(i)] = a;
                hi[static_cast<std::size_t>(i)] = b;
            } else {
                lo[static_cast<std::size_t>(i)] = b;
                hi[static_cast<std::size_t>(i)] = a;
            }
        }
        if (combine(rule, lo) > combine(rule, hi)) return false;
    }
    return true;
}

inline constexpr std::size_t kDefaultAuditSamples = 10000;

}  // namespace imfuse
