#pragma once
// Possibility and necessity of claims about the parameter. A claim is a
// finite union of closed intervals; possibility is the sup of the
// interpolated contour over the claim, necessity is its dual on the
// complement. Claims as interval unions keep both sups exact.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imfuse/contour.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/grid.hpp"

namespace imfuse {

class Claim {
public:
    // Intervals are sorted and merged on construction; overlapping or
    // touching pieces collapse into one.
    explicit Claim(std::vector<Interval> intervals) {
        if (intervals.empty())
            throw std::invalid_argument("Claim: need at least one interval");
        for (const auto& iv : intervals) {
            if (!(iv.lo <= iv.hi) || !std::isfinite(iv.lo) || !std::isfinite(iv.hi))
                throw std::invalid_argument("Claim: each interval needs finite lo <= hi");
        }
        std::sort(intervals.begin(), intervals.end(),
                  [](const Interval& a, const Interval& b) { return a.lo < b.lo; });
        for (const auto& iv : intervals) {
            if (!intervals_.empty() && iv.lo <= intervals_.back().hi)
                intervals_.back().hi = std::max(intervals_.back().hi, iv.hi);
            else
                intervals_.push_back(iv);
        }
    }

    const std::vector<Interval>& intervals() const { return intervals_; }

    bool covers(double lo, double hi) const {
        for (const auto& iv : intervals_)
            if (iv.lo <= lo && hi <= iv.hi) return true;
        return false;
    }

private:
    std::vector<Interval> intervals_;
};

// Closure of the complement of the claim within [domain_lo, domain_hi]:
// endpoints shared with the claim belong to both sides; zero-length gaps
// vanish. Complement of a full-domain claim is empty.
inline std::vector<Interval> complement(const Claim& claim, double domain_lo, double domain_hi) {
    std::vector<Interval> gaps;
    double cursor = domain_lo;
    for (const auto& iv : claim.intervals()) {
        if (iv.lo > cursor) gaps.push_back({cursor, iv.lo});
        cursor = std::max(cursor, iv.hi);
    }
    if (cursor < domain_hi) gaps.push_back({cursor, domain_hi});
    return gaps;
}

namespace detail {

// Sup of the interpolated contour over one closed interval: interval
// endpoints (interpolated) plus every grid point inside.
inline double sup_over_interval(const Contour& c, const Interval& iv) {
    double best = std::max(evaluate(c, iv.lo), evaluate(c, iv.hi));
    const auto& xs = c.grid().points();
    auto first = std::lower_bound(xs.begin(), xs.end(), iv.lo);
    for (auto it = first; it != xs.end() && *it <= iv.hi; ++it)
        best = std::max(best, c.values()[static_cast<std::size_t>(it - xs.begin())]);
    return best;
}

inline double sup_over(const Contour& c, const std::vector<Interval>& intervals) {
    double best = 0.0;
    for (const auto& iv : intervals) best = std::max(best, sup_over_interval(c, iv));
    return best;
}

inline void require_claim_in_domain(const Contour& c, const Claim& claim, const char* who) {
    for (const auto& iv : claim.intervals()) {
        if (iv.lo < c.grid().theta_min() || iv.hi > c.grid().theta_max())
            throw out_of_domain_error(std::string(who) + ": claim extends outside the grid domain");
    }
}

}  // namespace detail

inline double possibility(const Contour& contour, const Claim& claim) {
    detail::require_claim_in_domain(contour, claim, "possibility");
    return detail::sup_over(contour, claim.intervals());
}

// necessity(A) = 1 - possibility(complement of A); 1 for a full-domain claim.
inline double necessity(const Contour& contour, const Claim& claim) {
    detail::require_claim_in_domain(contour, claim, "necessity");
    const auto comp = complement(claim, contour.grid().theta_min(), contour.grid().theta_max());
    if (comp.empty()) return 1.0;
    return 1.0 - detail::sup_over(contour, comp);
}

// Claim syntax: comma-separated bracketed intervals, e.g. "[-0.6,0.6],[1,2]".
inline Claim parse_claim(const std::string& text) {
    std::vector<Interval> intervals;
    std::size_t i = 0;
    auto skip_ws = [&] { while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i; };
    auto read_number = [&]() -> double {
        skip_ws();
        std::size_t start = i;
        while (i < text.size() && text[i] != ',' && text[i] != ']') ++i;
        std::size_t end = i;
        while (end > start && std::isspace(static_cast<unsigned char>(text[end - 1]))) --end;
        try {
            std::size_t used = 0;
            const double v = std::stod(text.substr(start, end - start), &used);
            if (used != end - start) throw parse_error("");
            return v;
        } catch (const std::exception&) {
            throw parse_error("claim: expected a number at position " + std::to_string(start));
        }
    };
    skip_ws();
    if (i == text.size()) throw parse_error("claim: empty claim");
    while (i < text.size()) {
        skip_ws();
        if (i >= text.size() || text[i] != '[')
            throw parse_error("claim: expected '[' at position " + std::to_string(i));
        ++i;
        const double lo = read_number();
        if (i >= text.size() || text[i] != ',')
            throw parse_error("claim: expected ',' inside interval");
        ++i;
        const double hi = read_number();
        if (i >= text.size() || text[i] != ']')
            throw parse_error("claim: expected ']' to close interval");
        ++i;
        if (!(lo <= hi)) throw parse_error("claim: interval needs lo <= hi");
        intervals.push_back({lo, hi});
        skip_ws();
        if (i < text.size()) {
            if (text[i] != ',')
                throw parse_error("claim: expected ',' between intervals");
            ++i;
        }
    }
    if (intervals.empty()) throw parse_error("claim: empty claim");
    return Claim(std::move(intervals));
}

}  // namespace imfuse
