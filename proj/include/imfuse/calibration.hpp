#pragma once
// Validification: the null CDF F of a fusion rule applied to k iid Unif(0,1)
// values, and its pointwise application to a fused score field. Composing a
// fused field with F makes the fused statistic uniform at the truth again.
//
// Closed forms:
//   min      F(x) = 1 - (1-x)^k              (Beta(1,k))
//   product  F(x) = x * sum_{j<k} (-ln x)^j / j!
//   mean     F(x) = IrwinHall_k(k x)
// Anything else is calibrated empirically by Monte Carlo.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imfuse/contour.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/rng.hpp"

namespace imfuse {

// The alternating Irwin-Hall sum cancels catastrophically as k grows; with
// extended-precision accumulation it is dependable up to this bound. Beyond
// it, use mc_calibrator.
inline constexpr int kMaxClosedFormMeanK = 25;

inline constexpr std::size_t kMinMcSamples = 1000;
inline constexpr std::size_t kDefaultMcSamples = 1000000;

namespace detail {

inline void require_unit_arg(double x, const char* who) {
    if (!(x >= 0.0 && x <= 1.0))
        throw std::invalid_argument(std::string(who) + ": x must lie in [0,1]");
}

inline void require_k(int k, const char* who) {
    if (k < 1) throw std::invalid_argument(std::string(who) + ": need k >= 1");
}

inline double clamp_unit(double v) { return std::clamp(v, 0.0, 1.0); }

// CDF of the sum of k iid Unif(0,1) at s in [0,k]. Alternating sum in long
// double; the symmetry IH(s) = 1 - IH(k-s) halves the cancellation range.
inline long double irwin_hall_cdf(long double s, int k) {
    if (s <= 0.0L) return 0.0L;
    if (s >= static_cast<long double>(k)) return 1.0L;
    if (2.0L * s > static_cast<long double>(k))
        return 1.0L - irwin_hall_cdf(static_cast<long double>(k) - s, k);
    const int jmax = static_cast<int>(std::floor(static_cast<double>(s)));
    long double binom = 1.0L;  // C(k, j)
    long double sum = 0.0L;
    for (int j = 0; j <= jmax; ++j) {
        if (j > 0) binom *= static_cast<long double>(k - j + 1) / static_cast<long double>(j);
        const long double term = binom * std::pow(s - static_cast<long double>(j),
                                                  static_cast<long double>(k));
        sum += (j % 2 == 0) ? term : -term;
    }
    long double kfact = 1.0L;
    for (int j = 2; j <= k; ++j) kfact *= static_cast<long double>(j);
    return sum / kfact;
}

}  // namespace detail

// Null CDF of min(U_1..U_k): Beta(1,k).
inline double cdf_min(double x, int k) {
    detail::require_unit_arg(x, "cdf_min");
    detail::require_k(k, "cdf_min");
    if (k == 1) return x;
    if (x == 1.0) return 1.0;
    return detail::clamp_unit(-std::expm1(static_cast<double>(k) * std::log1p(-x)));
}

// Null CDF of prod(U_1..U_k); F(0) = 0 by continuity. With t = -ln x this is
// the upper regularized gamma Q(k, t), summed as Poisson(t) masses so every
// term sits in [0,1]. Near x = 1 the complement series is used instead: its
// terms are all positive, which keeps the result monotone where F is within
// an ulp of 1.
inline double cdf_product(double x, int k) {
    detail::require_unit_arg(x, "cdf_product");
    detail::require_k(k, "cdf_product");
    if (k == 1) return x;
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const long double t = -std::log(static_cast<long double>(x));
    if (t < static_cast<long double>(k) + 1.0L) {
        long double term = std::exp(-t);  // Poisson(t) mass at 0, folded up to k
        for (int j = 1; j <= k; ++j) term *= t / static_cast<long double>(j);
        long double deficit = 0.0L;
        for (int i = 0; term > deficit * 1e-22L && i < 100000; ++i) {
            deficit += term;
            term *= t / static_cast<long double>(k + 1 + i);
        }
        return detail::clamp_unit(static_cast<double>(1.0L - deficit));
    }
    long double term = std::exp(-t);
    long double sum = 0.0L;
    for (int j = 0; j < k; ++j) {
        sum += term;
        term *= t / static_cast<long double>(j + 1);
    }
    return detail::clamp_unit(static_cast<double>(sum));
}

// Null CDF of mean(U_1..U_k): Irwin-Hall scaled by k. Closed form supported
// for k <= kMaxClosedFormMeanK.
inline double cdf_mean(double x, int k) {
    detail::require_unit_arg(x, "cdf_mean");
    detail::require_k(k, "cdf_mean");
    if (k > kMaxClosedFormMeanK)
        throw std::invalid_argument(
            "cdf_mean: closed form supported for k <= " + std::to_string(kMaxClosedFormMeanK) +
            "; use mc_calibrator");
    if (k == 1) return x;
    const long double s = static_cast<long double>(k) * static_cast<long double>(x);
    return detail::clamp_unit(static_cast<double>(detail::irwin_hall_cdf(s, k)));
}

// F for a given rule and k: closed form for the built-ins, or the sorted
// Monte Carlo sample of the fused statistic under iid uniforms.
class Calibrator {
public:
    static Calibrator closed_form(RuleKind kind, int k) {
        detail::require_k(k, "Calibrator::closed_form");
        switch (kind) {
            case RuleKind::min:
            case RuleKind::product:
                break;
            case RuleKind::mean:
                if (k > kMaxClosedFormMeanK)
                    throw std::invalid_argument(
                        "Calibrator::closed_form: mean rule supports k <= " +
                        std::to_string(kMaxClosedFormMeanK) + "; use mc_calibrator");
                break;
            case RuleKind::custom:
                throw std::invalid_argument(
                    "Calibrator::closed_form: no closed form for custom rules");
        }
        return Calibrator(kind, to_string(kind), k, {}, 0);
    }

    static Calibrator empirical(RuleKind kind, std::string rule_name, int k,
                                std::vector<double> sorted_sample, std::uint64_t seed) {
        if (sorted_sample.size() < kMinMcSamples)
            throw std::invalid_argument("Calibrator::empirical: need at least " +
                                        std::to_string(kMinMcSamples) + " samples");
        return Calibrator(kind, std::move(rule_name), k, std::move(sorted_sample), seed);
    }

    double cdf(double x) const {
        if (!std::isfinite(x))
            throw std::invalid_argument("Calibrator::cdf: x must be finite");
        if (empirical()) {
            // Right-continuous "<=" convention.
            const auto it = std::upper_bound(sample_.begin(), sample_.end(), x);
            return static_cast<double>(it - sample_.begin()) /
                   static_cast<double>(sample_.size());
        }
        switch (kind_) {
            case RuleKind::min: return cdf_min(x, k_);
            case RuleKind::product: return cdf_product(x, k_);
            case RuleKind::mean: return cdf_mean(x, k_);
            case RuleKind::custom: break;
        }
        throw std::logic_error("Calibrator::cdf: unreachable");
    }

    RuleKind rule_kind() const { return kind_; }
    const std::string& rule_name() const { return rule_name_; }
    int k() const { return k_; }
    bool empirical() const { return !sample_.empty(); }
    const std::vector<double>& sample() const { return sample_; }
    std::uint64_t seed() const { return seed_; }

private:
    Calibrator(RuleKind kind, std::string rule_name, int k, std::vector<double> sample,
               std::uint64_t seed)
        : kind_(kind), rule_name_(std::move(rule_name)), k_(k), sample_(std::move(sample)),
          seed_(seed) {}

    RuleKind kind_;
    std::string rule_name_;
    int k_;
    std::vector<double> sample_;  // sorted ascending when empirical
    std::uint64_t seed_ = 0;
};

struct McOptions {
    bool skip_monotonicity_audit = false;
    std::size_t audit_samples = kDefaultAuditSamples;
};

// Simulate the null law of combine(rule, U^k): M draws, sorted. Custom rules
// are audited for their declared monotonicity first unless exempted.
inline Calibrator mc_calibrator(const FusionRule& rule, int k, std::size_t samples,
                                std::uint64_t seed, const McOptions& options = {}) {
    detail::require_k(k, "mc_calibrator");
    if (samples < kMinMcSamples)
        throw std::invalid_argument("mc_calibrator: need at least " +
                                    std::to_string(kMinMcSamples) + " samples");
    if (rule.kind() == RuleKind::custom && !options.skip_monotonicity_audit) {
        if (!audit_monotonicity(rule, k, options.audit_samples, derive_seed(seed, 0x5eed)))
            throw std::invalid_argument("mc_calibrator: rule '" + rule.name() +
                                        "' failed the monotonicity audit");
    }
    Rng rng(seed);
    std::vector<double> draw(static_cast<std::size_t>(k));
    std::vector<double> sample(samples);
    for (std::size_t s = 0; s < samples; ++s) {
        for (double& u : draw) u = rng.uniform();
        sample[s] = combine(rule, draw);
    }
    std::sort(sample.begin(), sample.end());
    return Calibrator::empirical(rule.kind(), rule.name(), k, std::move(sample), seed);
}

inline double apply_cdf(const Calibrator& cal, double x) { return cal.cdf(x); }

// Pointwise F over a fused field. The field's provenance (stamped by
// fuse_pointwise) must match the calibrator's rule and k.
inline ScoreField validify(const ScoreField& field, const Calibrator& cal) {
    if (field.provenance()) {
        const Provenance& p = *field.provenance();
        if (p.kind != cal.rule_kind() || p.k != cal.k() ||
            (p.kind == RuleKind::custom && p.rule_name != cal.rule_name()))
            throw provenance_error("validify: field was fused with rule '" + p.rule_name +
                                   "' (k=" + std::to_string(p.k) + ") but calibrator is for '" +
                                   cal.rule_name() + "' (k=" + std::to_string(cal.k()) + ")");
    }
    std::vector<double> out(field.values());
    for (double& v : out) v = cal.cdf(v);
    return ScoreField(field.grid(), std::move(out), field.provenance());
}

}  // namespace imfuse
