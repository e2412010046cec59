#pragma once
// Monte Carlo certification of the calibration claims, plus the synthetic
// normal-mean study generator used to exercise the full fuse -> validify ->
// normalize pipeline end to end.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "imfuse/calibration.hpp"
#include "imfuse/contour.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/grid.hpp"
#include "imfuse/rng.hpp"

namespace imfuse {

inline std::vector<double> default_alpha_grid() { return {0.01, 0.05, 0.10, 0.25, 0.50}; }

inline constexpr std::size_t kMinCertifyReplications = 10000;
inline constexpr std::size_t kMinCoverageReplications = 100;

// ---------------------------------------------------------------------------
// Synthetic studies: k independent normal-mean experiments with known sigma.

struct StudySpec {
    std::vector<int> sample_sizes;  // n_i per study
    double theta = 0.0;             // true mean
    double sigma = 1.0;             // known noise scale

    StudySpec(std::vector<int> n, double theta_true = 0.0, double noise = 1.0)
        : sample_sizes(std::move(n)), theta(theta_true), sigma(noise) {
        if (sample_sizes.empty())
            throw std::invalid_argument("StudySpec: need k >= 1 studies");
        for (int ni : sample_sizes)
            if (ni < 1) throw std::invalid_argument("StudySpec: each n_i must be >= 1");
        if (!(sigma > 0.0)) throw std::invalid_argument("StudySpec: sigma must be positive");
    }

    int k() const { return static_cast<int>(sample_sizes.size()); }
    int total_n() const { return std::accumulate(sample_sizes.begin(), sample_sizes.end(), 0); }

    // k studies cycling through sample sizes {5, 10, 20, 50, 100}.
    static StudySpec defaults(int k, double theta_true = 0.0, double noise = 1.0) {
        if (k < 1) throw std::invalid_argument("StudySpec::defaults: need k >= 1");
        static constexpr int cycle[] = {5, 10, 20, 50, 100};
        std::vector<int> n(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) n[static_cast<std::size_t>(i)] = cycle[i % 5];
        return StudySpec(std::move(n), theta_true, noise);
    }
};

// theta +- 6 sigma, wide enough for every study peak at the default specs.
// Odd point count keeps theta itself on the grid.
inline ParameterGrid default_study_grid(const StudySpec& spec, std::size_t points = 1001) {
    return ParameterGrid::uniform(spec.theta - 6.0 * spec.sigma, spec.theta + 6.0 * spec.sigma,
                                  points);
}

// Exact possibility contour for a normal mean with known sigma:
//   pi(v) = 2 * (1 - Phi(sqrt(n) * |ybar - v| / sigma)).
// The grid restriction is renormalized by its own maximum so the stored
// contour is exactly consonant even when ybar falls between grid points;
// that direction only inflates, so validity is kept (conservatively).
inline Contour normal_mean_contour(const ParameterGrid& grid, double ybar, int n, double sigma) {
    if (n < 1) throw std::invalid_argument("normal_mean_contour: need n >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("normal_mean_contour: sigma must be positive");
    const double half_width = 6.0 * sigma / std::sqrt(static_cast<double>(n));
    if (grid.theta_min() > ybar - half_width || grid.theta_max() < ybar + half_width)
        throw out_of_domain_error("normal_mean_contour: grid must cover ybar +- 6 sigma/sqrt(n)");
    const double scale = std::sqrt(static_cast<double>(n)) / (sigma * std::sqrt(2.0));
    std::vector<double> values(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        values[i] = std::erfc(scale * std::fabs(ybar - grid[i]));  // = 2(1 - Phi(sqrt(n)|ybar-v|/sigma))
    const double peak = *std::max_element(values.begin(), values.end());
    for (double& v : values) v = std::min(v / peak, 1.0);
    return Contour(grid, std::move(values));
}

// Observed mean of each study; study i draws from its own derived stream so
// per-study reproducibility does not depend on the other studies.
inline std::vector<double> simulate_study_means(const StudySpec& spec, std::uint64_t seed) {
    std::vector<double> ybars(static_cast<std::size_t>(spec.k()));
    for (int i = 0; i < spec.k(); ++i) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
        const int n = spec.sample_sizes[static_cast<std::size_t>(i)];
        double sum = 0.0;
        for (int j = 0; j < n; ++j) sum += spec.theta + spec.sigma * rng.normal();
        ybars[static_cast<std::size_t>(i)] = sum / static_cast<double>(n);
    }
    return ybars;
}

inline std::vector<Contour> simulate_studies(const ParameterGrid& grid, const StudySpec& spec,
                                             std::uint64_t seed) {
    const auto ybars = simulate_study_means(spec, seed);
    std::vector<Contour> contours;
    contours.reserve(ybars.size());
    for (int i = 0; i < spec.k(); ++i)
        contours.push_back(normal_mean_contour(grid, ybars[static_cast<std::size_t>(i)],
                                               spec.sample_sizes[static_cast<std::size_t>(i)],
                                               spec.sigma));
    return contours;
}

// ---------------------------------------------------------------------------
// Exceedance reports.

struct LevelVerdict {
    double alpha = 0.0;
    double exceedance = 0.0;  // estimated P(statistic <= alpha)
    double tolerance = 0.0;   // 3 * sqrt(alpha (1-alpha) / M)
    bool pass = false;        // exceedance <= alpha + tolerance
};

struct ValidityReport {
    std::string pipeline;  // human-readable description of what was simulated
    std::size_t replications = 0;
    std::uint64_t seed = 0;
    std::vector<LevelVerdict> levels;

    bool all_pass() const {
        return std::all_of(levels.begin(), levels.end(),
                           [](const LevelVerdict& v) { return v.pass; });
    }
};

inline ValidityReport make_report(std::vector<double> statistics, std::span<const double> alphas,
                                  std::uint64_t seed, std::string pipeline) {
    std::sort(statistics.begin(), statistics.end());
    ValidityReport report;
    report.pipeline = std::move(pipeline);
    report.replications = statistics.size();
    report.seed = seed;
    const double m = static_cast<double>(statistics.size());
    for (double alpha : alphas) {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw std::invalid_argument("make_report: alpha levels must lie in (0,1)");
        LevelVerdict v;
        v.alpha = alpha;
        const auto it = std::upper_bound(statistics.begin(), statistics.end(), alpha);
        v.exceedance = static_cast<double>(it - statistics.begin()) / m;
        v.tolerance = 3.0 * std::sqrt(alpha * (1.0 - alpha) / m);
        v.pass = v.exceedance <= alpha + v.tolerance;
        report.levels.push_back(v);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Null simulation: inputs stand directly for the k contour values at the
// truth. Under exact valid inputs these are iid Unif(0,1); a different
// input_sampler models conservative (stochastically larger) inputs.

using InputSampler = std::function<double(Rng&)>;

inline std::vector<double> simulate_null_statistics(const FusionRule& rule, const Calibrator& cal,
                                                    int k, std::size_t replications,
                                                    std::uint64_t seed,
                                                    const InputSampler& input = {}) {
    detail::require_k(k, "simulate_null_statistics");
    Rng rng(seed);
    std::vector<double> at_truth(static_cast<std::size_t>(k));
    std::vector<double> stats(replications);
    for (std::size_t r = 0; r < replications; ++r) {
        for (double& u : at_truth) u = input ? input(rng) : rng.uniform();
        stats[r] = cal.cdf(combine(rule, at_truth));
    }
    return stats;
}

// ---------------------------------------------------------------------------
// Full pipeline simulation: per replication, draw study data, build the k
// contours, fuse, validify, optionally normalize, and record the value at
// the true parameter. The normalization constant is the max of the whole
// simulated field, never a faked scalar.

inline std::vector<double> simulate_pipeline_statistics(const FusionRule& rule,
                                                        const Calibrator& cal,
                                                        const StudySpec& spec,
                                                        const ParameterGrid& grid,
                                                        std::size_t replications,
                                                        std::uint64_t seed, bool normalize_field) {
    std::vector<double> stats(replications);
    for (std::size_t r = 0; r < replications; ++r) {
        const auto contours = simulate_studies(grid, spec, derive_seed(seed, r));
        const ScoreField fused = fuse_pointwise(rule, contours);
        const ScoreField valid = validify(fused, cal);
        if (normalize_field) {
            const Contour pi = normalize(valid);
            stats[r] = evaluate(pi, spec.theta);
        } else {
            stats[r] = evaluate(valid, spec.theta);
        }
    }
    return stats;
}

// ---------------------------------------------------------------------------
// check_validity: estimate P(statistic <= alpha) across an alpha grid and
// compare against alpha + 3 sigma binomial slack. Without normalization the
// inputs are simulated directly as iid uniforms; with normalization the full
// simulated-studies pipeline runs, since the normalizing max is a functional
// of the entire field.

inline ValidityReport check_validity(const FusionRule& rule, const Calibrator& cal, int k,
                                     std::size_t replications, std::span<const double> alphas,
                                     std::uint64_t seed, bool normalize_field = false,
                                     const std::optional<StudySpec>& studies = std::nullopt) {
    if (replications < kMinCertifyReplications)
        throw std::invalid_argument("check_validity: need at least " +
                                    std::to_string(kMinCertifyReplications) + " replications");
    if (cal.k() != k)
        throw provenance_error("check_validity: calibrator is for k=" + std::to_string(cal.k()));
    std::string desc = "rule=" + rule.name() + " k=" + std::to_string(k) +
                       " calibrator=" + (cal.empirical() ? "mc" : "closed");
    std::vector<double> stats;
    if (normalize_field) {
        const StudySpec spec = studies ? *studies : StudySpec::defaults(k);
        if (spec.k() != k)
            throw std::invalid_argument("check_validity: study spec has k=" +
                                        std::to_string(spec.k()));
        const ParameterGrid grid = default_study_grid(spec);
        stats = simulate_pipeline_statistics(rule, cal, spec, grid, replications, seed, true);
        desc += " normalize=on";
    } else {
        stats = simulate_null_statistics(rule, cal, k, replications, seed);
        desc += " normalize=off";
    }
    return make_report(std::move(stats), alphas, seed, desc);
}

// ---------------------------------------------------------------------------
// Coverage of the alpha-cut at the truth, and its width, over repeated
// studies. The oracle is the normal-mean contour built from the pooled data
// of all k studies, the best an inference with full data access can do here.

struct CoverageResult {
    std::size_t replications = 0;
    double alpha = 0.0;
    double coverage = 0.0;           // fraction of replications with pi(theta) > alpha
    double mean_width = 0.0;         // mean total length of the fused alpha-cut
    double mean_oracle_width = 0.0;  // mean alpha-cut width of the pooled-data contour
    std::uint64_t seed = 0;
};

inline CoverageResult coverage_experiment(const StudySpec& spec, const ParameterGrid& grid,
                                          const FusionRule& rule, const Calibrator& cal,
                                          std::size_t replications, double alpha,
                                          std::uint64_t seed) {
    if (replications < kMinCoverageReplications)
        throw std::invalid_argument("coverage_experiment: need at least " +
                                    std::to_string(kMinCoverageReplications) + " replications");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("coverage_experiment: alpha must lie in (0,1)");
    std::size_t covered = 0;
    double width_sum = 0.0;
    double oracle_width_sum = 0.0;
    for (std::size_t r = 0; r < replications; ++r) {
        const std::uint64_t rep_seed = derive_seed(seed, r);
        const auto ybars = simulate_study_means(spec, rep_seed);
        std::vector<Contour> contours;
        contours.reserve(ybars.size());
        double pooled = 0.0;
        for (int i = 0; i < spec.k(); ++i) {
            const int n = spec.sample_sizes[static_cast<std::size_t>(i)];
            contours.push_back(
                normal_mean_contour(grid, ybars[static_cast<std::size_t>(i)], n, spec.sigma));
            pooled += ybars[static_cast<std::size_t>(i)] * static_cast<double>(n);
        }
        pooled /= static_cast<double>(spec.total_n());
        const Contour fused = normalize(validify(fuse_pointwise(rule, contours), cal));
        if (evaluate(fused, spec.theta) > alpha) ++covered;
        width_sum += total_length(alpha_cut(fused, alpha));
        const Contour oracle = normal_mean_contour(grid, pooled, spec.total_n(), spec.sigma);
        oracle_width_sum += total_length(alpha_cut(oracle, alpha));
    }
    CoverageResult res;
    res.replications = replications;
    res.alpha = alpha;
    res.coverage = static_cast<double>(covered) / static_cast<double>(replications);
    res.mean_width = width_sum / static_cast<double>(replications);
    res.mean_oracle_width = oracle_width_sum / static_cast<double>(replications);
    res.seed = seed;
    return res;
}

// ---------------------------------------------------------------------------
// Kolmogorov-Smirnov distance between a sample and Unif(0,1).

inline double ks_statistic_uniform(std::vector<double> samples) {
    if (samples.empty())
        throw std::invalid_argument("ks_statistic_uniform: empty sample");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double fi = static_cast<double>(i);
        d = std::max(d, std::max((fi + 1.0) / n - samples[i], samples[i] - fi / n));
    }
    return d;
}

}  // namespace imfuse
