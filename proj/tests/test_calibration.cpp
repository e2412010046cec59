#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "imfuse/calibration.hpp"
#include "imfuse/errors.hpp"
#include "imfuse/fusion.hpp"
#include "imfuse/harness.hpp"

using namespace imfuse;

namespace {

// Oracle sampler kept independent of the library's generator and combiners:
// std::mt19937_64 driven directly, rules spelled out inline.
std::vector<double> oracle_sample(int k, std::size_t m, unsigned long long seed,
                                  const char* rule) {
    std::mt19937_64 eng(seed);
    auto unif = [&] { return (eng() >> 11) * 0x1.0p-53; };
    std::vector<double> out(m);
    for (auto& s : out) {
        double mn = 1.0, prod = 1.0, sum = 0.0;
        for (int i = 0; i < k; ++i) {
            const double u = unif();
            mn = std::min(mn, u);
            prod *= u;
            sum += u;
        }
        if (rule[0] == 'm' && rule[1] == 'i')
            s = mn;
        else if (rule[0] == 'p')
            s = prod;
        else
            s = sum / k;
    }
    std::sort(out.begin(), out.end());
    return out;
}

// sup distance between a continuous cdf and the empirical cdf of a sorted sample
template <typename Cdf>
double sup_dist(const std::vector<double>& sorted, Cdf cdf) {
    const double m = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        d = std::max(d, std::max(std::fabs(f - (static_cast<double>(i) + 1.0) / m),
                                 std::fabs(f - static_cast<double>(i) / m)));
    }
    return d;
}

}  // namespace

TEST_CASE("closed-form cdf values match analytic references") {
    // min of k uniforms: 1 - (1-x)^k
    CHECK(cdf_min(0.5, 2) == Catch::Approx(0.75).margin(1e-15));
    CHECK(cdf_min(0.1, 3) == Catch::Approx(1.0 - 0.9 * 0.9 * 0.9).margin(1e-15));
    // product of 2 uniforms at 0.25: x(1 - ln x)
    CHECK(cdf_product(0.25, 2) == Catch::Approx(0.596573590279972654).margin(1e-14));
    // mean of 2 uniforms at 0.25: triangular tail
    CHECK(cdf_mean(0.25, 2) == Catch::Approx(0.125).margin(1e-15));
    // mean of 5 uniforms at 0.3
    CHECK(cdf_mean(0.3, 5) == Catch::Approx(0.061979166666666667).margin(1e-14));
    // symmetry of the mean law
    CHECK(cdf_mean(0.5, 2) == Catch::Approx(0.5).margin(1e-14));
    CHECK(cdf_mean(0.5, 3) == Catch::Approx(0.5).margin(1e-14));
    CHECK(cdf_mean(0.5, 25) == Catch::Approx(0.5).margin(1e-13));
    // deep tails at the largest supported k
    CHECK(cdf_mean(0.04, 25) == Catch::Approx(6.4469502843844734e-26).epsilon(1e-12));
    CHECK(cdf_mean(0.9, 25) == Catch::Approx(0.99999999999999943).margin(5e-15));
}

TEST_CASE("cdf edge cases and guards") {
    for (int k : {1, 2, 7}) {
        CHECK(cdf_min(0.0, k) == 0.0);
        CHECK(cdf_min(1.0, k) == 1.0);
        CHECK(cdf_product(0.0, k) == 0.0);
        CHECK(cdf_product(1.0, k) == 1.0);
        CHECK(cdf_mean(0.0, k) == 0.0);
        CHECK(cdf_mean(1.0, k) == 1.0);
    }
    // k=1: all three laws are Unif(0,1), returned without rounding
    for (double x : {0.3, 0.123456789, 0.999}) {
        CHECK(cdf_min(x, 1) == x);
        CHECK(cdf_product(x, 1) == x);
        CHECK(cdf_mean(x, 1) == x);
    }
    CHECK_THROWS_AS(cdf_min(-0.1, 2), std::invalid_argument);
    CHECK_THROWS_AS(cdf_min(1.1, 2), std::invalid_argument);
    CHECK_THROWS_AS(cdf_min(0.5, 0), std::invalid_argument);
    CHECK_THROWS_AS(cdf_mean(0.5, 26), std::invalid_argument);  // beyond closed-form range
    CHECK_NOTHROW(cdf_mean(0.5, 25));
}

TEST_CASE("closed-form cdfs are nondecreasing and stable near the edges") {
    for (int k : {2, 5, 10}) {
        double prev_min = 0.0, prev_prod = 0.0, prev_mean = 0.0;
        for (int i = 0; i <= 1000; ++i) {
            const double x = i / 1000.0;
            const double a = cdf_min(x, k), b = cdf_product(x, k), c = cdf_mean(x, k);
            CHECK(a >= prev_min);
            CHECK(b >= prev_prod);
            CHECK(c >= prev_mean);
            CHECK((a >= 0.0 && a <= 1.0));
            CHECK((b >= 0.0 && b <= 1.0));
            CHECK((c >= 0.0 && c <= 1.0));
            prev_min = a;
            prev_prod = b;
            prev_mean = c;
        }
        CHECK(cdf_min(1.0 - 1e-16, k) == Catch::Approx(1.0).margin(1e-12));
        CHECK(cdf_min(1e-300, k) >= 0.0);
    }
}

TEST_CASE("closed forms agree with an independent Monte Carlo oracle") {
    // 3 sigma of the KS band at m=200000 is ~0.004; 0.005 gives slack
    const std::size_t m = 200000;
    for (int k : {2, 3, 5}) {
        const auto smin = oracle_sample(k, m, 1000 + k, "min");
        CHECK(sup_dist(smin, [&](double x) { return cdf_min(x, k); }) < 0.005);
        const auto sprod = oracle_sample(k, m, 2000 + k, "product");
        CHECK(sup_dist(sprod, [&](double x) { return cdf_product(x, k); }) < 0.005);
        const auto smean = oracle_sample(k, m, 3000 + k, "mean");
        CHECK(sup_dist(smean, [&](double x) { return cdf_mean(x, k); }) < 0.005);
    }
}

TEST_CASE("min and product calibration only inflate; mean does not") {
    for (int k : {2, 3, 5}) {
        for (int i = 1; i < 100; ++i) {
            const double x = i / 100.0;
            CHECK(cdf_min(x, k) >= x);
            CHECK(cdf_product(x, k) >= x);
        }
    }
    // mean of 2 at 0.25 sits below the identity: calibration can deflate too
    CHECK(cdf_mean(0.25, 2) < 0.25);
}

TEST_CASE("closed-form calibrator dispatches to the matching law") {
    const auto cal = Calibrator::closed_form(RuleKind::product, 3);
    CHECK(cal.cdf(0.25) == cdf_product(0.25, 3));
    CHECK(cal.k() == 3);
    CHECK_FALSE(cal.empirical());
    CHECK(cal.rule_name() == "product");
    CHECK_THROWS_AS(Calibrator::closed_form(RuleKind::custom, 2), std::invalid_argument);
    CHECK_THROWS_AS(Calibrator::closed_form(RuleKind::mean, 26), std::invalid_argument);
    CHECK_NOTHROW(Calibrator::closed_form(RuleKind::min, 100));
}

TEST_CASE("mc calibrator is deterministic and close to the closed form") {
    const auto rule = FusionRule::min();
    const auto mc1 = mc_calibrator(rule, 2, 100000, 31);
    const auto mc2 = mc_calibrator(rule, 2, 100000, 31);
    CHECK(mc1.sample() == mc2.sample());
    CHECK(std::is_sorted(mc1.sample().begin(), mc1.sample().end()));
    CHECK(mc1.empirical());
    CHECK(mc1.seed() == 31);

    double d = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double x = i / 1000.0;
        d = std::max(d, std::fabs(mc1.cdf(x) - cdf_min(x, 2)));
    }
    CHECK(d < 0.01);  // 3 sigma band at M=1e5 is ~0.006

    CHECK_THROWS_AS(mc_calibrator(rule, 2, 999, 31), std::invalid_argument);
}

TEST_CASE("empirical cdf uses the at-or-below convention") {
    // 250 copies each of {0.1, 0.2, 0.2, 0.8}, sorted, to satisfy the sample floor.
    std::vector<double> sample;
    for (double v : {0.1, 0.2, 0.2, 0.8})
        sample.insert(sample.end(), 250, v);
    std::sort(sample.begin(), sample.end());
    const auto cal = Calibrator::empirical(RuleKind::min, "min", 2, sample, 0);
    CHECK(cal.cdf(0.05) == 0.0);
    CHECK(cal.cdf(0.1) == 0.25);    // sample points count as <=
    CHECK(cal.cdf(0.2) == 0.75);
    CHECK(cal.cdf(0.5) == 0.75);
    CHECK(cal.cdf(0.8) == 1.0);
    CHECK(cal.cdf(0.9) == 1.0);
    CHECK_THROWS_AS(Calibrator::empirical(RuleKind::min, "min", 2,
                                          std::vector<double>{0.1, 0.2, 0.2, 0.8}, 0),
                    std::invalid_argument);
}

TEST_CASE("custom rules are audited before Monte Carlo calibration") {
    auto lying = FusionRule::custom(
        "skew",
        [](std::span<const double> v) { return v[0] * (1.0 - v[1]); },
        {Monotonicity::nondecreasing, Monotonicity::nondecreasing});
    CHECK_THROWS_AS(mc_calibrator(lying, 2, 5000, 3), std::invalid_argument);

    McOptions exempt;
    exempt.skip_monotonicity_audit = true;
    CHECK_NOTHROW(mc_calibrator(lying, 2, 5000, 3, exempt));

    auto honest = FusionRule::custom(
        "geomean",
        [](std::span<const double> v) { return std::sqrt(v[0] * v[1]); },
        {Monotonicity::nondecreasing, Monotonicity::nondecreasing});
    const auto cal = mc_calibrator(honest, 2, 50000, 3);
    CHECK(cal.rule_name() == "geomean");
    // geometric mean of 2 uniforms: P(sqrt(U1 U2) <= x) = cdf_product(x^2, 2)
    CHECK(cal.cdf(0.5) == Catch::Approx(cdf_product(0.25, 2)).margin(0.01));
}

TEST_CASE("validify maps the combined field through its null cdf") {
    const ParameterGrid g({0.0, 1.0, 2.0});
    const ScoreField fused(g, {0.1, 0.5, 0.9}, Provenance{RuleKind::min, "min", 2});
    const auto cal = Calibrator::closed_form(RuleKind::min, 2);
    const ScoreField valid = validify(fused, cal);
    CHECK(valid.values()[0] == cdf_min(0.1, 2));
    CHECK(valid.values()[1] == cdf_min(0.5, 2));
    CHECK(valid.values()[2] == cdf_min(0.9, 2));
    REQUIRE(valid.provenance());
    CHECK(valid.provenance()->k == 2);
}

TEST_CASE("validify rejects a calibrator for a different rule or k") {
    const ParameterGrid g({0.0, 1.0});
    const ScoreField fused(g, {0.1, 0.5}, Provenance{RuleKind::min, "min", 2});
    CHECK_THROWS_AS(validify(fused, Calibrator::closed_form(RuleKind::product, 2)),
                    provenance_error);
    CHECK_THROWS_AS(validify(fused, Calibrator::closed_form(RuleKind::min, 3)),
                    provenance_error);
    // unstamped fields are accepted as-is (caller's responsibility)
    const ScoreField bare(g, {0.1, 0.5});
    CHECK_NOTHROW(validify(bare, Calibrator::closed_form(RuleKind::product, 2)));
}

TEST_CASE("validified null statistics are uniform for each built-in rule") {
    const std::size_t m = 100000;
    for (const auto& rule : {FusionRule::min(), FusionRule::product(), FusionRule::mean()}) {
        for (int k : {2, 5}) {
            const auto cal = Calibrator::closed_form(rule.kind(), k);
            const auto stats =
                simulate_null_statistics(rule, cal, k, m, 7000 + 10 * k + (int)rule.kind());
            CHECK(ks_statistic_uniform(stats) < 0.0065);  // 3 sigma band at m=1e5
        }
    }
}

TEST_CASE("mc-calibrated custom rule also yields near-uniform null statistics") {
    auto geo = FusionRule::custom(
        "geomean",
        [](std::span<const double> v) { return std::sqrt(v[0] * v[1]); },
        {Monotonicity::nondecreasing, Monotonicity::nondecreasing});
    const auto cal = mc_calibrator(geo, 2, 100000, 5);
    const auto stats = simulate_null_statistics(geo, cal, 2, 50000, 6);
    CHECK(ks_statistic_uniform(stats) < 0.012);
}
