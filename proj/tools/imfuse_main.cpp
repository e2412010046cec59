// imfuse: fuse possibility contours from independent studies, calibrate the
// result against its null law, and query the fused contour.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "imfuse/imfuse.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace imfuse;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitDegenerate = 3;

std::vector<std::string> split_commas(const std::string& text) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        if (comma == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    return parts;
}

double parse_double_arg(const std::string& s, const char* what) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string(what) + ": not a number: '" + s + "'");
    }
    if (used != s.size())
        throw std::invalid_argument(std::string(what) + ": not a number: '" + s + "'");
    return v;
}

ParameterGrid parse_grid_spec(const std::string& text) {
    const auto parts = split_commas(text);
    if (parts.size() != 3)
        throw std::invalid_argument("--grid expects min,max,points");
    const double lo = parse_double_arg(parts[0], "--grid min");
    const double hi = parse_double_arg(parts[1], "--grid max");
    const long points = std::stol(parts[2]);
    if (points < 2) throw std::invalid_argument("--grid needs at least 2 points");
    return ParameterGrid::uniform(lo, hi, static_cast<std::size_t>(points));
}

json grid_info(const ParameterGrid& g) {
    return json{{"min", g.theta_min()}, {"max", g.theta_max()}, {"points", g.size()}};
}

json report_to_json(const char* command, const ValidityReport& report) {
    json levels = json::array();
    for (const auto& lv : report.levels)
        levels.push_back(json{{"alpha", lv.alpha},
                              {"exceedance", lv.exceedance},
                              {"tolerance", lv.tolerance},
                              {"verdict", lv.pass ? "pass" : "fail"}});
    return json{{"command", command},
                {"pipeline", report.pipeline},
                {"replications", report.replications},
                {"seed", report.seed},
                {"levels", levels},
                {"all_pass", report.all_pass()}};
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

Calibrator make_calibrator(const FusionRule& rule, int k, const std::string& kind,
                           std::size_t mc_samples, std::uint64_t seed) {
    if (kind == "closed") return Calibrator::closed_form(rule.kind(), k);
    if (kind == "mc") return mc_calibrator(rule, k, mc_samples, seed);
    throw std::invalid_argument("--calibrator must be closed or mc");
}

// ---------------------------------------------------------------------------

struct FuseArgs {
    std::vector<std::string> inputs;
    std::string out;
    std::string rule = "min";
    std::string calibrator = "closed";
    std::size_t mc_samples = kDefaultMcSamples;
    std::uint64_t seed = 0;
    bool no_normalize = false;
    std::string grid_spec;
};

int cmd_fuse(const FuseArgs& args) {
    const FusionRule rule = rule_from_string(args.rule);
    std::vector<Contour> contours;
    contours.reserve(args.inputs.size());
    for (const auto& path : args.inputs) contours.push_back(read_contour_csv(path));
    const int k = static_cast<int>(contours.size());

    ScoreField fused = [&] {
        if (!args.grid_spec.empty())
            return fuse_pointwise(rule, contours, parse_grid_spec(args.grid_spec));
        return fuse_pointwise(rule, contours);
    }();

    const Calibrator cal = make_calibrator(rule, k, args.calibrator, args.mc_samples, args.seed);
    const ScoreField valid = validify(fused, cal);
    const double max_before = detail::max_value(valid.values());
    if (!(max_before > 0.0))
        throw degenerate_field_error("fuse: combined field is zero everywhere");

    std::string out_path = args.out;
    if (args.no_normalize) {
        // an un-normalized field is not a contour; the suffix says so
        const std::string contour_suffix = ".contour.csv";
        if (out_path.size() >= contour_suffix.size() &&
            out_path.compare(out_path.size() - contour_suffix.size(), contour_suffix.size(),
                             contour_suffix) == 0)
            out_path = out_path.substr(0, out_path.size() - contour_suffix.size()) + ".field.csv";
        write_field_csv(out_path, valid);
    } else {
        write_contour_csv(out_path, normalize(valid));
    }

    emit(json{{"command", "fuse"},
              {"rule", rule.name()},
              {"k", k},
              {"calibrator", args.calibrator},
              {"normalized", !args.no_normalize},
              {"max_before_normalization", max_before},
              {"grid", grid_info(valid.grid())},
              {"inputs", args.inputs},
              {"output", out_path}});
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CertifyArgs {
    std::string rule = "min";
    int k = 0;
    std::size_t mc = 200000;
    std::uint64_t seed = 0;
    bool normalize_field = false;
    std::string calibrator = "closed";
    std::size_t mc_samples = kDefaultMcSamples;
    std::string out;
};

int cmd_certify(const CertifyArgs& args) {
    const FusionRule rule = rule_from_string(args.rule);
    const Calibrator cal =
        make_calibrator(rule, args.k, args.calibrator, args.mc_samples, derive_seed(args.seed, 1));
    const ValidityReport report = check_validity(rule, cal, args.k, args.mc,
                                                 default_alpha_grid(), args.seed,
                                                 args.normalize_field);
    emit(report_to_json("certify", report));
    if (!args.out.empty()) {
        std::string csv = "alpha,exceedance,tolerance,verdict\n";
        for (const auto& lv : report.levels) {
            char buf[128];
            std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%s\n", lv.alpha, lv.exceedance,
                          lv.tolerance, lv.pass ? "pass" : "fail");
            csv += buf;
        }
        std::ofstream out(args.out, std::ios::trunc | std::ios::binary);
        if (!out) throw parse_error(args.out + ": cannot open for writing");
        out << csv;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct MeasureArgs {
    std::string contour;
    std::string claim;
};

int cmd_measure(const MeasureArgs& args) {
    const Contour c = read_contour_csv(args.contour);
    const Claim claim = parse_claim(args.claim);
    emit(json{{"command", "measure"},
              {"contour", args.contour},
              {"claim", args.claim},
              {"possibility", possibility(c, claim)},
              {"necessity", necessity(c, claim)}});
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct DemoArgs {
    int k = 5;
    bool k_given = false;
    std::string n_list;
    double theta = 0.0;
    double sigma = 1.0;
    std::uint64_t seed = 0;
    std::string rules = "min,product,mean";
    std::string out_dir;
    std::size_t points = 1001;
};

int cmd_demo(const DemoArgs& args) {
    StudySpec spec = [&] {
        if (args.n_list.empty()) return StudySpec::defaults(args.k, args.theta, args.sigma);
        std::vector<int> ns;
        for (const auto& part : split_commas(args.n_list)) ns.push_back(std::stoi(part));
        return StudySpec(std::move(ns), args.theta, args.sigma);
    }();
    if (args.k_given && spec.k() != args.k)
        throw std::invalid_argument("demo: --k disagrees with the length of --n");

    std::vector<FusionRule> rules;
    for (const auto& part : split_commas(args.rules)) rules.push_back(rule_from_string(part));
    if (rules.empty()) throw std::invalid_argument("demo: need at least one rule");

    const ParameterGrid grid = default_study_grid(spec, args.points);
    const auto ybars = simulate_study_means(spec, args.seed);

    fs::create_directories(args.out_dir);
    json files_studies = json::array();
    std::vector<Contour> contours;
    double pooled = 0.0;
    for (int i = 0; i < spec.k(); ++i) {
        const int n = spec.sample_sizes[static_cast<std::size_t>(i)];
        contours.push_back(normal_mean_contour(grid, ybars[static_cast<std::size_t>(i)], n,
                                               spec.sigma));
        pooled += ybars[static_cast<std::size_t>(i)] * static_cast<double>(n);
        const std::string name = "study_" + std::to_string(i + 1) + ".contour.csv";
        write_contour_csv((fs::path(args.out_dir) / name).string(), contours.back());
        files_studies.push_back(name);
    }
    pooled /= static_cast<double>(spec.total_n());

    json files_fused = json::object();
    for (const auto& rule : rules) {
        const Calibrator cal = Calibrator::closed_form(rule.kind(), spec.k());
        const Contour fused = normalize(validify(fuse_pointwise(rule, contours), cal));
        const std::string name = "fused_" + rule.name() + ".contour.csv";
        write_contour_csv((fs::path(args.out_dir) / name).string(), fused);
        files_fused[rule.name()] = name;
    }

    const Contour oracle = normal_mean_contour(grid, pooled, spec.total_n(), spec.sigma);
    write_contour_csv((fs::path(args.out_dir) / "oracle.contour.csv").string(), oracle);

    const json manifest{{"command", "demo"},
                        {"seed", args.seed},
                        {"k", spec.k()},
                        {"sample_sizes", spec.sample_sizes},
                        {"theta", spec.theta},
                        {"sigma", spec.sigma},
                        {"grid", grid_info(grid)},
                        {"files",
                         json{{"studies", files_studies},
                              {"fused", files_fused},
                              {"oracle", "oracle.contour.csv"}}}};
    {
        std::ofstream out(fs::path(args.out_dir) / "manifest.json",
                          std::ios::trunc | std::ios::binary);
        out << manifest.dump(2) << "\n";
    }
    emit(manifest);
    return kExitOk;
}

// ---------------------------------------------------------------------------

struct CurveArgs {
    std::string rule = "min";
    int k = 0;
    std::string calibrator = "closed";
    std::size_t mc_samples = kDefaultMcSamples;
    std::uint64_t seed = 0;
    std::size_t points = 1001;
    std::string out;
};

int cmd_calibration_curve(const CurveArgs& args) {
    const FusionRule rule = rule_from_string(args.rule);
    const Calibrator cal =
        make_calibrator(rule, args.k, args.calibrator, args.mc_samples, args.seed);
    if (args.points < 2) throw std::invalid_argument("--points must be at least 2");

    const fs::path target(args.out);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        if (!out) throw parse_error(tmp.string() + ": cannot open for writing");
        out << "x,F\n";
        char buf[80];
        for (std::size_t i = 0; i < args.points; ++i) {
            const double x = static_cast<double>(i) / static_cast<double>(args.points - 1);
            std::snprintf(buf, sizeof buf, "%.12g,%.12g\n", x, cal.cdf(x));
            out << buf;
        }
    }
    fs::rename(tmp, target);

    emit(json{{"command", "calibration-curve"},
              {"rule", rule.name()},
              {"k", args.k},
              {"calibrator", args.calibrator},
              {"points", args.points},
              {"output", args.out}});
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fuse independent possibility contours into one valid contour"};
    app.require_subcommand(1);

    FuseArgs fuse_args;
    auto* fuse = app.add_subcommand("fuse", "fuse contour CSVs into a calibrated contour");
    fuse->add_option("inputs", fuse_args.inputs, "input contour CSV files")->required();
    fuse->add_option("--out", fuse_args.out, "output CSV path")->required();
    fuse->add_option("--rule", fuse_args.rule, "combination rule: min|product|mean");
    fuse->add_option("--calibrator", fuse_args.calibrator, "closed|mc");
    fuse->add_option("--mc-samples", fuse_args.mc_samples, "Monte Carlo calibrator sample count");
    fuse->add_option("--seed", fuse_args.seed, "Monte Carlo seed");
    fuse->add_flag("--no-normalize", fuse_args.no_normalize,
                   "write the validified field without rescaling its peak to 1");
    fuse->add_option("--grid", fuse_args.grid_spec,
                     "resample inputs onto a common uniform grid: min,max,points");

    CertifyArgs certify_args;
    auto* certify = app.add_subcommand("certify", "Monte Carlo check of the validity guarantee");
    certify->add_option("--rule", certify_args.rule, "combination rule: min|product|mean");
    certify->add_option("--k", certify_args.k, "number of fused contours")->required();
    certify->add_option("--mc", certify_args.mc, "replication count (min 10000)");
    certify->add_option("--seed", certify_args.seed, "simulation seed");
    certify->add_flag("--normalize", certify_args.normalize_field,
                      "simulate the full study pipeline including normalization");
    certify->add_option("--calibrator", certify_args.calibrator, "closed|mc");
    certify->add_option("--mc-samples", certify_args.mc_samples,
                        "sample count when --calibrator mc");
    certify->add_option("--out", certify_args.out, "also write the report as CSV");

    MeasureArgs measure_args;
    auto* measure = app.add_subcommand("measure", "possibility and necessity of a claim");
    measure->add_option("--contour", measure_args.contour, "fused contour CSV")->required();
    measure->add_option("--claim", measure_args.claim,
                        "interval claim, e.g. \"[-0.6,0.6]\" or \"[0,1],[2,3]\"")
        ->required();

    DemoArgs demo_args;
    auto* demo = app.add_subcommand("demo", "simulate studies and write all pipeline artifacts");
    demo->add_option("--k", demo_args.k, "number of studies");
    demo->add_option("--n", demo_args.n_list, "per-study sample sizes, e.g. 5,10,20");
    demo->add_option("--theta", demo_args.theta, "true mean");
    demo->add_option("--sigma", demo_args.sigma, "known noise scale");
    demo->add_option("--seed", demo_args.seed, "simulation seed");
    demo->add_option("--rules", demo_args.rules, "comma-separated rules to fuse with");
    demo->add_option("--out-dir", demo_args.out_dir, "output directory")->required();
    demo->add_option("--points", demo_args.points, "grid resolution");

    CurveArgs curve_args;
    auto* curve = app.add_subcommand("calibration-curve", "export the null cdf F as CSV");
    curve->add_option("--rule", curve_args.rule, "combination rule: min|product|mean");
    curve->add_option("--k", curve_args.k, "number of fused contours")->required();
    curve->add_option("--calibrator", curve_args.calibrator, "closed|mc");
    curve->add_option("--mc-samples", curve_args.mc_samples, "sample count when --calibrator mc");
    curve->add_option("--seed", curve_args.seed, "Monte Carlo seed");
    curve->add_option("--points", curve_args.points, "number of x values in [0,1]");
    curve->add_option("--out", curve_args.out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
        demo_args.k_given = demo->count("--k") > 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (fuse->parsed()) return cmd_fuse(fuse_args);
        if (certify->parsed()) return cmd_certify(certify_args);
        if (measure->parsed()) return cmd_measure(measure_args);
        if (demo->parsed()) return cmd_demo(demo_args);
        if (curve->parsed()) return cmd_calibration_curve(curve_args);
        std::cerr << "imfuse: no command given\n";
        return kExitUsage;
    } catch (const degenerate_field_error& e) {
        std::cerr << "imfuse: " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception& e) {
        std::cerr << "imfuse: " << e.what() << "\n";
        return kExitUsage;
    }
}
