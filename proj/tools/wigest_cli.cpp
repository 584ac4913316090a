// wigest: generate synthetic traces, run the recogniser, evaluate corpora.
//
// exit codes: 0 ok, 1 bad input / validation, 2 I/O

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wigest/wigest.hpp"

namespace fs = std::filesystem;
using namespace wigest;

namespace {

struct Globals {
    std::optional<std::uint64_t> seed;
    std::optional<double> sample_rate;
    std::optional<int> levels;
    std::optional<double> silence_timeout;
    std::optional<int> preamble_updowns;
};

PipelineConfig pipeline_config(const Globals& g) {
    PipelineConfig c;
    if (g.levels) c.denoise.levels = *g.levels;
    if (g.silence_timeout) c.segmenter.silence_timeout_s = *g.silence_timeout;
    if (g.preamble_updowns) c.segmenter.preamble_updown_count = *g.preamble_updowns;
    if (c.denoise.levels < 1) fail(ErrorKind::Domain, "--levels must be >= 1");
    validate_config(c.segmenter);
    return c;
}

void make_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(ErrorKind::Io, "cannot create '" + dir.string() + "': " + ec.message());
}

template <typename F>
void write_file(const fs::path& path, F&& body) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write '" + path.string() + "'");
    body(out);
    out.flush();
    if (!out) fail(ErrorKind::Io, "write failed for '" + path.string() + "'");
}

ScenarioScript apply_globals(ScenarioScript s, const Globals& g) {
    if (g.seed) s.seed = *g.seed;
    if (g.sample_rate) s.sample_rate_hz = *g.sample_rate;
    return s;
}

int cmd_generate(const Globals& g, const std::string& script_path, const std::string& out_dir) {
    const auto script = apply_globals(load_script(script_path), g);
    const auto scn = generate_scenario(script);
    make_dir(out_dir);
    save_trace(scn.bundle, (fs::path(out_dir) / "trace.csv").string());
    write_file(fs::path(out_dir) / "truth.csv", [&](std::ostream& o) { write_ground_truth(o, scn.truth); });
    std::cout << "wrote " << scn.bundle.size() << " AP traces, " << scn.truth.spans.size() << " truth spans to "
              << out_dir << "\n";
    return 0;
}

int cmd_run(const Globals& g, const std::string& trace_path, const std::string& templates_path,
            const std::string& rules_path, const std::string& dump_dir) {
    LoadOptions opts;
    opts.sample_rate_hz = g.sample_rate;
    const auto bundle = load_trace(trace_path, opts);
    const auto templates = templates_path.empty() ? default_templates() : load_templates(templates_path);
    const auto rules = rules_path.empty() ? default_rules() : load_rules(rules_path);
    for (const auto& f : rules.unknown_families(templates))
        std::cerr << "warning: rule family '" << f << "' has no template\n";
    const auto config = pipeline_config(g);
    const auto result = run_pipeline(bundle, config, templates, rules);

    write_actions_csv(std::cout, result.actions);
    if (!dump_dir.empty()) {
        const fs::path dir(dump_dir);
        make_dir(dir);
        write_file(dir / "denoised.csv", [&](std::ostream& o) { write_trace_csv(o, TraceBundle(result.denoised)); });
        write_file(dir / "preambles.csv", [&](std::ostream& o) { write_preambles_csv(o, result.preambles); });
        write_file(dir / "primitives.csv", [&](std::ostream& o) { write_primitives_csv(o, result.windows, bundle); });
        write_file(dir / "gestures.csv", [&](std::ostream& o) { write_gestures_csv(o, result.windows); });
        write_file(dir / "actions.csv", [&](std::ostream& o) { write_actions_csv(o, result.actions); });
        int level = config.extractor.analysis_level;
        if (!result.windows.empty()) level = result.windows.front().window.calibration.motion_level;
        level = std::clamp(level, 1, std::max(1, max_dwt_levels(bundle[0].size())));
        write_file(dir / "details.csv", [&](std::ostream& o) { write_details_csv(o, result.denoised, level); });
    }
    return 0;
}

// A corpus is a directory of *.script files and/or subdirectories holding a
// generated trace.csv + truth.csv pair.
int cmd_evaluate(const Globals& g, const std::string& corpus, const std::string& out_dir, bool sweeps, long trials,
                 std::optional<double> sigma) {
    const fs::path root(corpus);
    if (!fs::is_directory(root)) fail(ErrorKind::Io, "corpus '" + corpus + "' is not a directory");
    std::vector<fs::path> entries;
    for (const auto& e : fs::directory_iterator(root)) entries.push_back(e.path());
    std::sort(entries.begin(), entries.end());

    const auto config = pipeline_config(g);
    EvalReport report;
    std::size_t index = 0;
    for (const auto& p : entries) {
        std::optional<Scenario> scn;
        double duration = 0.0;
        if (fs::is_regular_file(p) && p.extension() == ".script") {
            auto script = load_script(p.string());
            if (g.seed) script.seed = *g.seed + index;
            if (g.sample_rate) script.sample_rate_hz = *g.sample_rate;
            try {
                scn = generate_scenario(script);
            } catch (const Error& e) {
                fail(e.kind(), p.filename().string() + ": " + e.what());
            }
            duration = script.duration_s;
        } else if (fs::is_directory(p) && fs::exists(p / "trace.csv") && fs::exists(p / "truth.csv")) {
            LoadOptions opts;
            opts.sample_rate_hz = g.sample_rate;
            scn.emplace();
            scn->bundle = load_trace((p / "trace.csv").string(), opts);
            scn->truth = load_ground_truth((p / "truth.csv").string());
            duration = scn->bundle[0].duration_s();
        } else {
            continue;
        }
        ++index;
        const auto result = run_pipeline(scn->bundle, config);
        score_scenario(report, scn->truth, result, duration);
    }
    if (index == 0) fail(ErrorKind::EmptyInput, "corpus '" + corpus + "' holds no scenarios");

    if (sweeps) {
        const std::uint64_t seed = g.seed.value_or(1);
        TrialSetup setup;
        setup.pipeline = config;
        const double s = sigma ? *sigma : calibrate_sigma(0.875, trials, seed, setup).sigma_db;
        report.accuracy_vs_sigma = accuracy_vs_sigma({0.5, 1.0, 2.0, 4.0, 8.0}, 1, trials, seed, setup);
        report.accuracy_vs_aps = accuracy_vs_aps(s, {1, 2, 3, 4, 5}, trials, seed, setup);
    }

    const fs::path dir(out_dir);
    make_dir(dir);
    write_file(dir / "report.txt", [&](std::ostream& o) { write_report_text(o, report); });
    write_file(dir / "confusion.csv", [&](std::ostream& o) { write_confusion_csv(o, report.gestures); });
    write_file(dir / "primitives.csv", [&](std::ostream& o) { write_primitive_rates_csv(o, report.primitives); });
    write_file(dir / "count_cdf.csv", [&](std::ostream& o) { write_cdf_csv(o, "count_error", report.count_errors); });
    write_file(dir / "frequency_cdf.csv",
               [&](std::ostream& o) { write_cdf_csv(o, "period_error_s", report.frequency_errors_s); });
    if (sweeps) {
        write_file(dir / "accuracy_vs_sigma.csv", [&](std::ostream& o) { write_curve_csv(o, "sigma_db", report.accuracy_vs_sigma); });
        write_file(dir / "accuracy_vs_aps.csv", [&](std::ostream& o) { write_curve_csv(o, "aps", report.accuracy_vs_aps); });
    }
    write_report_text(std::cout, report);
    return 0;
}

int cmd_calibrate(const Globals& g, double target, long trials) {
    TrialSetup setup;
    setup.pipeline = pipeline_config(g);
    const auto r = calibrate_sigma(target, trials, g.seed.value_or(1), setup);
    std::cout << "sigma_db," << detail::fixed4(r.sigma_db) << "\naccuracy," << detail::fixed4(r.accuracy)
              << "\niterations," << r.iterations << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"WiFi RSSI gesture recogniser"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--seed", g.seed, "random seed");
    app.add_option("--sample-rate", g.sample_rate, "sample rate in Hz")->check(CLI::PositiveNumber);
    app.add_option("--levels", g.levels, "denoising DWT levels")->check(CLI::Range(1, 30));
    app.add_option("--silence-timeout", g.silence_timeout, "seconds without an edge that close a gesture window")
        ->check(CLI::PositiveNumber);
    app.add_option("--preamble-updowns", g.preamble_updowns, "up-down motions in the preamble")
        ->check(CLI::Range(1, 64));

    std::string script, out_dir, trace, templates, rules, dump, corpus;
    double target = 0.875;
    long trials = 1000;
    bool sweeps = false;
    std::optional<double> sigma;

    auto* gen = app.add_subcommand("generate", "render a scenario script to trace.csv + truth.csv");
    gen->add_option("script", script)->required();
    gen->add_option("-o,--output", out_dir)->required();

    auto* run = app.add_subcommand("run", "run the pipeline on a trace file, print actions as CSV");
    run->add_option("trace", trace)->required();
    run->add_option("--templates", templates, "gesture template file");
    run->add_option("--rules", rules, "action rule file");
    run->add_option("--dump-stages", dump, "directory for intermediate stage CSVs");

    auto* ev = app.add_subcommand("evaluate", "score the pipeline over a scenario corpus");
    ev->add_option("corpus", corpus)->required();
    ev->add_option("-o,--output", out_dir)->required();
    ev->add_flag("--sweeps", sweeps, "also run accuracy-vs-noise and accuracy-vs-AP sweeps");
    ev->add_option("--trials", trials, "trials per sweep point")->check(CLI::PositiveNumber);
    ev->add_option("--sigma", sigma, "noise level for the AP sweep (calibrated when absent)");

    auto* cal = app.add_subcommand("calibrate-sigma", "find the noise level giving a single-AP primitive accuracy");
    cal->add_option("--target-accuracy", target)->check(CLI::Range(0.0, 1.0));
    cal->add_option("--trials", trials, "trials per bisection step")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (*gen) return cmd_generate(g, script, out_dir);
        if (*run) return cmd_run(g, trace, templates, rules, dump);
        if (*ev) return cmd_evaluate(g, corpus, out_dir, sweeps, trials, sigma);
        if (*cal) return cmd_calibrate(g, target, trials);
    } catch (const Error& e) {
        std::cerr << "wigest: " << e.what() << "\n";
        return e.kind() == ErrorKind::Io ? 2 : 1;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "wigest: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
