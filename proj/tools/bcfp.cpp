// Command-line front end: clean, run, report, dump-keys, featurize.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bcfp/dataset.hpp"
#include "bcfp/experiment.hpp"
#include "bcfp/featurize.hpp"
#include "bcfp/fingerprint.hpp"
#include "bcfp/report.hpp"
#include "bcfp/smiles.hpp"
#include "bcfp/version.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace bcfp;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitPartial = 3;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --- clean ------------------------------------------------------------------

struct CleanArgs {
    std::string dataset;
    std::string smiles_col = "smiles";
    std::string label_col = "p_np";
    std::string out = ".";
    bool normalize = false;
};

int cmd_clean(const CleanArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const CsvTable table = read_csv(fs::path(a.dataset));
    const LoadedRecords loaded = extract_records(table, a.smiles_col, a.label_col);
    ParseOptions options;
    options.normalize_aromaticity = a.normalize;
    CleanResult result = clean_dataset(loaded.records, options);
    result.report.dropped.insert(result.report.dropped.end(), loaded.rejected.begin(), loaded.rejected.end());
    std::sort(result.report.dropped.begin(), result.report.dropped.end(),
              [](const DroppedRow& x, const DroppedRow& y) { return x.row_id < y.row_id; });

    fs::create_directories(a.out);
    const fs::path clean_path = fs::path(a.out) / "clean.csv";
    const fs::path report_path = fs::path(a.out) / "dropped.csv";
    {
        std::ofstream out(clean_path);
        write_clean_csv(out, result.records);
    }
    {
        std::ofstream out(report_path);
        write_report_csv(out, result.report.dropped);
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("input      %zu\n", table.rows.size());
    std::printf("bad label  %zu\n", loaded.rejected.size());
    std::printf("invalid    %zu\n", result.report.invalid);
    std::printf("duplicates %zu (label conflicts %zu)\n", result.report.duplicates, result.report.label_conflicts);
    std::printf("kept       %zu\n", result.records.size());
    std::printf("wrote %s and %s in %.2fs\n", clean_path.c_str(), report_path.c_str(), seconds);
    return kExitOk;
}

// --- run ----------------------------------------------------------------------

struct RunArgs {
    std::string config;
    std::optional<std::string> dataset;
    std::optional<std::string> smiles_col;
    std::optional<std::string> label_col;
    std::optional<std::string> out;
    std::optional<int> jobs;
    bool quiet = false;
};

int cmd_run(const RunArgs& a) {
    ExperimentConfig config = load_config(a.config);
    if (a.dataset) config.dataset.path = *a.dataset;
    if (a.smiles_col) config.dataset.smiles_col = *a.smiles_col;
    if (a.label_col) config.dataset.label_col = *a.label_col;
    if (a.out) config.out = *a.out;
    if (a.jobs) config.jobs = *a.jobs;

    const auto t0 = std::chrono::steady_clock::now();
    ProgressFn progress;
    if (!a.quiet) {
        progress = [&](std::size_t done, std::size_t total, const std::string& label) {
            const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            std::fprintf(stderr, "[%zu/%zu %.0fs] %s\n", done, total, s, label.c_str());
        };
    }
    const RunSummary summary = run_experiment(config, progress);
    std::printf("molecules %zu, jobs %zu (%zu resumed, %zu failed)\n", summary.molecules, summary.jobs_total,
                summary.jobs_skipped, summary.jobs_failed);
    std::printf("records: %s\n", summary.records_path.c_str());
    for (const auto& e : summary.errors) {
        std::fprintf(stderr, "error: %s %s: %s\n", e.config.c_str(), e.split.c_str(), e.message.c_str());
    }
    return summary.errors.empty() ? kExitOk : kExitPartial;
}

// --- report -------------------------------------------------------------------

struct ReportArgs {
    std::string out;
    std::optional<std::string> records;
    double alpha = 0.05;
};

int cmd_report(const ReportArgs& a) {
    if (!(a.alpha > 0.0 && a.alpha < 1.0)) {
        throw UsageError("--alpha must lie in (0, 1)");
    }
    const fs::path out(a.out);
    const fs::path records_path = a.records ? fs::path(*a.records) : out / "records.csv";
    const auto records = read_records_csv(records_path);

    std::vector<std::string> expected;
    const fs::path manifest_path = records_path.parent_path() / "run_manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        try {
            const auto manifest = nlohmann::json::parse(in);
            expected = manifest.value("configs", std::vector<std::string>{});
        } catch (const nlohmann::json::exception&) {
            std::fprintf(stderr, "warning: ignoring unreadable %s\n", manifest_path.c_str());
        }
    }
    const ReportOutput report = write_report(records, out, a.alpha, expected);
    std::fputs(report.table.c_str(), stdout);
    for (const auto& w : report.warnings) {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
    }
    if (!report.tukey.empty()) {
        std::size_t significant = 0;
        for (const auto& r : report.tukey) significant += r.pair.significant ? 1 : 0;
        std::printf("Tukey HSD (alpha %.3g): %zu of %zu pairs significant\n", a.alpha, significant,
                    report.tukey.size());
    }
    for (const auto& f : report.files) {
        std::printf("wrote %s\n", f.c_str());
    }
    return kExitOk;
}

// --- dump-keys ------------------------------------------------------------------

struct DumpArgs {
    std::optional<std::string> dataset;
    std::vector<std::string> smiles;
    std::string smiles_col = "smiles";
    std::string scheme = "both";
    int radius = 1;
    bool normalize = false;
};

int cmd_dump_keys(const DumpArgs& a) {
    std::vector<std::string> inputs = a.smiles;
    if (a.dataset) {
        const CsvTable table = read_csv(fs::path(*a.dataset));
        const auto it = std::find(table.header.begin(), table.header.end(), a.smiles_col);
        if (it == table.header.end()) {
            throw DataError("missing column '" + a.smiles_col + "'");
        }
        const auto col = static_cast<std::size_t>(it - table.header.begin());
        for (const auto& row : table.rows) {
            if (col < row.size()) inputs.push_back(row[col]);
        }
    }
    if (inputs.empty()) {
        throw UsageError("give --smiles or --dataset");
    }
    if (a.scheme != "ecfp" && a.scheme != "bcfp" && a.scheme != "both") {
        throw UsageError("--scheme must be ecfp, bcfp or both");
    }
    ParseOptions options;
    options.normalize_aromaticity = a.normalize;
    bool any_failed = false;
    for (const auto& smi : inputs) {
        Molecule mol;
        try {
            mol = parse_smiles(smi, options);
        } catch (const SmilesError& e) {
            std::fprintf(stderr, "skipping '%s': %s\n", smi.c_str(), e.what());
            any_failed = true;
            continue;
        }
        for (const char* scheme : {"ecfp", "bcfp"}) {
            if (a.scheme != "both" && a.scheme != scheme) continue;
            const KeyMultiset keys =
                std::string_view(scheme) == "ecfp" ? ecfp_keys(mol, a.radius) : bcfp_keys(mol, a.radius);
            nlohmann::json line;
            line["smiles"] = smi;
            line["scheme"] = scheme;
            line["radius"] = a.radius;
            line["keys"] = nlohmann::json::array();
            for (const auto& [key, count] : keys.entries()) {
                line["keys"].push_back({{"key", key.value}, {"count", count}});
            }
            std::cout << line.dump() << '\n';
        }
    }
    return any_failed ? kExitPartial : kExitOk;
}

// --- featurize ------------------------------------------------------------------

struct FeaturizeArgs {
    std::string dataset;
    std::string smiles_col = "smiles";
    std::string label_col = "label";
    std::string scheme = "ecfp_r1_fold2048";
    std::string out;
    std::string format = "bin";
    std::optional<double> test_fraction;
    std::uint64_t seed = 0;
    bool normalize = false;
    int jobs = 1;
};

int cmd_featurize(const FeaturizeArgs& a) {
    const auto scheme = parse_scheme_id(a.scheme);
    if (!scheme) {
        throw UsageError("unknown scheme id '" + a.scheme + "'");
    }
    if (a.format != "bin" && a.format != "csv") {
        throw UsageError("--format must be bin or csv");
    }
    ParseOptions options;
    options.normalize_aromaticity = a.normalize;
    const Dataset data = load_dataset(a.dataset, a.smiles_col, a.label_col, options);
    const auto labels = data.labels();
    const auto keys = compute_keys(data.molecules, a.jobs);

    // Sort&Slice vocabularies come from the training rows of one holdout
    // split when --test-fraction is given, otherwise from every row.
    std::vector<std::size_t> train;
    if (a.test_fraction) {
        train = stratified_holdout(labels, *a.test_fraction, a.seed).train;
    } else {
        train.resize(labels.size());
        for (std::size_t i = 0; i < train.size(); ++i) train[i] = i;
    }
    const FeatureMatrix m = build_features(keys, labels, *scheme, train);
    for (const auto& note : m.notes) {
        std::fprintf(stderr, "note: %s\n", note.c_str());
    }
    std::ofstream out(a.out, a.format == "bin" ? std::ios::binary : std::ios::out);
    if (!out) {
        throw DataError("cannot write '" + a.out + "'");
    }
    if (a.format == "bin") {
        write_matrix_binary(out, m);
    } else {
        write_matrix_csv(out, m);
    }
    std::printf("%zu rows x %zu columns -> %s\n", m.rows, m.cols, a.out.c_str());
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bond-centred and atom-centred count fingerprints with random-forest benchmarks"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    CleanArgs clean;
    auto* c = app.add_subcommand("clean", "Drop invalid and duplicate molecules from a CSV");
    c->add_option("--dataset", clean.dataset, "input CSV")->required()->check(CLI::ExistingFile);
    c->add_option("--smiles-col", clean.smiles_col, "SMILES column")->capture_default_str();
    c->add_option("--label-col", clean.label_col, "binary label column")->capture_default_str();
    c->add_option("--out", clean.out, "output directory for clean.csv and dropped.csv")->capture_default_str();
    c->add_flag("--normalize-aromaticity", clean.normalize, "perceive aromatic 6-rings in Kekule input");

    RunArgs run;
    auto* r = app.add_subcommand("run", "Run an experiment grid from a TOML config");
    r->add_option("--config", run.config, "TOML config (see presets/)")->required()->check(CLI::ExistingFile);
    r->add_option("--dataset", run.dataset, "override dataset.path");
    r->add_option("--smiles-col", run.smiles_col, "override dataset.smiles_col");
    r->add_option("--label-col", run.label_col, "override dataset.label_col");
    r->add_option("--out", run.out, "override run.out");
    r->add_option("--jobs", run.jobs, "worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
    r->add_flag("--quiet", run.quiet, "no per-job progress");

    ReportArgs report;
    auto* p = app.add_subcommand("report", "Summaries, Tukey HSD and box plots for a run");
    p->add_option("--out", report.out, "run directory; report files are written here")->required();
    p->add_option("--records", report.records, "records CSV (default <out>/records.csv)");
    p->add_option("--alpha", report.alpha, "Tukey HSD significance level")->capture_default_str();

    DumpArgs dump;
    auto* d = app.add_subcommand("dump-keys", "Print key multisets as JSON lines");
    d->add_option("--smiles", dump.smiles, "SMILES string (repeatable)");
    d->add_option("--dataset", dump.dataset, "CSV with a SMILES column")->check(CLI::ExistingFile);
    d->add_option("--smiles-col", dump.smiles_col, "SMILES column")->capture_default_str();
    d->add_option("--scheme", dump.scheme, "ecfp, bcfp or both")->capture_default_str();
    d->add_option("--radius", dump.radius, "radius 0..3")->check(CLI::Range(0, kMaxRadius))->capture_default_str();
    d->add_flag("--normalize-aromaticity", dump.normalize, "perceive aromatic 6-rings in Kekule input");

    FeaturizeArgs feat;
    auto* f = app.add_subcommand("featurize", "Export a feature matrix");
    f->add_option("--dataset", feat.dataset, "cleaned CSV")->required()->check(CLI::ExistingFile);
    f->add_option("--smiles-col", feat.smiles_col, "SMILES column")->capture_default_str();
    f->add_option("--label-col", feat.label_col, "label column")->capture_default_str();
    f->add_option("--scheme", feat.scheme, "scheme id, e.g. concat_r1_ss1024_oov")->capture_default_str();
    f->add_option("--out", feat.out, "output file")->required();
    f->add_option("--format", feat.format, "bin or csv")->capture_default_str();
    f->add_option("--test-fraction", feat.test_fraction, "fit Sort&Slice on a stratified holdout train part");
    f->add_option("--seed", feat.seed, "holdout seed")->capture_default_str();
    f->add_option("--jobs", feat.jobs, "threads for key generation")->capture_default_str();
    f->add_flag("--normalize-aromaticity", feat.normalize, "perceive aromatic 6-rings in Kekule input");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (c->parsed()) return cmd_clean(clean);
        if (r->parsed()) return cmd_run(run);
        if (p->parsed()) return cmd_report(report);
        if (d->parsed()) return cmd_dump_keys(dump);
        if (f->parsed()) return cmd_featurize(feat);
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
    return kExitUsage;
}
