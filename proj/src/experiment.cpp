#include "bcfp/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "bcfp/hash.hpp"
#include "bcfp/metrics.hpp"
#include "bcfp/parallel.hpp"
#include "bcfp/random.hpp"
#include "bcfp/smiles.hpp"
#include "bcfp/version.hpp"
#include "json.hpp"
#include "toml.hpp"

namespace bcfp {

namespace {

// --- TOML helpers -----------------------------------------------------------

void reject_unknown(const toml::table& table, const std::string& section, std::initializer_list<std::string_view> known) {
    for (const auto& [key, node] : table) {
        if (std::find(known.begin(), known.end(), key.str()) == known.end()) {
            throw ConfigError("unknown key '" + section + "." + std::string(key.str()) + "'");
        }
    }
}

template <typename T>
std::optional<T> get(const toml::table& table, const std::string& section, std::string_view key) {
    const toml::node* node = table.get(key);
    if (node == nullptr) {
        return std::nullopt;
    }
    if constexpr (std::is_same_v<T, double>) {
        if (auto v = node->value<double>()) {
            return *v;
        }
    } else if constexpr (std::is_same_v<T, bool>) {
        if (node->is_boolean()) {
            return node->as_boolean()->get();
        }
    } else if constexpr (std::is_integral_v<T>) {
        if (node->is_integer()) {
            const auto v = node->as_integer()->get();
            if (std::is_unsigned_v<T> && v < 0) {
                throw ConfigError("'" + section + "." + std::string(key) + "' must not be negative");
            }
            return static_cast<T>(v);
        }
    } else {
        if (node->is_string()) {
            return T(node->as_string()->get());
        }
    }
    throw ConfigError("'" + section + "." + std::string(key) + "' has the wrong type");
}

template <typename T>
std::optional<std::vector<T>> get_array(const toml::table& table, const std::string& section, std::string_view key) {
    const toml::node* node = table.get(key);
    if (node == nullptr) {
        return std::nullopt;
    }
    const toml::array* arr = node->as_array();
    if (arr == nullptr) {
        throw ConfigError("'" + section + "." + std::string(key) + "' must be an array");
    }
    std::vector<T> out;
    for (const auto& item : *arr) {
        if constexpr (std::is_same_v<T, bool>) {
            if (!item.is_boolean()) throw ConfigError("'" + section + "." + std::string(key) + "' must hold booleans");
            out.push_back(item.as_boolean()->get());
        } else if constexpr (std::is_integral_v<T>) {
            if (!item.is_integer() || item.as_integer()->get() < 0) {
                throw ConfigError("'" + section + "." + std::string(key) + "' must hold non-negative integers");
            }
            out.push_back(static_cast<T>(item.as_integer()->get()));
        } else {
            if (!item.is_string()) throw ConfigError("'" + section + "." + std::string(key) + "' must hold strings");
            out.emplace_back(item.as_string()->get());
        }
    }
    return out;
}

const toml::table* section(const toml::table& root, std::string_view name) {
    const toml::node* node = root.get(name);
    if (node == nullptr) {
        return nullptr;
    }
    if (!node->is_table()) {
        throw ConfigError("'" + std::string(name) + "' must be a table");
    }
    return node->as_table();
}

std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::string quote(const std::string& s) {
    std::ostringstream out;
    out << toml::value<std::string>(s);
    return out.str();
}

std::string render(const ExperimentConfig& c, bool for_hash) {
    std::ostringstream out;
    out << "[dataset]\n";
    if (!for_hash) {
        out << "path = " << quote(c.dataset.path.string()) << "\n";
    }
    out << "smiles_col = " << quote(c.dataset.smiles_col) << "\n"
        << "label_col = " << quote(c.dataset.label_col) << "\n"
        << "clean = " << (c.dataset.clean ? "true" : "false") << "\n"
        << "normalize_aromaticity = " << (c.dataset.normalize_aromaticity ? "true" : "false") << "\n\n";

    out << "[grid]\nkinds = [";
    for (std::size_t i = 0; i < c.grid.kinds.size(); ++i) {
        out << (i ? ", " : "") << '"' << to_string(c.grid.kinds[i]) << '"';
    }
    out << "]\nradii = [";
    for (std::size_t i = 0; i < c.grid.radii.size(); ++i) {
        out << (i ? ", " : "") << c.grid.radii[i];
    }
    out << "]\npooling = [";
    for (std::size_t i = 0; i < c.grid.pooling.size(); ++i) {
        out << (i ? ", " : "") << '"' << to_string(c.grid.pooling[i]) << '"';
    }
    out << "]\noov = [";
    for (std::size_t i = 0; i < c.grid.oov.size(); ++i) {
        out << (i ? ", " : "") << (c.grid.oov[i] ? "true" : "false");
    }
    out << "]\nfold_dim = " << c.grid.fold_dim << "\nslice_size = " << c.grid.slice_size << "\n\n";

    out << "[split]\nkind = \"" << (c.split.kind == SplitKind::Holdout ? "holdout" : "kfold") << "\"\n";
    if (c.split.kind == SplitKind::Holdout) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.17g", c.split.test_fraction);
        out << "test_fraction = " << buf << "\n";
    } else {
        out << "k = " << c.split.k << "\n";
    }
    out << "seeds = [";
    for (std::size_t i = 0; i < c.split.seeds.size(); ++i) {
        out << (i ? ", " : "") << c.split.seeds[i];
    }
    out << "]\n\n";

    const auto& f = c.forest;
    out << "[forest]\nn_trees = " << f.n_trees << "\nmax_features = \""
        << (f.max_features == MaxFeatures::Sqrt ? "sqrt" : "all") << "\"\nmin_samples_leaf = " << f.min_samples_leaf
        << "\nmin_samples_split = " << f.min_samples_split << "\nmax_depth = " << f.max_depth
        << "\nbootstrap = " << (f.bootstrap ? "true" : "false") << "\nseed = " << f.seed << "\n";
    if (!for_hash) {
        out << "\n[run]\nout = " << quote(c.out.string()) << "\njobs = " << c.jobs << "\n";
    }
    return out.str();
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

// ----------------------------------------------------------------------------
// Config
// ----------------------------------------------------------------------------

std::vector<FeatureScheme> ExperimentConfig::schemes() const {
    std::vector<FeatureScheme> out;
    std::set<std::string> seen;
    for (int radius : grid.radii) {
        for (FingerprintKind kind : grid.kinds) {
            for (Pooling pooling : grid.pooling) {
                for (bool oov : grid.oov) {
                    FeatureScheme s{kind, pooling, radius, grid.fold_dim, grid.slice_size,
                                    pooling == Pooling::SortSlice && oov};
                    if (seen.insert(s.id()).second) {
                        out.push_back(s);
                    }
                }
            }
        }
    }
    return out;
}

std::uint64_t ExperimentConfig::hash() const { return hash64(render(*this, true)); }

std::string ExperimentConfig::to_toml() const { return render(*this, false); }

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "invalid TOML at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(msg.str());
    }
    reject_unknown(root, "", {"dataset", "grid", "split", "forest", "run"});
    ExperimentConfig c;

    if (const auto* t = section(root, "dataset")) {
        reject_unknown(*t, "dataset", {"path", "smiles_col", "label_col", "clean", "normalize_aromaticity"});
        if (auto v = get<std::string>(*t, "dataset", "path")) {
            std::filesystem::path p(*v);
            c.dataset.path = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
        }
        if (auto v = get<std::string>(*t, "dataset", "smiles_col")) c.dataset.smiles_col = *v;
        if (auto v = get<std::string>(*t, "dataset", "label_col")) c.dataset.label_col = *v;
        if (auto v = get<bool>(*t, "dataset", "clean")) c.dataset.clean = *v;
        if (auto v = get<bool>(*t, "dataset", "normalize_aromaticity")) c.dataset.normalize_aromaticity = *v;
    }

    if (const auto* t = section(root, "grid")) {
        reject_unknown(*t, "grid", {"kinds", "radii", "pooling", "oov", "fold_dim", "slice_size"});
        try {
            if (auto v = get_array<std::string>(*t, "grid", "kinds")) {
                c.grid.kinds.clear();
                for (const auto& s : *v) c.grid.kinds.push_back(parse_fingerprint_kind(s));
            }
            if (auto v = get_array<std::string>(*t, "grid", "pooling")) {
                c.grid.pooling.clear();
                for (const auto& s : *v) c.grid.pooling.push_back(parse_pooling(s));
            }
        } catch (const FeatureError& e) {
            throw ConfigError(std::string("grid: ") + e.what());
        }
        if (auto v = get_array<int>(*t, "grid", "radii")) c.grid.radii = *v;
        if (auto v = get_array<bool>(*t, "grid", "oov")) c.grid.oov = *v;
        if (auto v = get<std::size_t>(*t, "grid", "fold_dim")) c.grid.fold_dim = *v;
        if (auto v = get<std::size_t>(*t, "grid", "slice_size")) c.grid.slice_size = *v;
    }

    std::optional<std::vector<std::uint64_t>> seeds;
    std::optional<std::uint64_t> n_seeds;
    std::uint64_t base_seed = 0;
    if (const auto* t = section(root, "split")) {
        reject_unknown(*t, "split", {"kind", "test_fraction", "k", "seeds", "n_seeds", "base_seed"});
        if (auto v = get<std::string>(*t, "split", "kind")) {
            if (*v == "holdout") {
                c.split.kind = SplitKind::Holdout;
            } else if (*v == "kfold") {
                c.split.kind = SplitKind::KFold;
            } else {
                throw ConfigError("split.kind must be \"holdout\" or \"kfold\"");
            }
        }
        if (auto v = get<double>(*t, "split", "test_fraction")) c.split.test_fraction = *v;
        if (auto v = get<int>(*t, "split", "k")) c.split.k = *v;
        seeds = get_array<std::uint64_t>(*t, "split", "seeds");
        n_seeds = get<std::uint64_t>(*t, "split", "n_seeds");
        if (auto v = get<std::uint64_t>(*t, "split", "base_seed")) base_seed = *v;
    }
    if (seeds && n_seeds) {
        throw ConfigError("give either split.seeds or split.n_seeds, not both");
    }
    if (seeds) {
        c.split.seeds = *seeds;
    } else {
        const std::uint64_t n = n_seeds.value_or(c.split.kind == SplitKind::Holdout ? 29 : 5);
        for (std::uint64_t i = 0; i < n; ++i) c.split.seeds.push_back(base_seed + i);
    }

    if (const auto* t = section(root, "forest")) {
        reject_unknown(*t, "forest", {"n_trees", "max_features", "min_samples_leaf", "min_samples_split", "max_depth",
                                      "bootstrap", "seed"});
        auto& f = c.forest;
        if (auto v = get<int>(*t, "forest", "n_trees")) f.n_trees = *v;
        if (auto v = get<std::string>(*t, "forest", "max_features")) {
            if (*v == "sqrt") {
                f.max_features = MaxFeatures::Sqrt;
            } else if (*v == "all") {
                f.max_features = MaxFeatures::All;
            } else {
                throw ConfigError("forest.max_features must be \"sqrt\" or \"all\"");
            }
        }
        if (auto v = get<int>(*t, "forest", "min_samples_leaf")) f.min_samples_leaf = *v;
        if (auto v = get<int>(*t, "forest", "min_samples_split")) f.min_samples_split = *v;
        if (auto v = get<int>(*t, "forest", "max_depth")) f.max_depth = *v;
        if (auto v = get<bool>(*t, "forest", "bootstrap")) f.bootstrap = *v;
        if (auto v = get<std::uint64_t>(*t, "forest", "seed")) f.seed = *v;
    }

    if (const auto* t = section(root, "run")) {
        reject_unknown(*t, "run", {"out", "jobs"});
        if (auto v = get<std::string>(*t, "run", "out")) c.out = *v;
        if (auto v = get<int>(*t, "run", "jobs")) c.jobs = *v;
    }

    // --- validation
    if (c.grid.kinds.empty() || c.grid.radii.empty() || c.grid.pooling.empty() || c.grid.oov.empty()) {
        throw ConfigError("grid lists must not be empty");
    }
    for (int r : c.grid.radii) {
        if (r < 0 || r > kMaxRadius) throw ConfigError("grid.radii must lie in 0..3");
    }
    if (c.grid.fold_dim == 0 || c.grid.slice_size == 0) {
        throw ConfigError("grid.fold_dim and grid.slice_size must be positive");
    }
    if (!(c.split.test_fraction > 0.0 && c.split.test_fraction < 1.0)) {
        throw ConfigError("split.test_fraction must lie in (0, 1)");
    }
    if (c.split.k < 2) throw ConfigError("split.k must be at least 2");
    if (c.split.seeds.empty()) throw ConfigError("at least one split seed is required");
    if (std::set<std::uint64_t>(c.split.seeds.begin(), c.split.seeds.end()).size() != c.split.seeds.size()) {
        throw ConfigError("split seeds must be distinct");
    }
    if (c.forest.n_trees < 1 || c.forest.min_samples_leaf < 1 || c.forest.min_samples_split < 2 ||
        c.forest.max_depth < 0) {
        throw ConfigError("forest parameters out of range");
    }
    if (c.jobs < 0) throw ConfigError("run.jobs must not be negative");
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.parent_path());
}

// ----------------------------------------------------------------------------
// Jobs
// ----------------------------------------------------------------------------

std::vector<NamedSplit> make_splits(const SplitConfig& config, std::span<const int> labels, std::uint64_t forest_seed) {
    std::vector<NamedSplit> out;
    auto seed_for = [&](const std::string& id) { return mix_seed(forest_seed ^ hash64(id)); };
    if (config.kind == SplitKind::Holdout) {
        for (std::uint64_t seed : config.seeds) {
            NamedSplit s;
            s.id = "holdout_s" + std::to_string(seed);
            s.split = stratified_holdout(labels, config.test_fraction, seed);
            s.forest_seed = seed_for(s.id);
            out.push_back(std::move(s));
        }
    } else {
        auto folds = stratified_kfold(labels, config.k, config.seeds);
        for (std::size_t i = 0; i < folds.size(); ++i) {
            const std::size_t repeat = i / static_cast<std::size_t>(config.k);
            const std::size_t fold = i % static_cast<std::size_t>(config.k);
            NamedSplit s;
            s.id = "kfold_s" + std::to_string(config.seeds[repeat]) + "_f" + std::to_string(fold);
            s.split = std::move(folds[i]);
            s.forest_seed = seed_for(s.id);
            out.push_back(std::move(s));
        }
    }
    return out;
}

MetricRecord run_job(std::span<const MoleculeKeys> keys, std::span<const int> labels, const FeatureScheme& scheme,
                     const NamedSplit& split, ForestParams forest) {
    const FeatureMatrix m = build_features(keys, labels, scheme, split.split.train);
    const DenseMatrix train = to_dense(m, split.split.train);
    const DenseMatrix test = to_dense(m, split.split.test);
    forest.seed = split.forest_seed;
    const Forest model = train_forest(train, select(labels, split.split.train), forest);
    const std::vector<double> scores = model.predict_proba(test);
    const std::vector<int> truth = select(labels, split.split.test);
    return {scheme.id(), split.id, auroc(scores, truth), average_precision(scores, truth),
            f1_at_threshold(scores, truth)};
}

void write_records_csv(std::ostream& out, std::vector<MetricRecord> records) {
    std::sort(records.begin(), records.end(), [](const MetricRecord& a, const MetricRecord& b) {
        return std::tie(a.config, a.split) < std::tie(b.config, b.split);
    });
    out << "config,split,auroc,auprc,f1\n";
    for (const auto& r : records) {
        out << csv_escape(r.config) << ',' << csv_escape(r.split) << ',' << format_double(r.auroc) << ','
            << format_double(r.auprc) << ',' << format_double(r.f1) << '\n';
    }
}

std::vector<MetricRecord> read_records_csv(std::istream& in) {
    const CsvTable table = read_csv(in);
    auto column = [&](const std::string& name) {
        const auto it = std::find(table.header.begin(), table.header.end(), name);
        if (it == table.header.end()) {
            throw DataError("records file lacks a '" + name + "' column");
        }
        return static_cast<std::size_t>(it - table.header.begin());
    };
    const std::size_t c_config = column("config");
    const std::size_t c_split = column("split");
    const std::size_t c_auroc = column("auroc");
    const std::size_t c_auprc = column("auprc");
    const std::size_t c_f1 = column("f1");
    std::vector<MetricRecord> out;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        if (row.size() != table.header.size()) {
            throw DataError("records row " + std::to_string(i + 1) + " has the wrong number of fields");
        }
        auto num = [&](std::size_t c) {
            try {
                std::size_t used = 0;
                const double v = std::stod(row[c], &used);
                if (used != row[c].size()) throw std::invalid_argument("trailing text");
                return v;
            } catch (const std::exception&) {
                throw DataError("records row " + std::to_string(i + 1) + ": bad number '" + row[c] + "'");
            }
        };
        out.push_back({row[c_config], row[c_split], num(c_auroc), num(c_auprc), num(c_f1)});
    }
    return out;
}

std::vector<MetricRecord> read_records_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open records file '" + path.string() + "'");
    }
    return read_records_csv(in);
}

// ----------------------------------------------------------------------------
// Runner
// ----------------------------------------------------------------------------

RunSummary run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
    using clock = std::chrono::steady_clock;
    const auto seconds_since = [](clock::time_point t) {
        return std::chrono::duration<double>(clock::now() - t).count();
    };
    const int jobs = config.jobs > 0 ? config.jobs : static_cast<int>(std::max(1U, std::thread::hardware_concurrency()));

    // --- data
    auto t0 = clock::now();
    if (config.dataset.path.empty()) {
        throw ConfigError("no dataset path given");
    }
    const std::string raw = read_file(config.dataset.path);
    const std::uint64_t input_digest = hash64(raw);
    std::istringstream raw_stream(raw);
    const LoadedRecords loaded =
        extract_records(read_csv(raw_stream), config.dataset.smiles_col, config.dataset.label_col);
    ParseOptions options;
    options.normalize_aromaticity = config.dataset.normalize_aromaticity;
    std::vector<DatasetRecord> records = loaded.records;
    if (config.dataset.clean) {
        records = clean_dataset(records, options).records;
    } else if (!loaded.rejected.empty()) {
        throw DataError("row " + std::to_string(loaded.rejected.front().row_id + 2) + ": " +
                        loaded.rejected.front().reason);
    }
    std::vector<Molecule> molecules;
    std::vector<int> labels;
    molecules.reserve(records.size());
    for (const auto& r : records) {
        try {
            molecules.push_back(parse_smiles(r.smiles, options));
        } catch (const SmilesError& e) {
            throw DataError("row " + std::to_string(r.row_id + 2) + ": " + e.what());
        }
        labels.push_back(r.label);
    }
    const double load_s = seconds_since(t0);

    t0 = clock::now();
    const std::vector<MoleculeKeys> keys = compute_keys(molecules, jobs);
    const double keys_s = seconds_since(t0);

    const std::vector<NamedSplit> splits = make_splits(config.split, labels, config.forest.seed);
    const std::vector<FeatureScheme> schemes = config.schemes();

    // --- output directory and resume state
    namespace fs = std::filesystem;
    fs::create_directories(config.out);
    const fs::path manifest_path = config.out / "run_manifest.json";
    const fs::path records_path = config.out / "records.csv";
    const fs::path errors_path = config.out / "errors.csv";
    const std::string config_hash = hex(config.hash());
    const std::string digest = hex(input_digest);

    RunSummary summary;
    summary.molecules = molecules.size();
    summary.records_path = records_path;
    if (fs::exists(manifest_path)) {
        nlohmann::json old;
        try {
            old = nlohmann::json::parse(read_file(manifest_path));
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("unreadable manifest '" + manifest_path.string() + "': " + e.what());
        }
        if (old.value("config_hash", "") != config_hash || old.value("input_digest", "") != digest) {
            throw ConfigError("ConfigMismatch: '" + config.out.string() +
                              "' holds results of a different config or dataset; choose another --out");
        }
        if (fs::exists(records_path)) {
            summary.records = read_records_csv(records_path);
        }
    } else if (fs::exists(records_path)) {
        throw ConfigError("'" + records_path.string() + "' exists without a manifest; refusing to mix results");
    }

    std::set<std::pair<std::string, std::string>> done;
    std::set<std::string> known_configs;
    std::set<std::string> known_splits;
    for (const auto& s : schemes) known_configs.insert(s.id());
    for (const auto& s : splits) known_splits.insert(s.id);
    std::vector<MetricRecord> kept;
    for (auto& r : summary.records) {
        if (known_configs.count(r.config) && known_splits.count(r.split) && done.emplace(r.config, r.split).second) {
            kept.push_back(std::move(r));
        }
    }
    summary.records = std::move(kept);

    struct Pending {
        const FeatureScheme* scheme;
        const NamedSplit* split;
    };
    std::vector<Pending> pending;
    for (const auto& scheme : schemes) {
        for (const auto& split : splits) {
            if (!done.count({scheme.id(), split.id})) {
                pending.push_back({&scheme, &split});
            }
        }
    }
    summary.jobs_total = schemes.size() * splits.size();
    summary.jobs_skipped = summary.jobs_total - pending.size();

    nlohmann::json manifest;
    manifest["artifact"] = "bcfp";
    manifest["version"] = std::string(kVersion);
    manifest["config_hash"] = config_hash;
    manifest["input_digest"] = digest;
    manifest["input_path"] = config.dataset.path.string();
    manifest["molecules"] = molecules.size();
    manifest["configs"] = nlohmann::json::array();
    for (const auto& s : schemes) manifest["configs"].push_back(s.id());
    manifest["splits"] = nlohmann::json::array();
    for (const auto& s : splits) manifest["splits"].push_back(s.id);
    manifest["config"] = config.to_toml();
    auto write_manifest = [&] {
        std::ofstream out(manifest_path);
        out << manifest.dump(2) << '\n';
    };
    manifest["status"] = "running";
    write_manifest();

    // Records already on disk are rewritten so appends start from a clean file.
    {
        std::ofstream out(records_path);
        write_records_csv(out, summary.records);
    }
    std::ofstream append(records_path, std::ios::app);

    // --- jobs
    t0 = clock::now();
    std::mutex mutex;
    std::size_t finished = 0;
    ForestParams forest = config.forest;
    forest.jobs = 1;
    parallel_for(pending.size(), jobs, [&](std::size_t i) {
        const Pending& job = pending[i];
        const std::string label = job.scheme->id() + " " + job.split->id;
        std::optional<MetricRecord> record;
        std::optional<JobError> error;
        try {
            record = run_job(keys, labels, *job.scheme, *job.split, forest);
        } catch (const std::exception& e) {
            error = JobError{job.scheme->id(), job.split->id, e.what()};
        }
        std::lock_guard lock(mutex);
        if (record) {
            append << csv_escape(record->config) << ',' << csv_escape(record->split) << ','
                   << format_double(record->auroc) << ',' << format_double(record->auprc) << ','
                   << format_double(record->f1) << '\n'
                   << std::flush;
            summary.records.push_back(std::move(*record));
        } else {
            summary.errors.push_back(std::move(*error));
        }
        ++finished;
        if (progress) {
            progress(finished, pending.size(), label);
        }
    });
    append.close();
    const double jobs_s = seconds_since(t0);

    {
        std::ofstream out(records_path);
        write_records_csv(out, summary.records);
    }
    std::sort(summary.errors.begin(), summary.errors.end(), [](const JobError& a, const JobError& b) {
        return std::tie(a.config, a.split) < std::tie(b.config, b.split);
    });
    if (summary.errors.empty()) {
        fs::remove(errors_path);
    } else {
        std::ofstream out(errors_path);
        out << "config,split,error\n";
        for (const auto& e : summary.errors) {
            out << csv_escape(e.config) << ',' << csv_escape(e.split) << ',' << csv_escape(e.message) << '\n';
        }
    }
    summary.jobs_failed = summary.errors.size();

    manifest["status"] = summary.errors.empty() ? "complete" : "partial";
    manifest["records"] = summary.records.size();
    manifest["failed"] = summary.errors.size();
    manifest["timings"] = {{"load_s", load_s}, {"keys_s", keys_s}, {"jobs_s", jobs_s}};
    write_manifest();
    return summary;
}

}  // namespace bcfp
