#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bcfp/dataset.hpp"
#include "bcfp/featurize.hpp"
#include "bcfp/forest.hpp"
#include "bcfp/splits.hpp"

namespace bcfp {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class SplitKind { Holdout, KFold };

struct DatasetConfig {
    std::filesystem::path path;
    std::string smiles_col = "smiles";
    std::string label_col = "label";
    bool clean = true;  // drop invalid and duplicate rows before running
    bool normalize_aromaticity = false;
};

struct GridConfig {
    std::vector<FingerprintKind> kinds{FingerprintKind::Ecfp, FingerprintKind::Bcfp, FingerprintKind::Concat,
                                       FingerprintKind::Hybrid};
    std::vector<int> radii{0, 1, 2, 3};
    std::vector<Pooling> pooling{Pooling::Folded};
    std::vector<bool> oov{false};  // only applies to sortslice
    std::size_t fold_dim = 2048;
    std::size_t slice_size = 1024;
};

struct SplitConfig {
    SplitKind kind = SplitKind::Holdout;
    double test_fraction = 0.2;
    int k = 5;
    std::vector<std::uint64_t> seeds;  // one per holdout split or k-fold repeat
};

struct ExperimentConfig {
    DatasetConfig dataset;
    GridConfig grid;
    SplitConfig split;
    ForestParams forest;
    std::filesystem::path out = "run";
    int jobs = 0;  // 0 = hardware concurrency

    /// Expanded, de-duplicated scheme list in grid order.
    [[nodiscard]] std::vector<FeatureScheme> schemes() const;
    /// Hash of everything that affects the records (not out/jobs).
    [[nodiscard]] std::uint64_t hash() const;
    /// Canonical TOML rendering of the config.
    [[nodiscard]] std::string to_toml() const;
};

/// Parses a TOML document. Relative dataset paths resolve against
/// `base_dir`. Throws ConfigError with the offending key on bad input.
[[nodiscard]] ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path);

struct NamedSplit {
    std::string id;  // e.g. "holdout_s3" or "kfold_s2_f4"
    Split split;
    std::uint64_t forest_seed = 0;
};

[[nodiscard]] std::vector<NamedSplit> make_splits(const SplitConfig& config, std::span<const int> labels,
                                                  std::uint64_t forest_seed);

struct MetricRecord {
    std::string config;
    std::string split;
    double auroc = 0.0;
    double auprc = 0.0;
    double f1 = 0.0;
};

struct JobError {
    std::string config;
    std::string split;
    std::string message;
};

/// Trains and scores one (scheme, split) pair.
[[nodiscard]] MetricRecord run_job(std::span<const MoleculeKeys> keys, std::span<const int> labels,
                                   const FeatureScheme& scheme, const NamedSplit& split, ForestParams forest);

void write_records_csv(std::ostream& out, std::vector<MetricRecord> records);
[[nodiscard]] std::vector<MetricRecord> read_records_csv(std::istream& in);
[[nodiscard]] std::vector<MetricRecord> read_records_csv(const std::filesystem::path& path);

struct RunSummary {
    std::size_t molecules = 0;
    std::size_t jobs_total = 0;
    std::size_t jobs_skipped = 0;  // already present from an earlier run
    std::size_t jobs_failed = 0;
    std::vector<MetricRecord> records;
    std::vector<JobError> errors;
    std::filesystem::path records_path;
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total, const std::string& label)>;

/// Runs the full grid into config.out: records.csv, errors.csv and
/// run_manifest.json. Existing records with a matching config hash are
/// kept and their jobs skipped. Throws ConfigError when the output
/// directory belongs to a different config, DataError on dataset problems.
RunSummary run_experiment(const ExperimentConfig& config, const ProgressFn& progress = {});

}  // namespace bcfp
