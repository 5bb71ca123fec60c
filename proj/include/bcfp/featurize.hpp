#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "bcfp/dataset.hpp"
#include "bcfp/fingerprint.hpp"

namespace bcfp {

class FeatureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using CountVector = std::vector<std::uint32_t>;

/// Accumulates each key's count into coordinate `key mod dim`.
/// Throws FeatureError when dim is zero.
[[nodiscard]] CountVector fold_counts(const KeyMultiset& keys, std::size_t dim);

/// Top-K keys of a training set ranked by molecule frequency.
class SortSliceVocabulary {
public:
    SortSliceVocabulary() = default;
    SortSliceVocabulary(std::vector<SubstructureKey> retained, std::vector<std::uint32_t> frequency, bool oov);

    [[nodiscard]] std::span<const SubstructureKey> retained() const noexcept { return retained_; }
    /// Training molecule-frequency of each retained key.
    [[nodiscard]] std::span<const std::uint32_t> frequency() const noexcept { return frequency_; }
    [[nodiscard]] bool oov_enabled() const noexcept { return oov_; }
    [[nodiscard]] std::size_t slice_size() const noexcept { return retained_.size(); }
    /// Output width: retained keys plus the OOV coordinate when enabled.
    [[nodiscard]] std::size_t width() const noexcept { return retained_.size() + (oov_ ? 1 : 0); }
    [[nodiscard]] std::optional<std::size_t> index_of(SubstructureKey key) const;

private:
    std::vector<SubstructureKey> retained_;
    std::vector<std::uint32_t> frequency_;
    std::unordered_map<SubstructureKey, std::size_t> index_;
    bool oov_ = false;
};

/// Ranks keys by (number of training multisets containing the key desc,
/// key asc) and keeps the first `slice_size`. Throws FeatureError on an
/// empty training set or zero slice size.
[[nodiscard]] SortSliceVocabulary fit_sortslice(std::span<const KeyMultiset> train, std::size_t slice_size,
                                                bool oov);

[[nodiscard]] CountVector transform_sortslice(const KeyMultiset& keys, const SortSliceVocabulary& vocab);

enum class FingerprintKind { Ecfp, Bcfp, Concat, Hybrid };
enum class Pooling { Folded, SortSlice };

[[nodiscard]] std::string_view to_string(FingerprintKind kind) noexcept;
[[nodiscard]] std::string_view to_string(Pooling pooling) noexcept;
[[nodiscard]] FingerprintKind parse_fingerprint_kind(std::string_view text);
[[nodiscard]] Pooling parse_pooling(std::string_view text);

struct FeatureScheme {
    FingerprintKind kind = FingerprintKind::Ecfp;
    Pooling pooling = Pooling::Folded;
    int radius = 1;
    std::size_t fold_dim = 2048;
    std::size_t slice_size = 1024;
    bool oov = false;  // sortslice only

    /// Stable identifier, e.g. "hybrid_r1_fold2048" or "concat_r2_ss1024_oov".
    [[nodiscard]] std::string id() const;
};

/// Parses an identifier produced by FeatureScheme::id().
[[nodiscard]] std::optional<FeatureScheme> parse_scheme_id(std::string_view id);

/// Per-molecule key multisets for every radius 0..3 of both fingerprints.
struct MoleculeKeys {
    std::array<KeyMultiset, kMaxRadius + 1> ecfp;
    std::array<KeyMultiset, kMaxRadius + 1> bcfp;
};

[[nodiscard]] MoleculeKeys compute_keys(const Molecule& mol);
[[nodiscard]] std::vector<MoleculeKeys> compute_keys(std::span<const Molecule> molecules, int jobs = 1);

struct ColumnBlock {
    std::string name;  // e.g. "ecfp_r1_fold2048"
    bool ecfp = true;
    int radius = 0;
    Pooling pooling = Pooling::Folded;
    bool oov = false;
    std::size_t offset = 0;
    std::size_t width = 0;
};

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint32_t> values;  // row-major
    std::vector<int> labels;
    std::vector<ColumnBlock> blocks;
    std::vector<std::size_t> vocabulary_fit_rows;  // empty for folded pooling
    std::vector<std::string> notes;

    [[nodiscard]] std::span<const std::uint32_t> row(std::size_t r) const {
        return std::span<const std::uint32_t>(values).subspan(r * cols, cols);
    }
};

/// Assembles the scheme's blocks for every molecule. Sort&Slice
/// vocabularies are fitted on `train_rows` only; folded pooling ignores them.
[[nodiscard]] FeatureMatrix build_features(std::span<const MoleculeKeys> keys, std::span<const int> labels,
                                           const FeatureScheme& scheme, std::span<const std::size_t> train_rows);

/// Binary matrix: "BCFPMAT1", u64 rows, u64 cols, row-major u32 counts,
/// all little-endian.
void write_matrix_binary(std::ostream& out, const FeatureMatrix& m);
[[nodiscard]] FeatureMatrix read_matrix_binary(std::istream& in);
/// CSV with a `label` column followed by one column per feature, named
/// `<block>:<index>`.
void write_matrix_csv(std::ostream& out, const FeatureMatrix& m);

}  // namespace bcfp
