#include "bcfp/featurize.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <istream>
#include <ostream>

#include "bcfp/parallel.hpp"

namespace bcfp {

CountVector fold_counts(const KeyMultiset& keys, std::size_t dim) {
    if (dim == 0) {
        throw FeatureError("ZeroDimension: fold dimension must be positive");
    }
    CountVector out(dim, 0);
    for (const auto& [key, count] : keys.entries()) {
        out[static_cast<std::size_t>(key.value % dim)] += count;
    }
    return out;
}

// ----------------------------------------------------------------------------
// Sort&Slice
// ----------------------------------------------------------------------------

SortSliceVocabulary::SortSliceVocabulary(std::vector<SubstructureKey> retained, std::vector<std::uint32_t> frequency,
                                         bool oov)
    : retained_(std::move(retained)), frequency_(std::move(frequency)), oov_(oov) {
    if (frequency_.size() != retained_.size()) {
        throw FeatureError("vocabulary frequency list does not match retained keys");
    }
    index_.reserve(retained_.size());
    for (std::size_t i = 0; i < retained_.size(); ++i) {
        if (!index_.emplace(retained_[i], i).second) {
            throw FeatureError("vocabulary keys must be unique");
        }
    }
}

std::optional<std::size_t> SortSliceVocabulary::index_of(SubstructureKey key) const {
    const auto it = index_.find(key);
    if (it == index_.end()) {
        return std::nullopt;
    }
    return it->second;
}

SortSliceVocabulary fit_sortslice(std::span<const KeyMultiset> train, std::size_t slice_size, bool oov) {
    if (train.empty()) {
        throw FeatureError("Sort&Slice needs at least one training molecule");
    }
    if (slice_size == 0) {
        throw FeatureError("ZeroDimension: slice size must be positive");
    }
    std::unordered_map<SubstructureKey, std::uint32_t> presence;
    for (const auto& ms : train) {
        for (const auto& entry : ms.entries()) {
            ++presence[entry.first];
        }
    }
    std::vector<std::pair<SubstructureKey, std::uint32_t>> ranked(presence.begin(), presence.end());
    const std::size_t keep = std::min(slice_size, ranked.size());
    const auto by_rank = [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    };
    std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end(), by_rank);
    std::vector<SubstructureKey> retained;
    std::vector<std::uint32_t> frequency;
    retained.reserve(keep);
    frequency.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) {
        retained.push_back(ranked[i].first);
        frequency.push_back(ranked[i].second);
    }
    return SortSliceVocabulary(std::move(retained), std::move(frequency), oov);
}

CountVector transform_sortslice(const KeyMultiset& keys, const SortSliceVocabulary& vocab) {
    CountVector out(vocab.width(), 0);
    std::uint32_t outside = 0;
    for (const auto& [key, count] : keys.entries()) {
        if (const auto idx = vocab.index_of(key)) {
            out[*idx] = count;
        } else {
            outside += count;
        }
    }
    if (vocab.oov_enabled()) {
        out.back() = outside;
    }
    return out;
}

// ----------------------------------------------------------------------------
// Schemes
// ----------------------------------------------------------------------------

std::string_view to_string(FingerprintKind kind) noexcept {
    switch (kind) {
        case FingerprintKind::Ecfp: return "ecfp";
        case FingerprintKind::Bcfp: return "bcfp";
        case FingerprintKind::Concat: return "concat";
        case FingerprintKind::Hybrid: return "hybrid";
    }
    return "?";
}

std::string_view to_string(Pooling pooling) noexcept {
    return pooling == Pooling::Folded ? "folded" : "sortslice";
}

FingerprintKind parse_fingerprint_kind(std::string_view text) {
    for (auto k : {FingerprintKind::Ecfp, FingerprintKind::Bcfp, FingerprintKind::Concat, FingerprintKind::Hybrid}) {
        if (to_string(k) == text) {
            return k;
        }
    }
    throw FeatureError("unknown fingerprint kind '" + std::string(text) + "'");
}

Pooling parse_pooling(std::string_view text) {
    if (text == "folded" || text == "fold") {
        return Pooling::Folded;
    }
    if (text == "sortslice" || text == "ss") {
        return Pooling::SortSlice;
    }
    throw FeatureError("unknown pooling '" + std::string(text) + "'");
}

namespace {

std::string pooling_tag(Pooling pooling, std::size_t fold_dim, std::size_t slice_size, bool oov) {
    if (pooling == Pooling::Folded) {
        return "fold" + std::to_string(fold_dim);
    }
    return "ss" + std::to_string(slice_size) + (oov ? "_oov" : "");
}

}  // namespace

std::string FeatureScheme::id() const {
    return std::string(to_string(kind)) + "_r" + std::to_string(radius) + "_" +
           pooling_tag(pooling, fold_dim, slice_size, oov);
}

std::optional<FeatureScheme> parse_scheme_id(std::string_view id) {
    FeatureScheme s;
    const auto first = id.find("_r");
    if (first == std::string_view::npos) {
        return std::nullopt;
    }
    try {
        s.kind = parse_fingerprint_kind(id.substr(0, first));
    } catch (const FeatureError&) {
        return std::nullopt;
    }
    std::string_view rest = id.substr(first + 2);
    const auto us = rest.find('_');
    if (us == std::string_view::npos) {
        return std::nullopt;
    }
    const auto radius_text = rest.substr(0, us);
    if (std::from_chars(radius_text.data(), radius_text.data() + radius_text.size(), s.radius).ec != std::errc{} ||
        s.radius < 0 || s.radius > kMaxRadius) {
        return std::nullopt;
    }
    rest = rest.substr(us + 1);
    auto parse_size = [](std::string_view text, std::size_t& out) {
        return !text.empty() && std::from_chars(text.data(), text.data() + text.size(), out).ec == std::errc{};
    };
    if (rest.starts_with("fold")) {
        s.pooling = Pooling::Folded;
        if (!parse_size(rest.substr(4), s.fold_dim)) {
            return std::nullopt;
        }
    } else if (rest.starts_with("ss")) {
        s.pooling = Pooling::SortSlice;
        rest = rest.substr(2);
        if (rest.ends_with("_oov")) {
            s.oov = true;
            rest.remove_suffix(4);
        }
        if (!parse_size(rest, s.slice_size)) {
            return std::nullopt;
        }
    } else {
        return std::nullopt;
    }
    if (s.id() != id) {
        return std::nullopt;
    }
    return s;
}

MoleculeKeys compute_keys(const Molecule& mol) {
    MoleculeKeys out;
    auto ecfp = ecfp_keys_by_radius(mol, kMaxRadius);
    auto bcfp = bcfp_keys_by_radius(mol, kMaxRadius);
    for (int r = 0; r <= kMaxRadius; ++r) {
        out.ecfp[static_cast<std::size_t>(r)] = std::move(ecfp[static_cast<std::size_t>(r)]);
        out.bcfp[static_cast<std::size_t>(r)] = std::move(bcfp[static_cast<std::size_t>(r)]);
    }
    return out;
}

std::vector<MoleculeKeys> compute_keys(std::span<const Molecule> molecules, int jobs) {
    std::vector<MoleculeKeys> out(molecules.size());
    parallel_for(molecules.size(), jobs, [&](std::size_t i) { out[i] = compute_keys(molecules[i]); });
    return out;
}

FeatureMatrix build_features(std::span<const MoleculeKeys> keys, std::span<const int> labels,
                             const FeatureScheme& scheme, std::span<const std::size_t> train_rows) {
    if (keys.size() != labels.size()) {
        throw FeatureError("key and label counts differ");
    }
    if (scheme.radius < 0 || scheme.radius > kMaxRadius) {
        throw FeatureError("radius must be in 0..3");
    }

    FeatureMatrix m;
    m.rows = keys.size();
    m.labels.assign(labels.begin(), labels.end());

    // (is_ecfp, radius) for each block.
    std::vector<std::pair<bool, int>> parts;
    switch (scheme.kind) {
        case FingerprintKind::Ecfp: parts = {{true, scheme.radius}}; break;
        case FingerprintKind::Bcfp: parts = {{false, scheme.radius}}; break;
        case FingerprintKind::Concat: parts = {{true, scheme.radius}, {false, scheme.radius}}; break;
        case FingerprintKind::Hybrid:
            if (scheme.radius == 0) {
                m.notes.emplace_back("hybrid at radius 0 is built as concat at radius 0");
            }
            parts = {{true, scheme.radius}, {false, std::max(0, scheme.radius - 1)}};
            break;
    }

    const bool sliced = scheme.pooling == Pooling::SortSlice;
    if (sliced) {
        if (train_rows.empty()) {
            throw FeatureError("Sort&Slice pooling needs training rows");
        }
        m.vocabulary_fit_rows.assign(train_rows.begin(), train_rows.end());
    }

    std::vector<std::vector<CountVector>> block_rows;
    for (const auto& [is_ecfp, radius] : parts) {
        auto pick = [&, is_ecfp = is_ecfp, radius = radius](std::size_t row) -> const KeyMultiset& {
            const auto& mk = keys[row];
            return is_ecfp ? mk.ecfp[static_cast<std::size_t>(radius)] : mk.bcfp[static_cast<std::size_t>(radius)];
        };
        ColumnBlock block;
        block.ecfp = is_ecfp;
        block.radius = radius;
        block.pooling = scheme.pooling;
        block.oov = sliced && scheme.oov;
        block.name = std::string(is_ecfp ? "ecfp" : "bcfp") + "_r" + std::to_string(radius) + "_" +
                     pooling_tag(scheme.pooling, scheme.fold_dim, scheme.slice_size, block.oov);
        block.offset = m.cols;

        std::vector<CountVector> rows(m.rows);
        if (sliced) {
            std::vector<KeyMultiset> train;
            train.reserve(train_rows.size());
            for (std::size_t r : train_rows) {
                if (r >= m.rows) {
                    throw FeatureError("training row index out of range");
                }
                train.push_back(pick(r));
            }
            const auto vocab = fit_sortslice(train, scheme.slice_size, scheme.oov);
            // A vocabulary smaller than K still yields K (+1) columns.
            block.width = scheme.slice_size + (scheme.oov ? 1 : 0);
            for (std::size_t r = 0; r < m.rows; ++r) {
                CountVector v = transform_sortslice(pick(r), vocab);
                CountVector padded(block.width, 0);
                std::copy(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(vocab.slice_size()), padded.begin());
                if (scheme.oov) {
                    padded.back() = v.back();
                }
                rows[r] = std::move(padded);
            }
        } else {
            block.width = scheme.fold_dim;
            for (std::size_t r = 0; r < m.rows; ++r) {
                rows[r] = fold_counts(pick(r), scheme.fold_dim);
            }
        }
        m.cols += block.width;
        m.blocks.push_back(std::move(block));
        block_rows.push_back(std::move(rows));
    }

    m.values.reserve(m.rows * m.cols);
    for (std::size_t r = 0; r < m.rows; ++r) {
        for (const auto& rows : block_rows) {
            m.values.insert(m.values.end(), rows[r].begin(), rows[r].end());
        }
    }
    return m;
}

// ----------------------------------------------------------------------------
// Export
// ----------------------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'B', 'C', 'F', 'P', 'M', 'A', 'T', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
    char buf[sizeof(T)];
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        buf[i] = static_cast<char>(static_cast<std::uint64_t>(value) >> (8 * i) & 0xFF);
    }
    out.write(buf, sizeof(T));
}

template <typename T>
T get_le(std::istream& in) {
    unsigned char buf[sizeof(T)];
    if (!in.read(reinterpret_cast<char*>(buf), sizeof(T))) {
        throw FeatureError("truncated matrix file");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    }
    return static_cast<T>(v);
}

}  // namespace

void write_matrix_binary(std::ostream& out, const FeatureMatrix& m) {
    out.write(kMagic, sizeof(kMagic));
    put_le<std::uint64_t>(out, m.rows);
    put_le<std::uint64_t>(out, m.cols);
    for (std::uint32_t v : m.values) {
        put_le<std::uint32_t>(out, v);
    }
}

FeatureMatrix read_matrix_binary(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw FeatureError("not a BCFPMAT1 matrix");
    }
    FeatureMatrix m;
    m.rows = get_le<std::uint64_t>(in);
    m.cols = get_le<std::uint64_t>(in);
    if (m.cols != 0 && m.rows > (std::uint64_t{1} << 40) / m.cols) {
        throw FeatureError("matrix dimensions too large");
    }
    m.values.resize(m.rows * m.cols);
    for (auto& v : m.values) {
        v = get_le<std::uint32_t>(in);
    }
    return m;
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& m) {
    out << "label";
    for (const auto& b : m.blocks) {
        for (std::size_t i = 0; i < b.width; ++i) {
            out << ',' << b.name << ':' << i;
        }
    }
    out << '\n';
    for (std::size_t r = 0; r < m.rows; ++r) {
        out << (r < m.labels.size() ? m.labels[r] : 0);
        for (std::uint32_t v : m.row(r)) {
            out << ',' << v;
        }
        out << '\n';
    }
}

}  // namespace bcfp
