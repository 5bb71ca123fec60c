#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "bcfp/molecule.hpp"

namespace bcfp {

inline constexpr int kMaxRadius = 3;

/// 64-bit identifier of a circular substructure.
struct SubstructureKey {
    std::uint64_t value = 0;

    friend constexpr auto operator<=>(SubstructureKey, SubstructureKey) = default;
};

/// Sparse key -> occurrence count map for one molecule, kept sorted by key.
class KeyMultiset {
public:
    using Entry = std::pair<SubstructureKey, std::uint32_t>;

    KeyMultiset() = default;

    /// Counts each key in `keys` (any order, repeats allowed).
    static KeyMultiset from_keys(std::vector<SubstructureKey> keys);
    /// Entries must have positive counts; duplicates are merged.
    static KeyMultiset from_entries(std::vector<Entry> entries);

    [[nodiscard]] std::span<const Entry> entries() const noexcept { return entries_; }
    [[nodiscard]] std::size_t distinct() const noexcept { return entries_.size(); }
    [[nodiscard]] bool empty() const noexcept { return entries_.empty(); }
    [[nodiscard]] std::uint64_t total() const noexcept;
    [[nodiscard]] std::uint32_t count(SubstructureKey key) const noexcept;

    /// True when every count here is >= the matching count in `other`.
    [[nodiscard]] bool contains(const KeyMultiset& other) const noexcept;

    friend bool operator==(const KeyMultiset&, const KeyMultiset&) = default;

private:
    std::vector<Entry> entries_;
};

/// One circular environment retained after duplicate removal.
struct EnvironmentRecord {
    int center = 0;  // atom index (ECFP) or bond index (BCFP)
    int radius = 0;
    SubstructureKey key;
    std::vector<int> bond_set;  // sorted bond indices
};

[[nodiscard]] SubstructureKey atom_invariant(const Molecule& mol, int atom);
[[nodiscard]] SubstructureKey bond_invariant(const Molecule& mol, int bond);

/// Retained atom-centred environments for radii 0..radius, ordered by
/// (radius, center).
[[nodiscard]] std::vector<EnvironmentRecord> ecfp_environments(const Molecule& mol, int radius);
/// Retained bond-centred environments for radii 0..radius.
[[nodiscard]] std::vector<EnvironmentRecord> bcfp_environments(const Molecule& mol, int radius);

[[nodiscard]] KeyMultiset ecfp_keys(const Molecule& mol, int radius);
[[nodiscard]] KeyMultiset bcfp_keys(const Molecule& mol, int radius);

/// Cumulative multisets for every radius 0..max_radius in one pass;
/// element r equals ecfp_keys(mol, r).
[[nodiscard]] std::vector<KeyMultiset> ecfp_keys_by_radius(const Molecule& mol, int max_radius);
[[nodiscard]] std::vector<KeyMultiset> bcfp_keys_by_radius(const Molecule& mol, int max_radius);

/// One ECFP refinement step over all atoms: radius tag, own previous
/// identifier, and the sorted (bond order, neighbour identifier) pairs.
[[nodiscard]] std::vector<SubstructureKey> ecfp_refine(const Molecule& mol, int iteration,
                                                       std::span<const SubstructureKey> previous);

}  // namespace bcfp

template <>
struct std::hash<bcfp::SubstructureKey> {
    std::size_t operator()(bcfp::SubstructureKey k) const noexcept {
        return static_cast<std::size_t>(k.value);
    }
};
