#include "bcfp/fingerprint.hpp"

#include <algorithm>
#include <stdexcept>
#include <tuple>

#include "bcfp/hash.hpp"

namespace bcfp {

// ----------------------------------------------------------------------------
// KeyMultiset
// ----------------------------------------------------------------------------

KeyMultiset KeyMultiset::from_keys(std::vector<SubstructureKey> keys) {
    std::sort(keys.begin(), keys.end());
    KeyMultiset out;
    for (std::size_t i = 0; i < keys.size();) {
        std::size_t j = i;
        while (j < keys.size() && keys[j] == keys[i]) {
            ++j;
        }
        out.entries_.emplace_back(keys[i], static_cast<std::uint32_t>(j - i));
        i = j;
    }
    return out;
}

KeyMultiset KeyMultiset::from_entries(std::vector<Entry> entries) {
    std::sort(entries.begin(), entries.end());
    KeyMultiset out;
    for (const auto& [key, count] : entries) {
        if (count == 0) {
            throw std::invalid_argument("KeyMultiset counts must be positive");
        }
        if (!out.entries_.empty() && out.entries_.back().first == key) {
            out.entries_.back().second += count;
        } else {
            out.entries_.emplace_back(key, count);
        }
    }
    return out;
}

std::uint64_t KeyMultiset::total() const noexcept {
    std::uint64_t sum = 0;
    for (const auto& e : entries_) {
        sum += e.second;
    }
    return sum;
}

std::uint32_t KeyMultiset::count(SubstructureKey key) const noexcept {
    const auto it = std::lower_bound(entries_.begin(), entries_.end(), key,
                                     [](const Entry& e, SubstructureKey k) { return e.first < k; });
    return (it != entries_.end() && it->first == key) ? it->second : 0;
}

bool KeyMultiset::contains(const KeyMultiset& other) const noexcept {
    for (const auto& [key, c] : other.entries_) {
        if (count(key) < c) {
            return false;
        }
    }
    return true;
}

// ----------------------------------------------------------------------------
// Invariants
// ----------------------------------------------------------------------------

namespace {

namespace tag {
constexpr std::uint8_t kElement = 'Z';
constexpr std::uint8_t kDegree = 'D';
constexpr std::uint8_t kCharge = 'Q';
constexpr std::uint8_t kHydrogens = 'H';
constexpr std::uint8_t kRing = 'R';
constexpr std::uint8_t kAromatic = 'A';
constexpr std::uint8_t kOrder = 'O';
constexpr std::uint8_t kLowEnd = 'L';
constexpr std::uint8_t kHighEnd = 'U';
constexpr std::uint8_t kIteration = 'K';
constexpr std::uint8_t kPrevious = 'P';
constexpr std::uint8_t kNeighborBond = 'B';
constexpr std::uint8_t kNeighbor = 'N';
}  // namespace tag

std::uint64_t order_category(BondOrder order) { return static_cast<std::uint64_t>(order); }

// Fixed-size bond bitset for environment coverage.
class BondSet {
public:
    explicit BondSet(std::size_t n_bonds = 0) : words_((n_bonds + 63) / 64, 0) {}

    void set(int b) { words_[static_cast<std::size_t>(b) / 64] |= std::uint64_t{1} << (b % 64); }
    BondSet& operator|=(const BondSet& o) {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            words_[i] |= o.words_[i];
        }
        return *this;
    }
    [[nodiscard]] bool none() const {
        return std::all_of(words_.begin(), words_.end(), [](std::uint64_t w) { return w == 0; });
    }
    [[nodiscard]] std::vector<int> indices() const {
        std::vector<int> out;
        for (std::size_t w = 0; w < words_.size(); ++w) {
            for (int bit = 0; bit < 64; ++bit) {
                if (words_[w] >> bit & 1U) {
                    out.push_back(static_cast<int>(w * 64 + static_cast<std::size_t>(bit)));
                }
            }
        }
        return out;
    }
    friend auto operator<=>(const BondSet&, const BondSet&) = default;

private:
    std::vector<std::uint64_t> words_;
};

struct Candidate {
    BondSet bonds;
    SubstructureKey key;
    int center;
};

// Keeps one environment per distinct bond set; among equal bond sets the
// smallest key wins, so the result does not depend on atom numbering.
std::vector<const Candidate*> dedup(const std::vector<Candidate>& candidates) {
    std::vector<const Candidate*> order;
    order.reserve(candidates.size());
    for (const auto& c : candidates) {
        if (!c.bonds.none()) {
            order.push_back(&c);
        }
    }
    std::sort(order.begin(), order.end(), [](const Candidate* a, const Candidate* b) {
        return std::tie(a->bonds, a->key, a->center) < std::tie(b->bonds, b->key, b->center);
    });
    std::vector<const Candidate*> kept;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i == 0 || order[i]->bonds != order[i - 1]->bonds) {
            kept.push_back(order[i]);
        }
    }
    std::sort(kept.begin(), kept.end(), [](const Candidate* a, const Candidate* b) { return a->center < b->center; });
    return kept;
}

void check_radius(int radius) {
    if (radius < 0 || radius > kMaxRadius) {
        throw std::invalid_argument("radius must be in 0..3");
    }
}

}  // namespace

SubstructureKey atom_invariant(const Molecule& mol, int atom) {
    const Atom& a = mol.atom(atom);
    TupleHasher h;
    h.field(tag::kElement, a.element)
        .field(tag::kDegree, a.degree)
        .field(tag::kCharge, a.formal_charge)
        .field(tag::kHydrogens, a.total_h())
        .field(tag::kRing, a.in_ring)
        .field(tag::kAromatic, a.aromatic);
    return {h.digest()};
}

SubstructureKey bond_invariant(const Molecule& mol, int bond) {
    const Bond& b = mol.bond(bond);
    auto lo = atom_invariant(mol, b.begin);
    auto hi = atom_invariant(mol, b.end);
    if (hi < lo) {
        std::swap(lo, hi);
    }
    TupleHasher h;
    h.field(tag::kOrder, order_category(b.order))
        .field(tag::kRing, b.in_ring)
        .field(tag::kLowEnd, lo.value)
        .field(tag::kHighEnd, hi.value);
    return {h.digest()};
}

std::vector<SubstructureKey> ecfp_refine(const Molecule& mol, int iteration,
                                         std::span<const SubstructureKey> previous) {
    std::vector<SubstructureKey> next(previous.size());
    std::vector<std::pair<std::uint64_t, SubstructureKey>> neighbors;
    for (int a = 0; a < mol.num_atoms(); ++a) {
        neighbors.clear();
        for (int b : mol.incident_bonds(a)) {
            const Bond& bond = mol.bond(b);
            neighbors.emplace_back(order_category(bond.order), previous[static_cast<std::size_t>(bond.other(a))]);
        }
        std::sort(neighbors.begin(), neighbors.end());
        TupleHasher h;
        h.field(tag::kIteration, iteration).field(tag::kPrevious, previous[static_cast<std::size_t>(a)].value);
        for (const auto& [order, key] : neighbors) {
            h.field(tag::kNeighborBond, order).field(tag::kNeighbor, key.value);
        }
        next[static_cast<std::size_t>(a)] = {h.digest()};
    }
    return next;
}

std::vector<EnvironmentRecord> ecfp_environments(const Molecule& mol, int radius) {
    check_radius(radius);
    const auto n_atoms = static_cast<std::size_t>(mol.num_atoms());
    const auto n_bonds = static_cast<std::size_t>(mol.num_bonds());

    std::vector<EnvironmentRecord> records;
    std::vector<SubstructureKey> keys(n_atoms);
    std::vector<BondSet> cover(n_atoms, BondSet(n_bonds));
    for (int a = 0; a < mol.num_atoms(); ++a) {
        keys[static_cast<std::size_t>(a)] = atom_invariant(mol, a);
        records.push_back({a, 0, keys[static_cast<std::size_t>(a)], {}});
    }

    for (int k = 1; k <= radius; ++k) {
        auto next_keys = ecfp_refine(mol, k, keys);
        std::vector<Candidate> candidates;
        candidates.reserve(n_atoms);
        for (int a = 0; a < mol.num_atoms(); ++a) {
            BondSet bonds(n_bonds);
            for (int b : mol.incident_bonds(a)) {
                bonds.set(b);
                bonds |= cover[static_cast<std::size_t>(mol.bond(b).other(a))];
            }
            candidates.push_back({std::move(bonds), next_keys[static_cast<std::size_t>(a)], a});
        }
        for (const Candidate* c : dedup(candidates)) {
            records.push_back({c->center, k, c->key, c->bonds.indices()});
        }
        for (std::size_t a = 0; a < n_atoms; ++a) {
            cover[a] = std::move(candidates[a].bonds);
        }
        keys = std::move(next_keys);
    }
    return records;
}

std::vector<EnvironmentRecord> bcfp_environments(const Molecule& mol, int radius) {
    check_radius(radius);
    const auto n_bonds = static_cast<std::size_t>(mol.num_bonds());

    // Line-graph neighbours: bonds sharing one endpoint.
    std::vector<std::vector<int>> neighbors(n_bonds);
    for (int b = 0; b < mol.num_bonds(); ++b) {
        const Bond& bond = mol.bond(b);
        for (int end : {bond.begin, bond.end}) {
            for (int other : mol.incident_bonds(end)) {
                if (other != b) {
                    neighbors[static_cast<std::size_t>(b)].push_back(other);
                }
            }
        }
    }

    std::vector<EnvironmentRecord> records;
    std::vector<SubstructureKey> keys(n_bonds);
    std::vector<BondSet> cover(n_bonds, BondSet(n_bonds));
    for (int b = 0; b < mol.num_bonds(); ++b) {
        keys[static_cast<std::size_t>(b)] = bond_invariant(mol, b);
        cover[static_cast<std::size_t>(b)].set(b);
        records.push_back({b, 0, keys[static_cast<std::size_t>(b)], {b}});
    }

    std::vector<SubstructureKey> neighbor_keys;
    for (int k = 1; k <= radius; ++k) {
        std::vector<SubstructureKey> next_keys(n_bonds);
        std::vector<Candidate> candidates;
        candidates.reserve(n_bonds);
        for (std::size_t b = 0; b < n_bonds; ++b) {
            neighbor_keys.clear();
            BondSet bonds = cover[b];
            for (int nb : neighbors[b]) {
                neighbor_keys.push_back(keys[static_cast<std::size_t>(nb)]);
                bonds |= cover[static_cast<std::size_t>(nb)];
            }
            std::sort(neighbor_keys.begin(), neighbor_keys.end());
            TupleHasher h;
            h.field(tag::kIteration, k).field(tag::kPrevious, keys[b].value);
            for (SubstructureKey nk : neighbor_keys) {
                h.field(tag::kNeighbor, nk.value);
            }
            next_keys[b] = {h.digest()};
            candidates.push_back({std::move(bonds), next_keys[b], static_cast<int>(b)});
        }
        for (const Candidate* c : dedup(candidates)) {
            records.push_back({c->center, k, c->key, c->bonds.indices()});
        }
        for (std::size_t b = 0; b < n_bonds; ++b) {
            cover[b] = std::move(candidates[b].bonds);
        }
        keys = std::move(next_keys);
    }
    return records;
}

namespace {

std::vector<KeyMultiset> cumulative(const std::vector<EnvironmentRecord>& records, int max_radius) {
    std::vector<KeyMultiset> out;
    std::vector<SubstructureKey> keys;
    std::size_t i = 0;
    for (int r = 0; r <= max_radius; ++r) {
        while (i < records.size() && records[i].radius == r) {
            keys.push_back(records[i].key);
            ++i;
        }
        out.push_back(KeyMultiset::from_keys(keys));
    }
    return out;
}

}  // namespace

KeyMultiset ecfp_keys(const Molecule& mol, int radius) {
    return cumulative(ecfp_environments(mol, radius), radius).back();
}

KeyMultiset bcfp_keys(const Molecule& mol, int radius) {
    return cumulative(bcfp_environments(mol, radius), radius).back();
}

std::vector<KeyMultiset> ecfp_keys_by_radius(const Molecule& mol, int max_radius) {
    return cumulative(ecfp_environments(mol, max_radius), max_radius);
}

std::vector<KeyMultiset> bcfp_keys_by_radius(const Molecule& mol, int max_radius) {
    return cumulative(bcfp_environments(mol, max_radius), max_radius);
}

}  // namespace bcfp
