#include "bcfp/molecule.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <utility>

namespace bcfp {

Molecule::Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), adjacency_(atoms_.size()),
      source_(std::move(source)) {
    const int n = num_atoms();
    for (int b = 0; b < num_bonds(); ++b) {
        const Bond& bond = bonds_[static_cast<std::size_t>(b)];
        if (bond.begin < 0 || bond.begin >= n || bond.end < 0 || bond.end >= n) {
            throw std::invalid_argument("bond endpoint out of range");
        }
        if (bond.begin == bond.end) {
            throw std::invalid_argument("bond joins an atom to itself");
        }
        if (bond_between(bond.begin, bond.end) >= 0) {
            throw std::invalid_argument("more than one bond between the same atom pair");
        }
        adjacency_[static_cast<std::size_t>(bond.begin)].push_back(b);
        adjacency_[static_cast<std::size_t>(bond.end)].push_back(b);
    }
    for (int a = 0; a < n; ++a) {
        atoms_[static_cast<std::size_t>(a)].degree =
            static_cast<int>(adjacency_[static_cast<std::size_t>(a)].size());
    }
}

int Molecule::bond_between(int a, int b) const {
    for (int idx : adjacency_.at(static_cast<std::size_t>(a))) {
        if (bonds_[static_cast<std::size_t>(idx)].other(a) == b) {
            return idx;
        }
    }
    return -1;
}

Molecule Molecule::relabeled(std::span<const int> atom_position,
                             std::span<const int> bond_sequence) const {
    if (atom_position.size() != atoms_.size() || bond_sequence.size() != bonds_.size()) {
        throw std::invalid_argument("relabeling size mismatch");
    }
    std::vector<Atom> atoms(atoms_.size());
    std::vector<bool> seen(atoms_.size(), false);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const auto pos = static_cast<std::size_t>(atom_position[i]);
        if (pos >= atoms_.size() || seen[pos]) {
            throw std::invalid_argument("atom relabeling is not a permutation");
        }
        seen[pos] = true;
        atoms[pos] = atoms_[i];
    }
    std::vector<Bond> bonds;
    bonds.reserve(bonds_.size());
    std::vector<bool> used(bonds_.size(), false);
    for (int old : bond_sequence) {
        const auto idx = static_cast<std::size_t>(old);
        if (idx >= bonds_.size() || used[idx]) {
            throw std::invalid_argument("bond sequence is not a permutation");
        }
        used[idx] = true;
        Bond b = bonds_[idx];
        b.begin = atom_position[static_cast<std::size_t>(b.begin)];
        b.end = atom_position[static_cast<std::size_t>(b.end)];
        bonds.push_back(b);
    }
    return Molecule(std::move(atoms), std::move(bonds), source_);
}

void Molecule::perceive_rings() {
    // A bond lies on a cycle iff it is not a bridge.
    const int n = num_atoms();
    std::vector<int> disc(static_cast<std::size_t>(n), -1);
    std::vector<int> low(static_cast<std::size_t>(n), 0);
    std::vector<bool> bridge(bonds_.size(), false);
    int timer = 0;

    struct Frame {
        int atom;
        int parent_bond;
        std::size_t next;
    };
    std::vector<Frame> stack;
    for (int root = 0; root < n; ++root) {
        if (disc[static_cast<std::size_t>(root)] >= 0) {
            continue;
        }
        disc[static_cast<std::size_t>(root)] = low[static_cast<std::size_t>(root)] = timer++;
        stack.push_back({root, -1, 0});
        while (!stack.empty()) {
            Frame& f = stack.back();
            const auto& inc = adjacency_[static_cast<std::size_t>(f.atom)];
            if (f.next < inc.size()) {
                const int b = inc[f.next++];
                if (b == f.parent_bond) {
                    continue;
                }
                const int nb = bonds_[static_cast<std::size_t>(b)].other(f.atom);
                if (disc[static_cast<std::size_t>(nb)] < 0) {
                    disc[static_cast<std::size_t>(nb)] = low[static_cast<std::size_t>(nb)] = timer++;
                    stack.push_back({nb, b, 0});
                } else {
                    low[static_cast<std::size_t>(f.atom)] =
                        std::min(low[static_cast<std::size_t>(f.atom)], disc[static_cast<std::size_t>(nb)]);
                }
            } else {
                const Frame done = f;
                stack.pop_back();
                if (!stack.empty()) {
                    const int parent = stack.back().atom;
                    low[static_cast<std::size_t>(parent)] =
                        std::min(low[static_cast<std::size_t>(parent)], low[static_cast<std::size_t>(done.atom)]);
                    if (low[static_cast<std::size_t>(done.atom)] > disc[static_cast<std::size_t>(parent)]) {
                        bridge[static_cast<std::size_t>(done.parent_bond)] = true;
                    }
                }
            }
        }
    }

    for (auto& a : atoms_) {
        a.in_ring = false;
    }
    for (std::size_t b = 0; b < bonds_.size(); ++b) {
        bonds_[b].in_ring = !bridge[b];
        if (bonds_[b].in_ring) {
            atoms_[static_cast<std::size_t>(bonds_[b].begin)].in_ring = true;
            atoms_[static_cast<std::size_t>(bonds_[b].end)].in_ring = true;
        }
    }
}

namespace {

bool carbon_or_nitrogen(const Atom& a) { return a.element == 6 || a.element == 7; }

// Every simple six-membered cycle, as its six bonds in ring order.
std::vector<std::array<int, 6>> six_rings(const Molecule& mol) {
    std::vector<std::array<int, 6>> rings;
    std::array<int, 6> path_atoms{};
    std::array<int, 6> path_bonds{};

    auto usable = [&](int b) {
        const Bond& bond = mol.bond(b);
        return bond.in_ring && carbon_or_nitrogen(mol.atom(bond.begin)) &&
               carbon_or_nitrogen(mol.atom(bond.end));
    };

    auto extend = [&](auto&& self, int depth) -> void {
        const int tip = path_atoms[static_cast<std::size_t>(depth - 1)];
        for (int b : mol.incident_bonds(tip)) {
            if (!usable(b)) {
                continue;
            }
            const int nb = mol.bond(b).other(tip);
            if (depth == 6) {
                // Close back to the start; the start is the smallest atom and
                // the second atom is smaller than the last so each ring is
                // reported once.
                if (nb == path_atoms[0] && path_atoms[1] < path_atoms[5]) {
                    path_bonds[5] = b;
                    rings.push_back(path_bonds);
                }
                continue;
            }
            if (nb <= path_atoms[0]) {
                continue;
            }
            if (std::find(path_atoms.begin(), path_atoms.begin() + depth, nb) !=
                path_atoms.begin() + depth) {
                continue;
            }
            path_atoms[static_cast<std::size_t>(depth)] = nb;
            path_bonds[static_cast<std::size_t>(depth - 1)] = b;
            self(self, depth + 1);
        }
    };

    for (int start = 0; start < mol.num_atoms(); ++start) {
        if (!mol.atom(start).in_ring || !carbon_or_nitrogen(mol.atom(start))) {
            continue;
        }
        path_atoms[0] = start;
        extend(extend, 1);
    }
    return rings;
}

}  // namespace

int Molecule::normalize_aromaticity() {
    const auto rings = six_rings(*this);
    std::vector<bool> converted(rings.size(), false);
    int total = 0;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r = 0; r < rings.size(); ++r) {
            if (converted[r]) {
                continue;
            }
            const auto& ring = rings[r];
            bool all_aromatic = true;
            for (int b : ring) {
                all_aromatic = all_aromatic && bonds_[static_cast<std::size_t>(b)].order == BondOrder::Aromatic;
            }
            if (all_aromatic) {
                converted[r] = true;
                continue;
            }
            // Aromatic bonds already assigned act as wildcards.
            bool fits = false;
            for (int phase = 0; phase < 2 && !fits; ++phase) {
                fits = true;
                for (std::size_t i = 0; i < 6 && fits; ++i) {
                    const BondOrder order = bonds_[static_cast<std::size_t>(ring[i])].order;
                    const BondOrder want = (static_cast<int>(i) % 2 == phase) ? BondOrder::Double : BondOrder::Single;
                    fits = order == BondOrder::Aromatic || order == want;
                }
            }
            if (!fits) {
                continue;
            }
            for (int b : ring) {
                Bond& bond = bonds_[static_cast<std::size_t>(b)];
                bond.order = BondOrder::Aromatic;
                atoms_[static_cast<std::size_t>(bond.begin)].aromatic = true;
                atoms_[static_cast<std::size_t>(bond.end)].aromatic = true;
            }
            converted[r] = true;
            changed = true;
            ++total;
        }
    }
    return total;
}

}  // namespace bcfp
