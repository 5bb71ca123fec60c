#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace bcfp {

enum class BondOrder : std::uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
    int element = 0;  // atomic number
    int formal_charge = 0;
    int explicit_h = 0;
    int implicit_h = 0;
    bool aromatic = false;
    bool in_ring = false;
    std::optional<int> isotope;
    int degree = 0;  // heavy neighbours
    bool bracket = false;

    [[nodiscard]] int total_h() const noexcept { return explicit_h + implicit_h; }
};

struct Bond {
    int begin = 0;
    int end = 0;
    BondOrder order = BondOrder::Single;
    bool in_ring = false;

    [[nodiscard]] int other(int atom) const noexcept { return atom == begin ? end : begin; }
};

/// Heavy-atom molecular graph with perception flags.
///
/// Atoms and bonds are stored by value; `adjacency[a]` lists the indices of
/// the bonds incident to atom `a`. The graph may have several components.
class Molecule {
public:
    Molecule() = default;

    /// Builds the adjacency lists and atom degrees from `atoms` and `bonds`.
    /// Throws std::invalid_argument on self-loops, repeated atom pairs or
    /// out-of-range endpoints.
    Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds, std::string source = {});

    [[nodiscard]] std::span<const Atom> atoms() const noexcept { return atoms_; }
    [[nodiscard]] std::span<const Bond> bonds() const noexcept { return bonds_; }
    [[nodiscard]] const Atom& atom(int i) const { return atoms_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] const Bond& bond(int i) const { return bonds_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] std::span<const int> incident_bonds(int atom) const {
        return adjacency_.at(static_cast<std::size_t>(atom));
    }
    [[nodiscard]] int num_atoms() const noexcept { return static_cast<int>(atoms_.size()); }
    [[nodiscard]] int num_bonds() const noexcept { return static_cast<int>(bonds_.size()); }
    [[nodiscard]] const std::string& source() const noexcept { return source_; }

    /// Index of the bond joining `a` and `b`, or -1.
    [[nodiscard]] int bond_between(int a, int b) const;

    /// Returns the same graph with old atom `i` moved to index
    /// `atom_position[i]`; the new bond list is `bond_sequence` (old bond
    /// indices in their new order). Perception flags travel with their
    /// atoms and bonds.
    [[nodiscard]] Molecule relabeled(std::span<const int> atom_position,
                                     std::span<const int> bond_sequence) const;

    /// Recomputes ring membership of every atom and bond (bridge finding).
    void perceive_rings();

    /// Marks six-membered C/N rings with alternating single/double bonds as
    /// aromatic, repeating until no further ring qualifies.
    /// Returns the number of rings converted.
    int normalize_aromaticity();

private:
    std::vector<Atom> atoms_;
    std::vector<Bond> bonds_;
    std::vector<std::vector<int>> adjacency_;
    std::string source_;
};

}  // namespace bcfp
