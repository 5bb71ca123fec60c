#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "bcfp/molecule.hpp"

namespace bcfp {

enum class SmilesErrorKind {
    Empty,
    UnclosedRing,
    UnbalancedParenthesis,
    UnknownSymbol,
    ValenceError,
    InvalidAromatic,  // aromatic atom off every ring, or ':' between aliphatic atoms
    InvalidBond,      // ring closure onto itself or a repeated atom pair
};

[[nodiscard]] std::string_view to_string(SmilesErrorKind kind) noexcept;

class SmilesError : public std::runtime_error {
public:
    SmilesError(SmilesErrorKind kind, std::size_t position, const std::string& what);

    [[nodiscard]] SmilesErrorKind kind() const noexcept { return kind_; }
    /// Byte offset in the input where the problem was detected.
    [[nodiscard]] std::size_t position() const noexcept { return position_; }

private:
    SmilesErrorKind kind_;
    std::size_t position_;
};

struct ParseOptions {
    /// Collapse Kekulé six-rings of C/N onto the aromatic form.
    bool normalize_aromaticity = false;
};

/// Parses a SMILES string into a perceived heavy-atom graph.
///
/// Supports the organic subset, bracket atoms (isotope, symbol, chirality,
/// H count, charge, atom class), branches, ring closures (digits and %nn),
/// bond symbols `- = # : / \` and `.` disconnection. Chirality and
/// directional bonds are accepted and dropped. Plain `[H]` atoms bonded to
/// a heavy atom are folded into that atom's explicit hydrogen count.
///
/// Throws SmilesError.
[[nodiscard]] Molecule parse_smiles(std::string_view text, const ParseOptions& options = {});

/// Relabeling-invariant 64-bit digest of a perceived molecule.
[[nodiscard]] std::uint64_t canonical_hash(const Molecule& mol);

/// Atomic number for an element symbol (case-sensitive, e.g. "Cl"), or 0.
[[nodiscard]] int element_from_symbol(std::string_view symbol) noexcept;
[[nodiscard]] std::string_view element_symbol(int atomic_number) noexcept;

}  // namespace bcfp
