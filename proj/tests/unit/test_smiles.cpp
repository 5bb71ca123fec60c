#include <algorithm>
#include <functional>
#include <set>
#include <vector>

#include "bcfp/random.hpp"
#include "bcfp/smiles.hpp"
#include "doctest.h"
#include "random_molecules.hpp"

using namespace bcfp;

namespace {

std::vector<int> implicit_h(const Molecule& m) {
    std::vector<int> out;
    for (const auto& a : m.atoms()) {
        out.push_back(a.implicit_h);
    }
    return out;
}

SmilesErrorKind error_kind(std::string_view smi) {
    try {
        (void)parse_smiles(smi);
    } catch (const SmilesError& e) {
        return e.kind();
    }
    FAIL("expected a parse error for " << smi);
    return SmilesErrorKind::Empty;
}

// Brute-force oracle: every simple cycle by DFS, marking its atoms and bonds.
std::pair<std::vector<bool>, std::vector<bool>> cycle_members(const Molecule& m) {
    std::vector<bool> atoms(static_cast<std::size_t>(m.num_atoms()), false);
    std::vector<bool> bonds(static_cast<std::size_t>(m.num_bonds()), false);
    std::vector<int> path_atoms;
    std::vector<int> path_bonds;
    std::function<void(int, int)> dfs = [&](int start, int tip) {
        for (int b : m.incident_bonds(tip)) {
            if (!path_bonds.empty() && b == path_bonds.back()) {
                continue;
            }
            const int nb = m.bond(b).other(tip);
            if (nb == start && path_bonds.size() >= 2) {
                for (int a : path_atoms) atoms[static_cast<std::size_t>(a)] = true;
                for (int pb : path_bonds) bonds[static_cast<std::size_t>(pb)] = true;
                bonds[static_cast<std::size_t>(b)] = true;
                continue;
            }
            if (nb < start || std::find(path_atoms.begin(), path_atoms.end(), nb) != path_atoms.end()) {
                continue;
            }
            path_atoms.push_back(nb);
            path_bonds.push_back(b);
            dfs(start, nb);
            path_atoms.pop_back();
            path_bonds.pop_back();
        }
    };
    for (int s = 0; s < m.num_atoms(); ++s) {
        path_atoms = {s};
        path_bonds.clear();
        dfs(s, s);
    }
    return {atoms, bonds};
}

}  // namespace

TEST_CASE("ethanol") {
    const auto m = parse_smiles("CCO");
    CHECK(m.num_atoms() == 3);
    CHECK(m.num_bonds() == 2);
    for (const auto& b : m.bonds()) {
        CHECK(b.order == BondOrder::Single);
        CHECK_FALSE(b.in_ring);
    }
    CHECK(implicit_h(m) == std::vector<int>{3, 2, 1});
    CHECK(m.atom(1).degree == 2);
}

TEST_CASE("benzene") {
    const auto m = parse_smiles("c1ccccc1");
    CHECK(m.num_atoms() == 6);
    CHECK(m.num_bonds() == 6);
    for (const auto& a : m.atoms()) {
        CHECK(a.aromatic);
        CHECK(a.in_ring);
        CHECK(a.implicit_h == 1);
    }
    for (const auto& b : m.bonds()) {
        CHECK(b.order == BondOrder::Aromatic);
        CHECK(b.in_ring);
    }
}

TEST_CASE("pyrrole bracket hydrogen is explicit") {
    const auto m = parse_smiles("[nH]1cccc1");
    CHECK(m.num_atoms() == 5);
    CHECK(m.atom(0).element == 7);
    CHECK(m.atom(0).explicit_h == 1);
    CHECK(m.atom(0).implicit_h == 0);
    for (int i = 1; i < 5; ++i) {
        CHECK(m.atom(i).implicit_h == 1);
    }
}

TEST_CASE("aromatic hydrogen counts in fused and hetero rings") {
    const auto naph = parse_smiles("c1ccc2ccccc2c1");
    int fusion = 0;
    for (const auto& a : naph.atoms()) {
        if (a.degree == 3) {
            ++fusion;
            CHECK(a.implicit_h == 0);
        } else {
            CHECK(a.implicit_h == 1);
        }
    }
    CHECK(fusion == 2);
    CHECK(parse_smiles("n1ccccc1").atom(0).implicit_h == 0);
    CHECK(parse_smiles("o1cccc1").atom(0).implicit_h == 0);
    CHECK(parse_smiles("s1cccc1").atom(0).implicit_h == 0);
    CHECK(parse_smiles("Cn1cccc1").atom(1).implicit_h == 0);
    // Biphenyl: the unwritten bond between the rings is a single bond.
    const auto biphenyl = parse_smiles("c1ccccc1c1ccccc1");
    CHECK(biphenyl.bond(biphenyl.bond_between(5, 6)).order == BondOrder::Single);
    CHECK_FALSE(biphenyl.bond(biphenyl.bond_between(5, 6)).in_ring);
}

TEST_CASE("default valences") {
    CHECK(implicit_h(parse_smiles("C=O")) == std::vector<int>{2, 0});
    CHECK(implicit_h(parse_smiles("C#N")) == std::vector<int>{1, 0});
    CHECK(implicit_h(parse_smiles("CS(=O)(=O)C")) == std::vector<int>{3, 0, 0, 0, 3});
    CHECK(implicit_h(parse_smiles("CP(C)C")) == std::vector<int>{3, 0, 3, 3});
    CHECK(implicit_h(parse_smiles("O=P(O)(O)O")) == std::vector<int>{0, 0, 1, 1, 1});
    CHECK(implicit_h(parse_smiles("ClCBr")) == std::vector<int>{0, 2, 0});
    CHECK(implicit_h(parse_smiles("B")) == std::vector<int>{3});
}

TEST_CASE("bracket atoms") {
    const auto m = parse_smiles("[13CH3][C@@H](N)[O-]");
    CHECK(m.atom(0).isotope == 13);
    CHECK(m.atom(0).explicit_h == 3);
    CHECK(m.atom(0).implicit_h == 0);
    CHECK(m.atom(1).explicit_h == 1);
    CHECK(m.atom(3).formal_charge == -1);
    CHECK(parse_smiles("[NH4+]").atom(0).formal_charge == 1);
    CHECK(parse_smiles("[Fe++]").atom(0).formal_charge == 2);
    CHECK(parse_smiles("[Fe+3]").atom(0).formal_charge == 3);
    CHECK(parse_smiles("[Na+].[Cl-]").num_atoms() == 2);
    CHECK(parse_smiles("[CH3:7]C").atom(0).explicit_h == 3);
    CHECK(parse_smiles("[Se]").atom(0).element == 34);
    CHECK(parse_smiles("c1cc[se]c1").atom(3).element == 34);
    CHECK(parse_smiles("[C@TH1H](F)(Cl)Br").num_atoms() == 4);
}

TEST_CASE("explicit hydrogen atoms fold into their neighbour") {
    const auto m = parse_smiles("[H]C([H])([H])O");
    CHECK(m.num_atoms() == 2);
    CHECK(m.atom(0).total_h() == 3);
    CHECK(m.atom(1).total_h() == 1);
    // Isotopic hydrogen stays a graph atom.
    CHECK(parse_smiles("[2H]C").num_atoms() == 2);
}

TEST_CASE("ring closures, branches, stereo bonds and disconnection") {
    CHECK(parse_smiles("C1CC1").num_bonds() == 3);
    CHECK(parse_smiles("C%10CC%10").num_bonds() == 3);
    CHECK(parse_smiles("C=1CC1").bond(2).order == BondOrder::Double);
    CHECK(parse_smiles("C1CC=1").bond(2).order == BondOrder::Double);
    CHECK(parse_smiles("F/C=C/F").num_bonds() == 3);
    CHECK(parse_smiles("CC(C)(C)C").atom(1).degree == 4);
    const auto salt = parse_smiles("CC(=O)[O-].[Na+]");
    CHECK(salt.num_atoms() == 5);
    CHECK(salt.atom(4).degree == 0);
    CHECK(parse_smiles("  CCO  ").num_atoms() == 3);
    CHECK(parse_smiles("CCO ethanol").num_atoms() == 3);
}

TEST_CASE("errors") {
    CHECK(error_kind("C1CC") == SmilesErrorKind::UnclosedRing);
    CHECK(error_kind("CC(C") == SmilesErrorKind::UnbalancedParenthesis);
    CHECK(error_kind("CC)C") == SmilesErrorKind::UnbalancedParenthesis);
    CHECK(error_kind("CXC") == SmilesErrorKind::UnknownSymbol);
    CHECK(error_kind("C*C") == SmilesErrorKind::UnknownSymbol);
    CHECK(error_kind("[Xx]") == SmilesErrorKind::UnknownSymbol);
    CHECK(error_kind("C$C") == SmilesErrorKind::UnknownSymbol);
    CHECK(error_kind("CN(=O)=O") == SmilesErrorKind::ValenceError);
    CHECK(error_kind("CC(C)(C)(C)C") == SmilesErrorKind::ValenceError);
    CHECK(error_kind("FF=C") == SmilesErrorKind::ValenceError);
    CHECK(error_kind("cc") == SmilesErrorKind::InvalidAromatic);
    CHECK(error_kind("C:C") == SmilesErrorKind::InvalidAromatic);
    CHECK(error_kind("C11") == SmilesErrorKind::InvalidBond);
    CHECK(error_kind("C12CC12") == SmilesErrorKind::InvalidBond);
    CHECK(error_kind("CC=") == SmilesErrorKind::InvalidBond);
    CHECK(error_kind("") == SmilesErrorKind::Empty);
    CHECK(error_kind("   ") == SmilesErrorKind::Empty);
    // Charged nitro and N-oxide are fine.
    CHECK_NOTHROW((void)parse_smiles("C[N+](=O)[O-]"));
    CHECK_NOTHROW((void)parse_smiles("[O-][n+]1ccccc1"));
}

TEST_CASE("aromaticity normalization collapses Kekule benzene") {
    ParseOptions opts;
    opts.normalize_aromaticity = true;
    const auto kek = parse_smiles("C1=CC=CC=C1", opts);
    for (const auto& a : kek.atoms()) {
        CHECK(a.aromatic);
        CHECK(a.implicit_h == 1);
    }
    CHECK(canonical_hash(kek) == canonical_hash(parse_smiles("c1ccccc1")));
    CHECK(canonical_hash(parse_smiles("C1=CC=CC=C1")) != canonical_hash(parse_smiles("c1ccccc1")));
    // Both Kekule forms of naphthalene, and toluene.
    CHECK(canonical_hash(parse_smiles("C1=CC=C2C=CC=CC2=C1", opts)) ==
          canonical_hash(parse_smiles("c1ccc2ccccc2c1")));
    CHECK(canonical_hash(parse_smiles("C1=CC2=CC=CC=C2C=C1", opts)) ==
          canonical_hash(parse_smiles("c1ccc2ccccc2c1")));
    CHECK(canonical_hash(parse_smiles("CC1=CC=CC=C1", opts)) == canonical_hash(parse_smiles("Cc1ccccc1")));
    CHECK(canonical_hash(parse_smiles("C1=CC=NC=C1", opts)) == canonical_hash(parse_smiles("c1ccncc1")));
    // Cyclohexene and quinone stay aliphatic.
    CHECK_FALSE(parse_smiles("C1=CCCCC1", opts).atom(0).aromatic);
    CHECK_FALSE(parse_smiles("O=C1C=CC(=O)C=C1", opts).atom(1).aromatic);
}

TEST_CASE("canonical hash") {
    CHECK(canonical_hash(parse_smiles("CCO")) == canonical_hash(parse_smiles("OCC")));
    CHECK(canonical_hash(parse_smiles("CCO")) != canonical_hash(parse_smiles("CCN")));
    CHECK(canonical_hash(parse_smiles("C1CC1")) == canonical_hash(parse_smiles("C1CC1")));
    CHECK(canonical_hash(parse_smiles("OC(=O)c1ccccc1")) == canonical_hash(parse_smiles("c1ccc(cc1)C(O)=O")));
    CHECK(canonical_hash(parse_smiles("CC")) != canonical_hash(parse_smiles("C.C")));
    CHECK(canonical_hash(parse_smiles("CCCC")) != canonical_hash(parse_smiles("CC(C)C")));
}

TEST_CASE("property: canonical hash is invariant under relabeling") {
    Pcg32 rng(7, 1);
    const auto mols = testing::random_molecules(11, 200);
    REQUIRE(mols.size() == 200);
    for (const auto& m : mols) {
        const auto h = canonical_hash(m);
        for (int p = 0; p < 3; ++p) {
            CHECK(canonical_hash(testing::permute(m, rng)) == h);
        }
    }
}

TEST_CASE("property: ring flags match brute-force cycle enumeration") {
    const auto mols = testing::random_molecules(23, 400, 2, 12);
    int checked = 0;
    for (const auto& m : mols) {
        if (m.num_atoms() > 12) {
            continue;
        }
        ++checked;
        const auto [atoms, bonds] = cycle_members(m);
        for (int a = 0; a < m.num_atoms(); ++a) {
            CHECK(m.atom(a).in_ring == atoms[static_cast<std::size_t>(a)]);
        }
        for (int b = 0; b < m.num_bonds(); ++b) {
            CHECK(m.bond(b).in_ring == bonds[static_cast<std::size_t>(b)]);
        }
    }
    CHECK(checked > 100);
}

TEST_CASE("property: graph invariants of parsed molecules") {
    std::vector<std::string> smiles;
    const auto mols = testing::random_molecules(5, 300, 2, 24, &smiles);
    for (const auto& m : mols) {
        for (int a = 0; a < m.num_atoms(); ++a) {
            const Atom& atom = m.atom(a);
            CHECK(atom.degree == static_cast<int>(m.incident_bonds(a).size()));
            CHECK(atom.implicit_h >= 0);
            if (atom.bracket) {
                CHECK(atom.implicit_h == 0);
            }
            if (atom.aromatic) {
                CHECK(atom.in_ring);
            }
            if (!atom.bracket) {
                // Aromatic bonds count one unit plus one for the pi system.
                int sum = 0;
                for (int b : m.incident_bonds(a)) {
                    const auto order = m.bond(b).order;
                    sum += order == BondOrder::Aromatic ? 1 : static_cast<int>(order);
                }
                const int used = sum + atom.total_h() + (atom.aromatic && atom.implicit_h > 0 ? 1 : 0);
                const int max_valence = atom.element == 16 ? 6 : atom.element == 15 ? 5
                                        : atom.element == 6 ? 4 : atom.element == 7 ? 3
                                        : atom.element == 8 ? 2 : 1;
                CHECK(used <= max_valence);
            }
        }
        for (int b = 0; b < m.num_bonds(); ++b) {
            const Bond& bond = m.bond(b);
            CHECK(bond.begin != bond.end);
            const auto& inc_a = m.incident_bonds(bond.begin);
            const auto& inc_b = m.incident_bonds(bond.end);
            CHECK(std::count(inc_a.begin(), inc_a.end(), b) == 1);
            CHECK(std::count(inc_b.begin(), inc_b.end(), b) == 1);
            if (bond.order == BondOrder::Aromatic) {
                CHECK(m.atom(bond.begin).aromatic);
                CHECK(m.atom(bond.end).aromatic);
            }
        }
    }
}
