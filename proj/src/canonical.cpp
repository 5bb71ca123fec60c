#include <algorithm>
#include <vector>

#include "bcfp/fingerprint.hpp"
#include "bcfp/hash.hpp"
#include "bcfp/smiles.hpp"

namespace bcfp {

namespace {

std::size_t distinct_count(std::vector<SubstructureKey> ids) {
    std::sort(ids.begin(), ids.end());
    return static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
}

}  // namespace

std::uint64_t canonical_hash(const Molecule& mol) {
    std::vector<SubstructureKey> ids(static_cast<std::size_t>(mol.num_atoms()));
    for (int a = 0; a < mol.num_atoms(); ++a) {
        ids[static_cast<std::size_t>(a)] = atom_invariant(mol, a);
    }
    std::size_t classes = distinct_count(ids);
    for (int k = 1; k <= mol.num_atoms(); ++k) {
        auto next = ecfp_refine(mol, k, ids);
        const std::size_t next_classes = distinct_count(next);
        ids = std::move(next);
        if (next_classes == classes) {
            break;
        }
        classes = next_classes;
    }
    std::sort(ids.begin(), ids.end());

    TupleHasher h;
    h.field('a', mol.num_atoms()).field('b', mol.num_bonds());
    for (SubstructureKey id : ids) {
        h.field('i', id.value);
    }
    return h.digest();
}

}  // namespace bcfp
