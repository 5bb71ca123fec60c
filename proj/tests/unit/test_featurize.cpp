#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "bcfp/featurize.hpp"
#include "bcfp/smiles.hpp"
#include "doctest.h"
#include "random_molecules.hpp"

using namespace bcfp;

namespace {

std::uint64_t sum(std::span<const std::uint32_t> v) {
    return std::accumulate(v.begin(), v.end(), std::uint64_t{0});
}

std::vector<MoleculeKeys> keys_of(const std::vector<Molecule>& mols) {
    return compute_keys(mols, 2);
}

std::vector<std::size_t> iota(std::size_t n) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
}

const SubstructureKey ka{10}, kb{20}, kc{30}, kz{99};

}  // namespace

TEST_CASE("fold_counts") {
    const auto v = fold_counts(KeyMultiset::from_entries({{ka, 2}, {kb, 1}}), 8);
    CHECK(v.size() == 8);
    CHECK(sum(v) == 3);
    CHECK(sum(fold_counts(KeyMultiset{}, 2048)) == 0);
    CHECK(fold_counts(KeyMultiset{}, 2048).size() == 2048);
    // 10 and 20 collide mod 10.
    const auto c = fold_counts(KeyMultiset::from_entries({{ka, 2}, {kb, 5}}), 10);
    CHECK(c[0] == 7);
    CHECK_THROWS_AS((void)fold_counts(KeyMultiset{}, 0), FeatureError);
}

TEST_CASE("sort and slice vocabulary") {
    const std::vector<KeyMultiset> train{
        KeyMultiset::from_entries({{ka, 5}}),
        KeyMultiset::from_entries({{ka, 1}, {kb, 1}}),
        KeyMultiset::from_entries({{kb, 2}, {kc, 1}}),
    };
    const auto vocab = fit_sortslice(train, 2, false);
    REQUIRE(vocab.slice_size() == 2);
    CHECK(vocab.retained()[0] == ka);
    CHECK(vocab.retained()[1] == kb);
    CHECK(vocab.frequency()[0] == 2);
    CHECK(vocab.frequency()[1] == 2);
    CHECK_FALSE(vocab.index_of(kc).has_value());

    // Presence, not summed counts: ka has total 6 but c appears once.
    const auto all = fit_sortslice(train, 100, false);
    CHECK(all.slice_size() == 3);
    CHECK(all.retained()[2] == kc);
    const auto again = fit_sortslice(train, 100, false);
    CHECK(std::equal(all.retained().begin(), all.retained().end(), again.retained().begin(), again.retained().end()));

    const auto mol = KeyMultiset::from_entries({{ka, 3}, {kz, 4}});
    CHECK(transform_sortslice(mol, fit_sortslice(train, 2, true)) == CountVector{3, 0, 4});
    CHECK(transform_sortslice(mol, vocab) == CountVector{3, 0});

    CHECK_THROWS_AS((void)fit_sortslice({}, 2, false), FeatureError);
    CHECK_THROWS_AS((void)fit_sortslice(train, 0, false), FeatureError);
}

TEST_CASE("scheme identifiers round trip") {
    for (auto kind : {FingerprintKind::Ecfp, FingerprintKind::Bcfp, FingerprintKind::Concat, FingerprintKind::Hybrid}) {
        for (auto pooling : {Pooling::Folded, Pooling::SortSlice}) {
            for (int r = 0; r <= 3; ++r) {
                for (bool oov : {false, true}) {
                    if (oov && pooling == Pooling::Folded) {
                        continue;
                    }
                    FeatureScheme s{kind, pooling, r, 512, 256, oov};
                    const auto parsed = parse_scheme_id(s.id());
                    REQUIRE(parsed.has_value());
                    CHECK(parsed->id() == s.id());
                }
            }
        }
    }
    CHECK(FeatureScheme{FingerprintKind::Hybrid, Pooling::Folded, 1, 2048, 1024, false}.id() == "hybrid_r1_fold2048");
    CHECK(FeatureScheme{FingerprintKind::Concat, Pooling::SortSlice, 2, 2048, 1024, true}.id() ==
          "concat_r2_ss1024_oov");
    CHECK_FALSE(parse_scheme_id("ecfp_r9_fold2048").has_value());
    CHECK_FALSE(parse_scheme_id("nonsense").has_value());
}

TEST_CASE("feature matrix shapes") {
    const auto mols = testing::random_molecules(3, 40);
    const auto keys = keys_of(mols);
    std::vector<int> labels(mols.size());
    for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 2);
    const auto train = iota(30);

    const auto concat = build_features(keys, labels, {FingerprintKind::Concat, Pooling::Folded, 1, 2048, 1024, false}, train);
    CHECK(concat.cols == 4096);
    CHECK(concat.rows == mols.size());
    CHECK(concat.values.size() == concat.rows * concat.cols);
    CHECK(concat.blocks.size() == 2);
    CHECK(concat.vocabulary_fit_rows.empty());

    const auto ss = build_features(keys, labels, {FingerprintKind::Concat, Pooling::SortSlice, 1, 2048, 1024, true}, train);
    CHECK(ss.cols == 2 * 1025);

    for (auto pooling : {Pooling::Folded, Pooling::SortSlice}) {
        const auto h0 = build_features(keys, labels, {FingerprintKind::Hybrid, pooling, 0, 256, 64, true}, train);
        const auto c0 = build_features(keys, labels, {FingerprintKind::Concat, pooling, 0, 256, 64, true}, train);
        CHECK(h0.values == c0.values);
        CHECK(h0.cols == c0.cols);
        CHECK_FALSE(h0.notes.empty());
    }

    // Hybrid r pairs ECFP(r) with BCFP(r-1).
    const auto h2 = build_features(keys, labels, {FingerprintKind::Hybrid, Pooling::Folded, 2, 128, 64, false}, train);
    REQUIRE(h2.blocks.size() == 2);
    CHECK(h2.blocks[0].ecfp);
    CHECK(h2.blocks[0].radius == 2);
    CHECK_FALSE(h2.blocks[1].ecfp);
    CHECK(h2.blocks[1].radius == 1);
}

TEST_CASE("property: conservation, monotone OOV and train-only vocabulary") {
    const auto mols = testing::random_molecules(17, 120);
    const auto keys = keys_of(mols);
    std::vector<int> labels(mols.size(), 0);
    labels[0] = 1;
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    for (std::size_t i = 0; i < mols.size(); ++i) {
        (i % 4 == 0 ? test : train).push_back(i);
    }
    for (int r = 0; r <= 3; ++r) {
        const auto folded = build_features(keys, labels, {FingerprintKind::Concat, Pooling::Folded, r, 64, 32, false}, train);
        const auto with_oov = build_features(keys, labels, {FingerprintKind::Concat, Pooling::SortSlice, r, 64, 32, true}, train);
        const auto without = build_features(keys, labels, {FingerprintKind::Concat, Pooling::SortSlice, r, 64, 32, false}, train);
        CHECK(with_oov.vocabulary_fit_rows == train);
        for (std::size_t i = 0; i < mols.size(); ++i) {
            const auto& k = keys[i];
            const auto e_total = k.ecfp[static_cast<std::size_t>(r)].total();
            const auto b_total = k.bcfp[static_cast<std::size_t>(r)].total();
            const auto frow = folded.row(i);
            CHECK(sum(frow.subspan(0, 64)) == e_total);
            CHECK(sum(frow.subspan(64, 64)) == b_total);
            const auto orow = with_oov.row(i);
            const auto prow = without.row(i);
            const auto& eb = with_oov.blocks[0];
            const auto& bb = with_oov.blocks[1];
            CHECK(sum(orow.subspan(eb.offset, eb.width)) == e_total);
            CHECK(sum(orow.subspan(bb.offset, bb.width)) == b_total);
            // Dropping the OOV coordinate gives the plain Sort&Slice row.
            const auto& pe = without.blocks[0];
            const auto& pb = without.blocks[1];
            CHECK(std::equal(prow.begin() + static_cast<std::ptrdiff_t>(pe.offset),
                             prow.begin() + static_cast<std::ptrdiff_t>(pe.offset + pe.width),
                             orow.begin() + static_cast<std::ptrdiff_t>(eb.offset)));
            CHECK(std::equal(prow.begin() + static_cast<std::ptrdiff_t>(pb.offset),
                             prow.begin() + static_cast<std::ptrdiff_t>(pb.offset + pb.width),
                             orow.begin() + static_cast<std::ptrdiff_t>(bb.offset)));
        }
    }
}

TEST_CASE("sortslice ignores keys that occur only in test rows") {
    const std::vector<Molecule> mols{parse_smiles("CCO"), parse_smiles("CCN"), parse_smiles("C1CCCCC1Br")};
    const auto keys = keys_of(mols);
    const std::vector<int> labels{0, 1, 0};
    const std::vector<std::size_t> train{0, 1};
    const auto m = build_features(keys, labels, {FingerprintKind::Ecfp, Pooling::SortSlice, 1, 64, 1000, true}, train);
    // Vocabulary holds only training keys, so the ring bromide lands in OOV.
    const auto& block = m.blocks[0];
    std::set<SubstructureKey> seen;
    for (std::size_t i : train) {
        for (const auto& [key, c] : keys[i].ecfp[1].entries()) seen.insert(key);
    }
    // Fewer distinct keys than K: the block is still K + 1 wide, unused slots stay zero.
    CHECK(block.width == 1001);
    for (const auto& [key, c] : keys[2].ecfp[1].entries()) CHECK(seen.count(key) == 0);
    const auto row = m.row(2);
    CHECK(row[block.offset + block.width - 1] == keys[2].ecfp[1].total());
    CHECK(sum(row.subspan(block.offset, block.width - 1)) == 0);
    CHECK(sum(m.row(0).subspan(block.offset + seen.size(), block.width - seen.size())) == 0);
}

TEST_CASE("matrix serialization") {
    const auto mols = testing::random_molecules(29, 10);
    const auto keys = keys_of(mols);
    std::vector<int> labels(mols.size(), 1);
    const auto m = build_features(keys, labels, {FingerprintKind::Bcfp, Pooling::Folded, 2, 32, 16, false}, iota(10));
    std::stringstream bin;
    write_matrix_binary(bin, m);
    const std::string bytes = bin.str();
    CHECK(bytes.substr(0, 8) == "BCFPMAT1");
    CHECK(bytes.size() == 8 + 16 + m.rows * m.cols * 4);
    CHECK(static_cast<unsigned char>(bytes[8]) == m.rows);
    const auto back = read_matrix_binary(bin);
    CHECK(back.rows == m.rows);
    CHECK(back.cols == m.cols);
    CHECK(back.values == m.values);

    std::stringstream bad("BCFPMAT0");
    CHECK_THROWS_AS((void)read_matrix_binary(bad), FeatureError);

    std::stringstream csv;
    write_matrix_csv(csv, m);
    std::string header;
    std::getline(csv, header);
    CHECK(header.rfind("label,bcfp_r2_fold32:0,", 0) == 0);
    std::size_t lines = 0;
    for (std::string line; std::getline(csv, line);) ++lines;
    CHECK(lines == m.rows);
}
