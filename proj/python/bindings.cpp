#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bcfp/dataset.hpp"
#include "bcfp/experiment.hpp"
#include "bcfp/featurize.hpp"
#include "bcfp/fingerprint.hpp"
#include "bcfp/forest.hpp"
#include "bcfp/metrics.hpp"
#include "bcfp/report.hpp"
#include "bcfp/smiles.hpp"
#include "bcfp/splits.hpp"
#include "bcfp/stats.hpp"
#include "bcfp/version.hpp"

namespace py = pybind11;
using namespace bcfp;

namespace {

using KeyDict = std::map<std::uint64_t, std::uint32_t>;

KeyDict to_dict(const KeyMultiset& keys) {
    KeyDict out;
    for (const auto& [key, count] : keys.entries()) out.emplace(key.value, count);
    return out;
}

KeyMultiset from_dict(const KeyDict& keys) {
    std::vector<KeyMultiset::Entry> entries;
    for (const auto& [key, count] : keys) {
        if (count > 0) entries.emplace_back(SubstructureKey{key}, count);
    }
    return KeyMultiset::from_entries(std::move(entries));
}

py::array_t<std::uint32_t> to_array(const CountVector& v) {
    py::array_t<std::uint32_t> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::array_t<std::size_t> to_array(const std::vector<std::size_t>& v) {
    py::array_t<std::size_t> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

DenseMatrix to_dense(const py::array_t<float, py::array::c_style | py::array::forcecast>& x) {
    if (x.ndim() != 2) throw py::value_error("expected a 2-D array");
    DenseMatrix m(static_cast<std::size_t>(x.shape(0)), static_cast<std::size_t>(x.shape(1)));
    std::copy(x.data(), x.data() + x.size(), m.values.begin());
    return m;
}

std::vector<Molecule> parse_all(const std::vector<std::string>& smiles, bool normalize) {
    std::vector<Molecule> out;
    out.reserve(smiles.size());
    for (const auto& s : smiles) out.push_back(parse_smiles(s, {normalize}));
    return out;
}

ForestParams make_params(int n_trees, const std::string& max_features, int min_samples_leaf, int min_samples_split,
                         int max_depth, bool bootstrap, std::uint64_t seed, int jobs) {
    ForestParams p;
    p.n_trees = n_trees;
    if (max_features == "sqrt") {
        p.max_features = MaxFeatures::Sqrt;
    } else if (max_features == "all") {
        p.max_features = MaxFeatures::All;
    } else {
        throw py::value_error("max_features must be 'sqrt' or 'all'");
    }
    p.min_samples_leaf = min_samples_leaf;
    p.min_samples_split = min_samples_split;
    p.max_depth = max_depth;
    p.bootstrap = bootstrap;
    p.seed = seed;
    p.jobs = jobs;
    return p;
}

py::dict split_dict(const Split& s) {
    py::dict d;
    d["train"] = to_array(s.train);
    d["test"] = to_array(s.test);
    return d;
}

Metric parse_metric(const std::string& name) {
    for (Metric m : kMetrics) {
        if (to_string(m) == name) return m;
    }
    throw py::value_error("metric must be 'auroc', 'auprc' or 'f1'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Bond- and atom-centred circular fingerprints with a random-forest evaluation harness.";
    m.attr("__version__") = std::string(kVersion);

    // --- errors ----------------------------------------------------------------

    // Kept alive for the interpreter's lifetime; the module attribute holds another reference.
    static const py::handle smiles_error = py::exception<SmilesError>(m, "SmilesError", PyExc_ValueError).release();
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const SmilesError& e) {
            py::object inst = py::reinterpret_borrow<py::object>(smiles_error)(e.what());
            inst.attr("kind") = std::string(to_string(e.kind()));
            inst.attr("position") = e.position();
            PyErr_SetObject(smiles_error.ptr(), inst.ptr());
        }
    });
    py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<FeatureError>(m, "FeatureError", PyExc_ValueError);
    py::register_exception<ModelError>(m, "ModelError", PyExc_ValueError);
    py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);
    py::register_exception<SplitError>(m, "SplitError", PyExc_ValueError);
    py::register_exception<StatsError>(m, "StatsError", PyExc_ValueError);

    // --- molecules ---------------------------------------------------------------

    py::class_<Molecule>(m, "Molecule")
        .def_property_readonly("num_atoms", &Molecule::num_atoms)
        .def_property_readonly("num_bonds", &Molecule::num_bonds)
        .def_property_readonly("source", &Molecule::source)
        .def("atoms",
             [](const Molecule& mol) {
                 py::list out;
                 for (const auto& a : mol.atoms()) {
                     py::dict d;
                     d["element"] = std::string(element_symbol(a.element));
                     d["charge"] = a.formal_charge;
                     d["hydrogens"] = a.total_h();
                     d["aromatic"] = a.aromatic;
                     d["in_ring"] = a.in_ring;
                     d["degree"] = a.degree;
                     d["isotope"] = a.isotope;
                     out.append(d);
                 }
                 return out;
             })
        .def("bonds",
             [](const Molecule& mol) {
                 py::list out;
                 for (const auto& b : mol.bonds()) {
                     out.append(py::make_tuple(b.begin, b.end, static_cast<int>(b.order), b.in_ring));
                 }
                 return out;
             },
             "(begin, end, order, in_ring) per bond; order 4 is aromatic.")
        .def("canonical_hash", [](const Molecule& mol) { return canonical_hash(mol); })
        .def("__repr__", [](const Molecule& mol) {
            return "<Molecule '" + mol.source() + "' atoms=" + std::to_string(mol.num_atoms()) +
                   " bonds=" + std::to_string(mol.num_bonds()) + ">";
        });

    m.def("parse_smiles", [](const std::string& text, bool normalize) { return parse_smiles(text, {normalize}); },
          py::arg("smiles"), py::arg("normalize_aromaticity") = false);
    m.def("canonical_hash",
          [](const std::string& text, bool normalize) { return canonical_hash(parse_smiles(text, {normalize})); },
          py::arg("smiles"), py::arg("normalize_aromaticity") = false,
          "Hash invariant under atom order; equal for the same graph.");

    // --- fingerprints ------------------------------------------------------------

    m.def("ecfp_keys", [](const Molecule& mol, int radius) { return to_dict(ecfp_keys(mol, radius)); },
          py::arg("mol"), py::arg("radius"), "Atom-centred key multiset as {key: count}.");
    m.def("bcfp_keys", [](const Molecule& mol, int radius) { return to_dict(bcfp_keys(mol, radius)); },
          py::arg("mol"), py::arg("radius"), "Bond-centred key multiset as {key: count}.");
    m.def("fold_counts", [](const KeyDict& keys, std::size_t dim) { return to_array(fold_counts(from_dict(keys), dim)); },
          py::arg("keys"), py::arg("dim"));
    m.def(
        "sortslice",
        [](const std::vector<KeyDict>& train, const std::vector<KeyDict>& apply, std::size_t slice_size, bool oov) {
            std::vector<KeyMultiset> fit;
            for (const auto& k : train) fit.push_back(from_dict(k));
            const auto vocab = fit_sortslice(fit, slice_size, oov);
            py::array_t<std::uint32_t> out({static_cast<py::ssize_t>(apply.size()), static_cast<py::ssize_t>(vocab.width())});
            auto* dst = out.mutable_data();
            for (const auto& k : apply) {
                const auto row = transform_sortslice(from_dict(k), vocab);
                dst = std::copy(row.begin(), row.end(), dst);
            }
            return out;
        },
        py::arg("train"), py::arg("apply"), py::arg("slice_size"), py::arg("oov") = false,
        "Fits a vocabulary on `train` key dicts and returns counts for `apply`.");

    m.def(
        "featurize",
        [](const std::vector<std::string>& smiles, const std::vector<int>& labels, const std::string& scheme_id,
           std::optional<std::vector<std::size_t>> train_rows, bool normalize) {
            const auto scheme = parse_scheme_id(scheme_id);
            if (!scheme) throw py::value_error("unknown scheme id '" + scheme_id + "'");
            if (labels.size() != smiles.size()) throw py::value_error("smiles and labels differ in length");
            const auto mols = parse_all(smiles, normalize);
            const auto keys = compute_keys(std::span<const Molecule>(mols));
            std::vector<std::size_t> rows;
            if (train_rows) {
                rows = *train_rows;
            } else {
                for (std::size_t i = 0; i < smiles.size(); ++i) rows.push_back(i);
            }
            const FeatureMatrix fm = build_features(keys, labels, *scheme, rows);
            py::array_t<std::uint32_t> x({static_cast<py::ssize_t>(fm.rows), static_cast<py::ssize_t>(fm.cols)});
            std::copy(fm.values.begin(), fm.values.end(), x.mutable_data());
            py::list blocks;
            for (const auto& b : fm.blocks) blocks.append(py::make_tuple(b.name, b.offset, b.width));
            py::dict out;
            out["X"] = x;
            out["blocks"] = blocks;
            return out;
        },
        py::arg("smiles"), py::arg("labels"), py::arg("scheme"), py::arg("train_rows") = py::none(),
        py::arg("normalize_aromaticity") = false,
        "Feature matrix for a scheme id such as 'hybrid_r2_ss1024_oov'. Sort&Slice vocabularies are fitted on "
        "train_rows (all rows by default). Returns {'X': uint32 array, 'blocks': [(name, offset, width)]}.");

    // --- model -------------------------------------------------------------------

    py::class_<Forest>(m, "RandomForest")
        .def(py::init([](int n_trees, const std::string& max_features, int min_samples_leaf, int min_samples_split,
                         int max_depth, bool bootstrap, std::uint64_t seed, int jobs) {
                 Forest f(std::vector<DecisionTree>{},
                          make_params(n_trees, max_features, min_samples_leaf, min_samples_split, max_depth,
                                      bootstrap, seed, jobs),
                          0);
                 return f;
             }),
             py::arg("n_trees") = 100, py::arg("max_features") = "sqrt", py::arg("min_samples_leaf") = 1,
             py::arg("min_samples_split") = 2, py::arg("max_depth") = 0, py::arg("bootstrap") = true,
             py::arg("seed") = 0, py::arg("jobs") = 1)
        .def(
            "fit",
            [](Forest& self, const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
               const std::vector<int>& y) {
                const DenseMatrix dense = to_dense(x);
                const ForestParams params = self.params();
                py::gil_scoped_release release;
                self = train_forest(dense, y, params);
            },
            py::arg("X"), py::arg("y"))
        .def(
            "predict_proba",
            [](const Forest& self, const py::array_t<float, py::array::c_style | py::array::forcecast>& x) {
                const DenseMatrix dense = to_dense(x);
                const auto p = self.predict_proba(dense);
                return py::array_t<double>(static_cast<py::ssize_t>(p.size()), p.data());
            },
            py::arg("X"), "Positive-class probability per row.")
        .def_property_readonly("n_trees", [](const Forest& f) { return f.trees().size(); })
        .def_property_readonly("n_features", &Forest::n_features)
        .def("to_json", &Forest::to_json)
        .def_static("from_json", &Forest::from_json);

    // --- evaluation --------------------------------------------------------------

    m.def("auroc", [](const std::vector<double>& s, const std::vector<int>& y) { return auroc(s, y); },
          py::arg("scores"), py::arg("labels"));
    m.def("average_precision",
          [](const std::vector<double>& s, const std::vector<int>& y) { return average_precision(s, y); },
          py::arg("scores"), py::arg("labels"));
    m.def("f1_score",
          [](const std::vector<double>& s, const std::vector<int>& y, double t) { return f1_at_threshold(s, y, t); },
          py::arg("scores"), py::arg("labels"), py::arg("threshold") = 0.5);
    m.def("stratified_holdout",
          [](const std::vector<int>& y, double test_fraction, std::uint64_t seed) {
              return split_dict(stratified_holdout(y, test_fraction, seed));
          },
          py::arg("labels"), py::arg("test_fraction") = 0.2, py::arg("seed") = 0);
    m.def("stratified_kfold",
          [](const std::vector<int>& y, int k, const std::vector<std::uint64_t>& seeds) {
              py::list out;
              for (const auto& s : stratified_kfold(y, k, seeds)) out.append(split_dict(s));
              return out;
          },
          py::arg("labels"), py::arg("k") = 5, py::arg("seeds") = std::vector<std::uint64_t>{0});

    m.def("studentized_range_cdf", &studentized_range_cdf, py::arg("q"), py::arg("k"), py::arg("df"));
    m.def("studentized_range_quantile", &studentized_range_quantile, py::arg("p"), py::arg("k"), py::arg("df"));
    m.def(
        "tukey_hsd",
        [](const std::vector<std::vector<double>>& groups, double alpha) {
            const TukeyResult r = tukey_hsd(groups, alpha);
            py::list pairs;
            for (const auto& p : r.pairs) {
                py::dict d;
                d["a"] = p.a;
                d["b"] = p.b;
                d["diff"] = p.diff;
                d["q"] = p.q;
                d["p"] = p.p;
                d["significant"] = p.significant;
                pairs.append(d);
            }
            py::dict out;
            out["means"] = r.means;
            out["mse"] = r.mse;
            out["df"] = r.df;
            out["anova_f"] = r.anova_f;
            out["anova_p"] = r.anova_p;
            out["pairs"] = pairs;
            return out;
        },
        py::arg("groups"), py::arg("alpha") = 0.05);

    m.def(
        "boxplot_svg",
        [](const std::vector<std::tuple<std::string, std::string, double, double, double>>& rows,
           const std::string& metric) {
            std::vector<MetricRecord> records;
            for (const auto& [config, split, a, p, f] : rows) records.push_back({config, split, a, p, f});
            return render_boxplot_svg(records, parse_metric(metric));
        },
        py::arg("records"), py::arg("metric") = "auroc",
        "SVG box plot from (config, split, auroc, auprc, f1) tuples.");

    // --- data --------------------------------------------------------------------

    m.def(
        "clean",
        [](const std::vector<std::string>& smiles, const std::vector<int>& labels, bool normalize) {
            if (labels.size() != smiles.size()) throw py::value_error("smiles and labels differ in length");
            std::vector<DatasetRecord> records;
            for (std::size_t i = 0; i < smiles.size(); ++i) records.push_back({smiles[i], labels[i], i});
            const CleanResult r = clean_dataset(records, {normalize});
            py::list kept;
            for (const auto& rec : r.records) kept.append(py::make_tuple(rec.row_id, rec.smiles, rec.label));
            py::list dropped;
            for (const auto& d : r.report.dropped) dropped.append(py::make_tuple(d.row_id, d.reason));
            py::dict out;
            out["kept"] = kept;
            out["dropped"] = dropped;
            out["invalid"] = r.report.invalid;
            out["duplicates"] = r.report.duplicates;
            out["label_conflicts"] = r.report.label_conflicts;
            return out;
        },
        py::arg("smiles"), py::arg("labels"), py::arg("normalize_aromaticity") = false,
        "Drops unparsable rows, duplicate structures and label conflicts. Kept rows are (row, smiles, label).");
    m.def(
        "load_config", [](const std::string& text) { return parse_config(text).to_toml(); }, py::arg("text"),
        "Validates an experiment config and returns its canonical TOML.");
}
