"""Atom- and bond-centred circular fingerprints with a random-forest harness."""

from ._core import (
    ConfigError,
    DataError,
    FeatureError,
    MetricError,
    ModelError,
    Molecule,
    RandomForest,
    SmilesError,
    SplitError,
    StatsError,
    __version__,
    auroc,
    average_precision,
    bcfp_keys,
    boxplot_svg,
    canonical_hash,
    clean,
    ecfp_keys,
    f1_score,
    featurize,
    fold_counts,
    load_config,
    parse_smiles,
    sortslice,
    stratified_holdout,
    stratified_kfold,
    studentized_range_cdf,
    studentized_range_quantile,
    tukey_hsd,
)

__all__ = [name for name in dir() if not name.startswith("_")] + ["__version__"]
