"""Semiparametric Bayesian networks over continuous data.

Nodes mix linear Gaussian and kernel-density conditional distributions;
structures and family assignments are learned by cross-validated greedy
search or by constraint-based discovery with a linear correlation test.

Submodules are imported lazily so the command line can configure thread
limits before any numerical library loads.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "ContinuousData": "dataset",
    "read_csv": "dataset",
    "write_csv": "dataset",
    "Dag": "graph",
    "NodeType": "graph",
    "parse_type_map": "graph",
    "LinearGaussian": "cpds",
    "ConditionalKde": "cpds",
    "GaussianKde": "cpds",
    "fit_linear_gaussian": "cpds",
    "normal_reference_bandwidth": "cpds",
    "fit_cpd": "cpds",
    "SemiparametricBn": "model",
    "fit_model": "model",
    "LoglikReport": "model",
    "FoldAssignment": "scoring",
    "TrainValidationSplit": "scoring",
    "CvScorer": "scoring",
    "ValidationScorer": "scoring",
    "BicScorer": "scoring",
    "ScoreCache": "scoring",
    "Operator": "search",
    "OpKind": "search",
    "HcConfig": "search",
    "enumerate_operators": "search",
    "hc_learn": "search",
    "hc_learn_kdebn": "search",
    "hc_learn_gbn_bic": "search",
    "hc_type_change_only": "search",
    "Pdag": "pc",
    "PcConfig": "pc",
    "PartialCorrelationTest": "pc",
    "pc_stable_learn": "pc",
    "pdag_to_dag": "pc",
    "meek_closure": "pc",
    "pc_learn_spbn": "pc",
    "pc_learn_gbn": "pc",
    "hamming_distance": "metrics",
    "structural_hamming_distance": "metrics",
    "type_hamming_distance": "metrics",
    "compare_structures": "metrics",
    "StructureDistanceReport": "metrics",
    "sample_synthetic": "synthetic",
    "ground_truth": "synthetic",
    "save_model": "serialize",
    "load_model": "serialize",
}

__all__ = sorted(_EXPORTS) + ["errors"]


def __getattr__(name: str):
    if name in _EXPORTS:
        import importlib

        module = importlib.import_module(f".{_EXPORTS[name]}", __name__)
        value = getattr(module, name)
        globals()[name] = value
        return value
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
