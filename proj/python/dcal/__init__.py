"""Double-calibrated treatment-effect estimation.

Thin wrapper over the pybind11 core. Installed wheels carry the extension
inside this package; in a plain CMake build tree the extension sits on
sys.path next to it.
"""

try:
    from . import _dcal as _core
except ImportError:  # build-tree layout
    import _dcal as _core

Dataset = _core.Dataset
SplitData = _core.SplitData
TreatmentKind = _core.TreatmentKind
InvalidConfigError = _core.InvalidConfigError
DataError = _core.DataError
NumericError = _core.NumericError

read_dataset_csv = _core.read_dataset_csv
split_three_way = _core.split_three_way
fit_lasso_glm = _core.fit_lasso_glm
select_lambda = _core.select_lambda
trim_index = _core.trim_index
aipw_score = _core.aipw_score
confidence_interval = _core.confidence_interval
estimate = _core.estimate
generate = _core.generate
run_study = _core.run_study
population_tau = _core.population_tau

__version__ = _core.__version__

__all__ = [
    "Dataset",
    "SplitData",
    "TreatmentKind",
    "InvalidConfigError",
    "DataError",
    "NumericError",
    "read_dataset_csv",
    "split_three_way",
    "fit_lasso_glm",
    "select_lambda",
    "trim_index",
    "aipw_score",
    "confidence_interval",
    "estimate",
    "generate",
    "run_study",
    "population_tau",
]
