from .fig2 import Fig2Row, run_fig2
from .io import CSV_HEADER, read_results_csv, write_results_csv
from .runner import ResultRow, mean_ci95, run_experiment
from .spec import ExperimentSpec, Fig2Spec, load_spec, preset_fig2, preset_fig4, preset_fig5

__all__ = [
    "CSV_HEADER",
    "ExperimentSpec",
    "Fig2Row",
    "Fig2Spec",
    "ResultRow",
    "load_spec",
    "mean_ci95",
    "preset_fig2",
    "preset_fig4",
    "preset_fig5",
    "read_results_csv",
    "run_experiment",
    "run_fig2",
    "write_results_csv",
]
