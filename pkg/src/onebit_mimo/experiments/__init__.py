"""Sweep descriptions, the parallel runner, CSV output and the ``simulate`` CLI."""

from .figures import FIGURES, figure_spec
from .runner import SweepResult, csv_body, emit_csv, read_csv, run_experiment, run_nm_symmetry_probe
from .spec import KINDS, ExperimentSpec, SpecError, load_spec
