"""Paths to data files bundled with the package."""

from __future__ import annotations

from importlib.resources import files
from pathlib import Path


def separated_panel_path() -> Path:
    """The bundled 10x3 demonstration panel on which no estimate exists.

    Outcomes satisfy y = 1 exactly when x > 0.5, so the stacked data admit a
    perfect linear classifier and, within each individual, the observed
    sequence picks the periods with the largest covariates. Both the pooled
    and the panel separation checks flag it.
    """
    return Path(str(files("felogit").joinpath("data/separated_panel.csv")))


def cli_report_schema_path() -> Path:
    """JSON schema describing every payload emitted by ``felogit --output json``."""
    return Path(str(files("felogit").joinpath("schema/cli_report.schema.json")))
