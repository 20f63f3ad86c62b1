"""Scenario files, the oracle catalog, the experiment runner and reports."""

from .catalog import CATALOG, CatalogEntry, closed_form_residual, get_entry, validate_catalog
from .report import TABLE_COLUMNS, emit_report, render_csv, render_json
from .runner import ExperimentResult, RunBundle, run_scenario, solve_rays
from .scenario import SCHEMA_VERSION, Scenario, load_scenario, parse_scenario

__all__ = [name for name in dir() if not name.startswith("_")]
