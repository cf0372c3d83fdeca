"""
Text and CSV reports in the layouts of the simulation-study tables

1. fit summary: EVal / EVar (/ AVD) per model side by side, DIC row at the bottom
2. PSRF table
3. prior sensitivity: relative change per parameter and MRE per group
4. initial-value sensitivity: same columns, one row per perturbed start
"""
import logging
from pathlib import Path
from typing import Dict, Mapping, Optional, Union

import numpy as np
import pandas as pd

from core.diagnostics.convergence import Psrf

logger = logging.getLogger("spatial_mem.reports")

EVAR_FOOTNOTE = ("EVar is the posterior variance of the marginal chain, not the spread of the "
                 "estimator across replications.")
FLOAT_FORMAT = "{:.4f}".format


def fit_summary_table(summaries: Mapping[str, pd.DataFrame],
                      dic_values: Optional[Mapping[str, float]] = None) -> pd.DataFrame:
    """Columns <model> EVal, <model> EVar[, <model> AVD]; parameters as rows"""
    columns: Dict[str, pd.Series] = {}
    for model, frame in summaries.items():
        columns[f"{model} EVal"] = frame["mean"]
        columns[f"{model} EVar"] = frame["var"]
        if "avd" in frame:
            columns[f"{model} AVD"] = frame["avd"]
    table = pd.DataFrame(columns)
    if dic_values:
        dic_row = {f"{m} EVal": dic_values.get(m, np.nan) for m in summaries}
        table = pd.concat([table, pd.DataFrame([dic_row], index=["DIC"])])
    table.index.name = "parameter"
    return table


def psrf_table(result: Psrf, threshold: float = 1.1) -> pd.DataFrame:
    rows = []
    for name, value in result.values.items():
        degenerate = name in result.degenerate
        rows.append({"parameter": name, "psrf": value, "degenerate": degenerate,
                     "converged": degenerate or value <= threshold})
    return pd.DataFrame(rows).set_index("parameter")


def render_table(table: pd.DataFrame, title: str, footer: Optional[str] = None) -> str:
    """Aligned plain-text rendering with a title rule"""
    body = table.to_string(float_format=FLOAT_FORMAT, na_rep="-")
    width = max(len(line) for line in body.splitlines()) if body else len(title)
    lines = [title, "=" * max(width, len(title)), body]
    if footer:
        lines += ["-" * max(width, len(title)), footer]
    return "\n".join(lines) + "\n"


def write_report(table: pd.DataFrame, directory: Union[str, Path], stem: str,
                 title: str, footer: Optional[str] = None) -> list:
    """Write <stem>.csv and <stem>.txt; returns both paths"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    csv_path = directory / f"{stem}.csv"
    txt_path = directory / f"{stem}.txt"
    table.to_csv(csv_path, float_format="%.10g")
    txt_path.write_text(render_table(table, title, footer))
    logger.info(f"✅ Wrote {title} to {txt_path}")
    return [csv_path, txt_path]
