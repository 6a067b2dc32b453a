"""Machine- and human-readable experiment reports.

Per-repetition rows and aggregates go to CSV (full float precision, so a
rerun with the same seed produces byte-identical files and the aggregates
can be recomputed exactly from the rows). The markdown table mirrors the
usual method x widths x learner layout; the per-party-count CSV is laid
out for plotting RMSE against the number of parties.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .learners.backend import backend_name

ROWS_HEADER = ["dataset", "method", "learner", "m", "p_tilde", "p_hat", "rep", "rmse"]
AGG_HEADER = [
    "dataset", "method", "learner", "m", "p_tilde", "p_hat",
    "reps", "mean_rmse", "stderr",
]
SWEEP_HEADER = ["m", "method", "learner", "p_tilde", "p_hat", "mean_rmse", "stderr"]

_POLICIES = {
    "test_count_rounding": "per user: round(test_fraction * count), ties up;"
    " single-rating users stay in train",
    "unassigned_users": "users outside every party block are excluded from"
    " both train and test for that repetition",
    "dummy_column_order": "party blocks in party order, then items",
    "row_order": "(user index, item index) lexicographic within each party",
    "individual_rmse": "test predictions pooled across parties before one"
    " RMSE is taken",
    "seed_schedule": "repetition i uses base_seed+i; stages draw from"
    " splitmix64-derived sub-seeds (split, partition, reference data, each"
    " learner); learner seeds omit the method so m=1 centralized and"
    " individual runs coincide",
    "cold_start": "test ratings of users without training ratings cannot"
    " occur: parties are drawn from users with training data",
    "target_width_clamping": "requested shared widths above"
    " min(reference rows, total encoding width) are clamped with a warning",
    "prediction_clipping": "off unless --clip; clips to the rating scale",
}


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(ROWS_HEADER)
        for row in rows:
            writer.writerow(
                [
                    row.dataset, row.method, row.learner, row.m,
                    _cell(row.p_tilde), _cell(row.p_hat), row.rep,
                    _cell(row.rmse),
                ]
            )


def write_aggregates_csv(path, aggregates) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGG_HEADER)
        for agg in aggregates:
            writer.writerow(
                [
                    agg.dataset, agg.method, agg.learner, agg.m,
                    _cell(agg.p_tilde), _cell(agg.p_hat), agg.reps,
                    _cell(agg.mean_rmse), _cell(agg.stderr),
                ]
            )


def write_party_sweep_csv(path, aggregates) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SWEEP_HEADER)
        for agg in sorted(aggregates, key=lambda a: (a.m, a.method, a.learner)):
            writer.writerow(
                [
                    agg.m, agg.method, agg.learner,
                    _cell(agg.p_tilde), _cell(agg.p_hat),
                    _cell(agg.mean_rmse), _cell(agg.stderr),
                ]
            )


def write_markdown(path, result) -> None:
    learners = list(result.config.learners)
    lines = []
    m_values = sorted({agg.m for agg in result.aggregates})
    for m in m_values:
        subset = [agg for agg in result.aggregates if agg.m == m]
        lines.append(f"## {result.config.dataset} (m = {m})")
        lines.append("")
        header = "| method | p_tilde | p_hat | " + " | ".join(learners) + " |"
        lines.append(header)
        lines.append("|" + "---|" * (3 + len(learners)))
        keys = []
        for agg in subset:
            key = (agg.method, agg.p_tilde, agg.p_hat)
            if key not in keys:
                keys.append(key)
        for method, p_tilde, p_hat in keys:
            cells = []
            for learner in learners:
                match = [
                    agg
                    for agg in subset
                    if (agg.method, agg.p_tilde, agg.p_hat, agg.learner)
                    == (method, p_tilde, p_hat, learner)
                ]
                if match:
                    agg = match[0]
                    cells.append(f"{agg.mean_rmse:.3f} (±{agg.stderr:.3f})")
                else:
                    cells.append("")
            left = (
                f"| {method} | {p_tilde if p_tilde is not None else '—'} "
                f"| {p_hat if p_hat is not None else '—'} | "
            )
            lines.append(left + " | ".join(cells) + " |")
        lines.append("")
    Path(path).write_text("\n".join(lines))


def write_manifest(path, config) -> None:
    payload = {
        "config": _jsonable_config(config),
        "policies": _POLICIES,
        "kernel_backend": backend_name(),
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _jsonable_config(config) -> dict:
    from dataclasses import asdict

    raw = asdict(config)
    raw["data_path"] = str(raw["data_path"])
    raw["output_dir"] = str(raw["output_dir"])
    for key, value in list(raw.items()):
        if isinstance(value, tuple):
            raw[key] = list(value)
    return raw


def write_reports(result, out_dir) -> None:
    out_dir = Path(out_dir)
    write_rows_csv(out_dir / "results.csv", result.rows)
    write_aggregates_csv(out_dir / "aggregates.csv", result.aggregates)
    write_markdown(out_dir / "results.md", result)
    write_party_sweep_csv(out_dir / "party_sweep.csv", result.aggregates)
    write_manifest(out_dir / "manifest.json", result.config)
