"""Command-line harness: reproduce the six built-in simulation tables or run
a custom comparison sweep from a JSON config, emitting aligned markdown or
CSV with full seed provenance.

Exit codes: 0 success, 2 usage/schema error, 3 unknown estimator,
4 numerical failure.
"""

from __future__ import annotations

import csv
import io
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import click
import numpy as np

from .errors import ConfigError, PitnearError, UnknownEstimatorError
from .estimators import LossFn, resolve_estimator
from .gpn import SweepCell, gpn_sweep
from .models import model_from_config

__all__ = ["main", "run_table", "run_config_file", "TABLES", "TableSpec"]


@dataclass(frozen=True)
class TableSpec:
    """One built-in simulation table: a fixed pair swept over a gap grid for
    six model configurations.
    """

    number: int
    title: str
    model_name: str
    config_fields: tuple[str, ...]
    configs: tuple[tuple[float, ...], ...]
    component: int
    candidate: str
    reference: str
    gaps: tuple[float, ...]
    loss: str

    def model(self, config: tuple[float, ...]):
        spec = {"name": self.model_name}
        spec.update(dict(zip(self.config_fields, config)))
        return model_from_config(spec)


_LOCATION_GAPS = (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
_SCALE_GAPS = (1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0)
_NORMAL_FIELDS = ("sigma1", "sigma2", "rho")
_GAMMA_FIELDS = ("alpha1", "alpha2")
_GAMMA_CONFIGS = ((0.5, 0.2), (0.2, 0.8), (1.0, 1.0), (5.0, 2.0), (1.0, 30.0), (30.0, 1.0))

TABLES: dict[int, TableSpec] = {
    1: TableSpec(
        number=1,
        title="restricted MLE vs unrestricted Pitman-nearest estimator, smaller mean",
        model_name="normal",
        config_fields=_NORMAL_FIELDS,
        configs=(
            (3.0, 0.5, -0.9), (0.5, 5.0, -0.5), (1.0, 1.0, 0.0),
            (15.0, 2.0, 0.2), (1.0, 30.0, 0.5), (30.0, 1.0, 0.9),
        ),
        component=1,
        candidate="rmle",
        reference="pnlee",
        gaps=_LOCATION_GAPS,
        loss="location_abs",
    ),
    2: TableSpec(
        number=2,
        title="clamped vs plain order-respecting blend estimator, smaller mean",
        model_name="normal",
        config_fields=_NORMAL_FIELDS,
        configs=(
            (0.1, 5.0, 0.2), (1.0, 25.0, 0.2), (0.5, 2.0, 0.5),
            (5.0, 15.0, 0.5), (0.5, 5.0, 0.9), (2.0, 15.0, 0.9),
        ),
        component=1,
        candidate="hp_star",
        reference="hp",
        gaps=_LOCATION_GAPS,
        loss="location_abs",
    ),
    3: TableSpec(
        number=3,
        title="restricted MLE vs clipped-weight blend estimator, smaller mean",
        model_name="normal",
        config_fields=_NORMAL_FIELDS,
        configs=(
            (5.0, 0.1, 0.2), (25.0, 1.0, 0.2), (2.0, 0.5, 0.5),
            (15.0, 5.0, 0.5), (5.0, 0.5, 0.9), (15.0, 2.0, 0.9),
        ),
        component=1,
        candidate="rmle",
        reference="pdt",
        gaps=_LOCATION_GAPS,
        loss="location_abs",
    ),
    4: TableSpec(
        number=4,
        title="clamped vs plain restricted MLE, larger gamma scale",
        model_name="gamma",
        config_fields=_GAMMA_FIELDS,
        configs=_GAMMA_CONFIGS,
        component=2,
        candidate="rmle_star",
        reference="rmle",
        gaps=_SCALE_GAPS,
        loss="scale_abs",
    ),
    5: TableSpec(
        number=5,
        title="clamped vs plain Pitman-nearest estimator, larger gamma scale",
        model_name="gamma",
        config_fields=_GAMMA_FIELDS,
        configs=_GAMMA_CONFIGS,
        component=2,
        candidate="pnsee_star",
        reference="pnsee",
        gaps=_SCALE_GAPS,
        loss="scale_abs",
    ),
    6: TableSpec(
        number=6,
        title="restricted MLE vs unbiased estimator, larger gamma scale",
        model_name="gamma",
        config_fields=_GAMMA_FIELDS,
        configs=_GAMMA_CONFIGS,
        component=2,
        candidate="rmle",
        reference="ue",
        gaps=_SCALE_GAPS,
        loss="scale_abs",
    ),
}


def _config_label(values: Sequence[float]) -> str:
    return "(" + ",".join(f"{v:g}" for v in values) + ")"


def _derive_column_seed(seed: int, table_number: int, column: int) -> int:
    ss = np.random.SeedSequence([seed % 2 ** 64, table_number, column])
    return int(ss.generate_state(1, np.uint64)[0])


def _csv_text(rows: list[tuple[str, SweepCell]], with_oracle: bool) -> str:
    header = ["pair", "gap", "gpn", "std_error", "tie_fraction", "n", "seed"]
    if with_oracle:
        header.append("oracle")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for label, cell in rows:
        r = cell.result
        row = [
            label, repr(cell.gap), repr(r.estimate), repr(r.std_error),
            repr(r.tie_fraction), r.n_samples, r.seed,
        ]
        if with_oracle:
            row.append(repr(cell.oracle))
        writer.writerow(row)
    return buf.getvalue()


def _md_table(header: list[str], rows: list[list[str]]) -> list[str]:
    widths = [len(h) for h in header]
    for row in rows:
        for i, cell in enumerate(row):
            widths[i] = max(widths[i], len(cell))
    out = ["| " + " | ".join(h.ljust(w) for h, w in zip(header, widths)) + " |"]
    out.append("|" + "|".join("-" * (w + 2) for w in widths) + "|")
    for row in rows:
        out.append("| " + " | ".join(c.rjust(w) for c, w in zip(row, widths)) + " |")
    return out


def run_table(
    table_id: int,
    n_samples: int = 10000,
    seed: int = 42,
    oracle: bool = False,
    out: str = "md",
) -> str:
    """Reproduce one built-in table; returns the rendered text."""
    if table_id not in TABLES:
        raise ConfigError(f"invalid table id {table_id}; expected 1..6")
    if out not in ("csv", "md"):
        raise ConfigError(f"invalid output format {out!r}; expected csv or md")
    if n_samples < 1:
        raise ConfigError(f"n_samples must be a positive integer, got {n_samples}")
    spec = TABLES[table_id]
    loss = LossFn.from_name(spec.loss)
    columns: list[tuple[str, list[SweepCell]]] = []
    for col, config in enumerate(spec.configs):
        model = spec.model(config)
        pair = (
            resolve_estimator(model, spec.component, spec.candidate),
            resolve_estimator(model, spec.component, spec.reference),
        )
        cells = gpn_sweep(
            model,
            [pair],
            spec.gaps,
            loss,
            n_samples=n_samples,
            base_seed=_derive_column_seed(seed, spec.number, col),
            oracle=oracle,
        )
        columns.append((_config_label(config), cells))

    if out == "csv":
        rows = [
            (f"{spec.candidate}/{spec.reference}@{label}", cell)
            for label, cells in columns
            for cell in cells
        ]
        return _csv_text(rows, oracle)

    title = (
        f"# table {spec.number}: {spec.candidate} vs {spec.reference} "
        f"({spec.title}); loss={spec.loss}, n={n_samples}, seed={seed}"
    )
    header = ["gap"]
    for label, _ in columns:
        header.append(label)
        if oracle:
            header.append(label + " oracle")
    body = []
    for i, gap in enumerate(spec.gaps):
        row = [f"{gap:g}"]
        for _, cells in columns:
            row.append(f"{cells[i].result.estimate:.3f}")
            if oracle:
                row.append(f"{cells[i].oracle:.3f}")
        body.append(row)
    return "\n".join([title, ""] + _md_table(header, body)) + "\n"


_CONFIG_FIELDS = {
    "table", "model", "component", "pairs", "gaps", "loss",
    "n_samples", "seed", "oracle", "output",
}


def _parse_pairs(raw) -> list[tuple[str, str, Optional[float]]]:
    if not isinstance(raw, list) or not all(isinstance(p, list) for p in raw):
        raise ConfigError("field 'pairs' must be a list of [candidate, reference] lists")
    pairs = []
    for p in raw:
        if len(p) == 2:
            cand, ref = p
            nu = None
        elif len(p) == 3:
            cand, ref, nu = p
            nu = float(nu)
        else:
            raise ConfigError(
                "each pair must be [candidate, reference] or [candidate, reference, nu]"
            )
        if not (isinstance(cand, str) and isinstance(ref, str)):
            raise ConfigError("estimator names in 'pairs' must be strings")
        pairs.append((cand, ref, nu))
    return pairs


def _validate_config(cfg: dict) -> dict:
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    unknown = sorted(set(cfg) - _CONFIG_FIELDS)
    if unknown:
        raise ConfigError(f"unknown config field(s): {', '.join(unknown)}")
    has_table = "table" in cfg
    has_custom = any(k in cfg for k in ("model", "pairs", "gaps", "loss", "component"))
    if has_table and has_custom:
        raise ConfigError("config must set either 'table' or a custom sweep, not both")
    if not has_table:
        for field in ("model", "component", "pairs", "gaps", "loss"):
            if field not in cfg:
                raise ConfigError(f"custom sweep config missing field '{field}'")
    out = {
        "n_samples": int(cfg.get("n_samples", 10000)),
        "seed": int(cfg.get("seed", 42)),
        "oracle": bool(cfg.get("oracle", False)),
        "output": cfg.get("output", "md"),
    }
    if out["output"] not in ("csv", "md"):
        raise ConfigError(f"field 'output' must be 'csv' or 'md', got {out['output']!r}")
    if out["n_samples"] < 1:
        raise ConfigError("field 'n_samples' must be a positive integer")
    if has_table:
        table = cfg["table"]
        if not isinstance(table, int) or table not in TABLES:
            raise ConfigError(f"field 'table' must be an integer 1..6, got {table!r}")
        out["table"] = table
        return out
    component = cfg["component"]
    if component not in (1, 2):
        raise ConfigError(f"field 'component' must be 1 or 2, got {component!r}")
    gaps = cfg["gaps"]
    if not isinstance(gaps, list) or not gaps:
        raise ConfigError("field 'gaps' must be a non-empty list of numbers")
    out.update(
        model=cfg["model"],
        component=component,
        pairs=_parse_pairs(cfg["pairs"]),
        gaps=[float(g) for g in gaps],
        loss=cfg["loss"],
    )
    return out


def _model_label(model) -> str:
    fields = {k: v for k, v in vars(model).items() if not k.startswith("_")}
    inner = ",".join(f"{k}={v:g}" for k, v in fields.items())
    return f"{type(model).__name__}({inner})"


def run_config_dict(cfg: dict) -> str:
    """Execute a validated config mapping; returns the rendered text."""
    cfg = _validate_config(cfg)
    if "table" in cfg:
        return run_table(
            cfg["table"],
            n_samples=cfg["n_samples"],
            seed=cfg["seed"],
            oracle=cfg["oracle"],
            out=cfg["output"],
        )
    model = model_from_config(cfg["model"])
    if model.kind.value == "location":
        if any(g < 0.0 for g in cfg["gaps"]):
            raise ConfigError("location gaps must be >= 0")
    elif any(g < 1.0 for g in cfg["gaps"]):
        raise ConfigError("scale gaps must be >= 1")
    loss = LossFn.from_name(cfg["loss"])
    pairs = [
        (
            resolve_estimator(model, cfg["component"], cand, nu),
            resolve_estimator(model, cfg["component"], ref, nu),
        )
        for cand, ref, nu in cfg["pairs"]
    ]
    cells = gpn_sweep(
        model,
        pairs,
        cfg["gaps"],
        loss,
        n_samples=cfg["n_samples"],
        base_seed=cfg["seed"],
        oracle=cfg["oracle"],
    )
    per_pair: dict[int, list[SweepCell]] = {}
    for cell in cells:
        per_pair.setdefault(cell.pair_index, []).append(cell)

    if cfg["output"] == "csv":
        rows = [(f"{c.candidate_name}/{c.reference_name}", c) for c in cells]
        return _csv_text(rows, cfg["oracle"])

    title = (
        f"# {_model_label(model)}, component={cfg['component']}, "
        f"loss={cfg['loss']}, n={cfg['n_samples']}, seed={cfg['seed']}"
    )
    header = ["gap"]
    for idx in sorted(per_pair):
        label = f"{per_pair[idx][0].candidate_name}/{per_pair[idx][0].reference_name}"
        header += [label, "se"]
        if cfg["oracle"]:
            header.append(label + " oracle")
    body = []
    for i, gap in enumerate(cfg["gaps"]):
        row = [f"{gap:g}"]
        for idx in sorted(per_pair):
            cell = per_pair[idx][i]
            row += [f"{cell.result.estimate:.3f}", f"{cell.result.std_error:.4f}"]
            if cfg["oracle"]:
                row.append(f"{cell.oracle:.3f}")
        body.append(row)
    return "\n".join([title, ""] + _md_table(header, body)) + "\n"


def run_config_file(path: str | Path) -> str:
    """Load and execute a JSON run config; returns the rendered text."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e}") from e
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from e
    return run_config_dict(cfg)


def _emit(text: str, output_file: Optional[str]) -> None:
    if output_file:
        Path(output_file).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


def _exit_code(exc: PitnearError) -> int:
    if isinstance(exc, UnknownEstimatorError):
        return 3
    if isinstance(exc, ConfigError):
        return 2
    return 4


_shared_options = [
    click.option("--samples", type=int, default=None, help="Monte Carlo draws per cell."),
    click.option("--seed", type=int, default=None, help="Base seed for per-cell streams."),
    click.option("--oracle", is_flag=True, default=False,
                 help="Add the deterministic quadrature value per cell."),
    click.option("--out", type=click.Choice(["csv", "md"]), default=None,
                 help="Output format."),
    click.option("--output-file", type=click.Path(dir_okay=False), default=None,
                 help="Write the rendered table here instead of stdout."),
]


def _apply_options(fn):
    for opt in reversed(_shared_options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Compare estimators of order-restricted parameters by Pitman nearness."""


@main.command("table")
@click.argument("table_id", type=int)
@_apply_options
def table_command(table_id, samples, seed, oracle, out, output_file):
    """Reproduce built-in simulation table TABLE_ID (1-6)."""
    try:
        text = run_table(
            table_id,
            n_samples=samples if samples is not None else 10000,
            seed=seed if seed is not None else 42,
            oracle=oracle,
            out=out if out is not None else "md",
        )
    except PitnearError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(_exit_code(e))
    _emit(text, output_file)


@main.command("run")
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@_apply_options
def run_command(config, samples, seed, oracle, out, output_file):
    """Run the comparison sweep described by a JSON CONFIG file."""
    try:
        raw = Path(config).read_text(encoding="utf-8")
        try:
            cfg = json.loads(raw)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {config} is not valid JSON: {e}") from e
        if not isinstance(cfg, dict):
            raise ConfigError("config root must be a JSON object")
        if samples is not None:
            cfg["n_samples"] = samples
        if seed is not None:
            cfg["seed"] = seed
        if oracle:
            cfg["oracle"] = True
        if out is not None:
            cfg["output"] = out
        text = run_config_dict(cfg)
    except PitnearError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(_exit_code(e))
    _emit(text, output_file)


if __name__ == "__main__":
    main()
