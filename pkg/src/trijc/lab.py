"""Experiment driver: parameter sweeps, config parsing, CSV emission, presets.

A sweep evaluates requested quantities of the reduced atomic state over a
grid of dimensionless times ``gt``, optionally for several parameter
settings (one CSV "curve" per setting).  Settings come from zipped value
lists: every ``vary`` entry must have the same length, and setting ``i``
takes the i-th value of each varied parameter.

Config files are plain UTF-8 ``key = value`` lines with ``#`` comments:

    alpha = 0.95
    gt_end = 6.283185307179586
    gt_steps = 200
    vary = alpha: 0.95, 0.92, 0.90
    vary = gamma: 0.95, 0.92, 0.90
    outputs = gme_abc, neg_bc

CSV columns are ``setting_id, alpha, gamma, beta, kappa, gt`` followed by
one column per requested quantity; criteria expand to lhs/rhs/violated
triples and ``elements`` to re/im pairs of the ten tracked coherences.
Numbers are rendered with 12 significant digits, rows are newline
terminated, and two runs of the same spec produce byte-identical output.
"""

from __future__ import annotations

import io
import math
import sys
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import evolve, reduce
from .entanglement import (
    TRACKED_ELEMENTS,
    b_block_coherence,
    biseparability_criteria,
    negativity,
)
from .states import INV_SQRT2, JCConfig, assemble_initial
from .witness import ppt_mixture_measure

TWO_PI = 2.0 * math.pi

VARIABLE_PARAMETERS = ("alpha", "gamma", "beta", "kappa")

QUANTITIES = (
    "gme_abc",
    "neg_ab",
    "neg_bc",
    "neg_ac",
    "crit13",
    "crit14",
    "crit15",
    "elements",
    "b_coherence",
)

_ELEMENT_ORDER = tuple(TRACKED_ELEMENTS.keys())

_QUANTITY_COLUMNS = {
    "gme_abc": ("gme_abc",),
    "neg_ab": ("neg_ab",),
    "neg_bc": ("neg_bc",),
    "neg_ac": ("neg_ac",),
    "crit13": (
        "crit13_lhs",
        "crit13_rhs",
        "crit13_violated",
        "crit13alt_lhs",
        "crit13alt_rhs",
        "crit13alt_violated",
    ),
    "crit14": ("crit14_lhs", "crit14_rhs", "crit14_violated"),
    "crit15": ("crit15_lhs", "crit15_rhs", "crit15_violated"),
    "elements": tuple(
        col for name in _ELEMENT_ORDER for col in (f"re_{name}", f"im_{name}")
    ),
    "b_coherence": ("b_coherence",),
}


class ConfigError(ValueError):
    """Malformed or invalid sweep configuration."""


class SweepError(RuntimeError):
    """A sweep row failed; the message identifies setting and gt."""


@dataclass(frozen=True)
class SweepSpec:
    """Base configuration, gt grid, varied parameters, requested outputs."""

    base: JCConfig = JCConfig()
    gt_start: float = 0.0
    gt_end: float = TWO_PI
    gt_steps: int = 200
    varied: tuple[tuple[str, tuple[float, ...]], ...] = ()
    outputs: tuple[str, ...] = ("gme_abc",)

    def __post_init__(self):
        if self.gt_steps < 2:
            raise ConfigError(f"gt_steps must be >= 2, got {self.gt_steps}")
        if not self.gt_start < self.gt_end:
            raise ConfigError(
                f"gt grid needs gt_start < gt_end, got [{self.gt_start}, {self.gt_end}]"
            )
        seen = set()
        lengths = set()
        for name, values in self.varied:
            if name not in VARIABLE_PARAMETERS:
                raise ConfigError(
                    f"cannot vary {name!r}; choose from {VARIABLE_PARAMETERS}"
                )
            if name in seen:
                raise ConfigError(f"parameter {name!r} varied twice")
            seen.add(name)
            if not values:
                raise ConfigError(f"empty value list for varied parameter {name!r}")
            lengths.add(len(values))
        if len(lengths) > 1:
            raise ConfigError(
                f"varied value lists must have equal lengths, got {sorted(lengths)}"
            )
        if not self.outputs:
            raise ConfigError("no outputs requested")
        for q in self.outputs:
            if q not in QUANTITIES:
                raise ConfigError(f"unknown output {q!r}; choose from {QUANTITIES}")
        if len(set(self.outputs)) != len(self.outputs):
            raise ConfigError("duplicate outputs requested")

    def settings(self) -> list[JCConfig]:
        if not self.varied:
            return [self.base]
        count = len(self.varied[0][1])
        out = []
        for i in range(count):
            cfg = self.base
            for name, values in self.varied:
                cfg = replace(cfg, **{name: values[i]})
            out.append(cfg)
        return out

    def gt_grid(self) -> np.ndarray:
        return np.linspace(self.gt_start, self.gt_end, self.gt_steps)

    def columns(self) -> tuple[str, ...]:
        cols = ["setting_id", "alpha", "gamma", "beta", "kappa", "gt"]
        for q in self.outputs:
            cols.extend(_QUANTITY_COLUMNS[q])
        return tuple(cols)


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    columns: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def column(self, name: str) -> np.ndarray:
        try:
            j = self.columns.index(name)
        except ValueError:
            raise KeyError(f"no column {name!r} in {self.columns}") from None
        return np.array([row[j] for row in self.rows])

    def setting_rows(self, setting_id: int) -> "SweepResult":
        j = self.columns.index("setting_id")
        kept = tuple(r for r in self.rows if int(r[j]) == setting_id)
        return SweepResult(self.spec, self.columns, kept)


def _evaluate_row(cfg: JCConfig, gt: float, outputs: tuple[str, ...]) -> list[float]:
    rho_t = evolve(assemble_initial(cfg), gt)
    abc = reduce(rho_t, ("A", "B", "C"))
    values: list[float] = []
    crit = None
    for q in outputs:
        if q == "gme_abc":
            values.append(ppt_mixture_measure(abc).genuine_negativity)
        elif q in ("neg_ab", "neg_bc", "neg_ac"):
            pair = {"neg_ab": ("A", "B"), "neg_bc": ("B", "C"), "neg_ac": ("A", "C")}[q]
            rho_pair = reduce(rho_t, pair)
            values.append(negativity(rho_pair, ((pair[0],), (pair[1],))))
        elif q in ("crit13", "crit14", "crit15"):
            if crit is None:
                crit = biseparability_criteria(abc)
            if q == "crit13":
                values.extend(
                    (
                        crit.ghz_lhs,
                        crit.ghz_rhs,
                        float(crit.ghz_violated),
                        crit.ghz27_lhs,
                        crit.ghz27_rhs,
                        float(crit.ghz27_violated),
                    )
                )
            elif q == "crit14":
                values.extend((crit.w_lhs, crit.w_rhs, float(crit.w_violated)))
            else:
                values.extend(
                    (crit.fullsep_lhs, crit.fullsep_rhs, float(crit.fullsep_violated))
                )
        elif q == "elements":
            if crit is None:
                crit = biseparability_criteria(abc)
            for name in _ELEMENT_ORDER:
                el = crit.tracked[name]
                values.extend((el.real, el.imag))
        elif q == "b_coherence":
            values.append(b_block_coherence(abc))
        else:  # pragma: no cover - guarded by SweepSpec validation
            raise ConfigError(f"unknown output {q!r}")
    return values


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Evaluate the sweep; rows ordered by (setting index, gt), deterministic."""
    rows: list[tuple[float, ...]] = []
    grid = spec.gt_grid()
    for sid, cfg in enumerate(spec.settings()):
        for gt in grid:
            try:
                values = _evaluate_row(cfg, float(gt), spec.outputs)
            except Exception as exc:
                raise SweepError(
                    f"sweep failed at setting {sid} "
                    f"(alpha={cfg.alpha}, gamma={cfg.gamma}, beta={cfg.beta}, "
                    f"kappa={cfg.kappa}), gt={float(gt):.6g}: {exc}"
                ) from exc
            row = [
                float(sid),
                cfg.alpha,
                cfg.gamma,
                cfg.beta,
                cfg.kappa,
                float(gt),
            ] + values
            rows.append(tuple(row))
    return SweepResult(spec=spec, columns=spec.columns(), rows=tuple(rows))


# ---------------------------------------------------------------------------
# CSV emission
# ---------------------------------------------------------------------------


def _format_number(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return format(x, ".12g")


def emit_csv(result: SweepResult, destination) -> int:
    """Write the result table as CSV; returns the byte count written.

    ``destination`` may be a path, ``"-"`` for standard output, or any
    object with a ``write`` method.  Formatting is locale independent:
    comma separators, newline-terminated rows, 12 significant digits.
    """
    if not result.rows:
        raise ValueError("refusing to emit an empty result table")
    buf = io.StringIO()
    buf.write(",".join(result.columns))
    buf.write("\n")
    for row in result.rows:
        buf.write(",".join(_format_number(v) for v in row))
        buf.write("\n")
    text = buf.getvalue()
    data = text.encode("utf-8")
    if destination == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
    elif isinstance(destination, (str, bytes)):
        with open(destination, "wb") as fh:
            fh.write(data)
    elif hasattr(destination, "write"):
        wrote = destination.write(text)
        if wrote is None and hasattr(destination, "flush"):
            destination.flush()
    else:
        raise TypeError(f"cannot write CSV to {type(destination).__name__}")
    return len(data)


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

_SCALAR_KEYS = {
    "alpha": float,
    "gamma": float,
    "beta": float,
    "kappa": float,
    "fock_dim": int,
    "gt_start": float,
    "gt_end": float,
    "gt_steps": int,
}


def parse_config(text: str) -> SweepSpec:
    """Parse the documented key = value format into a validated SweepSpec."""
    scalars: dict[str, float | int] = {}
    varied: list[tuple[str, tuple[float, ...]]] = []
    outputs: tuple[str, ...] | None = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if key in _SCALAR_KEYS:
            if key in scalars:
                raise ConfigError(f"line {lineno}: duplicate key {key!r}")
            try:
                scalars[key] = _SCALAR_KEYS[key](value)
            except ValueError:
                raise ConfigError(
                    f"line {lineno}: cannot parse {value!r} as {_SCALAR_KEYS[key].__name__} for {key!r}"
                ) from None
        elif key == "vary":
            name, colon, rest = value.partition(":")
            name = name.strip().lower()
            if not colon:
                raise ConfigError(
                    f"line {lineno}: vary syntax is 'vary = <param>: v1, v2, ...'"
                )
            try:
                vals = tuple(float(v) for v in rest.split(",") if v.strip())
            except ValueError:
                raise ConfigError(f"line {lineno}: cannot parse vary values {rest!r}") from None
            varied.append((name, vals))
        elif key == "outputs":
            if outputs is not None:
                raise ConfigError(f"line {lineno}: duplicate key 'outputs'")
            outputs = tuple(v.strip() for v in value.split(",") if v.strip())
        else:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")

    try:
        base = JCConfig(
            alpha=scalars.get("alpha", 0.95),
            gamma=scalars.get("gamma", 0.95),
            beta=scalars.get("beta", INV_SQRT2),
            kappa=scalars.get("kappa", INV_SQRT2),
            fock_dim=int(scalars.get("fock_dim", 3)),
        )
        return SweepSpec(
            base=base,
            gt_start=float(scalars.get("gt_start", 0.0)),
            gt_end=float(scalars.get("gt_end", TWO_PI)),
            gt_steps=int(scalars.get("gt_steps", 200)),
            varied=tuple(varied),
            outputs=outputs if outputs is not None else ("gme_abc",),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# ---------------------------------------------------------------------------
# Canned studies
# ---------------------------------------------------------------------------

_FIG_CURVE_VALUES = (0.95, 0.92, 0.90)


def _preset_base(
    alpha=None, gamma=None, beta=None, kappa=None, fock_dim=None, **fixed
) -> JCConfig:
    kwargs = dict(fixed)
    if alpha is not None:
        kwargs["alpha"] = alpha
    if gamma is not None:
        kwargs["gamma"] = gamma
    if beta is not None:
        kwargs["beta"] = beta
    if kappa is not None:
        kwargs["kappa"] = kappa
    if fock_dim is not None:
        kwargs["fock_dim"] = fock_dim
    return JCConfig(**kwargs)


def _grid_kwargs(gt_steps, gt_end):
    out = {}
    if gt_steps is not None:
        out["gt_steps"] = gt_steps
    if gt_end is not None:
        out["gt_end"] = gt_end
    return out


def fig2_spec(
    alpha=None, gamma=None, beta=None, kappa=None, fock_dim=None, gt_steps=None, gt_end=None
) -> SweepSpec:
    """Genuine negativity of the three atoms, one curve per (alpha, gamma).

    Overriding alpha or gamma collapses the preset to a single curve at the
    given values.
    """
    base = _preset_base(alpha, gamma, beta, kappa, fock_dim)
    varied = ()
    if alpha is None and gamma is None:
        varied = (
            ("alpha", _FIG_CURVE_VALUES),
            ("gamma", _FIG_CURVE_VALUES),
        )
    return SweepSpec(
        base=base, varied=varied, outputs=("gme_abc",), **_grid_kwargs(gt_steps, gt_end)
    )


def fig3_spec(
    alpha=None, gamma=None, beta=None, kappa=None, fock_dim=None, gt_steps=None, gt_end=None
) -> SweepSpec:
    """Pairwise atomic negativities, one curve per (alpha, gamma)."""
    base = _preset_base(alpha, gamma, beta, kappa, fock_dim)
    varied = ()
    if alpha is None and gamma is None:
        varied = (
            ("alpha", _FIG_CURVE_VALUES),
            ("gamma", _FIG_CURVE_VALUES),
        )
    return SweepSpec(
        base=base,
        varied=varied,
        outputs=("neg_bc", "neg_ac", "neg_ab"),
        **_grid_kwargs(gt_steps, gt_end),
    )


def classical_spec(
    alpha=None, gamma=None, beta=None, kappa=None, fock_dim=None, gt_steps=None, gt_end=None
) -> SweepSpec:
    """Classical-correlation case alpha = gamma = 0: tracked elements and criteria."""
    base = _preset_base(
        alpha if alpha is not None else 0.0,
        gamma if gamma is not None else 0.0,
        beta,
        kappa,
        fock_dim,
    )
    return SweepSpec(
        base=base,
        outputs=(
            "elements",
            "crit13",
            "crit14",
            "crit15",
            "b_coherence",
            "neg_ab",
            "neg_bc",
            "neg_ac",
        ),
        **_grid_kwargs(gt_steps, gt_end),
    )


def qcorr_spec(
    alpha=None, gamma=None, beta=None, kappa=None, fock_dim=None, gt_steps=None, gt_end=None
) -> SweepSpec:
    """Quantum-correlated-but-unentangled case alpha = gamma = 0.3."""
    base = _preset_base(
        alpha if alpha is not None else 0.3,
        gamma if gamma is not None else 0.3,
        beta,
        kappa,
        fock_dim,
    )
    return SweepSpec(
        base=base,
        outputs=("gme_abc", "crit13", "crit14", "crit15", "neg_ab", "neg_bc", "neg_ac"),
        **_grid_kwargs(gt_steps, gt_end),
    )


PRESETS = {
    "fig2": fig2_spec,
    "fig3": fig3_spec,
    "classical": classical_spec,
    "qcorr": qcorr_spec,
}


# ---------------------------------------------------------------------------
# Companion plot script
# ---------------------------------------------------------------------------

_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Plot quantities from {csv_path!r} against gt, one line per setting."""
import csv
from collections import defaultdict

import matplotlib.pyplot as plt

CSV_PATH = {csv_path!r}
QUANTITY_COLUMNS = {quantity_columns!r}

with open(CSV_PATH, newline="") as fh:
    reader = csv.DictReader(fh)
    rows = [{{k: float(v) for k, v in row.items()}} for row in reader]

by_setting = defaultdict(list)
for row in rows:
    by_setting[int(row["setting_id"])].append(row)

fig, axes = plt.subplots(len(QUANTITY_COLUMNS), 1, sharex=True, squeeze=False,
                         figsize=(7, 2.6 * len(QUANTITY_COLUMNS)))
for ax, col in zip(axes[:, 0], QUANTITY_COLUMNS):
    for sid, srows in sorted(by_setting.items()):
        label = "alpha={{:.3g}} gamma={{:.3g}}".format(srows[0]["alpha"], srows[0]["gamma"])
        ax.plot([r["gt"] for r in srows], [r[col] for r in srows], label=label)
    ax.set_ylabel(col)
    ax.grid(True, alpha=0.3)
axes[0, 0].legend()
axes[-1, 0].set_xlabel("gt")
fig.tight_layout()
fig.savefig({png_path!r}, dpi=160)
print("wrote", {png_path!r})
'''


def emit_plot_script(result: SweepResult, csv_path: str, script_path: str) -> None:
    """Write a self-contained matplotlib script that plots the emitted CSV."""
    plot_cols = [
        c
        for c in result.columns
        if c not in ("setting_id", "alpha", "gamma", "beta", "kappa", "gt")
        and not c.endswith("_violated")
    ]
    png_path = csv_path + ".png"
    script = _PLOT_TEMPLATE.format(
        csv_path=csv_path, quantity_columns=plot_cols, png_path=png_path
    )
    with open(script_path, "w", encoding="utf-8") as fh:
        fh.write(script)
