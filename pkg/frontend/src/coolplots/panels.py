"""Figure-style panels rendered from engine CSV outputs.

This package is a pure consumer of the schema-versioned CSV files the
engine CLI emits; it never recomputes physics.  A panel spec names the
input CSVs, the panel kind, axis scales, and the output image:

    kind = trajectory | steady-spectrum | noise-sweep | filter | profile

Line conventions follow the source tag in the CSV header: kinetic data is
drawn dashed, exact (gaussian) data solid.  Slope annotations on the
noise-sweep panel are least-squares fits over the requested decade of the
data itself.  Rendering is deterministic: fixed style, no timestamps, and
stripped PNG metadata.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

SUPPORTED_SCHEMA = 1

KINDS = ("trajectory", "steady-spectrum", "noise-sweep", "filter", "profile")


class SchemaMismatch(Exception):
    """CSV schema version is missing or unsupported."""


class MissingColumn(Exception):
    """A required column is absent from the input CSV."""


@dataclass
class Table:
    meta: dict
    columns: List[str]
    data: np.ndarray  # float columns; text columns kept in `text`
    text: dict

    def col(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise MissingColumn(f"column {name!r} not in {self.columns}")
        if name in self.text:
            return self.text[name]
        return self.data[:, self.columns.index(name)]


def read_table(path) -> Table:
    meta = {}
    columns = None
    rows = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        if line.startswith("#"):
            key, _, val = line[1:].partition(":")
            meta[key.strip()] = val.strip()
            continue
        if columns is None:
            columns = line.split(",")
            continue
        rows.append(line.split(","))
    if meta.get("schema_version") != str(SUPPORTED_SCHEMA):
        raise SchemaMismatch(
            f"{path}: schema_version {meta.get('schema_version')!r}, "
            f"supported {SUPPORTED_SCHEMA}")
    if columns is None or not rows:
        raise MissingColumn(f"{path}: no header or no data rows")
    text = {}
    numeric = np.zeros((len(rows), len(columns)))
    for c, name in enumerate(columns):
        vals = [r[c] for r in rows]
        try:
            numeric[:, c] = [float(v) if v != "" else np.nan for v in vals]
        except ValueError:
            text[name] = np.array(vals)
    return Table(meta=meta, columns=columns, data=numeric, text=text)


@dataclass
class PanelSpec:
    kind: str
    inputs: List[Path]
    out: Path
    title: str = ""
    logx: bool = False
    logy: bool = True
    fit_lo: Optional[float] = None   # noise-sweep slope-fit decade
    fit_hi: Optional[float] = None
    labels: List[str] = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown panel kind {self.kind!r}")


def _style(source: str):
    return {"kinetic": {"ls": "--"}, "gaussian": {"ls": "-"}}.get(source, {"ls": "-"})


def _save(fig, out: Path):
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=110, metadata={"Software": None})
    plt.close(fig)


def render(panel: PanelSpec) -> Path:
    """Render one panel; returns the written image path."""
    fig, ax = plt.subplots(figsize=(4.6, 3.4), constrained_layout=True)

    if panel.kind == "trajectory":
        for i, path in enumerate(panel.inputs):
            t = read_table(path)
            label = panel.labels[i] if i < len(panel.labels) else Path(path).stem
            ax.plot(t.col("t_rescaled"), t.col("density"),
                    label=label, **_style(t.meta.get("source", "")))
        ax.set_xlabel("t = cycles * theta^2")
        ax.set_ylabel("quasiparticle density")

    elif panel.kind == "steady-spectrum":
        for i, path in enumerate(panel.inputs):
            t = read_table(path)
            label = panel.labels[i] if i < len(panel.labels) else Path(path).stem
            order = np.argsort(t.col("eps_k"))
            ax.plot(t.col("eps_k")[order], t.col("n_inf")[order], marker="o",
                    ms=3, label=label, **_style(t.meta.get("source", "")))
        ax.set_xlabel("quasienergy eps_k")
        ax.set_ylabel("steady occupation n_k")

    elif panel.kind == "noise-sweep":
        t = read_table(panel.inputs[0])
        x = t.col("gamma_over_theta2")
        y = t.col("n_inf")
        sizes = t.col("N_S").astype(int)
        phases = t.col("phase")
        for phase in dict.fromkeys(phases):
            for n in dict.fromkeys(sizes[phases == phase]):
                m = (phases == phase) & (sizes == n)
                ax.plot(x[m], y[m], marker="o", ms=3, label=f"{phase} N={n}")
                if panel.fit_lo is not None and panel.fit_hi is not None:
                    w = m & (x >= panel.fit_lo) & (x <= panel.fit_hi) & (y > 0)
                    if np.count_nonzero(w) >= 2:
                        slope, icpt = np.polyfit(np.log(x[w]), np.log(y[w]), 1)
                        xs = np.array([panel.fit_lo, panel.fit_hi])
                        ax.plot(xs, np.exp(icpt) * xs**slope, color="k",
                                lw=0.8, alpha=0.6)
                        ax.annotate(f"slope {slope:.2f}",
                                    (xs[1], np.exp(icpt) * xs[1]**slope),
                                    fontsize=7)
        ax.set_xscale("log")
        ax.set_xlabel("gamma / theta^2")
        ax.set_ylabel("steady density n_inf")

    elif panel.kind == "filter":
        for i, path in enumerate(panel.inputs):
            t = read_table(path)
            label = panel.labels[i] if i < len(panel.labels) else Path(path).stem
            ax.plot(t.col("eps"), t.col("abs_F"), label=label,
                    ls="-" if i == 0 else "--")
        ax.set_xlabel("quasienergy eps")
        ax.set_ylabel("|F(eps)|")
        panel.logy = False

    elif panel.kind == "profile":
        for i, path in enumerate(panel.inputs):
            t = read_table(path)
            n_modes = t.col("mode_index").size
            label = panel.labels[i] if i < len(panel.labels) else f"N={n_modes}"
            eps = t.col("eps_k")
            order = np.argsort(eps)
            ax.plot(eps[order], (n_modes * t.col("u1_abs2"))[order],
                    ls="-", label=f"{label} u")
            ax.plot(eps[order], (n_modes * t.col("v1_abs2"))[order],
                    ls="--", label=f"{label} v")
        ax.set_xlabel("quasienergy eps_k")
        ax.set_ylabel("N * |edge overlap|^2")
        panel.logy = False

    if panel.logy:
        ax.set_yscale("log")
    if panel.logx and panel.kind != "noise-sweep":
        ax.set_xscale("log")
    if panel.title:
        ax.set_title(panel.title, fontsize=9)
    ax.legend(fontsize=6, frameon=False)
    _save(fig, panel.out)
    return panel.out
