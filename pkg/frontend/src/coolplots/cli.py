"""`coolplots plot --spec PATH --out DIR`: render panels from a spec file.

Spec grammar: flat key = value blocks separated by blank lines, one block
per panel.  Keys: kind (trajectory | steady-spectrum | noise-sweep |
filter | profile), inputs (comma-separated CSV paths, relative to the
spec file), out (image filename), title, logx/logy (true/false), fit_lo,
fit_hi (slope-fit window for the noise panel), labels (comma-separated).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .panels import KINDS, MissingColumn, PanelSpec, SchemaMismatch, render


def parse_spec(text: str, base: Path, outdir: Path):
    panels = []
    block = {}

    def flush():
        if not block:
            return
        if "kind" not in block or "inputs" not in block or "out" not in block:
            raise ValueError("panel block needs kind, inputs, and out keys")
        panels.append(PanelSpec(
            kind=block["kind"],
            inputs=[base / p.strip() for p in block["inputs"].split(",")],
            out=outdir / block["out"],
            title=block.get("title", ""),
            logx=block.get("logx", "false").lower() == "true",
            logy=block.get("logy", "true").lower() == "true",
            fit_lo=float(block["fit_lo"]) if "fit_lo" in block else None,
            fit_hi=float(block["fit_hi"]) if "fit_hi" in block else None,
            labels=[s.strip() for s in block.get("labels", "").split(",") if s.strip()],
        ))

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            flush()
            block = {}
            continue
        if line.startswith("#"):
            continue
        key, _, val = line.partition("=")
        block[key.strip()] = val.split("#")[0].strip()
    flush()
    if not panels:
        raise ValueError("spec file defines no panels")
    return panels


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="coolplots")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plot")
    p.add_argument("--spec", required=True, help="panel spec file")
    p.add_argument("--out", default="plots", help="output directory")
    args = parser.parse_args(argv)

    spec_path = Path(args.spec)
    try:
        panels = parse_spec(spec_path.read_text(), spec_path.parent, Path(args.out))
        for panel in panels:
            path = render(panel)
            print(f"wrote {path}")
        return 0
    except (SchemaMismatch, MissingColumn, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
