"""Shared helpers for the experiment scripts."""

import argparse
from pathlib import Path

from otto_squeeze.cli import to_csv


def parser(description: str, default_out: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out", default=f"results/{default_out}", help="CSV output path")
    return p


def save(path: str, header, rows) -> None:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(to_csv(list(header), rows), encoding="utf-8")
    print(f"wrote {out}")
