import argparse
import os
import sys
from pathlib import Path

from xychain.cli import main as xychain


def parser(description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--out-dir", type=Path, default=Path("results"))
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1)
    return p


def run(out_dir: Path, name: str, *argv: str) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / name
    print(f"-> {path}", file=sys.stderr)
    code = xychain([*argv, "--out", str(path)])
    if code:
        raise SystemExit(code)
    return path
