"""
Regenerate the golden JSON reports compared byte-for-byte by the test suite.

Usage:
  python scripts/make_golden.py          # every entry in GOLDEN
  python scripts/make_golden.py a1-approx-m
Review the diff before committing: the files are the reference output.
"""

import io
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from services.job_parser import load_job  # noqa: E402
from services.orchestrator import run  # noqa: E402
from utils.report_writer import emit_report  # noqa: E402

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
FIXTURES = os.path.join(ROOT, "fixtures")
GOLDEN_DIR = os.path.join(ROOT, "tests", "golden")

# name -> (fixture, command, module)
GOLDEN = {
    "a1-approx-m": ("a1.toml", "approx", "m"),
    "a1-canonical": ("a1.toml", "canonical", None),
    "plane-invariants-m": ("plane.toml", "invariants", "m"),
    "cubic-fundamental": ("cubic.toml", "fundamental", None),
}


def render(name: str) -> str:
    fixture, command, module = GOLDEN[name]
    job = load_job(os.path.join(FIXTURES, fixture))
    report = run(job, command, module=module)
    return emit_report(report, "json", stream=io.StringIO())


def main():
    names = sys.argv[1:] or list(GOLDEN)
    os.makedirs(GOLDEN_DIR, exist_ok=True)
    for name in names:
        if name not in GOLDEN:
            print(f"ERROR: unknown golden entry '{name}'. Known: {', '.join(GOLDEN)}")
            return
        out = os.path.join(GOLDEN_DIR, f"{name}.json")
        with open(out, "w", encoding="utf-8") as f:
            f.write(render(name))
        print(f"Wrote {out}")


if __name__ == "__main__":
    main()
