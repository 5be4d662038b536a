#!/usr/bin/env python3
"""Run the ten acceptance criteria and print one line per criterion.

Exit status is 0 only if every criterion passes.
"""
import runpy
import sys
from pathlib import Path

if __name__ == "__main__":
    target = Path(__file__).resolve().parents[1] / "tests" / "test_acceptance.py"
    sys.argv = [str(target)]
    runpy.run_path(str(target), run_name="__main__")
