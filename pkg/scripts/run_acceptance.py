#!/usr/bin/env python3
"""Run the acceptance suite and show the per-criterion PASS/FAIL lines.

Usage: python3 scripts/run_acceptance.py [extra pytest args]
"""

import os
import subprocess
import sys

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def main() -> int:
    cmd = [
        sys.executable,
        "-m",
        "pytest",
        os.path.join(ROOT, "tests", "test_acceptance.py"),
        "-s",
        "-q",
        *sys.argv[1:],
    ]
    return subprocess.call(cmd, cwd=ROOT)


if __name__ == "__main__":
    sys.exit(main())
