"""
Sample tables and the command line
==================================

Export laws to CSV, then recover (u, xi) from the files alone, exactly as the
``reldoppler`` command does.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def reldoppler(*args):
    p = subprocess.run([sys.executable, "-m", "reldoppler", *map(str, args)],
                       capture_output=True, text=True)
    print(f"$ reldoppler {' '.join(map(str, args))}   [exit {p.returncode}]")
    return p


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)
    print(reldoppler("eval", "astar", "--v", 0.6, "--w", 0.8).stdout)

    # %%
    # Dense tables keep the interpolated black boxes accurate to ~1e-10.
    reldoppler("table", "de", "--n-beta", 300, "--output", tmp / "de.csv")
    reldoppler("table", "av", "--n-beta", 300, "--output", tmp / "av.csv")
    report = json.loads(reldoppler("fit", "full", "--input", tmp / "de.csv",
                                   "--op-input", tmp / "av.csv").stdout)
    print("xi =", report["xi"], " residuals", report["residual_max_L"], report["residual_max_op"])

    # %%
    # Length contraction is not a power law in (1 - b)/(1 + b): exit status 1.
    reldoppler("table", "lf", "--output", tmp / "lf.csv")
    print(reldoppler("fit", "exponent", "--input", tmp / "lf.csv").stderr)

    # %%
    # Check reports are JSON; the exit status is the verdict.
    p = reldoppler("check", "R", "--law", "lf", "--op", "av")
    print("worst tuple:", json.loads(p.stdout)["worst_tuple"])
