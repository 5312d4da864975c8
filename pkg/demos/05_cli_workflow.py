"""
Driving everything from the command line
========================================

The ``fourieropt`` console script wraps the library; this script just calls
it with a small config and lists what it wrote.
"""

# %%

import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())
config = {"de": {"population_size": 12, "max_generations": 10}, "campaign": {"tf": 100.0}}
(work / "config.json").write_text(json.dumps(config))


def run(*args):
    cmd = [sys.executable, "-m", "fourieropt.cli", *args]
    out = subprocess.run(cmd, capture_output=True, text=True)
    print("$ fourieropt", " ".join(args), f"  (exit {out.returncode})")
    print(out.stdout + out.stderr)


run("validate", "--config", str(work / "config.json"))
run("optimize", "--config", str(work / "config.json"), "-K", "2", "--seed", "4",
    "--out", str(work / "opt"))
run("simulate", "--config", str(work / "config.json"),
    "--control", str(work / "opt" / "optimize.json"), "--out", str(work / "sim"))
run("campaign", "--config", str(work / "config.json"), "--k-min", "1", "--k-max", "3",
    "--trials", "2", "--mode", "iterative", "--out", str(work / "camp"))

for path in sorted(work.rglob("*.*")):
    print(path.relative_to(work))
