"""Fixture script: the shim installed before any host import intercepts
every mapped path, including calls made by downstream consumer code.

Exits 0 and prints a JSON summary on success.
"""

import json
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# Shim first, before fakeml is imported anywhere.
import pyshim  # noqa: E402

imap = pyshim.InterceptionMap([
    pyshim.InterceptionEntry("fakeml.randn",
                             {"family": "normal", "mu": 0.0, "sigma": 1.0}),
    pyshim.InterceptionEntry("fakeml.rand",
                             {"family": "uniform_real", "a": 0.0, "b": 1.0}),
])
shim = pyshim.install(imap)

# Only now does the host framework get imported, by consumer code.
import fakeml  # noqa: E402

fakeml.seed(77)
weights = fakeml.init_weights(250)   # goes through randn -> intercepted
uniforms = [fakeml.rand() for _ in range(250)]

pyshim.uninstall()

stats = {s["path"]: s for s in shim.stats()}
summary = {
    "weights": len(weights),
    "uniforms": len(uniforms),
    "randn_samples_seen": stats["fakeml.randn"]["samples_seen"],
    "rand_samples_seen": stats["fakeml.rand"]["samples_seen"],
    "randn_reports": stats["fakeml.randn"]["reports"],
    "rand_reports": stats["fakeml.rand"]["reports"],
    "dropped": sum(s["dropped_batches"] for s in stats.values()),
}
print(json.dumps(summary))

ok = (summary["randn_samples_seen"] >= 250
      and summary["rand_samples_seen"] >= 250
      and summary["randn_reports"] >= 2
      and summary["rand_reports"] >= 2
      and summary["dropped"] == 0)
sys.exit(0 if ok else 1)
