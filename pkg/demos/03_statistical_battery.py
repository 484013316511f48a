"""The audit battery: Z, KS, chi-square, MonoBit.

Run: python demos/03_statistical_battery.py
"""

import numpy as np

from rngsentinel import (
    CtrCsprng,
    Mt19937,
    Normal,
    UniformReal,
    chi_square_test,
    ks_test,
    monobit_test,
    sample_stream,
    z_test,
)
from rngsentinel.stats import equal_probability_bin_counts, words_to_bits


def show(label, report):
    print(f"{label:34s} stat={report.statistic:8.4f} "
          f"p={report.p_value:8.2e}  {report.verdict.upper()}")


normal = Normal(0.0, 1.0)
honest = sample_stream(Mt19937(2718), normal, 100)
show("KS, honest normal batch", ks_test(honest, normal.cdf))
show("Z, honest normal batch", z_test(honest, 0.0, 1.0))

# The same batch audited against the wrong target fails loudly.
uniform = sample_stream(Mt19937(2719), UniformReal(0.0, 1.0), 100)
show("KS, uniform batch vs normal target", ks_test(uniform, normal.cdf))

# Chi-square over 10 equal-probability bins.
u_spec = UniformReal(0.0, 1.0)
counts, expected = equal_probability_bin_counts(uniform, u_spec.cdf, 10)
show("chi2, uniform batch, 10 bins", chi_square_test(counts, expected))

# MonoBit on a megaword of CSPRNG output.
words = [CtrCsprng().next_word() for _ in range(100_000)]
show("MonoBit, 6.4M csprng bits", monobit_test(words_to_bits(words)))

# Calibration: honest batches warn at about the nominal 1% rate.
rng = np.random.default_rng(7)
warns = sum(ks_test(rng.standard_normal(100), normal.cdf).verdict == "warn"
            for _ in range(2000))
print(f"\nhonest KS warn rate over 2000 batches: {warns / 2000:.4f} "
      "(threshold 0.01)")
