"""Raw words to distributions: the transform layer.

Run: python demos/02_transforms.py
"""

import math

import numpy as np

from rngsentinel import (
    Laplace,
    Mt19937,
    Normal,
    UniformInt,
    UniformReal,
    box_muller,
    sample_stream,
    to_laplace,
    to_uniform_int,
    to_uniform_real,
)

# The canonical unit mapping is word / 2^64; transforms build on it.
print("to_uniform_real(2^62, 10, 14) =", to_uniform_real(2**62, 10.0, 14.0))
print("to_uniform_int(2^64-1, 0, 10) =", to_uniform_int(2**64 - 1, 0, 10))

# Box-Muller turns two uniforms into two independent standard normals.
z0, z1 = box_muller(math.exp(-0.5), 0.0)
print(f"box_muller(e^-1/2, 0) = ({z0:.6f}, {z1:.6f})  (unit radius, angle 0)")

# Laplace by inverse CDF; u = 0.5 lands exactly at +ln 2.
print(f"to_laplace(0.5, 0, 1) = {to_laplace(0.5, 0.0, 1.0):.6f} "
      f"(ln 2 = {math.log(2):.6f})")

# Moment check across 10^5 samples of each family.
for spec in (UniformReal(-2.0, 3.0), Normal(1.0, 2.0),
             Laplace(-1.0, 0.5), UniformInt(0, 10)):
    samples = np.array(sample_stream(Mt19937(1234), spec, 100_000), dtype=float)
    print(f"{spec.describe():22s} mean {samples.mean():+.4f}  "
          f"std {samples.std():.4f}")
