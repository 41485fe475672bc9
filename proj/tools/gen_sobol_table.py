#!/usr/bin/env python3
"""Regenerates src/core/sobol_directions.inc from the Joe-Kuo (new-joe-kuo-6.21201)
direction numbers bundled with scipy."""
import os
import sys

import numpy as np
import scipy

DIMS = int(sys.argv[1]) if len(sys.argv) > 1 else 256

data = np.load(os.path.join(os.path.dirname(scipy.__file__), "stats", "_sobol_direction_numbers.npz"))
poly, vinit = data["poly"], data["vinit"]

out = ["// Generated by tools/gen_sobol_table.py; do not edit.",
       "// Joe-Kuo new-joe-kuo-6.21201 primitive polynomials and initial direction numbers.",
       "// Row j describes dimension j + 2 (dimension 1 is the van der Corput sequence).",
       "// {degree s, coefficient bits a, m_1 .. m_s}",
       f"constexpr std::size_t kSobolTableDims = {DIMS};",
       "constexpr SobolPolynomial kSobolTable[kSobolTableDims - 1] = {"]
for j in range(1, DIMS):
    p = int(poly[j])
    s = p.bit_length() - 1
    a = (p >> 1) & ((1 << (s - 1)) - 1)
    m = ", ".join(str(int(v)) for v in vinit[j, :s])
    out.append(f"    {{{s}, {a}, {{{m}}}}},")
out.append("};")
print("\n".join(out))
