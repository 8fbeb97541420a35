"""Packed evaluation tables shared by the compiled and fallback kernels."""

from __future__ import annotations

import numpy as np

# status codes returned by the field kernels
STATUS_OK = 0
STATUS_IN_ZERO_SET = 1
STATUS_INCONSISTENT = 2
STATUS_POLE = 3

# polynomial slots within a SystemTable
SLOT_F = 0
SLOT_D = 1
SLOT_GRAD_F = 2  # n entries, then n entries of grad d


class SystemTable:
    """Flat float64/int64 arrays for the 2 + 2n polynomials of a homotopy.

    Layout: polynomial ``idx`` owns rows ``offsets[idx]:offsets[idx+1]`` of
    ``coeffs`` (double coefficients) and ``exps`` (exponent rows). Term order
    within each polynomial is the canonical graded-lex order, which both
    kernel backends traverse identically.
    """

    __slots__ = ("n", "coeffs", "exps", "offsets", "eps_z", "_py")

    def __init__(self, polys, n: int, eps_z: float):
        if len(polys) != 2 + 2 * n:
            raise ValueError(f"expected {2 + 2 * n} polynomials, got {len(polys)}")
        counts = [len(p.float_terms()) for p in polys]
        total = sum(counts)
        coeffs = np.empty(total, dtype=np.float64)
        exps = np.empty((total, n), dtype=np.int64)
        offsets = np.zeros(len(polys) + 1, dtype=np.int64)
        row = 0
        for i, p in enumerate(polys):
            for c, m in p.float_terms():
                coeffs[row] = c
                exps[row, :] = m
                row += 1
            offsets[i + 1] = row
        self.n = n
        self.coeffs = coeffs
        self.exps = exps
        self.offsets = offsets
        self.eps_z = float(eps_z)
        self._py = None

    def python_terms(self):
        """Per-polynomial list of (coeff, exponents) pairs for the fallback."""
        if self._py is None:
            off = self.offsets.tolist()
            cs = self.coeffs.tolist()
            es = self.exps.tolist()
            self._py = [
                [(cs[k], tuple(es[k])) for k in range(off[i], off[i + 1])]
                for i in range(len(off) - 1)
            ]
        return self._py
