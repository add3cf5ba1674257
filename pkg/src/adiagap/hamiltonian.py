"""Matrix-free interpolated Hamiltonian over the computational basis.

``H(s) = (1 - s) H_init + s H_problem`` with ``H_init = -sum_i sigma^x_i``
and ``H_problem`` the diagonal Ising operator. Basis state ``x`` is the
integer whose bit ``i`` is vertex ``i``'s indicator, with spin
``s_i = 2 x_i - 1``; single-bit-flip neighbors are then ``x ^ (1 << i)``,
so applying the transverse field is ``n`` strided adds and no explicit
matrix is ever materialized.

The diagonal is evaluated once, exactly: fields and couplings are put
over a common denominator and accumulated in 64-bit integers, so two
basis states have equal problem energy iff their integer energies are
equal. The exact values are kept (``diag_num`` / ``diag_den``) for
degenerate-level grouping; the solver itself uses the float64 rounding.
"""

from __future__ import annotations

import math

import numpy as np

from .reductions import IsingModel

__all__ = ["SystemHamiltonian", "build"]

DEFAULT_MAX_QUBITS = 24
_CHUNK = 1 << 20


class SystemHamiltonian:
    """Immutable H(s) operator data; use :func:`build` to construct.

    Attributes:
        n: Qubit count.
        dim: 2**n.
        diag: Problem energies per basis state, float64.
        diag_num: Exact numerators of the problem energies over
            ``diag_den`` (int64).
        diag_den: Common denominator of all fields and couplings.
        model: The defining Ising model.
    """

    def __init__(self, model: IsingModel, diag_num: np.ndarray, diag_den: int):
        self.model = model
        self.n = model.n
        self.dim = 1 << model.n
        self.diag_num = diag_num
        self.diag_den = diag_den
        self.diag = diag_num / np.float64(diag_den)
        self.diag.setflags(write=False)
        self.diag_num.setflags(write=False)

    def norm_bound(self) -> float:
        """Upper bound on the spectral norm of H(s) for every s in [0, 1]."""
        return max(float(self.n), float(np.max(np.abs(self.diag))))

    def _flip_sum(self, v: np.ndarray) -> np.ndarray:
        """acc[x] = sum_i v[x ^ (1 << i)], the negated transverse-field action."""
        acc = np.zeros(self.dim)
        for i in range(self.n):
            # One fused add per bit: reversing the middle axis pairs each
            # amplitude with its bit-i flip partner.
            v3 = v.reshape(-1, 2, 1 << i)
            a3 = acc.reshape(-1, 2, 1 << i)
            np.add(a3, v3[:, ::-1, :], out=a3)
        return acc

    def _checked(self, v) -> np.ndarray:
        v = np.ascontiguousarray(v, dtype=np.float64)
        if v.shape != (self.dim,):
            raise ValueError(f"state vector must have shape ({self.dim},), got {v.shape}")
        return v

    def apply_h(self, s: float, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """H(s) v = s * (diag * v) - (1 - s) * sum_flips(v)."""
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"interpolation parameter must be in [0, 1], got {s}")
        v = self._checked(v)
        flips = self._flip_sum(v)
        out = np.multiply(self.diag, v, out=out)
        out *= s
        flips *= s - 1.0
        out += flips
        return out

    def apply_dh(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """(H_problem - H_init) v = diag * v + sum_flips(v)."""
        v = self._checked(v)
        flips = self._flip_sum(v)
        out = np.multiply(self.diag, v, out=out)
        out += flips
        return out

    def apply_init(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """H_init v = -sum_flips(v)."""
        v = self._checked(v)
        flips = self._flip_sum(v)
        out = np.multiply(flips, -1.0, out=out)
        return out

    def apply_problem(self, v: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """H_problem v = diag * v."""
        v = self._checked(v)
        return np.multiply(self.diag, v, out=out)


def build(model: IsingModel, max_qubits: int = DEFAULT_MAX_QUBITS) -> SystemHamiltonian:
    """Evaluate the exact problem diagonal and wrap it as an operator.

    Memory for the 2**n diagonal is the binding constraint; n above
    ``max_qubits`` is rejected. Integer accumulation is guarded against
    overflow (the worst-case energy magnitude must fit in int64).
    """
    n = model.n
    if n > max_qubits:
        raise ValueError(f"n={n} exceeds the configured maximum of {max_qubits} qubits")
    den = 1
    for v in model.h:
        den = den * v.denominator // math.gcd(den, v.denominator)
    for _, v in model.coupling_items():
        den = den * v.denominator // math.gcd(den, v.denominator)
    h_num = [int(v * den) for v in model.h]
    j_items = [(i, j, int(v * den)) for (i, j), v in model.coupling_items()]
    worst = sum(abs(x) for x in h_num) + sum(abs(x) for _, _, x in j_items)
    if worst >= 2**62:
        raise OverflowError("field/coupling magnitudes overflow exact int64 evaluation")

    dim = 1 << n
    diag_num = np.empty(dim, dtype=np.int64)
    for lo in range(0, dim, _CHUNK):
        hi = min(lo + _CHUNK, dim)
        idx = np.arange(lo, hi, dtype=np.int64)
        acc = np.zeros(hi - lo, dtype=np.int64)
        for i, hv in enumerate(h_num):
            if hv == 0:
                continue
            bit = (idx >> np.int64(i)) & np.int64(1)
            acc += np.int64(2 * hv) * bit
            acc -= np.int64(hv)
        for i, j, jv in j_items:
            # spins agree iff the XOR bit is zero: s_i s_j = 1 - 2*xor
            xor = ((idx >> np.int64(i)) ^ (idx >> np.int64(j))) & np.int64(1)
            acc -= np.int64(2 * jv) * xor
            acc += np.int64(jv)
        diag_num[lo:hi] = acc
    return SystemHamiltonian(model, diag_num, den)
