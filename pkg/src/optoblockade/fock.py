"""Truncated Fock-space operators and displaced number-state overlaps.

Convention used throughout the package: D(alpha) = exp(alpha (b^dag - b)).
Overlaps between displaced number states of different photon manifolds are
<l~(n')|k~(n)> = <l| D((n' - n) g0/omega_m) |k>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class ComplexOperator:
    """Dense complex square matrix with tensor-factor dimensions.

    ``dims`` lists the level count of each factor, cavity first; a
    single-mode operator has ``dims == (N,)``.
    """

    data: np.ndarray
    dims: tuple

    def __post_init__(self):
        data = np.asarray(self.data, dtype=complex)
        if data.ndim != 2 or data.shape[0] != data.shape[1]:
            raise DomainError(f"operator must be square, got shape {data.shape}")
        dims = tuple(int(d) for d in self.dims)
        if math.prod(dims) != data.shape[0]:
            raise DomainError(f"dims {dims} inconsistent with matrix size {data.shape[0]}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def dim_a(self) -> int:
        return self.dims[0]

    @property
    def dim_b(self) -> int:
        return self.dims[1] if len(self.dims) > 1 else 1

    def dag(self) -> "ComplexOperator":
        return ComplexOperator(self.data.conj().T, self.dims)

    def trace(self) -> complex:
        return complex(np.trace(self.data))

    def __matmul__(self, other: "ComplexOperator") -> "ComplexOperator":
        if self.dims != other.dims:
            raise DomainError("dimension mismatch")
        return ComplexOperator(self.data @ other.data, self.dims)

    def __add__(self, other: "ComplexOperator") -> "ComplexOperator":
        if self.dims != other.dims:
            raise DomainError("dimension mismatch")
        return ComplexOperator(self.data + other.data, self.dims)

    def __sub__(self, other: "ComplexOperator") -> "ComplexOperator":
        return self + (-1.0) * other

    def __mul__(self, scalar) -> "ComplexOperator":
        return ComplexOperator(scalar * self.data, self.dims)

    __rmul__ = __mul__

    def __repr__(self):
        return f"ComplexOperator(dims={self.dims})"


@dataclass(frozen=True)
class Truncation:
    n_a: int = 6    # photon levels for the master equation
    n_b: int = 12   # phonon levels for the master equation
    m_max: int = 8  # phonon cutoff of the perturbative amplitude sums

    def __post_init__(self):
        if self.n_a < 4:
            raise DomainError("n_a must be >= 4 (three-photon moments need levels 0..3)")
        if self.n_b < 2:
            raise DomainError("n_b must be >= 2")
        if self.m_max < 0:
            raise DomainError("m_max must be >= 0")

    @property
    def dim(self) -> int:
        return self.n_a * self.n_b

    def to_dict(self) -> dict:
        return {"n_a": self.n_a, "n_b": self.n_b, "m_max": self.m_max}


def annihilation(dim: int) -> ComplexOperator:
    if dim < 1:
        raise DomainError("annihilation operator needs dim >= 1")
    return ComplexOperator(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1), (dim,))


def identity(dim: int) -> ComplexOperator:
    if dim < 1:
        raise DomainError("identity needs dim >= 1")
    return ComplexOperator(np.eye(dim), (dim,))


def tensor(lhs: ComplexOperator, rhs: ComplexOperator) -> ComplexOperator:
    """Kronecker product, ``lhs`` as the leftmost (cavity) factor."""
    return ComplexOperator(np.kron(lhs.data, rhs.data), lhs.dims + rhs.dims)


def _laguerre(n: int, a: int, x: float) -> float:
    """Generalized Laguerre L_n^a(x) by upward recurrence in n."""
    if n == 0:
        return 1.0
    prev, cur = 1.0, 1.0 + a - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + a - x) * cur - (j + a) * prev) / (j + 1)
    return cur


def displaced_overlap(l: int, k: int, alpha: float) -> float:
    """<l| exp(alpha (b^dag - b)) |k> for real ``alpha``.

    Uses the Laguerre closed form; factorial ratios go through log-gamma.
    """
    if l < 0 or k < 0:
        raise DomainError("phonon indices must be >= 0")
    if alpha == 0.0:
        return 1.0 if l == k else 0.0
    lo, hi = min(l, k), max(l, k)
    x = alpha * alpha
    # hi > lo: raising (l > k) carries alpha^(l-k), lowering carries (-alpha)^(k-l)
    base = alpha if l >= k else -alpha
    logmag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - 0.5 * x
    power = base ** (hi - lo)
    return math.exp(logmag) * power * _laguerre(lo, hi - lo, x)


def displaced_overlap_first_order(l: int, k: int, alpha: float) -> float:
    """First-order expansion 1 + alpha (b^dag - b) of the displacement."""
    value = 1.0 if l == k else 0.0
    if l == k + 1:
        value += alpha * math.sqrt(k + 1)
    elif l == k - 1:
        value -= alpha * math.sqrt(k)
    return value


def overlap_matrix(dim: int, alpha: float, first_order: bool = False) -> np.ndarray:
    """Table O[l, k] = <l|D(alpha)|k> for l, k < dim."""
    fn = displaced_overlap_first_order if first_order else displaced_overlap
    return np.array([[fn(l, k, alpha) for k in range(dim)] for l in range(dim)])


def displacement_matrix(dim: int, alpha: float) -> ComplexOperator:
    """Matrix exponential of alpha (b^dag - b) on the truncated space (oracle)."""
    b = annihilation(dim).data.real
    return ComplexOperator(expm(alpha * (b.T - b)), (dim,))
