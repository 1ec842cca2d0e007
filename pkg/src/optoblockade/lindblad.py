"""Master-equation route: Liouvillian assembly, steady state and moments.

Vectorization is column stacking, vec(A X B) = (B^T kron A) vec(X), so
left multiplication by A is ``I kron A`` and right multiplication by B is
``B^T kron I``. The cavity is the leftmost tensor factor.
"""
from __future__ import annotations

import functools
import json
import math
import struct
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .analytic import Thresholds, classify
from .errors import (ConfigurationError, DegenerateSteadyStateError, DomainError,
                     IterationLimitError, UndefinedCorrelationError, UnphysicalStateError)
from .fock import ComplexOperator, Truncation, annihilation, identity, tensor
from .params import SystemParams, warn_weak_drive
from .perturbative import CorrelationPoint

RESIDUAL_TOL = 1e-10
PSD_TOL = 1e-10
MIN_OCCUPATION = 1e-14


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    data: np.ndarray
    truncation: Truncation

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    def photon_populations(self) -> np.ndarray:
        t = self.truncation
        blocks = self.data.reshape(t.n_a, t.n_b, t.n_a, t.n_b)
        return np.real(np.einsum("imim->i", blocks))

    def phonon_populations(self) -> np.ndarray:
        t = self.truncation
        blocks = self.data.reshape(t.n_a, t.n_b, t.n_a, t.n_b)
        return np.real(np.einsum("imim->m", blocks))

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(0.5 * (self.data + self.data.conj().T))[0])

    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def purity(self) -> float:
        return float(np.real(np.vdot(self.data, self.data)))

    def vec(self) -> np.ndarray:
        return self.data.reshape(-1, order="F")


@dataclass(frozen=True, eq=False)
class Superoperator:
    """Liouvillian acting on column-stacked density matrices.

    ``undriven`` is the same generator with Omega = 0; it serves as the
    preconditioner of the Krylov steady-state solve.
    """

    data: object  # scipy.sparse matrix or dense ndarray
    truncation: Truncation
    params: SystemParams
    undriven: object = None

    @property
    def dim(self) -> int:
        return self.truncation.dim

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.data)

    def __matmul__(self, v: np.ndarray) -> np.ndarray:
        return self.data @ v

    def apply(self, X: np.ndarray) -> np.ndarray:
        d = self.dim
        return (self.data @ X.reshape(-1, order="F")).reshape(d, d, order="F")

    def toarray(self) -> np.ndarray:
        return self.data.toarray() if self.is_sparse else np.asarray(self.data)


def trace_functional(dim: int) -> np.ndarray:
    return np.eye(dim).reshape(-1, order="F")


def spre(A):
    return sp.kron(sp.identity(A.shape[0], format="csr"), A, format="csr")


def spost(A):
    return sp.kron(A.T, sp.identity(A.shape[0], format="csr"), format="csr")


def commutator_super(H):
    return spre(H) - spost(H)


def dissipator(c):
    c = sp.csr_matrix(c)
    cd = c.conj().T.tocsr()
    cdc = (cd @ c).tocsr()
    return spre(c) @ spost(cd) - 0.5 * spre(cdc) - 0.5 * spost(cdc)


def mode_operators(t: Truncation):
    a = tensor(annihilation(t.n_a), identity(t.n_b))
    b = tensor(identity(t.n_a), annihilation(t.n_b))
    return a, b


def build_hamiltonian(p: SystemParams, t: Truncation) -> ComplexOperator:
    a, b = mode_operators(t)
    ad, bd = a.dag(), b.dag()
    n = ad @ a
    x = b + bd
    return (p.delta_c * n + p.omega_m * (bd @ b) + p.g0 * (n @ x)
            + p.G * x + p.Omega * (a + ad))


class LiouvillianTemplate:
    """Parameter-independent superoperator pieces for one truncation.

    The generator is linear in every model parameter, so sweeps only need
    a weighted sum of the cached pieces.
    """

    def __init__(self, t: Truncation):
        self.truncation = t
        a, b = mode_operators(t)
        A = sp.csr_matrix(a.data)
        B = sp.csr_matrix(b.data)
        Ad, Bd = A.conj().T.tocsr(), B.conj().T.tocsr()
        n = (Ad @ A).tocsr()
        x = (B + Bd).tocsr()
        self.num = commutator_super(n)
        self.mech = commutator_super((Bd @ B).tocsr())
        self.coupling = commutator_super((n @ x).tocsr())
        self.pump = commutator_super(x)
        self.drive = commutator_super((A + Ad).tocsr())
        self.loss_c = dissipator(A)
        self.loss_m = dissipator(B)
        self.gain_m = dissipator(Bd)

    def assemble(self, p: SystemParams, include_drive: bool = True):
        coherent = (p.delta_c * self.num + p.omega_m * self.mech + p.g0 * self.coupling
                    + p.G * self.pump)
        if include_drive:
            coherent = coherent + p.Omega * self.drive
        L = -1j * coherent + p.gamma_c * self.loss_c
        if p.gamma_m > 0:
            L = L + p.gamma_m * (p.nbar_m + 1) * self.loss_m
            if p.nbar_m > 0:
                L = L + p.gamma_m * p.nbar_m * self.gain_m
        return L.tocsr()


@functools.lru_cache(maxsize=8)
def template(t: Truncation) -> LiouvillianTemplate:
    return LiouvillianTemplate(t)


def liouvillian(p: SystemParams, t: Truncation = Truncation(), sparse: bool = True) -> Superoperator:
    tpl = template(t)
    L = tpl.assemble(p)
    L0 = tpl.assemble(p, include_drive=False)
    if not sparse:
        return Superoperator(L.toarray(), t, p, undriven=L0)
    return Superoperator(L, t, p, undriven=L0)


def _with_trace_row(M, dim: int):
    """Replace row 0 (the d rho_00/dt equation) by the trace functional."""
    if sp.issparse(M):
        keep = np.ones(M.shape[0])
        keep[0] = 0.0
        diag = np.arange(dim) * (dim + 1)
        tr = sp.csr_matrix((np.ones(dim), (np.zeros(dim, dtype=int), diag)), shape=M.shape)
        return (sp.diags(keep) @ sp.csr_matrix(M) + tr).tocsc()
    M = np.array(M, copy=True)
    M[0, :] = trace_functional(dim)
    return M


def _rhs(dim: int) -> np.ndarray:
    rhs = np.zeros(dim * dim, dtype=complex)
    rhs[0] = 1.0
    return rhs


def _solve_krylov(L: Superoperator):
    if L.undriven is None:
        return None
    d = L.dim
    try:
        lu0 = spla.splu(_with_trace_row(L.undriven, d), permc_spec="COLAMD")
    except RuntimeError:
        return None
    A = _with_trace_row(L.data, d) if L.is_sparse else _with_trace_row(sp.csr_matrix(L.data), d)
    prec = spla.LinearOperator(A.shape, lu0.solve, dtype=complex)
    x, info = spla.gmres(A, _rhs(d), M=prec, rtol=1e-14, atol=0.0, restart=60, maxiter=20)
    if info != 0 or not np.all(np.isfinite(x)):
        return None
    return x


def _solve_direct(L: Superoperator):
    d = L.dim
    A = _with_trace_row(L.data, d)
    try:
        if sp.issparse(A):
            x = spla.splu(A, permc_spec="COLAMD").solve(_rhs(d))
        else:
            with warnings.catch_warnings():
                # singularity is reported through the pivot check below
                warnings.simplefilter("ignore", sla.LinAlgWarning)
                lu, piv = sla.lu_factor(A, check_finite=False)
            if np.min(np.abs(np.diag(lu))) < 1e-14 * np.max(np.abs(np.diag(lu))):
                raise RuntimeError("Factor is exactly singular")
            x = sla.lu_solve((lu, piv), _rhs(d))
    except (RuntimeError, sla.LinAlgError) as exc:
        raise DegenerateSteadyStateError(f"steady state not unique: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise DegenerateSteadyStateError("steady-state solve produced non-finite values")
    return x


def _physical(x: np.ndarray, t: Truncation) -> DensityMatrix:
    d = t.dim
    rho = x.reshape(d, d, order="F")
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.real(np.trace(rho))
    w, V = np.linalg.eigh(rho)
    if w[0] < -PSD_TOL:
        raise UnphysicalStateError(f"density matrix eigenvalue {w[0]:.3e} below -{PSD_TOL}")
    if w[0] < 0:
        w = np.clip(w, 0.0, None)
        rho = (V * w) @ V.conj().T
        rho = 0.5 * (rho + rho.conj().T)
        rho = rho / np.real(np.trace(rho))
    return DensityMatrix(rho, t)


def residual(L: Superoperator, rho: DensityMatrix) -> float:
    return float(np.linalg.norm(L @ rho.vec()))


def steady_state(L: Superoperator, method: str = "auto", tol: float = RESIDUAL_TOL,
                 max_steps: int = 2_000_000) -> DensityMatrix:
    """Unique stationary state of ``L``.

    ``method`` is "auto" (preconditioned GMRES, then LU), "direct" (LU with
    one row replaced by the trace constraint) or "krylov". When the solve
    misses ``tol`` the state is relaxed further by time propagation.
    """
    if method not in ("auto", "direct", "krylov"):
        raise ConfigurationError(f"unknown steady-state method {method!r}")
    x = None
    if method in ("auto", "krylov"):
        x = _solve_krylov(L)
        if x is None and method == "krylov":
            raise IterationLimitError("preconditioned GMRES did not converge")
    if x is None:
        x = _solve_direct(L)
    rho = _physical(x, L.truncation)
    if residual(L, rho) > tol:
        rho = _relax(rho, L, tol, max_steps)
    return rho


def _relax(rho: DensityMatrix, L: Superoperator, tol: float, max_steps: int) -> DensityMatrix:
    dt = max_stable_step(L.params)
    chunk = 1000
    done = 0
    while done < max_steps:
        rho = time_evolve(rho, L, chunk * dt, dt)
        done += chunk
        if residual(L, rho) < min(tol, 1e-12):
            return _physical(rho.vec(), L.truncation)
    raise IterationLimitError(f"time propagation did not reach |L rho| < {tol} in {max_steps} steps")


def max_stable_step(p: SystemParams) -> float:
    return 0.01 / max(p.omega_m, p.gamma_c, abs(p.delta_c))


def time_evolve(rho0: DensityMatrix, L: Superoperator, t_final: float,
                dt: float | None = None) -> DensityMatrix:
    """Classical RK4 integration of d vec(rho)/dt = L vec(rho)."""
    if t_final < 0:
        raise ConfigurationError("t_final must be >= 0")
    bound = max_stable_step(L.params)
    if dt is None:
        dt = t_final / max(1, math.ceil(t_final / bound)) if t_final > 0 else bound
    if dt <= 0 or dt > bound * (1 + 1e-12):
        raise ConfigurationError(f"dt={dt} outside (0, {bound}]")
    steps = int(round(t_final / dt))
    M = L.data
    y = rho0.vec().astype(complex)
    h = dt
    for _ in range(steps):
        k1 = M @ y
        k2 = M @ (y + 0.5 * h * k1)
        k3 = M @ (y + 0.5 * h * k2)
        k4 = M @ (y + h * k3)
        y = y + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    d = L.dim
    return DensityMatrix(y.reshape(d, d, order="F"), L.truncation)


def normal_moments(rho: DensityMatrix, order: int = 3) -> list:
    """<a^dag^k a^k> for k = 1..order (diagonal in the photon Fock basis)."""
    P = rho.photon_populations()
    n = np.arange(P.size, dtype=float)
    out = []
    falling = np.ones_like(n)
    for k in range(order):
        falling = falling * (n - k)
        out.append(float(np.sum(falling * P)))
    return out


def correlations_from_state(rho: DensityMatrix, thresholds: Thresholds = Thresholds()) -> CorrelationPoint:
    m1, m2, m3 = normal_moments(rho, 3)
    if m1 < MIN_OCCUPATION:
        raise UndefinedCorrelationError(f"undefined correlation: <a^dag a> = {m1:.3e}")
    P = rho.photon_populations()
    g2, g3 = m2 / m1 ** 2, m3 / m1 ** 3
    return CorrelationPoint(float(P[1]), float(P[2]), float(P[3]), m1, g2, g3,
                            "master", classify(max(g2, 0.0), max(g3, 0.0), thresholds))


def master_point(p: SystemParams, t: Truncation = Truncation(), method: str = "auto",
                 thresholds: Thresholds = Thresholds()) -> CorrelationPoint:
    warn_weak_drive(p, "master")
    return correlations_from_state(steady_state(liouvillian(p, t), method), thresholds)


def vacuum(t: Truncation) -> DensityMatrix:
    rho = np.zeros((t.dim, t.dim), dtype=complex)
    rho[0, 0] = 1.0
    return DensityMatrix(rho, t)


_MAGIC = b"RHO1"


def dump_density(rho: DensityMatrix, path, params: SystemParams | None = None) -> None:
    """Write rho as magic, u32 header length, JSON header, row-major <f8 (re, im) pairs."""
    header = {"dim": rho.dim, "truncation": rho.truncation.to_dict(),
              "params": params.to_dict() if params is not None else None,
              "layout": "row-major", "dtype": "<f8 complex pairs"}
    blob = json.dumps(header, sort_keys=True).encode()
    pairs = np.ascontiguousarray(rho.data, dtype="<c16")
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(pairs.tobytes(order="C"))


def load_density(path) -> tuple:
    raw = Path(path).read_bytes()
    if raw[:4] != _MAGIC:
        raise DomainError("not a density-matrix dump")
    (n,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8:8 + n])
    d = header["dim"]
    data = np.frombuffer(raw[8 + n:], dtype="<c16").reshape(d, d).astype(complex)
    t = Truncation(**header["truncation"])
    params = SystemParams.from_dict(header["params"]) if header["params"] else None
    return DensityMatrix(data, t), params
