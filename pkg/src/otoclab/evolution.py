"""Exact unitary evolution by spectral decomposition, expectation values,
mean-photon and OTOC time series.

The OTOC is evaluated in two ways: the cheap Schroedinger-picture momentum
variance (production path) and the explicit Heisenberg commutator with the
initial-state projector (expensive, kept as a cross-check oracle).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .errors import DimMismatch, NotHermitian, TruncationGuardError
from .fock import FockDim, hermiticity_defect, quadratures

HERMITICITY_TOL = 1e-12

# Production guard: population above n = D - ceil(D/10) must stay below this,
# otherwise the run is reflecting off the truncation edge of an undersized
# reference rather than showing intended finite-size physics.
TAIL_GUARD_TOL = 1e-6


@dataclass(frozen=True)
class TimeSeries:
    """A real-valued series on a strictly increasing time grid."""

    times: np.ndarray
    values: np.ndarray
    label: str = ""

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-d arrays of equal length")
        if t.size >= 2 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class Propagator:
    """Spectral decomposition H = V diag(L) V^dag enabling exact e^{-iHt}."""

    dim: FockDim
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    _p_op: np.ndarray = field(repr=False, default=None)

    @property
    def momentum(self) -> np.ndarray:
        return self._p_op


def diagonalize(H: np.ndarray) -> Propagator:
    """Diagonalize a Hermitian operator; eigenvalues ascending."""
    defect = hermiticity_defect(H)
    if defect > HERMITICITY_TOL:
        raise NotHermitian(f"relative Hermiticity defect {defect:.3e}")
    lam, V = eigh(H)
    dim = FockDim(H.shape[0] - 1)
    _, P = quadratures(dim)
    return Propagator(dim=dim, eigenvalues=lam, eigenvectors=V, _p_op=P)


def _check_dim(prop: Propagator, psi: np.ndarray):
    if psi.shape[0] != prop.dim.dim:
        raise DimMismatch(f"state dim {psi.shape[0]} != propagator dim {prop.dim.dim}")


def evolve(prop: Propagator, psi0: np.ndarray, t: float) -> np.ndarray:
    """psi(t) = V diag(e^{-i L t}) V^dag psi0."""
    _check_dim(prop, psi0)
    c = prop.eigenvectors.conj().T @ psi0
    return prop.eigenvectors @ (np.exp(-1j * prop.eigenvalues * t) * c)


def evolve_batch(prop: Propagator, psi0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """Columns psi(t_k) for every requested time, one matmul per batch."""
    _check_dim(prop, psi0)
    c = prop.eigenvectors.conj().T @ psi0
    phases = np.exp(-1j * np.outer(prop.eigenvalues, np.asarray(times, dtype=float)))
    return prop.eigenvectors @ (phases * c[:, None])


def expect(state: np.ndarray, M: np.ndarray, check_hermitian: bool = True) -> float:
    """<psi|M|psi> for Hermitian M; the (tiny) imaginary part is discarded."""
    if state.shape[0] != M.shape[0]:
        raise DimMismatch("state/operator dimension mismatch")
    if check_hermitian and hermiticity_defect(M) > HERMITICITY_TOL:
        raise NotHermitian("expect() requires a Hermitian operator")
    val = np.vdot(state, M @ state)
    return float(val.real)


def tail_population(state: np.ndarray, k: int) -> float:
    """Probability mass at photon numbers >= k."""
    if not 0 <= k < state.shape[0]:
        raise IndexError(f"k={k} outside [0, {state.shape[0]})")
    return float(np.sum(np.abs(state[k:]) ** 2))


def _guard_tails(Psi: np.ndarray, times: np.ndarray, label: str):
    D = Psi.shape[0]
    k = D - math.ceil(D / 10)
    tails = np.sum(np.abs(Psi[k:, :]) ** 2, axis=0)
    bad = np.nonzero(tails > TAIL_GUARD_TOL)[0]
    if bad.size:
        i = bad[0]
        raise TruncationGuardError(
            f"{label or 'run'}: tail population {tails[i]:.3e} above n={k} "
            f"at t={times[i]:.6g} exceeds {TAIL_GUARD_TOL}; increase n_p"
        )


def variance_otoc(
    prop: Propagator,
    psi0: np.ndarray,
    times: np.ndarray,
    label: str = "",
    tail_guard: bool = False,
) -> TimeSeries:
    """C(t) = Var[P](t) = <psi(t)|P^2|psi(t)> - <psi(t)|P|psi(t)>^2."""
    times = np.asarray(times, dtype=float)
    Psi = evolve_batch(prop, psi0, times)
    if tail_guard:
        _guard_tails(Psi, times, label)
    PPsi = prop.momentum @ Psi
    exp_p = np.real(np.sum(Psi.conj() * PPsi, axis=0))
    exp_p2 = np.real(np.sum(PPsi.conj() * PPsi, axis=0))
    return TimeSeries(times=times, values=exp_p2 - exp_p**2, label=label)


def commutator_otoc(prop: Propagator, psi0: np.ndarray, P: np.ndarray, t: float) -> float:
    """Brute-force oracle C(t) = <[P(t), V]^dag [P(t), V]> with the projector
    V = |psi0><psi0|, built from explicit dense matrices.

    Deliberately expensive (O(D^3)); kept out of production paths.
    """
    _check_dim(prop, psi0)
    if P.shape[0] != prop.dim.dim:
        raise DimMismatch("operator dim mismatch")
    V = prop.eigenvectors
    U = V @ (np.exp(-1j * prop.eigenvalues * t)[:, None] * V.conj().T)
    P_t = U.conj().T @ P @ U
    proj = np.outer(psi0, psi0.conj())
    comm = P_t @ proj - proj @ P_t
    val = np.vdot(psi0, comm.conj().T @ comm @ psi0)
    return float(val.real)


def photon_series(
    prop: Propagator,
    psi0: np.ndarray,
    times: np.ndarray,
    label: str = "",
    tail_guard: bool = False,
) -> TimeSeries:
    """<a^dag a>(t) on the requested time grid."""
    times = np.asarray(times, dtype=float)
    Psi = evolve_batch(prop, psi0, times)
    if tail_guard:
        _guard_tails(Psi, times, label)
    n = np.arange(prop.dim.dim)
    vals = np.sum(n[:, None] * np.abs(Psi) ** 2, axis=0)
    return TimeSeries(times=times, values=vals, label=label)
