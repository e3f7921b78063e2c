"""Truncated single-mode Fock space: ladder operators, quadratures, the two
Hamiltonians, and coherent states.

Conventions: hbar = m = omega = 1, X = (a^dag + a)/sqrt(2),
P = i(a^dag - a)/sqrt(2), beta = (q + i p)/sqrt(2). Operators are dense
complex matrices indexed by photon number.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammainc, gammaln

from .errors import TailTooHeavy

TAIL_TOL = 1e-10


@dataclass(frozen=True)
class FockDim:
    """Truncation of the Fock space: states |0> .. |n_p> are retained."""

    n_p: int

    def __post_init__(self):
        if self.n_p < 1:
            raise ValueError("n_p must be >= 1 (so dim >= 2)")

    @property
    def dim(self) -> int:
        return self.n_p + 1


@dataclass(frozen=True)
class HihoParams:
    """Double-well parameters: V(Q) = -gamma^2 Q^2/4 + g Q^4 + gamma^4/(64 g)."""

    gamma: float
    g: float

    def __post_init__(self):
        if self.gamma <= 0 or self.g <= 0:
            raise ValueError("gamma and g must be positive")


@dataclass(frozen=True)
class CoherentParams:
    """Phase-space center (q, p) of a coherent state."""

    q: float
    p: float
    beta: complex = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta", (self.q + 1j * self.p) / np.sqrt(2))


def make_ladder(dim: FockDim) -> tuple[np.ndarray, np.ndarray]:
    """Annihilation and creation operators: a[n-1, n] = sqrt(n)."""
    D = dim.dim
    a = np.zeros((D, D), dtype=complex)
    n = np.arange(1, D)
    a[n - 1, n] = np.sqrt(n)
    return a, a.conj().T


def quadratures(dim: FockDim) -> tuple[np.ndarray, np.ndarray]:
    """Position and momentum quadratures X = (a^dag + a)/sqrt(2),
    P = i(a^dag - a)/sqrt(2)."""
    a, ad = make_ladder(dim)
    return (ad + a) / np.sqrt(2), 1j * (ad - a) / np.sqrt(2)


def number_op(dim: FockDim) -> np.ndarray:
    return np.diag(np.arange(dim.dim, dtype=float)).astype(complex)


def build_iho(dim: FockDim) -> np.ndarray:
    """Inverted-oscillator Hamiltonian -(a^2 + a^dag^2)/2."""
    a, ad = make_ladder(dim)
    return -(a @ a + ad @ ad) / 2


def build_hiho(dim: FockDim, params: HihoParams) -> np.ndarray:
    """Double-well Hamiltonian
    -(a^dag - a)^2/2 - gamma^2 (a^dag + a)^2/8 + (g/4)(a^dag + a)^4
    + gamma^4/(64 g), including the constant offset."""
    a, ad = make_ladder(dim)
    A = ad - a
    B = ad + a
    B2 = B @ B
    gam, g = params.gamma, params.g
    H = -(A @ A) / 2 - gam**2 * B2 / 8 + (g / 4) * (B2 @ B2)
    H += gam**4 / (64 * g) * np.eye(dim.dim)
    return H


def coherent_tail(mean: float, dim: FockDim) -> float:
    """Poisson mass at photon numbers >= dim for intensity ``mean``.

    Uses the identity P(N >= D) = gammainc(D, mean) (regularized lower
    incomplete gamma), exact and overflow-free.
    """
    if mean == 0.0:
        return 0.0
    return float(gammainc(dim.dim, mean))


def coherent_amplitudes(alpha: complex, dim: FockDim) -> np.ndarray:
    """Untruncated coherent amplitudes c_n = e^{-|alpha|^2/2} alpha^n/sqrt(n!)
    for n < dim, accumulated in the log domain to avoid overflow."""
    D = dim.dim
    mu = abs(alpha) ** 2
    c = np.zeros(D, dtype=complex)
    if mu == 0.0:
        c[0] = 1.0
        return c
    n = np.arange(D)
    log_mag = -mu / 2 + n * np.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    c[:] = np.exp(log_mag + 1j * n * np.angle(alpha))
    return c


def coherent_state(dim: FockDim, cp: CoherentParams) -> np.ndarray:
    """Normalized truncated coherent state centered at (cp.q, cp.p).

    Raises TailTooHeavy when the discarded Poisson tail exceeds 1e-10,
    i.e. the requested center is too far out for this truncation.
    """
    mu = abs(cp.beta) ** 2
    tail = coherent_tail(mu, dim)
    if tail >= TAIL_TOL:
        raise TailTooHeavy(
            f"coherent state at (q={cp.q}, p={cp.p}) has tail {tail:.3e} "
            f">= {TAIL_TOL} beyond n_p={dim.n_p}; increase n_p"
        )
    c = coherent_amplitudes(cp.beta, dim)
    return c / np.linalg.norm(c)


def mean_photon(state: np.ndarray) -> float:
    """<a^dag a> = sum_n n |c_n|^2 on a normalized state."""
    n = np.arange(state.shape[0])
    return float(np.sum(n * np.abs(state) ** 2))


def hermiticity_defect(M: np.ndarray) -> float:
    """max |M - M^dag| relative to max |M| (0 for the zero matrix)."""
    scale = np.max(np.abs(M))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(M - M.conj().T)) / scale)
