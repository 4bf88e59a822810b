"""Truncated spherical-harmonic basis, harmonic evaluation and exact quadrature.

Modes are enumerated by ``l`` ascending, then ``m`` ascending from ``-l`` to ``l``,
so the flat position of ``(l, m)`` is ``l*l + l + m``. Harmonics carry the
Condon-Shortley phase.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

import numpy as np

from .errors import DomainError

FOUR_PI = 4.0 * np.pi


class ModeIndex(NamedTuple):
    l: int
    m: int

    def is_valid(self) -> bool:
        return self.l >= 0 and abs(self.m) <= self.l


@dataclass(frozen=True)
class BasisSpec:
    l_max: int

    def __post_init__(self):
        if int(self.l_max) != self.l_max or self.l_max < 0:
            raise DomainError(f"l_max must be a non-negative integer, got {self.l_max!r}")

    @property
    def size(self) -> int:
        return (self.l_max + 1) ** 2

    @cached_property
    def modes(self) -> tuple[ModeIndex, ...]:
        return tuple(ModeIndex(l, m) for l in range(self.l_max + 1) for m in range(-l, l + 1))

    @cached_property
    def ls(self) -> np.ndarray:
        out = np.array([md.l for md in self.modes], dtype=int)
        out.flags.writeable = False
        return out

    @cached_property
    def ms(self) -> np.ndarray:
        out = np.array([md.m for md in self.modes], dtype=int)
        out.flags.writeable = False
        return out

    def contains(self, mode: tuple[int, int]) -> bool:
        l, m = mode
        return 0 <= l <= self.l_max and abs(m) <= l

    def index(self, mode: tuple[int, int]) -> int:
        return mode_index(self, mode)


def mode_index(basis: BasisSpec, mode: tuple[int, int]) -> int:
    """Flat position of ``mode`` in the canonical enumeration of ``basis``."""
    l, m = mode
    if not basis.contains((l, m)):
        raise DomainError(f"mode (l={l}, m={m}) is not in the basis with l_max={basis.l_max}")
    return l * l + l + m


@dataclass(frozen=True, eq=False)
class CoeffVector:
    """Complex amplitudes over every mode of a basis (a ket)."""

    basis: BasisSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.size,):
            raise DomainError(
                f"expected {self.basis.size} amplitudes for l_max={self.basis.l_max}, got shape {amps.shape}"
            )
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, basis: BasisSpec) -> CoeffVector:
        return cls(basis, np.zeros(basis.size, dtype=complex))

    @classmethod
    def unit(cls, basis: BasisSpec, mode: tuple[int, int]) -> CoeffVector:
        amps = np.zeros(basis.size, dtype=complex)
        amps[mode_index(basis, mode)] = 1.0
        return cls(basis, amps)

    def __getitem__(self, mode: tuple[int, int]) -> complex:
        return complex(self.amplitudes[mode_index(self.basis, mode)])

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: CoeffVector) -> complex:
        """<self|other>, conjugate-linear in ``self``."""
        if other.basis != self.basis:
            raise DomainError("inner product between kets of different bases")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def normalized(self) -> CoeffVector:
        nrm = self.norm()
        if nrm == 0.0:
            raise DomainError("cannot normalize the zero ket")
        return CoeffVector(self.basis, self.amplitudes / nrm)

    def is_unit(self, tol: float = 1e-12) -> bool:
        return abs(self.norm() ** 2 - 1.0) <= tol


def _legendre_table(l_max: int, cos_t: np.ndarray, sin_t: np.ndarray) -> np.ndarray:
    """Fully normalized associated Legendre values, including the 1/sqrt(4 pi) factor.

    Returns ``P[l, m, ...]`` for ``0 <= m <= l <= l_max`` such that
    ``Y_lm = P[l, m] * exp(i m phi)`` for ``m >= 0``. Condon-Shortley phase included.
    """
    P = np.zeros((l_max + 1, l_max + 1) + cos_t.shape)
    pmm = np.full(cos_t.shape, 1.0 / np.sqrt(FOUR_PI))
    for m in range(l_max + 1):
        if m > 0:
            pmm = -np.sqrt((2 * m + 1) / (2.0 * m)) * sin_t * pmm
        P[m, m] = pmm
        if m + 1 <= l_max:
            P[m + 1, m] = np.sqrt(2 * m + 3.0) * cos_t * pmm
        for l in range(m + 2, l_max + 1):
            a = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            b = np.sqrt(((l - 1.0) ** 2 - m * m) / (4.0 * (l - 1.0) ** 2 - 1.0))
            P[l, m] = a * (cos_t * P[l - 1, m] - b * P[l - 2, m])
    return P


def eval_harmonic(mode: tuple[int, int], theta, phi):
    """Y_lm(theta, phi) with Condon-Shortley phase.

    ``theta`` and ``phi`` may be scalars or broadcastable arrays. The poles are
    handled without special-casing since ``sin(theta)`` is taken directly.
    """
    l, m = mode
    if l < 0 or abs(m) > l:
        raise DomainError(f"invalid harmonic mode (l={l}, m={m})")
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(theta < 0.0) or np.any(theta > np.pi):
        raise DomainError("theta must lie in [0, pi]")
    theta, phi = np.broadcast_arrays(theta, phi)
    P = _legendre_table(l, np.cos(theta), np.sin(theta))
    y = P[l, abs(m)] * np.exp(1j * abs(m) * phi)
    if m < 0:
        y = (-1) ** abs(m) * np.conj(y)
    return complex(y) if y.ndim == 0 else y


def harmonic_table(basis: BasisSpec, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Samples ``Y[mode, i, j] = Y_lm(theta_i, phi_j)`` for every mode of ``basis``."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    P = _legendre_table(basis.l_max, np.cos(theta), np.sin(theta))
    table = np.empty((basis.size, theta.size, phi.size), dtype=complex)
    for k, (l, m) in enumerate(basis.modes):
        y = P[l, abs(m)][:, None] * np.exp(1j * abs(m) * phi)[None, :]
        table[k] = (-1) ** abs(m) * np.conj(y) if m < 0 else y
    return table


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Gauss-Legendre nodes in cos(theta) times a uniform grid in phi.

    ``eq=False`` keeps identity hashing so derived operators can be cached per grid.
    """

    basis: BasisSpec
    n_theta: int
    n_phi: int
    theta_nodes: np.ndarray
    theta_weights: np.ndarray
    phi_nodes: np.ndarray
    harmonic_table: np.ndarray = field(repr=False)

    @property
    def phi_weight(self) -> float:
        return 2.0 * np.pi / self.n_phi

    @cached_property
    def weights(self) -> np.ndarray:
        """Full 2-D quadrature weights, shape (n_theta, n_phi)."""
        w = np.outer(self.theta_weights, np.full(self.n_phi, self.phi_weight))
        w.flags.writeable = False
        return w

    def integrate(self, samples: np.ndarray) -> complex:
        return complex(np.sum(self.weights * samples))


def build_grid(basis: BasisSpec) -> QuadratureGrid:
    """Smallest grid that integrates every product used in this package exactly.

    Integrands reach polynomial degree ``2*l_max + 1`` in cos(theta) and Fourier
    order ``2*l_max + 1`` in phi.
    """
    n_theta = basis.l_max + 2
    n_phi = 2 * basis.l_max + 3
    x, w = np.polynomial.legendre.leggauss(n_theta)
    # leggauss returns ascending x; flip so theta ascends
    x, w = x[::-1].copy(), w[::-1].copy()
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    table = harmonic_table(basis, theta, phi)
    for arr in (theta, w, phi, table):
        arr.flags.writeable = False
    return QuadratureGrid(basis, n_theta, n_phi, theta, w, phi, table)


def _check_grid(grid: QuadratureGrid, basis: BasisSpec) -> None:
    if grid.basis != basis:
        raise DomainError(
            f"grid was built for l_max={grid.basis.l_max}, basis has l_max={basis.l_max}"
        )


def synthesize(coeffs: CoeffVector, grid: QuadratureGrid) -> np.ndarray:
    """Grid samples of sum_lm c_lm Y_lm, shape (n_theta, n_phi)."""
    _check_grid(grid, coeffs.basis)
    return np.tensordot(coeffs.amplitudes, grid.harmonic_table, axes=1)


def analyze(samples: np.ndarray, grid: QuadratureGrid, basis: BasisSpec) -> CoeffVector:
    """Project grid samples onto the basis: c_lm = integral of conj(Y_lm) * samples."""
    _check_grid(grid, basis)
    samples = np.asarray(samples)
    if samples.shape != (grid.n_theta, grid.n_phi):
        raise DomainError(
            f"samples have shape {samples.shape}, grid expects {(grid.n_theta, grid.n_phi)}"
        )
    weighted = grid.weights * samples
    coeffs = np.tensordot(grid.harmonic_table.conj(), weighted, axes=([1, 2], [0, 1]))
    return CoeffVector(basis, coeffs)


def gram_matrix(grid: QuadratureGrid) -> np.ndarray:
    """Quadrature inner products <Y_a, Y_b> for all mode pairs of the grid's basis."""
    Y = grid.harmonic_table.reshape(grid.basis.size, -1)
    w = grid.weights.ravel()
    return (Y.conj() * w) @ Y.T
