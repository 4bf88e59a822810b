"""Matrix realizations of the angular-momentum, direction and l-shift operators.

Every operator is the honest restriction ``P A P`` of the infinite operator to
the truncated basis ``l <= l_max``; nothing is added above the cutoff. With
hbar = 1 the full shift operators are

    R = i N x L + N (sqrt(4 L^2 + 1) + 1) / 2
    Q = i N x L - N (sqrt(4 L^2 + 1) - 1) / 2

where the function of ``L^2`` acts on the ket before ``N`` does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable

import numpy as np

from .basis import BasisSpec, CoeffVector, ModeIndex, QuadratureGrid, _check_grid, mode_index
from .errors import ConsistencyError, DomainError, NumericDomainError

BAND_TOL = 1e-12

COMPONENTS = ("z", "plus", "minus")
M_SHIFT = {"z": 0, "plus": 1, "minus": -1}
ORDERINGS = ("spectral-first", "spectral-last")


@dataclass(frozen=True)
class Band:
    """Allowed (row - column) shifts of l and m for nonzero entries."""

    l_shifts: frozenset[int]
    m_shifts: frozenset[int]

    @classmethod
    def of(cls, l_shifts: Iterable[int], m_shifts: Iterable[int]) -> Band:
        return cls(frozenset(l_shifts), frozenset(m_shifts))

    def compose(self, other: Band) -> Band:
        """Band of ``self @ other``."""
        return Band.of(
            {a + b for a in self.l_shifts for b in other.l_shifts},
            {a + b for a in self.m_shifts for b in other.m_shifts},
        )

    def union(self, other: Band) -> Band:
        return Band(self.l_shifts | other.l_shifts, self.m_shifts | other.m_shifts)

    def negate(self) -> Band:
        return Band.of({-s for s in self.l_shifts}, {-s for s in self.m_shifts})

    def max_l_shift(self) -> int:
        return max((abs(s) for s in self.l_shifts), default=0)

    def mask(self, basis: BasisSpec) -> np.ndarray:
        dl = basis.ls[:, None] - basis.ls[None, :]
        dm = basis.ms[:, None] - basis.ms[None, :]
        return np.isin(dl, list(self.l_shifts)) & np.isin(dm, list(self.m_shifts))


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Complex matrix over a truncated basis, rows and columns in canonical mode order.

    Storage is a dense ndarray: at the sizes used here (a few hundred modes) that
    is faster and simpler than a sparse format, and products stay deterministic.
    ``entries()`` gives the sparse view.
    """

    basis: BasisSpec
    matrix: np.ndarray = field(repr=False)
    band: Band | None = None
    lossy_columns: tuple[int, ...] = ()

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        n = self.basis.size
        if mat.shape != (n, n):
            raise DomainError(f"operator matrix has shape {mat.shape}, basis needs {(n, n)}")
        mat.flags.writeable = False
        object.__setattr__(self, "matrix", mat)

    def validated(self, tol: float = BAND_TOL) -> SparseOperator:
        """Return ``self`` after checking that no entry above ``tol`` escapes the band.

        Builders call this on their output. Arithmetic results carry the composed
        band unchecked, since products scale rounding noise by the entry sizes.
        """
        worst = self.band_violation()
        if worst > tol:
            raise ConsistencyError(
                f"entry of magnitude {worst:.3e} lies outside the declared band {self.band}"
            )
        return self

    def band_violation(self, band: Band | None = None) -> float:
        band = band or self.band
        if band is None:
            return 0.0
        outside = np.abs(self.matrix[~band.mask(self.basis)])
        return float(outside.max()) if outside.size else 0.0

    def _same_basis(self, other: SparseOperator) -> None:
        if other.basis != self.basis:
            raise DomainError(
                f"basis mismatch: l_max={self.basis.l_max} vs l_max={other.basis.l_max}"
            )

    def __matmul__(self, other):
        if isinstance(other, CoeffVector):
            return self.apply(other)
        self._same_basis(other)
        band = None
        if self.band is not None and other.band is not None:
            band = self.band.compose(other.band)
        return SparseOperator(self.basis, self.matrix @ other.matrix, band)

    def _combine(self, other: SparseOperator, mat: np.ndarray) -> SparseOperator:
        band = None
        if self.band is not None and other.band is not None:
            band = self.band.union(other.band)
        return SparseOperator(self.basis, mat, band)

    def __add__(self, other: SparseOperator) -> SparseOperator:
        self._same_basis(other)
        return self._combine(other, self.matrix + other.matrix)

    def __sub__(self, other: SparseOperator) -> SparseOperator:
        self._same_basis(other)
        return self._combine(other, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> SparseOperator:
        return SparseOperator(self.basis, self.matrix * scalar, self.band)

    __rmul__ = __mul__

    def __neg__(self) -> SparseOperator:
        return SparseOperator(self.basis, -self.matrix, self.band)

    def apply(self, ket: CoeffVector) -> CoeffVector:
        if ket.basis != self.basis:
            raise DomainError("ket and operator live on different bases")
        return CoeffVector(self.basis, self.matrix @ ket.amplitudes)

    def element(self, row: tuple[int, int], col: tuple[int, int]) -> complex:
        return complex(self.matrix[mode_index(self.basis, row), mode_index(self.basis, col)])

    def column(self, col: tuple[int, int]) -> CoeffVector:
        return CoeffVector(self.basis, self.matrix[:, mode_index(self.basis, col)])

    def entries(self, threshold: float = 0.0) -> dict[tuple[ModeIndex, ModeIndex], complex]:
        """Entries with ``|value| > threshold`` keyed by (row mode, column mode)."""
        modes = self.basis.modes
        rows, cols = np.nonzero(np.abs(self.matrix) > threshold)
        return {(modes[r], modes[c]): complex(self.matrix[r, c]) for r, c in zip(rows, cols)}

    def restricted(self, l_cut: int) -> np.ndarray:
        """Block of rows and columns with ``l <= l_cut``."""
        k = (l_cut + 1) ** 2
        return self.matrix[:k, :k]


def _diagonal(basis: BasisSpec, values: np.ndarray) -> SparseOperator:
    return SparseOperator(basis, np.diag(values.astype(complex)), Band.of({0}, {0}))


def build_angular(basis: BasisSpec, kind: str) -> SparseOperator:
    """Standard angular momentum matrices (hbar = 1).

    ``kind`` is one of ``Lz``, ``Lplus``, ``Lminus``, ``Lsquared``.
    """
    ls, ms = basis.ls, basis.ms
    if kind == "Lz":
        return _diagonal(basis, ms.astype(float))
    if kind == "Lsquared":
        return _diagonal(basis, (ls * (ls + 1)).astype(float))
    if kind not in ("Lplus", "Lminus"):
        raise DomainError(f"unknown angular momentum operator {kind!r}")
    step = 1 if kind == "Lplus" else -1
    mat = np.zeros((basis.size, basis.size), dtype=complex)
    for j, (l, m) in enumerate(basis.modes):
        if abs(m + step) <= l:
            mat[mode_index(basis, (l, m + step)), j] = math.sqrt(l * (l + 1) - m * (m + step))
    return SparseOperator(basis, mat, Band.of({0}, {step})).validated()


def spectral_fn(basis: BasisSpec, f: Callable[[float], float]) -> SparseOperator:
    """Diagonal operator f(L^2): entry f(l(l+1)) on every mode of degree l."""
    values = np.empty(basis.l_max + 1)
    for l in range(basis.l_max + 1):
        try:
            v = f(float(l * (l + 1)))
        except (ArithmeticError, ValueError) as exc:
            raise NumericDomainError(f"spectral function failed at l={l} (L^2={l * (l + 1)}): {exc}") from exc
        if not np.isfinite(v):
            raise NumericDomainError(f"spectral function is not finite at l={l} (L^2={l * (l + 1)})")
        values[l] = v
    return _diagonal(basis, values[basis.ls])


def sqrt_4l2_plus_1(x: float) -> float:
    """sqrt(4 L^2 + 1) as a scalar function of the L^2 eigenvalue; equals 2l + 1."""
    return math.sqrt(4.0 * x + 1.0)


def _raise_factor(x: float) -> float:
    return (sqrt_4l2_plus_1(x) + 1.0) / 2.0


def _lower_factor(x: float) -> float:
    return (sqrt_4l2_plus_1(x) - 1.0) / 2.0


# -- direction operator ---------------------------------------------------------


def _direction_profile(grid: QuadratureGrid, component: str) -> np.ndarray:
    theta = grid.theta_nodes[:, None]
    phi = grid.phi_nodes[None, :]
    if component == "Nz":
        return np.cos(theta) * np.ones_like(phi)
    if component == "Nplus":
        return np.sin(theta) * np.exp(1j * phi)
    if component == "Nminus":
        return np.sin(theta) * np.exp(-1j * phi)
    raise DomainError(f"unknown direction component {component!r}")


@lru_cache(maxsize=64)
def _direction_matrix(grid: QuadratureGrid, component: str) -> np.ndarray:
    n = grid.basis.size
    Y = grid.harmonic_table.reshape(n, -1)
    w = (grid.weights * _direction_profile(grid, component)).ravel()
    mat = (Y.conj() * w) @ Y.T
    mat.flags.writeable = False
    return mat


def build_direction(basis: BasisSpec, grid: QuadratureGrid, component: str) -> SparseOperator:
    """Multiplication by cos(theta) (``Nz``) or sin(theta) e^{+-i phi} (``Nplus``/``Nminus``)."""
    _check_grid(grid, basis)
    m_shift = {"Nz": 0, "Nplus": 1, "Nminus": -1}
    if component not in m_shift:
        raise DomainError(f"unknown direction component {component!r}")
    mat = _direction_matrix(grid, component)
    return SparseOperator(basis, mat, Band.of({-1, 1}, {m_shift[component]})).validated()


# -- Cartesian helpers ----------------------------------------------------------


def to_cartesian(z: SparseOperator, plus: SparseOperator, minus: SparseOperator):
    """(V_x, V_y, V_z) from spherical components, V_x = (V+ + V-)/2, V_y = (V+ - V-)/2i."""
    return (0.5 * (plus + minus), (-0.5j) * (plus - minus), z)


def from_cartesian(x: SparseOperator, y: SparseOperator, z: SparseOperator) -> dict[str, SparseOperator]:
    return {"z": z, "plus": x + 1j * y, "minus": x - 1j * y}


def cross(a, b):
    """Operator cross product of two Cartesian triples, factor order preserved."""
    ax, ay, az = a
    bx, by, bz = b
    return (ay @ bz - az @ by, az @ bx - ax @ bz, ax @ by - ay @ bx)


def angular_cartesian(basis: BasisSpec):
    return to_cartesian(
        build_angular(basis, "Lz"), build_angular(basis, "Lplus"), build_angular(basis, "Lminus")
    )


def direction_cartesian(basis: BasisSpec, grid: QuadratureGrid):
    return to_cartesian(
        build_direction(basis, grid, "Nz"),
        build_direction(basis, grid, "Nplus"),
        build_direction(basis, grid, "Nminus"),
    )


@lru_cache(maxsize=16)
def _n_cross_l(grid: QuadratureGrid) -> dict[str, SparseOperator]:
    basis = grid.basis
    ncl = cross(direction_cartesian(basis, grid), angular_cartesian(basis))
    return from_cartesian(*ncl)


def n_cross_l(basis: BasisSpec, grid: QuadratureGrid, component: str) -> SparseOperator:
    """Spherical component (z, plus, minus) of N x L."""
    _check_grid(grid, basis)
    _check_component(component)
    return _n_cross_l(grid)[component]


def _direction(basis, grid, component) -> SparseOperator:
    return build_direction(basis, grid, {"z": "Nz", "plus": "Nplus", "minus": "Nminus"}[component])


def _check_component(component: str) -> None:
    if component not in COMPONENTS:
        raise DomainError(f"unknown vector component {component!r}; expected one of {COMPONENTS}")


def _check_which(which: str) -> None:
    if which not in ("R", "Q"):
        raise DomainError(f"unknown shift operator {which!r}; expected 'R' or 'Q'")


# -- shift operators ------------------------------------------------------------


def build_shift(basis: BasisSpec, grid: QuadratureGrid, which: str, component: str) -> SparseOperator:
    """Full l-raising (``R``) or l-lowering (``Q``) operator component."""
    _check_grid(grid, basis)
    _check_which(which)
    _check_component(component)
    ncl = n_cross_l(basis, grid, component)
    N = _direction(basis, grid, component)
    if which == "R":
        mat = (1j * ncl + N @ spectral_fn(basis, _raise_factor)).matrix
        lossy = tuple(i for i, l in enumerate(basis.ls) if l == basis.l_max)
    else:
        mat = (1j * ncl - N @ spectral_fn(basis, _lower_factor)).matrix
        lossy = ()
    band = Band.of({1 if which == "R" else -1}, {M_SHIFT[component]})
    return SparseOperator(basis, mat, band, lossy).validated()


def build_half_finished(
    basis: BasisSpec, grid: QuadratureGrid, which: str, l_param: int, component: str
) -> SparseOperator:
    """Shift operator with the L^2-dependent factor frozen at the constant for ``l_param``.

    Agrees with :func:`build_shift` only on columns of degree ``l_param``.
    """
    _check_grid(grid, basis)
    _check_which(which)
    _check_component(component)
    if not 0 <= l_param <= basis.l_max:
        raise DomainError(f"l_param={l_param} outside [0, {basis.l_max}]")
    ncl = n_cross_l(basis, grid, component)
    N = _direction(basis, grid, component)
    op = 1j * ncl + (l_param + 1) * N if which == "R" else 1j * ncl - l_param * N
    return SparseOperator(basis, op.matrix, Band.of({-1, 1}, {M_SHIFT[component]})).validated()


# -- analytic ladder tables -----------------------------------------------------


def ladder_a(l: int, m: int, sign: str) -> float:
    """a(l, m) = -+ sqrt((l+m)(l+m-1)); upper (negative) sign for '+' components."""
    p = (l + m) * (l + m - 1)
    if p <= 0 or l + m <= 0:
        return 0.0
    mag = math.sqrt(p)
    return -mag if sign == "+" else mag


def ladder_b(l: int, m: int) -> float:
    """b(l, m) = sqrt((l+m)(l-m))."""
    p = (l + m) * (l - m)
    return math.sqrt(p) if p > 0 else 0.0


@dataclass(frozen=True)
class LadderCoefficients:
    a: Callable[[int, int, str], float] = ladder_a
    b: Callable[[int, int], float] = ladder_b


DEFAULT_COEFFICIENTS = LadderCoefficients()


def analytic_shift_coefficient(
    which: str, component: str, l: int, m: int, coeffs: LadderCoefficients = DEFAULT_COEFFICIENTS
) -> tuple[ModeIndex, float] | None:
    """Target mode and coefficient of the closed-form action on |l, m>, or None for the zero ket."""
    if which == "R":
        target = ModeIndex(l + 1, m + M_SHIFT[component])
        pref = math.sqrt((2 * l + 1) / (2 * l + 3))
        if component == "z":
            c = pref * coeffs.b(l + 1, m)
        elif component == "plus":
            c = pref * coeffs.a(l + 2, m, "+")
        else:
            c = pref * coeffs.a(l + 2, -m, "-")
    else:
        if l == 0:
            return None
        target = ModeIndex(l - 1, m + M_SHIFT[component])
        pref = math.sqrt((2 * l + 1) / (2 * l - 1))
        if component == "z":
            c = -pref * coeffs.b(l, m)
        elif component == "plus":
            c = pref * coeffs.a(l, -m, "+")
        else:
            c = pref * coeffs.a(l, m, "-")
    if not target.is_valid() or c == 0.0:
        return None
    return target, c


def build_analytic_shift(
    basis: BasisSpec, which: str, component: str, coeffs: LadderCoefficients = DEFAULT_COEFFICIENTS
) -> SparseOperator:
    """Shift operator assembled from the closed-form ladder coefficients (no quadrature)."""
    _check_which(which)
    _check_component(component)
    mat = np.zeros((basis.size, basis.size), dtype=complex)
    for j, (l, m) in enumerate(basis.modes):
        hit = analytic_shift_coefficient(which, component, l, m, coeffs)
        if hit is None:
            continue
        target, c = hit
        if basis.contains(target):
            mat[mode_index(basis, target), j] = c
    band = Band.of({1 if which == "R" else -1}, {M_SHIFT[component]})
    return SparseOperator(basis, mat, band).validated()


# -- Kowalski-Rembielinski operator ---------------------------------------------


def _kr_g1(x: float) -> float:
    s = sqrt_4l2_plus_1(x)
    return 2.0 * math.sinh(s / 2.0) / s


def _kr_g2(x: float) -> float:
    s = sqrt_4l2_plus_1(x)
    return math.cosh(s / 2.0) - math.sinh(s / 2.0) / s


def build_kr_z(
    basis: BasisSpec, grid: QuadratureGrid, component: str, ordering: str = "spectral-first"
) -> SparseOperator:
    """Sphere coherent-state lowering operator Z.

    ``Z = i sqrt(e) g1 (N x L) + sqrt(e) g2 N`` with ``g1(s) = 2 sinh(s/2)/s``,
    ``g2(s) = cosh(s/2) - sinh(s/2)/s`` and ``s = sqrt(4 L^2 + 1)``. With
    ``spectral-first`` the g-factors act on the ket before the vector factor.
    """
    _check_grid(grid, basis)
    _check_component(component)
    if ordering not in ORDERINGS:
        raise DomainError(f"unknown ordering {ordering!r}; expected one of {ORDERINGS}")
    ncl = n_cross_l(basis, grid, component)
    N = _direction(basis, grid, component)
    g1 = spectral_fn(basis, _kr_g1)
    g2 = spectral_fn(basis, _kr_g2)
    root_e = math.sqrt(math.e)
    if ordering == "spectral-first":
        op = (1j * root_e) * (ncl @ g1) + root_e * (N @ g2)
    else:
        op = (1j * root_e) * (g1 @ ncl) + root_e * (g2 @ N)
    out = SparseOperator(basis, op.matrix, Band.of({-1, 1}, {M_SHIFT[component]}))
    # g-factors grow like exp(l), so the band threshold is relative here
    return out.validated(BAND_TOL * max(1.0, float(np.abs(out.matrix).max())))


# -- algebra --------------------------------------------------------------------


def _diagonal_entries(a: SparseOperator) -> np.ndarray | None:
    d = np.diagonal(a.matrix)
    if np.count_nonzero(a.matrix) == np.count_nonzero(d):
        return d
    return None


def commutator(a: SparseOperator, b: SparseOperator) -> SparseOperator:
    """[a, b] = ab - ba.

    When either factor is diagonal the result is formed entrywise as
    ``(d_i - d_j) b_ij``, which is exact for integer spectra such as L_z and L^2.
    """
    a._same_basis(b)
    band = None
    if a.band is not None and b.band is not None:
        band = a.band.compose(b.band).union(b.band.compose(a.band))
    da = _diagonal_entries(a)
    if da is not None:
        return SparseOperator(a.basis, (da[:, None] - da[None, :]) * b.matrix, band)
    db = _diagonal_entries(b)
    if db is not None:
        return SparseOperator(a.basis, -(db[:, None] - db[None, :]) * a.matrix, band)
    return SparseOperator(a.basis, a.matrix @ b.matrix - b.matrix @ a.matrix, band)


def adjoint(a: SparseOperator) -> SparseOperator:
    band = a.band.negate() if a.band is not None else None
    return SparseOperator(a.basis, a.matrix.conj().T, band)


def zero_operator(basis: BasisSpec) -> SparseOperator:
    return SparseOperator(basis, np.zeros((basis.size, basis.size), dtype=complex), Band.of({0}, {0}))


def identity_operator(basis: BasisSpec) -> SparseOperator:
    return _diagonal(basis, np.ones(basis.size))
