"""Lowest states of the l-lowering operators and generation of all harmonics from |0,0>."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import subspace_angles

from . import operators as ops
from .basis import BasisSpec, CoeffVector, ModeIndex, QuadratureGrid, analyze, eval_harmonic, mode_index
from .errors import ConsistencyError, DomainError, PreconditionError

KERNEL_RTOL = 1e-8
ZERO_SIGMA = 1e-12
ZERO_KET = 1e-12

_Q_COMPONENT = {"Qz": "z", "Qplus": "plus", "Qminus": "minus"}
_R_COMPONENT = {"R_z": "z", "R_plus": "plus", "R_minus": "minus"}


@dataclass
class KernelSolution:
    operator_id: str
    lz_eigenvalue: int
    basis_vectors: list[CoeffVector]
    predicted_modes: list[ModeIndex]
    singular_values: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))

    @property
    def dimension(self) -> int:
        return len(self.basis_vectors)

    def principal_angles(self) -> np.ndarray:
        """Angles between the computed kernel and the span of the predicted modes."""
        if not self.basis_vectors or len(self.basis_vectors) != len(self.predicted_modes):
            return np.zeros(0)
        basis = self.basis_vectors[0].basis
        A = np.column_stack([v.amplitudes for v in self.basis_vectors])
        B = np.zeros((basis.size, len(self.predicted_modes)), dtype=complex)
        for k, md in enumerate(self.predicted_modes):
            B[mode_index(basis, md), k] = 1.0
        return subspace_angles(A, B)

    def matches_prediction(self, tol: float = 1e-8) -> bool:
        if self.dimension != len(self.predicted_modes):
            return False
        return bool(np.all(self.principal_angles() < tol))

    def to_record(self) -> dict:
        return {
            "operator": self.operator_id,
            "m": self.lz_eigenvalue,
            "dimension": self.dimension,
            "predicted_modes": [list(md) for md in self.predicted_modes],
            "matches_prediction": self.matches_prediction(),
            "vectors": [_ket_quadruples(v) for v in self.basis_vectors],
        }


def _ket_quadruples(ket: CoeffVector, threshold: float = 0.0) -> list[list]:
    out = []
    for (l, m), a in zip(ket.basis.modes, ket.amplitudes):
        if abs(a) > threshold:
            out.append([l, m, float(a.real), float(a.imag)])
    return out


def predicted_kernel(operator_id: str, m: int) -> list[ModeIndex]:
    """Closed-form lowest states at L_z = m for each lowering component."""
    if operator_id == "Qz":
        return [ModeIndex(abs(m), m)]
    if operator_id == "Qplus":
        return [ModeIndex(m, m), ModeIndex(m + 1, m)] if m >= 0 else []
    if operator_id == "Qminus":
        return [ModeIndex(abs(m), m), ModeIndex(abs(m) + 1, m)] if m <= 0 else []
    raise DomainError(f"unknown lowering operator {operator_id!r}")


def _fix_phase(vec: np.ndarray) -> np.ndarray:
    """Rotate so the largest-magnitude coefficient is real and positive."""
    k = int(np.argmax(np.abs(vec)))
    return vec * (abs(vec[k]) / vec[k])


def null_space(A: np.ndarray, rtol: float = KERNEL_RTOL) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal null-space columns of ``A`` and its singular values.

    Singular values below ``rtol * sigma_max`` count as zero; if ``sigma_max`` is
    itself below 1e-12 the whole domain is returned.
    """
    _, s, vh = np.linalg.svd(A, full_matrices=True)
    n = A.shape[1]
    if s.size == 0 or s[0] < ZERO_SIGMA:
        return np.eye(n, dtype=A.dtype), s
    rank = int(np.sum(s > rtol * s[0]))
    return vh[rank:].conj().T, s


def kernel_basis(
    operator_id: str, m: int, basis: BasisSpec, grid: QuadratureGrid, rtol: float = KERNEL_RTOL
) -> KernelSolution:
    """Null space of a lowering component restricted to the L_z = m subspace."""
    if operator_id not in _Q_COMPONENT:
        raise DomainError(f"unknown lowering operator {operator_id!r}; expected Qz, Qplus or Qminus")
    if abs(m) > basis.l_max - 1:
        raise PreconditionError(f"|m|={abs(m)} exceeds l_max - 1 = {basis.l_max - 1}")
    Q = ops.build_shift(basis, grid, "Q", _Q_COMPONENT[operator_id])
    cols = np.flatnonzero(basis.ms == m)
    kern, sv = null_space(Q.matrix[:, cols], rtol)
    vectors = []
    for k in range(kern.shape[1]):
        amps = np.zeros(basis.size, dtype=complex)
        amps[cols] = _fix_phase(kern[:, k])
        vectors.append(CoeffVector(basis, amps))
    return KernelSolution(operator_id, m, vectors, predicted_kernel(operator_id, m), sv)


def joint_kernel(basis: BasisSpec, grid: QuadratureGrid, rtol: float = KERNEL_RTOL) -> list[CoeffVector]:
    """Common null space of all three lowering components over the whole basis."""
    stacked = np.vstack([ops.build_shift(basis, grid, "Q", c).matrix for c in ops.COMPONENTS])
    kern, _ = null_space(stacked, rtol)
    return [CoeffVector(basis, _fix_phase(kern[:, k])) for k in range(kern.shape[1])]


def lowest_state(m: int, basis: BasisSpec, grid: QuadratureGrid) -> CoeffVector:
    """The unique unit ket annihilated by Q_z at L_z = m, phased so its (|m|, m) entry is positive."""
    sol = kernel_basis("Qz", m, basis, grid)
    if sol.dimension != 1:
        raise ConsistencyError(f"Q_z kernel at m={m} has dimension {sol.dimension}, expected 1")
    vec = sol.basis_vectors[0].amplitudes
    lead = vec[mode_index(basis, (abs(m), m))]
    if abs(lead) < 0.5:
        raise ConsistencyError(f"Q_z kernel at m={m} is not concentrated on (|m|, m)")
    state = CoeffVector(basis, vec * (abs(lead) / lead))
    lowered = ops.build_analytic_shift(basis, "Q", "z").apply(state)
    if lowered.norm() > ZERO_KET:
        raise ConsistencyError(f"closed-form Q_z does not annihilate the lowest state at m={m}")
    return state


@dataclass
class GeneratedState:
    target: ModeIndex
    recipe: list[tuple[str, int]]
    result: CoeffVector
    fidelity: float
    scale_factors: list[float] = field(default_factory=list)

    @property
    def recipe_text(self) -> str:
        return " ".join(f"{op}^{n}" for op, n in self.recipe)


def ladder_recipe(target: tuple[int, int]) -> list[tuple[str, int]]:
    l, m = target
    steps = []
    if m != 0:
        steps.append(("R_plus" if m > 0 else "R_minus", abs(m)))
    if l - abs(m) > 0:
        steps.append(("R_z", l - abs(m)))
    return steps


def direct_harmonic(target: tuple[int, int], basis: BasisSpec, grid: QuadratureGrid) -> CoeffVector:
    """Coefficients of Y_lm obtained by sampling it pointwise on the grid and projecting."""
    theta = grid.theta_nodes[:, None]
    phi = grid.phi_nodes[None, :]
    return analyze(eval_harmonic(target, theta, phi), grid, basis).normalized()


def generate_state(target: tuple[int, int], basis: BasisSpec, grid: QuadratureGrid) -> GeneratedState:
    """Build |l, m> from |0,0> by repeated l-raising, normalizing after each application."""
    target = ModeIndex(*target)
    if not target.is_valid():
        raise DomainError(f"invalid target mode {tuple(target)}")
    if target.l > basis.l_max - 1:
        raise PreconditionError(f"target l={target.l} needs l_max >= {target.l + 1}")
    recipe = ladder_recipe(target)
    state = CoeffVector.unit(basis, (0, 0))
    scales = []
    for name, count in recipe:
        op = ops.build_shift(basis, grid, "R", _R_COMPONENT[name])
        for _ in range(count):
            raised = op.apply(state)
            nrm = raised.norm()
            if nrm <= ZERO_KET:
                raise ConsistencyError(f"{name} produced the zero ket on the way to {tuple(target)}")
            scales.append(nrm)
            state = CoeffVector(basis, raised.amplitudes / nrm)
    fidelity = abs(direct_harmonic(target, basis, grid).inner(state))
    return GeneratedState(target, recipe, state, min(fidelity, 1.0), scales)


def literal_negative_m_recipe(m: int, basis: BasisSpec, grid: QuadratureGrid) -> dict:
    """Apply Q_plus repeatedly to |0,0> as the textual recipe for |l, -|m|> suggests.

    Records the step at which the zero ket appears (it does at once, since Q_plus
    lowers l and |0,0> has nothing below it).
    """
    Qp = ops.build_shift(basis, grid, "Q", "plus")
    state = CoeffVector.unit(basis, (0, 0))
    norms = []
    zero_at = None
    for step in range(1, abs(m) + 1):
        state = Qp.apply(state)
        nrm = state.norm()
        norms.append(nrm)
        if nrm <= ZERO_KET:
            zero_at = step
            break
    return {"m": m, "zero_ket_at_step": zero_at, "norms": norms}


@dataclass
class GenerationSummary:
    count: int
    min_fidelity: float
    max_residual: float

    def to_record(self) -> dict:
        return {"count": self.count, "min_fidelity": self.min_fidelity, "max_residual": self.max_residual}


def eigen_residuals(state: CoeffVector, target: tuple[int, int]) -> tuple[float, float]:
    """Max-abs residuals of L_z - m and L^2 - l(l+1) applied to ``state``."""
    l, m = target
    basis = state.basis
    lz = ops.build_angular(basis, "Lz").apply(state).amplitudes - m * state.amplitudes
    l2 = ops.build_angular(basis, "Lsquared").apply(state).amplitudes - l * (l + 1) * state.amplitudes
    return float(np.abs(lz).max()), float(np.abs(l2).max())


def generate_all(basis: BasisSpec, grid: QuadratureGrid) -> tuple[list[GeneratedState], GenerationSummary]:
    """Generate every mode with ``l <= l_max - 1``.

    ``max_residual`` is the worst of the L_z and L^2 eigen-residuals.
    """
    if basis.l_max < 2:
        raise PreconditionError(f"generate_all needs l_max >= 2, got {basis.l_max}")
    states = []
    worst_fid, worst_res = 1.0, 0.0
    for l in range(basis.l_max):
        for m in range(-l, l + 1):
            st = generate_state((l, m), basis, grid)
            states.append(st)
            worst_fid = min(worst_fid, st.fidelity)
            worst_res = max(worst_res, *eigen_residuals(st.result, (l, m)))
    return states, GenerationSummary(len(states), worst_fid, worst_res)


def secondary_kernel_lowering(m: int, basis: BasisSpec, grid: QuadratureGrid) -> float:
    """|<|m|, m| Q_z ||m|+1, m>|: the second Q_plus/Q_minus kernel state is not lowest."""
    Qz = ops.build_shift(basis, grid, "Q", "z")
    return abs(Qz.element((abs(m), m), (abs(m) + 1, m)))


def expected_secondary_lowering(m: int) -> float:
    k = abs(m)
    return math.sqrt((2 * k + 3) / (2 * k + 1)) * ops.ladder_b(k + 1, k)
