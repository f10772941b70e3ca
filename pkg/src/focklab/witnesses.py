"""Entanglement tests: CHSH, correlation inequality, GHZ parity, spin EPR
conditional variances, and the sector-projected particle entanglement measure.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fock import (
    Operator,
    DensityOperator,
    PureState,
    annihilation,
    as_density,
    partial_trace,
)
from .measurement import spectral, prob, cond_variance, PROB_FLOOR

DECISION_TOL = 1e-9
GHZ_TOL = 1e-12
SECTOR_FLOOR = 1e-14


@dataclass(frozen=True)
class SpinOps:
    """Schwinger spin operators of one two-mode subsystem."""

    sx: Operator
    sy: Operator
    sz: Operator

    def dot(self, direction):
        nx, ny, nz = direction
        return nx * self.sx + ny * self.sy + nz * self.sz


def spin_ops(system, mode_a, mode_b):
    """S_x = (bdag a + adag b)/2, S_y = (bdag a - adag b)/2i, S_z = (nb - na)/2."""
    a = annihilation(system, mode_a)
    b = annihilation(system, mode_b)
    adag, bdag = a.dag(), b.dag()
    sx = 0.5 * (bdag @ a + adag @ b)
    sy = (-0.5j) * (bdag @ a - adag @ b)
    sz = 0.5 * (bdag @ b - adag @ a)
    return SpinOps(sx, sy, sz)


def pauli_ops(system, mode):
    """Pauli matrices on a cutoff-1 mode, spin-up mapped to the occupied state."""
    if system.modes[mode].cutoff != 1:
        raise ValueError("pauli_ops needs a cutoff-1 mode")
    a = annihilation(system, mode)
    adag = a.dag()
    sigma_x = a + adag
    sigma_y = 1j * (a - adag)
    n = adag @ a
    sigma_z = 2.0 * n - system.identity()
    return sigma_x, sigma_y, sigma_z


@dataclass(frozen=True)
class CHSHSetting:
    """Unit measurement directions a1, a2 for one side and b1, b2 for the other."""

    a1: tuple
    a2: tuple
    b1: tuple
    b2: tuple

    def __post_init__(self):
        for name in ("a1", "a2", "b1", "b2"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1.0) > 1e-12:
                raise ValueError(f"{name} is not a unit 3-vector")


@dataclass(frozen=True)
class WitnessVerdict:
    """Outcome of a witness evaluation.

    ``margin`` is the amount by which the violating side exceeds the bound,
    so ``violated`` is always ``margin > decision tolerance``.
    """

    lhs: float
    rhs: float
    violated: bool
    margin: float


def chsh_correlation_tensor(state):
    """T_ij = <sigma_i x sigma_j> on a two-qubit (two cutoff-1 mode) state."""
    rho = as_density(state)
    system = rho.system
    if system.dim != 4:
        raise ValueError("CHSH needs a two-qubit state (dimension 4)")
    paulis_a = pauli_ops(system, 0)
    paulis_b = pauli_ops(system, 1)
    t = np.empty((3, 3))
    for i, sa in enumerate(paulis_a):
        for j, sb in enumerate(paulis_b):
            val = np.trace(sa.matrix @ sb.matrix @ rho.matrix)
            t[i, j] = val.real
    return t


def chsh(state, setting):
    """S = E(A1 B1) + E(A1 B2) + E(A2 B1) - E(A2 B2) with E = a.T T b."""
    t = chsh_correlation_tensor(state)
    a1, a2 = np.asarray(setting.a1), np.asarray(setting.a2)
    b1, b2 = np.asarray(setting.b1), np.asarray(setting.b2)
    return float(a1 @ t @ b1 + a1 @ t @ b2 + a2 @ t @ b1 - a2 @ t @ b2)


def chsh_batch(tensors, a1, a2, b1, b2):
    """Vectorised |S| over stacked correlation tensors and settings."""
    s = (np.einsum("mij,si,sj->ms", tensors, a1, b1)
         + np.einsum("mij,si,sj->ms", tensors, a1, b2)
         + np.einsum("mij,si,sj->ms", tensors, a2, b1)
         - np.einsum("mij,si,sj->ms", tensors, a2, b2))
    return np.abs(s)


def correlation_test(state, omega_a, omega_b, decision_tol=DECISION_TOL):
    """Correlation inequality |<Oa^dag Ob>|^2 <= <Oa^dag Oa Ob^dag Ob>.

    ``omega_a`` and ``omega_b`` are full-space operators supported on disjoint
    subsystems (so they commute).  A violation certifies entanglement.
    """
    rho = as_density(state)
    lhs = abs(np.trace(omega_a.dag().matrix @ omega_b.matrix @ rho.matrix)) ** 2
    rhs_val = np.trace(omega_a.dag().matrix @ omega_a.matrix
                       @ omega_b.dag().matrix @ omega_b.matrix @ rho.matrix)
    rhs = float(rhs_val.real)
    margin = lhs - rhs
    return WitnessVerdict(lhs=float(lhs), rhs=rhs,
                          violated=margin > decision_tol, margin=float(margin))


@dataclass(frozen=True)
class GHZParityReport:
    residuals: dict
    passed: bool
    tol: float


def ghz_parity(state, tol=GHZ_TOL):
    """Check the four GHZ parity eigenvalue identities.

    sigma_x sigma_y sigma_y (and cyclic) must have eigenvalue -1 and
    sigma_x sigma_x sigma_x eigenvalue +1, each as || O|psi> -+ |psi> ||.
    """
    if not isinstance(state, PureState):
        raise TypeError("ghz_parity expects a pure state")
    system = state.system
    if system.dim != 8:
        raise ValueError("GHZ parity needs a three-qubit state (dimension 8)")
    paulis = [pauli_ops(system, k) for k in range(3)]

    def triple(axes):
        op = paulis[0][axes[0]] @ paulis[1][axes[1]] @ paulis[2][axes[2]]
        return op.matrix @ state.amplitudes

    x, y = 0, 1
    residuals = {
        "xyy": float(np.linalg.norm(triple((x, y, y)) + state.amplitudes)),
        "yxy": float(np.linalg.norm(triple((y, x, y)) + state.amplitudes)),
        "yyx": float(np.linalg.norm(triple((y, y, x)) + state.amplitudes)),
        "xxx": float(np.linalg.norm(triple((x, x, x)) - state.amplitudes)),
    }
    return GHZParityReport(residuals=residuals,
                           passed=all(r <= tol for r in residuals.values()),
                           tol=tol)


def spin_epr(state, partition, decision_tol=DECISION_TOL):
    """Spin EPR test on two two-mode subsystems.

    lhs is the product of the unrecorded-conditioned variances
    <dS_x1^2>_{S_x2} <dS_y1^2>_{S_y2}; rhs is |<S_z1>|^2 / 4.  A violation
    (lhs below rhs) certifies entanglement; separable states always satisfy
    the inequality.
    """
    rho = as_density(state)
    system = rho.system
    names = partition.names
    if len(names) != 2:
        raise ValueError("spin EPR needs a two-subsystem partition")
    m1 = partition.modes_of(names[0])
    m2 = partition.modes_of(names[1])
    if len(m1) != 2 or len(m2) != 2:
        raise ValueError("each subsystem must hold two modes")
    spins1 = spin_ops(system, *m1)
    spins2 = spin_ops(system, *m2)

    def conditioned_variance(target_op, given_op):
        target = spectral(target_op)
        given = spectral(given_op)
        total, weight = 0.0, 0.0
        for proj in given.projectors:
            p = prob(rho, proj)
            if p <= PROB_FLOOR:
                continue
            total += p * cond_variance(rho, target, proj)
            weight += p
        if weight < 1.0 - 1e-9:
            warnings.warn("skipped zero-probability conditioning sectors; "
                          "weights renormalised", RuntimeWarning)
        return total / weight

    var_x = conditioned_variance(spins1.sx, spins2.sx)
    var_y = conditioned_variance(spins1.sy, spins2.sy)
    lhs = var_x * var_y
    mean_z = np.trace(spins1.sz.matrix @ rho.matrix)
    rhs = 0.25 * abs(mean_z) ** 2
    margin = rhs - lhs
    return WitnessVerdict(lhs=float(lhs), rhs=float(rhs),
                          violated=margin > decision_tol, margin=float(margin))


def particle_entanglement(state, partition, sector_floor=SECTOR_FLOOR):
    """Number-sector-projected mode-entanglement entropy E_P.

    E_P = sum_{nA,nB} P_{nA nB} E_M(sector state), where the sector state is
    the (nA, nB) joint-number projection of rho (normalised) and E_M is the
    von Neumann entropy (natural log) of its reduced operator on the first
    subsystem.  Zero on separable states for single-mode subsystems, where
    the joint-number projectors are rank one.
    """
    rho = as_density(state)
    system = rho.system
    names = partition.names
    if len(names) != 2:
        raise ValueError("particle entanglement needs a bipartite partition")
    idx_a = partition.modes_of(names[0])
    idx_b = partition.modes_of(names[1])
    occ = system.occupancies
    num_a = occ[:, idx_a].sum(axis=1)
    num_b = occ[:, idx_b].sum(axis=1)
    keys = num_a * (int(num_b.max()) + 1) + num_b   # unique (nA, nB) encoding
    ep = 0.0
    for key in np.unique(keys):
        sel = np.nonzero(keys == key)[0]
        block = rho.matrix[np.ix_(sel, sel)]
        weight = float(np.real(np.trace(block)))
        if weight < sector_floor:
            continue
        mat = np.zeros_like(rho.matrix)
        mat[np.ix_(sel, sel)] = block / weight
        sector = DensityOperator(system, mat)
        reduced = partial_trace(sector, partition, names[0])
        evals = np.linalg.eigvalsh(reduced.matrix)
        evals = evals[evals > 1e-15]
        ep += weight * float(-(evals * np.log(evals)).sum())
    return ep


def casimir_residual(state, spins, n_pair):
    """|| <sum_a S_a^2> - <(N/2)(N/2+1)> || as an expectation residual."""
    rho = as_density(state)
    s2 = spins.sx @ spins.sx + spins.sy @ spins.sy + spins.sz @ spins.sz
    half = 0.5 * n_pair
    target = half @ half + half
    return abs(np.trace((s2.matrix - target.matrix) @ rho.matrix))
