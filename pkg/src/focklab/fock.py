"""Truncated multi-mode occupation-number spaces and dense operator algebra.

The basis is the lexicographic enumeration of occupancy tuples, optionally
filtered to a fixed total particle number.  All matrices are dense complex
numpy arrays; dimensions stay at desk scale (<= a few thousand), so no sparse
machinery is used.  hbar = 1 throughout.

Everything constructed here is immutable after creation (arrays are marked
read-only), so values can be shared freely across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

BOSE = "bose"
FERMI = "fermi"

# Tolerance hierarchy: construction invariants at 1e-12, PSD slack at 1e-10
# to absorb accumulated eigensolver error.
NORM_ATOL = 1e-12
HERM_ATOL = 1e-12
TRACE_ATOL = 1e-12
PSD_SLACK = 1e-10
PURITY_ATOL = 1e-12
HERM_INPUT_ATOL = 1e-10


@dataclass(frozen=True)
class Mode:
    """One truncated mode: occupancies run over 0..cutoff."""

    label: str
    cutoff: int
    statistics: str = BOSE


@dataclass(frozen=True)
class BasisState:
    """Occupancy tuple, one entry per mode of the owning system."""

    occupancies: tuple


class ModeSystem:
    """Ordered list of modes with a fixed occupation-number basis.

    Parameters
    ----------
    modes : iterable of Mode or (label, cutoff[, statistics]) tuples
    total_number_restriction : int, optional
        Keep only basis states whose total occupancy equals this value.
    """

    def __init__(self, modes, total_number_restriction=None):
        parsed = []
        for m in modes:
            if not isinstance(m, Mode):
                m = Mode(*m)
            if m.cutoff < 0:
                raise ValueError("mode cutoff must be >= 0")
            if m.statistics not in (BOSE, FERMI):
                raise ValueError(f"unknown statistics {m.statistics!r}")
            if m.statistics == FERMI and m.cutoff != 1:
                raise ValueError("fermi modes have cutoff exactly 1")
            parsed.append(m)
        if not parsed:
            raise ValueError("a ModeSystem needs at least one mode")
        self.modes = tuple(parsed)
        self.total_number_restriction = total_number_restriction

        occ = np.array(
            list(itertools.product(*(range(m.cutoff + 1) for m in self.modes))),
            dtype=np.int64,
        )
        if total_number_restriction is not None:
            occ = occ[occ.sum(axis=1) == total_number_restriction]
        if occ.shape[0] == 0:
            raise ValueError("empty Hilbert space")
        occ.setflags(write=False)
        self.occupancies = occ
        self.dim = occ.shape[0]
        self._index = {tuple(row): i for i, row in enumerate(occ)}

    @property
    def n_modes(self):
        return len(self.modes)

    @property
    def labels(self):
        return tuple(m.label for m in self.modes)

    def mode_index(self, label):
        for i, m in enumerate(self.modes):
            if m.label == label:
                return i
        raise KeyError(f"no mode labelled {label!r}")

    def index_of(self, occupancies):
        key = tuple(int(n) for n in occupancies)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"occupancy {key} not in basis") from None

    def basis_state(self, occupancies):
        vec = np.zeros(self.dim, dtype=complex)
        vec[self.index_of(occupancies)] = 1.0
        return PureState(self, vec)

    def vacuum(self):
        return self.basis_state((0,) * self.n_modes)

    def identity(self):
        return Operator(self, np.eye(self.dim, dtype=complex))

    def __eq__(self, other):
        return (
            isinstance(other, ModeSystem)
            and self.modes == other.modes
            and self.total_number_restriction == other.total_number_restriction
        )

    def __hash__(self):
        return hash((self.modes, self.total_number_restriction))

    def __repr__(self):
        spec = ", ".join(f"{m.label}:{m.cutoff}{'f' if m.statistics == FERMI else ''}"
                         for m in self.modes)
        extra = (f", N={self.total_number_restriction}"
                 if self.total_number_restriction is not None else "")
        return f"ModeSystem({spec}{extra}, dim={self.dim})"


def bosons(n_modes, cutoff, labels=None, total=None):
    """Bosonic ModeSystem with a common cutoff."""
    labels = labels or [f"m{i}" for i in range(n_modes)]
    return ModeSystem([(lab, cutoff, BOSE) for lab in labels],
                      total_number_restriction=total)


def fermions(n_modes, labels=None, total=None):
    """Fermionic ModeSystem (cutoff 1 per mode)."""
    labels = labels or [f"m{i}" for i in range(n_modes)]
    return ModeSystem([(lab, 1, FERMI) for lab in labels],
                      total_number_restriction=total)


def qubits(n):
    """n two-level systems realised as bosonic modes with cutoff 1."""
    return bosons(n, 1, labels=[f"q{i}" for i in range(n)])


def build_basis(system):
    """Ordered basis as BasisState records (lexicographic enumeration)."""
    return [BasisState(tuple(int(n) for n in row)) for row in system.occupancies]


class Operator:
    """Dense operator on a ModeSystem basis."""

    __slots__ = ("system", "matrix")

    def __init__(self, system, matrix):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (system.dim, system.dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match dim {system.dim}")
        matrix.setflags(write=False)
        self.system = system
        self.matrix = matrix

    def dag(self):
        return Operator(self.system, self.matrix.conj().T)

    def trace(self):
        return complex(np.trace(self.matrix))

    def norm(self):
        return float(np.linalg.norm(self.matrix))

    def is_hermitian(self, atol=HERM_INPUT_ATOL):
        return np.linalg.norm(self.matrix - self.matrix.conj().T) <= atol

    def _coerce(self, other):
        if not isinstance(other, Operator):
            raise TypeError("expected an Operator")
        if other.system != self.system:
            raise ValueError("operators live on different systems")
        return other

    def __matmul__(self, other):
        if isinstance(other, PureState):
            if other.system != self.system:
                raise ValueError("operator and state live on different systems")
            return self.matrix @ other.amplitudes
        return Operator(self.system, self.matrix @ self._coerce(other).matrix)

    def __add__(self, other):
        return Operator(self.system, self.matrix + self._coerce(other).matrix)

    def __sub__(self, other):
        return Operator(self.system, self.matrix - self._coerce(other).matrix)

    def __mul__(self, scalar):
        return Operator(self.system, self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return Operator(self.system, -self.matrix)

    def __repr__(self):
        return f"Operator(dim={self.system.dim})"


class PureState:
    """Normalised state vector over the occupation basis."""

    __slots__ = ("system", "amplitudes")

    def __init__(self, system, amplitudes):
        amplitudes = np.array(amplitudes, dtype=complex)
        if amplitudes.shape != (system.dim,):
            raise ValueError("amplitude vector has wrong length")
        nrm = np.linalg.norm(amplitudes)
        if abs(nrm - 1.0) > NORM_ATOL:
            raise ValueError(f"state vector norm {nrm} is not 1 within {NORM_ATOL}")
        amplitudes.setflags(write=False)
        self.system = system
        self.amplitudes = amplitudes

    def density(self):
        return DensityOperator(self.system, np.outer(self.amplitudes, self.amplitudes.conj()))

    def amplitude(self, occupancies):
        return complex(self.amplitudes[self.system.index_of(occupancies)])

    def overlap(self, other):
        if other.system != self.system:
            raise ValueError("states live on different systems")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def __repr__(self):
        return f"PureState(dim={self.system.dim})"


class DensityOperator:
    """Density operator; the four physicality checks run at construction.

    Hermitian within 1e-12 (Frobenius), unit trace within 1e-12, smallest
    eigenvalue >= -1e-10, purity <= 1 + 1e-12.
    """

    __slots__ = ("system", "matrix")

    def __init__(self, system, matrix):
        matrix = np.array(matrix, dtype=complex)
        if matrix.shape != (system.dim, system.dim):
            raise ValueError("density matrix shape does not match system")
        herm = np.linalg.norm(matrix - matrix.conj().T)
        if herm > HERM_ATOL:
            raise ValueError(f"not Hermitian: residual {herm}")
        tr = np.trace(matrix)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise ValueError(f"trace {tr} is not 1 within {TRACE_ATOL}")
        evals = np.linalg.eigvalsh(matrix)
        if evals.min() < -PSD_SLACK:
            raise ValueError(f"not positive semidefinite: min eigenvalue {evals.min()}")
        purity = float(np.sum(evals**2))
        if purity > 1.0 + PURITY_ATOL:
            raise ValueError(f"purity {purity} exceeds 1")
        matrix.setflags(write=False)
        self.system = system
        self.matrix = matrix

    def purity(self):
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def diagonal(self):
        return np.real(np.diag(self.matrix)).copy()

    def __repr__(self):
        return f"DensityOperator(dim={self.system.dim})"


def as_density(state):
    """Accept a PureState or DensityOperator and return the density form."""
    if isinstance(state, DensityOperator):
        return state
    if isinstance(state, PureState):
        return state.density()
    raise TypeError("expected PureState or DensityOperator")


@dataclass(frozen=True)
class Partition:
    """Named assignment of disjoint mode-index sets to subsystems."""

    subsystems: tuple

    def __init__(self, subsystems):
        # accepts [(name, indices), ...]; indices kept in the order given
        parsed = tuple((name, tuple(int(i) for i in idx)) for name, idx in subsystems)
        seen = set()
        for _, idx in parsed:
            for i in idx:
                if i in seen:
                    raise ValueError("partition subsystems overlap")
                seen.add(i)
        object.__setattr__(self, "subsystems", parsed)

    @property
    def names(self):
        return tuple(name for name, _ in self.subsystems)

    def modes_of(self, name):
        for n, idx in self.subsystems:
            if n == name:
                return idx
        raise KeyError(f"unknown subsystem {name!r}")

    def validate(self, system):
        for _, idx in self.subsystems:
            for i in idx:
                if not 0 <= i < system.n_modes:
                    raise ValueError(f"mode index {i} outside system")

    def covers(self, system):
        return sum(len(idx) for _, idx in self.subsystems) == system.n_modes


def annihilation(system, mode):
    """Matrix of the annihilation operator for one mode.

    Bosonic: a|n> = sqrt(n)|n-1>, with raising past the cutoff mapped to zero
    (take cutoff above any total occupancy in play for exact results).
    Fermionic: Jordan-Wigner sign (-1)^(occupied modes with smaller index).
    """
    if isinstance(mode, str):
        mode = system.mode_index(mode)
    if not 0 <= mode < system.n_modes:
        raise ValueError(f"mode index {mode} out of range")
    if system.total_number_restriction is not None:
        raise ValueError(
            "ladder operators leave a number-restricted space; "
            "build them on the unrestricted system")
    occ = system.occupancies
    mat = np.zeros((system.dim, system.dim), dtype=complex)
    stat = system.modes[mode].statistics
    for col in range(system.dim):
        n = occ[col, mode]
        if n == 0:
            continue
        target = occ[col].copy()
        target[mode] = n - 1
        row = system.index_of(target)
        if stat == FERMI:
            sign = -1.0 if (occ[col, :mode].sum() % 2) else 1.0
            mat[row, col] = sign
        else:
            mat[row, col] = np.sqrt(n)
    return Operator(system, mat)


def creation(system, mode):
    return annihilation(system, mode).dag()


def number_op(system, weights=None):
    """Diagonal weighted number operator sum_i w_i n_i (weights default to 1)."""
    if weights is None:
        weights = np.ones(system.n_modes)
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (system.n_modes,):
        raise ValueError("one weight per mode required")
    diag = system.occupancies @ weights
    return Operator(system, np.diag(diag.astype(complex)))


def _sub_system(system, mode_indices):
    return ModeSystem([system.modes[i] for i in mode_indices])


def _rest_codes(system, rest_indices):
    """Integer code per basis state for the occupancies outside the kept modes."""
    rest = system.occupancies[:, rest_indices] if rest_indices else \
        np.zeros((system.dim, 0), dtype=np.int64)
    codes = np.zeros(system.dim, dtype=np.int64)
    seen = {}
    for i, row in enumerate(map(tuple, rest)):
        codes[i] = seen.setdefault(row, len(seen))
    return codes


def tensor_embed(op, system, mode_indices):
    """Lift an operator on a subset of modes to the full system.

    ``op.system.modes`` must match ``system.modes[mode_indices]`` in order.
    The embedding uses the occupation-number product structure, which for
    fermionic modes is faithful for parity-even (number-conserving) operators.
    """
    mode_indices = tuple(int(i) for i in mode_indices)
    expected = tuple(system.modes[i] for i in mode_indices)
    if op.system.modes != expected:
        raise ValueError("operator modes do not match the target mode indices")
    sub = op.system
    sub_codes = np.array([sub.index_of(tuple(row))
                          for row in system.occupancies[:, mode_indices]])
    rest_idx = tuple(i for i in range(system.n_modes) if i not in mode_indices)
    rest = _rest_codes(system, rest_idx)
    full = op.matrix[np.ix_(sub_codes, sub_codes)] * (rest[:, None] == rest[None, :])
    return Operator(system, full)


def partial_trace(state, partition, keep):
    """Reduced density operator over the modes of subsystem ``keep``.

    All modes outside ``keep`` are traced out, whether or not they belong to
    a named subsystem of the partition.  Trace is preserved.
    """
    rho = as_density(state)
    system = rho.system
    partition.validate(system)
    keep_idx = partition.modes_of(keep)
    sub = _sub_system(system, keep_idx)
    rest_idx = tuple(i for i in range(system.n_modes) if i not in keep_idx)
    sub_codes = np.array([sub.index_of(tuple(row))
                          for row in system.occupancies[:, keep_idx]])
    rest = _rest_codes(system, rest_idx)
    out = np.zeros((sub.dim, sub.dim), dtype=complex)
    for code in np.unique(rest):
        rows = np.nonzero(rest == code)[0]
        subs = sub_codes[rows]
        out[np.ix_(subs, subs)] += rho.matrix[np.ix_(rows, rows)]
    return DensityOperator(sub, out)


def expectation(state, op):
    """<Omega> = Tr(Omega rho), returned as a complex number."""
    rho = as_density(state)
    if op.system != rho.system:
        raise ValueError("operator and state live on different systems")
    return complex(np.trace(op.matrix @ rho.matrix))


def evolution_operator(h, t):
    """U = exp(-i H t) through the eigendecomposition of Hermitian H."""
    if not h.is_hermitian():
        raise ValueError("Hamiltonian is not Hermitian within 1e-10")
    evals, vecs = np.linalg.eigh(h.matrix)
    u = (vecs * np.exp(-1j * evals * t)) @ vecs.conj().T
    return Operator(h.system, u)


def unitary_evolve(h, t, state):
    """Evolve a PureState or DensityOperator under exp(-i H t)."""
    u = evolution_operator(h, t)
    if isinstance(state, PureState):
        return PureState(state.system, u.matrix @ state.amplitudes)
    rho = as_density(state)
    return DensityOperator(rho.system, u.matrix @ rho.matrix @ u.matrix.conj().T)


def apply_unitary(u, state):
    """Apply an explicit unitary Operator to a state of either kind."""
    if isinstance(state, PureState):
        return PureState(state.system, u.matrix @ state.amplitudes)
    rho = as_density(state)
    return DensityOperator(rho.system, u.matrix @ rho.matrix @ u.matrix.conj().T)
