"""Projective (von Neumann) measurement algebra.

Probabilities, conditioned states, conditional means/variances and the
unrecorded-measurement map, all for Hermitian observables resolved into
eigenvalue/projector pairs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .fock import Operator, DensityOperator, as_density

PROB_FLOOR = 1e-12
MERGE_TOL = 1e-8        # relative to the spectral range
PROJ_ATOL = 1e-10
IMAG_ATOL = 1e-10


class ZeroProbabilityError(ValueError):
    """Raised when conditioning on an outcome of probability below the floor."""


@dataclass(frozen=True)
class Observable:
    """Hermitian operator together with its spectral resolution."""

    operator: Operator
    eigenvalues: tuple
    projectors: tuple

    def __post_init__(self):
        dim = self.operator.system.dim
        ident = np.eye(dim)
        total = sum(p.matrix for p in self.projectors)
        if np.linalg.norm(total - ident) > PROJ_ATOL:
            raise ValueError("projectors do not resolve the identity")
        recon = sum(lam * p.matrix for lam, p in zip(self.eigenvalues, self.projectors))
        if np.linalg.norm(recon - self.operator.matrix) > PROJ_ATOL:
            raise ValueError("spectral resolution does not reconstruct the operator")
        for p in self.projectors:
            if np.linalg.norm(p.matrix @ p.matrix - p.matrix) > PROJ_ATOL:
                raise ValueError("projector is not idempotent")
            if np.linalg.norm(p.matrix - p.matrix.conj().T) > PROJ_ATOL:
                raise ValueError("projector is not Hermitian")

    @property
    def system(self):
        return self.operator.system

    def outcomes(self):
        return list(zip(self.eigenvalues, self.projectors))


@dataclass(frozen=True)
class OutcomeDistribution:
    """Eigenvalue/probability pairs for measuring one observable."""

    outcomes: tuple

    def __post_init__(self):
        probs = np.array([p for _, p in self.outcomes])
        if probs.min() < -PROB_FLOOR:
            raise ValueError("negative outcome probability")
        if abs(probs.sum() - 1.0) > 1e-10:
            raise ValueError("outcome probabilities do not sum to 1")

    def probability_of(self, eigenvalue, atol=1e-9):
        for lam, p in self.outcomes:
            if abs(lam - eigenvalue) <= atol:
                return p
        return 0.0


def spectral(op, merge_tol=MERGE_TOL):
    """Spectral resolution of a Hermitian operator.

    Eigenvalues closer than ``merge_tol`` times the spectral range are merged
    into a single degenerate projector, which keeps projectors robust after
    floating-point eigensolves.
    """
    if not op.is_hermitian():
        raise ValueError("operator is not Hermitian")
    evals, vecs = np.linalg.eigh(op.matrix)
    spread = float(evals[-1] - evals[0])
    gap = merge_tol * max(spread, 1.0)
    groups = [[0]]
    for i in range(1, len(evals)):
        if evals[i] - evals[groups[-1][-1]] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    eigenvalues = []
    projectors = []
    for grp in groups:
        block = vecs[:, grp]
        eigenvalues.append(float(np.mean(evals[grp])))
        projectors.append(Operator(op.system, block @ block.conj().T))
    return Observable(op, tuple(eigenvalues), tuple(projectors))


def _real_prob(value):
    if abs(value.imag) > IMAG_ATOL:
        raise ValueError(f"probability has imaginary part {value.imag}")
    return float(value.real)


def prob(state, projector):
    """P = Tr(Pi rho)."""
    rho = as_density(state)
    return _real_prob(np.trace(projector.matrix @ rho.matrix))


def joint_prob(state, projectors):
    """Joint probability Tr(Pi_A Pi_B ... rho) for commuting full-space projectors."""
    rho = as_density(state)
    product = np.eye(rho.system.dim, dtype=complex)
    for p in projectors:
        product = product @ p.matrix
    return _real_prob(np.trace(product @ rho.matrix))


def conditioned_state(state, projector, floor=PROB_FLOOR):
    """Post-measurement state Pi rho Pi / Tr(Pi rho)."""
    rho = as_density(state)
    p = prob(rho, projector)
    if p <= floor:
        raise ZeroProbabilityError(f"zero-probability conditioning (P = {p})")
    mat = projector.matrix @ rho.matrix @ projector.matrix / p
    # symmetrise away the last bits of roundoff before validation
    mat = 0.5 * (mat + mat.conj().T)
    return DensityOperator(rho.system, mat)


def cond_prob(state, proj_a, proj_b, floor=PROB_FLOOR):
    """P(A=i | B=j) = Tr(Pi_A Pi_B rho) / Tr(Pi_B rho)."""
    rho = as_density(state)
    pb = prob(rho, proj_b)
    if pb <= floor:
        raise ZeroProbabilityError(f"zero-probability conditioning (P = {pb})")
    return joint_prob(rho, [proj_a, proj_b]) / pb


def unrecorded_state(state, observable):
    """State after an unrecorded measurement: sum_j Pi_j rho Pi_j."""
    rho = as_density(state)
    mat = np.zeros_like(rho.matrix)
    for p in observable.projectors:
        mat += p.matrix @ rho.matrix @ p.matrix
    mat = 0.5 * (mat + mat.conj().T)
    return DensityOperator(rho.system, mat)


def outcome_distribution(state, observable):
    probs = [prob(state, p) for p in observable.projectors]
    return OutcomeDistribution(tuple(zip(observable.eigenvalues, probs)))


def _check_commuting(observable, projector):
    comm = observable.operator.matrix @ projector.matrix \
        - projector.matrix @ observable.operator.matrix
    if np.linalg.norm(comm) > PROJ_ATOL:
        raise ValueError("target and conditioning projector do not commute")


def cond_mean(state, target, given, floor=PROB_FLOOR):
    """Conditioned mean sum_j mu_j P(j|i) of ``target`` given outcome projector ``given``."""
    _check_commuting(target, given)
    rho = as_density(state)
    p_given = prob(rho, given)
    if p_given <= floor:
        raise ZeroProbabilityError(f"zero-probability conditioning (P = {p_given})")
    mean = 0.0
    for mu, xi in zip(target.eigenvalues, target.projectors):
        mean += mu * joint_prob(rho, [xi, given]) / p_given
    return mean


def cond_variance(state, target, given, floor=PROB_FLOOR):
    """Conditioned variance sum_j (mu_j - mean)^2 P(j|i)."""
    _check_commuting(target, given)
    rho = as_density(state)
    p_given = prob(rho, given)
    if p_given <= floor:
        raise ZeroProbabilityError(f"zero-probability conditioning (P = {p_given})")
    cond = [joint_prob(rho, [xi, given]) / p_given for xi in target.projectors]
    mean = sum(mu * c for mu, c in zip(target.eigenvalues, cond))
    return sum((mu - mean) ** 2 * c for mu, c in zip(target.eigenvalues, cond))


def unrecorded_conditioned_variance(state, target, given_observable, floor=PROB_FLOOR):
    """Outcome-probability-weighted conditional variance.

    sum_i P(i) Var(target | given = i) over the outcomes of the conditioning
    observable.  Outcomes below the probability floor are skipped and the
    remaining weights renormalised.
    """
    rho = as_density(state)
    total = 0.0
    weight = 0.0
    for p_proj in given_observable.projectors:
        p_i = prob(rho, p_proj)
        if p_i <= floor:
            continue
        total += p_i * cond_variance(rho, target, p_proj, floor=floor)
        weight += p_i
    if weight < 1.0 - 1e-9:
        warnings.warn("skipped zero-probability conditioning sectors; "
                      "weights renormalised", RuntimeWarning)
    return total / weight
