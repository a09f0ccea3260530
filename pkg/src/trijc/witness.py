"""Genuine-multipartite-entanglement quantification via PPT-mixture witnesses.

The measure is the optimum of

    min Tr(W rho)   s.t. for every bipartition M|Mbar:
                         W = P_M + Q_M^{T_M},  0 <= P_M <= 1,  0 <= Q_M <= 1,

i.e. W ranges over operators that are decomposable entanglement witnesses
for every bipartition.  A negative optimum certifies that rho is not a PPT
mixture and hence genuinely multipartite entangled; the absolute value is
an entanglement monotone (genuine negativity).  A vanishing optimum is
inconclusive: some genuinely entangled states are PPT mixtures.  For two
parties the measure coincides with negativity.

``verify_witness`` re-derives every feasibility residual from the reported
(W, P_M, Q_M) using only dense eigensolves and partial transposes - an
independent code path from the solver - so any feasible W with
Tr(W rho) < 0 stands as a certificate regardless of solver internals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import GENUINE_NEGATIVITY_FLOOR, SDP_FEAS_TOL, SDP_GAP_TOL
from .sdp import (
    BlockVar,
    Equality,
    EqTerm,
    SdpProblem,
    SdpSolution,
    _compile as _sdp_compile,
    sdp_solve,
)
from .tensor import DensityMatrix, MultipartiteShape, partial_transpose

__all__ = ["BipartitionDecomposition", "WitnessReport", "ppt_mixture_measure", "verify_witness"]


@dataclass(frozen=True)
class BipartitionDecomposition:
    """W = P + Q^{T_M} certificate data for one bipartition M | complement."""

    m_side: tuple[str, ...]
    p: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class WitnessReport:
    """Optimal witness, per-bipartition decomposition and solve diagnostics."""

    value: float
    genuine_negativity: float
    witness: np.ndarray
    decompositions: dict[str, BipartitionDecomposition]
    residuals: dict[str, float]
    shape: MultipartiteShape
    iterations: int
    duality_gap: float
    backend: str


def bipartitions(labels: tuple[str, ...]) -> list[tuple[str, ...]]:
    """One representative M side per bipartition M | complement.

    The PT constraint over M is equivalent to the one over its complement,
    so each unordered bipartition appears once, keyed by its smaller side.
    """
    n = len(labels)
    if n < 2:
        raise ValueError("need at least two parties to bipartition")
    sides = []
    rest = labels[1:]
    for mask in range(1 << (n - 1)):
        side = [labels[0]] + [rest[i] for i in range(n - 1) if mask & (1 << i)]
        if len(side) == n:
            continue
        complement = tuple(l for l in labels if l not in side)
        chosen = tuple(side) if len(side) <= len(complement) else complement
        sides.append(tuple(sorted(chosen, key=labels.index)))
    return sides


def _partition_key(m_side: tuple[str, ...], labels: tuple[str, ...]) -> str:
    other = "".join(l for l in labels if l not in m_side)
    return "".join(m_side) + "|" + other


_STRUCTURE_CACHE: dict[tuple, object] = {}


def _witness_problem(rho: DensityMatrix) -> SdpProblem:
    labels = rho.shape.labels
    shape = rho.shape
    blocks = [BlockVar("W", shape, bounded=False)]
    equalities = []
    for m_side in bipartitions(labels):
        key = _partition_key(m_side, labels)
        blocks.append(BlockVar(f"P:{key}", shape, bounded=True))
        blocks.append(BlockVar(f"Q:{key}", shape, bounded=True))
        equalities.append(
            Equality(
                terms=(
                    EqTerm(1.0, "W"),
                    EqTerm(-1.0, f"P:{key}"),
                    EqTerm(-1.0, f"Q:{key}", transpose=m_side),
                )
            )
        )
    return SdpProblem(
        blocks=tuple(blocks),
        equalities=tuple(equalities),
        objective=(("W", rho.matrix),),
    )


def ppt_mixture_measure(
    rho: DensityMatrix,
    gap_tol: float = SDP_GAP_TOL,
    feas_tol: float = SDP_FEAS_TOL,
) -> WitnessReport:
    """Solve the PPT-mixture witness program for a 2- or 3-party state.

    Raises :class:`trijc.sdp.SdpConvergenceError` when the solver cannot
    meet its tolerance contract; never silently returns a bad optimum.
    """
    labels = rho.shape.labels
    shape = rho.shape
    sides = bipartitions(labels)
    problem = _witness_problem(rho)

    # the LMI structure depends only on the shape; sweeps reuse it
    cache_key = shape.factors
    compiled = _STRUCTURE_CACHE.get(cache_key)
    if compiled is None:
        compiled = _sdp_compile(problem)
        _STRUCTURE_CACHE[cache_key] = compiled
    solution: SdpSolution = sdp_solve(
        problem, gap_tol=gap_tol, feas_tol=feas_tol, compiled=compiled
    )

    witness = solution.variables["W"]
    decomps = {}
    for m_side in sides:
        key = _partition_key(m_side, labels)
        decomps[key] = BipartitionDecomposition(
            m_side=m_side,
            p=solution.variables[f"P:{key}"],
            q=solution.variables[f"Q:{key}"],
        )
    value = solution.objective
    gn = max(0.0, -value)
    if gn < GENUINE_NEGATIVITY_FLOOR:
        gn = 0.0
    report = WitnessReport(
        value=value,
        genuine_negativity=gn,
        witness=witness,
        decompositions=decomps,
        residuals=dict(solution.residuals),
        shape=shape,
        iterations=solution.iterations,
        duality_gap=solution.duality_gap,
        backend=solution.backend,
    )
    return report


def verify_witness(report: WitnessReport, rho: DensityMatrix) -> float:
    """Recompute Tr(W rho) and every feasibility residual from scratch.

    Returns the maximum residual: eigenvalue bounds of each P_M and Q_M,
    the decomposition defect max|W - (P_M + Q_M^{T_M})|, and the deviation
    of Tr(W rho) from the reported value.  Independent of the solver code.
    """
    if rho.shape != report.shape:
        raise ValueError(
            f"state shape {rho.shape.labels} does not match report shape {report.shape.labels}"
        )
    w = np.asarray(report.witness)
    worst = float(np.abs(w - w.conj().T).max())
    trace_value = float(np.real(np.trace(w @ rho.matrix)))
    worst = max(worst, abs(trace_value - report.value))
    for key, dec in report.decompositions.items():
        for mat in (dec.p, dec.q):
            eigs = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
            worst = max(worst, -float(eigs[0]), float(eigs[-1]) - 1.0, 0.0)
        q_pt = partial_transpose(dec.q, dec.m_side, report.shape)
        worst = max(worst, float(np.abs(w - (dec.p + q_pt)).max()))
    return worst
