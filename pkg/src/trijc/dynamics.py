"""Exact resonant Jaynes-Cummings time evolution.

Each atom couples to its own cavity (A-X, B-Y, C-Z) with equal strength; the
only time variable is the dimensionless product ``gt``.  The per-pair
propagator is the closed-form resonant JC solution, block diagonal in the
total excitation number N = photon count + atomic excitation:

    <1,n|U|1,n>     = cos(gt sqrt(n+1))
    <0,n|U|0,n>     = cos(gt sqrt(n))
    <0,n+1|U|1,n>   = -i sin(gt sqrt(n+1))
    <1,n-1|U|0,n>   = -i sin(gt sqrt(n))

With a Fock cutoff ``f`` the state |1, f-1> would couple out of the truncated
space; it is completed as identity and guarded against: evolution refuses
states with support there.  For the initial states of this package (at most
one photon and one atomic excitation per pair) ``f = 3`` makes the truncated
dynamics exact, not approximate.

``oracle_evolve`` reaches the same propagator by spectral exponentiation of
the interaction Hamiltonian and shares no code with the closed form; it
exists purely as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import TRUNCATION_TOL, UNITARITY_TOL
from .tensor import (
    DensityMatrix,
    MultipartiteShape,
    SIGMA_MINUS,
    SIGMA_PLUS,
    dag,
    destroy,
    kron,
    partial_trace,
    permute_subsystems,
)

# pair order used when building the global propagator
PAIRS = (("A", "X"), ("B", "Y"), ("C", "Z"))


class TruncationError(ValueError):
    """State has support on the unreachable top excitation sector."""


@dataclass(frozen=True)
class PairUnitary:
    """Closed-form single-pair propagator on (atom, cavity) ordering."""

    matrix: np.ndarray
    gt: float
    fock_dim: int

    @property
    def top_state_index(self) -> int:
        """Index of |atom=1, photon=fock_dim-1>, the unreachable state."""
        return self.fock_dim + (self.fock_dim - 1)


def jc_unitary(gt: float, fock_dim: int) -> PairUnitary:
    """Resonant JC propagator for one atom-cavity pair.

    Basis ordering is (atom, cavity): index = atom * fock_dim + photon.
    """
    if fock_dim < 2:
        raise ValueError(f"fock_dim must be >= 2, got {fock_dim}")
    f = fock_dim
    u = np.zeros((2 * f, 2 * f), dtype=complex)

    def ix(atom: int, photon: int) -> int:
        return atom * f + photon

    u[ix(0, 0), ix(0, 0)] = 1.0
    for n in range(1, f):
        c = math.cos(gt * math.sqrt(n))
        s = math.sin(gt * math.sqrt(n))
        u[ix(0, n), ix(0, n)] = c
        u[ix(1, n - 1), ix(1, n - 1)] = c
        u[ix(1, n - 1), ix(0, n)] = -1j * s
        u[ix(0, n), ix(1, n - 1)] = -1j * s
    # top sector (atom excited, photon = f-1) is unreachable: identity action
    u[ix(1, f - 1), ix(1, f - 1)] = 1.0
    return PairUnitary(u, gt, f)


def _pair_shape(f: int) -> MultipartiteShape:
    return MultipartiteShape((("A", 2), ("B", 2), ("C", 2), ("X", f), ("Y", f), ("Z", f)))


def global_unitary(gt: float, fock_dim: int) -> np.ndarray:
    """U_AX x U_BY x U_CZ expressed in canonical order (A, B, C, X, Y, Z)."""
    up = jc_unitary(gt, fock_dim).matrix
    u_pairs = kron(kron(up, up), up)  # order (A, X, B, Y, C, Z)
    f = fock_dim
    pair_order = MultipartiteShape(
        (("A", 2), ("X", f), ("B", 2), ("Y", f), ("C", 2), ("Z", f))
    )
    return permute_subsystems(u_pairs, pair_order, ("A", "B", "C", "X", "Y", "Z"))


def _require_six_party(rho: DensityMatrix) -> int:
    labels = rho.shape.labels
    if labels != ("A", "B", "C", "X", "Y", "Z"):
        raise ValueError(f"expected full six-party state, got labels {labels}")
    f = rho.shape.dim_of("X")
    return f


def _top_sector_population(rho: DensityMatrix) -> float:
    """Total population of the per-pair (atom=1, photon=f-1) states."""
    f = _require_six_party(rho)
    diag = np.real(np.diag(rho.matrix)).reshape(2, 2, 2, f, f, f)
    pop = 0.0
    pop += diag[1, :, :, f - 1, :, :].sum()
    pop += diag[:, 1, :, :, f - 1, :].sum()
    pop += diag[:, :, 1, :, :, f - 1].sum()
    return float(pop)


def evolve(rho0: DensityMatrix, gt: float) -> DensityMatrix:
    """U rho0 U-dagger with the closed-form global propagator."""
    f = _require_six_party(rho0)
    top = _top_sector_population(rho0)
    if top > TRUNCATION_TOL:
        raise TruncationError(
            f"initial state has population {top:.3e} on the unreachable "
            f"(atom excited, photon = {f - 1}) sector; increase fock_dim"
        )
    u = global_unitary(gt, f)
    return DensityMatrix(u @ rho0.matrix @ dag(u), rho0.shape)


def oracle_evolve(rho0: DensityMatrix, gt: float) -> DensityMatrix:
    """Independent evolution oracle: exponentiate the interaction Hamiltonian.

    H/g = a-dagger sigma_minus + a sigma_plus per pair, exponentiated by
    spectral decomposition on the truncated space.
    """
    f = _require_six_party(rho0)
    top = _top_sector_population(rho0)
    if top > TRUNCATION_TOL:
        raise TruncationError(
            f"initial state has population {top:.3e} on the unreachable "
            f"(atom excited, photon = {f - 1}) sector; increase fock_dim"
        )
    a = destroy(f)
    h_pair = kron(SIGMA_MINUS, dag(a)) + kron(SIGMA_PLUS, a)
    eye_pair = np.eye(2 * f, dtype=complex)
    h_total = (
        kron(kron(h_pair, eye_pair), eye_pair)
        + kron(kron(eye_pair, h_pair), eye_pair)
        + kron(kron(eye_pair, eye_pair), h_pair)
    )
    pair_order = MultipartiteShape(
        (("A", 2), ("X", f), ("B", 2), ("Y", f), ("C", 2), ("Z", f))
    )
    h_total = permute_subsystems(h_total, pair_order, ("A", "B", "C", "X", "Y", "Z"))
    w, v = np.linalg.eigh(h_total)
    u = (v * np.exp(-1j * gt * w)) @ dag(v)
    return DensityMatrix(u @ rho0.matrix @ dag(u), rho0.shape)


def reduce(rho: DensityMatrix, keep: tuple[str, ...]) -> DensityMatrix:
    """Partial trace down to ``keep``, output in canonical order."""
    return partial_trace(rho, keep)


def pair_excitation_expectations(rho: DensityMatrix) -> dict[str, float]:
    """Expectation of N = photon count + atomic excitation for each pair."""
    f = _require_six_party(rho)
    n_atom = np.diag([0.0, 1.0])
    n_cav = np.diag(np.arange(f, dtype=float))
    out = {}
    for atom, cav in PAIRS:
        red = partial_trace(rho, (atom, cav))
        n_op = kron(n_atom, np.eye(f)) + kron(np.eye(2), n_cav)
        out[atom + cav] = float(np.real(np.trace(red.matrix @ n_op)))
    return out


def unitarity_defect(u: PairUnitary) -> float:
    """max |U-dagger U - I| restricted to the reachable subspace."""
    m = u.matrix
    g = dag(m) @ m
    defect = np.abs(g - np.eye(m.shape[0])).max()
    return float(defect)


def check_unitary(u: PairUnitary) -> None:
    d = unitarity_defect(u)
    if d > UNITARITY_TOL:
        raise ValueError(f"pair propagator unitarity defect {d:.3e}")
