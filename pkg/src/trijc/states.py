"""Initial states: Werner pairs, qubit/cavity superpositions, full product state.

The six parties are three atoms A, B, C and three cavities X, Y, Z, paired
A-X, B-Y, C-Z.  Atoms A and B share a Werner state with weight ``alpha``,
cavities Y and Z share one with weight ``gamma``; atom C and cavity X start
in pure superpositions parametrised by ``beta`` and ``kappa``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .tensor import DensityMatrix, MultipartiteShape, kron_all, shape_of

INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class JCConfig:
    """Physical and numerical parameters of one simulation point.

    alpha, gamma weight the atomic and cavity Werner states, beta and kappa
    set the atom-C and cavity-X superpositions, ``gt`` is the dimensionless
    coupling-time and ``fock_dim`` the per-cavity Fock truncation.
    """

    alpha: float = 0.95
    gamma: float = 0.95
    beta: float = INV_SQRT2
    kappa: float = INV_SQRT2
    fock_dim: int = 3
    gt: float = 0.0

    def __post_init__(self):
        for name in ("alpha", "gamma", "beta", "kappa"):
            val = getattr(self, name)
            if not 0.0 <= val <= 1.0:
                raise ValueError(f"{name} = {val} outside [0, 1]")
        if self.fock_dim < 3:
            # one level above the maximum initial photon number keeps the
            # truncated dynamics exact (see dynamics module)
            raise ValueError(f"fock_dim must be >= 3, got {self.fock_dim}")
        if not math.isfinite(self.gt):
            raise ValueError("gt must be finite")

    def with_gt(self, gt: float) -> "JCConfig":
        return replace(self, gt=gt)


def werner_pair(
    p: float, dim_per_party: int, labels: tuple[str, str] = ("A", "B")
) -> DensityMatrix:
    """p |psi-><psi-| + (1-p)/4 * identity on the {0,1} x {0,1} subspace.

    ``|psi-> = (|01> - |10>)/sqrt(2)`` lives in the lowest two levels of each
    party; for ``dim_per_party > 2`` the remaining levels are zero-padded.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight p = {p} outside [0, 1]")
    if dim_per_party < 2:
        raise ValueError("dim_per_party must be >= 2")
    d = dim_per_party
    psi = np.zeros(d * d, dtype=complex)
    psi[0 * d + 1] = INV_SQRT2
    psi[1 * d + 0] = -INV_SQRT2
    rho = p * np.outer(psi, psi.conj())
    for a in (0, 1):
        for b in (0, 1):
            rho[a * d + b, a * d + b] += (1.0 - p) / 4.0
    return DensityMatrix(rho, shape_of((labels[0], d), (labels[1], d)))


def qubit_superposition(b: float, label: str = "C") -> DensityMatrix:
    """Projector onto b|0> + sqrt(1-b^2)|1> for a single atom."""
    if not 0.0 <= b <= 1.0:
        raise ValueError(f"amplitude b = {b} outside [0, 1]")
    v = np.array([b, math.sqrt(1.0 - b * b)], dtype=complex)
    return DensityMatrix(np.outer(v, v.conj()), shape_of((label, 2)))


def cavity_superposition(k: float, fock_dim: int, label: str = "X") -> DensityMatrix:
    """Projector onto k|0> + sqrt(1-k^2)|1> embedded in the truncated Fock space."""
    if not 0.0 <= k <= 1.0:
        raise ValueError(f"amplitude k = {k} outside [0, 1]")
    if fock_dim < 3:
        raise ValueError(f"fock_dim must be >= 3, got {fock_dim}")
    v = np.zeros(fock_dim, dtype=complex)
    v[0] = k
    v[1] = math.sqrt(1.0 - k * k)
    return DensityMatrix(np.outer(v, v.conj()), shape_of((label, fock_dim)))


def assemble_initial(cfg: JCConfig) -> DensityMatrix:
    """Full six-party product state in canonical order (A, B, C, X, Y, Z)."""
    f = cfg.fock_dim
    rho_ab = werner_pair(cfg.alpha, 2, labels=("A", "B"))
    rho_c = qubit_superposition(cfg.beta, label="C")
    rho_x = cavity_superposition(cfg.kappa, f, label="X")
    rho_yz = werner_pair(cfg.gamma, f, labels=("Y", "Z"))
    full = kron_all([rho_ab.matrix, rho_c.matrix, rho_x.matrix, rho_yz.matrix])
    shape = MultipartiteShape(
        (("A", 2), ("B", 2), ("C", 2), ("X", f), ("Y", f), ("Z", f))
    )
    return DensityMatrix(full, shape)
