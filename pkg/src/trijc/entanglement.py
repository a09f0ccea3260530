"""Closed-form entanglement detection: negativity and element-wise criteria.

Matrix element names follow the 1-based convention rho_ij on the three-qubit
product basis with |abc> at index 4a + 2b + c + 1, so rho18 is the
|000><111| coherence.  The bi-separability inequalities read, with this
numbering:

    GHZ-type:  |rho18| <= sqrt(rho22 rho77) + sqrt(rho33 rho66) + sqrt(rho44 rho55)
    (variant)  |rho27| <= sqrt(rho11 rho88) + sqrt(rho33 rho66) + sqrt(rho44 rho55)
    W-type:    |rho23| + |rho25| + |rho35| <=
                   sqrt(rho11 rho44) + sqrt(rho11 rho66) + sqrt(rho11 rho77)
                   + (rho22 + rho33 + rho55) / 2

Violation of either certifies genuine three-qubit entanglement; the W-type
right side without the (rho22+rho33+rho55)/2 term is a necessary condition
for full separability.  Non-violation certifies nothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import VIOLATION_TOL
from .tensor import DensityMatrix, partial_trace, partial_transpose

#: tracked coherences, as 0-based (row, col) pairs of the 8x8 atomic state
TRACKED_ELEMENTS = {
    "rho18": (0, 7),
    "rho27": (1, 6),
    "rho36": (2, 5),
    "rho45": (3, 4),
    "rho23": (1, 2),
    "rho25": (1, 4),
    "rho35": (2, 4),
    "rho46": (3, 5),
    "rho67": (5, 6),
    "rho47": (3, 6),
}


def negativity(rho: DensityMatrix, partition: tuple[tuple[str, ...], tuple[str, ...]]) -> float:
    """Sum of |negative eigenvalues| of the partial transpose over partition[0].

    The two label sets must partition the shape labels; the result is
    symmetric under swapping them.
    """
    first, second = (tuple(partition[0]), tuple(partition[1]))
    labels = set(rho.shape.labels)
    if set(first) | set(second) != labels or set(first) & set(second) or not first or not second:
        raise ValueError(
            f"({first}, {second}) does not bipartition the subsystems {sorted(labels)}"
        )
    pt = partial_transpose(rho, first)
    w = np.linalg.eigvalsh(pt)
    return float(-w[w < 0.0].sum())


def _require_three_qubits(rho: DensityMatrix) -> np.ndarray:
    if rho.dim != 8 or rho.shape.dims != (2, 2, 2):
        raise ValueError(f"expected a three-qubit state, got dims {rho.shape.dims}")
    return rho.matrix


def tracked_elements(rho_abc: DensityMatrix) -> dict[str, complex]:
    """The ten coherences entering the GHZ/W-type criteria."""
    m = _require_three_qubits(rho_abc)
    return {name: complex(m[i, j]) for name, (i, j) in TRACKED_ELEMENTS.items()}


@dataclass(frozen=True)
class CriteriaReport:
    """Left/right sides and violation flags of the element-wise criteria."""

    ghz_lhs: float
    ghz_rhs: float
    ghz_violated: bool
    ghz27_lhs: float
    ghz27_rhs: float
    ghz27_violated: bool
    w_lhs: float
    w_rhs: float
    w_violated: bool
    fullsep_lhs: float
    fullsep_rhs: float
    fullsep_violated: bool
    tracked: dict[str, complex]

    @property
    def any_genuine_violation(self) -> bool:
        """True when genuine three-qubit entanglement is certified."""
        return self.ghz_violated or self.ghz27_violated or self.w_violated


def biseparability_criteria(rho_abc: DensityMatrix) -> CriteriaReport:
    """Evaluate the GHZ-type, W-type and full-separability inequalities."""
    m = _require_three_qubits(rho_abc)
    d = np.real(np.diag(m))

    def sq(i: int, j: int) -> float:
        return math.sqrt(max(d[i], 0.0) * max(d[j], 0.0))

    ghz_lhs = abs(m[0, 7])
    ghz_rhs = sq(1, 6) + sq(2, 5) + sq(3, 4)
    ghz27_lhs = abs(m[1, 6])
    ghz27_rhs = sq(0, 7) + sq(2, 5) + sq(3, 4)
    w_lhs = abs(m[1, 2]) + abs(m[1, 4]) + abs(m[2, 4])
    fullsep_rhs = sq(0, 3) + sq(0, 5) + sq(0, 6)
    w_rhs = fullsep_rhs + 0.5 * (d[1] + d[2] + d[4])

    def viol(lhs: float, rhs: float) -> bool:
        return lhs > rhs + VIOLATION_TOL

    return CriteriaReport(
        ghz_lhs=float(ghz_lhs),
        ghz_rhs=float(ghz_rhs),
        ghz_violated=viol(ghz_lhs, ghz_rhs),
        ghz27_lhs=float(ghz27_lhs),
        ghz27_rhs=float(ghz27_rhs),
        ghz27_violated=viol(ghz27_lhs, ghz27_rhs),
        w_lhs=float(w_lhs),
        w_rhs=float(w_rhs),
        w_violated=viol(w_lhs, w_rhs),
        fullsep_lhs=float(w_lhs),
        fullsep_rhs=float(fullsep_rhs),
        fullsep_violated=viol(w_lhs, fullsep_rhs),
        tracked=tracked_elements(rho_abc),
    )


def b_block_coherence(rho_abc: DensityMatrix) -> float:
    """Frobenius norm of the <a,0,c| rho |a',1,c'> block.

    Zero certifies that rho is block diagonal in atom B's populations, i.e.
    a convex combination p1 rho1_AC x |0><0|_B + p2 rho2_AC x |1><1|_B,
    which is manifestly bi-separable across B | AC.
    """
    m = _require_three_qubits(rho_abc)
    t = m.reshape(2, 2, 2, 2, 2, 2)
    block = t[:, 0, :, :, 1, :]
    return float(np.linalg.norm(block))


def b_block_decomposition(
    rho_abc: DensityMatrix,
) -> tuple[float, np.ndarray, float, np.ndarray]:
    """Weights and normalised AC blocks of the B-diagonal decomposition.

    Only meaningful when ``b_block_coherence`` vanishes; the blocks are the
    diagonal-in-B principal submatrices, PSD whenever rho is.
    """
    m = _require_three_qubits(rho_abc)
    t = m.reshape(2, 2, 2, 2, 2, 2)
    blocks = []
    for b in (0, 1):
        blk = t[:, b, :, :, b, :].reshape(4, 4)
        p = float(np.real(np.trace(blk)))
        blocks.append((p, blk / p if p > 1e-15 else blk))
    (p1, r1), (p2, r2) = blocks
    return p1, r1, p2, r2


def reconstruct_from_b_blocks(rho_abc: DensityMatrix) -> np.ndarray:
    """Drop the B-coherence block; equals rho exactly when its norm is zero."""
    m = _require_three_qubits(rho_abc).copy()
    t = m.reshape(2, 2, 2, 2, 2, 2)
    t[:, 0, :, :, 1, :] = 0.0
    t[:, 1, :, :, 0, :] = 0.0
    return t.reshape(8, 8)
