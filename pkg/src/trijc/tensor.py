"""Dense complex linear algebra with explicit multipartite index bookkeeping.

All operators and states are plain complex ``numpy`` arrays.  A
:class:`MultipartiteShape` records which tensor factor each row/column index
block belongs to, so subsystem permutation, partial trace and partial
transpose can be written once and reused for atoms and cavities alike.

Basis convention: lexicographic product basis with the leftmost factor most
significant.  For three qubits the 1-based index of ``|abc>`` is
``4a + 2b + c + 1``, so e.g. element (1, 8) is the ``|000><111|`` coherence.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .numerics import HERMITICITY_TOL, PSD_TOL, TRACE_TOL

CANONICAL_LABELS = ("A", "B", "C", "X", "Y", "Z")


# ---------------------------------------------------------------------------
# Elementary operators
# ---------------------------------------------------------------------------

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |1> is the excited atomic level: sigma_plus = |1><0|, sigma_minus = |0><1|
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)


def destroy(dim: int) -> np.ndarray:
    """Annihilation operator on a Fock space truncated at ``dim`` levels."""
    return np.diag(np.sqrt(np.arange(1, dim)), 1).astype(complex)


def ket(index: int, dim: int) -> np.ndarray:
    """Basis vector |index> in a ``dim``-dimensional space."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: np.ndarray) -> np.ndarray:
    """Outer product |vec><vec|."""
    v = np.asarray(vec, dtype=complex)
    return np.outer(v, v.conj())


def dag(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose."""
    return m.conj().T


# ---------------------------------------------------------------------------
# Multipartite shapes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultipartiteShape:
    """Ordered list of (label, dimension) tensor factors.

    Labels come from the fixed alphabet A, B, C (atoms) and X, Y, Z
    (cavities).  The canonical global ordering is (A, B, C, X, Y, Z); stored
    density matrices always use it, intermediate shapes may not.
    """

    factors: tuple[tuple[str, int], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.factors]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate subsystem labels in {labels}")
        for lab, dim in self.factors:
            if lab not in CANONICAL_LABELS:
                raise ValueError(f"unknown subsystem label {lab!r}")
            if dim < 1:
                raise ValueError(f"subsystem {lab} has non-positive dimension {dim}")

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.factors)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(dim for _, dim in self.factors)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    def position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"label {label!r} not in shape {self.labels}") from None

    def dim_of(self, label: str) -> int:
        return self.factors[self.position(label)][1]

    def is_canonical(self) -> bool:
        order = [CANONICAL_LABELS.index(lab) for lab in self.labels]
        return order == sorted(order)

    def subshape(self, keep: Sequence[str]) -> "MultipartiteShape":
        """Shape restricted to ``keep``, in canonical label order."""
        keep_set = set(keep)
        unknown = keep_set - set(self.labels)
        if unknown:
            raise ValueError(f"labels {sorted(unknown)} not in shape {self.labels}")
        ordered = [f for f in self.factors if f[0] in keep_set]
        ordered.sort(key=lambda f: CANONICAL_LABELS.index(f[0]))
        return MultipartiteShape(tuple(ordered))


def shape_of(*factors: tuple[str, int]) -> MultipartiteShape:
    """Convenience constructor: ``shape_of(("A", 2), ("B", 2))``."""
    return MultipartiteShape(tuple(factors))


# ---------------------------------------------------------------------------
# Density matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, unit-trace, PSD matrix bound to a multipartite shape."""

    matrix: np.ndarray
    shape: MultipartiteShape

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got {m.shape}")
        if m.shape[0] != self.shape.dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match shape dimension {self.shape.dim}"
            )
        if not self.shape.is_canonical():
            raise ValueError(f"stored states must use canonical label order, got {self.shape.labels}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"trace {tr} deviates from 1 by more than {TRACE_TOL}")
        if np.abs(m - m.conj().T).max() > HERMITICITY_TOL:
            raise ValueError("matrix is not Hermitian within tolerance")
        lam_min = float(np.linalg.eigvalsh(m)[0])
        if lam_min < -PSD_TOL:
            raise ValueError(f"matrix has negative eigenvalue {lam_min}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.shape.dim

    def factor_dims(self) -> tuple[int, ...]:
        return self.shape.dims


# ---------------------------------------------------------------------------
# Core operations
# ---------------------------------------------------------------------------


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with complex dtype."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def kron_all(mats: Iterable[np.ndarray]) -> np.ndarray:
    out = None
    for m in mats:
        out = np.asarray(m, dtype=complex) if out is None else kron(out, m)
    if out is None:
        raise ValueError("kron_all needs at least one matrix")
    return out


def permute_subsystems(
    m: np.ndarray, shape: MultipartiteShape, perm: Sequence[str]
) -> np.ndarray:
    """Reindex rows and columns so the tensor factor order matches ``perm``.

    ``perm`` must be a permutation of the shape labels.  Applying the inverse
    permutation afterwards restores the input exactly.
    """
    if sorted(perm) != sorted(shape.labels):
        raise ValueError(f"{list(perm)} is not a permutation of {list(shape.labels)}")
    dims = shape.dims
    n = len(dims)
    src = [shape.position(lab) for lab in perm]
    axes = src + [n + p for p in src]
    d = shape.dim
    return (
        np.asarray(m, dtype=complex)
        .reshape(dims + dims)
        .transpose(axes)
        .reshape(d, d)
    )


def partial_trace(rho: DensityMatrix, keep: Sequence[str]) -> DensityMatrix:
    """Reduced state on ``keep`` (canonical order); trace is preserved."""
    if len(keep) == 0:
        raise ValueError("keep must name at least one subsystem")
    reduced = partial_trace_matrix(rho.matrix, rho.shape, keep)
    return DensityMatrix(reduced, rho.shape.subshape(keep))


def partial_trace_matrix(
    m: np.ndarray, shape: MultipartiteShape, keep: Sequence[str]
) -> np.ndarray:
    """Partial trace of a raw matrix over every factor not in ``keep``."""
    sub = shape.subshape(keep)  # validates labels, fixes canonical order
    keep_pos = sorted(shape.position(lab) for lab in sub.labels)
    dims = shape.dims
    n = len(dims)
    r = np.asarray(m, dtype=complex).reshape(dims + dims)
    idx = list(range(2 * n))
    for p in range(n):
        if p not in keep_pos:
            idx[n + p] = idx[p]
    out_idx = keep_pos + [n + p for p in keep_pos]
    reduced = np.einsum(r, idx, out_idx)
    return reduced.reshape(sub.dim, sub.dim)


def partial_transpose(
    rho: DensityMatrix | np.ndarray,
    subset: Sequence[str],
    shape: MultipartiteShape | None = None,
) -> np.ndarray:
    """Transpose applied to the ``subset`` factors only.

    Accepts a DensityMatrix, or a raw Hermitian matrix together with its
    shape (used for witness operators).  Applying the same partial transpose
    twice restores the input exactly.
    """
    if isinstance(rho, DensityMatrix):
        m, sh = rho.matrix, rho.shape
    else:
        if shape is None:
            raise ValueError("shape is required when passing a raw matrix")
        m, sh = np.asarray(rho, dtype=complex), shape
    positions = [sh.position(lab) for lab in subset]
    dims = sh.dims
    n = len(dims)
    axes = list(range(2 * n))
    for p in positions:
        axes[p], axes[n + p] = axes[n + p], axes[p]
    d = sh.dim
    return m.reshape(dims + dims).transpose(axes).reshape(d, d)


def check_hermitian(m: np.ndarray, tol: float = HERMITICITY_TOL) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    dev = np.abs(m - m.conj().T).max()
    if dev > tol:
        raise ValueError(f"matrix deviates from Hermitian by {dev:.3e} > {tol:.1e}")
    return m


def eigh(m: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending."""
    m = check_hermitian(m)
    w, v = np.linalg.eigh(m)
    return w, v


def psd_distance(m: np.ndarray) -> float:
    """max(0, -lambda_min): zero exactly when ``m`` is PSD."""
    w = np.linalg.eigvalsh(check_hermitian(m))
    return float(max(0.0, -w[0]))
