"""Small dense SDP solver front end.

Problems are stated over named Hermitian variable blocks with affine
equality constraints between them (terms may carry a partial transpose) and
optional spectral box bounds 0 <= X <= 1 per block.  That is exactly the
shape of the PPT-mixture witness program, and general enough for the toy
problems used in tests.

Compilation pipeline:

1. Hermitian matrices are written in coordinates over an orthonormal basis
   of the real vector space of Hermitian matrices, so partial transposes
   become orthogonal coordinate maps.
2. Blocks that occur in exactly one equality are eliminated structurally
   (the PPT-mixture program loses its P_M blocks this way, keeping the
   coefficient structure block sparse).  Any remaining equalities are
   removed with an SVD nullspace parametrisation.
3. Every bounded block contributes two PSD constraint blocks (X >= 0 and
   I - X >= 0), real-embedded via H -> [[Re H, -Im H], [Im H, Re H]],
   which doubles eigenvalues and preserves positive semidefiniteness.
4. The kernel (`_kernels.ipm_solve`) minimises the objective over the
   resulting block LMI.

The embedding and its inverse are exact round trips and are tested as such.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import backend_name, ipm_solve
from .numerics import SDP_FEAS_TOL, SDP_GAP_TOL
from .tensor import MultipartiteShape, check_hermitian, partial_transpose

__all__ = [
    "BlockVar",
    "EqTerm",
    "Equality",
    "SdpProblem",
    "SdpSolution",
    "SdpConvergenceError",
    "sdp_solve",
    "herm_basis",
    "herm_to_coords",
    "coords_to_herm",
    "real_embed",
    "real_unembed",
]


# ---------------------------------------------------------------------------
# Hermitian coordinates and real embedding
# ---------------------------------------------------------------------------

_BASIS_CACHE: dict[int, np.ndarray] = {}


def herm_basis(d: int) -> np.ndarray:
    """Orthonormal basis of d x d Hermitian matrices under tr(AB)."""
    cached = _BASIS_CACHE.get(d)
    if cached is not None:
        return cached
    mats = []
    for i in range(d):
        e = np.zeros((d, d), dtype=complex)
        e[i, i] = 1.0
        mats.append(e)
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    for i in range(d):
        for j in range(i + 1, d):
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = e[j, i] = inv_sqrt2
            mats.append(e)
            e = np.zeros((d, d), dtype=complex)
            e[i, j] = -1j * inv_sqrt2
            e[j, i] = 1j * inv_sqrt2
            mats.append(e)
    basis = np.array(mats)
    basis.setflags(write=False)
    _BASIS_CACHE[d] = basis
    return basis


def herm_to_coords(h: np.ndarray) -> np.ndarray:
    """Real coordinates of a Hermitian matrix over `herm_basis`."""
    d = h.shape[0]
    basis = herm_basis(d)
    return np.real(np.tensordot(basis.conj(), h, axes=([1, 2], [0, 1])))


def coords_to_herm(x: np.ndarray, d: int) -> np.ndarray:
    """Inverse of `herm_to_coords`."""
    return np.tensordot(x, herm_basis(d), axes=(0, 0))


def real_embed(h: np.ndarray) -> np.ndarray:
    """Hermitian -> real symmetric with doubled eigenvalues."""
    re, im = h.real, h.imag
    return np.block([[re, -im], [im, re]])


def real_unembed(s: np.ndarray) -> np.ndarray:
    """Left inverse of `real_embed` (averages the redundant copies)."""
    d = s.shape[0] // 2
    re = 0.5 * (s[:d, :d] + s[d:, d:])
    im = 0.5 * (s[d:, :d] - s[:d, d:])
    return re + 1j * im


_PT_CACHE: dict[tuple, np.ndarray] = {}


def _pt_coord_matrix(shape: MultipartiteShape, subset: tuple[str, ...]) -> np.ndarray:
    """Coordinate-space matrix of the partial transpose over ``subset``."""
    key = (shape.factors, tuple(sorted(subset)))
    cached = _PT_CACHE.get(key)
    if cached is not None:
        return cached
    d = shape.dim
    basis = herm_basis(d)
    cols = []
    for q in range(basis.shape[0]):
        transposed = partial_transpose(basis[q], subset, shape)
        cols.append(herm_to_coords(transposed))
    t = np.array(cols).T
    t.setflags(write=False)
    _PT_CACHE[key] = t
    return t


# ---------------------------------------------------------------------------
# Problem statement
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BlockVar:
    """Named Hermitian variable; ``bounded`` adds the spectral box [0, 1]."""

    name: str
    shape: MultipartiteShape
    bounded: bool = True

    @property
    def dim(self) -> int:
        return self.shape.dim

    @property
    def ncoords(self) -> int:
        return self.dim * self.dim


@dataclass(frozen=True)
class EqTerm:
    coeff: float
    block: str
    transpose: tuple[str, ...] = ()


@dataclass(frozen=True)
class Equality:
    """sum_j coeff_j * T_j(X_{block_j}) = rhs (rhs defaults to zero)."""

    terms: tuple[EqTerm, ...]
    rhs: np.ndarray | None = None


@dataclass(frozen=True)
class SdpProblem:
    """Linear objective over Hermitian blocks with equalities and box bounds."""

    blocks: tuple[BlockVar, ...]
    equalities: tuple[Equality, ...] = ()
    objective: tuple[tuple[str, np.ndarray], ...] = ()

    def __post_init__(self):
        names = [b.name for b in self.blocks]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate block names: {names}")
        by_name = {b.name: b for b in self.blocks}
        for eq in self.equalities:
            if not eq.terms:
                raise ValueError("equality with no terms")
            dims = set()
            for term in eq.terms:
                if term.block not in by_name:
                    raise ValueError(f"equality references unknown block {term.block!r}")
                dims.add(by_name[term.block].dim)
            if len(dims) != 1:
                raise ValueError("equality mixes blocks of different dimension")
            if eq.rhs is not None:
                check_hermitian(np.asarray(eq.rhs, dtype=complex))
                if eq.rhs.shape[0] != dims.pop():
                    raise ValueError("equality rhs has wrong dimension")
        for name, cmat in self.objective:
            if name not in by_name:
                raise ValueError(f"objective references unknown block {name!r}")
            check_hermitian(np.asarray(cmat, dtype=complex))
            if np.asarray(cmat).shape[0] != by_name[name].dim:
                raise ValueError(f"objective matrix for {name!r} has wrong dimension")

    def block(self, name: str) -> BlockVar:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)


@dataclass
class SdpSolution:
    """Solver output: block values, objective, and certificate quality."""

    variables: dict[str, np.ndarray]
    objective: float
    duality_gap: float
    residuals: dict[str, float]
    iterations: int
    status: str
    backend: str = field(default_factory=backend_name)

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0


class SdpConvergenceError(RuntimeError):
    """Solver failed to meet the tolerance contract; best iterate attached."""

    def __init__(self, message: str, solution: SdpSolution):
        super().__init__(message)
        self.solution = solution


# ---------------------------------------------------------------------------
# Compilation
# ---------------------------------------------------------------------------


class _Expr:
    """Affine coordinate expression: const + sum_f coef[f] @ x_f."""

    def __init__(self, ncoords: int):
        self.const = np.zeros(ncoords)
        self.coefs: dict[str, np.ndarray] = {}

    def add(self, name: str, mat: np.ndarray) -> None:
        if name in self.coefs:
            self.coefs[name] = self.coefs[name] + mat
        else:
            self.coefs[name] = mat


def _eliminate(problem: SdpProblem):
    """Structural elimination of blocks that occur in exactly one equality.

    Returns (exprs, remaining_equalities, free_names).  ``exprs`` maps every
    block name to an affine expression over the free blocks.
    """
    occurrences: dict[str, int] = {}
    for eq in problem.equalities:
        for term in eq.terms:
            occurrences[term.block] = occurrences.get(term.block, 0) + 1

    exprs: dict[str, _Expr] = {}
    free = {b.name for b in problem.blocks}
    remaining = []
    for eq in problem.equalities:
        target = None
        for term in eq.terms:
            appears_here = sum(1 for t in eq.terms if t.block == term.block)
            if occurrences.get(term.block, 0) == 1 and appears_here == 1 and term.coeff != 0:
                target = term
                break
        if target is None:
            remaining.append(eq)
            continue
        dim = problem.block(target.block).dim
        nc = dim * dim
        expr = _Expr(nc)
        rhs = eq.rhs if eq.rhs is not None else np.zeros((dim, dim), dtype=complex)
        rhs_coords = herm_to_coords(np.asarray(rhs, dtype=complex))
        # target: c_e T_e(X_e) = rhs - sum_others ->
        # X_e = T_e^{-1}[(rhs - sum_others)/c_e]; partial transpose is an involution
        t_e = (
            _pt_coord_matrix(problem.block(target.block).shape, target.transpose)
            if target.transpose
            else None
        )

        def apply_te(vec_or_mat):
            if t_e is None:
                return vec_or_mat
            return t_e @ vec_or_mat

        expr.const = apply_te(rhs_coords / target.coeff)
        for term in eq.terms:
            if term is target:
                continue
            t_j = (
                _pt_coord_matrix(problem.block(term.block).shape, term.transpose)
                if term.transpose
                else np.eye(nc)
            )
            expr.add(term.block, apply_te(-(term.coeff / target.coeff) * t_j))
        exprs[target.block] = expr
        free.discard(target.block)

    for name in free:
        nc = problem.block(name).ncoords
        expr = _Expr(nc)
        expr.add(name, np.eye(nc))
        exprs[name] = expr
    return exprs, remaining, free


@dataclass
class _Compiled:
    goffs: np.ndarray
    roffs: np.ndarray
    rbounds: np.ndarray
    gmats: np.ndarray
    f0: np.ndarray
    c: np.ndarray
    obj_const: float
    nz: int
    recover: "callable"
    build_objective: "callable"
    constraint_names: list[str]
    block_dims: dict[str, int]


def _compile(problem: SdpProblem) -> _Compiled:
    exprs, remaining, free = _eliminate(problem)
    free_order = [b.name for b in problem.blocks if b.name in free]

    slices: dict[str, tuple[int, int]] = {}
    pos = 0
    for name in free_order:
        nc = problem.block(name).ncoords
        slices[name] = (pos, pos + nc)
        pos += nc
    nx = pos

    if remaining:
        # nullspace parametrisation x = x0 + N z over the free coordinates
        rows = []
        rhs_rows = []
        for eq in remaining:
            dim = problem.block(eq.terms[0].block).dim
            nc = dim * dim
            row = np.zeros((nc, nx))
            for term in eq.terms:
                t_j = (
                    _pt_coord_matrix(problem.block(term.block).shape, term.transpose)
                    if term.transpose
                    else np.eye(nc)
                )
                lo, hi = slices[term.block]
                row[:, lo:hi] += term.coeff * t_j
            rows.append(row)
            rhs = eq.rhs if eq.rhs is not None else np.zeros((dim, dim), dtype=complex)
            rhs_rows.append(herm_to_coords(np.asarray(rhs, dtype=complex)))
        emat = np.vstack(rows)
        fvec = np.concatenate(rhs_rows)
        x0, *_ = np.linalg.lstsq(emat, fvec, rcond=None)
        if np.abs(emat @ x0 - fvec).max() > 1e-9:
            raise ValueError("equality constraints are infeasible")
        u, s, vt = np.linalg.svd(emat)
        rank = int(np.sum(s > max(emat.shape) * np.finfo(float).eps * (s[0] if s.size else 1.0)))
        nmat = vt[rank:].T
        nz = nmat.shape[1]
    else:
        x0 = np.zeros(nx)
        nmat = None
        nz = nx

    def coord_map(name: str) -> tuple[np.ndarray, list[tuple[int, int, np.ndarray]]]:
        """const coords and per-z-range jacobians of block ``name``."""
        expr = exprs[name]
        const = expr.const.copy()
        pieces = []
        for fname, coefmat in expr.coefs.items():
            lo, hi = slices[fname]
            const += coefmat @ x0[lo:hi]
            if nmat is None:
                pieces.append((lo, hi, coefmat))
            else:
                pieces.append((0, nz, coefmat @ nmat[lo:hi]))
        if nmat is not None and len(pieces) > 1:
            total = np.zeros((const.shape[0], nz))
            for _, _, jac in pieces:
                total += jac
            pieces = [(0, nz, total)]
        return const, pieces

    # objective (rebuildable so callers can reuse the structure for new data)
    def build_objective(objective) -> tuple[np.ndarray, float]:
        c = np.zeros(nz)
        obj_const = 0.0
        for name, cmat in objective:
            ccoords = herm_to_coords(np.asarray(cmat, dtype=complex))
            const, pieces = coord_map(name)
            obj_const += float(ccoords @ const)
            for lo, hi, jac in pieces:
                c[lo:hi] += ccoords @ jac
        return c, obj_const

    c, obj_const = build_objective(problem.objective)

    # constraint blocks
    bounded = [b for b in problem.blocks if b.bounded]
    if not bounded:
        raise ValueError("problem has no PSD constraints; nothing bounds the optimum")
    d_max = max(b.dim for b in bounded)
    bs = 2 * d_max

    goffs = [0]
    roffs = [0]
    rbounds: list[tuple[int, int]] = []
    gmats: list[np.ndarray] = []
    f0_list: list[np.ndarray] = []
    names: list[str] = []

    def pad(mat: np.ndarray, fill_identity: bool) -> np.ndarray:
        if mat.shape[0] == bs:
            return mat
        out = np.zeros((bs, bs))
        out[: mat.shape[0], : mat.shape[1]] = mat
        if fill_identity:
            for i in range(mat.shape[0], bs):
                out[i, i] = 1.0
        return out

    for b in bounded:
        const, pieces = coord_map(b.name)
        d = b.dim
        basis = herm_basis(d)
        h0 = coords_to_herm(const, d)
        for sign, base_mat, label in (
            (1.0, np.zeros((d, d), dtype=complex), f"{b.name}>=0"),
            (-1.0, np.eye(d, dtype=complex), f"{b.name}<=1"),
        ):
            f0_list.append(pad(real_embed(base_mat + sign * h0), True))
            names.append(label)
            for lo, hi, jac in pieces:
                rbounds.append((lo, hi))
                for q in range(hi - lo):
                    hmat = np.tensordot(jac[:, q], basis, axes=(0, 0))
                    gmats.append(pad(sign * real_embed(hmat), False))
            roffs.append(len(rbounds))
            goffs.append(len(gmats))

    goffs_arr = np.asarray(goffs, dtype=np.int64)
    roffs_arr = np.asarray(roffs, dtype=np.int64)
    rbounds_arr = (
        np.asarray(rbounds, dtype=np.int64)
        if rbounds
        else np.zeros((0, 2), dtype=np.int64)
    )
    gmats_arr = (
        np.ascontiguousarray(np.array(gmats))
        if gmats
        else np.zeros((0, bs, bs))
    )
    f0_arr = np.ascontiguousarray(np.array(f0_list))

    touched = np.zeros(nz, dtype=bool)
    for lo, hi in rbounds:
        touched[lo:hi] = True
    if not np.all(touched):
        missing = int(np.flatnonzero(~touched)[0])
        raise ValueError(
            f"coordinate {missing} of the reduced variable is unconstrained; "
            "the problem is unbounded or ill-posed"
        )

    def recover(z: np.ndarray) -> dict[str, np.ndarray]:
        out = {}
        for blk in problem.blocks:
            const, pieces = coord_map(blk.name)
            coords = const.copy()
            for lo, hi, jac in pieces:
                coords += jac @ z[lo:hi]
            out[blk.name] = coords_to_herm(coords, blk.dim)
        return out

    return _Compiled(
        goffs=goffs_arr,
        roffs=roffs_arr,
        rbounds=rbounds_arr,
        gmats=gmats_arr,
        f0=f0_arr,
        c=c,
        obj_const=obj_const,
        nz=nz,
        recover=recover,
        build_objective=build_objective,
        constraint_names=names,
        block_dims={b.name: b.dim for b in problem.blocks},
    )


# ---------------------------------------------------------------------------
# Solving
# ---------------------------------------------------------------------------


def _recomputed_residuals(problem: SdpProblem, variables: dict[str, np.ndarray]) -> dict[str, float]:
    """Feasibility slacks evaluated from the recovered complex blocks."""
    res: dict[str, float] = {}
    for b in problem.blocks:
        if not b.bounded:
            continue
        val = variables[b.name]
        w = np.linalg.eigvalsh(0.5 * (val + val.conj().T))
        res[f"{b.name}>=0"] = float(max(0.0, -w[0]))
        res[f"{b.name}<=1"] = float(max(0.0, w[-1] - 1.0))
    for k, eq in enumerate(problem.equalities):
        dim = problem.block(eq.terms[0].block).dim
        acc = np.zeros((dim, dim), dtype=complex)
        for term in eq.terms:
            val = variables[term.block]
            if term.transpose:
                val = partial_transpose(val, term.transpose, problem.block(term.block).shape)
            acc = acc + term.coeff * val
        rhs = eq.rhs if eq.rhs is not None else 0.0
        res[f"eq{k}"] = float(np.abs(acc - rhs).max())
    return res


def sdp_solve(
    problem: SdpProblem,
    gap_tol: float = SDP_GAP_TOL,
    feas_tol: float = SDP_FEAS_TOL,
    max_iter: int = 100,
    compiled: _Compiled | None = None,
) -> SdpSolution:
    """Solve the problem to the tolerance contract or raise.

    Deterministic for identical inputs.  On success the returned solution
    satisfies duality gap <= gap_tol and every recomputed feasibility
    residual <= feas_tol.  Non-convergence raises
    :class:`SdpConvergenceError` carrying the best iterate and residuals.

    ``compiled`` lets callers reuse a compiled structure across states of
    identical shape; it must come from a problem differing only in the
    objective data.
    """
    if compiled is None:
        compiled = _compile(problem)
        cvec, obj_const = compiled.c, compiled.obj_const
    else:
        cvec, obj_const = compiled.build_objective(problem.objective)
    status, iters, z, gap, pfeas, dfeas, obj = ipm_solve(
        compiled.goffs,
        compiled.roffs,
        compiled.rbounds,
        compiled.gmats,
        compiled.f0,
        cvec,
        min(gap_tol, 1e-9),
        min(feas_tol, 1e-10),
        max_iter,
    )
    variables = compiled.recover(np.asarray(z))
    residuals = _recomputed_residuals(problem, variables)
    residuals["duality_gap"] = float(gap)
    objective = float(cvec @ np.asarray(z) + obj_const)
    status_name = {0: "optimal", 1: "stalled", 2: "breakdown"}[int(status)]
    solution = SdpSolution(
        variables=variables,
        objective=objective,
        duality_gap=float(gap),
        residuals=residuals,
        iterations=int(iters),
        status=status_name,
    )
    feas_ok = all(v <= feas_tol for k, v in residuals.items() if k != "duality_gap")
    if gap <= gap_tol * (1.0 + abs(objective)) and feas_ok:
        return solution
    raise SdpConvergenceError(
        f"solver stopped with status={status_name} gap={gap:.3e} "
        f"pfeas={pfeas:.3e} dfeas={dfeas:.3e} after {iters} iterations",
        solution,
    )
