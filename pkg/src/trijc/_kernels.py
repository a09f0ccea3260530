"""Interior-point kernels for the witness SDP, with optional numba backend.

The hot inner loop is written once, in numpy code that numba can compile in
nopython mode.  Backend selection happens at import time via the
``TRIJC_BACKEND`` environment variable:

    auto   (default) use numba when importable, else pure numpy
    numba  require numba, fail loudly if missing
    numpy  force the pure-numpy fallback

The solver handles a linear matrix inequality in block-diagonal form,

    minimize    c' z
    subject to  S(z) = F0 + sum_i z_i F_i  >=  0,

with ``nb`` equal-size real symmetric blocks.  Complex Hermitian data enters
only after real embedding (see the sdp module).  Each coefficient F_i
touches few blocks; sparsity is stored per block as contiguous coordinate
ranges:

    goffs:   (nb+1,) int64   slice bounds into ``gmats``
    roffs:   (nb+1,) int64   slice bounds into ``rbounds``
    rbounds: (nR, 2) int64   [start, stop) coordinate ranges per block
    gmats:   (K, bs, bs)     coefficient matrices, stacked to match the
                             concatenation of each block's ranges
    f0:      (nb, bs, bs)    constant terms
    c:       (m,)            objective vector

The method is an infeasible primal-dual path follower with Nesterov-Todd
scaling and a Mehrotra predictor-corrector, applied to the standard-form
pair with A_i = -F_i, C = F0, b = -c, so the dual variable y coincides
with z.

Status codes: 0 converged to the requested tolerances, 1 iteration cap or
stall, 2 numerical breakdown.  The best iterate found is always returned.
"""

from __future__ import annotations

import os

import numpy as np

_BACKEND_ENV = "TRIJC_BACKEND"


def _pick_backend() -> str:
    choice = os.environ.get(_BACKEND_ENV, "auto").strip().lower()
    if choice not in {"auto", "numba", "numpy"}:
        raise ValueError(
            f"{_BACKEND_ENV} must be one of auto|numba|numpy, got {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if choice == "numba":
            raise ImportError(
                f"{_BACKEND_ENV}=numba requested but numba is not installed"
            ) from None
        return "numpy"
    return "numba"


BACKEND = _pick_backend()

if BACKEND == "numba":
    from numba import njit

    _jit = njit(cache=True)
else:

    def _jit(fn):
        return fn


def backend_name() -> str:
    """Active kernel backend: 'numba' or 'numpy'."""
    return BACKEND


@_jit
def _symmetrize(m):
    return 0.5 * (m + m.T)


@_jit
def _nt_scaling(x, s):
    """Nesterov-Todd scaling point W (with W S W = X) and inv(S).

    The boolean flag turns false when either iterate is so ill conditioned
    that the scaling would be numerically meaningless; the caller must then
    stop and fall back to the best iterate.
    """
    ex, ux = np.linalg.eigh(x)
    es, us = np.linalg.eigh(s)
    ok = ex[0] > 1e-15 * ex[-1] and es[0] > 1e-15 * es[-1] and ex[0] > 0.0 and es[0] > 0.0
    for i in range(ex.shape[0]):
        if ex[i] < 1e-300:
            ex[i] = 1e-300
    for i in range(es.shape[0]):
        if es[i] < 1e-300:
            es[i] = 1e-300
    xh = (ux * np.sqrt(ex)) @ ux.T
    s_inv = (us / es) @ us.T
    mid = _symmetrize(xh @ s @ xh)
    em, um = np.linalg.eigh(mid)
    for i in range(em.shape[0]):
        if em[i] < 1e-300:
            em[i] = 1e-300
    mid_inv_half = (um / np.sqrt(em)) @ um.T
    w = _symmetrize(xh @ mid_inv_half @ xh)
    return w, _symmetrize(s_inv), ok


@_jit
def _max_step(x, dx):
    """sup {a >= 0 : x + a dx PSD}; x must be (near) positive definite."""
    w, u = np.linalg.eigh(x)
    for i in range(w.shape[0]):
        if w[i] < 1e-300:
            w[i] = 1e-300
    inv_sqrt = u / np.sqrt(w)
    y = _symmetrize(inv_sqrt.T @ dx @ inv_sqrt)
    lam = np.linalg.eigvalsh(y)
    lam_min = lam[0]
    if lam_min >= -1e-14:
        return 1e30
    return -1.0 / lam_min


@_jit
def _op_a(goffs, roffs, rbounds, gmats, xmats, out):
    """out_i = <A_i, X> = -<F_i, X> over all blocks (out must be zeroed)."""
    nb = goffs.shape[0] - 1
    bs = gmats.shape[1]
    for b in range(nb):
        lo = goffs[b]
        hi = goffs[b + 1]
        if lo == hi:
            continue
        flat = gmats[lo:hi].reshape(hi - lo, bs * bs)
        vals = flat @ xmats[b].reshape(bs * bs)
        pos = 0
        for r in range(roffs[b], roffs[b + 1]):
            start = rbounds[r, 0]
            stop = rbounds[r, 1]
            out[start:stop] -= vals[pos : pos + (stop - start)]
            pos += stop - start


@_jit
def _op_at(goffs, roffs, rbounds, gmats, y, out):
    """out_b = sum_i y_i A_ib = -sum_i y_i F_ib per block."""
    nb = goffs.shape[0] - 1
    bs = gmats.shape[1]
    for b in range(nb):
        lo = goffs[b]
        hi = goffs[b + 1]
        if lo == hi:
            out[b] = 0.0
            continue
        coefs = np.empty(hi - lo)
        pos = 0
        for r in range(roffs[b], roffs[b + 1]):
            start = rbounds[r, 0]
            stop = rbounds[r, 1]
            coefs[pos : pos + (stop - start)] = y[start:stop]
            pos += stop - start
        flat = gmats[lo:hi].reshape(hi - lo, bs * bs)
        out[b] = -(coefs @ flat).reshape(bs, bs)


@_jit
def _schur(goffs, roffs, rbounds, gmats, wmats, mmat):
    """M_ij = sum_b <F_ib, W_b F_jb W_b>, scattered over range rectangles."""
    nb = goffs.shape[0] - 1
    bs = gmats.shape[1]
    mmat[:] = 0.0
    for b in range(nb):
        lo = goffs[b]
        hi = goffs[b + 1]
        kb = hi - lo
        if kb == 0:
            continue
        wb = wmats[b]
        flat = gmats[lo:hi].reshape(kb, bs * bs)
        gw = (gmats[lo:hi].reshape(kb * bs, bs) @ wb).reshape(kb, bs, bs)
        scaled = np.empty((kb, bs * bs))
        for k in range(kb):
            scaled[k] = (wb @ gw[k]).reshape(bs * bs)
        flat_t = flat.T.copy()  # contiguous (bs*bs, kb) for the matmul
        sub = scaled @ flat_t
        arow = 0
        for ri in range(roffs[b], roffs[b + 1]):
            si = rbounds[ri, 0]
            ni = rbounds[ri, 1] - si
            acol = 0
            for rj in range(roffs[b], roffs[b + 1]):
                sj = rbounds[rj, 0]
                nj = rbounds[rj, 1] - sj
                mmat[si : si + ni, sj : sj + nj] += sub[
                    arow : arow + ni, acol : acol + nj
                ]
                acol += nj
            arow += ni


@_jit
def _newton_rhs(goffs, roffs, rbounds, gmats, wmats, rd, rp, rc):
    """rhs = rp + <F_i, Rc - W Rd W>  (equals rp - A(Rc) + A(W Rd W))."""
    nb = goffs.shape[0] - 1
    bs = gmats.shape[1]
    rhs = rp.copy()
    for b in range(nb):
        lo = goffs[b]
        hi = goffs[b + 1]
        if lo == hi:
            continue
        tmp = rc[b] - wmats[b] @ rd[b] @ wmats[b]
        flat = gmats[lo:hi].reshape(hi - lo, bs * bs)
        vals = flat @ tmp.reshape(bs * bs)
        pos = 0
        for r in range(roffs[b], roffs[b + 1]):
            start = rbounds[r, 0]
            stop = rbounds[r, 1]
            rhs[start:stop] += vals[pos : pos + (stop - start)]
            pos += stop - start
    return rhs


@_jit
def ipm_solve(
    goffs,
    roffs,
    rbounds,
    gmats,
    f0,
    c,
    tol_gap,
    tol_feas,
    max_iter,
):
    """Solve the block LMI; returns (status, iters, z, gap, pfeas, dfeas, obj).

    ``gap`` is the absolute duality gap <X, S> of the returned iterate,
    ``pfeas``/``dfeas`` the max-norm residuals of the primal and dual
    equations of the standard-form pair.
    """
    m = c.shape[0]
    nb = f0.shape[0]
    bs = f0.shape[1]
    n_total = nb * bs

    scale = 1.0
    if np.abs(f0).max() > scale:
        scale = np.abs(f0).max()
    if m > 0 and np.abs(c).max() > scale:
        scale = np.abs(c).max()

    xmat = np.empty((nb, bs, bs))
    smat = np.empty((nb, bs, bs))
    for b in range(nb):
        xmat[b] = np.eye(bs) * scale
        smat[b] = np.eye(bs) * scale
    y = np.zeros(m)
    bvec = -c

    best_y = y.copy()
    best_merit = 1e300
    best_gap = 1e300
    best_pfeas = 1e300
    best_dfeas = 1e300
    status = 1
    iters_done = 0
    stall = 0

    rp = np.empty(m)
    rd = np.empty((nb, bs, bs))
    aty = np.empty((nb, bs, bs))
    wmats = np.empty((nb, bs, bs))
    sinv = np.empty((nb, bs, bs))
    mmat = np.empty((m, m))
    dsa = np.empty((nb, bs, bs))
    dxa = np.empty((nb, bs, bs))
    ds = np.empty((nb, bs, bs))
    dx = np.empty((nb, bs, bs))
    rc = np.empty((nb, bs, bs))

    for it in range(max_iter):
        iters_done = it

        rp[:] = 0.0
        _op_a(goffs, roffs, rbounds, gmats, xmat, rp)
        for i in range(m):
            rp[i] = bvec[i] - rp[i]
        _op_at(goffs, roffs, rbounds, gmats, y, aty)
        gap = 0.0
        for b in range(nb):
            rd[b] = f0[b] - smat[b] - aty[b]
            gap += np.sum(xmat[b] * smat[b])
        mu = gap / n_total
        pfeas = np.abs(rp).max() if m > 0 else 0.0
        dfeas = 0.0
        for b in range(nb):
            v = np.abs(rd[b]).max()
            if v > dfeas:
                dfeas = v

        obj_d = 0.0
        for i in range(m):
            obj_d += bvec[i] * y[i]
        merit = gap / (1.0 + abs(obj_d)) + pfeas + dfeas
        if merit < best_merit:
            if merit < 0.9 * best_merit:
                stall = 0
            best_merit = merit
            best_y[:] = y
            best_gap = gap
            best_pfeas = pfeas
            best_dfeas = dfeas
        else:
            stall += 1

        if (
            gap <= tol_gap * (1.0 + abs(obj_d))
            and pfeas <= tol_feas
            and dfeas <= tol_feas
        ):
            status = 0
            best_y[:] = y
            best_gap = gap
            best_pfeas = pfeas
            best_dfeas = dfeas
            break
        if stall >= 8 or mu < 1e-15 * scale:
            status = 1
            break

        ok = True
        conditioned = True
        for b in range(nb):
            wmats[b], sinv[b], blk_ok = _nt_scaling(xmat[b], smat[b])
            if not blk_ok:
                conditioned = False
            if not (np.all(np.isfinite(wmats[b])) and np.all(np.isfinite(sinv[b]))):
                ok = False
        if not conditioned:
            status = 1
            break
        if not ok:
            status = 2
            break

        _schur(goffs, roffs, rbounds, gmats, wmats, mmat)
        reg = 1e-13 * (1.0 + np.trace(mmat) / max(m, 1))
        for i in range(m):
            mmat[i, i] += reg

        # predictor (affine scaling direction)
        for b in range(nb):
            rc[b] = -xmat[b]
        rhs = _newton_rhs(goffs, roffs, rbounds, gmats, wmats, rd, rp, rc)
        dya = np.linalg.solve(mmat, rhs)
        if not np.all(np.isfinite(dya)):
            status = 2
            break
        _op_at(goffs, roffs, rbounds, gmats, dya, dsa)
        finite = True
        for b in range(nb):
            dsa[b] = rd[b] - dsa[b]
            dxa[b] = _symmetrize(rc[b] - wmats[b] @ dsa[b] @ wmats[b])
            if not (np.all(np.isfinite(dxa[b])) and np.all(np.isfinite(dsa[b]))):
                finite = False
        if not finite:
            status = 2
            break

        ap = 1.0
        ad = 1.0
        for b in range(nb):
            v = 0.99 * _max_step(xmat[b], dxa[b])
            if v < ap:
                ap = v
            v = 0.99 * _max_step(smat[b], dsa[b])
            if v < ad:
                ad = v
        mu_aff = 0.0
        for b in range(nb):
            mu_aff += np.sum((xmat[b] + ap * dxa[b]) * (smat[b] + ad * dsa[b]))
        mu_aff /= n_total
        if mu_aff < 0.0:
            mu_aff = 0.0
        sigma = (mu_aff / mu) ** 3
        if sigma > 1.0:
            sigma = 1.0
        if sigma < 1e-10:
            sigma = 1e-10

        # corrector
        for b in range(nb):
            corr = _symmetrize(dxa[b] @ dsa[b] @ sinv[b])
            rc[b] = sigma * mu * sinv[b] - xmat[b] - corr
        rhs = _newton_rhs(goffs, roffs, rbounds, gmats, wmats, rd, rp, rc)
        dy = np.linalg.solve(mmat, rhs)
        if not np.all(np.isfinite(dy)):
            status = 2
            break
        _op_at(goffs, roffs, rbounds, gmats, dy, ds)
        finite = True
        for b in range(nb):
            ds[b] = rd[b] - ds[b]
            dx[b] = _symmetrize(rc[b] - wmats[b] @ ds[b] @ wmats[b])
            if not (np.all(np.isfinite(dx[b])) and np.all(np.isfinite(ds[b]))):
                finite = False
        if not finite:
            status = 2
            break

        ap = 1.0
        ad = 1.0
        for b in range(nb):
            v = 0.98 * _max_step(xmat[b], dx[b])
            if v < ap:
                ap = v
            v = 0.98 * _max_step(smat[b], ds[b])
            if v < ad:
                ad = v

        finite = True
        for b in range(nb):
            xmat[b] = _symmetrize(xmat[b] + ap * dx[b])
            smat[b] = _symmetrize(smat[b] + ad * ds[b])
            if not (np.all(np.isfinite(xmat[b])) and np.all(np.isfinite(smat[b]))):
                finite = False
        y = y + ad * dy
        if not finite or not np.all(np.isfinite(y)):
            status = 2
            break

    obj = 0.0
    for i in range(m):
        obj += c[i] * best_y[i]
    return status, iters_done, best_y, best_gap, best_pfeas, best_dfeas, obj
