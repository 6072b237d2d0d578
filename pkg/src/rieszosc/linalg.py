"""Dense complex linear algebra kernels.

Self-contained implementations of the three operations everything else
rests on: a non-Hermitian eigensolver (balancing, Householder Hessenberg
reduction, implicit single-shift QR with Wilkinson shifts and deflation,
eigenvectors by triangular substitution on the Schur form), LU solves
with partial pivoting (single and batched), and the operator 2-norm by
power iteration on A*A.  Matrices are plain complex numpy arrays.

The QR iteration accumulates a full Schur form T = Q^H A Q, so right and
left eigenvectors come from one backward and one forward substitution;
left/right pairs are scaled biorthogonally, <left_n, right_n> = 1, which
makes the rank-one spectral projections right_n (left_n)^H directly.
Defective or clustered pairs where that scaling is numerically singular
are flagged, never silently patched.

References: Golub & Van Loan, "Matrix Computations", ch. 7; Wilkinson,
"The Algebraic Eigenvalue Problem" for the shift strategy.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False
    prange = range

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap

__all__ = [
    "EigenDecomposition",
    "eigendecompose",
    "hessenberg",
    "solve",
    "lu_factor",
    "lu_solve",
    "lu_factor_batch",
    "lu_solve_batch",
    "operator_norm",
    "SingularMatrixError",
    "ConvergenceError",
]

_EPS = float(np.finfo(np.float64).eps)


class SingularMatrixError(Exception):
    """Pivot below the singularity threshold in an LU solve."""

    def __init__(self, msg, pivot):
        super().__init__(msg)
        self.pivot = pivot


class ConvergenceError(Exception):
    """QR iteration failed to deflate an eigenvalue block."""

    def __init__(self, msg, block):
        super().__init__(msg)
        self.block = block


@dataclass
class EigenDecomposition:
    """Eigenvalues with biorthogonally scaled right/left eigenvectors.

    right_vectors has unit columns v_n with A v_n ~ lambda_n v_n;
    left_vectors columns w_n satisfy w_n^H A ~ lambda_n w_n^H and
    w_n^H v_m = delta_nm wherever `biorth_ok` is set.  residuals[n] is
    ||A v_n - lambda_n v_n||_2.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    residuals: np.ndarray
    biorth_ok: np.ndarray

    @property
    def dimension(self):
        return self.eigenvalues.shape[0]


def _as_square_complex(a):
    a = np.ascontiguousarray(np.asarray(a, dtype=complex))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("need a square matrix")
    if not np.all(np.isfinite(a.view(float))):
        raise ValueError("matrix has non-finite entries")
    return a


def _balance(a):
    """Parlett-Reinsch diagonal balancing with radix-2 scale factors.

    Returns (balanced, d) with balanced = D^-1 A D, D = diag(d); powers
    of 2 keep the similarity exact in floating point.
    """
    a = a.copy()
    n = a.shape[0]
    d = np.ones(n)
    radix = 2.0
    sqrdx = radix * radix
    done = False
    while not done:
        done = True
        for i in range(n):
            c = float(np.sum(np.abs(a[:, i]))) - abs(a[i, i])
            r = float(np.sum(np.abs(a[i, :]))) - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            f = 1.0
            s = c + r
            g = r / radix
            while c < g:
                f *= radix
                c *= sqrdx
            g = r * radix
            while c > g:
                f /= radix
                c /= sqrdx
            if (c + r) / f < 0.95 * s:
                done = False
                d[i] *= f
                a[i, :] /= f
                a[:, i] *= f
    return a, d


@njit(cache=True)
def _hessenberg_kernel(h, q):  # pragma: no cover - exercised via hessenberg()
    n = h.shape[0]
    v = np.empty(n, dtype=np.complex128)
    w = np.empty(n, dtype=np.complex128)
    for k in range(n - 2):
        xnorm2 = 0.0
        for i in range(k + 1, n):
            xnorm2 += h[i, k].real ** 2 + h[i, k].imag ** 2
        xnorm = math.sqrt(xnorm2)
        if xnorm == 0.0:
            continue
        alpha = h[k + 1, k]
        aab = abs(alpha)
        phase = alpha / aab if aab > 0.0 else 1.0 + 0.0j
        vnorm2 = 0.0
        for i in range(k + 1, n):
            v[i] = h[i, k]
            if i == k + 1:
                v[i] += phase * xnorm
            vnorm2 += v[i].real ** 2 + v[i].imag ** 2
        vnorm = math.sqrt(vnorm2)
        if vnorm == 0.0:
            continue
        for i in range(k + 1, n):
            v[i] /= vnorm
        # H <- P H with P = I - 2 v v^H on rows k+1..n-1 (row-buffered)
        for j in range(k, n):
            w[j] = 0.0
        for i in range(k + 1, n):
            cvi = np.conj(v[i])
            for j in range(k, n):
                w[j] += cvi * h[i, j]
        for i in range(k + 1, n):
            tvi = 2.0 * v[i]
            for j in range(k, n):
                h[i, j] -= tvi * w[j]
        # H <- H P on columns k+1..n-1
        for i in range(n):
            acc = 0.0 + 0.0j
            for j in range(k + 1, n):
                acc += h[i, j] * v[j]
            acc *= 2.0
            for j in range(k + 1, n):
                h[i, j] -= acc * np.conj(v[j])
        for i in range(n):
            acc = 0.0 + 0.0j
            for j in range(k + 1, n):
                acc += q[i, j] * v[j]
            acc *= 2.0
            for j in range(k + 1, n):
                q[i, j] -= acc * np.conj(v[j])
        for i in range(k + 2, n):
            h[i, k] = 0.0


def _hessenberg_numpy(h, q):
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        xnorm = float(np.linalg.norm(x))
        if xnorm == 0.0:
            continue
        alpha = x[0]
        phase = alpha / abs(alpha) if alpha != 0 else 1.0
        v = x
        v[0] += phase * xnorm
        vnorm = float(np.linalg.norm(v))
        if vnorm == 0.0:
            continue
        v /= vnorm
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0


def hessenberg(a):
    """Householder reduction H = Q^H A Q with H upper Hessenberg.

    Returns (H, Q) with Q unitary.
    """
    a = _as_square_complex(a)
    n = a.shape[0]
    h = a.copy()
    q = np.eye(n, dtype=complex)
    if n > 2:
        if _HAVE_NUMBA:
            _hessenberg_kernel(h, q)
        else:
            _hessenberg_numpy(h, q)
    return h, q


def _givens(x, y):
    """(c, s) with [c, s; -conj(s), c] [x; y] = [r; 0], c real >= 0."""
    ay = abs(y)
    if ay == 0.0:
        return 1.0, 0.0 + 0.0j
    ax = abs(x)
    if ax == 0.0:
        return 0.0, y.conjugate() / ay
    r = math.hypot(ax, ay)
    c = ax / r
    s = (x / ax) * y.conjugate() / r
    return c, s


def _wilkinson_shift(h, hi):
    a = h[hi - 1, hi - 1]
    b = h[hi - 1, hi]
    c = h[hi, hi - 1]
    d = h[hi, hi]
    t = 0.5 * (a + d)
    disc = cmath.sqrt(t * t - (a * d - b * c))
    l1 = t + disc
    l2 = t - disc
    return l1 if abs(l1 - d) <= abs(l2 - d) else l2


@njit(cache=True)
def _qr_schur_kernel(h, qt, max_sweeps, hnorm, eps):  # pragma: no cover
    # qt holds Q transposed so the rotation updates touch contiguous rows
    n = h.shape[0]
    cs = np.empty(n, dtype=np.float64)
    sn = np.empty(n, dtype=np.complex128)
    hi = n - 1
    sweeps_here = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            tol = eps * (abs(h[lo - 1, lo - 1]) + abs(h[lo, lo]))
            if tol == 0.0:
                tol = eps * hnorm
            if abs(h[lo, lo - 1]) <= tol:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            sweeps_here = 0
            continue
        sweeps_here += 1
        if sweeps_here > max_sweeps:
            return 1, lo, hi
        if sweeps_here % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            a = h[hi - 1, hi - 1]
            b = h[hi - 1, hi]
            c2 = h[hi, hi - 1]
            d = h[hi, hi]
            t = 0.5 * (a + d)
            disc = np.sqrt(t * t - (a * d - b * c2))
            l1 = t + disc
            l2 = t - disc
            shift = l1 if abs(l1 - d) <= abs(l2 - d) else l2

        for i in range(lo, hi + 1):
            h[i, i] -= shift
        for i in range(lo, hi):
            x = h[i, i]
            y = h[i + 1, i]
            ay = abs(y)
            if ay == 0.0:
                c = 1.0
                s = 0.0 + 0.0j
            else:
                ax = abs(x)
                if ax == 0.0:
                    c = 0.0
                    s = np.conj(y) / ay
                else:
                    r = math.hypot(ax, ay)
                    c = ax / r
                    s = (x / ax) * np.conj(y) / r
            cs[i - lo] = c
            sn[i - lo] = s
            for j in range(i, n):
                t1 = h[i, j]
                t2 = h[i + 1, j]
                h[i, j] = c * t1 + s * t2
                h[i + 1, j] = -np.conj(s) * t1 + c * t2
            h[i + 1, i] = 0.0
        for i in range(lo, hi):
            c = cs[i - lo]
            s = sn[i - lo]
            sc = np.conj(s)
            for r2 in range(i + 2):
                t1 = h[r2, i]
                t2 = h[r2, i + 1]
                h[r2, i] = c * t1 + sc * t2
                h[r2, i + 1] = -s * t1 + c * t2
            for r2 in range(n):
                t1 = qt[i, r2]
                t2 = qt[i + 1, r2]
                qt[i, r2] = c * t1 + sc * t2
                qt[i + 1, r2] = -s * t1 + c * t2
        for i in range(lo, hi + 1):
            h[i, i] += shift
    return 0, 0, 0


def _qr_schur_numpy(h, q, max_sweeps, hnorm):
    n = h.shape[0]
    hi = n - 1
    sweeps_here = 0
    while hi > 0:
        lo = hi
        while lo > 0:
            tol = _EPS * (abs(h[lo - 1, lo - 1]) + abs(h[lo, lo]))
            if tol == 0.0:
                tol = _EPS * hnorm
            if abs(h[lo, lo - 1]) <= tol:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            hi -= 1
            sweeps_here = 0
            continue
        sweeps_here += 1
        if sweeps_here > max_sweeps:
            return 1, lo, hi
        if sweeps_here % 10 == 0:
            shift = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            shift = _wilkinson_shift(h, hi)

        idx = np.arange(lo, hi + 1)
        h[idx, idx] -= shift
        rots = []
        for i in range(lo, hi):
            c, s = _givens(h[i, i], h[i + 1, i])
            rots.append((c, s))
            g = np.array([[c, s], [-np.conj(s), c]], dtype=complex)
            h[i:i + 2, i:] = g @ h[i:i + 2, i:]
            h[i + 1, i] = 0.0
        for j, (c, s) in enumerate(rots):
            i = lo + j
            gh = np.array([[c, -s], [np.conj(s), c]], dtype=complex)
            h[:i + 2, i:i + 2] = h[:i + 2, i:i + 2] @ gh
            q[:, i:i + 2] = q[:, i:i + 2] @ gh
        h[idx, idx] += shift
    return 0, 0, 0


def _qr_schur(h, q, max_sweeps=40):
    """Shifted QR iteration on a Hessenberg matrix, accumulating Q.

    Explicit single-shift sweeps with Givens rotations; deflation by the
    neighbour-relative subdiagonal test; an exceptional (magnitude-based)
    shift every tenth stalled sweep breaks symmetry cycles.  `max_sweeps`
    bounds the sweeps spent per deflated eigenvalue.
    """
    hnorm = float(np.linalg.norm(h, ord="fro"))
    if hnorm == 0.0:
        return h, q
    if _HAVE_NUMBA:
        qt = np.ascontiguousarray(q.T)
        status, lo, hi = _qr_schur_kernel(h, qt, max_sweeps, hnorm, _EPS)
        q[:, :] = qt.T
    else:
        status, lo, hi = _qr_schur_numpy(h, q, max_sweeps, hnorm)
    if status != 0:
        raise ConvergenceError(
            f"QR failed to deflate within {max_sweeps} sweeps "
            f"(active block [{lo}, {hi}])",
            block=(int(lo), int(hi)),
        )
    return h, q


def _right_vectors(t):
    """Unit-upper-triangular V with (T - lambda_k) V[:, k] = 0 columnwise."""
    n = t.shape[0]
    lam = np.diag(t)
    tnorm = float(np.max(np.abs(t))) or 1.0
    guard = _EPS * tnorm
    v = np.eye(n, dtype=complex)
    for i in range(n - 2, -1, -1):
        rhs = -(t[i, i + 1:] @ v[i + 1:, :])
        denom = t[i, i] - lam
        small = np.abs(denom) < guard
        denom = np.where(small, guard, denom)
        v[i, i + 1:] = rhs[i + 1:] / denom[i + 1:]
    return v


def _left_vectors(t):
    """Unit-lower-triangular W with W[:, k]^H T = lambda_k W[:, k]^H."""
    n = t.shape[0]
    lam = np.diag(t)
    tnorm = float(np.max(np.abs(t))) or 1.0
    guard = _EPS * tnorm
    w = np.eye(n, dtype=complex)
    for i in range(1, n):
        rhs = -(np.conj(t[:i, i]) @ w[:i, :])
        denom = np.conj(t[i, i] - lam)
        small = np.abs(denom) < guard
        denom = np.where(small, guard, denom)
        w[i, :i] = rhs[:i] / denom[:i]
    return w


def eigendecompose(a, balance=True, max_sweeps=40):
    """Full eigendecomposition of a dense complex matrix (K <= 4096).

    Pipeline: balancing (optional, exact radix-2 similarity) ->
    Householder Hessenberg -> shifted QR to Schur form -> right and left
    eigenvectors by triangular substitution -> biorthogonal scaling
    <left_n, right_n> = 1.  Pairs where the scaling product is
    numerically zero (Jordan blocks, tight clusters) keep unit-norm
    vectors and biorth_ok[n] = False.
    """
    a = _as_square_complex(a)
    n = a.shape[0]
    if n > 4096:
        raise ValueError("dense eigensolver is capped at K = 4096")
    if n == 0:
        raise ValueError("empty matrix")

    if balance:
        b, d = _balance(a)
    else:
        b, d = a, np.ones(n)
    h, q = hessenberg(b)
    t, q = _qr_schur(h, q, max_sweeps=max_sweeps)
    lam = np.diag(t).copy()

    right = q @ _right_vectors(t)
    left = q @ _left_vectors(t)
    if balance:
        right = d[:, None] * right
        left = left / d[:, None]

    right /= np.linalg.norm(right, axis=0)[None, :]
    lnorm = np.linalg.norm(left, axis=0)
    lnorm[lnorm == 0.0] = 1.0
    left = left / lnorm[None, :]

    s = np.sum(np.conj(left) * right, axis=0)  # <left_n, right_n>, unit vectors
    biorth_ok = np.abs(s) > 1e-8
    scale = np.where(biorth_ok, s, 1.0)
    left = left / np.conj(scale)[None, :]

    residuals = np.linalg.norm(a @ right - right * lam[None, :], axis=0)
    return EigenDecomposition(
        eigenvalues=lam,
        right_vectors=right,
        left_vectors=left,
        residuals=residuals,
        biorth_ok=biorth_ok,
    )


# ----------------------------------------------------------------------
# LU solves


def lu_factor(a, pivot_rtol=1e-14):
    """In-place LU with partial pivoting: returns (lu, piv).

    Raises SingularMatrixError when a pivot falls below
    pivot_rtol * max|A| (the pivot magnitude rides on the exception).
    """
    lu = _as_square_complex(a).copy()
    n = lu.shape[0]
    anorm = float(np.max(np.abs(lu))) if n else 0.0
    threshold = pivot_rtol * anorm
    piv = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if p != k:
            lu[[k, p], :] = lu[[p, k], :]
            piv[[k, p]] = piv[[p, k]]
        pivot = abs(lu[k, k])
        if pivot <= threshold:
            raise SingularMatrixError(
                f"singular to tolerance: pivot {pivot:.3e} at step {k} "
                f"(threshold {threshold:.3e})",
                pivot=pivot,
            )
        if k < n - 1:
            lu[k + 1:, k] /= lu[k, k]
            lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, piv


def lu_solve(lu, piv, b):
    """Solve with a factorization from `lu_factor`; b may be a matrix."""
    n = lu.shape[0]
    x = np.asarray(b, dtype=complex)[piv].copy()
    vec = x.ndim == 1
    if vec:
        x = x[:, None]
    for k in range(1, n):
        x[k] -= lu[k, :k] @ x[:k]
    for k in range(n - 1, -1, -1):
        x[k] -= lu[k, k + 1:] @ x[k + 1:]
        x[k] /= lu[k, k]
    return x[:, 0] if vec else x


def solve(a, b, pivot_rtol=1e-14):
    """LU solve A x = b with partial pivoting, ||Ax - b|| ~ eps ||A|| ||x||."""
    lu, piv = lu_factor(a, pivot_rtol=pivot_rtol)
    return lu_solve(lu, piv, b)


@njit(cache=True, parallel=True)
def _lu_factor_batch_kernel(lu, piv, minpiv):  # pragma: no cover
    nb, n, _ = lu.shape
    for b in prange(nb):
        small = 1e308
        for k in range(n):
            p = k
            mx = abs(lu[b, k, k])
            for i in range(k + 1, n):
                v = abs(lu[b, i, k])
                if v > mx:
                    mx = v
                    p = i
            if p != k:
                for j in range(n):
                    tmp = lu[b, k, j]
                    lu[b, k, j] = lu[b, p, j]
                    lu[b, p, j] = tmp
                tp = piv[b, k]
                piv[b, k] = piv[b, p]
                piv[b, p] = tp
            akk = lu[b, k, k]
            apk = abs(akk)
            if apk < small:
                small = apk
            if apk == 0.0:
                continue
            for i in range(k + 1, n):
                lik = lu[b, i, k] / akk
                lu[b, i, k] = lik
                for j in range(k + 1, n):
                    lu[b, i, j] -= lik * lu[b, k, j]
        minpiv[b] = small


@njit(cache=True, parallel=True)
def _lu_solve_batch_kernel(lu, piv, rhs, out):  # pragma: no cover
    nb, n, m = out.shape
    for b in prange(nb):
        for k in range(n):
            src = piv[b, k]
            for j in range(m):
                out[b, k, j] = rhs[b, src, j]
        for k in range(1, n):
            for i in range(k):
                lik = lu[b, k, i]
                for j in range(m):
                    out[b, k, j] -= lik * out[b, i, j]
        for k in range(n - 1, -1, -1):
            for i in range(k + 1, n):
                uik = lu[b, k, i]
                for j in range(m):
                    out[b, k, j] -= uik * out[b, i, j]
            dk = lu[b, k, k]
            for j in range(m):
                out[b, k, j] /= dk
        # restore is not needed; rhs untouched


def lu_factor_batch(a_stack, pivot_rtol=1e-14):
    """LU with partial pivoting over a stack of matrices (B, n, n).

    Same recurrence as `lu_factor`, batched; used by contour quadrature
    where many shifted copies of one matrix are factored at once.
    """
    lu = np.array(a_stack, dtype=complex)
    if lu.ndim != 3 or lu.shape[1] != lu.shape[2]:
        raise ValueError("need a (batch, n, n) stack")
    nb, n, _ = lu.shape
    anorm = np.max(np.abs(lu), axis=(1, 2))
    piv = np.tile(np.arange(n), (nb, 1))
    if _HAVE_NUMBA:
        minpiv = np.empty(nb)
        _lu_factor_batch_kernel(lu, piv, minpiv)
        bad = minpiv <= pivot_rtol * anorm
        if np.any(bad):
            raise SingularMatrixError(
                f"singular to tolerance in batch entries {np.nonzero(bad)[0]}",
                pivot=float(minpiv[bad].min()),
            )
        return lu, piv
    rows = np.arange(nb)
    for k in range(n):
        p = k + np.argmax(np.abs(lu[:, k:, k]), axis=1)
        need = p != k
        if np.any(need):
            bsel = rows[need]
            psel = p[need]
            tmp = lu[bsel, k, :].copy()
            lu[bsel, k, :] = lu[bsel, psel, :]
            lu[bsel, psel, :] = tmp
            tpv = piv[bsel, k].copy()
            piv[bsel, k] = piv[bsel, psel]
            piv[bsel, psel] = tpv
        pivots = np.abs(lu[:, k, k])
        bad = pivots <= pivot_rtol * anorm
        if np.any(bad):
            raise SingularMatrixError(
                f"singular to tolerance in batch entries {np.nonzero(bad)[0]}",
                pivot=float(pivots[bad].min()),
            )
        if k < n - 1:
            lu[:, k + 1:, k] /= lu[:, k, k][:, None]
            lu[:, k + 1:, k + 1:] -= (
                lu[:, k + 1:, k][:, :, None] * lu[:, k, k + 1:][:, None, :]
            )
    return lu, piv


def lu_solve_batch(lu, piv, b_stack):
    """Solve for a stack of right-hand-side matrices (B, n, m)."""
    nb, n, _ = lu.shape
    rhs = np.ascontiguousarray(np.asarray(b_stack, dtype=complex))
    if _HAVE_NUMBA:
        out = np.empty_like(rhs)
        _lu_solve_batch_kernel(lu, piv, rhs, out)
        return out
    x = np.take_along_axis(rhs, piv[:, :, None], axis=1).copy()
    for k in range(1, n):
        x[:, k, :] -= np.einsum("bj,bjm->bm", lu[:, k, :k], x[:, :k, :])
    for k in range(n - 1, -1, -1):
        if k < n - 1:
            x[:, k, :] -= np.einsum("bj,bjm->bm", lu[:, k, k + 1:], x[:, k + 1:, :])
        x[:, k, :] /= lu[:, k, k][:, None]
    return x


# ----------------------------------------------------------------------
# operator norm


def operator_norm(a, tol=1e-10, restarts=3, max_iter=5000, seed=0):
    """Largest singular value by power iteration on A^H A.

    Relative tolerance `tol` on successive estimates; the largest value
    over `restarts` random starts is returned (restarts guard against a
    start vector orthogonal to the top singular space).
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError("need a matrix")
    if a.size == 0 or not np.any(a):
        return 0.0
    rng = np.random.default_rng(seed)
    n = a.shape[1]
    best = 0.0
    for _ in range(restarts):
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v /= np.linalg.norm(v)
        est_prev = 0.0
        for _ in range(max_iter):
            w = a @ v
            u = a.conj().T @ w
            unorm = float(np.linalg.norm(u))
            if unorm == 0.0:
                est = 0.0
                break
            est = math.sqrt(unorm)
            v = u / unorm
            if abs(est - est_prev) <= tol * max(est, 1e-300):
                break
            est_prev = est
        best = max(best, est)
    return best
