"""Galerkin truncation, spectrum, projections and similarity diagnostics.

The truncated operator is the K x K matrix

    (T_K)_{nm} = mu_n delta_{nm} + b(psi_m, psi_n),   1 <= m, n <= K,

whose eigenpairs approximate the perturbed operator on the span of the
first K unperturbed modes.  Computed eigenvalues are tagged `trusted` by
comparison against the half-size truncation (Galerkin pollutes the upper
half of the computed spectrum), and trusted eigenvalues are located
within the certified enclosure region.

Riesz projections come by two independent routes, eigenvector outer
products and contour quadrature of the resolvent, which must agree; on
top of them sit the similarity diagnostics: the projection-family
criterion constant c_0 (stacked-row operator norm vs random sampling),
projection-norm growth for forms outside the envelope hypothesis, and
the eigenvalue-distance decay rate that mirrors the shrinking disk radii.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .bounds import region_contains
from .forms import form_block

__all__ = [
    "GalerkinOperator",
    "assemble",
    "default_truncation",
    "SpectralResult",
    "compute_spectrum",
    "b_of_z",
    "BoundAudit",
    "certify_B_bound",
    "ProjectionSet",
    "projections_eigvec",
    "projections_contour",
    "KatoReport",
    "kato_check",
    "find_kato_threshold",
    "GrowthReport",
    "projection_growth",
    "DecayFit",
    "radius_decay_fit",
    "numerical_rank",
    "PoleError",
    "ContourError",
    "ClusterError",
    "UntrustedError",
]


class PoleError(Exception):
    """z coincides with an unperturbed eigenvalue."""


class ContourError(Exception):
    """An eigenvalue sits on (or too close to) an integration contour."""


class ClusterError(Exception):
    """Trusted eigenvalues above index N+1 are not numerically simple."""


class UntrustedError(Exception):
    """A requested index range includes untrusted eigenvalues."""


# ----------------------------------------------------------------------
# assembly


@dataclass(frozen=True)
class GalerkinOperator:
    """Truncated operator with its ingredients.

    `b_matrix[m-1, n-1] = b(psi_m, psi_n)`; `t_matrix` is
    diag(mu) + b_matrix^T so that row n, column m carries b(psi_m, psi_n).
    """

    model: object
    form: object
    size: int
    t_matrix: np.ndarray
    b_matrix: np.ndarray

    @property
    def mu(self):
        return np.asarray(self.model.mu(np.arange(1, self.size + 1)), dtype=float)

    def head(self, k):
        """The size-k leading principal truncation (shares elements)."""
        if k > self.size:
            raise ValueError("head larger than the assembled operator")
        return GalerkinOperator(
            model=self.model,
            form=self.form,
            size=k,
            t_matrix=self.t_matrix[:k, :k],
            b_matrix=self.b_matrix[:k, :k],
        )


def assemble(model, form, size):
    """Build T_K = diag(mu) + (b(psi_m, psi_n))^T for 1 <= m, n <= K."""
    if size < 8:
        raise ValueError("truncation size must be at least 8")
    b = np.asarray(form_block(form, model, size), dtype=complex)
    mu = np.asarray(model.mu(np.arange(1, size + 1)), dtype=float)
    t = np.diag(mu.astype(complex)) + b.T
    return GalerkinOperator(model=model, form=form, size=size, t_matrix=t, b_matrix=b)


def default_truncation(big_n, max_index=None):
    """K = max(256, 8 (N+2)), doubled until the trust window K/2 covers
    the requested index range."""
    k = max(256, 8 * (big_n + 2))
    if max_index is not None:
        while k // 2 < max_index:
            k *= 2
    return k


# ----------------------------------------------------------------------
# spectrum


@dataclass
class SpectralResult:
    """Eigenpairs of a truncation, sorted by real part.

    convergence[n] is |lambda_n(K) - lambda_n(K/2)| under nearest-neighbour
    matching (inf where the matching collided); trusted requires that
    distance below `trust_tol` and rank n <= K/2.  membership holds the
    region tag per eigenvalue (0 rectangle, k disk, -1 outside, None not
    tested) when a certificate was supplied.
    """

    size: int
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    residuals: np.ndarray
    biorth_ok: np.ndarray
    convergence: np.ndarray
    trusted: np.ndarray
    trust_tol: float
    membership: list | None = None
    region_counts: dict = field(default_factory=dict)

    @property
    def trusted_indices(self):
        """1-based ranks of trusted eigenvalues."""
        return np.nonzero(self.trusted)[0] + 1


def _sorted_decomposition(matrix):
    dec = linalg.eigendecompose(matrix)
    order = np.lexsort((dec.eigenvalues.imag, dec.eigenvalues.real))
    return (
        dec.eigenvalues[order],
        dec.right_vectors[:, order],
        dec.left_vectors[:, order],
        dec.residuals[order],
        dec.biorth_ok[order],
    )


def _match_distances(lam_full, lam_half):
    """Nearest-neighbour matching distances with collision detection."""
    dist = np.abs(lam_full[:, None] - lam_half[None, :])
    nearest = np.argmin(dist, axis=1)
    best = dist[np.arange(lam_full.size), nearest]
    conv = best.copy()
    for j in np.unique(nearest):
        claimants = np.nonzero(nearest == j)[0]
        if claimants.size > 1:
            keep = claimants[np.argmin(best[claimants])]
            for c in claimants:
                if c != keep:
                    conv[c] = np.inf
    return conv


def compute_spectrum(op, cert=None, trust_tol=1e-8):
    """Eigendecomposition of T_K with trust tags and region membership.

    The half-size truncation is decomposed alongside; an eigenvalue is
    trusted when its nearest match moved less than `trust_tol` and its
    rank (by real part) is at most K/2.  With a certificate, every
    trusted eigenvalue with Re lambda <= mu_{K/2} is located in the
    region and the per-component counts are recorded.
    """
    lam, right, left, res, bio = _sorted_decomposition(op.t_matrix)
    half = op.head(op.size // 2)
    lam_h, _, _, _, _ = _sorted_decomposition(half.t_matrix)
    conv = _match_distances(lam, lam_h)
    ranks = np.arange(1, op.size + 1)
    trusted = (conv <= trust_tol) & (ranks <= op.size // 2)

    membership = None
    counts = {}
    if cert is not None:
        mu_norm = op.model.normalized_form().mu
        # half a gap of slack so the rank-K/2 eigenvalue itself is tested
        mu_half = float(op.mu[op.size // 2 - 1]) + 0.5 * op.model.delta_gap
        membership = []
        for n in range(op.size):
            if not trusted[n] or lam[n].real > mu_half:
                membership.append(None)
                continue
            inside, tag = region_contains(
                cert, complex(lam[n]), mu_normalized=lambda k: float(mu_norm(k))
            )
            tag = tag if inside else -1
            membership.append(tag)
            key = "rect" if tag == 0 else ("outside" if tag == -1 else f"disk:{tag}")
            counts[key] = counts.get(key, 0) + 1

    return SpectralResult(
        size=op.size,
        eigenvalues=lam,
        right_vectors=right,
        left_vectors=left,
        residuals=res,
        biorth_ok=bio,
        convergence=conv,
        trusted=trusted,
        trust_tol=trust_tol,
        membership=membership,
        region_counts=counts,
    )


# ----------------------------------------------------------------------
# the perturbation block B(z)


def b_of_z(op, z):
    """The K x K matrix B(z)_{km} = -b(psi_m, psi_k) (z-mu_k)^{-1/2} (z-mu_m)^{-1/2}.

    The branch is w^s = |w|^s exp(i s arg w) with arg in (-pi, pi], and
    the sign makes the factorization
    (z - mu)^{1/2} (I + B(z)) (z - mu)^{1/2} = z I - T_K exact.
    """
    z = complex(z)
    mu = op.mu
    w = z - mu
    if np.min(np.abs(w)) < 1e-12 * max(1.0, abs(z)):
        k = int(np.argmin(np.abs(w))) + 1
        raise PoleError(f"z = {z} is at the unperturbed eigenvalue mu_{k}")
    inv_sqrt = np.abs(w) ** (-0.5) * np.exp(-0.5j * np.angle(w))
    return -(op.b_matrix.T) * np.outer(inv_sqrt, inv_sqrt)


# ----------------------------------------------------------------------
# boundary audit


@dataclass
class BoundAudit:
    """Witnesses of ||B(z)|| <= 1/2 along the region boundary.

    `points` rows are (z, bound, tag) with tag "rect" or "circle:n"; the
    audit passes when every audited bound is at most 1/2 + 1e-9.
    `excluded` holds optional witnesses on circles with n <= N (inside
    the excluded zone, recorded but never failed).
    """

    points: list
    max_bound: float
    passes: bool
    excluded: list = field(default_factory=list)

    @property
    def worst_point(self):
        return max(self.points, key=lambda rec: rec[1])


def _audit_points_rect(cert, samples):
    pts = []
    n_right = cert.big_n + 1.5
    h = cert.h
    for i in range(samples):
        t = (i + 0.5) / samples
        pts.append(complex(-h + t * (n_right + h), h))
        pts.append(complex(-h + t * (n_right + h), -h))
        pts.append(complex(-h, -h + t * 2 * h))
        pts.append(complex(n_right, -h + t * 2 * h))
    return pts


def _tail_beyond_truncation(gamma, size):
    # sum_{k > K} 2/k^(gamma+1), valid on every audited point where
    # |mu'_k - z'| >= k - Re z' >= k/2
    return 2.0 * (size ** (-gamma - 1.0) + size ** (-gamma) / gamma)


def certify_B_bound(op, cert, samples_per_arc=8, include_excluded=False, threads=1):
    """Evaluate ||B(z)|| on the region boundary: rectangle edges plus the
    circles around mu'_n for N+1 < n <= K/2.

    Each witness is operator_norm of the truncated block plus the
    certified scalar bound 2 M_b' sqrt(S_>K (S_K + S_>K)) for the modes
    beyond the truncation.  Passes iff the maximum is at most 1/2 + 1e-9.
    Circles with n <= N are audited only when `include_excluded` is set
    and are recorded without failing (the region excludes them).
    """
    if op.size < 2 * (cert.big_n + 2):
        raise ValueError("truncation too small for the certificate region")
    gamma = 2.0 * cert.alpha
    m_b = cert.m_b_normalized
    mu_norm = np.asarray(
        op.model.normalized_form().mu(np.arange(1, op.size + 1)), dtype=float
    )
    s_beyond = _tail_beyond_truncation(gamma, op.size)
    ks = np.arange(1, op.size + 1, dtype=float)

    def bound_at(zn):
        z = cert.to_original(zn)
        block = linalg.operator_norm(b_of_z(op, z), tol=1e-9, seed=7)
        s_k = float(np.sum(1.0 / (ks ** gamma * np.abs(mu_norm - zn))))
        tail = 2.0 * m_b * math.sqrt(s_beyond * (s_k + s_beyond))
        return block + tail

    jobs = [(zn, "rect") for zn in _audit_points_rect(cert, samples_per_arc)]
    for n in range(cert.big_n + 2, op.size // 2 + 1):
        for j in range(samples_per_arc):
            theta = 2.0 * math.pi * (j + 0.3) / samples_per_arc
            jobs.append((mu_norm[n - 1] + 0.5 * cmath.exp(1j * theta), f"circle:{n}"))
    excluded_jobs = []
    if include_excluded:
        for n in range(2, cert.big_n + 1):
            for j in range(samples_per_arc):
                theta = 2.0 * math.pi * (j + 0.3) / samples_per_arc
                excluded_jobs.append(
                    (mu_norm[n - 1] + 0.5 * cmath.exp(1j * theta), f"circle:{n}")
                )

    def run(batch):
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                vals = list(pool.map(lambda rec: bound_at(rec[0]), batch))
        else:
            vals = [bound_at(zn) for zn, _ in batch]
        return [
            (cert.to_original(zn), val, tag)
            for (zn, tag), val in zip(batch, vals)
        ]

    points = run(jobs)
    excluded = run(excluded_jobs) if excluded_jobs else []
    max_bound = max(v for _, v, _ in points)
    return BoundAudit(
        points=points,
        max_bound=max_bound,
        passes=max_bound <= 0.5 + 1e-9,
        excluded=excluded,
    )


# ----------------------------------------------------------------------
# projections


@dataclass
class ProjectionSet:
    """Riesz projections: rank-one P_n per trusted high index and the
    finite-rank block S for the rectangle.

    `matrices[n]` is P_n (K x K); `norms[n] = ||P_n||`; route is
    "eigvec" or "contour".  `s_matrix` may be None when the rectangle
    block was not requested.
    """

    indices: list
    matrices: dict
    norms: dict
    route: str
    s_matrix: np.ndarray | None = None
    s_rank_indices: list = field(default_factory=list)
    quadrature_gauge: dict = field(default_factory=dict)

    def projection(self, n):
        return self.matrices[n]


def projections_eigvec(result, big_n, s_block=True):
    """P_n = right_n left_n^H for trusted n > N+1; S = sum over the
    rectangle members (tag 0 when membership is available, ranks <= N+1
    otherwise).

    Trusted eigenvalues above N+1 must be numerically simple (pairwise
    gap > 1e-8); a clustered pair signals a truncation too small for the
    certificate and raises ClusterError.
    """
    k = result.size
    idx = [
        n
        for n in range(big_n + 2, k // 2 + 1)
        if result.trusted[n - 1]
    ]
    lam = result.eigenvalues
    lam_high = lam[[n - 1 for n in idx]]
    if len(lam_high) > 1:
        dist = np.abs(lam_high[:, None] - lam_high[None, :])
        np.fill_diagonal(dist, np.inf)
        gap = float(dist.min())
        if gap <= 1e-8:
            i, j = np.unravel_index(int(np.argmin(dist)), dist.shape)
            raise ClusterError(
                f"trusted eigenvalues {idx[i]} and {idx[j]} are within {gap:.2e}; "
                "increase the truncation or re-check the certificate"
            )
    matrices = {}
    norms = {}
    for n in idx:
        v = result.right_vectors[:, n - 1]
        w = result.left_vectors[:, n - 1]
        matrices[n] = np.outer(v, np.conj(w))
        norms[n] = float(np.linalg.norm(v) * np.linalg.norm(w))

    s_matrix = None
    s_members = []
    if s_block:
        if result.membership is not None:
            s_members = [
                n for n in range(1, k + 1) if result.membership[n - 1] == 0
            ]
        else:
            s_members = list(range(1, big_n + 2))
        s_matrix = np.zeros((k, k), dtype=complex)
        for n in s_members:
            v = result.right_vectors[:, n - 1]
            w = result.left_vectors[:, n - 1]
            s_matrix += np.outer(v, np.conj(w))
    return ProjectionSet(
        indices=idx,
        matrices=matrices,
        norms=norms,
        route="eigvec",
        s_matrix=s_matrix,
        s_rank_indices=s_members,
    )


def projections_contour(
    op,
    centers,
    radii,
    quadrature_points=64,
    eigenvalues=None,
    probe_convergence=True,
    seed=0,
):
    """Riesz projections by trapezoid quadrature of the resolvent.

    For each circle (center, radius) the projection is
    (r / m) sum_j exp(i theta_j) (z_j - T_K)^{-1}; the trapezoid rule on
    a circle converges geometrically in the node count.  All node
    resolvents of one circle are produced from one batched LU.  When
    `eigenvalues` is supplied, any eigenvalue within 1e-6 of a contour
    raises ContourError.  With `probe_convergence`, the doubled-node
    quadrature is applied to random probe vectors and the worst relative
    deviation per circle is recorded in `quadrature_gauge`.
    """
    centers = [complex(c) for c in np.atleast_1d(centers)]
    radii_arr = np.broadcast_to(np.atleast_1d(radii).astype(float), (len(centers),))
    if eigenvalues is not None:
        lam = np.asarray(eigenvalues)
        for c, r in zip(centers, radii_arr):
            d = np.abs(np.abs(lam - c) - r).min()
            if d < 1e-6:
                bad = lam[int(np.argmin(np.abs(np.abs(lam - c) - r)))]
                raise ContourError(
                    f"eigenvalue {bad} within {d:.2e} of the contour around {c}"
                )
    k = op.size
    eye = np.eye(k, dtype=complex)
    rng = np.random.default_rng(seed)
    matrices = {}
    norms = {}
    gauges = {}
    for ci, (c, r) in enumerate(zip(centers, radii_arr)):
        proj = _contour_projection(op, c, r, quadrature_points, eye)
        matrices[ci] = proj
        norms[ci] = linalg.operator_norm(proj, tol=1e-8, seed=11)
        if probe_convergence:
            probes = rng.standard_normal((k, 3)) + 1j * rng.standard_normal((k, 3))
            probes /= np.linalg.norm(probes, axis=0)[None, :]
            dense = _contour_apply(op, c, r, 2 * quadrature_points, probes)
            gauges[ci] = float(
                np.linalg.norm(dense - proj @ probes, axis=0).max()
            )
    return ProjectionSet(
        indices=list(matrices),
        matrices=matrices,
        norms=norms,
        route="contour",
        quadrature_gauge=gauges,
    )


def _contour_nodes(center, radius, m):
    thetas = 2.0 * math.pi * (np.arange(m) + 0.5) / m
    zs = center + radius * np.exp(1j * thetas)
    weights = radius * np.exp(1j * thetas) / m
    return zs, weights


def _contour_projection(op, center, radius, m, eye):
    zs, wts = _contour_nodes(center, radius, m)
    stack = zs[:, None, None] * eye[None, :, :] - op.t_matrix[None, :, :]
    lu, piv = linalg.lu_factor_batch(stack)
    res = linalg.lu_solve_batch(lu, piv, np.broadcast_to(eye, stack.shape).copy())
    return np.einsum("b,bij->ij", wts, res)


def _contour_apply(op, center, radius, m, vecs):
    zs, wts = _contour_nodes(center, radius, m)
    stack = zs[:, None, None] * np.eye(op.size)[None, :, :] - op.t_matrix[None, :, :]
    lu, piv = linalg.lu_factor_batch(stack)
    rhs = np.broadcast_to(vecs, (m,) + vecs.shape).copy()
    sols = linalg.lu_solve_batch(lu, piv, rhs)
    return np.einsum("b,bij->ij", wts, sols)


# ----------------------------------------------------------------------
# similarity diagnostics


@dataclass
class KatoReport:
    """Estimate of the projection-family criterion constant.

    c0_estimate bounds sum_{n >= N_star} ||P_n^0 (P_n - P_n^0) u||^2 over
    unit u, taken as the max of the exact stacked-row operator norm
    squared and the sampled maximum (operator route >= sampling route
    always).  per_n_terms records ||row_n||^2 for the decay profile.
    """

    n_star: int
    c0_estimate: float
    c0_operator: float
    c0_sampled: float
    per_n_terms: list
    sample_count: int


def _kato_rows(proj, n_star, n_max=None):
    k = next(iter(proj.matrices.values())).shape[0] if proj.matrices else 0
    rows = []
    used = []
    for n in sorted(proj.indices):
        if n < n_star:
            continue
        if n_max is not None and n > n_max:
            continue
        p = proj.matrices[n]
        r = p[n - 1, :].copy()
        r[n - 1] -= 1.0
        rows.append(r)
        used.append(n)
    return (np.array(rows) if rows else np.zeros((0, k))), used


def kato_check(proj, n_star, samples=200, seed=0):
    """Criterion constant from a trusted projection set.

    Route (i): the stacked map u -> (P_n^0 (P_n - P_n^0) u)_{n >= N_star}
    is a short-and-wide matrix whose row n is the n-th row of P_n minus
    the coordinate row, so c0 is its operator norm squared, computed
    exactly.  Route (ii): max of sum_n |row_n . u|^2 over random unit u.
    The reported estimate is the larger (they agree in the limit; the
    operator route always dominates).
    """
    mat, used = _kato_rows(proj, n_star)
    if mat.shape[0] == 0:
        return KatoReport(
            n_star=n_star,
            c0_estimate=0.0,
            c0_operator=0.0,
            c0_sampled=0.0,
            per_n_terms=[],
            sample_count=samples,
        )
    op_norm = linalg.operator_norm(mat, tol=1e-10, seed=3)
    c0_op = op_norm * op_norm
    rng = np.random.default_rng(seed)
    k = mat.shape[1]
    c0_s = 0.0
    for _ in range(samples):
        u = rng.standard_normal(k) + 1j * rng.standard_normal(k)
        u /= np.linalg.norm(u)
        c0_s = max(c0_s, float(np.sum(np.abs(mat @ u) ** 2)))
    per_n = [(n, float(np.sum(np.abs(r) ** 2))) for n, r in zip(used, mat)]
    return KatoReport(
        n_star=n_star,
        c0_estimate=max(c0_op, c0_s),
        c0_operator=c0_op,
        c0_sampled=c0_s,
        per_n_terms=per_n,
        sample_count=samples,
    )


def find_kato_threshold(proj, target=0.5, samples=100, seed=0):
    """Least available N_star with c0_estimate <= target, or None.

    c0 is nonincreasing in N_star (rows are removed), so a linear scan
    from the smallest index with early exit is enough.
    """
    if not proj.indices:
        return None
    for n_star in sorted(proj.indices):
        rep = kato_check(proj, n_star, samples=samples, seed=seed)
        if rep.c0_estimate <= target:
            return n_star
    return None


@dataclass
class GrowthReport:
    rows: list  # (n, norm)
    slope: float
    intercept: float

    def table(self):
        return [(n, math.sqrt(n), math.log(v)) for n, v in self.rows]


def projection_growth(result, n_range):
    """||P_n|| for trusted n in [n_range[0], n_range[1]] and the
    least-squares slope of log ||P_n|| against sqrt(n).

    With the biorthogonal scaling (unit right vectors), ||P_n|| is just
    the left-vector norm.  Untrusted indices in range raise
    UntrustedError listing them.
    """
    lo, hi = n_range
    bad = [n for n in range(lo, hi + 1) if not result.trusted[n - 1]]
    if bad:
        raise UntrustedError(f"untrusted indices in range: {bad}")
    rows = []
    for n in range(lo, hi + 1):
        v = result.right_vectors[:, n - 1]
        w = result.left_vectors[:, n - 1]
        rows.append((n, float(np.linalg.norm(v) * np.linalg.norm(w))))
    xs = np.sqrt([n for n, _ in rows])
    ys = np.log([v for _, v in rows])
    slope, intercept = np.polyfit(xs, ys, 1)
    return GrowthReport(rows=rows, slope=float(slope), intercept=float(intercept))


def numerical_rank(matrix, rel_threshold=1e-6):
    """Rank as the number of singular values above rel_threshold * s_max,
    from the eigenvalues of M^H M (computed with the in-house solver)."""
    m = np.asarray(matrix, dtype=complex)
    gram = m.conj().T @ m
    lam = linalg.eigendecompose(gram).eigenvalues.real
    top = float(lam.max())
    if top <= 0.0:
        return 0
    return int(np.sum(lam > (rel_threshold ** 2) * top))


@dataclass
class DecayFit:
    exponent: float
    residual: float
    n_used: int
    degenerate: bool


def radius_decay_fit(result, fit, mu=None, window=None):
    """Regression of log |lambda_n - mu_n| against log n over trusted
    indices (a log log n correction column is included when
    2 alpha <= 1, mirroring the k^(-2 alpha) log k radius shape).

    Distances below 1e-12 * mu_n are treated as exactly-preserved
    eigenvalues and excluded; when everything is excluded the fit is
    degenerate (exponent 0).  Fewer than 8 usable points raise
    UntrustedError.
    """
    k = result.size
    if mu is None:
        raise ValueError("pass the unperturbed eigenvalue array")
    lo, hi = window if window is not None else (2, k // 2)
    ns = []
    ds = []
    for n in range(lo, hi + 1):
        if not result.trusted[n - 1]:
            continue
        d = abs(result.eigenvalues[n - 1] - mu[n - 1])
        if d <= 1e-12 * max(1.0, abs(mu[n - 1])):
            continue
        ns.append(n)
        ds.append(d)
    if not ns:
        total = sum(1 for n in range(lo, hi + 1) if result.trusted[n - 1])
        if total >= 8:
            return DecayFit(exponent=0.0, residual=0.0, n_used=0, degenerate=True)
        raise UntrustedError("fewer than 8 trusted points in the window")
    if len(ns) < 8:
        raise UntrustedError(
            f"fewer than 8 usable points in the window ({len(ns)})"
        )
    ns = np.asarray(ns, dtype=float)
    ys = np.log(np.asarray(ds))
    cols = [np.log(ns), np.ones_like(ns)]
    if 2.0 * fit.alpha <= 1.0:
        cols.insert(1, np.log(np.log(ns)))
    a = np.column_stack(cols)
    coef, res, *_ = np.linalg.lstsq(a, ys, rcond=None)
    resid = float(np.sqrt(res[0] / len(ns))) if np.size(res) else 0.0
    return DecayFit(
        exponent=float(coef[0]),
        residual=resid,
        n_used=len(ns),
        degenerate=False,
    )
