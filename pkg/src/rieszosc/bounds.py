"""Explicit constants, certified series bounds and the enclosure region.

Everything here works in normalized coordinates: eigenvalue gaps at least
1 and mu_1 = 1 (use `OscillatorModel.normalized_form`), so that mu_k >= k
and, for z with Re z within 1/2 of mu_n and |z - mu_n| >= 1/2,

    |mu_k - z| >= max(|k - n|, 1) / 2.

Two layers of bounds are provided for the weighted resolvent-type sums
S_gamma(n, z) = sum_k 1/(k^gamma |mu_k - z|):

  * closed-form constants `explicit_C` / `explicit_D` with the comparison
    functions sigma_gamma(n) / tau_gamma(h), assembled term by term from
    sum-integral splits (each piece is a rigorous majorant for n >= 2
    resp. h >= 3/2);
  * per-instance `certified_sum_bound`: an exact finite sum under the
    minorant above plus a closed-form integral tail, always at least as
    sharp as the generic constant.

On top of these sit the region parameters: `select_N` / `select_h` pick
the smallest rectangle-plus-disks region on which the perturbation block
norm is provably at most 1/2, `EnclosureCertificate` serializes the
result, and `refined_radius` shrinks the high-index disks at the rate the
same machinery still certifies.

Floating point: sums are evaluated in double precision and inflated by
1e-9 relative slack where an FFT is involved; the certificates are
inequality-level, not bit-rigorous.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "sigma",
    "tau",
    "explicit_C",
    "explicit_D",
    "SumBoundCertificate",
    "certified_sum_bound",
    "batch_sum_bounds",
    "select_N",
    "select_h",
    "EnclosureCertificate",
    "build_certificate",
    "region_contains",
    "refined_radius",
    "refined_radius_constant",
    "schur_norm_bound",
    "SelectionError",
]

_LOG2 = math.log(2.0)


class SelectionError(Exception):
    """The envelope is too weak to determine the region parameters."""


def sigma(gamma, n):
    """Comparison rate for sums along the spectrum: n^-gamma log n when
    gamma <= 1, n^-1 when gamma > 1.  Decreasing for n >= e^(1/gamma)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if n <= 1:
        raise ValueError("n must exceed 1")
    if gamma <= 1.0:
        return n ** (-gamma) * math.log(n)
    return 1.0 / n


def tau(gamma, h):
    """Comparison rate left of the spectrum: h^-gamma (gamma < 1),
    h^-1 log h (gamma = 1), h^-1 (gamma > 1)."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if h <= 1:
        raise ValueError("h must exceed 1")
    if gamma < 1.0:
        return h ** (-gamma)
    if gamma == 1.0:
        return math.log(h) / h
    return 1.0 / h


def explicit_C(gamma):
    """Admissible constant with sup_z S_gamma(n, z) <= C(gamma) sigma_gamma(n)
    for all n > 1.

    Assembled from the split of 2 [ sum_{k<n} 1/(k^gamma (n-k)) + n^-gamma
    + sum_{k>n} 1/(k^gamma (k-n)) ]: boundary terms, the 2^gamma log
    integral over [n/2, n-1], the three-case integral over [1, n/2], the
    near-diagonal harmonic block, and the 2^(1-gamma)/gamma far tail; for
    gamma > 1 the log-to-constant reduction log n / n^(gamma-1) <= 1/((gamma-1) e)
    converts every log term.  Constants 1/log 2 appear where a bare power
    must be dominated by sigma at n = 2.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g = gamma
    il2 = 1.0 / _LOG2
    if g < 1.0:
        terms = [
            2.0 * il2,                  # 1/(n-1)
            2.0 ** g * il2,             # 1/(n-1)^gamma
            2.0 ** g,                   # integral over [n/2, n-1]
            2.0 ** g / (1.0 - g) * il2, # integral over [1, n/2]
            2.0 * il2,                  # n^-gamma and (n+1)^-gamma
            1.0,                        # near-diagonal harmonic block
            2.0 ** (1.0 - g) / g * il2, # far tail
        ]
    elif g == 1.0:
        terms = [
            2.0 * il2,
            2.0 * il2,
            2.0,
            2.0,
            2.0 * il2,
            1.0,
            il2,
        ]
    else:
        ie = 1.0 / ((g - 1.0) * math.e)
        terms = [
            2.0,                        # 1/(n-1) <= 2/n
            2.0 ** g,                   # 1/(n-1)^gamma <= 2^gamma / n
            2.0 ** g * ie,              # 2^gamma log n / n^gamma
            2.0 / (g - 1.0),            # integral over [1, n/2]
            2.0,                        # n^-gamma and (n+1)^-gamma
            ie,                         # log n / n^gamma
            2.0 ** (1.0 - g) / g,       # far tail
        ]
    return 2.0 * sum(terms)


def explicit_D(gamma):
    """Admissible constant with sum_k 1/(k^gamma (k+h)) <= D(gamma) tau_gamma(h)
    for all h >= 3/2.

    Split at k ~ h: the head k = 1 term, the integral over [1, h], and the
    integral over [h, inf).  The gamma = 1 case has no h-uniform constant
    as h -> 1+ (the sum tends to 1 while tau vanishes), hence the 3/2
    domain floor, absorbed through 1/log(3/2) factors.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    g = gamma
    if g < 1.0:
        return 1.0 + 1.0 / (1.0 - g) + 1.0 / g
    if g == 1.0:
        return 1.0 + 2.0 / math.log(1.5)
    return 1.0 + 1.0 / (g - 1.0) + 1.0 / g


@dataclass(frozen=True)
class SumBoundCertificate:
    """Rigorous upper bound for sup over admissible z near mu_n of
    S_gamma(n, z), as exact partial sum + integral tail majorant."""

    gamma: float
    n: int
    partial_sum: float
    tail_bound: float

    @property
    def total(self):
        return self.partial_sum + self.tail_bound


def _tail_majorant(gamma, n, k_cut):
    """Upper bound for 2 sum_{k > k_cut} 1/(k^gamma (k - n)), k_cut >= 2n + 2:
    k - n >= k/2 there, and the decreasing summand is dominated by its integral."""
    return 2.0 * (2.0 * k_cut ** (-gamma - 1.0) + 2.0 * k_cut ** (-gamma) / gamma)


def certified_sum_bound(gamma, n, model=None, k_cut=None):
    """Certificate for sup_z S_gamma(n, z) over Re z within 1/2 of mu_n,
    |z - mu_n| >= 1/2 (the boundary circle and the strip above/below).

    Requires a normalized model (gaps >= 1, mu_k >= k); the bound uses
    only the minorant |mu_k - z| >= max(|k - n|, 1)/2, so it is valid for
    every such model.  partial_sum is the exact sum of
    2 / (k^gamma max(|k - n|, 1)) for k <= k_cut; tail_bound majorizes the
    rest in closed form.
    """
    if model is not None and not model.normalized:
        raise ValueError("certified_sum_bound needs a normalized model")
    if n < 2:
        raise ValueError("n must exceed 1")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if k_cut is None:
        k_cut = max(4 * n, 100000)
    if k_cut < 2 * n + 2:
        raise ValueError("k_cut must be at least 2n + 2")
    ks = np.arange(1, k_cut + 1, dtype=float)
    dist = np.maximum(np.abs(ks - n), 1.0)
    partial = 2.0 * float(np.sum(1.0 / (ks ** gamma * dist)))
    return SumBoundCertificate(
        gamma=gamma,
        n=int(n),
        partial_sum=partial,
        tail_bound=_tail_majorant(gamma, n, k_cut),
    )


def batch_sum_bounds(gamma, n_max, k_cut=None):
    """certified_sum_bound totals for every n in [2, n_max] at once.

    The two half-sums are convolutions of k^-gamma with 1/j, evaluated by
    FFT in O(K log K) and inflated by 1e-9 relative slack to cover FFT
    round-off; `select_N` re-verifies its decision boundary with direct
    sums.  Returns an array t with t[n] = total(n) for 2 <= n <= n_max
    (entries 0, 1 are nan).
    """
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    if k_cut is None:
        k_cut = max(4 * n_max, 100000)
    if k_cut < 2 * n_max + 2:
        raise ValueError("k_cut must be at least 2 n_max + 2")
    a = np.arange(0, k_cut + 1, dtype=float)
    a[0] = 1.0
    a = a ** (-gamma)
    a[0] = 0.0  # a[k] = k^-gamma, k >= 1
    b = np.zeros(k_cut + 1)
    b[1:] = 1.0 / np.arange(1, k_cut + 1, dtype=float)  # b[j] = 1/j

    size = 1
    while size < 2 * (k_cut + 1):
        size *= 2
    fa = np.fft.rfft(a, size)
    fb = np.fft.rfft(b, size)
    conv = np.fft.irfft(fa * fb, size)  # conv[n] = sum_{k<n} k^-gamma / (n-k)
    corr = np.fft.irfft(np.fft.rfft(a[::-1], size) * fb, size)
    # corr[k_cut - n] = sum_j a[n + j] b[j] = sum_{k>n} k^-gamma / (k-n)

    ns = np.arange(2, n_max + 1)
    left = conv[ns]
    right = corr[k_cut - ns]
    mid = ns.astype(float) ** (-gamma)
    tails = np.array([_tail_majorant(gamma, int(n), k_cut) for n in ns])
    totals = 2.0 * (left + right + mid) * (1.0 + 1e-9) + tails
    out = np.full(n_max + 1, math.nan)
    out[2:] = totals
    return out


def select_N(fit, model, n_limit=10 ** 8):
    """Smallest N with M_b * certified_sum_bound(2 alpha, n).total <= 1/2
    for every n > N (M_b taken in normalized coordinates, i.e. divided by
    the gap scale of `model`).

    The generic envelope M_b C(2 alpha) sigma_{2 alpha}(n) is decreasing
    beyond e^(1/2 alpha); once it crosses 1/2 every larger n is certified
    by the generic constant, and all smaller n are checked against their
    per-instance certificates (batch evaluation, with the decision
    boundary re-verified by direct summation).
    """
    norm_model = model.normalized_form()
    m_b = fit.m_b / norm_model.scale
    if m_b < 0:
        raise ValueError("M_b must be nonnegative")
    gamma = 2.0 * fit.alpha
    if gamma <= 0:
        raise ValueError("alpha must be positive")
    if m_b == 0.0:
        return 1

    c_gen = explicit_C(gamma)
    n_env = None
    n = max(2, int(math.ceil(math.exp(1.0 / gamma))) + 1)
    while n <= n_limit:
        if m_b * c_gen * sigma(gamma, n) <= 0.5:
            n_env = n
            break
        n = max(n + 1, int(n * 1.25))
    if n_env is None:
        raise SelectionError(
            "envelope too weak: generic bound never reaches 1/2 below n_limit"
        )

    totals = batch_sum_bounds(gamma, n_env)
    bad = np.nonzero(m_b * totals[2:] > 0.5)[0]
    cand = 1 if bad.size == 0 else int(bad[-1]) + 2

    # Re-verify the boundary window with direct sums (no FFT round-off).
    k_cut = max(4 * n_env, 100000)
    n_sel = cand
    for n in range(max(2, cand - 2), min(cand + 8, n_env) + 1):
        t = certified_sum_bound(gamma, n, k_cut=k_cut).total
        if m_b * t > 0.5:
            n_sel = max(n_sel, n)
    return max(n_sel, 1)


def select_h(fit, big_n, model=None, h_limit=10 ** 6, resolution=1e-3):
    """Smallest h > 1 on a 1e-3 grid with
    2 M_b ( (1/h) sum_{k<=N+2} k^(-2 alpha) + D(2 alpha) tau_{2 alpha}(h) ) <= 1/2.

    The left side is evaluated on a geometric coarse grid to bracket the
    crossing (it need not be monotone near h = 1 when 2 alpha = 1), then
    refined by bisection to the stated resolution.
    """
    scale = model.normalized_form().scale if model is not None else 1.0
    m_b = fit.m_b / scale
    gamma = 2.0 * fit.alpha
    head = float(np.sum(np.arange(1, big_n + 3, dtype=float) ** (-gamma)))
    d_gen = explicit_D(gamma)

    def lhs(h):
        return 2.0 * m_b * (head / h + d_gen * tau(gamma, h))

    h_min = 1.0 + resolution
    if m_b == 0.0 or lhs(h_min) <= 0.5:
        return h_min
    lo = h_min
    hi = None
    h = h_min
    while h <= h_limit:
        h *= 1.5
        if lhs(h) <= 0.5:
            hi = h
            break
        lo = h
    if hi is None:
        raise SelectionError(
            "envelope too weak: rectangle half-height exceeds h_limit"
        )
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if lhs(mid) <= 0.5:
            hi = mid
        else:
            lo = mid
    return hi


# ----------------------------------------------------------------------
# region


@dataclass(frozen=True)
class EnclosureCertificate:
    """Region parameters certifying the spectrum enclosure.

    All geometry lives in normalized coordinates z' = (z + shift)/scale:
    a rectangle (-h, N + 3/2) x (-h, h) and open disks of radius 1/2
    around mu'_k for k > N + 1.  `boundary_audit` records (z, bound)
    witnesses of ||B(z)|| <= 1/2 along the region boundary (in original
    coordinates).  `m_b`/`alpha` are the fitted envelope of the original
    form; the normalized envelope constant is m_b / scale.
    """

    m_b: float
    alpha: float
    big_n: int
    h: float
    scale: float = 1.0
    shift: float = 0.0
    form: dict = field(default_factory=dict)
    model: dict = field(default_factory=dict)
    boundary_audit: tuple = ()

    @property
    def m_b_normalized(self):
        return self.m_b / self.scale

    def to_normalized(self, z):
        return (complex(z) + self.shift) / self.scale

    def to_original(self, zn):
        return complex(zn) * self.scale - self.shift

    def to_json(self):
        doc = {
            "M_b": self.m_b,
            "alpha": self.alpha,
            "N": self.big_n,
            "h": self.h,
            "scale": self.scale,
            "shift": self.shift,
            "form": self.form,
            "model": self.model,
            "boundary_audit": [
                {"re": z.real, "im": z.imag, "bound": b} for z, b in self.boundary_audit
            ],
        }
        return json.dumps(doc, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        return cls(
            m_b=float(doc["M_b"]),
            alpha=float(doc["alpha"]),
            big_n=int(doc["N"]),
            h=float(doc["h"]),
            scale=float(doc.get("scale", 1.0)),
            shift=float(doc.get("shift", 0.0)),
            form=doc.get("form", {}),
            model=doc.get("model", {}),
            boundary_audit=tuple(
                (complex(rec["re"], rec["im"]), float(rec["bound"]))
                for rec in doc.get("boundary_audit", [])
            ),
        )


def build_certificate(fit, model, form=None, boundary_audit=()):
    """Run the (N, h) selection for a fitted envelope and package the result."""
    norm = model.normalized_form()
    big_n = select_N(fit, model)
    h = select_h(fit, big_n, model=model)
    return EnclosureCertificate(
        m_b=fit.m_b,
        alpha=fit.alpha,
        big_n=big_n,
        h=h,
        scale=norm.scale,
        shift=norm.shift,
        form=form.describe() if form is not None else {},
        model=model.describe(),
        boundary_audit=tuple(boundary_audit),
    )


def region_contains(cert, z, mu_normalized=None, radii=None):
    """Membership of z (original coordinates) in the enclosure region.

    Returns (inside, tag): tag 0 for the rectangle, k for the disk around
    mu'_k (k > N + 1), -1 for outside.  `mu_normalized` maps indices to
    normalized eigenvalue positions (defaults to mu'_k = k, exact for
    affine spectra); `radii` optionally supplies refined disk radii.
    """
    zn = cert.to_normalized(z)
    if (
        -cert.h < zn.real < cert.big_n + 1.5
        and abs(zn.imag) < cert.h
    ):
        return True, 0
    mu_of = (lambda k: float(k)) if mu_normalized is None else mu_normalized
    k = int(round(zn.real))
    for kk in (k - 1, k, k + 1):
        if kk <= cert.big_n + 1:
            continue
        r = 0.5 if radii is None else radii(kk)
        if abs(zn - mu_of(kk)) < r:
            return True, kk
    return False, -1


def _radius_shape(gamma):
    if gamma <= 1.0:
        return lambda j: j ** (-gamma) * math.log(j)
    return lambda j: 1.0 / j


def refined_radius_constant(fit, cert, k_horizon=4096):
    """Least c_r such that the disk radii r_j = c_r rho(j) stay certified
    for every j in (N+1, k_horizon].

    On a circle of radius r around mu'_j the diagonal term of the bound
    becomes 1/(j^gamma r) while the off-diagonal part is unchanged, so the
    smallest certifiable radius at j is j^-gamma / (1/(2 M_b) - off_diag);
    c_r is the sup of that over rho(j).  The per-j minimum shrinks like
    2 M_b j^-gamma, so the sup is attained at small j and the finite
    horizon is harmless.  Returns None when certification fails even at
    the 1/2 cap (room <= 0 for some j).
    """
    gamma = 2.0 * fit.alpha
    m_b = cert.m_b_normalized
    rho = _radius_shape(gamma)
    if m_b == 0.0:
        return 0.0
    horizon = max(k_horizon, 2 * (cert.big_n + 2))
    totals = batch_sum_bounds(gamma, horizon)
    c_r = 0.0
    for j in range(cert.big_n + 2, horizon + 1):
        off_diag = totals[j] - 2.0 * j ** (-gamma)
        room = 0.5 / m_b - off_diag
        if room <= 0.0:
            return None
        c_r = max(c_r, j ** (-gamma) / room / rho(j))
    return c_r


def refined_radius(k, fit, cert, c_r=None, k_horizon=4096):
    """Shrunken disk radius r_k = c_r rho(k), rho(k) = k^(-2 alpha) log k
    for 2 alpha <= 1 and k^-1 otherwise, capped at 1/2.

    c_r comes from `refined_radius_constant` (pass it in when computing
    many radii); when certification fails even at the cap the generic
    radius 1/2 is returned.
    """
    if k <= cert.big_n + 1:
        raise ValueError("refined radii exist only for k > N + 1")
    if c_r is None:
        c_r = refined_radius_constant(fit, cert, k_horizon=k_horizon)
    if c_r is None:
        return 0.5
    gamma = 2.0 * fit.alpha
    return min(c_r * _radius_shape(gamma)(k), 0.5)


def schur_norm_bound(rows):
    """Schur bound sqrt(sup_n sum_j M_nj * sup_j sum_n M_nj) for an
    entrywise-nonnegative matrix; an upper bound on the operator norm."""
    m = np.asarray(rows, dtype=float)
    if m.ndim != 2:
        raise ValueError("need a 2-d nonnegative array")
    if np.any(m < 0):
        raise ValueError("entries must be nonnegative")
    return math.sqrt(float(m.sum(axis=1).max()) * float(m.sum(axis=0).max()))
