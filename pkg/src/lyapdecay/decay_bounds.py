"""A-priori entrywise decay bounds.

Bounds covered:

* :func:`demko_bound` -- exponential off-diagonal decay of ``A^{-1}`` for SPD
  banded ``A``.
* :func:`freund_bound` -- decay of ``A^{-1}`` for banded normal matrices
  whose spectrum lies on a complex line segment ``[lambda1, lambda2]``.
* :func:`entry_bound` -- entries of the Lyapunov solution with a single
  nonzero right-hand-side entry, as an integral over the imaginary shift.
* :func:`y_diag_bound`, :func:`y_lastcol_bound` -- entries and last column of
  the reduced solution produced by Galerkin projection on a Krylov space.
* :func:`kron_decay_envelope` -- two-level bound for ``A = M (x) I + I (x) M``.

All integrals over the shift ``w`` have even integrands, so they are
computed as ``2 * int_0^inf`` with a double-exponential (exp-sinh) rule
whose step is halved until successive results agree to ``rtol``.
Quadrature results are then inflated by ``1 + safety`` so that quadrature
error cannot turn a bound into an under-estimate.

Integrands are written in terms of ``rho = 1/R`` (``0 < rho < 1``), e.g.
``R^2/(R^2-1)^2 = rho^2/(1-rho^2)^2``, which stays finite for huge shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, QuadratureError, UnboundedError

__all__ = [
    "SegmentSpec",
    "FreundParameters",
    "DecayEnvelope",
    "BoundQuadrature",
    "demko_constant",
    "demko_bound",
    "freund_parameters",
    "freund_bound",
    "resolvent_entry_factor",
    "entry_bound",
    "entry_bound_table",
    "entry_envelope",
    "y_diag_bound",
    "y_lastcol_bound",
    "kron_decay_envelope",
]


@dataclass(frozen=True)
class SegmentSpec:
    """Line segment ``[lambda1, lambda2]`` holding the spectrum of a
    ``beta``-banded matrix ``alpha1 I + alpha2 S0`` with ``S0`` Hermitian."""

    lambda1: complex
    lambda2: complex
    beta: int = 1

    def __post_init__(self):
        if self.lambda1 == self.lambda2:
            raise ValueError("segment endpoints must differ")
        if self.beta < 1:
            raise ValueError("bandwidth must be at least 1")
        object.__setattr__(self, "lambda1", complex(self.lambda1))
        object.__setattr__(self, "lambda2", complex(self.lambda2))

    @classmethod
    def from_matrix(cls, A, beta=None, shift=0.0):
        """Segment of ``A + shift*I`` for real symmetric ``A`` (eigenvalue extremes)."""
        from .core import as_dense, bandwidth

        Ad = as_dense(A)
        ev = np.linalg.eigvalsh(Ad)
        if beta is None:
            beta = max(bandwidth(Ad), 1)
        return cls(ev[0] + shift, ev[-1] + shift, beta)

    @property
    def is_real_positive(self):
        return (
            self.lambda1.imag == 0.0
            and self.lambda2.imag == 0.0
            and 0.0 < self.lambda1.real < self.lambda2.real
        )

    @property
    def real_extremes(self):
        """``(lambda_min, lambda_max)`` for a real SPD segment."""
        if not self.is_real_positive:
            raise ValueError("segment is not a positive real interval")
        return self.lambda1.real, self.lambda2.real

    def shifted(self, omega):
        return SegmentSpec(self.lambda1 + 1j * omega, self.lambda2 + 1j * omega, self.beta)


@dataclass(frozen=True)
class FreundParameters:
    a: complex
    alpha: float
    R: float
    alphaR: float
    betaR: float
    psi: float
    Ba: float

    @property
    def ellipse_residual(self):
        return (self.a.real / self.alphaR) ** 2 + (self.a.imag / self.betaR) ** 2 - 1.0


@dataclass
class DecayEnvelope:
    """Entrywise upper bounds together with a label of the rule used per entry."""

    shape: tuple
    bounds: np.ndarray
    meta: np.ndarray
    negligible: np.ndarray | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.bounds = np.asarray(self.bounds, dtype=float)
        if self.bounds.shape != tuple(self.shape):
            raise DimensionError("bounds do not match shape")
        if not np.all(np.isfinite(self.bounds)) or np.any(self.bounds < 0):
            raise ValueError("envelope bounds must be finite and nonnegative")

    def mask(self, tau):
        """Entries whose bound is below ``tau`` (certified negligible)."""
        return self.bounds < tau


@dataclass(frozen=True)
class BoundQuadrature:
    """Exp-sinh rule on ``(0, inf)``: nodes ``c*exp(pi/2*sinh(t))`` for
    ``t`` on a grid of step ``h`` in ``[-tmax, tmax]``.

    ``h`` starts at ``h0`` and is halved up to ``refinement_limit`` times.
    """

    h0: float = 0.25
    refinement_limit: int = 6
    rtol: float = 1e-10
    tmax: float = 4.0
    safety: float = 1e-6


DEFAULT_QUADRATURE = BoundQuadrature()

_TANH_SINH_TMAX = 3.2


def _exp_sinh(h, c, tmax):
    t = np.arange(-tmax, tmax + 0.5 * h, h)
    e = np.exp(0.5 * np.pi * np.sinh(t))
    x = c * e
    w = h * 0.5 * np.pi * np.cosh(t) * x
    return x, w


def _tanh_sinh_unit(h):
    """Nodes/weights of a tanh-sinh rule on ``[0, 1]``, accurate near 0."""
    t = np.arange(-_TANH_SINH_TMAX, _TANH_SINH_TMAX + 0.5 * h, h)
    u = 0.5 * np.pi * np.sinh(t)
    x = 1.0 / (1.0 + np.exp(-2.0 * u))
    w = 0.5 * h * 0.5 * np.pi * np.cosh(t) / np.cosh(u) ** 2
    return x, w


def _converged(new, old, rtol):
    diff = np.abs(new - old)
    return bool(np.all((diff <= rtol * np.abs(new)) | (diff <= 1e-290)))


def _refine(compute, q: BoundQuadrature, label):
    h = q.h0
    old = compute(h)
    err = None
    for _ in range(q.refinement_limit):
        h *= 0.5
        new = compute(h)
        if _converged(new, old, q.rtol):
            return new
        err = float(np.max(np.abs(new - old) / np.maximum(np.abs(new), 1e-300)))
        old = new
    raise QuadratureError(
        f"{label}: quadrature not converged at step h={h:g}",
        estimate=old,
        error_estimate=err,
    )


# ---------------------------------------------------------------------------
# Demko


def demko_constant(lambda_min, lambda_max):
    """Default constant ``max(1/lambda_min, (1 + sqrt(kappa))^2 / (2 lambda_max))``."""
    kappa = lambda_max / lambda_min
    return max(1.0 / lambda_min, (1.0 + math.sqrt(kappa)) ** 2 / (2.0 * lambda_max))


def demko_bound(lambda_min, lambda_max, beta, i, j, c0=None):
    """``c0 * q**(|i - j| / beta)`` with ``q = (sqrt(kappa) - 1)/(sqrt(kappa) + 1)``.

    ``i`` and ``j`` may be arrays (broadcast).
    """
    if not 0 < lambda_min <= lambda_max:
        raise ValueError("need 0 < lambda_min <= lambda_max")
    if beta < 1:
        raise ValueError("bandwidth must be at least 1")
    kappa = lambda_max / lambda_min
    sk = math.sqrt(kappa)
    q = (sk - 1.0) / (sk + 1.0)
    if c0 is None:
        c0 = demko_constant(lambda_min, lambda_max)
    dist = np.abs(np.subtract(i, j)) / beta
    out = c0 * np.power(q, dist)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Freund


def freund_parameters(seg: SegmentSpec) -> FreundParameters:
    l1, l2 = seg.lambda1, seg.lambda2
    width = abs(l2 - l1)
    a = (l2 + l1) / (l2 - l1)
    alpha = (abs(l1) + abs(l2)) / width
    if alpha <= 1.0:
        raise UnboundedError(
            "segment passes through the origin (alpha = 1, R = 1); no decay bound"
        )
    R = alpha + math.sqrt(alpha * alpha - 1.0)
    alphaR = 0.5 * (R + 1.0 / R)
    betaR = 0.5 * (R - 1.0 / R)
    if betaR <= 0.0:
        raise UnboundedError("degenerate ellipse (beta_R = 0)")
    psi = math.atan2(a.imag / betaR, a.real / alphaR)
    s = math.sqrt(alphaR**2 - math.cos(psi) ** 2)
    Ba = R / (betaR * s * (alphaR + s))
    return FreundParameters(a, alpha, R, alphaR, betaR, psi, Ba)


def freund_bound(seg: SegmentSpec, l, i):
    """Bound on ``|A^{-1}[l, i]|``, ``l != i``, for ``A`` with spectrum on ``seg``.

    ``(2R/|lambda1 - lambda2|) * B(a) * (1/R)**(|l - i|/beta)``.  ``l`` and
    ``i`` may be arrays; every pair must satisfy ``l != i``.
    """
    dist = np.abs(np.subtract(l, i))
    if np.any(dist == 0):
        raise ValueError("the bound holds only for l != i")
    p = freund_parameters(seg)
    width = abs(seg.lambda1 - seg.lambda2)
    out = 2.0 * p.R / width * p.Ba * np.power(1.0 / p.R, dist / seg.beta)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# shifted-resolvent factors


def _rho(lambda_min, lambda_max, sigma):
    """``1/R`` for the segment ``[lambda_min + i sigma, lambda_max + i sigma]``."""
    sigma = np.asarray(sigma, dtype=float)
    width = lambda_max - lambda_min
    s2 = sigma * sigma
    r_min = np.sqrt(lambda_min**2 + s2)
    r_max = np.sqrt(lambda_max**2 + s2)
    # alpha - 1 without cancellation
    am1 = (r_min + lambda_min + s2 / (r_max + lambda_max)) / width
    alpha = 1.0 + am1
    return 1.0 / (alpha + np.sqrt(am1 * (alpha + 1.0)))


def resolvent_entry_factor(lambda_min, lambda_max, sigma, d):
    """Bound on ``|e_k^T (i sigma I + A)^{-1} e_t|`` for SPD ``A`` with
    spectrum in ``[lambda_min, lambda_max]`` at scaled distance
    ``d = |k - t| / beta``.

    ``d == 0``: ``1/sqrt(lambda_min^2 + sigma^2)`` (norm bound).  ``d > 0``:
    ``(8/width) R^2/(R^2-1)^2 (1/R)^(d-1)``, the segment bound with
    ``B(a) <= 1/beta_R^2``.  Broadcasts over ``sigma`` and ``d``.
    """
    sigma = np.asarray(sigma, dtype=float)
    d = np.asarray(d, dtype=float)
    near = 1.0 / np.sqrt(lambda_min**2 + sigma * sigma)
    width = lambda_max - lambda_min
    if width <= 0.0:
        far = np.zeros(np.broadcast(sigma, d).shape)
    else:
        rho = _rho(lambda_min, lambda_max, sigma)
        with np.errstate(under="ignore"):
            far = 8.0 / width * np.power(rho, d + 1.0) / (1.0 - rho * rho) ** 2
    return np.where(d == 0, near, far)


def _check_spd(lambda_min, lambda_max):
    if not 0 < lambda_min <= lambda_max:
        raise ValueError("need an SPD spectrum 0 < lambda_min <= lambda_max")


def _entry_integral(lambda_min, lambda_max, d1, d2, q: BoundQuadrature):
    """(1/2pi) int g(w, d1) g(w, d2) dw over the real line; ``d1``/``d2`` are
    broadcast arrays of scaled distances."""
    c = math.sqrt(lambda_min * lambda_max)
    d1 = np.asarray(d1, dtype=float)[..., None]
    d2 = np.asarray(d2, dtype=float)[..., None]

    def compute(h):
        x, w = _exp_sinh(h, c, q.tmax)
        f = resolvent_entry_factor(lambda_min, lambda_max, x, d1)
        f = f * resolvent_entry_factor(lambda_min, lambda_max, x, d2)
        return 2.0 * np.sum(f * w, axis=-1) / (2.0 * np.pi)

    return _refine(compute, q, "entry bound")


def entry_bound(lambda_min, lambda_max, beta, k, t, q: BoundQuadrature = DEFAULT_QUADRATURE,
                gamma=1.0):
    """Bound on ``|X[k1, k2]|`` where ``A X + X A = gamma * e_t1 e_t2^T``.

    ``k`` and ``t`` are 1-based index pairs and ``A`` is SPD, ``beta``-banded
    with spectrum in ``[lambda_min, lambda_max]``.  Cases: both indices
    coincide -> ``1/(2 lambda_min)`` exactly; one coincides or none -> the
    corresponding shift integral.
    """
    _check_spd(lambda_min, lambda_max)
    (k1, k2), (t1, t2) = k, t
    d1 = abs(t1 - k1) / beta
    d2 = abs(t2 - k2) / beta
    if d1 == 0 and d2 == 0:
        return abs(gamma) / (2.0 * lambda_min)
    if lambda_max == lambda_min:
        return 0.0
    val = float(_entry_integral(lambda_min, lambda_max, d1, d2, q))
    return abs(gamma) * val * (1.0 + q.safety)


def entry_case(k, t):
    """Which case (``'i'``, ``'ii'`` or ``'iii'``) the index pair falls in."""
    (k1, k2), (t1, t2) = k, t
    if k1 == t1 and k2 == t2:
        return "iii"
    if k1 == t1 or k2 == t2:
        return "ii"
    return "i"


def entry_bound_table(lambda_min, lambda_max, beta, n, q: BoundQuadrature = DEFAULT_QUADRATURE):
    """``T[d1, d2]`` = :func:`entry_bound` at integer index distances
    ``0 <= d1, d2 < n`` (unit ``gamma``)."""
    _check_spd(lambda_min, lambda_max)
    if lambda_max == lambda_min:
        T = np.zeros((n, n))
    else:
        c = math.sqrt(lambda_min * lambda_max)
        d = np.arange(n, dtype=float)[:, None] / beta

        def compute(h):
            x, w = _exp_sinh(h, c, q.tmax)
            G = resolvent_entry_factor(lambda_min, lambda_max, x[None, :], d)
            return (G * (2.0 * w)) @ G.T / (2.0 * np.pi)

        T = _refine(compute, q, "entry bound table") * (1.0 + q.safety)
    T[0, 0] = 1.0 / (2.0 * lambda_min)
    return T


def entry_envelope(lambda_min, lambda_max, beta, shape, t, q=DEFAULT_QUADRATURE, gamma=1.0):
    """Envelope of :func:`entry_bound` over all ``k`` for one source ``t``."""
    rows, cols = shape
    T = entry_bound_table(lambda_min, lambda_max, beta, max(rows, cols), q)
    t1, t2 = t
    r = np.abs(np.arange(1, rows + 1) - t1)
    c = np.abs(np.arange(1, cols + 1) - t2)
    bounds = abs(gamma) * T[r[:, None], c[None, :]]
    meta = np.full(shape, "i", dtype=object)
    meta[r == 0, :] = "ii"
    meta[:, c == 0] = "ii"
    meta[np.ix_(r == 0, c == 0)] = "iii"
    return DecayEnvelope(tuple(shape), bounds, meta)


# ---------------------------------------------------------------------------
# reduced solution of the projected equation


def y_diag_bound(i, lambda_min, lambda_max, norm_b, q: BoundQuadrature = DEFAULT_QUADRATURE):
    """Bound on ``|Y[i, i]|`` (1-based ``i > 1``) of the projected solution.

    ``lambda_min``/``lambda_max`` are the magnitudes of the extreme Ritz
    values of the tridiagonal projected matrix.
    """
    if i <= 1:
        raise ValueError("the diagonal bound is stated for i > 1")
    _check_spd(lambda_min, lambda_max)
    if lambda_max == lambda_min:
        return 0.0
    val = float(_entry_integral(lambda_min, lambda_max, i - 1, i - 1, q))
    return norm_b**2 * val * (1.0 + q.safety)


def y_lastcol_bound(m, lambda_min, lambda_max, norm_b, q: BoundQuadrature = DEFAULT_QUADRATURE):
    """Bound on ``||Y e_m||_1`` for the ``m x m`` projected solution, ``m > 3``.

    ``(||b||^2 / 2pi) (64 / width^2) int R^8 / ((R-1)(R^2-1)^4) R^(-m) dw``.
    """
    if m <= 3:
        raise ValueError("the last-column bound is stated for m > 3")
    if not lambda_min > 0:
        raise UnboundedError("lambda_min must be positive; the bound diverges as R -> 1")
    _check_spd(lambda_min, lambda_max)
    width = lambda_max - lambda_min
    if width == 0.0:
        return 0.0
    c = math.sqrt(lambda_min * lambda_max)

    def compute(h):
        x, w = _exp_sinh(h, c, q.tmax)
        rho = _rho(lambda_min, lambda_max, x)
        with np.errstate(under="ignore"):
            f = np.power(rho, m + 1.0) / ((1.0 - rho) * (1.0 - rho * rho) ** 4)
        return 2.0 * np.sum(f * w)

    with np.errstate(over="raise", divide="raise"):
        try:
            integral = float(_refine(compute, q, "last-column bound"))
        except FloatingPointError as exc:
            raise UnboundedError(f"last-column bound overflows: {exc}") from exc
    val = norm_b**2 / (2.0 * np.pi) * 64.0 / width**2 * integral * (1.0 + q.safety)
    if not math.isfinite(val):
        raise UnboundedError("last-column bound is infinite")
    return val


# ---------------------------------------------------------------------------
# Kronecker-structured coefficient


def _inner_factor_table(mu_min, mu_max, beta, grid, omega, h):
    """``H[a, b, w] >= |Z[k11, k12](w)|`` where ``Z`` solves
    ``(M + i w/2 I) Z + Z (M + i w/2 I) = e_t11 e_t12^T`` and ``a``/``b`` are
    the integer distances ``|k11 - t11|``, ``|k12 - t12|``.

    With ``s = nu + w/2`` the inner integral is
    ``int g(s, a) g(w - s, b) ds``; it is split at ``s = w/2`` and the upper
    half folded onto the lower one so that both peaks sit at ``s = 0``.
    """
    c = math.sqrt(mu_min * mu_max)
    x1, w1 = _exp_sinh(h, c, DEFAULT_QUADRATURE.tmax)
    s1 = np.broadcast_to(-x1, (omega.size, x1.size))
    w1 = np.broadcast_to(w1, (omega.size, x1.size))
    u, wu = _tanh_sinh_unit(h)
    half = 0.5 * omega[:, None]
    s2 = half * u[None, :]
    w2 = half * wu[None, :]
    s = np.concatenate([s1, s2], axis=1)
    ws = np.concatenate([w1, w2], axis=1)
    d = np.arange(grid, dtype=float)[:, None, None] / beta
    Ga = resolvent_entry_factor(mu_min, mu_max, s[None], d)
    Gb = resolvent_entry_factor(mu_min, mu_max, (omega[:, None] - s)[None], d)
    I = np.einsum("aon,bon,on->abo", Ga, Gb, ws, optimize=True)
    return (I + I.transpose(1, 0, 2)) / (2.0 * np.pi)


def kron_decay_envelope(M_spec: SegmentSpec, t, grid=None, n=None,
                        q: BoundQuadrature = DEFAULT_QUADRATURE):
    """Entrywise bound on ``X`` for ``A = M (x) I + I (x) M`` and right-hand
    side ``e_t1 e_t2^T``.

    ``t = (t11, t12, t21, t22)`` are 1-based grid coordinates of the two
    source indices, ``t1 = (t12 - 1) * grid + t11`` (column-major).  Each
    factor ``e_k1^T (i w I + A)^{-1} e_t1`` equals an entry of the solution of
    a ``grid x grid`` Lyapunov equation with coefficient ``M + (w/2) i I``;
    that entry is bounded by the one-level shift integral with ``M``'s
    spectrum, and the two factors are integrated over ``w``.  The result is
    capped entrywise by the one-level bound on ``A`` itself (bandwidth
    ``grid * beta``), which is also valid.
    """
    if grid is None and n is None:
        raise ValueError("give grid or n")
    if n is not None:
        g = math.isqrt(n)
        if g * g != n:
            raise DimensionError(f"n={n} is not a perfect square")
        if grid is not None and grid != g:
            raise DimensionError("grid and n disagree")
        grid = g
    mu_min, mu_max = M_spec.real_extremes
    beta = M_spec.beta
    t11, t12, t21, t22 = t
    for v in t:
        if not 1 <= v <= grid:
            raise DimensionError(f"grid coordinate {v} outside 1..{grid}")
    N = grid * grid
    lam_min, lam_max = 2.0 * mu_min, 2.0 * mu_max

    # index of each linear k in the (a, b) distance table, per source
    k = np.arange(N)
    k11, k12 = k % grid + 1, k // grid + 1
    idx1 = np.abs(k11 - t11) * grid + np.abs(k12 - t12)
    idx2 = np.abs(k11 - t21) * grid + np.abs(k12 - t22)

    c_out = math.sqrt(lam_min * lam_max)

    def compute(h):
        om, w = _exp_sinh(h, c_out, q.tmax)
        H = _inner_factor_table(mu_min, mu_max, beta, grid, om, h).reshape(grid * grid, om.size)
        return (H * (2.0 * w)) @ H.T / (2.0 * np.pi)

    composed_table = _refine(compute, q, "Kronecker envelope") * (1.0 + q.safety)
    composed = composed_table[idx1[:, None], idx2[None, :]]

    t1 = (t12 - 1) * grid + t11
    t2 = (t22 - 1) * grid + t21
    direct = entry_envelope(lam_min, lam_max, grid * beta, (N, N), (t1, t2), q)
    use_direct = direct.bounds <= composed
    bounds = np.where(use_direct, direct.bounds, composed)
    meta = np.where(use_direct, direct.meta, "kron")
    return DecayEnvelope(
        (N, N),
        bounds,
        meta,
        info={"grid": grid, "t": tuple(t), "t_linear": (t1, t2)},
    )
