"""Scaled modified Bessel functions and adaptive radial quadrature.

The Bessel routines return ``exp(-x) * I_n(x)`` (or its logarithm) for
integer orders and non-negative real arguments.  Two regimes are used:

* ``x <= 30``: the ascending power series, accumulated relative to its
  leading term so nothing overflows, seeds the two highest requested
  orders; lower orders follow by downward recurrence.
* ``x > 30``: Miller's downward recurrence started well above the
  requested order, normalised with ``Ĩ_0 + 2 Σ Ĩ_k = 1``.
* ``x > 1e5``: the large-argument asymptotic series, which keeps the cost
  bounded for arbitrarily large arguments.

Working in logs lets high orders be evaluated where ``I_n`` underflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "QuadratureError",
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "SERIES_CUTOFF",
    "bessel_i_scaled",
    "log_bessel_i_scaled",
    "log_bessel_i_scaled_orders",
    "integrate_radial",
]

SERIES_CUTOFF = 30.0
ASYMPTOTIC_CUTOFF = 1e5

# Below this argument the leading series term is exact to double precision
# for every order; avoids dividing by a denormal in the recurrence.
_TINY_X = 1e-80
_RESCALE_AT = 1e200
_LOG_RESCALE = math.log(_RESCALE_AT)


class QuadratureError(ArithmeticError):
    """Adaptive quadrature exhausted its depth without meeting tolerance."""

    def __init__(self, message: str, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances for :func:`integrate_radial`.

    ``r_max_factor`` sets the truncation radius of mode integrals as
    ``ring radius + r_max_factor * width``.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    max_depth: int = 48
    r_max_factor: float = 12.0

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise ValueError(f"abs_tol must be non-negative, got {self.abs_tol}")
        if int(self.max_depth) != self.max_depth or self.max_depth < 1:
            raise ValueError(f"max_depth must be an integer >= 1, got {self.max_depth}")
        if not self.r_max_factor >= 5:
            raise ValueError(f"r_max_factor must be >= 5, got {self.r_max_factor}")


DEFAULT_QUADRATURE = QuadratureSpec()


# ---------------------------------------------------------------------------
# Bessel functions
# ---------------------------------------------------------------------------

def _log_series(n: int, x: np.ndarray) -> np.ndarray:
    """log(exp(-x) I_n(x)) from the ascending series, for 0 < x <= 30."""
    q = 0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    k = 0
    while True:
        k += 1
        term = term * q / (k * (k + n))
        total = total + term
        if k > 2 and np.all(term <= 1e-17 * total):
            break
    return -x + n * np.log(0.5 * x) - math.lgamma(n + 1) + np.log(total)


def _log_asymptotic(nmax: int, x: np.ndarray) -> np.ndarray:
    """log(exp(-x) I_k(x)) for k = 0..nmax from the Hankel expansion, x >> k²."""
    out = np.empty((nmax + 1, x.size))
    base = -0.5 * np.log(2.0 * math.pi * x)
    for n in range(nmax + 1):
        mu = 4.0 * n * n
        term = np.ones_like(x)
        total = np.ones_like(x)
        for k in range(1, 60):
            nxt = -term * (mu - (2 * k - 1) ** 2) / (8.0 * k * x)
            if np.all(np.abs(nxt) >= np.abs(term)):
                break
            term = nxt
            total = total + term
            if np.all(np.abs(term) <= 1e-17 * np.abs(total)):
                break
        out[n] = base + np.log(total)
    return out


def _miller_start(nmax: int, x_max: float) -> int:
    # I_k(x) ~ exp(-k^2 / 2x) for k << x; need the tail below ~1e-40.
    return nmax + 20 + int(math.ceil(math.sqrt(185.0 * max(x_max, 1.0))))


def _downward(nmax: int, x: np.ndarray, top: int, b_top1: np.ndarray,
              want_sum: bool):
    """Run I_{k-1} = I_{k+1} + (2k/x) I_k from ``k = top`` down to 0.

    Starts from b_top = 1, b_{top+1} = ``b_top1``.  Returns the log of the
    unnormalised values for orders 0..nmax (shape ``(nmax+1, len(x))``) and,
    if requested, the log of ``b_0 + 2 Σ_{k>=1} b_k``.
    """
    logs = np.empty((nmax + 1, x.size))
    b_next = b_top1.copy()
    b = np.ones_like(x)
    offset = np.zeros_like(x)
    acc = 2.0 * (b + b_next) if want_sum else None
    if top <= nmax:
        logs[top] = offset
    two_over_x = 2.0 / x
    for k in range(top, 0, -1):
        b_prev = b_next + k * two_over_x * b
        b_next, b = b, b_prev
        if want_sum:
            acc = acc + (2.0 * b if k > 1 else b)
        big = b > _RESCALE_AT
        if np.any(big):
            s = np.where(big, 1.0 / _RESCALE_AT, 1.0)
            b = b * s
            b_next = b_next * s
            if want_sum:
                acc = acc * s
            offset = offset + np.where(big, _LOG_RESCALE, 0.0)
        if k - 1 <= nmax:
            logs[k - 1] = np.log(b) + offset
    log_sum = np.log(acc) + offset if want_sum else None
    return logs, log_sum


def log_bessel_i_scaled_orders(nmax: int, x) -> np.ndarray:
    """Return ``log(exp(-x) I_k(x))`` for every order ``k = 0..nmax``.

    Parameters
    ----------
    nmax : int
        Highest order required.
    x : array_like
        Non-negative arguments.

    Returns
    -------
    ndarray
        Shape ``(nmax + 1,) + np.shape(x)``.  ``-inf`` where the value is
        exactly zero (``x == 0`` and ``k >= 1``).
    """
    if nmax < 0:
        raise ValueError(f"nmax must be non-negative, got {nmax}")
    xa = np.asarray(x, dtype=float)
    shape = xa.shape
    xf = xa.ravel()
    if np.any(~(xf >= 0)):
        raise ValueError("bessel argument must be non-negative")
    if np.any(~np.isfinite(xf)):
        raise ValueError("bessel argument must be finite")
    out = np.empty((nmax + 1, xf.size))
    ks = np.arange(nmax + 1)

    zero = xf == 0
    if np.any(zero):
        out[:, zero] = -np.inf
        out[0, zero] = 0.0

    tiny = (xf > 0) & (xf < _TINY_X)
    if np.any(tiny):
        xt = xf[tiny]
        lg = np.array([math.lgamma(k + 1) for k in ks])
        out[:, tiny] = -xt + ks[:, None] * np.log(0.5 * xt) - lg[:, None]

    small = (xf >= _TINY_X) & (xf <= SERIES_CUTOFF)
    if np.any(small):
        xs = xf[small]
        l_top = _log_series(nmax, xs)
        l_top1 = _log_series(nmax + 1, xs)
        logs, _ = _downward(nmax, xs, nmax, np.exp(l_top1 - l_top), False)
        out[:, small] = logs + l_top

    huge = xf > ASYMPTOTIC_CUTOFF
    if np.any(huge):
        if ASYMPTOTIC_CUTOFF < 4.0 * (nmax + 1) ** 2:
            raise ValueError(f"order {nmax} too high for arguments above {ASYMPTOTIC_CUTOFF:g}")
        out[:, huge] = _log_asymptotic(nmax, xf[huge])

    large = (xf > SERIES_CUTOFF) & ~huge
    if np.any(large):
        xl = xf[large]
        top = _miller_start(nmax, float(xl.max()))
        logs, log_sum = _downward(nmax, xl, top, np.zeros_like(xl), True)
        out[:, large] = logs - log_sum

    return out.reshape((nmax + 1,) + shape)


def log_bessel_i_scaled(ell: int, x):
    """Natural log of ``exp(-x) I_ell(x)``; safe where the value underflows."""
    ell = abs(int(ell))
    res = log_bessel_i_scaled_orders(ell, x)[ell]
    return float(res) if np.ndim(res) == 0 else res


def bessel_i_scaled(ell: int, x):
    """Exponentially scaled modified Bessel function of the first kind.

    Parameters
    ----------
    ell : int
        Integer order.  Negative orders use ``I_{-n} = I_n``.
    x : float or array_like
        Non-negative argument.

    Returns
    -------
    float or ndarray
        ``exp(-x) * I_ell(x)``.

    Examples
    --------
    >>> bessel_i_scaled(0, 0.0)
    1.0
    >>> round(bessel_i_scaled(0, 1.0), 12)
    0.465759607593
    """
    res = np.exp(log_bessel_i_scaled(ell, x))
    return float(res) if np.ndim(res) == 0 else res


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------

_INITIAL_PANELS = 64


def _simpson(h, fa, fm, fb):
    return (h / 6.0) * (fa + 4.0 * fm + fb)


def integrate_radial(f: Callable[[np.ndarray], np.ndarray], r_max: float,
                     spec: QuadratureSpec = DEFAULT_QUADRATURE,
                     full_output: bool = False):
    """Adaptive Simpson estimate of ``∫_0^r_max f(r) dr``.

    ``f`` is called with a 1-D array of radii and must return an array whose
    last axis matches it.  Leading axes make the integrand vector valued;
    all components are refined together and each must meet
    ``max(abs_tol, rel_tol * |I|)``.

    Subdivision is breadth first, so every level is a single vectorised call
    to ``f``.  The result is deterministic for fixed inputs.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    r_max : float
        Upper limit, must be positive.
    spec : QuadratureSpec
        Tolerances and depth cap.
    full_output : bool
        Also return the accumulated error estimate.

    Returns
    -------
    value : float or ndarray
    error : float or ndarray
        Only when ``full_output`` is true.

    Raises
    ------
    QuadratureError
        If intervals remain unconverged after ``spec.max_depth`` levels and
        the accumulated error exceeds the tolerance.
    """
    if not r_max > 0 or not math.isfinite(r_max):
        raise ValueError(f"r_max must be positive and finite, got {r_max}")

    def call(r):
        y = np.asarray(f(r), dtype=float)
        if y.shape[-1:] != r.shape:
            raise ValueError("integrand must return an array whose last axis matches r")
        if not np.all(np.isfinite(y)):
            raise ValueError("integrand is not finite on the integration range")
        return y

    edges = np.linspace(0.0, r_max, _INITIAL_PANELS + 1)
    a, b = edges[:-1], edges[1:]
    m = 0.5 * (a + b)
    fe = call(edges)
    fm = call(m)
    fa, fb = fe[..., :-1], fe[..., 1:]
    whole = _simpson(b - a, fa, fm, fb)

    total = np.zeros(whole.shape[:-1])
    err_total = np.zeros_like(total)
    scale = np.abs(whole.sum(axis=-1))
    tol = np.maximum(spec.abs_tol, spec.rel_tol * scale)

    for _ in range(spec.max_depth):
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        both = call(np.concatenate([lm, rm]))
        n = a.size
        flm, frm = both[..., :n], both[..., n:]
        h = b - a
        left = _simpson(0.5 * h, fa, flm, fm)
        right = _simpson(0.5 * h, fm, frm, fb)
        refined = left + right
        diff = refined - whole
        # local tolerance proportional to the interval's share of the range
        local_tol = tol[..., None] * (h / r_max)
        ok = np.all(np.abs(diff) <= 15.0 * local_tol, axis=tuple(range(diff.ndim - 1)))
        if np.any(ok):
            total = total + (refined[..., ok] + diff[..., ok] / 15.0).sum(axis=-1)
            err_total = err_total + (np.abs(diff[..., ok]) / 15.0).sum(axis=-1)
        keep = ~ok
        if not np.any(keep):
            break
        # split surviving intervals into halves
        a_k, m_k, b_k = a[keep], m[keep], b[keep]
        a = np.concatenate([a_k, m_k])
        b = np.concatenate([m_k, b_k])
        fa = np.concatenate([fa[..., keep], fm[..., keep]], axis=-1)
        fb = np.concatenate([fm[..., keep], fb[..., keep]], axis=-1)
        fm = np.concatenate([flm[..., keep], frm[..., keep]], axis=-1)
        whole = np.concatenate([left[..., keep], right[..., keep]], axis=-1)
        m = 0.5 * (a + b)
    else:
        rest = (refined[..., keep] + diff[..., keep] / 15.0).sum(axis=-1)
        rest_err = (np.abs(diff[..., keep]) / 15.0).sum(axis=-1)
        total = total + rest
        err_total = err_total + rest_err
        tol_final = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(total))
        if np.any(err_total > tol_final):
            raise QuadratureError(
                f"adaptive quadrature did not converge in {spec.max_depth} levels "
                f"(error estimate {np.max(err_total):.3e})",
                total, err_total)

    if total.ndim == 0:
        total, err_total = float(total), float(err_total)
    return (total, err_total) if full_output else total
