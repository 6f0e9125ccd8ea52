"""Transverse radial modes: exact and ring-gaussian perfect vortices, gaussians.

All modes are unit-normalised in the transverse plane,
``2π ∫ r |u(r)|² dr = 1``.  The normalisation is stored as a log so that
exact perfect-vortex modes of high order, whose raw profile underflows,
remain usable.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .special_math import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    integrate_radial,
    log_bessel_i_scaled_orders,
)

__all__ = [
    "ModeKind",
    "RadialMode",
    "pv_exact",
    "pv_approx",
    "gaussian",
    "radial_value",
    "log_radial_profile",
    "normalize",
    "normalize_family",
    "radial_fidelity",
    "support_radius",
]

_PEAK_GRID = 4001


class ModeKind(enum.Enum):
    PV_EXACT = "pv_exact"
    PV_APPROX = "pv_approx"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class RadialMode:
    """A transverse mode ``exp(i ell phi) u(r)``.

    ``log_norm`` is ``None`` until :func:`normalize` has been applied.
    """

    kind: ModeKind
    ell: int
    ring_radius: float
    width: float
    log_norm: float | None = None

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")
        if not self.ring_radius >= 0:
            raise ValueError(f"ring radius must be non-negative, got {self.ring_radius}")
        if self.kind is ModeKind.GAUSSIAN and self.ring_radius != 0:
            raise ValueError("a gaussian mode has zero ring radius")
        if self.kind is ModeKind.PV_EXACT and self.ring_radius == 0 and self.ell != 0:
            raise ValueError("an exact PV with zero ring radius vanishes for ell != 0")
        object.__setattr__(self, "ell", int(self.ell))

    @property
    def norm_const(self) -> float:
        """Multiplicative normalisation; may overflow to inf for very high orders."""
        if self.log_norm is None:
            raise ValueError("mode is not normalised")
        return math.exp(self.log_norm) if self.log_norm < 709.0 else math.inf

    @property
    def is_normalized(self) -> bool:
        return self.log_norm is not None


def pv_exact(ell: int, ring_radius: float, width: float = 1.0,
             spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RadialMode:
    """Normalised perfect vortex with the modified-Bessel radial profile."""
    return normalize(RadialMode(ModeKind.PV_EXACT, ell, ring_radius, width), spec)


def pv_approx(ell: int, ring_radius: float, width: float = 1.0,
              spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RadialMode:
    """Normalised ring-gaussian approximation ``exp(-(r - r_r)^2 / w^2)``."""
    return normalize(RadialMode(ModeKind.PV_APPROX, ell, ring_radius, width), spec)


def gaussian(width: float, ell: int = 0) -> RadialMode:
    """Normalised gaussian ``sqrt(2 / (π w²)) exp(-r² / w²)``.

    Closed form, no quadrature needed.
    """
    log_norm = 0.5 * math.log(2.0 / (math.pi * width * width))
    return RadialMode(ModeKind.GAUSSIAN, ell, 0.0, width, log_norm)


def log_radial_profile(mode: RadialMode, r) -> np.ndarray:
    """log of the unnormalised radial profile (``-inf`` where it is zero)."""
    r = np.asarray(r, dtype=float)
    w2 = mode.width * mode.width
    if mode.kind is ModeKind.GAUSSIAN:
        return -(r * r) / w2
    core = -((r - mode.ring_radius) ** 2) / w2
    if mode.kind is ModeKind.PV_APPROX:
        return core
    n = abs(mode.ell)
    x = 2.0 * r * mode.ring_radius / w2
    return core + log_bessel_i_scaled_orders(n, x)[n]


def _log_profile_family(orders: np.ndarray, ring_radius: float, width: float,
                        r: np.ndarray) -> np.ndarray:
    # one Bessel table shared by every order
    w2 = width * width
    table = log_bessel_i_scaled_orders(int(orders.max()), 2.0 * r * ring_radius / w2)
    return table[orders] - ((r - ring_radius) ** 2) / w2


def radial_value(mode: RadialMode, r):
    """Value of the normalised radial profile ``u(r)``.

    For ``PV_EXACT`` this is
    ``N exp(-(r - r_r)²/w²) · exp(-x) I_|ell|(x)`` with ``x = 2 r r_r / w²``,
    algebraically the same as ``N exp(-(r² + r_r²)/w²) I_|ell|(x)`` without
    the overflow.
    """
    if not mode.is_normalized:
        raise ValueError("mode is not normalised")
    ra = np.asarray(r, dtype=float)
    if np.any(~(ra >= 0)):
        raise ValueError("radius must be non-negative")
    val = np.exp(mode.log_norm + log_radial_profile(mode, ra))
    return float(val) if val.ndim == 0 else val


def _peak_radius(mode: RadialMode) -> float:
    """Radius of maximum |u|; exact PV modes drift outward with |ell|."""
    if mode.kind is not ModeKind.PV_EXACT or mode.ell == 0:
        return mode.ring_radius
    r = np.linspace(0.0, _peak_search_limit(abs(mode.ell), mode.ring_radius, mode.width),
                    _PEAK_GRID)
    lp = log_radial_profile(mode, r)
    return float(r[int(np.argmax(lp))])


def _peak_search_limit(n: int, ring_radius: float, width: float) -> float:
    # the peak of -(r - r_r)^2/w^2 - n^2/(2x) lies below r_r + (n^2 w^4 / 8 r_r)^(1/3) + w
    if ring_radius == 0:
        return n * width + 2.0 * width
    drift = (n * n * width ** 4 / (8.0 * ring_radius)) ** (1.0 / 3.0)
    return ring_radius + drift + 4.0 * width


def support_radius(mode: RadialMode, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Radius beyond which the mode is negligible: peak + factor · width."""
    return max(mode.ring_radius, _peak_radius(mode)) + spec.r_max_factor * mode.width


def normalize(mode: RadialMode, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RadialMode:
    """Return ``mode`` with ``log_norm`` set so that ``2π ∫ r u² dr = 1``.

    Idempotent: the stored normalisation is ignored and recomputed.
    """
    if mode.kind is ModeKind.GAUSSIAN:
        return replace(mode, log_norm=gaussian(mode.width).log_norm)
    return normalize_family(mode.kind, [mode.ell], mode.ring_radius, mode.width, spec)[0]


def normalize_family(kind: ModeKind, ells: Sequence[int], ring_radius: float,
                     width: float, spec: QuadratureSpec = DEFAULT_QUADRATURE
                     ) -> list[RadialMode]:
    """Normalise many modes of one geometry with a single vector quadrature."""
    ells = [int(e) for e in ells]
    if not ells:
        return []
    if kind is ModeKind.GAUSSIAN:
        return [replace(gaussian(width), ell=e) for e in ells]
    if kind is ModeKind.PV_APPROX:
        # profile is independent of ell
        m = RadialMode(kind, 0, ring_radius, width)
        r_max = support_radius(m, spec)
        val = 2.0 * math.pi * integrate_radial(
            lambda r: r * np.exp(2.0 * log_radial_profile(m, r)), r_max, spec)
        ln = -0.5 * math.log(val)
        return [RadialMode(kind, e, ring_radius, width, ln) for e in ells]

    if ring_radius == 0 and any(ells):
        raise ValueError("an exact PV with zero ring radius vanishes for ell != 0")
    orders = np.array(sorted({abs(e) for e in ells}))
    grid = np.linspace(0.0, _peak_search_limit(int(orders.max()), ring_radius, width),
                       _PEAK_GRID)
    lp_grid = _log_profile_family(orders, ring_radius, width, grid)
    peaks = grid[np.argmax(lp_grid, axis=1)]
    shift = lp_grid.max(axis=1)
    r_max = max(ring_radius, float(peaks.max())) + spec.r_max_factor * width

    def integrand(r):
        lp = _log_profile_family(orders, ring_radius, width, r)
        return r * np.exp(2.0 * (lp - shift[:, None]))

    vals = 2.0 * math.pi * np.atleast_1d(integrate_radial(integrand, r_max, spec))
    log_norms = -shift - 0.5 * np.log(vals)
    by_order = {int(n): float(ln) for n, ln in zip(orders, log_norms)}
    return [RadialMode(kind, e, ring_radius, width, by_order[abs(e)]) for e in ells]


def radial_fidelity(a: RadialMode, b: RadialMode,
                    spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Squared overlap ``|2π ∫ r u_a u_b dr|²`` of two same-``ell`` modes."""
    if a.ell != b.ell:
        raise ValueError(f"fidelity needs equal OAM, got {a.ell} and {b.ell}")
    if not (a.is_normalized and b.is_normalized):
        raise ValueError("modes must be normalised")
    r_max = max(support_radius(a, spec), support_radius(b, spec))
    la, lb = a.log_norm, b.log_norm

    def integrand(r):
        return r * np.exp(la + lb + log_radial_profile(a, r) + log_radial_profile(b, r))

    ov = 2.0 * math.pi * integrate_radial(integrand, r_max, spec)
    return min(1.0, ov * ov)
