"""SPDC projection amplitudes onto perfect-vortex mode pairs (thin crystal).

In the thin-crystal limit the two-photon amplitude for signal/idler modes
``ell1``, ``ell2`` and a pump component of OAM ``ell`` is

    A(ell1, ell2, ell) = δ(ell, ell1 + ell2) · 2π ∫ r u_ell1(r) u_ell2(r) w_ell(r) dr

with every radial profile unit-normalised.  All profiles are real and
non-negative so ``A >= 0``; complex phases only enter through pump
superposition coefficients.
"""

from __future__ import annotations

import enum
import functools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .modes import (
    ModeKind,
    RadialMode,
    gaussian,
    log_radial_profile,
    normalize,
    normalize_family,
)
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec, integrate_radial, \
    log_bessel_i_scaled_orders

__all__ = [
    "DEFAULT_RING_RADIUS",
    "OPTIMAL_PUMP_WIDTH",
    "GAUSSIAN_COMPARISON_WIDTH",
    "SignalGeometry",
    "PumpSpec",
    "JointSpectrum",
    "PumpFamily",
    "overlap_amplitude",
    "amplitude_limited",
    "scan_pump_width",
    "peak_pump_width",
    "joint_spectrum",
    "signal_modes",
]

DEFAULT_RING_RADIUS = 3.53
OPTIMAL_PUMP_WIDTH = 1.0 / math.sqrt(2.0)
GAUSSIAN_COMPARISON_WIDTH = 5.0


@dataclass(frozen=True)
class SignalGeometry:
    """Geometry of the down-converted PV modes (lengths in units of w0)."""

    ring_radius: float = DEFAULT_RING_RADIUS
    width: float = 1.0
    kind: ModeKind = ModeKind.PV_EXACT

    def __post_init__(self):
        if not self.width > 0 or not self.ring_radius >= 0:
            raise ValueError("signal geometry needs width > 0 and ring radius >= 0")
        if self.kind is ModeKind.GAUSSIAN:
            raise ValueError("down-converted modes must be perfect vortices")


@dataclass(frozen=True)
class PumpSpec:
    """Pump beam: a superposition of PV components sharing one geometry.

    ``components`` holds ``(ell, coeff)`` pairs with ``Σ|coeff|² = 1``; use
    :meth:`superposition` to normalise automatically.  A gaussian pump has
    ``kind=GAUSSIAN``, ``ring_radius=0`` and the single component ``(0, 1)``.
    """

    components: tuple[tuple[int, complex], ...]
    ring_radius: float = DEFAULT_RING_RADIUS
    width: float = OPTIMAL_PUMP_WIDTH
    kind: ModeKind = ModeKind.PV_EXACT

    def __post_init__(self):
        comps = tuple((int(l), complex(c)) for l, c in self.components)
        object.__setattr__(self, "components", comps)
        if not comps:
            raise ValueError("pump needs at least one component")
        ells = [l for l, _ in comps]
        if len(set(ells)) != len(ells):
            raise ValueError(f"duplicate pump OAM values: {ells}")
        total = sum(abs(c) ** 2 for _, c in comps)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"pump coefficients must have unit norm, got {total!r}")
        if not self.width > 0:
            raise ValueError(f"pump width must be positive, got {self.width}")
        if self.kind is ModeKind.GAUSSIAN:
            if self.ring_radius != 0 or ells != [0]:
                raise ValueError("a gaussian pump has ring radius 0 and the single OAM 0")
        elif not self.ring_radius >= 0:
            raise ValueError(f"ring radius must be non-negative, got {self.ring_radius}")

    @classmethod
    def superposition(cls, coeffs: Mapping[int, complex] | Iterable[tuple[int, complex]],
                      ring_radius: float = DEFAULT_RING_RADIUS,
                      width: float = OPTIMAL_PUMP_WIDTH,
                      kind: ModeKind = ModeKind.PV_EXACT) -> "PumpSpec":
        items = list(coeffs.items()) if isinstance(coeffs, Mapping) else list(coeffs)
        norm = math.sqrt(sum(abs(complex(c)) ** 2 for _, c in items))
        if norm == 0:
            raise ValueError("pump coefficients are all zero")
        return cls(tuple((l, complex(c) / norm) for l, c in items), ring_radius, width, kind)

    @classmethod
    def pv(cls, ell: int = 0, ring_radius: float = DEFAULT_RING_RADIUS,
           width: float = OPTIMAL_PUMP_WIDTH, kind: ModeKind = ModeKind.PV_EXACT) -> "PumpSpec":
        return cls(((ell, 1.0),), ring_radius, width, kind)

    @classmethod
    def gaussian(cls, width: float = GAUSSIAN_COMPARISON_WIDTH) -> "PumpSpec":
        return cls(((0, 1.0),), 0.0, width, ModeKind.GAUSSIAN)

    @property
    def ells(self) -> list[int]:
        return [l for l, _ in self.components]

    def coeff(self, ell: int) -> complex:
        return dict(self.components).get(int(ell), 0j)

    def mode(self, ell: int, spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RadialMode:
        """Normalised radial mode of the component with OAM ``ell``."""
        return _pump_mode(self.kind, int(ell), self.ring_radius, self.width, spec)

    def with_ell(self, ell: int) -> "PumpSpec":
        """Single-component pump of the same geometry."""
        return PumpSpec(((ell, 1.0),), self.ring_radius, self.width, self.kind)


@functools.lru_cache(maxsize=256)
def _pump_mode(kind, ell, ring_radius, width, spec) -> RadialMode:
    if kind is ModeKind.GAUSSIAN:
        return gaussian(width, ell)
    return normalize(RadialMode(kind, ell, ring_radius, width), spec)


@functools.lru_cache(maxsize=64)
def _signal_family(kind, ring_radius, width, nmax, spec) -> tuple[RadialMode, ...]:
    return tuple(normalize_family(kind, range(nmax + 1), ring_radius, width, spec))


def signal_modes(signal: SignalGeometry, nmax: int,
                 spec: QuadratureSpec = DEFAULT_QUADRATURE) -> tuple[RadialMode, ...]:
    """Normalised down-converted modes for orders ``0..nmax`` (cached)."""
    # round the cache key up so nearby requests share one family
    key = max(16, 1 << int(math.ceil(math.log2(max(nmax, 1) + 1))))
    return _signal_family(signal.kind, float(signal.ring_radius), float(signal.width),
                          key, spec)[: nmax + 1]


@dataclass
class JointSpectrum:
    """Overlap amplitudes ``A(ell1, ell2)`` for one pump.

    ``entries`` only holds pairs allowed by OAM conservation with some pump
    component.  ``ref_amp_sq`` is ``|A(0, 0, 0)|²`` for an ``ell = 0`` pump of
    the same geometry, the reference used when plotting normalised spectra.
    """

    pump: PumpSpec
    entries: dict[tuple[int, int], float]
    ref_amp_sq: float
    signal: SignalGeometry = field(default_factory=SignalGeometry)

    def __repr__(self):
        return (f"JointSpectrum(pump_ells={self.pump.ells}, entries={len(self.entries)}, "
                f"ref_amp_sq={self.ref_amp_sq!r})")

    def amplitude(self, ell1: int, ell2: int) -> float:
        return self.entries.get((int(ell1), int(ell2)), 0.0)

    def slice_probs(self, pump_ell: int) -> dict[int, float]:
        """``ell1 -> |A(ell1, pump_ell - ell1)|²`` for one pump component."""
        return {l1: a * a for (l1, l2), a in sorted(self.entries.items())
                if l1 + l2 == pump_ell}

    def normalized(self, pump_ell: int) -> dict[int, float]:
        """Probabilities relative to ``ref_amp_sq``."""
        return {l1: p / self.ref_amp_sq for l1, p in self.slice_probs(pump_ell).items()}


def _r_max(signal: SignalGeometry, pump: RadialMode, spec: QuadratureSpec) -> float:
    return (max(signal.ring_radius, pump.ring_radius)
            + spec.r_max_factor * max(signal.width, pump.width))


def _pair_amplitudes(pairs: Sequence[tuple[int, int]], pump: RadialMode,
                     signal: SignalGeometry, spec: QuadratureSpec) -> np.ndarray:
    """Radial overlaps for unordered ``(|ell1|, |ell2|)`` pairs, one quadrature."""
    if not pairs:
        return np.zeros(0)
    n1 = np.array([abs(p[0]) for p in pairs])
    n2 = np.array([abs(p[1]) for p in pairs])
    nmax = int(max(n1.max(), n2.max()))
    modes = signal_modes(signal, nmax, spec)
    ln = np.array([m.log_norm for m in modes])
    w2 = signal.width ** 2
    r_r = signal.ring_radius
    bessel = signal.kind is ModeKind.PV_EXACT
    const = ln[n1] + ln[n2] + pump.log_norm

    def integrand(r):
        core = -((r - r_r) ** 2) / w2
        lpump = log_radial_profile(pump, r)
        if bessel:
            table = log_bessel_i_scaled_orders(nmax, 2.0 * r * r_r / w2)
            lp = table[n1] + table[n2] + 2.0 * core
        else:
            lp = np.broadcast_to(2.0 * core, (len(pairs), r.size))
        with np.errstate(under="ignore"):
            return r * np.exp(lp + lpump + const[:, None])

    vals = integrate_radial(integrand, _r_max(signal, pump, spec), spec)
    return 2.0 * math.pi * np.atleast_1d(vals)


def overlap_amplitude(ell1: int, ell2: int, pump_component: tuple[int, RadialMode],
                      signal: SignalGeometry = SignalGeometry(),
                      spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """Thin-crystal amplitude ``A(ell1, ell2, ell)`` for one pump component.

    Returns exactly ``0.0`` when ``ell1 + ell2 != ell``.
    """
    ell, pump = pump_component
    if int(ell1) + int(ell2) != int(ell):
        return 0.0
    if not pump.is_normalized:
        raise ValueError("pump mode must be normalised")
    return float(_pair_amplitudes([(ell1, ell2)], pump, signal, spec)[0])


def amplitude_limited(pump: RadialMode, signal: SignalGeometry = SignalGeometry(),
                      spec: QuadratureSpec = DEFAULT_QUADRATURE) -> float:
    """OAM-independent amplitude with ring-gaussian signal modes.

    Uses ``u(r, r_r, w0)² = u(r, r_r, w0/√2)``, so the product of two
    normalised ring-gaussian modes is one narrower ring.  The result applies
    to every allowed ``(ell1, ell2)`` inside the approximation's validity.
    """
    if not pump.is_normalized:
        raise ValueError("pump mode must be normalised")
    ring = normalize(RadialMode(ModeKind.PV_APPROX, 0, signal.ring_radius, signal.width), spec)
    narrow = RadialMode(ModeKind.PV_APPROX, 0, signal.ring_radius,
                        signal.width / math.sqrt(2.0))
    const = 2.0 * ring.log_norm + pump.log_norm

    def integrand(r):
        with np.errstate(under="ignore"):
            return r * np.exp(const + log_radial_profile(narrow, r) + log_radial_profile(pump, r))

    return 2.0 * math.pi * integrate_radial(integrand, _r_max(signal, pump, spec), spec)


class PumpFamily(enum.Enum):
    """Pump beams compared in the pump-width scan."""

    PV_OPT = "pv_opt"      # ring radius equal to the signal ring
    PV_057 = "pv_057"      # ring radius 2 w0, about 0.57 of the signal ring
    GAUSSIAN = "gaussian"

    def pump_mode(self, width: float, signal: SignalGeometry = SignalGeometry(),
                  spec: QuadratureSpec = DEFAULT_QUADRATURE) -> RadialMode:
        if self is PumpFamily.GAUSSIAN:
            return gaussian(width)
        ring = signal.ring_radius if self is PumpFamily.PV_OPT else 2.0 * signal.width
        return _pump_mode(ModeKind.PV_APPROX, 0, ring, float(width), spec)


def _ell0_amp_sq(family: PumpFamily, width: float, signal: SignalGeometry,
                 spec: QuadratureSpec) -> float:
    pump = family.pump_mode(width, signal, spec)
    exact = SignalGeometry(signal.ring_radius, signal.width, ModeKind.PV_EXACT)
    a = overlap_amplitude(0, 0, (0, pump), exact, spec)
    return a * a


def scan_pump_width(family: PumpFamily, widths: Sequence[float],
                    signal: SignalGeometry = SignalGeometry(),
                    spec: QuadratureSpec = DEFAULT_QUADRATURE) -> list[tuple[float, float]]:
    """``|A(0, 0, 0)|²`` against pump width for exact PV signal modes.

    PV pumps use the ring-gaussian profile.
    """
    widths = [float(w) for w in widths]
    if not widths:
        raise ValueError("width grid is empty")
    if any(not w > 0 for w in widths):
        raise ValueError("pump widths must be positive")
    return [(w, _ell0_amp_sq(family, w, signal, spec)) for w in widths]


def peak_pump_width(family: PumpFamily, bounds: tuple[float, float] = (0.1, 12.0),
                    signal: SignalGeometry = SignalGeometry(),
                    spec: QuadratureSpec = DEFAULT_QUADRATURE) -> tuple[float, float]:
    """Width maximising ``|A(0,0,0)|²`` and the maximum, by bounded search.

    A coarse grid brackets the peak before the bounded scalar search so a
    wide ``bounds`` cannot trap it on a shoulder.
    """
    lo, hi = bounds
    grid = np.linspace(lo, hi, 61)
    vals = [_ell0_amp_sq(family, w, signal, spec) for w in grid]
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    res = minimize_scalar(lambda w: -_ell0_amp_sq(family, w, signal, spec),
                          bounds=(a, b), method="bounded", options={"xatol": 1e-6})
    return float(res.x), float(-res.fun)


def joint_spectrum(pump: PumpSpec, ell1_range: tuple[int, int] | Sequence[int],
                   signal: SignalGeometry = SignalGeometry(),
                   spec: QuadratureSpec = DEFAULT_QUADRATURE) -> JointSpectrum:
    """Amplitudes for every ``ell1`` in range and every pump component.

    ``ell1_range`` is an inclusive ``(lo, hi)`` pair or an explicit sequence.
    Partner ``ell2 = ell - ell1``.  Pairs are deduplicated on their unordered
    absolute orders, which is where exchange symmetry comes from.
    """
    if isinstance(ell1_range, tuple) and len(ell1_range) == 2:
        lo, hi = int(ell1_range[0]), int(ell1_range[1])
        if hi < lo:
            raise ValueError(f"empty ell1 range {ell1_range}")
        ell1s = list(range(lo, hi + 1))
    else:
        ell1s = sorted({int(l) for l in ell1_range})
    if not ell1s:
        raise ValueError("empty ell1 range")

    entries: dict[tuple[int, int], float] = {}
    for ell in pump.ells:
        mode = pump.mode(ell, spec)
        keys = {}
        for l1 in ell1s:
            n1, n2 = sorted((abs(l1), abs(ell - l1)))
            keys.setdefault((n1, n2), []).append((l1, ell - l1))
        uniq = sorted(keys)
        amps = _pair_amplitudes(uniq, mode, signal, spec)
        for key, a in zip(uniq, amps):
            for pair in keys[key]:
                entries[pair] = float(a)

    ref_mode = pump.mode(0, spec) if pump.kind is not ModeKind.GAUSSIAN else pump.mode(0)
    ref = float(_pair_amplitudes([(0, 0)], ref_mode, signal, spec)[0])
    return JointSpectrum(pump, entries, ref * ref, signal)
