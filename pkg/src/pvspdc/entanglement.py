"""Schmidt numbers and probability concentration of joint OAM spectra."""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .spdc import JointSpectrum, PumpSpec, SignalGeometry, joint_spectrum
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec

__all__ = [
    "SpectrumSlice",
    "schmidt_number",
    "schmidt_scan",
    "concentration_fraction",
    "window_center",
    "full_slice",
    "TailWarning",
]

log = logging.getLogger(__name__)

TAIL_RATIO = 1e-8
TAIL_RUN = 5
_CHUNK = 40
_MAX_ELL = 2000


class TailWarning(UserWarning):
    """The spectrum tail could not be shown negligible."""


@dataclass(frozen=True)
class SpectrumSlice:
    """Unnormalised probabilities ``|A(ell1, pump_ell - ell1)|²`` keyed by ``ell1``.

    ``tail_verified`` records whether the slice was extended until the
    residual tail was negligible (see :func:`full_slice`).
    """

    probs: Mapping[int, float]
    pump_ell: int = 0
    tail_verified: bool = False

    def __post_init__(self):
        probs = {int(k): float(v) for k, v in self.probs.items()}
        if not probs:
            raise ValueError("empty spectrum slice")
        if any(not v >= 0 for v in probs.values()):
            raise ValueError("probabilities must be non-negative")
        if not any(v > 0 for v in probs.values()):
            raise ValueError("spectrum slice has no support")
        object.__setattr__(self, "probs", dict(sorted(probs.items())))

    @classmethod
    def from_spectrum(cls, spectrum: JointSpectrum, pump_ell: int,
                      tail_verified: bool = False) -> "SpectrumSlice":
        return cls(spectrum.slice_probs(pump_ell), pump_ell, tail_verified)

    def __repr__(self):
        lo, hi = min(self.probs), max(self.probs)
        return (f"SpectrumSlice(pump_ell={self.pump_ell}, ell1=[{lo}, {hi}], "
                f"tail_verified={self.tail_verified})")

    def values(self, ells: Sequence[int]) -> np.ndarray:
        return np.array([self.probs.get(int(l), 0.0) for l in ells])


def window_center(pump_ell: int) -> int:
    """Symmetry point ``pump_ell / 2`` rounded toward zero."""
    return int(pump_ell / 2)


def schmidt_number(slice: SpectrumSlice, ell_max: int) -> float:
    """``K = (Σp)² / Σp²`` over ``2·ell_max + 1`` values of ``ell1``.

    The window is centred on :func:`window_center` of the pump OAM; for
    ``pump_ell = 0`` it is ``[-ell_max, ell_max]``.

    Raises
    ------
    ValueError
        If the window contains no non-zero probability.
    """
    if ell_max < 0:
        raise ValueError(f"ell_max must be non-negative, got {ell_max}")
    c = window_center(slice.pump_ell)
    p = slice.values(range(c - ell_max, c + ell_max + 1))
    s2 = float(np.dot(p, p))
    if s2 == 0.0:
        raise ValueError(f"no support inside the window ell_max={ell_max}")
    # normalise first; K is scale invariant and this keeps Σp² away from underflow
    p = p / p.max()
    return float(p.sum() ** 2 / np.dot(p, p))


def schmidt_scan(slice: SpectrumSlice, ell_max_grid: Sequence[int]
                 ) -> list[tuple[int, float, int]]:
    """``(ell_max, K, d)`` rows with ``d = 2·ell_max + 1`` the largest allowed K."""
    return [(int(m), schmidt_number(slice, int(m)), 2 * int(m) + 1) for m in ell_max_grid]


def concentration_fraction(slice: SpectrumSlice, band: int) -> float:
    """Share of probability with ``|ell1| <= band``.

    Meaningful only for a slice whose tail is negligible; an unverified
    slice triggers a :class:`TailWarning`.
    """
    if band < 0:
        raise ValueError(f"band must be non-negative, got {band}")
    if not slice.tail_verified:
        warnings.warn("spectrum tail was not verified negligible; fraction may be biased",
                      TailWarning, stacklevel=2)
    total = sum(slice.probs.values())
    inside = sum(p for l, p in slice.probs.items() if abs(l) <= band)
    return min(1.0, inside / total)


def _tail_done(p: np.ndarray, pmax: float) -> bool:
    return p.size >= TAIL_RUN and bool(np.all(p[-TAIL_RUN:] < TAIL_RATIO * pmax))


def full_slice(pump: PumpSpec, pump_ell: int | None = None,
               signal: SignalGeometry = SignalGeometry(),
               spec: QuadratureSpec = DEFAULT_QUADRATURE) -> tuple[SpectrumSlice, JointSpectrum]:
    """Compute one pump component's spectrum out to a negligible tail.

    The range grows symmetrically about the slice's centre in steps of 40
    until, on both sides, five consecutive probabilities fall below
    ``1e-8`` times the peak.
    """
    if pump_ell is None:
        if len(pump.ells) != 1:
            raise ValueError("pump_ell is required for a superposition pump")
        pump_ell = pump.ells[0]
    single = pump.with_ell(pump_ell)
    c = window_center(pump_ell)
    half = _CHUNK
    while True:
        spectrum = joint_spectrum(single, (c - half, c + half), signal, spec)
        probs = spectrum.slice_probs(pump_ell)
        pmax = max(probs.values())
        right = np.array([probs[l] for l in range(c, c + half + 1)])
        left = np.array([probs[l] for l in range(c, c - half - 1, -1)])
        if _tail_done(right, pmax) and _tail_done(left, pmax):
            return SpectrumSlice(probs, pump_ell, tail_verified=True), spectrum
        if half >= _MAX_ELL:
            log.warning("tail not negligible by |ell1 - %d| = %d", c, half)
            return SpectrumSlice(probs, pump_ell, tail_verified=False), spectrum
        half += _CHUNK
