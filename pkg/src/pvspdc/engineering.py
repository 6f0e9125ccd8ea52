"""Post-selected two-photon states behind a pair of ring-core fibres.

A pump superposition ``Σ c_ell PV_ell`` produces pairs on the anti-diagonals
``ell1 + ell2 = ell``.  Each fibre transmits only its supported OAM set, so
the surviving state lives on the diagonal segments inside that square.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .entanglement import full_slice
from .modes import ModeKind
from .spdc import (
    DEFAULT_RING_RADIUS,
    PumpSpec,
    SignalGeometry,
    amplitude_limited,
)
from .special_math import DEFAULT_QUADRATURE, QuadratureSpec

__all__ = [
    "AmplitudeSource",
    "RcfSpec",
    "TwoPhotonState",
    "NoSupportedModesError",
    "build_filtered_state",
    "state_schmidt",
    "diagonal_diagram",
    "DiagonalDiagram",
]


class NoSupportedModesError(ValueError):
    """No pump diagonal crosses the fibre's supported square."""


class AmplitudeSource(enum.Enum):
    EXACT = "exact"      # numerical overlap with Bessel-profile modes
    LIMITED = "limited"  # one OAM-independent ring-gaussian amplitude


@dataclass(frozen=True)
class RcfSpec:
    """Ring-core fibre: supported OAM values and the PV geometry it matches.

    The same set applies to both photons.
    """

    supported_ells: frozenset[int] = frozenset(range(-6, 7))
    r_r: float = DEFAULT_RING_RADIUS
    w0: float = 1.0

    def __post_init__(self):
        ells = frozenset(int(l) for l in self.supported_ells)
        if not ells:
            raise ValueError("fibre must support at least one mode")
        if not self.w0 > 0 or not self.r_r >= 0:
            raise ValueError("fibre geometry needs w0 > 0 and r_r >= 0")
        object.__setattr__(self, "supported_ells", ells)

    @classmethod
    def symmetric(cls, ell_max: int, r_r: float = DEFAULT_RING_RADIUS,
                  w0: float = 1.0) -> "RcfSpec":
        return cls(frozenset(range(-ell_max, ell_max + 1)), r_r, w0)

    @property
    def signal(self) -> SignalGeometry:
        return SignalGeometry(self.r_r, self.w0)

    def supports(self, ell: int) -> bool:
        return int(ell) in self.supported_ells


@dataclass
class TwoPhotonState:
    """``Σ c |ell1>|ell2>`` over distinct ``(ell1, ell2)`` keys.

    ``transmitted`` is the share of the unfiltered pair probability that
    fell inside the fibre square before renormalisation; ``None`` when it
    was not computed.
    """

    terms: list[tuple[int, int, complex]]
    normalized: bool = False
    transmitted: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        keys = [(l1, l2) for l1, l2, _ in self.terms]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate (ell1, ell2) terms")
        if self.normalized and abs(self.norm_sq() - 1.0) > 1e-12:
            raise ValueError(f"state flagged normalised has norm² {self.norm_sq()!r}")

    def norm_sq(self) -> float:
        return float(sum(abs(c) ** 2 for _, _, c in self.terms))

    def as_dict(self) -> dict[tuple[int, int], complex]:
        return {(l1, l2): c for l1, l2, c in self.terms}

    def renormalized(self) -> "TwoPhotonState":
        n = math.sqrt(self.norm_sq())
        if n == 0:
            raise ValueError("cannot normalise the zero state")
        return TwoPhotonState([(l1, l2, c / n) for l1, l2, c in self.terms], True,
                              self.transmitted, dict(self.meta))

    def coefficient_matrix(self) -> tuple[np.ndarray, list[int], list[int]]:
        rows = sorted({l1 for l1, _, _ in self.terms})
        cols = sorted({l2 for _, l2, _ in self.terms})
        ri = {l: i for i, l in enumerate(rows)}
        ci = {l: i for i, l in enumerate(cols)}
        m = np.zeros((len(rows), len(cols)), dtype=complex)
        for l1, l2, c in self.terms:
            m[ri[l1], ci[l2]] = c
        return m, rows, cols


def _allowed_pairs(pump_ells: Iterable[int], fiber: RcfSpec) -> list[tuple[int, int, int]]:
    out = []
    for ell in pump_ells:
        for l1 in sorted(fiber.supported_ells):
            if fiber.supports(ell - l1):
                out.append((ell, l1, ell - l1))
    return out


def build_filtered_state(pump: PumpSpec, fiber: RcfSpec = RcfSpec(),
                         amplitude_source: AmplitudeSource = AmplitudeSource.LIMITED,
                         spec: QuadratureSpec = DEFAULT_QUADRATURE) -> TwoPhotonState:
    """State transmitted by the fibre pair, renormalised.

    Each allowed pair ``(ell1, ell - ell1)`` gets ``c_ell · A``.  With
    ``LIMITED`` amplitudes ``A`` is the same for every pair, which yields the
    ideal equal-weight states; ``EXACT`` uses the Bessel-profile overlaps.

    For ``EXACT`` the transmitted fraction (probability inside the square
    over the full spectrum, for the pump's coefficient weights) is stored in
    ``transmitted``.

    Raises
    ------
    NoSupportedModesError
        If no pair survives the filter.
    """
    allowed = _allowed_pairs(pump.ells, fiber)
    if not allowed:
        raise NoSupportedModesError(
            f"no supported modes: pump OAM {pump.ells} misses the fibre square")
    signal = fiber.signal

    terms: dict[tuple[int, int], complex] = {}
    transmitted = None
    if amplitude_source is AmplitudeSource.LIMITED:
        kind = ModeKind.PV_APPROX if pump.kind is not ModeKind.GAUSSIAN else pump.kind
        pmode = PumpSpec(((0, 1.0),), pump.ring_radius, pump.width, kind).mode(0, spec)
        a = amplitude_limited(pmode, signal, spec)
        for ell, l1, l2 in allowed:
            terms[(l1, l2)] = terms.get((l1, l2), 0j) + pump.coeff(ell) * a
    else:
        inside = outside = 0.0
        for ell in pump.ells:
            c = pump.coeff(ell)
            sl, js = full_slice(pump, ell, signal, spec)
            for l1, p in sl.probs.items():
                w = abs(c) ** 2 * p
                if fiber.supports(l1) and fiber.supports(ell - l1):
                    inside += w
                    terms[(l1, ell - l1)] = terms.get((l1, ell - l1), 0j) + c * js.amplitude(l1, ell - l1)
                else:
                    outside += w
        transmitted = inside / (inside + outside)

    keep = [(l1, l2, c) for (l1, l2), c in sorted(terms.items()) if c != 0]
    if not keep:
        raise NoSupportedModesError("all supported pairs have zero amplitude")
    state = TwoPhotonState(keep, transmitted=transmitted,
                           meta={"amplitude_source": amplitude_source.value})
    return state.renormalized()


def state_schmidt(state: TwoPhotonState) -> tuple[float, list[float]]:
    """Schmidt number and descending Schmidt weights of a pure state.

    Weights are the squared singular values of the coefficient matrix
    ``M[ell1, ell2]``, normalised to sum to one; ``K = 1 / Σ λ²``.
    """
    m, _, _ = state.coefficient_matrix()
    s = np.linalg.svd(m, compute_uv=False)
    lam = s * s
    lam = lam / lam.sum()
    lam = lam[lam > 1e-15 * lam[0]]
    return float(1.0 / np.sum(lam * lam)), [float(v) for v in lam]


@dataclass(frozen=True)
class DiagonalDiagram:
    """Occupancy grid over ``ell1`` (rows) by ``ell2`` (columns)."""

    ell1: tuple[int, ...]
    ell2: tuple[int, ...]
    occupied: np.ndarray

    @property
    def count(self) -> int:
        return int(self.occupied.sum())

    def cells(self) -> list[tuple[int, int]]:
        return [(self.ell1[i], self.ell2[j]) for i, j in zip(*np.nonzero(self.occupied))]


def diagonal_diagram(pump: PumpSpec, fiber: RcfSpec = RcfSpec(),
                     extent: int | None = None) -> DiagonalDiagram:
    """Mark cells that obey OAM conservation and lie inside the fibre square.

    ``extent`` sets the half-width of the drawn grid; it defaults to the
    largest supported ``|ell|``.
    """
    if extent is None:
        extent = max(abs(l) for l in fiber.supported_ells)
    axis = tuple(range(-extent, extent + 1))
    occ = np.zeros((len(axis), len(axis)), dtype=bool)
    idx = {l: i for i, l in enumerate(axis)}
    for _, l1, l2 in _allowed_pairs(pump.ells, fiber):
        if l1 in idx and l2 in idx:
            occ[idx[l1], idx[l2]] = True
    return DiagonalDiagram(axis, axis, occ)
