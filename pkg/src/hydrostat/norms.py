"""Discrete anisotropic Sobolev norms and space-time norm accumulation.

Spatial norms are Fourier-multiplier sums with the Parseval weight 8 (the
volume of the box), so analytic values of simple trigonometric fields are
reproduced exactly.  Space-time norms are accumulated along a trajectory with
trapezoidal quadrature on the solver's own samples; the supremum parts track
running maxima over the sampled instants.

Accumulator kinds
-----------------
E0       sqrt of the time integral of the squared L2 norm
EHdelta  maximal-regularity norm: L2-in-time of u, of du/dt, and of the
         anisotropic Laplacian of u (three terms, summed after square roots);
         the vertical diffusion weight delta is part of the kind
Ez       L2-in-time of the H1_z H1_xy norm plus the running max of the
         H1_z L2_xy norm
L4H32    fourth root of the time integral of the fourth power of the H^{3/2}
         norm
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import InsufficientData, InvalidParameter, OrderingError
from .spectral import DOMAIN_VOLUME, SpectralField, _lap_delta_mult

KINDS = ("E0", "EHdelta", "Ez", "L4H32")


def _sobolev_mult(g, s: float) -> np.ndarray:
    return g.cached(("sobolev", float(s)), lambda: (1.0 + g.ksq) ** s)


def _aniso_mult(g, r: int, s: int) -> np.ndarray:
    return g.cached(
        ("aniso", r, s), lambda: (1.0 + g.kz3**2) ** r * (1.0 + g.k2h) ** s
    )


def norm_sobolev(F: SpectralField, s: float) -> float:
    """Isotropic H^s norm via the multiplier (1 + |k|^2)^{s/2}."""
    if s < 0:
        raise InvalidParameter(f"s must be >= 0, got {s}")
    g = F.grid
    return float(
        np.sqrt(np.sum(_sobolev_mult(g, s) * np.abs(F.coeffs) ** 2) * DOMAIN_VOLUME)
    )


def norm_aniso(F: SpectralField, r: int, s: int) -> float:
    """Mixed-regularity norm H^r in z, H^s in the horizontal (q = p = 2)."""
    if r not in (0, 1, 2, 3) or s not in (0, 1):
        raise InvalidParameter(f"unsupported anisotropic exponents (r={r}, s={s})")
    g = F.grid
    return float(
        np.sqrt(np.sum(_aniso_mult(g, r, s) * np.abs(F.coeffs) ** 2) * DOMAIN_VOLUME)
    )


def norm_l2_barotropic(F: SpectralField) -> float:
    """L2 norm over the horizontal square of the vertical-average plane."""
    plane = F.coeffs[:, :, 0]
    return float(np.sqrt(np.sum(np.abs(plane) ** 2) * 4.0))


def _sq(fields: Sequence[SpectralField], mult: np.ndarray) -> float:
    return float(
        sum(np.sum(mult * np.abs(f.coeffs) ** 2) for f in fields) * DOMAIN_VOLUME
    )


def _components(u) -> tuple[SpectralField, ...]:
    if u is None:
        return ()
    if hasattr(u, "components"):
        return tuple(u.components())
    if isinstance(u, SpectralField):
        return (u,)
    return tuple(u)


@dataclass(frozen=True)
class NormAccumulator:
    """Running state of one space-time norm along a trajectory."""

    kind: str
    delta: float = 0.0
    integrals: tuple[float, ...] = ()
    running_max: float = 0.0
    sample_count: int = 0
    t_start: float = 0.0
    t_last: float = 0.0
    _last: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidParameter(f"unknown accumulator kind {self.kind!r}")
        if self.kind == "EHdelta" and self.delta < 0:
            raise InvalidParameter("EHdelta accumulator needs delta >= 0")

    @property
    def n_parts(self) -> int:
        return 3 if self.kind == "EHdelta" else 1


_ONES = np.ones((1, 1, 1))


def _integrands(acc: NormAccumulator, u, dudt) -> tuple[float, ...]:
    uc = _components(u)
    g = uc[0].grid
    if acc.kind == "E0":
        return (_sq(uc, _ONES),)
    if acc.kind == "EHdelta":
        dc = _components(dudt)
        if len(dc) != len(uc):
            raise InvalidParameter("EHdelta accumulation needs du/dt samples")
        lap = g.cached(
            ("lap_sq", acc.delta), lambda: _lap_delta_mult(g, acc.delta) ** 2
        )
        return (_sq(uc, _ONES), _sq(dc, _ONES), _sq(uc, lap))
    if acc.kind == "Ez":
        return (_sq(uc, _aniso_mult(g, 1, 1)),)
    # L4H32: fourth power of the H^{3/2} norm
    return (_sq(uc, _sobolev_mult(g, 1.5)) ** 2,)


def accumulate(
    acc: NormAccumulator,
    u,
    dudt=None,
    dt_since_last: float | None = None,
) -> NormAccumulator:
    """Fold one trajectory sample into the accumulator (trapezoidal in time).

    The first call records the initial instant (dt ignored); later calls
    require the positive time increment since the previous sample.  dudt is
    the semi-discrete right-hand side at the same instant and is only needed
    by the EHdelta kind.
    """
    vals = _integrands(acc, u, dudt)
    uc = _components(u)
    new_max = acc.running_max
    if acc.kind == "Ez":
        g = uc[0].grid
        new_max = max(new_max, float(np.sqrt(_sq(uc, _aniso_mult(g, 1, 0)))))

    if acc.sample_count == 0:
        return replace(
            acc,
            integrals=tuple(0.0 for _ in vals),
            running_max=new_max,
            sample_count=1,
            _last=vals,
        )

    if dt_since_last is None or dt_since_last <= 0:
        raise OrderingError(
            f"time increment must be positive after the first sample, got {dt_since_last}"
        )
    new_int = tuple(
        I + 0.5 * dt_since_last * (a + b)
        for I, a, b in zip(acc.integrals, acc._last, vals)
    )
    return replace(
        acc,
        integrals=new_int,
        running_max=new_max,
        sample_count=acc.sample_count + 1,
        t_last=acc.t_last + dt_since_last,
        _last=vals,
    )


def finalize(acc: NormAccumulator) -> float:
    """Combine the accumulated parts into the norm value."""
    if acc.sample_count < 2:
        raise InsufficientData(
            f"need at least 2 samples to finalize, have {acc.sample_count}"
        )
    if acc.kind == "E0":
        return float(np.sqrt(acc.integrals[0]))
    if acc.kind == "EHdelta":
        return float(sum(np.sqrt(I) for I in acc.integrals))
    if acc.kind == "Ez":
        return float(np.sqrt(acc.integrals[0]) + acc.running_max)
    return float(acc.integrals[0] ** 0.25)
