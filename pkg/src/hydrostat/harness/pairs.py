"""Matched-pair trajectories and difference-norm assembly.

The convergence experiments never evolve the difference system; both primal
systems run in lockstep from matched initial data (the anisotropic run gets
the diagnostic vertical velocity of the shared horizontal data, so the
initial difference vanishes exactly) and the difference norms are accumulated
from states sampled at identical times.  Time derivatives entering the
maximal-regularity norms are the semi-discrete right-hand sides, not finite
differences.
"""
from __future__ import annotations

import math
import time as _time
from dataclasses import dataclass

import numpy as np

from ..errors import BlowupDetected
from ..fields import _raw_w_from_v
from ..norms import NormAccumulator, accumulate, finalize
from ..solvers import (
    NavierStokes2DStepper,
    NavierStokesStepper,
    PrimitiveStepper,
    StokesScaledStepper,
    SimConfig,
    _check_blowup,
)
from ..spectral import EVEN, ODD, Grid, SpectralField, make_grid
from .initial_data import generate_initial_data


@dataclass(frozen=True)
class NormRow:
    """One (parameter point, norm) cell of a sweep."""

    mode: str
    eps: float
    delta: float
    gamma: float | None
    norm_name: str
    value: float
    blowup: bool
    wall_ms: int


def _fields(grid: Grid, stack: np.ndarray, parities) -> list[SpectralField]:
    # hot loop: finiteness is guarded by the per-step blowup check
    return [SpectralField._wrap(grid, stack[i], p) for i, p in enumerate(parities)]


def _finalize_rows(mode, eps, delta, gamma, accs, blowup, wall_ms, extra=()):
    rows = []
    total = 0.0
    for name, acc in accs:
        try:
            val = finalize(acc)
        except Exception:
            val = float("nan")
        if name in ("EHdelta", "Ez", "E1_bar_diff", "L4H32_tilde"):
            total += val
        rows.append(NormRow(mode, eps, delta, gamma, name, val, blowup, wall_ms))
    rows.append(NormRow(mode, eps, delta, gamma, "total", total, blowup, wall_ms))
    rows.extend(extra)
    return rows


def run_matched_pair(
    point: tuple[float, float],
    base: SimConfig,
    mode: str,
    gamma: float | None = None,
) -> list[NormRow]:
    """Run the matched systems at one (eps, delta) point and return norm rows.

    mode "eps_delta_to_zero" (also used by the gamma scan): anisotropic
    system against the horizontal-viscosity limit; difference pair
    (v_aniso - v_lim, eps (w_aniso - w_lim)) accumulated in the
    delta-weighted maximal-regularity norm and the vertical-regularity norm.

    mode "delta_to_infty": anisotropic system split into barotropic and
    baroclinic parts against 2D Navier-Stokes and the exact scaled Stokes
    flow; accumulates the maximal-regularity norm of the barotropic
    difference and the L4-in-time H^{3/2} norm of the baroclinic part.
    """
    eps, delta = point
    t0 = _time.perf_counter()
    grid = make_grid(base.nx, base.ny, base.nz)
    data = generate_initial_data(base.recipe, base.seed, grid)
    dt = base.dt
    n_steps = int(round(base.t_end / dt))
    rec_every = base.record_every

    if mode in ("eps_delta_to_zero", "gamma_scan"):
        ns = NavierStokesStepper(grid, eps, delta, dt)
        pe = PrimitiveStepper(grid, 0.0, dt)
        U = np.stack((data.v1.coeffs, data.v2.coeffs, eps * data.w.coeffs))
        V = np.stack((data.v1.coeffs, data.v2.coeffs))

        accs = {
            "EHdelta": NormAccumulator("EHdelta", delta=delta),
            "EH": NormAccumulator("EHdelta", delta=0.0),
            "Ez": NormAccumulator("Ez"),
        }
        blowup = False
        t_prev = None
        try:
            for n in range(n_steps + 1):
                t = n * dt
                record = n % rec_every == 0 or n == n_steps
                if record:
                    N_ns = ns.nonlinear(U)
                    N_pe = pe.nonlinear(V)
                    rhs_ns = ns.rhs(U, N_ns)
                    rhs_pe = pe.rhs(V, N_pe)
                    diff = np.stack(
                        (U[0] - V[0], U[1] - V[1],
                         U[2] - eps * _raw_w_from_v(grid, V))
                    )
                    ddiff = np.stack(
                        (rhs_ns[0] - rhs_pe[0], rhs_ns[1] - rhs_pe[1],
                         rhs_ns[2] - eps * _raw_w_from_v(grid, rhs_pe))
                    )
                    df = _fields(grid, diff, (EVEN, EVEN, ODD))
                    ddf = _fields(grid, ddiff, (EVEN, EVEN, ODD))
                    inc = None if t_prev is None else t - t_prev
                    for key in accs:
                        accs[key] = accumulate(accs[key], df, ddf, inc)
                    t_prev = t
                if n == n_steps:
                    break
                if record:
                    U = ns.advance(U, N_ns)
                    V = pe.advance(V, N_pe)
                else:
                    U = ns.step(U)
                    V = pe.step(V)
                _check_blowup(grid, U, t + dt)
                _check_blowup(grid, V, t + dt)
        except BlowupDetected:
            blowup = True
        wall = int(1000 * (_time.perf_counter() - t0))
        return _finalize_rows(
            mode, eps, delta, gamma,
            [("EHdelta", accs["EHdelta"]), ("Ez", accs["Ez"]),
             ("EH", accs["EH"])],
            blowup, wall,
        )

    if mode == "delta_to_infty":
        segments = _stiff_segments(base.t_end, dt, delta)

        U = np.stack((data.v1.coeffs, data.v2.coeffs, eps * data.w.coeffs))
        B = U[:2].copy()
        B[..., 1:] = 0.0  # barotropic plane only
        S = np.stack(
            (U[0] - B[0], U[1] - B[1], data.w.coeffs)
        )  # baroclinic (vtilde, w), exact Stokes comparison flow

        accs = {
            "E1_bar_diff": NormAccumulator("EHdelta", delta=1.0),
            "L4H32_tilde": NormAccumulator("L4H32"),
            "L4H32_tilde_stokes": NormAccumulator("L4H32"),
        }
        blowup = False
        t_prev = None
        t = 0.0

        def sample(inc, N_ns, N_2d):
            rhs_ns = ns.rhs(U, N_ns)
            rhs_2d = ns2d.rhs(B, N_2d)
            bar_diff = U[:2].copy()
            bar_diff[..., 1:] = 0.0
            bar_diff -= B
            dbar_diff = rhs_ns[:2].copy()
            dbar_diff[..., 1:] = 0.0
            dbar_diff -= rhs_2d
            tilde = U.copy()
            tilde[0, :, :, 0] = 0.0
            tilde[1, :, :, 0] = 0.0
            tilde[2] = _raw_w_from_v(grid, U[:2])  # physical w
            accs["E1_bar_diff"] = accumulate(
                accs["E1_bar_diff"],
                _fields(grid, bar_diff, (EVEN, EVEN)),
                _fields(grid, dbar_diff, (EVEN, EVEN)),
                inc,
            )
            accs["L4H32_tilde"] = accumulate(
                accs["L4H32_tilde"], _fields(grid, tilde, (EVEN, EVEN, ODD)),
                None, inc,
            )
            accs["L4H32_tilde_stokes"] = accumulate(
                accs["L4H32_tilde_stokes"], _fields(grid, S, (EVEN, EVEN, ODD)),
                None, inc,
            )

        try:
            for seg_dt, seg_steps in segments:
                ns = NavierStokesStepper(grid, eps, delta, seg_dt)
                ns2d = NavierStokes2DStepper(grid, seg_dt)
                stokes = StokesScaledStepper(grid, delta, seg_dt)
                for _ in range(seg_steps):
                    N_ns = ns.nonlinear(U)
                    N_2d = ns2d.nonlinear(B)
                    sample(None if t_prev is None else t - t_prev, N_ns, N_2d)
                    t_prev = t
                    U = ns.advance(U, N_ns)
                    B = ns2d.advance(B, N_2d)
                    S = stokes.advance(S)
                    t += seg_dt
                    _check_blowup(grid, U, t)
            sample(t - t_prev, ns.nonlinear(U), ns2d.nonlinear(B))
        except BlowupDetected:
            blowup = True
        wall = int(1000 * (_time.perf_counter() - t0))
        extra = []
        try:
            extra.append(NormRow(
                mode, eps, delta, gamma, "L4H32_tilde_stokes",
                finalize(accs["L4H32_tilde_stokes"]), blowup, wall))
        except Exception:
            pass
        return _finalize_rows(
            mode, eps, delta, gamma,
            [("E1_bar_diff", accs["E1_bar_diff"]),
             ("L4H32_tilde", accs["L4H32_tilde"])],
            blowup, wall, extra,
        )

    raise ValueError(f"unknown mode {mode!r}")


def _stiff_segments(T: float, dt: float, delta: float) -> list[tuple[float, int]]:
    """Step schedule resolving the fastest baroclinic decay rate.

    The slowest vertically mean-free mode decays at rate delta pi^2, so the
    fourth-power time integrand varies at 4 delta pi^2; the trapezoid rule
    needs steps below ~0.5 of that scale to see the decay at all.  A short
    fine phase until the baroclinic energy is gone (14 e-foldings), then the
    requested dt.
    """
    rate = 4.0 * delta * math.pi**2
    dt_fine = 0.5 / rate if rate > 0 else dt
    n_total = int(round(T / dt))
    if dt_fine >= dt or n_total < 1:
        return [(dt, n_total)]
    m = min(n_total, max(1, math.ceil(14.0 / rate / dt)))
    t1 = m * dt
    n1 = math.ceil(t1 / dt_fine)
    return [(t1 / n1, n1), (dt, n_total - m)]
