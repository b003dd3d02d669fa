"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Tip-avoiding geodesics of I x_f F over a 1-dimensional fiber.

Along such a geodesic f(t)^2 dtheta/ds = c is conserved. With the apex-relative
level tau = t - t0 and an anchor tau* (turning point, or the virtual turning
point of a monotone geodesic), c = f(tau*) and the substitution

    tau = tau* cosh(w)^2

removes the inverse square-root singularity at the turning point:

    ds/dw     = f / sqrt(f^2 - c^2) * tau* sinh(2w)
    dtheta/dw = c / (f sqrt(f^2 - c^2)) * tau* sinh(2w)

are smooth at w = 0. Integrals are composite Gauss-Legendre in w, with a panel
edge at the kink of f.
"""

import logging
import math
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import brentq

from warpcone.errors import SolverError

_gl_nodes, _gl_weights = leggauss(12)
_panel_width = 0.25

# anchors range over tau_lo * exp(_log_floor) .. tau_lo
_log_floor = -32.0
_scan_intervals = 24
# below this w the integrands take their series limit (relative error ~ w^2)
_w_series = 1e-6


class ClairautArc:
    ''' Geodesic family member anchored at apex-relative level tau_star '''

    def __init__(self, warp, tau_star: float, panel_width: float = _panel_width):
        self.warp = warp
        self.tau_star = tau_star
        self.panel_width = panel_width
        self.c = float(warp.f_tau(tau_star))
        # w -> 0 limits of the integrands, from gap ~ f'(tau*) tau* w^2
        slope = float(warp.df_tau(tau_star))
        self._ds0 = math.sqrt(2 * tau_star * self.c / slope)
        self._dth0 = math.sqrt(2 * tau_star / (self.c * slope))
        kink = warp.kink
        self.w_kink = self.w_of(kink) if kink is not None and kink > tau_star else None
        self._table = None

    def w_of(self, tau):
        return np.arccosh(np.sqrt(np.maximum(np.asarray(tau, dtype=float) / self.tau_star, 1.0)))

    def tau_of(self, w):
        return self.tau_star * np.cosh(w) ** 2

    def integrands(self, w):
        ''' (ds/dw, dtheta/dw) at w >= 0 '''
        w = np.asarray(w, dtype=float)
        near = w < _w_series
        w = np.where(near, _w_series, w)
        sh2 = np.sinh(w) ** 2
        tau = self.tau_star * (1 + sh2)
        dtau = self.tau_star * np.sinh(2 * w)
        f = self.warp.f_tau(tau)
        gap = self.warp.f_increment(self.tau_star, self.tau_star * sh2)
        root = np.sqrt(gap * (f + self.c))
        ds = np.where(near, self._ds0, f * dtau / root)
        dth = np.where(near, self._dth0, self.c * dtau / (f * root))
        return ds, dth

    def edges(self, w_max: float, extra=()):
        pts = [np.arange(0.0, w_max, self.panel_width), [w_max], np.asarray(extra, dtype=float)]
        if self.w_kink is not None and self.w_kink < w_max:
            pts.append([self.w_kink])
        edges = np.unique(np.concatenate(pts))
        return edges[(edges >= 0) & (edges <= w_max)]

    def _panel_integrals(self, a, b):
        ''' Gauss-Legendre over the panels [a_i, b_i] '''
        a = np.asarray(a, dtype=float)[..., None]
        b = np.asarray(b, dtype=float)[..., None]
        half = (b - a) / 2
        nodes = a + half * (_gl_nodes + 1)
        ds, dth = self.integrands(nodes)
        scale = half[..., 0]
        return (ds @ _gl_weights) * scale, (dth @ _gl_weights) * scale

    def cumulative(self, targets):
        ''' S(w), Theta(w) integrated from the anchor (w = 0) to each target '''
        targets = np.atleast_1d(np.asarray(targets, dtype=float))
        w_max = float(np.max(targets)) if targets.size else 0.0
        if w_max <= 0:
            return np.zeros_like(targets), np.zeros_like(targets)
        edges = self.edges(w_max, targets)
        ds, dth = self._panel_integrals(edges[:-1], edges[1:])
        S = np.concatenate([[0.0], np.cumsum(ds)])
        T = np.concatenate([[0.0], np.cumsum(dth)])
        idx = np.searchsorted(edges, targets)
        return S[idx], T[idx]

    def table(self, w_max: float):
        if self._table is None or self._table[0][-1] < w_max:
            edges = self.edges(w_max)
            ds, dth = self._panel_integrals(edges[:-1], edges[1:])
            self._table = (edges, np.concatenate([[0.0], np.cumsum(ds)]), np.concatenate([[0.0], np.cumsum(dth)]))
        return self._table

    def invert(self, S_target, w_max: float):
        ''' w with S(w) = S_target, Newton inside the bracketing table panel '''
        edges, S, T = self.table(w_max)
        S_target = np.atleast_1d(np.asarray(S_target, dtype=float))
        k = np.clip(np.searchsorted(S, S_target, side='right') - 1, 0, len(edges) - 2)
        a, b = edges[k], edges[k + 1]
        span = S[k + 1] - S[k]
        w = a + np.where(span > 0, (S_target - S[k]) / np.where(span > 0, span, 1), 0) * (b - a)
        for _ in range(8):
            ds_part, _ = self._panel_integrals(a, np.maximum(w, a))
            slope, _ = self.integrands(w)
            resid = S[k] + ds_part - S_target
            w = np.clip(w - np.where(resid == 0, 0.0, resid / slope), a, b)
        _, dth_part = self._panel_integrals(a, w)
        return w, T[k] + dth_part


class TipAvoidingGeodesic:
    '''
    Solution of the boundary value problem for one fiber displacement D > 0.
    kind 'turning': x descends to the anchor, then rises to y.
    kind 'monotone': the level moves monotonically from x to y.
    '''

    def __init__(self, arc: ClairautArc, kind: str, tau_x: float, tau_y: float):
        self.arc = arc
        self.kind = kind
        self.tau_x = tau_x
        self.tau_y = tau_y
        self.w_x = float(arc.w_of(tau_x))
        self.w_y = float(arc.w_of(tau_y))
        (Sx, Sy), (Tx, Ty) = arc.cumulative([self.w_x, self.w_y])
        if kind == 'turning':
            self.legs = [(self.w_x, 0.0), (0.0, self.w_y)]
            self.length = float(Sx + Sy)
            self.dtheta = float(Tx + Ty)
        else:
            self.legs = [(self.w_x, self.w_y)]
            self.length = float(abs(Sy - Sx))
            self.dtheta = float(abs(Ty - Tx))

    @property
    def clairaut_constant(self) -> float:
        return self.arc.c

    def locate(self, s_values):
        ''' (tau, theta offset from x) at arc lengths s along the geodesic '''
        s_values = np.clip(np.asarray(s_values, dtype=float), 0, self.length)
        w_max = max(self.w_x, self.w_y)
        edges, S, T = self.arc.table(w_max)
        tau = np.empty_like(s_values)
        theta = np.empty_like(s_values)
        s_start, theta_start = 0.0, 0.0
        for i, (w_a, w_b) in enumerate(self.legs):
            (S_a, S_b), (T_a, T_b) = self.arc.cumulative([w_a, w_b])
            leg_len = abs(float(S_b - S_a))
            last = i == len(self.legs) - 1
            sel = s_values >= s_start
            if not last:
                sel &= s_values < s_start + leg_len
            if np.any(sel):
                direction = 1.0 if w_b >= w_a else -1.0
                target = S_a + direction * (s_values[sel] - s_start)
                w, T_w = self.arc.invert(target, w_max)
                tau[sel] = self.arc.tau_of(w)
                theta[sel] = theta_start + np.abs(T_w - T_a)
            s_start += leg_len
            theta_start += abs(float(T_b - T_a))
        return tau, theta


def _anchor(tau_lo: float, p: float):
    ''' anchor level and branch for the scan parameter p in [0, 2] '''
    if p <= 1:
        return tau_lo * math.exp(_log_floor * (1 - p)), 'monotone'
    return tau_lo * math.exp(_log_floor * (p - 1)), 'turning'


def _candidate(warp, tau_x, tau_y, p, panel_width):
    tau_lo = min(tau_x, tau_y)
    tau_star, kind = _anchor(tau_lo, p)
    return TipAvoidingGeodesic(ClairautArc(warp, tau_star, panel_width), kind, tau_x, tau_y)


def solve_tip_avoiding(warp, tau_x: float, tau_y: float, D: float, panel_width: float = _panel_width):
    '''
    Shortest tip-avoiding geodesic realizing fiber displacement D > 0 between
    levels tau_x, tau_y > 0, on w-panels of width at most panel_width.
    Returns None if no tip-avoiding geodesic exists (the displacement is beyond
    what the cone can bend around the tip).
    '''
    def mismatch(p):
        return _candidate(warp, tau_x, tau_y, p, panel_width).dtheta - D

    grid = np.linspace(0.0, 2.0, 2 * _scan_intervals + 1)
    values = [mismatch(p) for p in grid]
    logging.debug(f'solve_tip_avoiding: D={D} scan range [{values[0] + D}, {values[-1] + D}]')

    roots = []
    for i in range(len(grid) - 1):
        lo, hi = values[i], values[i + 1]
        if lo == 0:
            roots.append(grid[i])
        elif lo * hi < 0:
            try:
                roots.append(brentq(mismatch, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))
            except (ValueError, RuntimeError) as e:
                raise SolverError('no-convergence', f'bracket [{grid[i]}, {grid[i + 1]}] for D={D}: {e}')
    if values[-1] == 0:
        roots.append(grid[-1])

    if not roots:
        if D < values[0] + D:
            # displacement below the smallest anchor resolves: radial within round-off
            return _candidate(warp, tau_x, tau_y, 0.0, panel_width)
        return None

    best = min((_candidate(warp, tau_x, tau_y, p, panel_width) for p in roots), key=lambda g: g.length)
    if not math.isfinite(best.length):
        raise SolverError('no-convergence', f'non-finite length for D={D}')
    return best
