"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Cone warping functions: f(t0) = 0, f'(t0+) = delta, f = cosh beyond b.

On [t0, b] the warp is built from its derivative profile

    g'(t) = delta + (sinh b - delta) sigma((t - t0) / l),   l = b - t0

with sigma(u) = u + a u (1 - u)(2u - 1). Every member of this family integrates
to 1/2 over [0, 1], so g(b) = cosh b pins l = 2 cosh b / (delta + sinh b) in
closed form, and g'' >= mu > 0 is read off sigma' directly.
"""

from enum import Enum
import logging
import math
import numpy as np

from warpcone.errors import PreconditionError
from warpcone.registry import descriptor, report, warping, warping_class, warping_kind
from warpcone.types import (SchemaTagged, ReportBase, FloatField, FloatListField, IntField,
                            BoolField, EnumField, TextField, MappingField)


class Profile(Enum):
    linear_derivative = 0
    smooth = 1


_profile_names = {
    'linear-derivative': Profile.linear_derivative,
    'smooth': Profile.smooth,
}

# range of the smooth profile parameter keeping min sigma' >= 1/4
_alpha_range = (-1.5, 0.75)

# upper end of the certificate grids above b
_tail_length = 5.0


def delta_from_c(c: float) -> float:
    if not c > 0:
        raise PreconditionError('nonpositive-c', f'c = {c}')
    return math.pi / c


class WarpingFunction:
    ''' Common base class for warping functions f on [t0, inf) with f(t0) = 0 '''

    b = None
    kink = None

    @property
    def kind(self) -> str:
        return warping_kind(type(self))

    # evaluators relative to the apex, tau = t - t0

    def f_tau(self, tau):
        raise NotImplementedError

    def df_tau(self, tau):
        raise NotImplementedError

    def ddf_tau(self, tau):
        raise NotImplementedError

    def f_increment(self, tau, dtau):
        ''' f_tau(tau + dtau) - f_tau(tau) without cancellation '''
        tau = np.asarray(tau, dtype=float)
        return self.f_tau(tau + dtau) - self.f_tau(tau)

    # evaluators in base coordinates

    def f(self, t):
        return self.f_tau(np.asarray(t, dtype=float) - self.t0)

    def df(self, t):
        return self.df_tau(np.asarray(t, dtype=float) - self.t0)

    def ddf(self, t):
        return self.ddf_tau(np.asarray(t, dtype=float) - self.t0)

    def ddf_one_sided(self, t):
        ''' (left, right) second derivative at t '''
        v = float(self.ddf(t))
        return v, v

    def grid_end(self) -> float:
        return (self.b if self.b is not None else self.t0) + _tail_length

    def descriptor(self):
        return WarpingDescriptor(self.to_dict())

    def __repr__(self):
        return f'{self.__class__.__name__}({self.to_dict()})'


@warping('linear')
class LinearWarp(WarpingFunction):
    ''' Flat test warp f(t) = delta (t - t0), curvature bound 0 '''

    def __init__(self, t0: float = 0.0, delta: float = 1.0):
        if not delta > 0:
            raise PreconditionError('out-of-range', f'apex slope {delta} must be positive')
        self.t0 = float(t0)
        self.delta = float(delta)
        self.K = 0.0
        self.mu = 0.0

    def f_tau(self, tau):
        return self.delta * np.asarray(tau, dtype=float)

    def df_tau(self, tau):
        return np.full_like(np.asarray(tau, dtype=float), self.delta)

    def ddf_tau(self, tau):
        return np.zeros_like(np.asarray(tau, dtype=float))

    def f_increment(self, tau, dtau):
        return self.delta * (np.asarray(dtau, dtype=float) + 0 * np.asarray(tau, dtype=float))

    def to_dict(self):
        return {'kind': self.kind, 't0': self.t0, 'delta': self.delta, 'K': self.K, 'knots': [self.t0]}

    @classmethod
    def from_descriptor(cls, d):
        return cls(d['t0'] if d['t0'] is not None else 0.0, d['delta'])


@warping('cone')
class ConeWarpingFunction(WarpingFunction):
    ''' Cone warping function with parameters (b, delta, K) '''

    def __init__(self, b: float, delta: float, profile: Profile = Profile.linear_derivative):
        if not b > 0:
            raise PreconditionError('nonpositive-b', f'b = {b}')
        if not delta > 0:
            raise PreconditionError('out-of-range', f'apex slope {delta} must be positive')
        if delta >= math.sinh(b):
            raise PreconditionError('slope-too-large', f'delta = {delta} >= sinh(b) = {math.sinh(b)}')
        self.b = float(b)
        self.delta = float(delta)
        self.profile = profile
        self._rise = math.sinh(b) - delta
        self.ell = 2 * math.cosh(b) / (delta + math.sinh(b))
        self.t0 = self.b - self.ell
        self.kink = self.ell
        if profile is Profile.smooth:
            alpha = 1 - self.ell * math.cosh(b) / self._rise
            self.alpha = min(_alpha_range[1], max(_alpha_range[0], alpha))
        else:
            self.alpha = 0.0
        min_dsigma = 1 - self.alpha if self.alpha >= 0 else 1 + self.alpha / 2
        self.mu = self._rise * min_dsigma / self.ell
        self.K = max(-1.0, -self.mu / math.cosh(b))
        logging.debug(f'{self.__class__.__name__}: b={b} delta={delta} t0={self.t0} mu={self.mu} K={self.K}')

    # profile sigma and its antiderivative on [0, 1]

    def _sigma(self, u):
        return u + self.alpha * (-2 * u**3 + 3 * u**2 - u)

    def _dsigma(self, u):
        return 1 + self.alpha * (-6 * u**2 + 6 * u - 1)

    def _int_sigma(self, u):
        return u**2 / 2 + self.alpha * (-u**4 / 2 + u**3 - u**2 / 2)

    def f_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = np.clip(tau, 0, self.ell) / self.ell
        inner = self.delta * tau + self._rise * self.ell * self._int_sigma(u)
        return np.where(tau <= self.ell, inner, np.cosh(self.t0 + np.maximum(tau, self.ell)))

    def df_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = np.clip(tau, 0, self.ell) / self.ell
        inner = self.delta + self._rise * self._sigma(u)
        return np.where(tau <= self.ell, inner, np.sinh(self.t0 + np.maximum(tau, self.ell)))

    def ddf_tau(self, tau):
        tau = np.asarray(tau, dtype=float)
        u = np.clip(tau, 0, self.ell) / self.ell
        inner = self._rise * self._dsigma(u) / self.ell
        result = np.where(tau < self.ell, inner, np.cosh(self.t0 + np.maximum(tau, self.ell)))
        return np.where(tau == self.ell, np.nan, result)

    def ddf(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t == self.b, np.nan, super().ddf(t))

    def ddf_one_sided(self, t):
        if t != self.b:
            return super().ddf_one_sided(t)
        return self._rise * self._dsigma(1.0) / self.ell, math.cosh(self.b)

    def _inner_increment(self, u1, u2):
        ''' Sigma(u2) - Sigma(u1), factored '''
        du = u2 - u1
        s1 = u1 + u2
        quad = s1 / 2
        cubic = u1**2 + u1 * u2 + u2**2
        quart = s1 * (u1**2 + u2**2) / 2
        return du * (quad + self.alpha * (-quart + cubic - quad))

    def f_increment(self, tau, dtau):
        tau = np.asarray(tau, dtype=float)
        tau2 = tau + dtau
        # split at the kink: polynomial part below, cosh part above
        lo_a, lo_b = np.minimum(tau, self.ell), np.minimum(tau2, self.ell)
        hi_a, hi_b = np.maximum(tau, self.ell), np.maximum(tau2, self.ell)
        inner = self.delta * (lo_b - lo_a) + self._rise * self.ell * self._inner_increment(lo_a / self.ell, lo_b / self.ell)
        outer = 2 * np.sinh(self.t0 + (hi_a + hi_b) / 2) * np.sinh((hi_b - hi_a) / 2)
        return inner + outer

    def to_dict(self):
        return {
            'kind': self.kind,
            't0': self.t0,
            'b': self.b,
            'delta': self.delta,
            'mu': self.mu,
            'K': self.K,
            'profile': _profile_names_inv[self.profile],
            'alpha': self.alpha,
            'knots': [self.t0, self.b],
        }

    @classmethod
    def from_descriptor(cls, d):
        f = cls(d['b'], d['delta'], _profile_names[d['profile'] or 'linear-derivative'])
        for key in ('t0', 'K'):
            stored = d[key]
            if stored is not None and abs(stored - getattr(f, key)) > 1e-9 * max(1.0, abs(stored)):
                msg = f'stored {key} = {stored} does not match rebuilt {getattr(f, key)}'
                if not SchemaTagged.ignore_schema_errors:
                    raise PreconditionError('invalid-descriptor', msg)
                logging.warning(f'{cls.__name__}: {msg}')
        return f


_profile_names_inv = {v: k for k, v in _profile_names.items()}


def synthesize(b: float, delta: float, profile: str = 'linear-derivative') -> ConeWarpingFunction:
    ''' Cone warping function with parameters (b, delta, K), K certified from min f'' '''
    if profile not in _profile_names:
        raise PreconditionError('out-of-range', f'unknown profile "{profile}"')
    f = ConeWarpingFunction(b, delta, _profile_names[profile])
    logging.info(f'synthesized {profile} warp: t0={f.t0:.12g} mu={f.mu:.12g} K={f.K:.12g}')
    return f


def tangent_lines(f: ConeWarpingFunction):
    '''
    Supporting lines of the inner segment: l1 through the apex with slope delta,
    l0 tangent to cosh at b, and the abscissa where they meet (inside (t0, b)).
    '''
    sb, cb = math.sinh(f.b), math.cosh(f.b)
    return {
        'l1': {'slope': f.delta, 'intercept': -f.delta * f.t0},
        'l0': {'slope': sb, 'intercept': cb - f.b * sb},
        'intersection': (cb - f.b * sb + f.delta * f.t0) / (f.delta - sb),
    }


@descriptor
class WarpingDescriptor(SchemaTagged):
    ''' Warping function document (cone or linear test warp) '''

    _schema = [
        ('kind', TextField, None, {'required': True}),
        ('t0', FloatField, 'length'),
        ('b', FloatField, 'length', {'minimum': 0, 'exclusive': True}),
        ('delta', FloatField, None, {'minimum': 0, 'exclusive': True, 'required': True}),
        ('mu', FloatField),
        ('K', FloatField, None, {'maximum': 0}),
        ('profile', EnumField, None, {'constants': _profile_names}),
        ('alpha', FloatField),
        ('knots', FloatListField, 'length'),
    ]

    def build(self) -> WarpingFunction:
        cls = warping_class(self['kind'])
        if cls is ConeWarpingFunction and self['b'] is None:
            raise PreconditionError('invalid-descriptor', 'cone warping needs "b"')
        return cls.from_descriptor(self)


@report
class Certificate(ReportBase):
    ''' Grid certificate of an inequality (F_K-convexity) '''

    abs_slack = 1e-9

    _schema = [
        ('name', TextField),
        ('K', FloatField),
        ('passed', BoolField),
        ('worst', FloatField),
        ('resolution', IntField),
        ('refinements', IntField),
        ('slack', FloatField),
        ('detail', MappingField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def _refine(evaluate, n: int, max_doublings: int = 6):
    '''
    Evaluate a grid minimum at n, 2n, ... points until two successive
    resolutions agree on pass/fail. Returns (worst, resolution, refinements).
    '''
    slack = Certificate.abs_slack
    worst = evaluate(n)
    refinements = 0
    while refinements < max_doublings:
        n *= 2
        finer = evaluate(n)
        refinements += 1
        agree = (worst >= -slack) == (finer >= -slack)
        worst = finer
        if agree:
            break
    return worst, n, refinements


def check_fk_convex_ae(f: WarpingFunction, K: float, n: int = 10000, lo: float = None, hi: float = None) -> Certificate:
    ''' f'' + K f >= 0 on a grid of [t0, b+5], skipping the kink at b '''
    if n < 2:
        raise PreconditionError('resolution-too-low', f'grid of {n} points')
    if K > 0:
        raise PreconditionError('out-of-range', f'K = {K} must be <= 0')
    lo = f.t0 if lo is None else max(lo, f.t0)
    hi = f.grid_end() if hi is None else hi
    if not hi > lo:
        raise PreconditionError('degenerate-subinterval', f'[{lo}, {hi}]')

    def evaluate(m):
        t = np.linspace(lo, hi, m)
        if f.b is not None:
            t = t[np.abs(t - f.b) > 1e-12]
        values = f.ddf(t) + K * f.f(t)
        return float(np.min(values))

    worst, resolution, refinements = _refine(evaluate, n)
    passed = worst >= -Certificate.abs_slack
    logging.debug(f'check_fk_convex_ae: K={K} worst={worst} n={resolution} passed={passed}')
    return Certificate(
        name='fk_convex_ae', K=K, passed=passed, worst=worst, resolution=resolution,
        refinements=refinements, slack=Certificate.abs_slack,
        detail={'interval': [lo, hi], 'kink_excluded': f.b},
    )


def barrier(f: WarpingFunction, K: float, p: float, q: float):
    ''' Solution of g'' + K g = 0 with g(p) = f(p), g(q) = f(q) '''
    fp, fq = float(f.f(p)), float(f.f(q))
    if K == 0:
        return lambda t: fp + (fq - fp) * (np.asarray(t) - p) / (q - p)
    k = math.sqrt(-K)
    denom = math.sinh(k * (q - p))
    return lambda t: (fp * np.sinh(k * (q - np.asarray(t))) + fq * np.sinh(k * (np.asarray(t) - p))) / denom


def check_fk_convex_barrier(f: WarpingFunction, K: float, subintervals, n: int = 2001) -> Certificate:
    ''' f <= g on every subinterval, g the F_K barrier through the endpoint values '''
    if K > 0:
        raise PreconditionError('out-of-range', f'K = {K} must be <= 0')
    domain_hi = f.grid_end()
    for p, q in subintervals:
        if not q > p:
            raise PreconditionError('degenerate-subinterval', f'[{p}, {q}]')
        if p < f.t0 - 1e-12 or q > domain_hi + 1e-12:
            raise PreconditionError('out-of-range', f'[{p}, {q}] not inside [{f.t0}, {domain_hi}]')

    per_interval = {}

    def evaluate(m):
        worst = math.inf
        for p, q in subintervals:
            g = barrier(f, K, p, q)
            t = np.linspace(p, q, m)
            margin = float(np.min(g(t) - f.f(t)))
            per_interval[f'[{p:.17g}, {q:.17g}]'] = margin
            worst = min(worst, margin)
        return worst

    worst, resolution, refinements = _refine(evaluate, n)
    passed = worst >= -Certificate.abs_slack
    logging.debug(f'check_fk_convex_barrier: K={K} worst={worst} passed={passed}')
    return Certificate(
        name='fk_convex_barrier', K=K, passed=passed, worst=worst, resolution=resolution,
        refinements=refinements, slack=Certificate.abs_slack, detail={'intervals': per_interval},
    )
