"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Warped cones C_f(N) = [t0, t_max) x_f N over a circle or interval fiber N.

A geodesic between x and y is the shorter of two candidates: the path through
the tip, of length (t(x) - t0) + (t(y) - t0), and the tip-avoiding geodesic of
the Clairaut integral (see warpcone.clairaut). For circle fibers both ways
around the fiber are tried.
"""

import io
import logging
import math
import numpy as np

from warpcone.clairaut import solve_tip_avoiding
from warpcone.errors import PreconditionError, SolverError
from warpcone.mesh_oracle import distance_oracle
from warpcone.model_geometry import model_angle
from warpcone.registry import descriptor, report
from warpcone.types import (DescriptorBase, SchemaTagged, ReportBase, FloatField, FloatListField,
                            IntField, BoolField, EnumField, TextField, MappingField, NestedField)
from warpcone.warp_synth import WarpingDescriptor

# through-tip wins ties within this margin
_tie_margin = 1e-9
_default_samples = 129
_fallback_resolution = (200, 400)

_fiber_kinds = {
    'circle': 0,
    'interval': 1,
}


class Fiber:
    ''' Circle of circumference L or interval [0, L] '''

    def __init__(self, kind: str = 'circle', L: float = 2 * math.pi):
        if kind not in _fiber_kinds:
            raise PreconditionError('out-of-range', f'unknown fiber kind "{kind}"')
        if not L > 0 or math.isinf(L):
            raise PreconditionError('out-of-range', f'fiber length {L} must be positive and finite')
        self.kind = kind
        self.L = float(L)

    @property
    def injrad(self) -> float:
        return self.L / 2 if self.kind == 'circle' else math.inf

    @property
    def kappa(self) -> float:
        ''' curvature bound (pi / injrad)^2 of the fiber '''
        return (math.pi / self.injrad) ** 2

    def contains(self, theta: float) -> bool:
        if not math.isfinite(theta):
            return False
        return self.kind == 'circle' or 0 <= theta <= self.L

    def reduce(self, theta: float) -> float:
        if self.kind == 'circle':
            return theta % self.L
        if not self.contains(theta):
            raise PreconditionError('out-of-range', f'fiber coordinate {theta} not in [0, {self.L}]')
        return theta

    def distance(self, p: float, q: float) -> float:
        if self.kind == 'circle':
            d = abs(q - p) % self.L
            return min(d, self.L - d)
        return abs(q - p)

    def displacements(self, p: float, q: float):
        ''' signed fiber displacements from p to q a geodesic may realize, shortest first '''
        if self.kind == 'interval':
            return [q - p]
        forward = (q - p) % self.L
        backward = forward - self.L
        return sorted([forward, backward], key=lambda d: (abs(d), d < 0))

    def descriptor(self):
        return FiberDescriptor({'kind': self.kind, 'L': self.L})

    def __repr__(self):
        return f'Fiber(kind={self.kind!r}, L={self.L})'


class ConePoint:
    ''' Point (t, theta) of a warped cone; theta is irrelevant at the tip '''

    def __init__(self, t: float, theta: float = 0.0):
        self.t = float(t)
        self.theta = float(theta)

    def __iter__(self):
        return iter((self.t, self.theta))

    def __eq__(self, other):
        return isinstance(other, ConePoint) and (self.t, self.theta) == (other.t, other.theta)

    def __hash__(self):
        return hash((self.t, self.theta))

    def __repr__(self):
        return f'ConePoint(t={self.t}, theta={self.theta})'


class ConeSpace:
    ''' Warped product [t0, t_max) x_f fiber, immutable '''

    def __init__(self, f, fiber: Fiber, t_max: float):
        lower = f.b if f.b is not None else f.t0
        if not t_max > lower:
            raise PreconditionError('out-of-range', f't_max = {t_max} must exceed {lower}')
        self.f = f
        self.fiber = fiber
        self.t_max = float(t_max)
        self.tip = ConePoint(f.t0, 0.0)

    @property
    def t0(self) -> float:
        return self.f.t0

    @property
    def b(self):
        return self.f.b

    @property
    def delta(self) -> float:
        return self.f.delta

    def tau(self, p: ConePoint) -> float:
        return max(0.0, p.t - self.t0)

    def contains(self, p: ConePoint) -> bool:
        return (math.isfinite(p.t) and self.t0 - 1e-12 <= p.t < self.t_max
                and self.fiber.contains(p.theta))

    def validate(self, p: ConePoint):
        if not self.contains(p):
            raise PreconditionError('out-of-range', f'{p} outside [{self.t0}, {self.t_max}) x {self.fiber}')
        return p

    def point(self, t: float, theta: float = 0.0) -> ConePoint:
        p = self.validate(ConePoint(t, theta))
        if p.t <= self.t0:
            return self.tip
        return ConePoint(p.t, self.fiber.reduce(p.theta))

    def is_tip(self, p: ConePoint) -> bool:
        return self.tau(p) == 0

    def same_point(self, x: ConePoint, y: ConePoint) -> bool:
        if self.is_tip(x) and self.is_tip(y):
            return True
        return x.t == y.t and self.fiber.distance(x.theta, y.theta) == 0

    def descriptor(self):
        return ConeDescriptor({
            'warping': self.f.descriptor(),
            'fiber': self.fiber.descriptor(),
            't_max': self.t_max,
        })

    def __repr__(self):
        return f'ConeSpace(t0={self.t0}, b={self.b}, delta={self.delta}, {self.fiber}, t_max={self.t_max})'


def path_length(cone: ConeSpace, samples) -> float:
    ''' sum of sqrt(dt^2 + f(t_mid)^2 dtheta^2) over consecutive samples '''
    if len(samples) < 2:
        raise PreconditionError('out-of-range', f'need at least 2 samples, received {len(samples)}')
    for p in samples:
        cone.validate(p)
    tau = np.array([cone.tau(p) for p in samples])
    theta = np.array([p.theta for p in samples])
    mid = (tau[1:] + tau[:-1]) / 2
    return float(np.sum(np.sqrt(np.diff(tau) ** 2 + (cone.f.f_tau(mid) * np.diff(theta)) ** 2)))


class GeodesicPath:
    '''
    Shortest path between two cone points.

    kind is one of 'trivial', 'radial', 'through-tip', 'tip-avoiding' or
    'oracle' (mesh fallback, converged is False). theta is unwrapped along
    the path; s is arc length.
    '''

    def __init__(self, cone, x, y, kind, length, through_tip=False, displacement=0.0,
                 solution=None, polyline=None, candidates=None, converged=True):
        self.cone = cone
        self.x = x
        self.y = y
        self.kind = kind
        self.length = float(length)
        self.through_tip = through_tip
        self.displacement = displacement
        self.solution = solution
        self.polyline = polyline
        self.candidates = candidates or {}
        self.converged = converged
        self.t = None
        self.theta = None
        self.s = None
        self.tip_index = None

    @property
    def clairaut_constant(self):
        if self.kind == 'tip-avoiding':
            return math.copysign(self.solution.clairaut_constant, self.displacement)
        elif self.kind == 'oracle':
            return None
        return 0.0

    def _locate(self, s):
        ''' exact (t, unwrapped theta) at arc lengths s '''
        s = np.clip(np.atleast_1d(np.asarray(s, dtype=float)), 0, self.length)
        cone, x, y = self.cone, self.x, self.y
        tau_x, tau_y = cone.tau(x), cone.tau(y)
        if self.kind == 'trivial':
            return np.full(s.shape, x.t), np.full(s.shape, x.theta)
        elif self.kind == 'radial' and not self.through_tip:
            frac = s / self.length
            return x.t + (y.t - x.t) * frac, np.full(s.shape, x.theta)
        elif self.kind in ('radial', 'through-tip'):
            theta_start = y.theta if cone.is_tip(x) else x.theta
            theta_end = theta_start + self.displacement
            tau = np.abs(tau_x - s)
            theta = np.where(s <= tau_x, theta_start, theta_end)
            return cone.t0 + tau, theta
        elif self.kind == 'tip-avoiding':
            tau, offset = self.solution.locate(s)
            return cone.t0 + tau, x.theta + math.copysign(1.0, self.displacement) * offset
        p = self.polyline
        return np.interp(s, p['s'], p['t']), np.interp(s, p['s'], p['theta'])

    def lowest_level(self) -> float:
        ''' smallest t reached along the path '''
        if self.through_tip:
            return self.cone.t0
        elif self.kind == 'tip-avoiding' and self.solution.kind == 'turning':
            return self.cone.t0 + self.solution.arc.tau_star
        elif self.kind == 'oracle':
            return float(np.min(self.polyline['t']))
        return min(self.x.t, self.y.t)

    def sample(self, n: int = _default_samples):
        ''' fill t, theta and s with n samples evenly spaced in arc length '''
        if self.kind == 'oracle':
            self.t, self.theta, self.s = (np.asarray(self.polyline[k]) for k in ('t', 'theta', 's'))
        else:
            s = np.linspace(0.0, self.length, max(2, n))
            if self.through_tip:
                s = np.union1d(s, [self.cone.tau(self.x)])
            self.s = s
            self.t, self.theta = self._locate(s)
        if self.through_tip:
            self.tip_index = int(np.argmin(self.t))
        return self

    def point_at(self, fraction: float) -> ConePoint:
        ''' geodesic point at the given fraction of arc length '''
        if not 0 <= fraction <= 1:
            raise PreconditionError('out-of-range', f'fraction {fraction} not in [0, 1]')
        t, theta = self._locate(fraction * self.length)
        return self.cone.point(float(t[0]), float(theta[0]))

    @property
    def samples(self):
        if self.t is None:
            self.sample()
        return [ConePoint(t, th) for t, th in zip(self.t, self.theta)]

    def to_csv(self) -> str:
        if self.t is None:
            self.sample()
        out = io.StringIO()
        out.write('t,theta,s\n')
        for row in zip(self.t, self.theta, self.s):
            out.write(','.join(format(float(v), '.17g') for v in row) + '\n')
        return out.getvalue()

    def report(self):
        return GeodesicReport(
            x=list(self.x), y=list(self.y), kind=self.kind, length=self.length,
            through_tip=self.through_tip, clairaut_constant=self.clairaut_constant,
            converged=self.converged, samples=0 if self.t is None else len(self.t),
            candidates=self.candidates,
        )

    def __repr__(self):
        return f'GeodesicPath(kind={self.kind!r}, length={self.length}, through_tip={self.through_tip})'


def _plan(cone: ConeSpace, x: ConePoint, y: ConePoint, panel_width: float = None) -> GeodesicPath:
    cone.validate(x)
    cone.validate(y)
    tau_x, tau_y = cone.tau(x), cone.tau(y)

    if cone.same_point(x, y):
        return GeodesicPath(cone, x, y, 'trivial', 0.0)
    if tau_x == 0 or tau_y == 0:
        return GeodesicPath(cone, x, y, 'radial', tau_x + tau_y, through_tip=True)

    displacements = cone.fiber.displacements(x.theta, y.theta)
    shortest = displacements[0]
    if shortest == 0:
        return GeodesicPath(cone, x, y, 'radial', abs(tau_x - tau_y))

    through = tau_x + tau_y
    candidates = {'through_tip': through, 'tip_avoiding': []}
    through_path = GeodesicPath(cone, x, y, 'through-tip', through, through_tip=True,
                                displacement=shortest, candidates=candidates)
    if cone.delta * abs(shortest) >= math.pi:
        logging.debug(f'geodesic: delta * d_F = {cone.delta * abs(shortest)} >= pi, through the tip')
        return through_path

    best = None
    for D in displacements:
        if cone.delta * abs(D) >= math.pi:
            continue
        try:
            if panel_width is None:
                solution = solve_tip_avoiding(cone.f, tau_x, tau_y, abs(D))
            else:
                solution = solve_tip_avoiding(cone.f, tau_x, tau_y, abs(D), panel_width)
        except SolverError as e:
            logging.warning(f'geodesic: {e}; falling back to the mesh oracle')
            length, polyline = distance_oracle(cone, x, y, _fallback_resolution, return_path=True)
            touches_tip = bool(np.any(polyline['t'][1:-1] <= cone.t0))
            return GeodesicPath(cone, x, y, 'oracle', length, through_tip=touches_tip,
                                polyline=polyline, candidates=candidates, converged=False)
        if solution is None:
            continue
        logging.debug(f'geodesic: D={D} {solution.kind} length={solution.length} c={solution.clairaut_constant}')
        candidates['tip_avoiding'].append(solution.length)
        if best is None or solution.length < best[1].length:
            best = (D, solution)

    if best is not None and best[1].length < through - _tie_margin:
        D, solution = best
        return GeodesicPath(cone, x, y, 'tip-avoiding', solution.length, displacement=D,
                            solution=solution, candidates=candidates)
    return through_path


def geodesic(cone: ConeSpace, x: ConePoint, y: ConePoint, samples: int = _default_samples) -> GeodesicPath:
    ''' shortest path from x to y, sampled evenly in arc length '''
    return _plan(cone, x, y).sample(samples)


def distance(cone: ConeSpace, x: ConePoint, y: ConePoint, panel_width: float = None) -> float:
    ''' geodesic length; panel_width overrides the quadrature panel width of the solver '''
    return _plan(cone, x, y, panel_width).length


def through_tip_sufficient(cone: ConeSpace, x: ConePoint, y: ConePoint) -> bool:
    ''' delta * d_F(p(x), p(y)) >= pi '''
    if cone.is_tip(x) or cone.is_tip(y):
        raise PreconditionError('out-of-range', 'end points must differ from the tip')
    return cone.delta * cone.fiber.distance(x.theta, y.theta) >= math.pi


def tip_angle(cone: ConeSpace, p1: float, p2: float) -> float:
    ''' min(pi, d_N(p1, p2) / delta) '''
    return min(math.pi, cone.fiber.distance(p1, p2) / cone.delta)


def rescaled_tip_angle(cone: ConeSpace, p1: float, p2: float) -> float:
    ''' min(pi, delta d_N(p1, p2)), the angle of the tangent cone delta * N '''
    return min(math.pi, cone.delta * cone.fiber.distance(p1, p2))


def alexandrov_angle_estimate(cone: ConeSpace, p1: float, p2: float, r: float) -> float:
    ''' Euclidean comparison angle at the tip of the triangle with legs r toward p1, p2 '''
    if not 0 < r < cone.t_max - cone.t0:
        raise PreconditionError('out-of-range', f'radius {r} outside (0, {cone.t_max - cone.t0})')
    x = cone.point(cone.t0 + r, p1)
    y = cone.point(cone.t0 + r, p2)
    return model_angle(0.0, r, r, distance(cone, x, y))


@report
class LogInjectivityReport(ReportBase):
    ''' Distinctness of the logarithm map at the tip '''

    _schema = [
        ('samples', IntField),
        ('radius', FloatField),
        ('seed', IntField),
        ('collisions', IntField),
        ('min_separation', FloatField),
        ('passed', BoolField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def log_injectivity_check(cone: ConeSpace, m: int, seed: int = 0, radius: float = None,
                          points=None) -> LogInjectivityReport:
    '''
    Sample m points within radius of the tip and check that their logs
    (direction fiber point, distance to the tip) are pairwise distinct.
    '''
    if points is None:
        if m < 2:
            raise PreconditionError('out-of-range', f'need at least 2 samples, received {m}')
        top = (cone.b if cone.b is not None else cone.t_max) - cone.t0
        radius = top / 4 if radius is None else radius
        rng = np.random.default_rng(seed)
        tau = radius * rng.uniform(0.05, 1.0, m)
        theta = rng.uniform(0, cone.fiber.L, m)
        points = [cone.point(cone.t0 + a, b) for a, b in zip(tau, theta)]
    points = list(points)
    if len(points) < 2:
        raise PreconditionError('out-of-range', f'need at least 2 samples, received {len(points)}')

    logs = [(cone.fiber.reduce(p.theta), distance(cone, cone.tip, p)) for p in points]
    collisions = 0
    min_separation = math.inf
    for i in range(len(logs)):
        for j in range(i + 1, len(logs)):
            sep = max(cone.fiber.distance(logs[i][0], logs[j][0]), abs(logs[i][1] - logs[j][1]))
            min_separation = min(min_separation, sep)
            if sep <= 1e-12:
                collisions += 1
    logging.debug(f'log_injectivity_check: {len(logs)} logs, {collisions} collisions')
    return LogInjectivityReport(
        samples=len(logs), radius=radius, seed=seed, collisions=collisions,
        min_separation=min_separation, passed=collisions == 0,
    )


class CollarModel:
    '''
    Collar [0, depth) x_cosh S^1_L: the Fermi chart about a closed geodesic of
    length L in a hyperbolic surface. Distances from the law

        sinh^2(d/2) = sinh^2((t1 - t2)/2) + cosh t1 cosh t2 sinh^2(dx/2)

    with dx the fiber distance.
    '''

    def __init__(self, L: float, depth: float):
        if not L > 0:
            raise PreconditionError('out-of-range', f'boundary length {L} must be positive')
        if not depth > 0:
            raise PreconditionError('band-too-thin', f'collar depth {depth}')
        self.L = float(L)
        self.depth = float(depth)

    def contains(self, p) -> bool:
        return 0 <= p.t < self.depth

    def distance(self, p, q) -> float:
        for z in (p, q):
            if not self.contains(z):
                raise PreconditionError('out-of-range', f'{z} outside the collar [0, {self.depth})')
        dx = abs(q.theta - p.theta) % self.L
        dx = min(dx, self.L - dx)
        v = math.sinh((p.t - q.t) / 2) ** 2 + math.cosh(p.t) * math.cosh(q.t) * math.sinh(dx / 2) ** 2
        return 2 * math.asinh(math.sqrt(v))


@descriptor
class FiberDescriptor(DescriptorBase):
    ''' Fiber of a warped cone: circle of circumference L or interval [0, L] '''

    _emit_defaults = True

    _schema = [
        ('kind', EnumField, None, {'constants': _fiber_kinds, 'default': 'circle'}),
        ('L', FloatField, 'length', {'minimum': 0, 'exclusive': True, 'required': True}),
    ]

    def build(self) -> Fiber:
        return Fiber(self['kind'], self['L'])


@descriptor
class ConeDescriptor(SchemaTagged):
    ''' Warped cone: warping function, fiber and upper end t_max of the base '''

    _schema = [
        ('warping', NestedField, WarpingDescriptor, {'required': True}),
        ('fiber', NestedField, FiberDescriptor, {'required': True}),
        ('t_max', FloatField, 'length', {'required': True}),
    ]

    def validate(self):
        super().validate()
        self._field('warping').record().validate()
        self._field('fiber').record().validate()
        return self

    def build(self) -> ConeSpace:
        warp = self._field('warping').record().build()
        fiber = self._field('fiber').record().build()
        return ConeSpace(warp, fiber, self['t_max'])


@report
class GeodesicReport(ReportBase):
    ''' Summary of a computed geodesic '''

    _schema = [
        ('x', FloatListField),
        ('y', FloatListField),
        ('kind', TextField),
        ('length', FloatField),
        ('through_tip', BoolField),
        ('clairaut_constant', FloatField),
        ('converged', BoolField),
        ('samples', IntField),
        ('candidates', MappingField),
    ]


@report
class OracleReport(ReportBase):
    ''' Agreement between the geodesic solver and the mesh oracle '''

    _schema = [
        ('x', FloatListField),
        ('y', FloatListField),
        ('n_t', IntField),
        ('n_theta', IntField),
        ('oracle_length', FloatField),
        ('geodesic_length', FloatField),
        ('relative_error', FloatField),
        ('tolerance', FloatField),
        ('passed', BoolField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def oracle_agreement(cone: ConeSpace, x: ConePoint, y: ConePoint, resolution=(400, 800),
                     tolerance: float = 0.02) -> OracleReport:
    ''' relative gap between geodesic length and mesh distance '''
    oracle_length = distance_oracle(cone, x, y, resolution)
    geodesic_length = distance(cone, x, y)
    if geodesic_length > 0:
        rel = abs(oracle_length - geodesic_length) / geodesic_length
    else:
        rel = abs(oracle_length)
    logging.info(f'oracle_agreement: geodesic {geodesic_length:.12g} oracle {oracle_length:.12g} rel {rel:.3g}')
    return OracleReport(
        x=list(x), y=list(y), n_t=resolution[0], n_theta=resolution[1], oracle_length=oracle_length,
        geodesic_length=geodesic_length, relative_error=rel, tolerance=tolerance, passed=rel < tolerance,
    )
