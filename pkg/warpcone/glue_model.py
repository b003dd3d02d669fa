"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

The glued space X: the manifold with its open b-collar removed, and one warped
cone C_f(N_i) attached along each boundary circle N_i, where level t of the
cone (b <= t < w) is identified with collar depth t.

X is homeomorphic to the cone-off of M through phi, which uses
xi: [b, w) -> [0, w) (affine on [b, b'], the identity beyond) on the collar and
alpha: [t0, b] -> [0, 1] on the cones. Points of the cone-off are written as
ConeOffPoint in one of two charts:

    collar: (depth, p), depth in [0, w)
    cone:   (p, zeta), zeta in [0, 1], zeta = 0 the cone point, zeta = 1 depth 0
"""

import logging
import math
import numpy as np

from warpcone.errors import PreconditionError, SolverError
from warpcone.filling_conditions import (ManifoldDescriptor, SubspaceDescriptor, check_condition_B,
                                         y_membership)
from warpcone.registry import descriptor, report
from warpcone.types import (SchemaTagged, ReportBase, FloatField, IntField, BoolField,
                            MappingField, NestedField)
from warpcone.warp_synth import delta_from_c, synthesize
from warpcone.warped_cone import ConeSpace, ConePoint, CollarModel, Fiber, geodesic

_seam_tol = 1e-9
_band_resolution = 1e-3
# resampling budget per requested pair
_max_tries = 50


class ConeOffPoint:
    ''' Point of the cone-off over boundary component `component`; depth 0 is stored as zeta 1 '''

    def __init__(self, region: str, component: int, p: float, zeta: float = None, depth: float = None):
        if region not in ('cone', 'collar'):
            raise PreconditionError('out-of-range', f'unknown region "{region}"')
        if region == 'collar' and depth == 0:
            region, zeta, depth = 'cone', 1.0, None
        if region == 'cone' and not (zeta is not None and 0 <= zeta <= 1):
            raise PreconditionError('out-of-range', f'cone coordinate zeta = {zeta} not in [0, 1]')
        if region == 'collar' and not (depth is not None and depth > 0):
            raise PreconditionError('out-of-range', f'collar depth {depth} must be positive')
        self.region = region
        self.component = component
        self.p = 0.0 if region == 'cone' and zeta == 0 else float(p)
        self.zeta = zeta
        self.depth = depth

    @property
    def is_cone_point(self) -> bool:
        return self.region == 'cone' and self.zeta == 0

    def __repr__(self):
        value = f'zeta={self.zeta}' if self.region == 'cone' else f'depth={self.depth}'
        return f'ConeOffPoint({self.region}, component={self.component}, p={self.p}, {value})'


class GluedSpace:
    ''' Manifold collar plus one warped cone per boundary component, with the maps into the cone-off '''

    def __init__(self, m: ManifoldDescriptor, b: float, c: float, b_prime: float, subspace=None, isotopy=None):
        self.m = m
        self.b = float(b)
        self.c = float(c)
        self.b_prime = float(b_prime)
        self.w = m['w']
        self.subspace = subspace
        self.isotopy = isotopy
        f = synthesize(self.b, delta_from_c(self.c))
        self.f = f
        self.cones = [ConeSpace(f, Fiber('circle', L), self.w) for L in m.lengths]

    @classmethod
    def build(cls, m: ManifoldDescriptor, b: float = None, c: float = None, subspace: SubspaceDescriptor = None,
              b_prime: float = None):
        '''
        Glued space for constants b, c (taken from subspace when not given).
        With a subspace, b' comes from it and the isotopy witness of B1 is attached.
        '''
        m.validate()
        if subspace is not None:
            subspace.validate()
            for key, value in (('b', b), ('b_prime', b_prime)):
                if value is not None and value != subspace[key]:
                    raise PreconditionError('invalid-descriptor', f'{key} = {value} differs from the subspace {subspace[key]}')
            b = subspace['b']
            b_prime = subspace['b_prime']
            c = subspace['c'] if c is None else c
        if b is None or c is None:
            raise PreconditionError('invalid-descriptor', 'glued space needs b and c')
        w = m['w']
        if b_prime is None:
            b_prime = (b + w) / 2
        if not 0 < b < b_prime < w:
            raise PreconditionError('out-of-range', f'need 0 < b < b\' < w, received b={b}, b\'={b_prime}, w={w}')
        if not c > 0:
            raise PreconditionError('nonpositive-c', f'c = {c}')
        if c > m.injrad:
            raise PreconditionError('out-of-range', f'c = {c} exceeds injrad = {m.injrad}')
        isotopy = None
        if subspace is not None:
            result = check_condition_B(m, subspace)
            isotopy = result.isotopy
            if isotopy is None:
                logging.warning('GluedSpace: B1 fails, no isotopy witness')
        logging.debug(f'GluedSpace: b={b} b\'={b_prime} c={c} w={w} components={len(m.lengths)}')
        return cls(m, b, c, b_prime, subspace, isotopy)

    @property
    def t0(self) -> float:
        return self.f.t0

    def cone(self, component: int) -> ConeSpace:
        if not 0 <= component < len(self.cones):
            raise PreconditionError('out-of-range', f'component {component} of {len(self.cones)}')
        return self.cones[component]

    # reparameterizations

    def xi(self, t: float) -> float:
        if not self.b <= t < self.w:
            raise PreconditionError('out-of-range', f'xi: t = {t} not in [{self.b}, {self.w})')
        if t >= self.b_prime:
            return t
        return self.b_prime * (t - self.b) / (self.b_prime - self.b)

    def xi_inverse(self, depth: float) -> float:
        if not 0 <= depth < self.w:
            raise PreconditionError('out-of-range', f'xi_inverse: depth = {depth} not in [0, {self.w})')
        if depth >= self.b_prime:
            return depth
        return self.b + depth * (self.b_prime - self.b) / self.b_prime

    def alpha(self, t: float) -> float:
        if not self.t0 <= t <= self.b:
            raise PreconditionError('out-of-range', f'alpha: t = {t} not in [{self.t0}, {self.b}]')
        return (t - self.t0) / (self.b - self.t0)

    def alpha_inverse(self, zeta: float) -> float:
        if not 0 <= zeta <= 1:
            raise PreconditionError('out-of-range', f'alpha_inverse: zeta = {zeta} not in [0, 1]')
        return self.t0 + zeta * (self.b - self.t0)

    def descriptor(self):
        return GluedDescriptor({
            'manifold': self.m,
            'b': self.b,
            'c': self.c,
            'b_prime': self.b_prime,
            'subspace': self.subspace,
        })

    def __repr__(self):
        return f'GluedSpace(b={self.b}, b\'={self.b_prime}, c={self.c}, w={self.w}, components={len(self.cones)})'


def phi(g: GluedSpace, component: int, y) -> ConeOffPoint:
    ''' cone coordinates (t, theta) in C_f(N_component) to the cone-off '''
    cone = g.cone(component)
    y = cone.validate(ConePoint(*y))
    if y.t <= g.b:
        return ConeOffPoint('cone', component, cone.fiber.reduce(y.theta), zeta=g.alpha(max(y.t, g.t0)))
    return ConeOffPoint('collar', component, cone.fiber.reduce(y.theta), depth=g.xi(y.t))


def phi_inverse(g: GluedSpace, point: ConeOffPoint) -> ConePoint:
    cone = g.cone(point.component)
    if point.region == 'cone':
        return cone.point(g.alpha_inverse(point.zeta), point.p)
    return cone.point(g.xi_inverse(point.depth), point.p)


def _require_isotopy(g: GluedSpace):
    if g.isotopy is None:
        raise PreconditionError('isotopy-undefined', 'no isotopy witness (no subspace, or B1 fails)')
    return g.isotopy


def psi_collar(g: GluedSpace, s: float, component: int, depth: float, p: float) -> float:
    ''' fiber coordinate Phi_{s depth} o Phi_{s xi^-1(depth)}^-1 (p) of the middle region formula '''
    iso = _require_isotopy(g)
    inner = iso.phi_inverse(component, s * g.xi_inverse(depth), p)
    return float(iso.phi(component, s * depth, inner))


def psi_cone(g: GluedSpace, s: float, component: int, p: float) -> float:
    ''' fiber coordinate Phi_{sb}^-1 (p) of the cone region formula '''
    iso = _require_isotopy(g)
    return float(iso.phi_inverse(component, s * g.b, p))


def psi(g: GluedSpace, s: float, point: ConeOffPoint) -> ConeOffPoint:
    '''
    The isotopy Psi_s of the cone-off: the identity beyond depth b', the middle
    region formula on collar depths below b', and Phi_{sb}^-1 on the fiber
    coordinate of the cones.
    '''
    if not 0 <= s <= 1:
        raise PreconditionError('out-of-range', f's = {s} not in [0, 1]')
    _require_isotopy(g)
    L = g.cone(point.component).fiber.L
    if point.is_cone_point:
        return point
    if point.region == 'cone':
        return ConeOffPoint('cone', point.component, psi_cone(g, s, point.component, point.p) % L, zeta=point.zeta)
    if point.depth >= g.b_prime:
        return point
    p = psi_collar(g, s, point.component, point.depth, point.p) % L
    return ConeOffPoint('collar', point.component, p, depth=point.depth)


def _coneoff_level(g: GluedSpace, subspace: SubspaceDescriptor, component: int, depth: float):
    L = g.cone(component).fiber.L
    depth = min(depth, subspace['b_prime'])
    if g.isotopy is not None:
        return g.isotopy.level(component, depth)
    return subspace.nearest_level(depth, component, L)


def coneoff_membership(g: GluedSpace, point: ConeOffPoint, subspace: SubspaceDescriptor = None,
                       tol: float = 0.0) -> bool:
    '''
    Membership in the cone-off of S: the cone over P_0 in the cone charts,
    P_depth in the collar (levels beyond b' continue as P_b').
    '''
    subspace = g.subspace if subspace is None else subspace
    if subspace is None:
        raise PreconditionError('invalid-descriptor', 'cone-off membership needs a subspace')
    depth = 0.0 if point.region == 'cone' else point.depth
    level = _coneoff_level(g, subspace, point.component, depth)
    if point.is_cone_point:
        return not level.empty
    return bool(level.contains(point.p, tol))


def _gap(g: GluedSpace, u: ConeOffPoint, v: ConeOffPoint) -> float:
    if u.component != v.component or u.region != v.region:
        return math.inf
    if u.is_cone_point and v.is_cone_point:
        return 0.0
    fiber = g.cone(u.component).fiber
    coord = abs(u.zeta - v.zeta) if u.region == 'cone' else abs(u.depth - v.depth)
    return max(coord, fiber.distance(u.p, v.p))


@report
class SeamClaimsReport(ReportBase):
    ''' Sampled seam claims of the isotopy Psi and injectivity of phi '''

    _schema = [
        ('samples', IntField),
        ('seed', IntField),
        ('psi0_max_error', FloatField),
        ('seam_b_prime_max_error', FloatField),
        ('seam_zero_max_error', FloatField),
        ('claim_mismatches', MappingField),
        ('phi_collisions', IntField),
        ('phi_seam_max_error', FloatField),
        ('passed', BoolField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def _region_of(g: GluedSpace, t: float) -> str:
    if t <= g.b:
        return 'Q3'
    return 'Q2' if t < g.b_prime else 'Q1'


def seam_claims_check(g: GluedSpace, n_samples: int = 200, seed: int = 0) -> SeamClaimsReport:
    '''
    Sample the cones of X and check:
    Psi_0 is the identity; Psi_s fixes depth b' and matches the cone formula at
    depth 0; a point of X lies in Y iff Psi_1(phi(point)) lies in the cone-off
    of S, per region; phi separates distinct samples and agrees with itself at t = b.
    '''
    _require_isotopy(g)
    if g.subspace is None:
        raise PreconditionError('invalid-descriptor', 'seam claims need a subspace')
    if n_samples < 1:
        raise PreconditionError('out-of-range', f'n_samples = {n_samples}')
    rng = np.random.default_rng(seed)
    components = rng.integers(0, len(g.cones), n_samples)
    u_t = rng.uniform(0, 1, n_samples)
    u_theta = rng.uniform(0, 1, n_samples)
    u_s = rng.uniform(0, 1, n_samples)

    psi0 = seam_bp = seam_zero = 0.0
    mismatches = {'Q1': 0, 'Q2': 0, 'Q3': 0}
    images = []
    for k in range(n_samples):
        comp = int(components[k])
        cone = g.cones[comp]
        L = cone.fiber.L
        # every fifth sample sits on the seams t = b and t = b'
        if k % 5 == 0:
            t = g.b
        elif k % 5 == 1:
            t = g.b_prime
        else:
            t = g.t0 + u_t[k] * (g.w - g.t0)
        y = cone.point(t, u_theta[k] * L)
        x = phi(g, comp, y)
        images.append((y, x))

        moved = psi(g, 0.0, x)
        psi0 = max(psi0, _gap(g, moved, x))

        p, s = y.theta, float(u_s[k])
        seam_bp = max(seam_bp, cone.fiber.distance(psi_collar(g, s, comp, g.b_prime, p), p))
        seam_zero = max(seam_zero, cone.fiber.distance(psi_collar(g, s, comp, 0.0, p), psi_cone(g, s, comp, p)))

        target = psi(g, 1.0, x)
        in_y = (y_membership(y, g.subspace, cone, comp, g.isotopy, -_seam_tol),
                y_membership(y, g.subspace, cone, comp, g.isotopy, _seam_tol))
        in_s = (coneoff_membership(g, target, tol=-_seam_tol), coneoff_membership(g, target, tol=_seam_tol))
        if (in_y[0] and not in_s[1]) or (in_s[0] and not in_y[1]):
            mismatches[_region_of(g, y.t)] += 1
            logging.debug(f'seam_claims_check: {y} in Y {in_y}, image {target} in cone-off {in_s}')

    at_b = phi(g, 0, g.cones[0].point(g.b, 0.0))
    just_above = phi(g, 0, g.cones[0].point(g.b * (1 + 1e-12), 0.0))
    phi_seam = abs(at_b.zeta - 1.0) + (just_above.depth if just_above.region == 'collar' else 1 - just_above.zeta)

    collisions = 0
    for i in range(len(images)):
        for j in range(i + 1, len(images)):
            yi, xi_ = images[i]
            yj, xj = images[j]
            distinct = components[i] != components[j] or not g.cones[components[i]].same_point(yi, yj)
            if distinct and _gap(g, xi_, xj) <= 1e-15:
                collisions += 1

    passed = (max(psi0, seam_bp, seam_zero, phi_seam) <= _seam_tol
              and sum(mismatches.values()) == 0 and collisions == 0)
    logging.info(f'seam_claims_check: {n_samples} samples, mismatches {mismatches}, collisions {collisions}')
    return SeamClaimsReport(
        samples=n_samples, seed=seed, psi0_max_error=psi0, seam_b_prime_max_error=seam_bp,
        seam_zero_max_error=seam_zero, claim_mismatches=mismatches, phi_collisions=collisions,
        phi_seam_max_error=phi_seam, passed=passed,
    )


def collar_distance(g: GluedSpace, component: int, x: ConePoint, y: ConePoint) -> float:
    ''' distance of two band points in the cosh-warped collar model '''
    model = CollarModel(g.cone(component).fiber.L, g.w)
    return model.distance(x, y)


@report
class SeamIsometryReport(ReportBase):
    ''' Agreement of cone and collar distances on the band b <= t < w '''

    _schema = [
        ('component', IntField),
        ('pairs_requested', IntField),
        ('pairs_compared', IntField),
        ('pairs_rejected', IntField),
        ('max_relative_error', FloatField),
        ('tolerance', FloatField),
        ('passed', BoolField),
        ('seed', IntField),
        ('worst', MappingField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def seam_isometry_check(g: GluedSpace, component: int = 0, n_pairs: int = 100, seed: int = 0,
                        tolerance: float = 1e-4) -> SeamIsometryReport:
    '''
    Sample pairs in the band [b, w) of one cone whose geodesic stays in the band
    and compare cone distance with the collar model. Other pairs are resampled.
    '''
    cone = g.cone(component)
    if g.w - g.b < _band_resolution:
        raise PreconditionError('band-too-thin', f'w - b = {g.w - g.b} below {_band_resolution}')
    rng = np.random.default_rng(seed)
    L = cone.fiber.L
    spread = min(L / 2, 2 * (g.w - g.b))
    compared = rejected = 0
    max_rel = 0.0
    worst = {}
    top = g.w * (1 - 1e-12)
    while compared < n_pairs and compared + rejected < _max_tries * n_pairs:
        t1, t2 = rng.uniform(g.b, top, 2)
        th1 = rng.uniform(0, L)
        th2 = th1 + rng.uniform(-spread, spread)
        x, y = cone.point(t1, th1), cone.point(t2, th2)
        try:
            path = geodesic(cone, x, y, 2)
        except SolverError as e:
            logging.warning(f'seam_isometry_check: pair rejected: {e}')
            rejected += 1
            continue
        if not path.converged or path.lowest_level() < g.b:
            rejected += 1
            continue
        d_collar = collar_distance(g, component, x, y)
        rel = abs(path.length - d_collar) / d_collar if d_collar > 0 else abs(path.length)
        compared += 1
        if rel > max_rel or not worst:
            max_rel = max(max_rel, rel)
            worst = {'x': list(x), 'y': list(y), 'cone': path.length, 'collar': d_collar, 'relative_error': rel}
    if compared < n_pairs:
        logging.warning(f'seam_isometry_check: only {compared} of {n_pairs} pairs stayed in the band')
    passed = compared > 0 and max_rel < tolerance
    logging.info(f'seam_isometry_check: {compared} pairs, {rejected} rejected, max rel {max_rel:.3g}')
    return SeamIsometryReport(
        component=component, pairs_requested=n_pairs, pairs_compared=compared, pairs_rejected=rejected,
        max_relative_error=max_rel, tolerance=tolerance, passed=passed, seed=seed, worst=worst,
    )


@descriptor
class GluedDescriptor(SchemaTagged):
    ''' Glued space: manifold, constants b, c and b', optional subspace S '''

    _schema = [
        ('manifold', NestedField, ManifoldDescriptor, {'required': True}),
        ('b', FloatField, 'length', {'minimum': 0, 'exclusive': True}),
        ('c', FloatField, 'length', {'minimum': 0, 'exclusive': True}),
        ('b_prime', FloatField, 'length', {'minimum': 0, 'exclusive': True}),
        ('subspace', NestedField, SubspaceDescriptor),
    ]

    def validate(self):
        super().validate()
        self._field('manifold').record().validate()
        subspace = self._field('subspace').record()
        if subspace is not None:
            subspace.validate()
        elif self['b'] is None or self['c'] is None:
            raise PreconditionError('invalid-descriptor', 'GluedDescriptor needs b and c, or a subspace')
        return self

    def build(self) -> GluedSpace:
        return GluedSpace.build(self._field('manifold').record(), self['b'], self['c'],
                                self._field('subspace').record(), self['b_prime'])
