"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Filling conditions on desk-scale surfaces with circle boundary.

A manifold is described by its boundary circle lengths L_i and the buffer
width w of the boundary. A subspace S is described by its levels P_t, the arc
families S cuts out on the boundary at collar depth t, on a grid covering
[0, b'].
"""

from concurrent.futures import ThreadPoolExecutor
import logging
import math
import numpy as np

from warpcone.arcs import ArcFamily, match_endpoints
from warpcone.cat_verify import env_threads
from warpcone.errors import PreconditionError, SolverError
from warpcone.registry import descriptor, report
from warpcone.types import (DescriptorBase, SchemaTagged, ReportBase, FloatField, FloatListField,
                            IntField, BoolField, MappingField, ArcSetField, NestedField, ArrayField)
from warpcone.warped_cone import ConeSpace, geodesic, distance

# membership tolerance along probed geodesics
_membership_tol = 1e-9
_probe_samples = 33
_rejection_tries = 20


class SurfaceData(DescriptorBase):
    ''' Genus g and boundary component count k of a surface '''

    _emit_defaults = True

    _schema = [
        ('genus', IntField, None, {'minimum': 0, 'required': True}),
        ('k', IntField, None, {'minimum': 1, 'required': True}),
    ]


@descriptor
class ManifoldDescriptor(SchemaTagged):
    ''' Surface with circle boundary components of lengths L_i and boundary buffer width w '''

    _schema = [
        ('dimension', IntField, None, {'minimum': 2, 'default': 2}),
        ('boundary_components', FloatListField, 'length', {'minimum': 0, 'exclusive': True, 'required': True}),
        ('w', FloatField, 'length', {'minimum': 0, 'exclusive': True, 'required': True}),
        ('surface', NestedField, SurfaceData),
    ]

    def validate(self):
        super().validate()
        if len(self['boundary_components']) == 0:
            raise PreconditionError('invalid-descriptor', 'no boundary components')
        surface = self._field('surface').record()
        if surface is not None:
            surface.validate()
            if surface['k'] != len(self['boundary_components']):
                raise PreconditionError('invalid-descriptor',
                                        f'k = {surface["k"]} but {len(self["boundary_components"])} boundary components')
        return self

    @property
    def lengths(self):
        return self['boundary_components']

    @property
    def injrad(self) -> float:
        return min(self.lengths) / 2


class LevelEntry(DescriptorBase):
    ''' Arc families P_t of one grid level, one list of [center, half_length] per component '''

    _emit_defaults = True

    _schema = [
        ('t', FloatField, 'length', {'minimum': 0, 'required': True}),
        ('arcs', ArcSetField, None, {'required': True}),
    ]


@descriptor
class SubspaceDescriptor(SchemaTagged):
    ''' Subspace S through its levels on a t-grid covering [0, b'], with the constants b, b', c '''

    _schema = [
        ('b', FloatField, 'length', {'minimum': 0, 'exclusive': True, 'required': True}),
        ('b_prime', FloatField, 'length', {'minimum': 0, 'exclusive': True, 'required': True}),
        ('c', FloatField, 'length', {'minimum': 0, 'exclusive': True, 'required': True}),
        ('lcr', FloatField, 'length', {'minimum': 0, 'exclusive': True}),
        ('levels', ArrayField, LevelEntry, {'required': True}),
    ]

    def validate(self):
        super().validate()
        if not self['b'] < self['b_prime']:
            raise PreconditionError('invalid-descriptor', f'need b < b\', received b={self["b"]}, b\'={self["b_prime"]}')
        grid = self.grid
        if len(grid) == 0:
            raise PreconditionError('invalid-descriptor', 'no levels')
        if np.any(np.diff(grid) <= 0):
            raise PreconditionError('invalid-descriptor', 'level grid is not increasing')
        if grid[0] != 0 or abs(grid[-1] - self['b_prime']) > 1e-12:
            raise PreconditionError('invalid-descriptor', f'level grid [{grid[0]}, {grid[-1]}] does not cover [0, b\']')
        counts = {len(rec['arcs']) for rec in self._field('levels').records()}
        if len(counts) != 1:
            raise PreconditionError('invalid-descriptor', 'levels disagree on the number of boundary components')
        for rec in self._field('levels').records():
            rec.validate()
        return self

    @property
    def grid(self):
        return np.array([rec['t'] for rec in self._field('levels').records()])

    @property
    def components(self) -> int:
        return len(self._field('levels').records()[0]['arcs'])

    def level(self, j: int, component: int, L: float) -> ArcFamily:
        return ArcFamily.from_pairs(L, self._field('levels').records()[j]['arcs'][component])

    def nearest_level(self, t: float, component: int, L: float) -> ArcFamily:
        j = int(np.argmin(np.abs(self.grid - t)))
        return self.level(j, component, L)


@report
class ConditionAReport(ReportBase):
    ''' Feasibility of b, c with 0 < b < w and injrad >= c > pi / sinh(b) '''

    _schema = [
        ('feasible', BoolField),
        ('b', FloatField),
        ('c', FloatField),
        ('margin', FloatField),
        ('injrad', FloatField),
        ('w', FloatField),
    ]


def check_clubsuit(m: ManifoldDescriptor) -> bool:
    ''' injrad(boundary) sinh(w) > pi '''
    return m.injrad * math.sinh(m['w']) > math.pi


def check_condition_A(m: ManifoldDescriptor) -> ConditionAReport:
    m.validate()
    w, c = m['w'], m.injrad
    margin = c * math.sinh(w) - math.pi
    feasible = check_clubsuit(m)
    b = None
    if feasible:
        b = w * (1 - 1e-6)
        if not c * math.sinh(b) > math.pi:
            b = (math.asinh(math.pi / c) + w) / 2
    logging.debug(f'check_condition_A: injrad={c} w={w} margin={margin}')
    return ConditionAReport(feasible=feasible, b=b, c=c if feasible else None, margin=margin, injrad=c, w=w)


@report
class GenusReport(ReportBase):
    ''' Gauss-Bonnet area bound Area(M) > 2 k pi for a hyperbolic surface of genus g with k boundary circles '''

    _schema = [
        ('genus', IntField),
        ('k', IntField),
        ('area', FloatField),
        ('hyperbolic', BoolField),
        ('passes_area_bound', BoolField),
        ('genus_ok', BoolField),
    ]


def genus_obstruction(m: ManifoldDescriptor) -> GenusReport:
    surface = m._field('surface').record()
    if surface is None or m['dimension'] != 2:
        raise PreconditionError('missing-surface-data', 'genus obstruction needs a surface with genus and k')
    g, k = surface['genus'], surface['k']
    euler = 2 * g + k - 2
    area = 2 * math.pi * euler
    hyperbolic = euler > 0
    if not hyperbolic:
        logging.warning(f'genus_obstruction: 2g + k - 2 = {euler} <= 0, no hyperbolic metric')
    passes = hyperbolic and area > 2 * k * math.pi
    return GenusReport(genus=g, k=k, area=area, hyperbolic=hyperbolic, passes_area_bound=passes,
                       genus_ok=hyperbolic and g > 1)


def buffer_width_arcs(L: float, arcs) -> float:
    ''' buffer width of an arc family in a circle of length L, from [center, half_length] pairs '''
    family = arcs if isinstance(arcs, ArcFamily) else ArcFamily.from_pairs(L, arcs)
    return family.buffer_width()


class ArcIsotopy:
    '''
    Piecewise-linear isotopy Phi_t, t in [0, b'], with Phi_t(P_0) = P_t on the grid.

    Per component, the level-0 arc endpoints are knots; their displacement is
    linear in t between grid levels and Phi_t moves every fiber point by the
    periodic linear interpolation of the knot displacements.
    '''

    def __init__(self, grid, lengths):
        self.grid = np.asarray(grid, dtype=float)
        self.lengths = list(lengths)
        self.knots = [np.array([]) for _ in self.lengths]
        self.displacement = [np.zeros((len(self.grid), 0)) for _ in self.lengths]
        # components without moving endpoints (empty or full) keep their level-0 family
        self.static = [ArcFamily(L) for L in self.lengths]

    def set_static(self, component: int, family: ArcFamily):
        self.static[component] = family

    def set_component(self, component: int, starts, ends):
        ''' starts, ends: (levels, arcs) unwrapped endpoint tracks '''
        starts = np.asarray(starts, dtype=float)
        ends = np.asarray(ends, dtype=float)
        tracks = np.concatenate([starts, ends], axis=1)
        self.knots[component] = tracks[0]
        self.displacement[component] = tracks - tracks[0]

    def _displacement_at(self, component: int, t: float):
        disp = self.displacement[component]
        t = min(max(t, self.grid[0]), self.grid[-1])
        return np.array([np.interp(t, self.grid, disp[:, i]) for i in range(disp.shape[1])])

    def phi(self, component: int, t: float, theta):
        if self.knots[component].size == 0:
            return np.asarray(theta, dtype=float) if np.ndim(theta) else float(theta)
        L = self.lengths[component]
        shift = np.interp(theta, self.knots[component], self._displacement_at(component, t), period=L)
        return theta + shift

    def phi_inverse(self, component: int, t: float, theta):
        if self.knots[component].size == 0:
            return np.asarray(theta, dtype=float) if np.ndim(theta) else float(theta)
        L = self.lengths[component]
        disp = self._displacement_at(component, t)
        shift = np.interp(theta, self.knots[component] + disp, disp, period=L)
        return theta - shift

    def level(self, component: int, t: float) -> ArcFamily:
        ''' P_t = Phi_t(P_0), interpolated between grid levels '''
        L = self.lengths[component]
        knots = self.knots[component]
        if knots.size == 0:
            return self.static[component]
        n = knots.size // 2
        moved = knots + self._displacement_at(component, t)
        return ArcFamily.from_endpoints(L, moved[:n], moved[n:])


@report
class ConditionBReport(ReportBase):
    ''' Conditions B1 (isotopy), B2 (nesting) and B3 (buffer width > c/2) on the level grid '''

    _schema = [
        ('B1', BoolField),
        ('B2', BoolField),
        ('B3', BoolField),
        ('passed', BoolField),
        ('b3_margin', FloatField),
        ('continuity_ratio', FloatField),
        ('grid_spacing', FloatField),
        ('detail', MappingField),
    ]

    isotopy = None

    @property
    def passed(self) -> bool:
        return self['passed']


def _min_gap(family: ArcFamily) -> float:
    gaps = family.gaps()
    return min(gaps) if gaps else math.inf


def check_condition_B(m: ManifoldDescriptor, s: SubspaceDescriptor, grid_gap: float = None) -> ConditionBReport:
    m.validate()
    s.validate()
    b, b_prime, c, w = s['b'], s['b_prime'], s['c'], m['w']
    if not 0 < b < b_prime < w:
        raise PreconditionError('out-of-range', f'need 0 < b < b\' < w, received b={b}, b\'={b_prime}, w={w}')
    lengths = m.lengths
    if s.components != len(lengths):
        raise PreconditionError('invalid-descriptor',
                                f'subspace has {s.components} components, manifold has {len(lengths)}')
    grid = s.grid
    threshold = b_prime / 100 if grid_gap is None else grid_gap
    spacing = float(np.max(np.diff(grid))) if len(grid) > 1 else b_prime
    if spacing > threshold:
        raise PreconditionError('grid-gap', f'level spacing {spacing} above {threshold}')

    detail = {'B1': [], 'B2': [], 'B3': []}
    b1 = b2 = b3 = True
    b3_margin = math.inf
    continuity_ratio = 0.0
    isotopy = ArcIsotopy(grid, lengths)

    for comp, L in enumerate(lengths):
        levels = [s.level(j, comp, L) for j in range(len(grid))]
        isotopy.set_static(comp, levels[0])

        # B1: constant arc count, endpoints moving less than half the smallest neighbouring gap
        comp_b1 = True
        if any(len(f) != len(levels[0]) or f.full != levels[0].full for f in levels):
            comp_b1 = False
            detail['B1'].append({'component': comp, 'reason': 'arc count changes'})
        elif len(levels[0]) > 0 and not levels[0].full:
            starts, ends = levels[0].endpoints()
            tracks_s, tracks_e = [starts], [ends]
            for j in range(1, len(levels)):
                _, jump, starts, ends = match_endpoints((starts, ends), levels[j])
                bound = min(_min_gap(levels[j - 1]), _min_gap(levels[j])) / 2
                ratio = jump / bound if bound > 0 else math.inf
                continuity_ratio = max(continuity_ratio, ratio)
                if not jump < bound:
                    comp_b1 = False
                    detail['B1'].append({'component': comp, 't': float(grid[j]), 'jump': jump, 'bound': bound})
                    break
                tracks_s.append(starts)
                tracks_e.append(ends)
            if comp_b1:
                isotopy.set_component(comp, tracks_s, tracks_e)
        b1 = b1 and comp_b1

        # B2: P_t contains P_s for t < s, on consecutive levels below b'
        for j in range(len(grid) - 1):
            if grid[j] < b_prime and not levels[j].contains_family(levels[j + 1], 1e-12):
                b2 = False
                detail['B2'].append({'component': comp, 't': float(grid[j]), 'next': float(grid[j + 1])})

        # B3: buffer width above c/2 below b'
        for j, t in enumerate(grid):
            if t >= b_prime:
                continue
            bw = levels[j].buffer_width()
            b3_margin = min(b3_margin, bw - c / 2)
            if not bw > c / 2:
                b3 = False
                detail['B3'].append({'component': comp, 't': float(t), 'buffer_width': bw})

    passed = b1 and b2 and b3
    logging.info(f'check_condition_B: B1={b1} B2={b2} B3={b3}')
    result = ConditionBReport(B1=b1, B2=b2, B3=b3, passed=passed, b3_margin=b3_margin,
                              continuity_ratio=continuity_ratio, grid_spacing=spacing, detail=detail)
    result.isotopy = isotopy if b1 else None
    return result


@report
class ConditionsReport(ReportBase):
    ''' Combined audit of conditions A1/A2 (clubsuit), the genus obstruction and B1-B3 '''

    _schema = [
        ('clubsuit', BoolField),
        ('condition_A', NestedField, ConditionAReport),
        ('genus', NestedField, GenusReport),
        ('condition_B', NestedField, ConditionBReport),
        ('passed', BoolField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def audit_conditions(m: ManifoldDescriptor, s: SubspaceDescriptor = None, grid_gap: float = None) -> ConditionsReport:
    '''
    Condition A always, the genus obstruction when surface data is present and
    condition B when a subspace is given. The genus obstruction is reported
    only; passed needs A and, with a subspace, B.
    '''
    cond_a = check_condition_A(m)
    genus = genus_obstruction(m) if m._field('surface').record() is not None and m['dimension'] == 2 else None
    cond_b = check_condition_B(m, s, grid_gap) if s is not None else None
    passed = cond_a['feasible'] and (cond_b is None or cond_b.passed)
    return ConditionsReport(clubsuit=check_clubsuit(m), condition_A=cond_a, genus=genus, condition_B=cond_b,
                            passed=passed)


@report
class EpsilonBound(ReportBase):
    ''' Largest ball radius for the local convexity argument at a cone-part centre '''

    _schema = [
        ('eps_max', FloatField),
        ('L_bar', FloatField),
        ('terms', FloatListField),
    ]


def epsilon_bound(t_y: float, f, b_prime: float, c: float, lcr: float) -> EpsilonBound:
    '''
    eps_max = min((b' - t_y)/3, (t_y - L_bar)/2, c f(L_bar)/2, lcr/2)
    with L_bar = (2 t_y + t0)/3
    '''
    if not f.t0 < t_y <= f.b < b_prime:
        raise PreconditionError('out-of-range', f't_y = {t_y} outside ({f.t0}, {f.b}] or b\' = {b_prime} <= b')
    if not c > 0:
        raise PreconditionError('nonpositive-c', f'c = {c}')
    if not lcr > 0:
        raise PreconditionError('out-of-range', f'lcr = {lcr} must be positive')
    L_bar = (2 * t_y + f.t0) / 3
    terms = [(b_prime - t_y) / 3, (t_y - L_bar) / 2, c * float(f.f(L_bar)) / 2, lcr / 2]
    return EpsilonBound(eps_max=min(terms), L_bar=L_bar, terms=terms)


def _level_family(s: SubspaceDescriptor, component: int, L: float, t: float, isotopy):
    if isotopy is not None:
        return isotopy.level(component, min(t, s['b_prime']))
    return s.nearest_level(t, component, L)


def y_membership(point, s: SubspaceDescriptor, cone: ConeSpace, component: int = 0, isotopy=None,
                 tol: float = 0.0) -> bool:
    '''
    Y in the cone over one boundary component: P_b x [t0, b] below b, the
    level P_t above b (interpolated through isotopy when given).
    '''
    t, theta = point
    L = cone.fiber.L
    if t <= cone.t0:
        return not _level_family(s, component, L, s['b'], isotopy).empty
    level = max(t, s['b'])
    return bool(_level_family(s, component, L, level, isotopy).contains(theta, tol))


def _exit_size(point, s, cone, component, isotopy) -> float:
    t, theta = point
    family = _level_family(s, component, cone.fiber.L, max(t, s['b']), isotopy)
    return family.exit_distance(theta)


@report
class ProbeReport(ReportBase):
    ''' Sampled local convexity of Y: geodesics between nearby points of Y stay in Y '''

    _schema = [
        ('component', IntField),
        ('pairs_requested', IntField),
        ('pairs_tested', IntField),
        ('pairs_skipped', IntField),
        ('tip_pairs', IntField),
        ('level_pairs', IntField),
        ('exits', IntField),
        ('worst_exit', FloatField),
        ('passed', BoolField),
        ('seed', IntField),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']


def _probe_pair(cone, s, component, isotopy, lcr, rng, at_tip):
    ''' one sampled pair; returns (exits, worst exit) or None when skipped '''
    L_b = _level_family(s, component, cone.fiber.L, s['b'], isotopy)
    if L_b.empty:
        return None
    t0, b = cone.t0, cone.b
    if at_tip:
        eps = (b - t0) / 3
        tau = rng.uniform(0, eps, 2)
        theta = L_b.sample(rng, 2)
        z, w = (cone.point(t0 + tau[k], theta[k]) for k in range(2))
    else:
        t_y = rng.uniform(t0 + 0.25 * (b - t0), b)
        y = cone.point(t_y, L_b.sample(rng, 1)[0])
        eps = 0.99 * epsilon_bound(t_y, cone.f, s['b_prime'], s['c'], lcr)['eps_max']
        scale = eps / max(float(cone.f.f(t_y - eps)), 1e-12)
        found = []
        for _ in range(_rejection_tries):
            t = t_y + eps * rng.uniform(-1, 1)
            theta = y.theta + scale * rng.uniform(-1, 1)
            if not t0 < t < cone.t_max:
                continue
            p = cone.point(t, theta)
            if y_membership(p, s, cone, component, isotopy) and distance(cone, y, p) < eps:
                found.append(p)
                if len(found) == 2:
                    break
        if len(found) < 2:
            return None
        z, w = found
    try:
        path = geodesic(cone, z, w, _probe_samples)
    except SolverError as e:
        logging.warning(f'local_convexity_probe: pair skipped: {e}')
        return None
    exits = 0
    worst = 0.0
    for p in zip(path.t, path.theta):
        if not y_membership(p, s, cone, component, isotopy, _membership_tol):
            exits += 1
            worst = max(worst, _exit_size(p, s, cone, component, isotopy))
    return exits, worst


def local_convexity_probe(cone: ConeSpace, s: SubspaceDescriptor, n_pairs: int = 200, seed: int = 0,
                          component: int = 0, lcr: float = None, isotopy=None, threads: int = None) -> ProbeReport:
    '''
    Sample pairs of points of Y in small balls, alternating between balls at
    the cone point (radius (b - t0)/3) and balls at cone-part centres (radius
    below epsilon_bound), and count geodesic samples leaving Y.
    '''
    if cone.b is None:
        raise PreconditionError('out-of-range', 'probe needs a cone warping function with b')
    if not 0 <= component < s.components:
        raise PreconditionError('out-of-range', f'component {component} of {s.components}')
    lcr = lcr if lcr is not None else (s['lcr'] if s['lcr'] is not None else math.inf)
    threads = env_threads() if threads is None else max(1, threads)
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(n_pairs)]

    def work(k):
        return _probe_pair(cone, s, component, isotopy, lcr, rngs[k], k % 2 == 0)

    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(executor.map(work, range(n_pairs)))

    tested = [r for r in results if r is not None]
    exits = sum(r[0] for r in tested)
    worst = max((r[1] for r in tested), default=0.0)
    tip_pairs = sum(1 for k, r in enumerate(results) if r is not None and k % 2 == 0)
    if not tested:
        logging.warning('local_convexity_probe: no pair was tested')
    logging.info(f'local_convexity_probe: {len(tested)} pairs, {exits} exits, worst {worst:.3g}')
    return ProbeReport(
        component=component, pairs_requested=n_pairs, pairs_tested=len(tested),
        pairs_skipped=n_pairs - len(tested), tip_pairs=tip_pairs, level_pairs=len(tested) - tip_pairs,
        exits=exits, worst_exit=worst, passed=exits == 0, seed=seed,
    )
