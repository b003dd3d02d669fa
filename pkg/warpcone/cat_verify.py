"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Sampled CAT(K) comparison test for warped cones.

A triangle with vertices A = x, B = y, C = z has sides c = [A, B], a = [B, C]
and b = [A, C], each computed as a geodesic. For pairs of points on distinct
sides the cone distance is compared with the distance of the comparison points
in the model plane M_K. The violation is d_cone - d_model.
"""

from concurrent.futures import ThreadPoolExecutor
import io
import logging
import math
import os
import numpy as np

from warpcone.errors import PreconditionError, SolverError
from warpcone.model_geometry import ModelTriangle, comparison_point
from warpcone.registry import report
from warpcone.types import (DescriptorBase, ReportBase, FloatField, FloatListField, IntField,
                            BoolField, MappingField, NestedField, ArrayField)
from warpcone.warp_synth import Certificate, check_fk_convex_ae, check_fk_convex_barrier
from warpcone.warped_cone import ConeSpace, geodesic, distance

# share of triangle vertices drawn close to the tip
_tip_share = 0.25
# violations in this window trigger a finer re-solve
_refine_window = (1e-6, 1e-4)
_refine_panel_width = 0.0625


def env_threads() -> int:
    ''' thread cap from WARPCONE_THREADS, default 1 '''
    value = os.environ.get('WARPCONE_THREADS', '1')
    try:
        threads = int(value)
    except ValueError:
        raise PreconditionError('out-of-range', f'WARPCONE_THREADS={value!r} is not an integer')
    return max(1, threads)


def kappa_from_injrad(injrad: float) -> float:
    ''' (pi / injrad)^2, zero for infinite injectivity radius '''
    if not injrad > 0:
        raise PreconditionError('nonpositive-injrad', f'injrad = {injrad}')
    if math.isinf(injrad):
        return 0.0
    return (math.pi / injrad) ** 2


def resolve_K(cone: ConeSpace, K) -> float:
    if K == 'auto':
        return float(cone.f.K)
    K = float(K)
    if K > 0:
        raise PreconditionError('out-of-range', f'K = {K} must be <= 0')
    return K


class OffenderRecord(DescriptorBase):
    ''' Worst comparison of one triangle '''

    _emit_defaults = True

    _schema = [
        ('triangle', IntField),
        ('vertices', FloatListField),
        ('violation', FloatField),
    ]


@report
class CatReport(ReportBase):
    ''' Result of the sampled CAT(K) comparison test '''

    tolerance = 1e-4

    _schema = [
        ('K_tested', FloatField),
        ('triangles_sampled', IntField),
        ('triangles_skipped', IntField),
        ('pairs_compared', IntField),
        ('refinements', IntField),
        ('max_violation', FloatField),
        ('tolerance', FloatField),
        ('passed', BoolField),
        ('seed', IntField),
        ('worst', MappingField),
        ('offenders', ArrayField, OffenderRecord),
    ]

    @property
    def passed(self) -> bool:
        return self['passed']

    def offenders_csv(self) -> str:
        out = io.StringIO()
        out.write('triangle,t_A,theta_A,t_B,theta_B,t_C,theta_C,violation\n')
        for rec in self._field('offenders').records():
            row = [rec['triangle'], *rec['vertices'], rec['violation']]
            out.write(','.join(str(v) if isinstance(v, int) else format(v, '.17g') for v in row) + '\n')
        return out.getvalue()


def _draw_vertices(cone: ConeSpace, n_triangles: int, seed: int):
    ''' all random numbers are drawn up front so results do not depend on scheduling '''
    rng = np.random.default_rng(seed)
    tau_max = (cone.t_max - cone.t0) * (1 - 1e-9)
    u = rng.uniform(0, 1, (n_triangles, 3))
    near_tip = rng.uniform(0, 1, (n_triangles, 3)) < _tip_share
    tau = np.where(near_tip, tau_max * u ** 3, tau_max * u)
    theta = rng.uniform(0, cone.fiber.L, (n_triangles, 3))
    return [[cone.point(cone.t0 + tau[i, k], theta[i, k]) for k in range(3)] for i in range(n_triangles)]


_side_pairs = [('a', 'b'), ('a', 'c'), ('b', 'c')]


def _compare_triangle(cone, K, vertices, fractions):
    '''
    Worst comparison of one triangle.
    Returns None for a skipped triangle, else a dict with violation, pair count and refinements.
    '''
    x, y, z = vertices
    try:
        sides = {'c': geodesic(cone, x, y, 2), 'a': geodesic(cone, y, z, 2), 'b': geodesic(cone, x, z, 2)}
    except SolverError as e:
        logging.warning(f'cat_test: triangle skipped: {e}')
        return None
    if not all(p.converged for p in sides.values()):
        logging.warning('cat_test: triangle skipped: side geodesic fell back to the mesh oracle')
        return None
    try:
        model = ModelTriangle(K, sides['a'].length, sides['b'].length, sides['c'].length)
    except PreconditionError as e:
        logging.warning(f'cat_test: triangle skipped: {e}')
        return None

    points = {name: [path.point_at(s) for s in fractions] for name, path in sides.items()}
    model_points = {name: [comparison_point(K, model, name, s) for s in fractions] for name in sides}
    worst = {'violation': -math.inf}
    pairs = 0
    refinements = 0
    for first, second in _side_pairs:
        for i, s1 in enumerate(fractions):
            for j, s2 in enumerate(fractions):
                try:
                    d_cone = distance(cone, points[first][i], points[second][j])
                except SolverError as e:
                    logging.warning(f'cat_test: pair skipped: {e}')
                    continue
                d_model = model_points[first][i].distance(model_points[second][j])
                violation = d_cone - d_model
                if _refine_window[0] < violation <= _refine_window[1]:
                    d_cone = distance(cone, points[first][i], points[second][j], _refine_panel_width)
                    violation = d_cone - d_model
                    refinements += 1
                pairs += 1
                if violation > worst['violation']:
                    worst = {
                        'violation': violation, 'sides': [first, second], 'fractions': [s1, s2],
                        'd_cone': d_cone, 'd_model': d_model,
                    }
    return {'worst': worst, 'pairs': pairs, 'refinements': refinements}


def cat_test(cone: ConeSpace, K, n_triangles: int = 100, points_per_side: int = 5, seed: int = 0,
             threads: int = None) -> CatReport:
    ''' Compare random geodesic triangles of the cone with their comparison triangles in M_K '''
    K = resolve_K(cone, K)
    if n_triangles < 0 or points_per_side < 1:
        raise PreconditionError('out-of-range', f'n_triangles={n_triangles}, points_per_side={points_per_side}')
    threads = env_threads() if threads is None else max(1, threads)
    fractions = list(np.linspace(0, 1, points_per_side + 2)[1:-1])
    triangles = _draw_vertices(cone, n_triangles, seed)

    def work(vertices):
        return _compare_triangle(cone, K, vertices, fractions)

    with ThreadPoolExecutor(max_workers=threads) as executor:
        results = list(executor.map(work, triangles))

    offenders = []
    worst = {}
    max_violation = -math.inf
    pairs = 0
    refinements = 0
    skipped = 0
    for index, (vertices, result) in enumerate(zip(triangles, results)):
        if result is None:
            skipped += 1
            continue
        pairs += result['pairs']
        refinements += result['refinements']
        violation = result['worst']['violation']
        if result['pairs'] == 0:
            continue
        offenders.append(OffenderRecord({
            'triangle': index,
            'vertices': [v for p in vertices for v in p],
            'violation': violation,
        }))
        if violation > max_violation:
            max_violation = violation
            worst = {'triangle': index, 'vertices': [list(p) for p in vertices], **result['worst']}

    if pairs == 0:
        logging.warning('cat_test: no pair was compared, the test is vacuous')
        max_violation = 0.0
    offenders.sort(key=lambda r: -r['violation'])
    passed = max_violation <= CatReport.tolerance
    logging.info(f'cat_test: K={K} max_violation={max_violation:.3g} pairs={pairs} skipped={skipped} passed={passed}')
    return CatReport(
        K_tested=K, triangles_sampled=n_triangles, triangles_skipped=skipped, pairs_compared=pairs,
        refinements=refinements, max_violation=max_violation, tolerance=CatReport.tolerance,
        passed=passed, seed=seed, worst=worst, offenders=offenders,
    )


@report
class HypothesisReport(ReportBase):
    ''' Which hypotheses of the CAT(K) theorem for warped cones hold '''

    _schema = [
        ('delta', FloatField),
        ('K_F', FloatField),
        ('delta_ok', BoolField),
        ('K', FloatField),
        ('fk_convex_ae', NestedField, Certificate),
        ('fk_convex_barrier', NestedField, Certificate),
        ('cat_expected', BoolField),
    ]


def barrier_subintervals(f):
    if f.b is None:
        return [(f.t0, f.grid_end())]
    mid = (f.t0 + f.b) / 2
    return [(f.t0, f.b), (mid, f.b + 1.0), (f.b, f.grid_end())]


def hypothesis_audit(cone: ConeSpace) -> HypothesisReport:
    ''' delta^2 >= K_F and both F_K-convexity certificates at the certified K '''
    K_F = kappa_from_injrad(cone.fiber.injrad)
    delta_ok = cone.delta ** 2 >= K_F * (1 - 1e-12)
    K = float(cone.f.K)
    ae = check_fk_convex_ae(cone.f, K)
    bar = check_fk_convex_barrier(cone.f, K, barrier_subintervals(cone.f))
    if not delta_ok:
        logging.warning(f'hypothesis_audit: delta^2 = {cone.delta ** 2} < K_F = {K_F}')
    return HypothesisReport(
        delta=cone.delta, K_F=K_F, delta_ok=delta_ok, K=K, fk_convex_ae=ae, fk_convex_barrier=bar,
        cat_expected=bool(delta_ok and ae.passed and bar.passed),
    )
