"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

import math
import unittest
import numpy as np

from warpcone.errors import PreconditionError
from warpcone.warp_synth import LinearWarp, synthesize
from warpcone.warped_cone import (Fiber, ConePoint, ConeSpace, ConeDescriptor, CollarModel, geodesic, distance,
                                  path_length, through_tip_sufficient, tip_angle, rescaled_tip_angle,
                                  alexandrov_angle_estimate, log_injectivity_check)


def flat_cone(delta=1.0, L=2 * math.pi, kind='circle'):
    return ConeSpace(LinearWarp(0.0, delta), Fiber(kind, L), 10.0)


def unrolled_distance(delta, r1, r2, dtheta):
    ''' distance in the flat cone of apex slope delta, by unrolling it into the plane '''
    angle = delta * dtheta
    if angle >= math.pi:
        return r1 + r2
    return math.sqrt(max(0.0, r1 ** 2 + r2 ** 2 - 2 * r1 * r2 * math.cos(angle)))


class TestFlatCone(unittest.TestCase):
    def test_radial(self):
        cone = flat_cone()
        path = geodesic(cone, ConePoint(1, 0), ConePoint(2, 0))
        self.assertEqual(path.kind, 'radial')
        self.assertAlmostEqual(path.length, 1.0, places=14)
        self.assertFalse(path.through_tip)

    def test_quarter_turn(self):
        cone = flat_cone()
        path = geodesic(cone, ConePoint(1, 0), ConePoint(1, math.pi / 2))
        self.assertEqual(path.kind, 'tip-avoiding')
        self.assertAlmostEqual(path.length, math.sqrt(2), places=8)
        # straight segment, closest to the apex at its midpoint
        self.assertAlmostEqual(path.lowest_level(), math.sqrt(0.5), places=8)
        self.assertAlmostEqual(abs(path.clairaut_constant), math.sqrt(0.5), places=8)
        self.assertAlmostEqual(path_length(cone, path.samples), math.sqrt(2), places=3)

    def test_half_turn_through_tip(self):
        cone = flat_cone()
        x, y = ConePoint(1, 0), ConePoint(1, math.pi)
        self.assertTrue(through_tip_sufficient(cone, x, y))
        path = geodesic(cone, x, y)
        self.assertEqual(path.kind, 'through-tip')
        self.assertTrue(path.through_tip)
        self.assertAlmostEqual(path.length, 2.0, places=14)
        self.assertEqual(path.t[path.tip_index], 0.0)
        self.assertEqual(path.lowest_level(), 0.0)

    def test_tip_end_point(self):
        cone = flat_cone()
        path = geodesic(cone, cone.tip, ConePoint(3, 1))
        self.assertEqual(path.kind, 'radial')
        self.assertAlmostEqual(path.length, 3.0, places=14)
        self.assertEqual(distance(cone, cone.tip, cone.tip), 0.0)

    def test_trivial(self):
        cone = flat_cone()
        path = geodesic(cone, ConePoint(2, 0), ConePoint(2, 2 * math.pi))
        self.assertEqual(path.kind, 'trivial')
        self.assertEqual(path.length, 0.0)

    def test_unrolled_pairs(self):
        for delta in (1.0, 0.5):
            cone = flat_cone(delta)
            rng = np.random.default_rng(7)
            for _ in range(20):
                r1, r2 = rng.uniform(0.2, 4.0, 2)
                th1, th2 = rng.uniform(0, 2 * math.pi, 2)
                d = cone.fiber.distance(th1, th2)
                expected = unrolled_distance(delta, r1, r2, d)
                got = distance(cone, ConePoint(r1, th1), ConePoint(r2, th2))
                self.assertLess(abs(got - expected), 1e-7 * max(1.0, expected), msg=f'{r1} {th1} {r2} {th2}')

    def test_monotone_geodesic(self):
        cone = flat_cone()
        path = geodesic(cone, ConePoint(1, 0), ConePoint(3, 0.3))
        self.assertEqual(path.kind, 'tip-avoiding')
        self.assertEqual(path.solution.kind, 'monotone')
        self.assertAlmostEqual(path.length, unrolled_distance(1.0, 1, 3, 0.3), places=8)
        self.assertTrue(np.all(np.diff(path.t) >= -1e-9))
        self.assertEqual(path.lowest_level(), 1.0)

    def test_sampling(self):
        cone = flat_cone()
        path = geodesic(cone, ConePoint(1, 0), ConePoint(1, math.pi / 2), samples=33)
        self.assertEqual(len(path.s), 33)
        self.assertAlmostEqual(path.s[-1], path.length, places=14)
        self.assertAlmostEqual(path.t[0], 1.0, places=8)
        self.assertAlmostEqual(path.t[-1], 1.0, places=8)
        self.assertAlmostEqual(path.theta[-1], math.pi / 2, places=7)
        mid = path.point_at(0.5)
        self.assertAlmostEqual(mid.t, math.sqrt(0.5), places=7)
        self.assertAlmostEqual(mid.theta, math.pi / 4, places=7)
        with self.assertRaises(PreconditionError):
            path.point_at(1.5)

    def test_odd_sample_counts_hit_the_anchor(self):
        cone = flat_cone()
        for samples in (3, 9, 33):
            path = geodesic(cone, ConePoint(1, 0), ConePoint(1, math.pi / 2), samples=samples)
            self.assertTrue(np.all(np.isfinite(path.t)), msg=str(samples))
            self.assertTrue(np.all(np.isfinite(path.theta)), msg=str(samples))
            mid = len(path.t) // 2
            self.assertAlmostEqual(path.t[mid], math.sqrt(0.5), places=8)
            self.assertAlmostEqual(path.theta[mid], math.pi / 4, places=8)
        mid = path.point_at(0.5)
        self.assertTrue(math.isfinite(mid.t) and math.isfinite(mid.theta))

    def test_csv(self):
        cone = flat_cone()
        csv = geodesic(cone, ConePoint(1, 0), ConePoint(2, 0), samples=5).to_csv()
        lines = csv.splitlines()
        self.assertEqual(lines[0], 't,theta,s')
        self.assertEqual(len(lines), 6)
        self.assertEqual(lines[-1].split(',')[0], '2')

    def test_report(self):
        cone = flat_cone()
        report = geodesic(cone, ConePoint(1, 0), ConePoint(1, math.pi)).report()
        self.assertEqual(report['kind'], 'through-tip')
        self.assertTrue(report['through_tip'])
        self.assertEqual(report['clairaut_constant'], 0.0)
        self.assertEqual(report['candidates']['through_tip'], 2.0)

    def test_out_of_range(self):
        cone = flat_cone()
        with self.assertRaises(PreconditionError) as cm:
            distance(cone, ConePoint(-1, 0), ConePoint(1, 0))
        self.assertEqual(cm.exception.reason, 'out-of-range')
        with self.assertRaises(PreconditionError):
            distance(cone, ConePoint(1, 0), ConePoint(10, 0))
        with self.assertRaises(PreconditionError):
            distance(cone, ConePoint(1, math.nan), ConePoint(2, 0))

    def test_point_below_tip(self):
        cone = flat_cone()
        with self.assertRaises(PreconditionError) as cm:
            cone.point(-0.5, 1.0)
        self.assertEqual(cm.exception.reason, 'out-of-range')
        self.assertIs(cone.point(-1e-13, 1.0), cone.tip)
        self.assertIs(cone.point(0.0, 2.0), cone.tip)
        self.assertEqual(cone.point(0.5, 2 * math.pi + 1.0).theta, 1.0)

    def test_symmetry(self):
        cone = flat_cone(0.7)
        x, y = ConePoint(0.5, 0.2), ConePoint(2.0, 3.0)
        self.assertAlmostEqual(distance(cone, x, y), distance(cone, y, x), places=9)


class TestTipGeometry(unittest.TestCase):
    def test_through_tip_sufficient(self):
        cone = flat_cone(0.5)
        self.assertFalse(through_tip_sufficient(cone, ConePoint(1, 0), ConePoint(1, math.pi)))
        cone = flat_cone(2.0)
        self.assertTrue(through_tip_sufficient(cone, ConePoint(1, 0), ConePoint(1, math.pi / 2)))
        self.assertFalse(through_tip_sufficient(cone, ConePoint(1, 0), ConePoint(1, 1.5)))
        with self.assertRaises(PreconditionError):
            through_tip_sufficient(cone, cone.tip, ConePoint(1, 0))

    def test_tip_angle(self):
        cone = flat_cone(0.8)
        self.assertAlmostEqual(tip_angle(cone, 0.0, 1.0), 1.25, places=14)
        self.assertAlmostEqual(rescaled_tip_angle(cone, 0.0, 1.0), 0.8, places=14)
        self.assertEqual(tip_angle(cone, 0.0, math.pi), math.pi)
        self.assertEqual(rescaled_tip_angle(cone, 2.0, 2.0), 0.0)

    def test_alexandrov_estimate(self):
        cone = ConeSpace(synthesize(1.0, 0.8), Fiber('circle', 10.0), 4.0)
        estimate = alexandrov_angle_estimate(cone, 0.0, 1.0, 1e-3)
        self.assertAlmostEqual(estimate, rescaled_tip_angle(cone, 0.0, 1.0), places=3)
        wide = alexandrov_angle_estimate(cone, 0.0, 5.0, 1e-3)
        self.assertAlmostEqual(wide, math.pi, places=9)
        with self.assertRaises(PreconditionError):
            alexandrov_angle_estimate(cone, 0.0, 1.0, 0.0)

    def test_log_injectivity(self):
        cone = ConeSpace(synthesize(1.0, 0.5), Fiber('circle', 4.0), 3.0)
        report = log_injectivity_check(cone, 20, seed=3)
        self.assertTrue(report.passed)
        self.assertEqual(report['samples'], 20)
        self.assertEqual(report['collisions'], 0)
        self.assertGreater(report['min_separation'], 0)

        p = cone.point(cone.t0 + 0.1, 1.0)
        report = log_injectivity_check(cone, 0, points=[p, ConePoint(p.t, p.theta + 4.0), cone.point(cone.t0 + 0.2, 1.0)])
        self.assertFalse(report.passed)
        self.assertEqual(report['collisions'], 1)
        with self.assertRaises(PreconditionError):
            log_injectivity_check(cone, 1)


class TestSynthesizedCone(unittest.TestCase):
    def setUp(self):
        self.delta = 0.8
        self.cone = ConeSpace(synthesize(1.0, self.delta), Fiber('circle', 2 * math.pi / self.delta * 1.05), 4.0)

    def test_clairaut_constant_is_conserved(self):
        cone = self.cone
        x = cone.point(cone.t0 + 0.6, 0.0)
        y = cone.point(cone.b + 0.5, 2.0)
        path = geodesic(cone, x, y, samples=401)
        self.assertEqual(path.kind, 'tip-avoiding')
        t, theta, s = path.t, path.theta, path.s
        tm = (t[1:] + t[:-1]) / 2
        invariant = cone.f.f(tm) ** 2 * np.diff(theta) / np.diff(s)
        c = abs(path.clairaut_constant)
        self.assertLess(np.max(np.abs(invariant[2:-2] - c)), 1e-3 * max(1.0, c))

    def test_clairaut_constant_fine_sampling(self):
        cone = self.cone
        x = cone.point(cone.t0 + 0.6, 0.0)
        y = cone.point(cone.b + 0.5, 2.0)
        path = geodesic(cone, x, y, samples=4001)
        invariant = cone.f.f(path.t) ** 2 * np.gradient(path.theta, path.s, edge_order=2)
        c = abs(path.clairaut_constant)
        self.assertLess(np.max(np.abs(invariant[4:-4] - c)), 1e-5 * max(1.0, c))

    def test_depth_has_one_minimum(self):
        cone = self.cone
        x = cone.point(cone.b + 0.3, 0.0)
        y = cone.point(cone.b + 0.6, 1.0)
        path = geodesic(cone, x, y, samples=257)
        self.assertEqual(path.kind, 'tip-avoiding')
        k = int(np.argmin(path.t))
        self.assertTrue(np.all(np.diff(path.t[:k + 1]) <= 1e-10))
        self.assertTrue(np.all(np.diff(path.t[k:]) >= -1e-10))
        self.assertAlmostEqual(path.lowest_level(), float(np.min(path.t)), places=4)
        # geodesic depth is convex along the path
        self.assertTrue(np.all(np.diff(path.t, 2) >= -1e-9))

    def test_sampled_length(self):
        cone = self.cone
        x = cone.point(cone.t0 + 1.0, 0.0)
        y = cone.point(cone.t0 + 1.5, 1.5)
        path = geodesic(cone, x, y, samples=513)
        self.assertAlmostEqual(path_length(cone, path.samples), path.length, places=3)

    def test_far_points_pass_the_tip(self):
        cone = self.cone
        x = cone.point(cone.t0 + 0.3, 0.0)
        y = cone.point(cone.t0 + 0.3, cone.fiber.L / 2)
        self.assertTrue(through_tip_sufficient(cone, x, y))
        self.assertAlmostEqual(distance(cone, x, y), 0.6, places=12)

    def random_points(self, rng, n):
        cone = self.cone
        t = rng.uniform(cone.t0, cone.b + 1.5, n)
        theta = rng.uniform(0, cone.fiber.L, n)
        return [cone.point(a, b) for a, b in zip(t, theta)]

    def test_triangle_inequality(self):
        cone = self.cone
        rng = np.random.default_rng(21)
        for _ in range(25):
            x, y, z = self.random_points(rng, 3)
            xy, yz, xz = distance(cone, x, y), distance(cone, y, z), distance(cone, x, z)
            self.assertLessEqual(xz, xy + yz + 1e-8, msg=f'{x} {y} {z}')
            self.assertLessEqual(xy, xz + yz + 1e-8, msg=f'{x} {y} {z}')

    def test_lower_bound_above_the_lowest_level(self):
        cone = self.cone
        rng = np.random.default_rng(22)
        for _ in range(30):
            x, y = self.random_points(rng, 2)
            path = geodesic(cone, x, y)
            if path.kind == 'oracle':
                continue
            floor = float(cone.f.f(path.lowest_level()))
            self.assertGreaterEqual(path.length, floor * cone.fiber.distance(x.theta, y.theta) - 1e-9,
                                    msg=f'{x} {y}')

    def test_clairaut_constant_many_paths(self):
        cone = self.cone
        rng = np.random.default_rng(23)
        checked = 0
        for _ in range(20):
            x, y = self.random_points(rng, 2)
            path = geodesic(cone, x, y, samples=8001)
            # near-tip turns need a finer sampling than this
            if path.kind != 'tip-avoiding' or abs(path.clairaut_constant) < 0.05:
                continue
            checked += 1
            invariant = cone.f.f(path.t) ** 2 * np.gradient(path.theta, path.s, edge_order=2)
            c = abs(path.clairaut_constant)
            self.assertLess(np.max(np.abs(np.abs(invariant[4:-4]) - c)), 1e-5 * max(1.0, c), msg=f'{x} {y}')
        self.assertGreater(checked, 0)

    def test_refined_panels_agree(self):
        cone = self.cone
        x = cone.point(cone.t0 + 0.4, 0.1)
        y = cone.point(cone.b + 1.0, 1.9)
        self.assertAlmostEqual(distance(cone, x, y), distance(cone, x, y, panel_width=0.05), places=9)


class TestPathLength(unittest.TestCase):
    def test_polyline(self):
        cone = flat_cone()
        self.assertAlmostEqual(path_length(cone, [ConePoint(1, 0), ConePoint(2, 0)]), 1.0, places=14)
        arc = [ConePoint(1, th) for th in np.linspace(0, 1, 11)]
        self.assertAlmostEqual(path_length(cone, arc), 1.0, places=12)
        with self.assertRaises(PreconditionError):
            path_length(cone, [ConePoint(1, 0)])


class TestFibers(unittest.TestCase):
    def test_interval(self):
        cone = flat_cone(kind='interval', L=1.0)
        self.assertAlmostEqual(distance(cone, ConePoint(1, 0), ConePoint(1, 1)), 2 * math.sin(0.5), places=8)
        self.assertFalse(cone.fiber.contains(1.5))
        self.assertEqual(cone.fiber.injrad, math.inf)
        with self.assertRaises(PreconditionError):
            cone.point(1.0, 1.5)

    def test_circle(self):
        fiber = Fiber('circle', 4.0)
        self.assertEqual(fiber.injrad, 2.0)
        self.assertAlmostEqual(fiber.kappa, (math.pi / 2) ** 2, places=14)
        self.assertEqual(fiber.distance(0.5, 3.5), 1.0)
        self.assertEqual(fiber.displacements(0.5, 3.5), [-1.0, 3.0])
        with self.assertRaises(PreconditionError):
            Fiber('torus', 1.0)
        with self.assertRaises(PreconditionError):
            Fiber('circle', 0.0)

    def test_cone_bounds(self):
        with self.assertRaises(PreconditionError):
            ConeSpace(synthesize(1.0, 0.5), Fiber(), 1.0)


class TestCollarModel(unittest.TestCase):
    def test_distances(self):
        collar = CollarModel(2.0, 1.0)
        self.assertAlmostEqual(collar.distance(ConePoint(0, 0), ConePoint(0.5, 0)), 0.5, places=14)
        self.assertAlmostEqual(collar.distance(ConePoint(0, 0), ConePoint(0, 1)), 1.0, places=14)
        # the short way around
        self.assertAlmostEqual(collar.distance(ConePoint(0, 0.1), ConePoint(0, 1.9)), 0.2, places=14)
        self.assertLess(collar.distance(ConePoint(0.5, 0), ConePoint(0.5, 0.5)), 0.5 * math.cosh(0.5))
        with self.assertRaises(PreconditionError):
            collar.distance(ConePoint(1.0, 0), ConePoint(0, 0))
        with self.assertRaises(PreconditionError) as cm:
            CollarModel(2.0, 0.0)
        self.assertEqual(cm.exception.reason, 'band-too-thin')


class TestConeDescriptor(unittest.TestCase):
    def test_round_trip(self):
        cone = ConeSpace(synthesize(1.0, 0.5), Fiber('circle', 3.0), 4.0)
        doc = ConeDescriptor(cone.descriptor().to_dict()).validate()
        rebuilt = doc.build()
        self.assertEqual(rebuilt.t0, cone.t0)
        self.assertEqual(rebuilt.fiber.L, 3.0)
        self.assertEqual(rebuilt.t_max, 4.0)
        x, y = ConePoint(1.0, 0.0), ConePoint(1.5, 1.0)
        self.assertEqual(distance(rebuilt, x, y), distance(cone, x, y))

    def test_missing_fiber(self):
        src = ConeSpace(synthesize(1.0, 0.5), Fiber('circle', 3.0), 4.0).descriptor().to_dict()
        del src['fiber']
        with self.assertRaises(PreconditionError) as cm:
            ConeDescriptor(src).validate()
        self.assertEqual(cm.exception.reason, 'invalid-descriptor')
