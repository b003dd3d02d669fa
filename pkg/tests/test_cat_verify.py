"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

import math
import os
import unittest
from unittest import mock

from warpcone.cat_verify import (cat_test, hypothesis_audit, kappa_from_injrad, env_threads, barrier_subintervals,
                                 CatReport)
from warpcone.errors import PreconditionError
from warpcone.warp_synth import LinearWarp, synthesize
from warpcone.warped_cone import Fiber, ConeSpace


def flat_plane():
    return ConeSpace(LinearWarp(0.0, 1.0), Fiber('circle', 2 * math.pi), 6.0)


def certified_cone():
    delta = 0.8
    return ConeSpace(synthesize(1.0, delta), Fiber('circle', 2 * math.pi / delta * 1.05), 3.0)


class TestCatTest(unittest.TestCase):
    def test_flat_plane_is_cat0(self):
        report = cat_test(flat_plane(), 0.0, n_triangles=6, points_per_side=2, seed=1)
        self.assertTrue(report.passed)
        self.assertLessEqual(report['max_violation'], 1e-6)
        self.assertEqual(report['K_tested'], 0.0)
        self.assertEqual(report['triangles_sampled'], 6)
        self.assertGreater(report['pairs_compared'], 0)

    def test_flat_plane_is_not_cat_minus_one(self):
        report = cat_test(flat_plane(), -1.0, n_triangles=6, points_per_side=2, seed=1)
        self.assertFalse(report.passed)
        self.assertGreater(report['max_violation'], CatReport.tolerance)
        worst = report['worst']
        self.assertGreater(worst['d_cone'], worst['d_model'])
        self.assertEqual(len(worst['vertices']), 3)
        offenders = report._field('offenders').records()
        self.assertEqual(offenders[0]['violation'], report['max_violation'])

    def test_certified_cone(self):
        cone = certified_cone()
        report = cat_test(cone, 'auto', n_triangles=4, points_per_side=2, seed=5)
        self.assertEqual(report['K_tested'], cone.f.K)
        self.assertTrue(report.passed)

    def test_monotone_in_K(self):
        cone = certified_cone()
        K = cone.f.K
        previous = math.inf
        for K_tested in (K, K / 2, 0.0):
            report = cat_test(cone, K_tested, n_triangles=6, points_per_side=2, seed=13)
            self.assertTrue(report.passed, msg=str(K_tested))
            self.assertLessEqual(report['max_violation'], previous + 1e-8)
            previous = report['max_violation']
        # the flat plane fails below zero but passes at zero on the same sample
        self.assertFalse(cat_test(flat_plane(), -0.5, n_triangles=6, points_per_side=2, seed=13).passed)
        self.assertTrue(cat_test(flat_plane(), 0.0, n_triangles=6, points_per_side=2, seed=13).passed)

    def test_certified_cone_many_triangles(self):
        cone = certified_cone()
        report = cat_test(cone, 'auto', n_triangles=40, points_per_side=3, seed=17, threads=2)
        self.assertTrue(report.passed, msg=str(report['worst']))
        self.assertEqual(report['triangles_sampled'], 40)
        self.assertLessEqual(report['max_violation'], CatReport.tolerance)

    def test_vacuous(self):
        report = cat_test(flat_plane(), 0.0, n_triangles=0)
        self.assertTrue(report.passed)
        self.assertEqual(report['pairs_compared'], 0)
        self.assertEqual(report['max_violation'], 0.0)

    def test_deterministic(self):
        first = cat_test(flat_plane(), -0.5, n_triangles=4, points_per_side=1, seed=9, threads=1)
        second = cat_test(flat_plane(), -0.5, n_triangles=4, points_per_side=1, seed=9, threads=2)
        self.assertEqual(first.to_dict(), second.to_dict())

    def test_offenders_csv(self):
        report = cat_test(flat_plane(), -1.0, n_triangles=2, points_per_side=1, seed=2)
        lines = report.offenders_csv().splitlines()
        self.assertEqual(lines[0], 'triangle,t_A,theta_A,t_B,theta_B,t_C,theta_C,violation')
        self.assertEqual(len(lines[1].split(',')), 8)

    def test_positive_K(self):
        with self.assertRaises(PreconditionError) as cm:
            cat_test(flat_plane(), 0.5)
        self.assertEqual(cm.exception.reason, 'out-of-range')


class TestHelpers(unittest.TestCase):
    def test_kappa_from_injrad(self):
        self.assertEqual(kappa_from_injrad(math.inf), 0.0)
        self.assertAlmostEqual(kappa_from_injrad(math.pi), 1.0, places=15)
        self.assertAlmostEqual(kappa_from_injrad(2.0), math.pi ** 2 / 4, places=14)
        with self.assertRaises(PreconditionError) as cm:
            kappa_from_injrad(0.0)
        self.assertEqual(cm.exception.reason, 'nonpositive-injrad')

    def test_env_threads(self):
        with mock.patch.dict(os.environ, {'WARPCONE_THREADS': '4'}):
            self.assertEqual(env_threads(), 4)
        with mock.patch.dict(os.environ, {'WARPCONE_THREADS': '0'}):
            self.assertEqual(env_threads(), 1)
        with mock.patch.dict(os.environ, {'WARPCONE_THREADS': 'many'}):
            with self.assertRaises(PreconditionError):
                env_threads()

    def test_barrier_subintervals(self):
        f = synthesize(1.0, 0.5)
        spans = barrier_subintervals(f)
        self.assertEqual(spans[0], (f.t0, f.b))
        self.assertEqual(spans[-1][1], f.grid_end())
        self.assertEqual(barrier_subintervals(LinearWarp(0.0, 1.0)), [(0.0, 5.0)])


class TestHypothesisAudit(unittest.TestCase):
    def test_certified(self):
        report = hypothesis_audit(certified_cone())
        self.assertTrue(report['delta_ok'])
        self.assertTrue(report['fk_convex_ae']['passed'])
        self.assertTrue(report['fk_convex_barrier']['passed'])
        self.assertTrue(report['cat_expected'])

    def test_short_fiber(self):
        report = hypothesis_audit(ConeSpace(synthesize(1.0, 0.5), Fiber('circle', 4.0), 3.0))
        self.assertAlmostEqual(report['K_F'], (math.pi / 2) ** 2, places=14)
        self.assertFalse(report['delta_ok'])
        self.assertFalse(report['cat_expected'])

    def test_flat_plane(self):
        report = hypothesis_audit(flat_plane())
        self.assertTrue(report['delta_ok'])
        self.assertEqual(report['K'], 0.0)
        self.assertTrue(report['cat_expected'])
