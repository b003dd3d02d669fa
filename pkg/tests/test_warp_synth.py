"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.
"""

import math
import unittest
import numpy as np
from hypothesis import given, settings, strategies as st

from warpcone.errors import PreconditionError
from warpcone.warp_synth import (synthesize, delta_from_c, tangent_lines, LinearWarp, WarpingDescriptor,
                                 ConeWarpingFunction, check_fk_convex_ae, check_fk_convex_barrier, barrier)


class TestSynthesize(unittest.TestCase):
    def test_reference_warp(self):
        f = synthesize(1.0, 0.5)
        self.assertAlmostEqual(f.ell, 1.8423, places=4)
        self.assertAlmostEqual(f.t0, 1.0 - 1.8423, places=4)
        self.assertAlmostEqual(f.mu, 0.3665, places=4)
        self.assertAlmostEqual(f.K, -0.2375, places=4)
        self.assertAlmostEqual(f.K, -f.mu / math.cosh(1.0), places=15)

    def test_boundary_values(self):
        f = synthesize(1.0, 0.5)
        self.assertEqual(float(f.f(f.t0)), 0.0)
        self.assertAlmostEqual(float(f.df(f.t0)), 0.5, places=14)
        # C1 gluing onto cosh at b
        self.assertAlmostEqual(float(f.f(f.b)), math.cosh(1.0), places=12)
        self.assertAlmostEqual(float(f.df(f.b)), math.sinh(1.0), places=12)
        self.assertAlmostEqual(float(f.f(f.b + 1e-9)), math.cosh(1.0 + 1e-9), places=12)
        self.assertAlmostEqual(float(f.f(2.5)), math.cosh(2.5), places=12)

    def test_kink(self):
        f = synthesize(1.0, 0.5)
        self.assertTrue(math.isnan(float(f.ddf(f.b))))
        left, right = f.ddf_one_sided(f.b)
        self.assertAlmostEqual(left, f.mu, places=12)
        self.assertAlmostEqual(right, math.cosh(1.0), places=14)
        self.assertEqual(f.kink, f.ell)

    def test_increasing_and_convex(self):
        f = synthesize(0.8, 0.3)
        t = np.linspace(f.t0, f.b + 2, 4001)
        self.assertTrue(np.all(np.diff(f.f(t)) > 0))
        self.assertTrue(np.all(f.df(t) > 0))
        dd = f.ddf(t)
        self.assertTrue(np.all(dd[~np.isnan(dd)] >= f.mu - 1e-12))

    def test_increment_matches_difference(self):
        f = synthesize(1.0, 0.5)
        tau = np.array([0.0, 0.3, f.ell - 0.1, f.ell, f.ell + 0.5])
        for dtau in (1e-3, 0.2, 1.0):
            expected = f.f_tau(tau + dtau) - f.f_tau(tau)
            self.assertTrue(np.allclose(f.f_increment(tau, dtau), expected, rtol=1e-12, atol=1e-14))

    def test_errors(self):
        with self.assertRaises(PreconditionError) as cm:
            synthesize(1.0, 1.2)
        self.assertEqual(cm.exception.reason, 'slope-too-large')
        with self.assertRaises(PreconditionError) as cm:
            synthesize(1.0, math.sinh(1.0))
        self.assertEqual(cm.exception.reason, 'slope-too-large')
        with self.assertRaises(PreconditionError) as cm:
            synthesize(0.0, 0.5)
        self.assertEqual(cm.exception.reason, 'nonpositive-b')
        with self.assertRaises(PreconditionError) as cm:
            synthesize(1.0, 0.5, profile='cubic')
        self.assertEqual(cm.exception.reason, 'out-of-range')

    def test_delta_from_c(self):
        self.assertAlmostEqual(delta_from_c(2 * math.pi), 0.5, places=15)
        self.assertAlmostEqual(delta_from_c(math.pi), 1.0, places=15)
        with self.assertRaises(PreconditionError) as cm:
            delta_from_c(0)
        self.assertEqual(cm.exception.reason, 'nonpositive-c')

    def test_tangent_lines(self):
        f = synthesize(1.0, 0.5)
        lines = tangent_lines(f)
        x = lines['intersection']
        self.assertTrue(f.t0 < x < f.b)
        l0, l1 = lines['l0'], lines['l1']
        self.assertAlmostEqual(l0['slope'] * x + l0['intercept'], l1['slope'] * x + l1['intercept'], places=12)
        # f lies above both supporting lines
        t = np.linspace(f.t0, f.b, 201)
        self.assertTrue(np.all(f.f(t) >= l1['slope'] * t + l1['intercept'] - 1e-12))
        self.assertTrue(np.all(f.f(t) >= l0['slope'] * t + l0['intercept'] - 1e-12))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.2, 3.0), st.floats(0.05, 0.95))
    def test_apex_tangent_and_cosh_envelope(self, b, u):
        delta = u * math.sinh(b)
        f = synthesize(b, delta)
        t = np.linspace(f.t0, f.b + 2, 2001)
        self.assertTrue(np.all(f.f(t) >= delta * (t - f.t0) - 1e-9))
        t = np.linspace(f.t0, f.b, 2001)
        self.assertTrue(np.all(f.f(t) <= np.cosh(t) * (1 + 1e-9)))

    def test_smooth_profile(self):
        f = synthesize(1.0, 0.5, profile='smooth')
        self.assertNotEqual(f.alpha, 0.0)
        self.assertAlmostEqual(float(f.f(f.b)), math.cosh(1.0), places=12)
        self.assertAlmostEqual(float(f.df(f.b)), math.sinh(1.0), places=12)
        self.assertTrue(-1.0 <= f.K < 0)
        self.assertTrue(check_fk_convex_ae(f, f.K, n=2000).passed)


class TestCertificates(unittest.TestCase):
    def setUp(self):
        self.f = synthesize(1.0, 0.5)

    def test_ae_own_bound(self):
        cert = check_fk_convex_ae(self.f, self.f.K)
        self.assertTrue(cert.passed)
        self.assertGreaterEqual(cert['worst'], -cert['slack'])
        self.assertEqual(cert['name'], 'fk_convex_ae')
        self.assertGreater(cert['resolution'], 10000)

    def test_ae_too_negative(self):
        cert = check_fk_convex_ae(self.f, -100.0, n=2000)
        self.assertFalse(cert.passed)
        self.assertLess(cert['worst'], 0)

    def test_ae_cosh_tail(self):
        self.assertTrue(check_fk_convex_ae(self.f, -1.0, n=2000, lo=self.f.b).passed)
        self.assertFalse(check_fk_convex_ae(self.f, -1.5, n=2000, lo=self.f.b).passed)

    def test_ae_errors(self):
        with self.assertRaises(PreconditionError) as cm:
            check_fk_convex_ae(self.f, 0.5)
        self.assertEqual(cm.exception.reason, 'out-of-range')
        with self.assertRaises(PreconditionError) as cm:
            check_fk_convex_ae(self.f, -0.1, lo=2.0, hi=2.0)
        self.assertEqual(cm.exception.reason, 'degenerate-subinterval')
        with self.assertRaises(PreconditionError) as cm:
            check_fk_convex_ae(self.f, -0.1, n=1)
        self.assertEqual(cm.exception.reason, 'resolution-too-low')

    def test_barrier(self):
        f = self.f
        spans = [(f.t0, f.b), (f.b, f.b + 1)]
        self.assertTrue(check_fk_convex_barrier(f, f.K, spans).passed)
        self.assertTrue(check_fk_convex_barrier(f, f.K / 100, spans).passed)
        self.assertTrue(check_fk_convex_barrier(f, 0.0, spans).passed)
        self.assertFalse(check_fk_convex_barrier(f, f.K * 100, [(f.t0, f.b)]).passed)

    def test_barrier_endpoints(self):
        f = self.f
        g = barrier(f, -0.5, 0.0, 1.0)
        self.assertAlmostEqual(float(g(0.0)), float(f.f(0.0)), places=12)
        self.assertAlmostEqual(float(g(1.0)), float(f.f(1.0)), places=12)

    def test_barrier_errors(self):
        f = self.f
        with self.assertRaises(PreconditionError) as cm:
            check_fk_convex_barrier(f, f.K, [(0.5, 0.5)])
        self.assertEqual(cm.exception.reason, 'degenerate-subinterval')
        with self.assertRaises(PreconditionError) as cm:
            check_fk_convex_barrier(f, f.K, [(f.t0 - 1, f.b)])
        self.assertEqual(cm.exception.reason, 'out-of-range')

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.2, 3.0), st.floats(0.05, 0.95))
    def test_synthesized_warps_are_certified(self, b, u):
        f = synthesize(b, u * math.sinh(b))
        self.assertTrue(-1.0 <= f.K < 0)
        self.assertLess(f.t0, b)
        self.assertTrue(check_fk_convex_ae(f, f.K, n=1000).passed)
        self.assertTrue(check_fk_convex_barrier(f, f.K, [(f.t0, f.b)], n=401).passed)


class TestWarpingDescriptor(unittest.TestCase):
    def test_round_trip(self):
        f = synthesize(1.0, 0.5)
        d = f.descriptor()
        self.assertEqual(d['kind'], 'cone')
        g = WarpingDescriptor(d.to_dict()).build()
        self.assertIsInstance(g, ConeWarpingFunction)
        self.assertEqual(g.t0, f.t0)
        self.assertEqual(g.K, f.K)

    def test_linear(self):
        f = WarpingDescriptor({'kind': 'linear', 'delta': 2.0}).build()
        self.assertIsInstance(f, LinearWarp)
        self.assertEqual(float(f.f(1.5)), 3.0)
        self.assertEqual(f.K, 0.0)

    def test_tampered(self):
        src = synthesize(1.0, 0.5).descriptor().to_dict()
        src['K'] = -0.5
        with self.assertRaises(PreconditionError) as cm:
            WarpingDescriptor(src).build()
        self.assertEqual(cm.exception.reason, 'invalid-descriptor')

    def test_unknown_kind(self):
        with self.assertRaises(PreconditionError):
            WarpingDescriptor({'kind': 'spline', 'delta': 1.0}).build()
        with self.assertRaises(PreconditionError):
            WarpingDescriptor({'kind': 'cone', 'delta': 1.0}).build()
