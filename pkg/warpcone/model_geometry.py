"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Trigonometry of the model plane M_kappa of constant curvature kappa.

All formulas go through the generalized sine S_k(x) = sin(sqrt(k) x) / sqrt(k)
(sinh for negative k, the identity for k = 0), so they are continuous in kappa
and exact at kappa = 0. The law of cosines is used in its half-versine form

    V(c) = V(a - b) + 2 S(a) S(b) sin^2(gamma / 2),   V(x) = 2 S(x / 2)^2

which stays well conditioned for thin triangles.
"""

import math

from warpcone.errors import PreconditionError

# relative slack on the triangle inequality
_triangle_slack = 1e-9


def _sn(kappa: float, x: float) -> float:
    if kappa > 0:
        r = math.sqrt(kappa)
        return math.sin(r * x) / r
    elif kappa < 0:
        r = math.sqrt(-kappa)
        return math.sinh(r * x) / r
    return x


def _asn(kappa: float, y: float) -> float:
    ''' inverse of _sn on [0, diameter / 2] '''
    if kappa > 0:
        r = math.sqrt(kappa)
        return math.asin(min(1.0, r * y)) / r
    elif kappa < 0:
        r = math.sqrt(-kappa)
        return math.asinh(r * y) / r
    return y


def model_diameter(kappa: float) -> float:
    return math.pi / math.sqrt(kappa) if kappa > 0 else math.inf


def _check_lengths(*sides):
    for x in sides:
        if not x >= 0 or math.isinf(x):
            raise PreconditionError('invalid-triangle', f'side length {x} is not a finite nonnegative number')


def _check_diameter(kappa, *sides):
    diam = model_diameter(kappa)
    for x in sides:
        if x >= diam:
            raise PreconditionError('diameter-exceeded', f'side {x} >= pi/sqrt(kappa) = {diam}')


def _check_triangle(a, b, c):
    slack = _triangle_slack * (a + b + c)
    if a > b + c + slack or b > a + c + slack or c > a + b + slack:
        raise PreconditionError('invalid-triangle', f'sides ({a}, {b}, {c}) violate the triangle inequality')


def model_angle(kappa: float, a: float, b: float, c: float) -> float:
    ''' Angle opposite side c in the model triangle with sides a, b, c '''
    _check_lengths(a, b, c)
    _check_triangle(a, b, c)
    _check_diameter(kappa, a, b, c)
    if a == 0 or b == 0:
        raise PreconditionError('degenerate-vertex', 'angle between a zero-length side and another side')
    # V(c) - V(|a-b|) = 2 S((c+d)/2) S((c-d)/2)
    d = abs(a - b)
    hav = _sn(kappa, (c + d) / 2) * _sn(kappa, (c - d) / 2) / (_sn(kappa, a) * _sn(kappa, b))
    hav = min(1.0, max(0.0, hav))
    return 2 * math.asin(math.sqrt(hav))


def model_chord(kappa: float, a: float, b: float, gamma: float) -> float:
    ''' Side opposite the angle gamma between sides a and b '''
    _check_lengths(a, b)
    _check_diameter(kappa, a, b)
    if not 0 <= gamma <= math.pi + 1e-12:
        raise PreconditionError('out-of-range', f'angle {gamma} not in [0, pi]')
    half_d = _sn(kappa, abs(a - b) / 2)
    v_half = half_d ** 2 + _sn(kappa, a) * _sn(kappa, b) * math.sin(min(gamma, math.pi) / 2) ** 2
    return 2 * _asn(kappa, math.sqrt(max(0.0, v_half)))


class ModelPoint:
    ''' Point of the model plane, polar coordinates (r, phi) about a fixed origin '''

    def __init__(self, kappa: float, r: float, phi: float):
        self.kappa = kappa
        self.r = r
        self.phi = phi

    def distance(self, other) -> float:
        if other.kappa != self.kappa:
            raise ValueError('points live in model planes of different curvature')
        dphi = abs(self.phi - other.phi)
        if dphi > math.pi:
            dphi = 2 * math.pi - dphi
        return model_chord(self.kappa, self.r, other.r, dphi)

    def __repr__(self):
        return f'ModelPoint(kappa={self.kappa}, r={self.r}, phi={self.phi})'


class ModelTriangle:
    '''
    Triangle in the model plane with vertices A, B, C opposite the sides a, b, c.

    Embedding: C at the origin, A on the ray phi = 0 at distance b, B at distance
    a on the ray at the angle of C. Side a runs from B to C, side b from A to C,
    side c from A to B.
    '''

    def __init__(self, kappa: float, a: float, b: float, c: float):
        _check_lengths(a, b, c)
        _check_triangle(a, b, c)
        _check_diameter(kappa, a, b, c)
        if kappa > 0 and a + b + c >= 2 * model_diameter(kappa):
            raise PreconditionError('diameter-exceeded', f'perimeter {a + b + c} >= 2 pi/sqrt(kappa)')
        self.kappa = kappa
        self.a = a
        self.b = b
        self.c = c
        self._gamma = model_angle(kappa, a, b, c) if a > 0 and b > 0 else 0.0
        self._angle_a = model_angle(kappa, b, c, a) if b > 0 and c > 0 else 0.0

    @property
    def perimeter(self) -> float:
        return self.a + self.b + self.c

    def angle(self, vertex: str) -> float:
        if vertex == 'A':
            return model_angle(self.kappa, self.b, self.c, self.a)
        elif vertex == 'B':
            return model_angle(self.kappa, self.a, self.c, self.b)
        elif vertex == 'C':
            return model_angle(self.kappa, self.a, self.b, self.c)
        raise ValueError(f'unknown vertex {vertex!r}')

    def vertex(self, name: str) -> ModelPoint:
        return {
            'A': ModelPoint(self.kappa, self.b, 0.0),
            'B': ModelPoint(self.kappa, self.a, self._gamma),
            'C': ModelPoint(self.kappa, 0.0, 0.0),
        }[name]

    def point(self, side: str, s: float) -> ModelPoint:
        ''' point at arc-length fraction s along a side, in its stated direction '''
        if not 0 <= s <= 1:
            raise PreconditionError('out-of-range', f'fraction {s} not in [0, 1]')
        if side == 'a':
            return ModelPoint(self.kappa, (1 - s) * self.a, self._gamma)
        elif side == 'b':
            return ModelPoint(self.kappa, (1 - s) * self.b, 0.0)
        elif side == 'c':
            sc = s * self.c
            if self.c == 0:
                return ModelPoint(self.kappa, self.b, 0.0)
            if self.b == 0:
                return ModelPoint(self.kappa, sc, 0.0)
            r = model_chord(self.kappa, self.b, sc, self._angle_a)
            phi = model_angle(self.kappa, self.b, r, sc) if r > 0 and sc > 0 else 0.0
            return ModelPoint(self.kappa, r, min(phi, self._gamma))
        raise ValueError(f'unknown side {side!r}')

    def __repr__(self):
        return f'ModelTriangle(kappa={self.kappa}, a={self.a}, b={self.b}, c={self.c})'


def comparison_point(kappa: float, triangle: ModelTriangle, side: str, s: float) -> ModelPoint:
    ''' Comparison point at fraction s along a side of the comparison triangle in M_kappa '''
    if kappa != triangle.kappa:
        triangle = ModelTriangle(kappa, triangle.a, triangle.b, triangle.c)
    return triangle.point(side, s)
