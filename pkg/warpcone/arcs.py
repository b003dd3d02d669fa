"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Closed arcs on a circle of circumference L.
"""

import math
import numpy as np

from warpcone.errors import PreconditionError


def wrap(dtheta, L: float):
    ''' representative of dtheta in [-L/2, L/2) '''
    return (np.asarray(dtheta, dtype=float) + L / 2) % L - L / 2


class Arc:
    ''' Closed arc [center - half, center + half] '''

    def __init__(self, center: float, half: float, L: float):
        if not half >= 0:
            raise PreconditionError('invalid-descriptor', f'arc half length {half} must be >= 0')
        self.L = L
        self.center = center % L
        self.half = min(half, L / 2)

    @property
    def full(self) -> bool:
        return 2 * self.half >= self.L

    @property
    def length(self) -> float:
        return 2 * self.half

    @property
    def start(self) -> float:
        return self.center - self.half

    @property
    def end(self) -> float:
        return self.center + self.half

    def contains(self, theta, tol: float = 0.0):
        if self.full:
            return np.ones(np.shape(theta), dtype=bool) if np.ndim(theta) else True
        return np.abs(wrap(np.asarray(theta) - self.center, self.L)) <= self.half + tol

    def contains_arc(self, other, tol: float = 0.0) -> bool:
        if self.full:
            return True
        if other.full:
            return False
        offset = float(wrap(other.center - self.center, self.L))
        return abs(offset) + other.half <= self.half + tol

    def __repr__(self):
        return f'Arc(center={self.center}, half={self.half})'


class ArcFamily:
    ''' Disjoint union of closed arcs on one circle, ordered by start point '''

    def __init__(self, L: float, arcs=()):
        if not L > 0:
            raise PreconditionError('out-of-range', f'circle length {L} must be positive')
        self.L = float(L)
        arcs = [a if isinstance(a, Arc) else Arc(a[0], a[1], L) for a in arcs]
        if any(a.full for a in arcs):
            if len(arcs) > 1:
                raise PreconditionError('overlapping-arcs', 'a full circle arc next to other arcs')
            self.arcs = arcs
            return
        self.arcs = sorted(arcs, key=lambda a: a.start % self.L)
        gaps = self._raw_gaps()
        if any(not g > 0 for g in gaps):
            raise PreconditionError('overlapping-arcs', f'arcs {self.arcs} overlap or touch')

    @classmethod
    def from_pairs(cls, L: float, pairs):
        ''' from [center, half_length] pairs '''
        return cls(L, [Arc(c, h, L) for c, h in pairs])

    @classmethod
    def from_endpoints(cls, L: float, starts, ends):
        return cls(L, [Arc((s + e) / 2, (e - s) / 2, L) for s, e in zip(starts, ends)])

    def _raw_gaps(self):
        if not self.arcs:
            return []
        starts = np.array([a.start % self.L for a in self.arcs])
        ends = starts + np.array([a.length for a in self.arcs])
        # arc i+1 follows arc i counterclockwise, the first one follows the last
        nxt = np.append(starts[1:], starts[0] + self.L)
        return [float(g) for g in nxt - ends]

    def __len__(self):
        return len(self.arcs)

    def __iter__(self):
        return iter(self.arcs)

    @property
    def empty(self) -> bool:
        return len(self.arcs) == 0

    @property
    def full(self) -> bool:
        return len(self.arcs) == 1 and self.arcs[0].full

    def gaps(self):
        ''' complementary gap after each arc, in arc order '''
        if len(self.arcs) == 1 and self.arcs[0].full:
            return []
        return self._raw_gaps()

    def buffer_width(self) -> float:
        ''' half the shortest complementary gap; inf for empty or covering families '''
        if self.empty or self.full:
            return math.inf
        return min(self.gaps()) / 2

    def contains(self, theta, tol: float = 0.0):
        if np.ndim(theta):
            result = np.zeros(np.shape(theta), dtype=bool)
            for a in self.arcs:
                result |= a.contains(theta, tol)
            return result
        return any(a.contains(theta, tol) for a in self.arcs)

    def contains_family(self, other, tol: float = 0.0) -> bool:
        ''' every arc of other lies inside one arc of self '''
        return all(any(a.contains_arc(o, tol) for a in self.arcs) for o in other.arcs)

    def exit_distance(self, theta: float) -> float:
        ''' fiber distance from theta to the family, 0 inside '''
        if self.full:
            return 0.0
        if self.empty:
            return math.inf
        return max(0.0, min(float(abs(wrap(theta - a.center, self.L))) - a.half for a in self.arcs))

    def rotate(self, phi: float):
        return ArcFamily(self.L, [Arc(a.center + phi, a.half, self.L) for a in self.arcs])

    def endpoints(self):
        ''' (starts, ends) with starts in [0, L) and ends >= starts, in arc order '''
        starts = np.array([a.start % self.L for a in self.arcs])
        return starts, starts + np.array([a.length for a in self.arcs])

    def sample(self, rng, n: int):
        ''' n points uniform on the family '''
        if self.empty:
            raise PreconditionError('out-of-range', 'cannot sample an empty arc family')
        lengths = np.array([a.length for a in self.arcs])
        weights = lengths / lengths.sum() if lengths.sum() > 0 else np.full(len(self.arcs), 1 / len(self.arcs))
        which = rng.choice(len(self.arcs), size=n, p=weights)
        u = rng.uniform(-1, 1, n)
        return np.array([(self.arcs[k].center + u[i] * self.arcs[k].half) % self.L for i, k in enumerate(which)])

    def to_pairs(self):
        return [[a.center, a.half] for a in self.arcs]

    def __repr__(self):
        return f'ArcFamily(L={self.L}, {self.arcs})'


def match_endpoints(first, second: ArcFamily):
    '''
    Cyclic matching of equal arc counts: the shift k pairing arc i of first with
    arc i + k of second that minimizes the largest endpoint jump. first is an
    ArcFamily or a (starts, ends) pair of arrays in cyclic order. Returns (k,
    largest jump, starts, ends of second unwrapped next to those of first).
    '''
    s1, e1 = first.endpoints() if isinstance(first, ArcFamily) else first
    n = len(s1)
    if n != len(second):
        raise ValueError(f'arc counts differ: {n} != {len(second)}')
    if n == 0:
        return 0, 0.0, np.array([]), np.array([])
    s2, e2 = second.endpoints()
    best = None
    for k in range(n):
        ds = wrap(np.roll(s2, -k) - s1, second.L)
        de = wrap(np.roll(e2, -k) - e1, second.L)
        jump = float(max(np.max(np.abs(ds)), np.max(np.abs(de))))
        if best is None or jump < best[1]:
            best = (k, jump, s1 + ds, e1 + de)
    return best
