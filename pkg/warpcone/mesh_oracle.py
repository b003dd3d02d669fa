"""
SPDX-License-Identifier: BSD-3-Clause
Copyright (c) 2024 warpcone developers.
See LICENSE.txt for license details.

Brute-force distance oracle: shortest paths on a coordinate mesh of the cone.

Vertices are an (n_t x n_theta) grid in (t, theta) plus the tip and the two end
points. Each grid vertex is joined to the neighbours of a primitive offset
stencil, every edge weighted by the warped length of the straight coordinate
segment. Mesh distances are lengths of actual curves, so they approach the
true distance from above.
"""

import logging
import math
import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import sparse
from scipy.sparse.csgraph import dijkstra

from warpcone.errors import PreconditionError, SolverError

_min_resolution = 8
_stencil_radius = 3
_window = 3
# levels tau_i = tau_hi (i / n_t)^_grading cluster toward the tip
_grading = 1.5

_gl_nodes, _gl_weights = leggauss(3)


def stencil(radius: int = _stencil_radius):
    ''' primitive offsets (di, dj), one per undirected direction '''
    result = []
    for di in range(radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj <= 0:
                continue
            if math.gcd(di, abs(dj)) == 1:
                result.append((di, dj))
    return result


def segment_length(warp, tau_a, tau_b, dtheta):
    ''' warped length of the straight segment from (tau_a, .) to (tau_b, . + dtheta) '''
    tau_a = np.asarray(tau_a, dtype=float)[..., None]
    tau_b = np.asarray(tau_b, dtype=float)[..., None]
    dtheta = np.asarray(dtheta, dtype=float)[..., None]
    tau = tau_a + (tau_b - tau_a) * (_gl_nodes + 1) / 2
    integrand = np.sqrt((tau_b - tau_a) ** 2 + (warp.f_tau(tau) * dtheta) ** 2)
    return integrand @ _gl_weights / 2


class _Mesh:
    def __init__(self, cone, tau_hi: float, n_t: int, n_theta: int):
        self.warp = cone.f
        self.fiber = cone.fiber
        self.periodic = cone.fiber.kind == 'circle'
        self.n_t = n_t
        self.n_theta = n_theta
        self.levels = tau_hi * (np.arange(1, n_t + 1) / n_t) ** _grading
        if self.periodic:
            self.h = cone.fiber.L / n_theta
        else:
            self.h = cone.fiber.L / (n_theta - 1)
        self.columns = np.arange(n_theta) * self.h
        self.tip = n_t * n_theta
        self.n_vertices = self.tip + 1
        self.rows = []
        self.cols = []
        self.weights = []
        self.tau = np.concatenate([np.repeat(self.levels, n_theta), [0.0]])
        self.theta = np.concatenate([np.tile(self.columns, n_t), [0.0]])

    def vid(self, i, j):
        return i * self.n_theta + j

    def wrap(self, dtheta):
        ''' nearest representative of a fiber displacement '''
        if not self.periodic:
            return dtheta
        L = self.fiber.L
        return dtheta - L * np.round(dtheta / L)

    def add_edges(self, a, b, w):
        self.rows.append(np.asarray(a, dtype=np.int64).ravel())
        self.cols.append(np.asarray(b, dtype=np.int64).ravel())
        self.weights.append(np.asarray(w, dtype=float).ravel())

    def build_grid(self):
        n_t, n_theta = self.n_t, self.n_theta
        for di, dj in stencil():
            i, j = np.meshgrid(np.arange(n_t - di), np.arange(n_theta), indexing='ij')
            j2 = j + dj
            if self.periodic:
                j2 = j2 % n_theta
            else:
                inside = (j2 >= 0) & (j2 < n_theta)
                i, j, j2 = i[inside], j[inside], j2[inside]
            i, j, j2 = i.ravel(), j.ravel(), j2.ravel()
            a = self.vid(i, j)
            b = self.vid(i + di, j2)
            w = segment_length(self.warp, self.levels[i], self.levels[i + di], np.full(a.shape, dj * self.h))
            self.add_edges(a, b, w)
        # tip joined radially to the lowest ring
        ring = self.vid(0, np.arange(n_theta))
        self.add_edges(np.full(n_theta, self.tip), ring, np.full(n_theta, self.levels[0]))

    def attach(self, tau: float, theta: float) -> int:
        ''' add an end point joined to its grid window and to the tip '''
        if tau <= 0:
            return self.tip
        v = self.n_vertices
        self.n_vertices += 1
        self.tau = np.append(self.tau, tau)
        self.theta = np.append(self.theta, theta)
        i0 = int(np.argmin(np.abs(self.levels - tau)))
        j0 = int(round(theta / self.h))
        i = np.arange(max(0, i0 - _window), min(self.n_t, i0 + _window + 1))
        j = np.arange(j0 - _window, j0 + _window + 1)
        if self.periodic:
            j = np.unique(j % self.n_theta)
        else:
            j = j[(j >= 0) & (j < self.n_theta)]
        ii, jj = [g.ravel() for g in np.meshgrid(i, j, indexing='ij')]
        dtheta = self.wrap(self.columns[jj] - theta)
        self.add_edges(np.full(ii.shape, v), self.vid(ii, jj), segment_length(self.warp, tau, self.levels[ii], dtheta))
        self.add_edges([v], [self.tip], [tau])
        return v

    def graph(self):
        rows = np.concatenate(self.rows)
        cols = np.concatenate(self.cols)
        # explicit zeros would be dropped as non-edges
        weights = np.maximum(np.concatenate(self.weights), np.finfo(float).tiny)
        return sparse.csr_matrix((weights, (rows, cols)), shape=(self.n_vertices, self.n_vertices))

    def polyline(self, path, dist):
        ''' (tau, unwrapped theta, s) along a vertex path '''
        tau = self.tau[path]
        theta = np.empty(len(path))
        theta[0] = self.theta[path[0]]
        for k in range(1, len(path)):
            if path[k] == self.tip:
                theta[k] = theta[k - 1]
            else:
                # past the tip any representative will do
                ref = theta[k - 1] if path[k - 1] == self.tip else self.theta[path[k - 1]]
                theta[k] = theta[k - 1] + self.wrap(self.theta[path[k]] - ref)
        return tau, theta, dist[path]


def distance_oracle(cone, x, y, resolution=(400, 800), return_path=False):
    '''
    Mesh distance between x and y. With return_path, also the mesh path as a dict
    of arrays t, theta (unwrapped) and s.
    '''
    n_t, n_theta = resolution
    if n_t < _min_resolution or n_theta < _min_resolution:
        raise PreconditionError('resolution-too-low', f'mesh resolution {resolution}, need >= {_min_resolution}')
    cone.validate(x)
    cone.validate(y)
    tau_x, tau_y = x.t - cone.t0, y.t - cone.t0

    if cone.same_point(x, y):
        path = {'t': np.array([x.t, y.t]), 'theta': np.array([x.theta, x.theta]), 's': np.zeros(2)}
        return (0.0, path) if return_path else 0.0

    # geodesic depth is convex, so no geodesic rises above its higher end point
    tau_hi = max(tau_x, tau_y)
    mesh = _Mesh(cone, tau_hi, n_t, n_theta)
    mesh.build_grid()
    vx = mesh.attach(tau_x, x.theta)
    vy = mesh.attach(tau_y, y.theta)
    if vx != mesh.tip and vy != mesh.tip:
        mesh.add_edges([vx], [vy], segment_length(cone.f, tau_x, tau_y, mesh.wrap(y.theta - x.theta)).ravel())

    graph = mesh.graph()
    logging.debug(f'distance_oracle: {graph.shape[0]} vertices, {graph.nnz} edges')
    if return_path:
        dist, pred = dijkstra(graph, directed=False, indices=vx, return_predecessors=True)
    else:
        dist = dijkstra(graph, directed=False, indices=vx)
    length = float(dist[vy])
    if not math.isfinite(length):
        raise SolverError('solver-failure', f'mesh does not connect {x} and {y}')
    if not return_path:
        return length

    path = [vy]
    while path[-1] != vx:
        path.append(int(pred[path[-1]]))
    path.reverse()
    tau, theta, s = mesh.polyline(np.array(path), dist)
    return length, {'t': cone.t0 + tau, 'theta': theta, 's': s}
