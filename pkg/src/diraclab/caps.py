"""Angular cap decompositions of the sphere and the dyadic Whitney pair walk.

Cap families are sharp nested partitions: level j has arcs of width 2*pi/2^j
on the circle (d=2), and 2^j polar bands times 2^(j+1) longitude sectors on
the 2-sphere (d=3).  Level 0 is the single trivial cap.  Nesting (each cap is
the disjoint union of its children one level down) is what makes the Whitney
pair assignment an exact partition of direction pairs.
"""

from __future__ import annotations

import math

import numpy as np


def angle_metric(v, w):
    """The angle functional sqrt(1 - cos) between unit vectors (paper-style)."""
    dot = np.clip(np.sum(np.asarray(v) * np.asarray(w), axis=-1), -1.0, 1.0)
    return np.sqrt(np.maximum(1.0 - dot, 0.0))


def angle_between(xi, eta):
    """angle_metric for not-necessarily-unit vectors; undefined at zero vectors."""
    xi = np.asarray(xi, dtype=float)
    eta = np.asarray(eta, dtype=float)
    nx = np.linalg.norm(xi, axis=-1)
    ny = np.linalg.norm(eta, axis=-1)
    dot = np.sum(xi * eta, axis=-1) / (nx * ny)
    return np.sqrt(np.maximum(1.0 - np.clip(dot, -1.0, 1.0), 0.0))


class CapFamily:
    """Finitely overlapping (here: disjoint) caps of dyadic angular scale 2^-level."""

    def __init__(self, dim, level):
        if dim not in (2, 3):
            raise ValueError("cap families exist for d=2,3 only")
        if level < 0:
            raise ValueError("level must be >= 0")
        self.dim = dim
        self.level = level
        if level == 0:
            self.ncaps = 1
        elif dim == 2:
            self.ncaps = 2**level
        else:
            self.nbands = 2**level
            self.nsectors = 2 ** (level + 1)
            self.ncaps = self.nbands * self.nsectors

    @property
    def alpha(self):
        return 2.0**-self.level

    def index_of(self, dirs):
        """Cap index for an array of unit direction vectors, shape (..., d)."""
        dirs = np.asarray(dirs, dtype=float)
        if self.level == 0:
            return np.zeros(dirs.shape[:-1], dtype=int)
        if self.dim == 2:
            theta = np.mod(np.arctan2(dirs[..., 1], dirs[..., 0]), 2 * np.pi)
            width = 2 * np.pi / self.ncaps
            return np.minimum((theta / width).astype(int), self.ncaps - 1)
        theta = np.arccos(np.clip(dirs[..., 2], -1.0, 1.0))
        band = np.minimum((theta / (np.pi / self.nbands)).astype(int), self.nbands - 1)
        phi = np.mod(np.arctan2(dirs[..., 1], dirs[..., 0]), 2 * np.pi)
        sector = np.minimum((phi / (2 * np.pi / self.nsectors)).astype(int), self.nsectors - 1)
        return band * self.nsectors + sector

    def center(self, k):
        """Unit vector at the center of cap k."""
        if self.level == 0:
            return np.array([1.0] + [0.0] * (self.dim - 1))
        if self.dim == 2:
            theta = (k + 0.5) * 2 * np.pi / self.ncaps
            return np.array([np.cos(theta), np.sin(theta)])
        band, sector = divmod(k, self.nsectors)
        theta = (band + 0.5) * np.pi / self.nbands
        phi = (sector + 0.5) * 2 * np.pi / self.nsectors
        return np.array([np.sin(theta) * np.cos(phi), np.sin(theta) * np.sin(phi), np.cos(theta)])

    def children(self, k):
        """Cap indices one level finer whose union is cap k."""
        if self.level == 0:
            child = CapFamily(self.dim, 1)
            return list(range(child.ncaps))
        if self.dim == 2:
            return [2 * k, 2 * k + 1]
        band, sector = divmod(k, self.nsectors)
        ns = 2 * self.nsectors
        return [
            (2 * band + db) * ns + (2 * sector + ds) for db in (0, 1) for ds in (0, 1)
        ]

    def adjacent(self, k1, k2):
        """True if caps k1, k2 share a boundary point (includes k1 == k2)."""
        if self.level == 0:
            return True
        if self.dim == 2:
            dist = abs(k1 - k2) % self.ncaps
            return min(dist, self.ncaps - dist) <= 1
        b1, s1 = divmod(k1, self.nsectors)
        b2, s2 = divmod(k2, self.nsectors)
        if (b1 == 0 and b2 == 0) or (b1 == self.nbands - 1 and b2 == self.nbands - 1):
            return True  # polar cells all meet at the pole
        sdist = abs(s1 - s2) % self.nsectors
        return abs(b1 - b2) <= 1 and min(sdist, self.nsectors - sdist) <= 1

    def cap_angle(self, k1, k2):
        """angle_metric between the centers of caps k1, k2."""
        return float(angle_metric(self.center(k1), self.center(k2)))


class MetricCap:
    """A free-standing cap {w : angle_metric(w, center) <= radius} on S^{d-1}."""

    def __init__(self, center, radius):
        center = np.asarray(center, dtype=float)
        self.center = center / np.linalg.norm(center)
        self.radius = float(radius)

    def contains(self, dirs):
        return angle_metric(np.asarray(dirs), self.center) <= self.radius


def whitney_stop_level(m, lam, mu, max_level):
    """Finest dyadic level of the Whitney walk.

    The mass floor |m| / <min(lam, mu)>_m truncates the decomposition: for
    scales below the floor the pair sets are empty, and at the floor scale the
    not-yet-separated pairs are collected (the paper's alpha ~ m-term regime).
    With m = 0 the walk descends to max_level.
    """
    if m == 0:
        return max_level
    lo = min(lam, mu)
    m_term = abs(m) / math.hypot(m, lo)
    level = int(math.floor(math.log2(1.0 / m_term))) if m_term < 1.0 else 0
    return max(1, min(max_level, level))


def whitney_pairs(dim, m, lam, mu, max_level=5):
    """Dyadic Whitney assignment of cap pairs, coarse to fine.

    Returns {level: list of (k1, k2)} where level j corresponds to the cap
    family CapFamily(dim, j).  A pair of caps is assigned at the first level
    at which the caps separate (stop being adjacent); at the stop level all
    remaining pairs are collected, so the union over levels tiles the set of
    direction pairs exactly once.
    """
    j_stop = whitney_stop_level(m, lam, mu, max_level)
    frontier = [(0, 0)]
    out = {}
    for level in range(1, j_stop + 1):
        parent = CapFamily(dim, level - 1)
        fam = CapFamily(dim, level)
        assigned = []
        next_frontier = []
        for (p1, p2) in frontier:
            for c1 in parent.children(p1):
                for c2 in parent.children(p2):
                    if level == j_stop:
                        assigned.append((c1, c2))
                    elif not fam.adjacent(c1, c2):
                        assigned.append((c1, c2))
                    else:
                        next_frontier.append((c1, c2))
        if assigned:
            out[level] = assigned
        frontier = next_frontier
    return out
