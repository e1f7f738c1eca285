"""Domains, boundary quadrature, interior quadrature and source placement.

Shapes: ``Disk`` and ``Ball`` (analytic), plus ``SmoothCurve2D`` given as a
closed table of boundary samples (assumed counter-clockwise, C2, and
star-shaped about its centroid for interior quadrature).
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDomain, InvalidDilation

DELTA_SRC_FACTOR = 1e-3  # minimum source clearance, as a fraction of diameter
BOUNDARY_TOL = 1e-10


@dataclass(frozen=True)
class Disk:
    center: tuple = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise DegenerateDomain("disk radius must be positive")


@dataclass(frozen=True)
class Ball:
    center: tuple = (0.0, 0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise DegenerateDomain("ball radius must be positive")


@dataclass(frozen=True)
class SmoothCurve2D:
    """Closed boundary sampled equispaced in parameter, CCW orientation."""

    nodes: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def __post_init__(self):
        pts = np.asarray(self.nodes, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2 or len(pts) < 8:
            raise DegenerateDomain("curve table needs >= 8 planar samples")
        from shapely.geometry import LinearRing
        ring = LinearRing(pts)
        if not ring.is_simple or ring.is_ccw is False:
            raise DegenerateDomain("curve table must be simple and CCW")
        object.__setattr__(self, "nodes", pts)


def ndim(domain):
    return 3 if isinstance(domain, Ball) else 2


def centroid(domain):
    if isinstance(domain, (Disk, Ball)):
        return np.asarray(domain.center, dtype=np.float64)
    return np.mean(domain.nodes, axis=0)


def diameter(domain):
    if isinstance(domain, (Disk, Ball)):
        return 2.0 * domain.radius
    d = domain.nodes - centroid(domain)
    return 2.0 * float(np.max(np.linalg.norm(d, axis=1)))


@dataclass(frozen=True)
class BoundaryQuadrature:
    nodes: np.ndarray    # (n, ndim)
    normals: np.ndarray  # (n, ndim), outward unit
    weights: np.ndarray  # (n,), positive


def _resample_closed(table, n):
    """Periodic linear resampling of a closed sample table in index space."""
    m = len(table)
    t = np.arange(n) * m / n
    i0 = np.floor(t).astype(int) % m
    i1 = (i0 + 1) % m
    frac = (t - np.floor(t))[:, None]
    return table[i0] * (1 - frac) + table[i1] * frac


def build_boundary_quadrature(domain, node_count):
    """Equispaced-in-parameter boundary rule; exact on constants.

    Disk/curve: trapezoid rule.  Ball: Gauss-Legendre in latitude times
    trapezoid in longitude, with ``node_count`` interpreted as the total
    grid size (n_theta * 2n_theta).
    """
    if node_count < 8:
        raise ValueError("node_count must be >= 8")
    if isinstance(domain, Disk):
        c = centroid(domain)
        theta = 2 * np.pi * np.arange(node_count) / node_count
        normals = np.column_stack([np.cos(theta), np.sin(theta)])
        nodes = c + domain.radius * normals
        weights = np.full(node_count, 2 * np.pi * domain.radius / node_count)
        return BoundaryQuadrature(nodes, normals, weights)
    if isinstance(domain, Ball):
        c = centroid(domain)
        n_theta = max(4, round(math.sqrt(node_count / 2)))
        n_phi = 2 * n_theta
        mu, w_mu = np.polynomial.legendre.leggauss(n_theta)  # mu = cos(theta)
        phi = 2 * np.pi * np.arange(n_phi) / n_phi
        mu_g, phi_g = np.meshgrid(mu, phi, indexing="ij")
        sin_t = np.sqrt(1 - mu_g**2)
        normals = np.column_stack([
            (sin_t * np.cos(phi_g)).ravel(),
            (sin_t * np.sin(phi_g)).ravel(),
            mu_g.ravel(),
        ])
        nodes = c + domain.radius * normals
        weights = (domain.radius**2 * np.outer(w_mu, np.full(n_phi, 2 * np.pi / n_phi))).ravel()
        return BoundaryQuadrature(nodes, normals, weights)
    # sampled curve: trapezoid in parameter with spectral-difference tangents
    pts = _resample_closed(domain.nodes, node_count)
    n = len(pts)
    dt = 2 * np.pi / n
    tangent = (np.roll(pts, -1, axis=0) - np.roll(pts, 1, axis=0)) / (2 * dt)
    speed = np.linalg.norm(tangent, axis=1)
    if np.any(speed <= 0):
        raise DegenerateDomain("degenerate tangent in curve table")
    normals = np.column_stack([tangent[:, 1], -tangent[:, 0]]) / speed[:, None]
    return BoundaryQuadrature(pts, normals, speed * dt)


def boundary_normal_at(domain, x):
    """Outward unit normal at a boundary point (nearest node for curves)."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(domain, (Disk, Ball)):
        d = x - centroid(domain)
        r = np.linalg.norm(d)
        if r == 0:
            raise ValueError("point is the center, not a boundary point")
        return d / r
    bq = build_boundary_quadrature(domain, len(domain.nodes))
    i = int(np.argmin(np.linalg.norm(bq.nodes - x, axis=1)))
    return bq.normals[i]


def contains(domain, x, tol=BOUNDARY_TOL):
    """True iff x is strictly inside D (boundary within tol reports False)."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(domain, (Disk, Ball)):
        return bool(np.linalg.norm(x - centroid(domain)) < domain.radius - tol)
    from shapely.geometry import Point, Polygon
    poly = Polygon(domain.nodes)
    p = Point(x)
    return bool(poly.contains(p) and poly.exterior.distance(p) > tol)


def distance_to_boundary(domain, x):
    x = np.asarray(x, dtype=np.float64)
    if isinstance(domain, (Disk, Ball)):
        return abs(float(np.linalg.norm(x - centroid(domain))) - domain.radius)
    from shapely.geometry import LinearRing, Point
    return float(LinearRing(domain.nodes).distance(Point(x)))


def _fibonacci_sphere(count):
    """Spiral points on the unit sphere (deterministic, well separated)."""
    i = np.arange(count) + 0.5
    mu = 1 - 2 * i / count
    golden = np.pi * (3 - math.sqrt(5))
    phi = golden * np.arange(count)
    sin_t = np.sqrt(1 - mu**2)
    return np.column_stack([sin_t * np.cos(phi), sin_t * np.sin(phi), mu])


def place_sources(domain, count, rho, phase=0.0):
    """Sources on the boundary dilated about the centroid by factor rho.

    ``phase`` rotates the equispaced parameters (used for seeded re-placement
    when a source configuration lands near the degeneracy set).
    """
    if rho <= 1.0:
        raise InvalidDilation(f"dilation factor must exceed 1, got {rho}")
    if count < 1:
        raise ValueError("count must be >= 1")
    c = centroid(domain)
    if isinstance(domain, Disk):
        theta = 2 * np.pi * np.arange(count) / count + phase
        ring = np.column_stack([np.cos(theta), np.sin(theta)])
        return c + rho * domain.radius * ring
    if isinstance(domain, Ball):
        pts = _fibonacci_sphere(count)
        if phase:
            cp, sp = math.cos(phase), math.sin(phase)
            rot = np.array([[cp, -sp, 0], [sp, cp, 0], [0, 0, 1]])
            pts = pts @ rot.T
        return c + rho * domain.radius * pts
    t = (np.arange(count) / count + phase / (2 * np.pi)) % 1.0
    m = len(domain.nodes)
    idx_table = _resample_closed(domain.nodes, max(m, 4 * count))
    samples = _resample_closed(idx_table, len(idx_table))  # no-op, keeps table dense
    tt = t * len(samples)
    i0 = np.floor(tt).astype(int) % len(samples)
    i1 = (i0 + 1) % len(samples)
    frac = (tt - np.floor(tt))[:, None]
    bpts = samples[i0] * (1 - frac) + samples[i1] * frac
    return c + rho * (bpts - c)


def min_source_clearance(domain):
    return DELTA_SRC_FACTOR * diameter(domain)


def interior_quadrature(domain, radial=64, angular=64):
    """Tensor quadrature of the interior: (nodes, weights).

    Polar (disk), spherical (ball) or star-shaped radial scaling (curve),
    Gauss-Legendre in the radial factor.
    """
    s, w_s = np.polynomial.legendre.leggauss(radial)
    s = 0.5 * (s + 1)          # radial parameter on (0, 1)
    w_s = 0.5 * w_s
    c = centroid(domain)
    if isinstance(domain, Disk):
        R = domain.radius
        theta = 2 * np.pi * np.arange(angular) / angular
        ring = np.column_stack([np.cos(theta), np.sin(theta)])
        nodes = c + (R * s[:, None, None]) * ring[None, :, :]
        weights = (R**2 * s * w_s)[:, None] * np.full(angular, 2 * np.pi / angular)
        return nodes.reshape(-1, 2), weights.ravel()
    if isinstance(domain, Ball):
        R = domain.radius
        sphere = build_boundary_quadrature(
            Ball((0, 0, 0), 1.0), max(2 * angular**2 // 2, 32))
        nodes = c + (R * s[:, None, None]) * sphere.nodes[None, :, :]
        weights = (R**3 * s**2 * w_s)[:, None] * sphere.weights[None, :]
        return nodes.reshape(-1, 3), weights.ravel()
    bq = build_boundary_quadrature(domain, angular)
    rel = bq.nodes - c
    # area element of x = c + s*rel(t): |cross(rel, d rel/dt)| * s ds dt
    dt = 2 * np.pi / angular
    drel = (np.roll(rel, -1, axis=0) - np.roll(rel, 1, axis=0)) / (2 * dt)
    jac = np.abs(rel[:, 0] * drel[:, 1] - rel[:, 1] * drel[:, 0])
    nodes = c + s[:, None, None] * rel[None, :, :]
    weights = (s * w_s)[:, None] * (jac * dt)[None, :]
    return nodes.reshape(-1, 2), weights.ravel()


def domain_from_config(cfg):
    """Build a domain from its JSON description."""
    shape = cfg["shape"]
    if shape == "disk":
        return Disk(tuple(cfg.get("center", (0.0, 0.0))), float(cfg.get("radius", 1.0)))
    if shape == "ball":
        return Ball(tuple(cfg.get("center", (0.0, 0.0, 0.0))), float(cfg.get("radius", 1.0)))
    if shape == "curve":
        return SmoothCurve2D(np.asarray(cfg["nodes"], dtype=np.float64))
    raise DegenerateDomain(f"unknown shape {shape!r}")
