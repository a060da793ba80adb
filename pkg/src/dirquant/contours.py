"""Quantile regions and contours in the plane (k = 2).

A fitted hyperplane for direction u maps to the closed upper halfplane
(u - Gamma beta_y)' y >= alpha + beta_x' x0; intersecting those halfplanes
over a grid of directions yields the depth region whose boundary is the
quantile contour.  Intersection uses the classic angular-sweep deque
algorithm over directed boundary lines with the feasible side on the left.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import constants
from .ald import HyperplaneParams
from .errors import DomainError, NumericalError, ShapeError, UnboundedRegionError
from .geometry import Dataset, Direction, OrthoBasis, orthonormal_complement, unit_directions
from .optimize import frequentist_fit
from .samplers import (
    KernelSpec,
    PriorSpec,
    gibbs_conditional,
    gibbs_simultaneous,
    gibbs_unconditional,
    make_conditional_design,
    project,
)
from .inference import posterior_mean

__all__ = [
    "Halfplane",
    "ContourPolygon",
    "to_upper_halfplane",
    "intersect_halfplanes",
    "tau_contour",
    "tukey_depth",
    "tube_slice",
    "polygon_area",
    "polygon_contains",
]


@dataclass(frozen=True)
class Halfplane:
    """Closed region {y in R^2 : normal' y >= offset}."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        normal = np.asarray(self.normal, dtype=float)
        object.__setattr__(self, "normal", normal)
        if normal.shape != (2,):
            raise ShapeError("halfplane normal must be a 2-vector")
        if not np.all(np.isfinite(normal)) or np.linalg.norm(normal) <= 0:
            raise DomainError("halfplane normal must be finite and nonzero")

    def contains(self, point, tol: float = 0.0) -> bool:
        return float(self.normal @ np.asarray(point, dtype=float)) >= self.offset - tol


@dataclass(frozen=True)
class ContourPolygon:
    """Convex polygon (counterclockwise vertex ring); empty vertex list = empty region."""

    vertices: np.ndarray
    tau: float
    n_directions: int

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float).reshape(-1, 2)
        object.__setattr__(self, "vertices", v)

    @property
    def is_empty(self) -> bool:
        return self.vertices.shape[0] == 0


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if v.shape[0] < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_contains(polygon: ContourPolygon, point, tol: float = 1e-9) -> bool:
    """Membership in a convex counterclockwise polygon via edge cross products."""
    v = polygon.vertices
    if v.shape[0] < 3:
        return False
    p = np.asarray(point, dtype=float)
    nxt = np.roll(v, -1, axis=0)
    edge = nxt - v
    rel = p - v
    cross = edge[:, 0] * rel[:, 1] - edge[:, 1] * rel[:, 0]
    scale = np.maximum(np.linalg.norm(edge, axis=1), 1e-300)
    return bool(np.all(cross >= -tol * scale))


def to_upper_halfplane(
    theta: HyperplaneParams,
    direction: Direction,
    basis: OrthoBasis,
    x_eval=None,
) -> Halfplane:
    """Rewrite a fitted hyperplane as the closed upper halfplane it bounds."""
    if direction.k != 2:
        raise DomainError("halfplane mapping is defined for k = 2")
    normal = direction.u - basis.gamma @ theta.beta_y
    if np.linalg.norm(normal) <= constants.DET_EPS:
        raise NumericalError("slopes make the hyperplane normal degenerate")
    offset = theta.alpha
    if theta.beta_x.size:
        if x_eval is None:
            raise DomainError("x_eval is required when covariate slopes are present")
        offset = float(theta.alpha + np.dot(theta.beta_x, np.atleast_1d(x_eval)))
    return Halfplane(normal=normal, offset=float(offset))


def _line_point(h: Halfplane) -> np.ndarray:
    n2 = float(h.normal @ h.normal)
    return h.normal * (h.offset / n2)


def _line_dir(h: Halfplane) -> np.ndarray:
    # feasible side lies to the left of the directed boundary line
    return np.array([h.normal[1], -h.normal[0]])


def _cross(a, b) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def _intersect_lines(h1: Halfplane, h2: Halfplane) -> np.ndarray:
    d1, d2 = _line_dir(h1), _line_dir(h2)
    p1, p2 = _line_point(h1), _line_point(h2)
    denom = _cross(d1, d2)
    if abs(denom) <= constants.DET_EPS:
        raise NumericalError("parallel boundary lines do not intersect")
    t = _cross(p2 - p1, d2) / denom
    return p1 + t * d1


def intersect_halfplanes(planes, tau: float = float("nan"), n_directions: int | None = None) -> ContourPolygon:
    """Intersection of closed halfplanes as a convex polygon.

    An empty intersection is a legal outcome and returns an empty polygon;
    an unbounded intersection raises UnboundedRegionError.
    """
    planes = list(planes)
    if len(planes) < 3:
        raise ShapeError("need at least 3 halfplanes")
    box = constants.BOUNDING_BOX
    padded = planes + [
        Halfplane(normal=np.array([1.0, 0.0]), offset=-box),
        Halfplane(normal=np.array([-1.0, 0.0]), offset=-box),
        Halfplane(normal=np.array([0.0, 1.0]), offset=-box),
        Halfplane(normal=np.array([0.0, -1.0]), offset=-box),
    ]

    def angle(h):
        d = _line_dir(h)
        a = np.arctan2(d[1], d[0])
        if a >= np.pi - 1e-12:  # keep the +/- pi seam on one side
            a -= 2.0 * np.pi
        return a

    padded.sort(key=angle)
    # among parallel same-direction halfplanes keep the most binding one
    kept = []
    for h in padded:
        if kept and abs(angle(kept[-1]) - angle(h)) <= 1e-15:
            nk = np.linalg.norm(kept[-1].normal)
            nh = np.linalg.norm(h.normal)
            if h.offset / nh > kept[-1].offset / nk:
                kept[-1] = h
            continue
        kept.append(h)

    def violates(h: Halfplane, a: Halfplane, b: Halfplane) -> bool:
        try:
            pt = _intersect_lines(a, b)
        except NumericalError:
            return True
        return float(h.normal @ pt) < h.offset - constants.DET_EPS * max(
            1.0, abs(h.offset)
        )

    dq: deque = deque()
    for h in kept:
        while len(dq) >= 2 and violates(h, dq[-1], dq[-2]):
            dq.pop()
        while len(dq) >= 2 and violates(h, dq[0], dq[1]):
            dq.popleft()
        if dq:
            d_new, d_last = _line_dir(h), _line_dir(dq[-1])
            if abs(_cross(d_last, d_new)) <= constants.DET_EPS and d_last @ d_new < 0:
                # antiparallel pair: empty strip unless they overlap
                mid = _line_point(dq[-1])
                if float(h.normal @ mid) < h.offset:
                    return ContourPolygon(
                        vertices=np.zeros((0, 2)), tau=tau, n_directions=n_directions or len(planes)
                    )
        dq.append(h)
    while len(dq) >= 3 and violates(dq[0], dq[-1], dq[-2]):
        dq.pop()
    while len(dq) >= 3 and violates(dq[-1], dq[0], dq[1]):
        dq.popleft()
    if len(dq) < 3:
        return ContourPolygon(vertices=np.zeros((0, 2)), tau=tau, n_directions=n_directions or len(planes))

    lines = list(dq)
    verts = []
    for a, b in zip(lines, lines[1:] + lines[:1]):
        try:
            verts.append(_intersect_lines(a, b))
        except NumericalError:
            continue
    verts = np.array(verts)
    if verts.shape[0] == 0:
        return ContourPolygon(vertices=np.zeros((0, 2)), tau=tau, n_directions=n_directions or len(planes))

    # deduplicate consecutive vertices
    keep = [0]
    for i in range(1, verts.shape[0]):
        if np.linalg.norm(verts[i] - verts[keep[-1]]) > constants.VERTEX_DEDUP_TOL:
            keep.append(i)
    if len(keep) > 1 and np.linalg.norm(verts[keep[-1]] - verts[keep[0]]) <= constants.VERTEX_DEDUP_TOL:
        keep.pop()
    verts = verts[keep]
    if np.max(np.abs(verts)) >= 0.5 * box:
        raise UnboundedRegionError("halfplane intersection is unbounded")
    if verts.shape[0] < 3 or polygon_area(verts) <= 0.0:
        return ContourPolygon(vertices=np.zeros((0, 2)), tau=tau, n_directions=n_directions or len(planes))
    return ContourPolygon(vertices=verts, tau=tau, n_directions=n_directions or len(planes))


def _direction_seed(seed: int, index: int) -> int:
    return int(np.random.SeedSequence((int(seed), int(index))).generate_state(1)[0])


def tau_contour(
    data: Dataset,
    tau: float,
    n_directions: int = constants.DEFAULT_N_DIRECTIONS,
    estimator: str = "bayes-mean",
    prior: PriorSpec | None = None,
    n_draws: int = constants.DEFAULT_N_DRAWS,
    burn_in: int = constants.DEFAULT_BURN_IN,
    seed: int = 0,
    simultaneous: bool = False,
    x_eval=None,
) -> ContourPolygon:
    """Quantile contour from one hyperplane fit per grid direction.

    ``estimator`` selects posterior means from per-direction chains
    (``"bayes-mean"``, independent chains by default, jointly sampled when
    ``simultaneous=True``) or deterministic check-loss fits
    (``"frequentist"``).
    """
    if data.k != 2:
        raise DomainError("contours are computed for k = 2 only")
    if estimator not in ("bayes-mean", "frequentist"):
        raise DomainError(f"unknown estimator {estimator!r}")
    dirs = [Direction(u=u, tau=tau) for u in unit_directions(n_directions)]
    bases = [orthonormal_complement(d.u) for d in dirs]
    d_block = data.k + data.p

    thetas = []
    if estimator == "frequentist":
        for direction, basis in zip(dirs, bases):
            thetas.append(frequentist_fit(data, direction, basis=basis).theta)
    elif simultaneous:
        if prior is None:
            prior = PriorSpec(
                mean=np.zeros(d_block * n_directions),
                covariance=1000.0 * np.eye(d_block * n_directions),
            )
        chain = gibbs_simultaneous(
            data, dirs, prior, n_draws=n_draws, burn_in=burn_in, seed=seed, bases=bases
        )
        vec = chain.post_burn().mean(axis=0)
        for m in range(n_directions):
            thetas.append(
                HyperplaneParams.from_vector(vec[m * d_block : (m + 1) * d_block], data.k, data.p)
            )
    else:
        if prior is None:
            prior = PriorSpec(mean=np.zeros(d_block), covariance=1000.0 * np.eye(d_block))
        for idx, (direction, basis) in enumerate(zip(dirs, bases)):
            chain = gibbs_unconditional(
                data,
                direction,
                prior,
                n_draws=n_draws,
                burn_in=burn_in,
                seed=_direction_seed(seed, idx),
                basis=basis,
            )
            thetas.append(posterior_mean(chain))

    planes = [
        to_upper_halfplane(theta, direction, basis, x_eval=x_eval)
        for theta, direction, basis in zip(thetas, dirs, bases)
    ]
    return intersect_halfplanes(planes, tau=tau, n_directions=n_directions)


def tukey_depth(point, data: Dataset, n_directions: int = constants.DEFAULT_N_DIRECTIONS) -> float:
    """Directional approximation (from above) of the halfspace depth of a point."""
    if data.k != 2:
        raise DomainError("depth queries are computed for k = 2 only")
    point = np.asarray(point, dtype=float)
    best = 1.0
    for u in unit_directions(n_directions):
        mass = float(np.mean(data.y @ u <= float(u @ point)))
        best = min(best, mass)
    return best


def tube_slice(
    data: Dataset,
    tau: float,
    x0,
    kernel: KernelSpec,
    design_kind: str = "local-constant",
    n_directions: int = constants.DEFAULT_N_DIRECTIONS,
    prior: PriorSpec | None = None,
    n_draws: int = constants.DEFAULT_N_DRAWS,
    burn_in: int = constants.DEFAULT_BURN_IN,
    seed: int = 0,
) -> ContourPolygon:
    """Slice of the conditional quantile tube at covariate value x0."""
    if data.k != 2:
        raise DomainError("tube slices are computed for k = 2 only")
    if data.p < 1:
        raise DomainError("tube slices need at least one covariate")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    dirs = [Direction(u=u, tau=tau) for u in unit_directions(n_directions)]
    bases = [orthonormal_complement(d.u) for d in dirs]
    planes = []
    for idx, (direction, basis) in enumerate(zip(dirs, bases)):
        projected = project(data, direction, basis)
        design = make_conditional_design(projected, data.x, x0, design_kind)
        block_prior = prior
        if block_prior is None:
            block_prior = PriorSpec(mean=np.zeros(design.dim), covariance=1000.0 * np.eye(design.dim))
        chain = gibbs_conditional(
            data,
            direction,
            design,
            kernel,
            block_prior,
            n_draws=n_draws,
            burn_in=burn_in,
            seed=_direction_seed(seed, idx),
            basis=basis,
        )
        alpha, beta_y = design.params_at_x0(chain.post_burn().mean(axis=0))
        theta = HyperplaneParams(alpha=alpha, beta_y=beta_y, beta_x=None)
        planes.append(to_upper_halfplane(theta, direction, basis))
    return intersect_halfplanes(planes, tau=tau, n_directions=n_directions)
