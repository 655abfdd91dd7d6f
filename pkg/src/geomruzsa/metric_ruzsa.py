"""Separated point sets and the approximate Ruzsa injection in a dilation space.

Given finite sets A, B, C near a base point e, the map

    i(x, b) = (D_eps(b, f(x)), D_eps(b, g(x))),   x = D_eps(f(x), g(x)),

on ``D_eps(C, A) x B`` (``D_eps`` the approximate difference at e) becomes
injective once eps is small enough relative to the separation mu of B and of
``D_eps(C, A)``.  Points are identified when they are within ``tolerance``
(default mu/4) of each other.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .dilations import DilationSpace, approx_difference, as_points, _check_eps


class SeparationHypothesisError(ValueError):
    """A set that must be mu-separated is not; names the offending pair."""

    def __init__(self, which: str, i: int, j: int, dist: float, mu: float):
        self.which, self.pair, self.distance, self.mu = which, (i, j), dist, mu
        super().__init__(
            f"{which} is not {mu:g}-separated: points {i} and {j} are at distance {dist:.6g}"
        )


class AmbiguousClusteringError(ValueError):
    pass


class PartialSetError(RuntimeError):
    """The sampler ran out of draws; ``points`` holds what it found."""

    def __init__(self, points: np.ndarray, target: int):
        self.points = points
        super().__init__(f"found only {len(points)} of {target} separated points")


@dataclass(frozen=True)
class SeparatedSet:
    points: np.ndarray
    mu: float
    space: DilationSpace
    seed: Optional[int] = None

    def __post_init__(self):
        sep = separation(self.space, self.points)
        if sep < self.mu:
            raise ValueError(f"points are only {sep:.6g}-separated, not {self.mu:g}")

    def __len__(self) -> int:
        return len(self.points)


def _close_pairs(S: DilationSpace, P: np.ndarray, r: float) -> np.ndarray:
    """Index pairs (i < j) with distance(P[i], P[j]) <= r."""
    if len(P) < 2:
        return np.empty((0, 2), dtype=np.intp)
    tree = cKDTree(np.ascontiguousarray(S.coarse(P)))
    cand = tree.query_pairs(r, p=np.inf, output_type="ndarray")
    if len(cand) == 0:
        return cand
    cand = cand[np.lexsort((cand[:, 1], cand[:, 0]))]
    d = S.distance(P[cand[:, 0]], P[cand[:, 1]])
    return cand[d <= r]


def _min_pair(S: DilationSpace, P: np.ndarray):
    """(distance, i, j) of the closest pair, smallest indices on ties."""
    i, j = np.triu_indices(len(P), 1)
    d = S.distance(P[i], P[j])
    k = int(np.argmin(d))
    return float(d[k]), int(i[k]), int(j[k])


def separation(S: DilationSpace, P) -> float:
    """Minimum pairwise distance; inf for fewer than two points."""
    P = as_points(P, S.dim).reshape(-1, S.dim)
    if len(P) < 2:
        return float("inf")
    return _min_pair(S, P)[0]


@dataclass(frozen=True)
class _Image:
    points: np.ndarray          # representatives, first-encountered order
    generators: list            # per representative: list of (left_idx, right_idx)


def _image(S, e, eps, L, R, tolerance) -> _Image:
    """Cluster {D_eps(l, r)} with l-major enumeration order."""
    _check_eps(eps)
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    nl, nr = len(L), len(R)
    raw = approx_difference(S, e, eps, np.repeat(L, nr, axis=0), np.tile(R, (nl, 1)))
    pairs = _close_pairs(S, raw, tolerance)
    n = len(raw)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    # relabel components by first member
    first = {}
    order = np.array([first.setdefault(lab, len(first)) for lab in labels])
    members = [[] for _ in first]
    for k, comp in enumerate(order):
        members[comp].append(k)
    reps = np.array([m[0] for m in members])
    _check_unambiguous(S, raw, members, order, tolerance)
    generators = [[divmod(k, nr) for k in m] for m in members]
    return _Image(raw[reps], generators)


def _check_unambiguous(S, raw, members, order, tol) -> None:
    """Reject chained clusters wider than 2*tol that sit within 4*tol of another cluster."""
    wide = []
    for comp, m in enumerate(members):
        if len(m) > 1:
            idx = np.array(m)
            diam = max(separation_pairs(S, raw[idx]), default=0.0)
            if diam > 2 * tol:
                wide.append(comp)
    if not wide:
        return
    near = _close_pairs(S, raw, 4 * tol)
    for i, j in near:
        if order[i] != order[j] and (order[i] in wide or order[j] in wide):
            raise AmbiguousClusteringError(
                f"cluster of width > {2 * tol:g} lies within {4 * tol:g} of another; "
                "the image is not cleanly separated at this tolerance"
            )


def separation_pairs(S, P) -> np.ndarray:
    i, j = np.triu_indices(len(P), 1)
    return S.distance(P[i], P[j])


def approx_delta_set(S: DilationSpace, e, eps, A, B, tolerance: float) -> np.ndarray:
    """{D_eps(a, b) : a in A, b in B}, points within ``tolerance`` identified."""
    A = as_points(A, S.dim).reshape(-1, S.dim)
    B = as_points(B, S.dim).reshape(-1, S.dim)
    e = as_points(e, S.dim)
    if len(A) == 0 or len(B) == 0:
        raise ValueError("non-empty point sets are required")
    return _image(S, e, eps, A, B, tolerance).points


@dataclass(frozen=True)
class MetricInjectionWitness:
    eps: float
    tolerance: float
    mu: float
    xs: np.ndarray = field(repr=False)
    bs: np.ndarray = field(repr=False)
    fs: np.ndarray = field(repr=False)
    gs: np.ndarray = field(repr=False)
    cs: np.ndarray = field(repr=False)
    ds: np.ndarray = field(repr=False)
    domain_size: int
    is_injective: bool
    collision: Optional[dict] = None

    @property
    def source_size(self) -> int:
        return len(self.cs)

    @property
    def entries(self) -> list:
        """[((x, b), (c, d)), ...] as coordinate tuples."""
        as_t = lambda p: tuple(p.tolist())
        return [
            ((as_t(x), as_t(b)), (as_t(c), as_t(d)))
            for x, b, c, d in zip(self.xs, self.bs, self.cs, self.ds)
        ]


def _require_separated(S, P, mu, which):
    if len(P) >= 2:
        d, i, j = _min_pair(S, P)
        if d < mu:
            raise SeparationHypothesisError(which, i, j, d, mu)


def metric_injection(S: DilationSpace, e, eps, A, B, C, mu: float,
                     tolerance: Optional[float] = None) -> MetricInjectionWitness:
    """Build the approximate injection on ``D_eps(C, A) x B``.

    Raises :class:`SeparationHypothesisError` unless B and ``D_eps(C, A)``
    are mu-separated.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    tol = mu / 4 if tolerance is None else tolerance
    if not 0 < tol <= mu / 4:
        raise ValueError(f"tolerance must lie in (0, mu/4], got {tol}")
    e = as_points(e, S.dim)
    A, B, C = (as_points(P, S.dim).reshape(-1, S.dim) for P in (A, B, C))
    if min(len(A), len(B), len(C)) == 0:
        raise ValueError("non-empty point sets are required")

    _require_separated(S, B, mu, "B")
    image = _image(S, e, eps, C, A, tol)
    X = image.points
    _require_separated(S, X, mu, "D_eps(C, A)")

    # section: lexicographically smallest generating pair (c, a) by coordinates
    f_idx, g_idx = [], []
    for gens in image.generators:
        ci, ai = min(gens, key=lambda ca: (tuple(C[ca[0]]), tuple(A[ca[1]])))
        f_idx.append(ci)
        g_idx.append(ai)
    F, G = C[f_idx], A[g_idx]

    m, nb = len(X), len(B)
    xs = np.repeat(X, nb, axis=0)
    fs = np.repeat(F, nb, axis=0)
    gs = np.repeat(G, nb, axis=0)
    bs = np.tile(B, (m, 1))
    cs = approx_difference(S, e, eps, bs, fs)
    ds = approx_difference(S, e, eps, bs, gs)

    collision = _find_collision(S, cs, ds, tol)
    if collision is not None:
        i, j = collision
        collision = {
            "keys": (int(i), int(j)),
            "x": (xs[i].tolist(), xs[j].tolist()),
            "b": (bs[i].tolist(), bs[j].tolist()),
            "c_distance": float(S.distance(cs[i], cs[j])),
            "d_distance": float(S.distance(ds[i], ds[j])),
        }
    return MetricInjectionWitness(
        eps=float(eps), tolerance=tol, mu=mu, xs=xs, bs=bs, fs=fs, gs=gs, cs=cs, ds=ds,
        domain_size=m, is_injective=collision is None, collision=collision,
    )


def _find_collision(S, cs, ds, tol):
    if len(cs) < 2:
        return None
    coarse = np.hstack([S.coarse(cs), S.coarse(ds)])
    cand = cKDTree(coarse).query_pairs(tol, p=np.inf, output_type="ndarray")
    if len(cand) == 0:
        return None
    cand = cand[np.lexsort((cand[:, 1], cand[:, 0]))]
    i, j = cand[:, 0], cand[:, 1]
    hit = (S.distance(cs[i], cs[j]) <= tol) & (S.distance(ds[i], ds[j]) <= tol)
    if not hit.any():
        return None
    k = int(np.argmax(hit))
    return int(i[k]), int(j[k])


def reconstruction_residuals(S: DilationSpace, e, w: MetricInjectionWitness) -> dict:
    """How well each witness value (c, d) pins down its x.

    ``approx``: distance from x to D^{b(eps)}_eps(c, d), b(eps) = dilate(e, eps, b),
    which the approximate axiom makes equal to D_eps(f(x), g(x)).
    ``limit``: distance from x to limit_difference(e, c, d), the O(eps)-close
    reconstruction used in the injectivity argument.
    """
    e = as_points(e, S.dim)
    b_eps = S.dilate(e, w.eps, w.bs)
    approx = S.distance(w.xs, approx_difference(S, b_eps, w.eps, w.cs, w.ds))
    limit = S.distance(w.xs, S.limit_difference(e, w.cs, w.ds))
    return {"approx": approx, "limit": limit}


def limit_entry_gap(S: DilationSpace, e, w: MetricInjectionWitness) -> float:
    """Largest distance between the witness values and those of the exact
    injection ``(limit_difference(e, b, f), limit_difference(e, b, g))``
    built on the same section."""
    e = as_points(e, S.dim)
    c0 = S.limit_difference(e, w.bs, w.fs)
    d0 = S.limit_difference(e, w.bs, w.gs)
    return float(max(S.distance(w.cs, c0).max(), S.distance(w.ds, d0).max()))


@dataclass(frozen=True)
class ThresholdReport:
    mu: float
    eps_grid: list
    hypothesis_flags: list
    injective_flags: list
    empirical_threshold: float
    failures: dict = field(default_factory=dict)  # grid index -> message

    @property
    def rows(self) -> list:
        return list(zip(self.eps_grid, self.hypothesis_flags, self.injective_flags))


def check_grid(eps_grid) -> list:
    grid = [float(x) for x in eps_grid]
    for x in grid:
        _check_eps(x)
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps grid must be strictly descending")
    return grid


def estimate_threshold(S: DilationSpace, e, A, B, C, mu: float, eps_grid,
                       tolerance: Optional[float] = None) -> ThresholdReport:
    """Run the injection along a descending eps grid.

    The empirical threshold is the largest grid eps where the separation
    hypothesis holds and the injection is injective (0 if none).
    Hypothesis failures are recorded per grid point, not raised.
    """
    grid = check_grid(eps_grid)
    hyp, inj, failures = [], [], {}
    for k, eps in enumerate(grid):
        try:
            w = metric_injection(S, e, eps, A, B, C, mu, tolerance)
        except (SeparationHypothesisError, AmbiguousClusteringError) as err:
            hyp.append(False)
            inj.append(False)
            failures[k] = str(err)
            continue
        hyp.append(True)
        inj.append(w.is_injective)
    threshold = next((eps for eps, h, i in zip(grid, hyp, inj) if h and i), 0.0)
    return ThresholdReport(mu, grid, hyp, inj, threshold, failures)


def sample_separated_set(S: DilationSpace, region_radius: float, mu: float, count: int,
                         seed: int, center=None, draws_per_point: int = 10_000) -> SeparatedSet:
    """Greedy rejection sampling of a mu-separated set in a metric ball.

    Candidates come uniformly from the ball of ``region_radius`` about
    ``center`` (the base point by default); a candidate is kept if it is at
    distance >= mu from everything kept so far.  Gives up after
    ``draws_per_point * count`` draws with :class:`PartialSetError`.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if count < 1:
        raise ValueError("count must be >= 1")
    rng = np.random.default_rng(seed)
    budget = draws_per_point * count
    kept = np.empty((0, S.dim))
    drawn = 0
    while len(kept) < count and drawn < budget:
        batch = S.sample_ball(rng, min(1024, budget - drawn), region_radius, center)
        drawn += len(batch)
        if len(kept):
            far = np.all(S.distance(batch[:, None, :], kept[None, :, :]) >= mu, axis=1)
            batch = batch[far]
        for p in batch:
            if len(kept) == 0 or np.all(S.distance(kept, p) >= mu):
                kept = np.vstack([kept, p])
                if len(kept) == count:
                    break
    if len(kept) < count:
        raise PartialSetError(kept, count)
    return SeparatedSet(kept, mu, S, seed)


@dataclass(frozen=True)
class RuzsaConfiguration:
    A: SeparatedSet
    B: SeparatedSet
    C: SeparatedSet
    eps_grid: list
    seed: int


def sample_ruzsa_configuration(S: DilationSpace, mu: float, sizes=(20, 20, 20), seed: int = 0,
                               eps_grid=(0.5,), region_radius: float = 1.0, e=None,
                               draws_per_point: int = 10_000) -> RuzsaConfiguration:
    """Draw A, B, C satisfying the separation hypothesis on a whole eps grid.

    B is a plain mu-separated sample.  C is drawn ``mu / (1 - p)``-separated,
    p the largest grid eps, because the images of one ``a`` contract C by
    ``1 - eps`` in the flat model.  A is grown greedily: a candidate
    ``a`` is kept only if it is mu-far from the kept points of A and every new
    image ``D_eps(c, a)``, c in C, is mu-far from all earlier images, for each
    grid eps and for the eps -> 0 limit.
    """
    nA, nB, nC = sizes
    grid = check_grid(eps_grid)
    e = S.base_point if e is None else as_points(e, S.dim)
    seeds = np.random.SeedSequence(seed).spawn(3)
    child = [int(s.generate_state(1)[0]) for s in seeds]
    B = sample_separated_set(S, region_radius, mu, nB, child[1], e, draws_per_point)
    C = sample_separated_set(S, region_radius, mu / (1 - grid[0]) if grid[0] < 1 else mu,
                             nC, child[2], e, draws_per_point)
    Cp = C.points

    def images(a):
        out = [approx_difference(S, e, eps, Cp, np.broadcast_to(a, Cp.shape)) for eps in grid]
        out.append(S.limit_difference(e, Cp, np.broadcast_to(a, Cp.shape)))
        return np.stack(out)  # (levels, nC, dim)

    rng = np.random.default_rng(child[0])
    budget = draws_per_point * nA
    kept, kept_images = [], []
    drawn = 0
    while len(kept) < nA and drawn < budget:
        for a in S.sample_ball(rng, min(256, budget - drawn), region_radius, e):
            drawn += 1
            if kept and np.any(S.distance(np.array(kept), a) < mu):
                continue
            new = images(a)
            if nC > 1 and any(separation(S, level) < mu for level in new):
                continue
            if kept_images:
                old = np.concatenate(kept_images, axis=1)  # (levels, k, dim)
                dist = S.distance(new[:, :, None, :], old[:, None, :, :])
                if np.any(dist < mu):
                    continue
            kept.append(a)
            kept_images.append(new)
            if len(kept) == nA:
                break
    if len(kept) < nA:
        raise PartialSetError(np.array(kept).reshape(-1, S.dim), nA)
    A = SeparatedSet(np.array(kept), mu, S, child[0])
    return RuzsaConfiguration(A, B, C, grid, seed)
