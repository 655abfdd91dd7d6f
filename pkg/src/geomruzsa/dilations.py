"""Metric spaces with dilations: Euclidean space and the Heisenberg group.

Points are numpy arrays whose last axis holds the coordinates, so every
primitive broadcasts over leading axes.  The primitives only use ring
operations (plus a final root inside the distance), which lets the same code
run on object arrays of :class:`fractions.Fraction` for exact evaluation.

The approximate difference based at ``e`` is

    approx_difference(e, eps, a, b) = dilate(dilate(e, eps, a), 1/eps, dilate(e, eps, b))

and tends to ``limit_difference(e, a, b)`` as ``eps -> 0``.
"""
from __future__ import annotations

import abc
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .delta_core import DeltaStructure


class DomainError(ValueError):
    pass


def as_points(p, dim: int | None = None) -> np.ndarray:
    """Coerce to a float64 array of points, rejecting NaN/Inf."""
    arr = np.asarray(p, dtype=np.float64)
    if dim is not None and arr.shape[-1:] != (dim,):
        raise DomainError(f"expected points of dimension {dim}, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DomainError("points must have finite coordinates")
    return arr


def exact(p) -> np.ndarray:
    """Object array of Fractions carrying the exact binary values of ``p``."""
    arr = np.asarray(p, dtype=np.float64)
    out = np.empty(arr.shape, dtype=object)
    out.flat[:] = [Fraction(v) for v in arr.flat]
    return out


def _to_float(x) -> np.ndarray:
    arr = np.asarray(x)
    return arr.astype(np.float64) if arr.dtype == object else x


class DilationSpace(abc.ABC):
    name: str
    dim: int

    @property
    def base_point(self) -> np.ndarray:
        return np.zeros(self.dim)

    @abc.abstractmethod
    def distance(self, p, q) -> np.ndarray: ...

    @abc.abstractmethod
    def dilate(self, x, eps, y) -> np.ndarray:
        """The dilation of ``y`` about ``x`` by factor ``eps``."""

    @abc.abstractmethod
    def limit_difference(self, e, a, b) -> np.ndarray: ...

    @abc.abstractmethod
    def coarse(self, p) -> np.ndarray:
        """Coordinates whose sup-norm difference never exceeds ``distance``.

        Used for KD-tree candidate search.
        """

    @abc.abstractmethod
    def _box(self, radius: float) -> np.ndarray:
        """Half-widths of a coordinate box containing the ball of ``radius`` at 0."""

    @abc.abstractmethod
    def translate(self, center, m) -> np.ndarray:
        """Move a point of the ball at 0 to the ball at ``center`` (isometry)."""

    def sample_ball(self, rng: np.random.Generator, count: int, radius: float = 1.0,
                    center=None) -> np.ndarray:
        """Uniform-in-box rejection sample of ``count`` points with
        ``distance(center, p) <= radius``."""
        half = self._box(radius)
        zero = self.base_point
        out = []
        have = 0
        while have < count:
            batch = rng.uniform(-half, half, size=(max(2 * (count - have), 64), self.dim))
            keep = batch[self.distance(zero, batch) <= radius]
            out.append(keep)
            have += len(keep)
        pts = np.concatenate(out)[:count]
        return pts if center is None else self.translate(as_points(center, self.dim), pts)

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name!r})"


@dataclass(frozen=True, repr=False)
class EuclideanSpace(DilationSpace):
    dim: int = 2

    @property
    def name(self) -> str:
        return f"euclid:{self.dim}"

    def distance(self, p, q):
        diff = q - p
        return np.sqrt(_to_float(np.sum(diff * diff, axis=-1)))

    def dilate(self, x, eps, y):
        return x + eps * (y - x)

    def limit_difference(self, e, a, b):
        return e + (b - a)

    def coarse(self, p):
        return p

    def _box(self, radius):
        return np.full(self.dim, radius)

    def translate(self, center, m):
        return center + m


def heis_mul(p, q):
    """(x,y,z)(x',y',z') = (x+x', y+y', z+z'+(xy'-yx')/2)."""
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    u, v, w = q[..., 0], q[..., 1], q[..., 2]
    return np.stack([x + u, y + v, z + w + (x * v - y * u) / 2], axis=-1)


def heis_inv(p):
    return -p


def heis_dilation(eps, m):
    """Group automorphism (x, y, z) -> (eps x, eps y, eps^2 z)."""
    return np.stack([eps * m[..., 0], eps * m[..., 1], eps * eps * m[..., 2]], axis=-1)


def heis_gauge(m):
    """Koranyi gauge ((x^2+y^2)^2 + 16 z^2)^(1/4)."""
    x, y, z = m[..., 0], m[..., 1], m[..., 2]
    r2 = x * x + y * y
    return _to_float(r2 * r2 + 16 * z * z) ** 0.25


@dataclass(frozen=True, repr=False)
class HeisenbergSpace(DilationSpace):
    dim: int = 3
    name: str = "heis1"

    def gauge(self, m):
        return heis_gauge(m)

    def distance(self, p, q):
        return heis_gauge(heis_mul(heis_inv(p), q))

    def dilate(self, x, eps, y):
        return heis_mul(x, heis_dilation(eps, heis_mul(heis_inv(x), y)))

    def limit_difference(self, e, a, b):
        return heis_mul(heis_mul(e, heis_inv(a)), b)

    def coarse(self, p):
        # N(m) >= |(x, y)| and the horizontal part of p^-1 q is q_h - p_h.
        return p[..., :2]

    def _box(self, radius):
        return np.array([radius, radius, radius * radius / 4])

    def translate(self, center, m):
        return heis_mul(np.broadcast_to(center, m.shape), m)


def parse_space(text: str) -> DilationSpace:
    """``euclid:n`` or ``heis1``."""
    text = text.strip()
    if text == "heis1":
        return HeisenbergSpace()
    kind, _, arg = text.partition(":")
    if kind == "euclid":
        try:
            n = int(arg)
        except ValueError:
            raise DomainError(f"bad dimension in space {text!r}") from None
        if n < 1:
            raise DomainError(f"dimension must be >= 1 in {text!r}")
        return EuclideanSpace(n)
    raise DomainError(f"unknown space {text!r}")


# -- constructions on top of the primitives -----------------------------------

def _check_eps(eps) -> None:
    if not 0 < eps <= 1:
        raise DomainError(f"eps must lie in (0, 1], got {eps}")


def _inverse_scale(eps):
    return 1 / eps if isinstance(eps, Fraction) else 1.0 / eps


def _arr(p):
    return p if isinstance(p, np.ndarray) else np.asarray(p, dtype=np.float64)


def approx_difference(S: DilationSpace, e, eps, a, b):
    _check_eps(eps)
    e, a, b = _arr(e), _arr(a), _arr(b)
    ae = S.dilate(e, eps, a)
    return S.dilate(ae, _inverse_scale(eps), S.dilate(e, eps, b))


def limit_difference(S: DilationSpace, e, a, b):
    return S.limit_difference(_arr(e), _arr(a), _arr(b))


def check_approx_axiom1(S: DilationSpace, e, eps, a, b, c, exact_arithmetic: bool = True):
    """Residual of the approximate axiom

        D^{a(eps)}(D^e(a, b), D^e(a, c)) == D^e(b, c),  a(eps) = dilate(e, eps, a),

    measured with the space's distance.  By default both sides are evaluated
    in exact rational arithmetic; in float arithmetic the Heisenberg gauge
    inflates ~1e-16 coordinate rounding to ~1e-8 (it is only 1/2-Holder in
    the central coordinate).  Broadcasts over leading axes.
    """
    _check_eps(eps)
    if exact_arithmetic:
        e, a, b, c = (exact(p) for p in (e, a, b, c))
        eps = Fraction(eps)
    lhs, rhs = _approx_axiom1_sides(S, e, eps, a, b, c)
    return S.distance(lhs, rhs)


def _approx_axiom1_sides(S, e, eps, a, b, c):
    a_eps = S.dilate(e, eps, a)
    lhs = approx_difference(
        S, a_eps, eps, approx_difference(S, e, eps, a, b), approx_difference(S, e, eps, a, c)
    )
    return lhs, approx_difference(S, e, eps, b, c)


def approx_axiom1_coordinate_error(S: DilationSpace, e, eps, a, b, c):
    """Float evaluation of the same identity, as max-abs coordinate error."""
    lhs, rhs = _approx_axiom1_sides(S, e, eps, a, b, c)
    return np.max(np.abs(lhs - rhs), axis=-1)


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list  # (eps, gap)
    slope: float

    @property
    def eps(self) -> np.ndarray:
        return np.array([r[0] for r in self.rows])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([r[1] for r in self.rows])


def loglog_slope(xs, ys, floor: float = 1e-14) -> float:
    """Least-squares slope of log y against log x over points with y > floor."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    keep = ys > floor
    if keep.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])


def convergence_table(S: DilationSpace, e, a, b, eps_list) -> ConvergenceTable:
    """gap(eps) = distance(approx_difference(eps), limit_difference) per eps."""
    eps_list = [float(x) for x in eps_list]
    if not eps_list:
        raise DomainError("eps_list must be non-empty")
    for x in eps_list:
        _check_eps(x)
    e, a, b = (as_points(p, S.dim) for p in (e, a, b))
    limit = S.limit_difference(e, a, b)
    rows = [(x, float(S.distance(approx_difference(S, e, x, a, b), limit))) for x in eps_list]
    return ConvergenceTable(rows, loglog_slope(*zip(*rows)))


def limit_structure(S: DilationSpace, e=None, tol: float = 1e-9, radius: float = 1.0) -> DeltaStructure:
    """The limit difference at ``e`` as a carrier-free DeltaStructure.

    Elements are coordinate tuples; equality is coordinate-wise within ``tol``.
    """
    e = S.base_point if e is None else as_points(e, S.dim)

    def delta(a, b):
        return tuple(S.limit_difference(e, np.array(a), np.array(b)).tolist())

    def sampler(rng):
        return tuple(S.sample_ball(rng, 1, radius, center=e)[0].tolist())

    def equal(p, q):
        return bool(np.allclose(p, q, rtol=0, atol=tol))

    return DeltaStructure(delta=delta, name=f"limit_difference({S.name})",
                          sampler=sampler, equal=equal)
