"""Finite groups as Cayley tables, and the difference structures they induce.

Elements are dense indices ``0..order-1``.  ``op`` is the Cayley table, so
``op[a, b]`` is the product ``a * b``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .delta_core import DeltaStructure

MAX_SYMMETRIC_DEGREE = 6
MAX_PRODUCT_ORDER = 4096
HEISENBERG_PRIMES = (2, 3, 5, 7)


class GroupError(ValueError):
    pass


@dataclass(frozen=True)
class FiniteGroup:
    name: str
    op: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)
    identity: int
    labels: tuple = field(default=(), repr=False, compare=False)

    @property
    def order(self) -> int:
        return self.op.shape[0]

    @property
    def elements(self) -> tuple:
        return tuple(range(self.order))

    def mul(self, a: int, b: int) -> int:
        return int(self.op[a, b])

    def inv(self, a: int) -> int:
        return int(self.inverse[a])

    def is_abelian(self) -> bool:
        return bool((self.op == self.op.T).all())

    def index(self, label) -> int:
        return self.labels.index(label)

    def check_laws(self) -> dict:
        """Exhaustively check the group laws.

        Returns a dict of law name -> first counterexample (or None).
        """
        t, n = self.op, self.order
        failures = {"associativity": None, "identity": None, "inverse": None}
        for a in range(n):
            # (a*b)*c == a*(b*c) for all b, c at once
            bad = np.argwhere(t[t[a]] != t[a][t])
            if len(bad):
                b, c = bad[0]
                failures["associativity"] = (a, int(b), int(c))
                break
        e = self.identity
        rng_n = np.arange(n)
        bad = np.flatnonzero((t[e] != rng_n) | (t[:, e] != rng_n))
        if len(bad):
            failures["identity"] = int(bad[0])
        bad = np.flatnonzero((t[rng_n, self.inverse] != e) | (t[self.inverse, rng_n] != e))
        if len(bad):
            failures["inverse"] = int(bad[0])
        return failures

    def is_valid(self) -> bool:
        return all(v is None for v in self.check_laws().values())


def _from_labels(name: str, labels: Sequence, mul, identity_label) -> FiniteGroup:
    labels = tuple(labels)
    index = {lab: i for i, lab in enumerate(labels)}
    n = len(labels)
    op = np.empty((n, n), dtype=np.int64)
    for i, x in enumerate(labels):
        for j, y in enumerate(labels):
            op[i, j] = index[mul(x, y)]
    e = index[identity_label]
    inverse = np.argmax(op == e, axis=1).astype(np.int64)
    return FiniteGroup(name=name, op=op, inverse=inverse, identity=e, labels=labels)


def cyclic(n: int) -> FiniteGroup:
    """Z_n under addition mod n."""
    if n < 1:
        raise GroupError(f"cyclic group needs n >= 1, got {n}")
    r = np.arange(n)
    op = (r[:, None] + r[None, :]) % n
    return FiniteGroup(f"cyclic:{n}", op, (-r) % n, 0, tuple(range(n)))


def dihedral(n: int) -> FiniteGroup:
    """Symmetries of the regular n-gon, order 2n.

    ``(k, f)`` stands for r^k s^f and sits at index ``f*n + k``.
    """
    if n < 3:
        raise GroupError(f"dihedral group needs n >= 3, got {n}")

    def mul(x, y):
        (k, f), (m, g) = x, y
        return ((k + (-1) ** f * m) % n, (f + g) % 2)

    labels = [(k, f) for f in (0, 1) for k in range(n)]
    return _from_labels(f"dihedral:{n}", labels, mul, (0, 0))


def symmetric(n: int) -> FiniteGroup:
    """S_n; permutations in lexicographic order, ``(p*q)(i) = p(q(i))``."""
    if not 1 <= n <= MAX_SYMMETRIC_DEGREE:
        raise GroupError(f"symmetric group degree must be in 1..{MAX_SYMMETRIC_DEGREE}, got {n}")
    labels = list(itertools.permutations(range(n)))

    def mul(p, q):
        return tuple(p[i] for i in q)

    return _from_labels(f"symmetric:{n}", labels, mul, tuple(range(n)))


def heisenberg_law_mod(p: int):
    """Unitriangular matrix product on triples (a, b, c) mod p.

    [[1,a,c],[0,1,b],[0,0,1]] * [[1,a',c'],[0,1,b'],[0,0,1]]
    = (a+a', b+b', c+c'+a*b').
    """
    def mul(x, y):
        a, b, c = x
        a2, b2, c2 = y
        return ((a + a2) % p, (b + b2) % p, (c + c2 + a * b2) % p)
    return mul


def heisenberg_mod(p: int) -> FiniteGroup:
    """Upper unitriangular 3x3 matrices over Z_p; (a,b,c) -> a*p^2 + b*p + c."""
    if p not in HEISENBERG_PRIMES:
        raise GroupError(f"heisenberg_mod needs a prime p <= 7, got {p}")
    labels = list(itertools.product(range(p), repeat=3))
    return _from_labels(f"heisenberg:{p}", labels, heisenberg_law_mod(p), (0, 0, 0))


def direct_product(G: FiniteGroup, H: FiniteGroup) -> FiniteGroup:
    """G x H with (g, h) at index ``g*|H| + h``."""
    n = G.order * H.order
    if n > MAX_PRODUCT_ORDER:
        raise GroupError(f"product order {n} exceeds {MAX_PRODUCT_ORDER}")
    m = H.order
    g = np.arange(n) // m
    h = np.arange(n) % m
    op = G.op[g[:, None], g[None, :]] * m + H.op[h[:, None], h[None, :]]
    inverse = G.inverse[g] * m + H.inverse[h]
    labels = tuple(itertools.product(range(G.order), range(H.order)))
    return FiniteGroup(
        f"product:{G.name},{H.name}", op, inverse, G.identity * m + H.identity, labels
    )


def parse_fixture(text: str) -> FiniteGroup:
    """Resolve names like ``cyclic:6`` or ``product:cyclic:2,cyclic:3``."""
    text = text.strip()
    if text.startswith("product:"):
        parts = text[len("product:"):].split(",")
        if len(parts) != 2:
            raise GroupError(f"product fixture needs two factors: {text!r}")
        return direct_product(parse_fixture(parts[0]), parse_fixture(parts[1]))
    kind, _, arg = text.partition(":")
    builders = {
        "cyclic": cyclic,
        "dihedral": dihedral,
        "symmetric": symmetric,
        "heisenberg": heisenberg_mod,
    }
    if kind not in builders:
        raise GroupError(f"unknown group fixture {text!r}")
    try:
        n = int(arg)
    except ValueError:
        raise GroupError(f"bad parameter in fixture {text!r}") from None
    return builders[kind](n)


def group_delta(G: FiniteGroup) -> DeltaStructure:
    """delta(a, b) = a^-1 * b."""
    table = G.op[G.inverse[:, None], np.arange(G.order)[None, :]]
    return DeltaStructure(
        delta=lambda a, b: int(table[a, b]),
        carrier=G.elements,
        name=f"group_delta({G.name})",
        table=table,
    )


def _check_permutation(sigma, n: int) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=np.int64)
    if sigma.shape != (n,) or sorted(sigma.tolist()) != list(range(n)):
        raise GroupError("sigma must be a permutation of the group's elements")
    return sigma


def relabeled_delta(G: FiniteGroup, sigma) -> DeltaStructure:
    """delta(a, b) = sigma(a^-1 * b), with weak companions

    F(u, v) = sigma(sigma^-1(u)^-1 * sigma^-1(v)),  G(u, b) = b * sigma^-1(u)^-1.

    For most sigma this breaks axiom 1 while keeping both weak axioms.
    """
    n = G.order
    sigma = _check_permutation(sigma, n)
    sigma_inv = np.argsort(sigma)
    r = np.arange(n)
    diff = G.op[G.inverse[:, None], r[None, :]]
    table = sigma[diff]
    f_table = sigma[diff[sigma_inv[:, None], sigma_inv[None, :]]]
    g_table = G.op[r[None, :], G.inverse[sigma_inv][:, None]]  # g_table[u, b]
    return DeltaStructure(
        delta=lambda a, b: int(table[a, b]),
        carrier=G.elements,
        weak_f=lambda u, v: int(f_table[u, v]),
        weak_g=lambda u, b: int(g_table[u, b]),
        name=f"relabeled_delta({G.name})",
        table=table,
    )


def group_delta_with_weak(G: FiniteGroup) -> DeltaStructure:
    """group_delta with F = delta and G(u, b) = b * u^-1 (recovers a)."""
    return relabeled_delta(G, np.arange(G.order))


def random_permutation(n: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).permutation(n)


def transposition(n: int, i: int, j: int) -> np.ndarray:
    sigma = np.arange(n)
    sigma[[i, j]] = sigma[[j, i]]
    return sigma


CATALOG = (
    [f"cyclic:{n}" for n in range(1, 13)]
    + [f"dihedral:{n}" for n in range(3, 7)]
    + ["symmetric:3", "symmetric:4", "heisenberg:3", "product:cyclic:2,cyclic:3"]
)


def catalog() -> list[FiniteGroup]:
    return [parse_fixture(name) for name in CATALOG]

