"""Abstract difference structures and the Ruzsa injection.

A difference structure is a set X with an operation ``delta(a, b)`` such that

1. ``delta(delta(a, b), delta(a, c)) == delta(b, c)`` for all a, b, c, and
2. ``z -> delta(z, a)`` is injective for every a.

The weak form replaces (1) by the existence of some F with
``F(delta(a, b), delta(a, c)) == delta(b, c)`` and (2) by some G such that
``a -> G(delta(a, b), b)`` is injective for every b.

Under either set of hypotheses the map

    i(x, b) = (delta(b, f(x)), delta(b, g(x)))

is an injection ``delta(C, A) x B -> delta(B, C) x delta(B, A)``, where
``x == delta(f(x), g(x))``.  Everything here works on finite carriers whose
elements are hashable and totally ordered (ints, tuples, ...).
"""
from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Iterator, Optional, Sequence

import numpy as np

Element = Hashable

EXHAUSTIVE_LIMIT = 64
DEFAULT_SAMPLE_COUNT = 20_000
DEFAULT_SAMPLE_SEED = 0


class EmptySetError(ValueError):
    """Raised when an operation receives an empty set."""


class CarrierError(ValueError):
    """Raised when an exhaustive check is asked of a structure without a carrier."""


class MissingWeakOperationError(ValueError):
    """Raised when a weak-axiom check runs on a structure lacking F or G."""


@dataclass(frozen=True)
class FiniteSet:
    """Deduplicated members in canonical (sorted) order."""

    members: tuple

    @classmethod
    def of(cls, items: Iterable[Element]) -> "FiniteSet":
        return cls(tuple(sorted(set(items))))

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Element]:
        return iter(self.members)

    def __contains__(self, item: object) -> bool:
        return item in set(self.members)

    def __repr__(self) -> str:
        return "{" + ", ".join(map(repr, self.members)) + "}"


def as_finite_set(items) -> FiniteSet:
    return items if isinstance(items, FiniteSet) else FiniteSet.of(items)


@dataclass(frozen=True)
class DeltaStructure:
    """A carrier with a difference operation and optional weak companions.

    ``carrier`` is ``None`` for continuous instances; those can only be
    checked in sampled mode, which then needs ``sampler(rng) -> element``.
    ``equal`` defaults to ``==``; continuous instances pass a tolerant one.
    ``table`` is an optional dense ``delta`` table over ``range(n)`` used as a
    fast path by the exhaustive checks.
    """

    delta: Callable[[Element, Element], Element]
    carrier: Optional[tuple] = None
    weak_f: Optional[Callable[[Element, Element], Element]] = None
    weak_g: Optional[Callable[[Element, Element], Element]] = None
    name: str = "delta"
    sampler: Optional[Callable[[np.random.Generator], Element]] = None
    equal: Callable[[Any, Any], bool] = operator.eq
    table: Optional[np.ndarray] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.carrier is not None:
            object.__setattr__(self, "carrier", tuple(sorted(set(self.carrier))))

    @property
    def has_weak(self) -> bool:
        return self.weak_f is not None and self.weak_g is not None

    def _dense(self) -> bool:
        return (
            self.table is not None
            and self.carrier is not None
            and self.carrier == tuple(range(len(self.carrier)))
        )


@dataclass(frozen=True)
class Section:
    """Choice functions f, g on ``delta(C, A)`` with ``x == delta(f(x), g(x))``."""

    domain: FiniteSet
    assignment: dict

    def f(self, x: Element) -> Element:
        return self.assignment[x][0]

    def g(self, x: Element) -> Element:
        return self.assignment[x][1]


@dataclass(frozen=True)
class InjectionWitness:
    entries: dict
    source_size: int
    is_injective: bool
    collision: Optional[tuple] = None


@dataclass(frozen=True)
class RuzsaResult:
    lhs: int
    rhs: int
    holds: bool
    witness: InjectionWitness


@dataclass(frozen=True)
class Sampled:
    """Sampled checking mode: ``count`` random tuples from a seeded generator."""

    count: int = DEFAULT_SAMPLE_COUNT
    seed: int = DEFAULT_SAMPLE_SEED


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    counterexample: Optional[tuple]
    checked: int
    mode: str


@dataclass(frozen=True)
class WeakAxiomReport:
    ok1: bool
    ok2: bool
    counterexamples: dict
    checked: int
    mode: str

    @property
    def ok(self) -> bool:
        return self.ok1 and self.ok2


def _require_nonempty(**sets: FiniteSet) -> None:
    for label, s in sets.items():
        if len(s) == 0:
            raise EmptySetError(f"set {label} is empty; non-empty sets are required")


def delta_set(S: DeltaStructure, A, B) -> FiniteSet:
    """Return ``{delta(a, b) : a in A, b in B}``."""
    A, B = as_finite_set(A), as_finite_set(B)
    _require_nonempty(A=A, B=B)
    return FiniteSet.of(S.delta(a, b) for a in A for b in B)


def build_section(S: DeltaStructure, C, A) -> Section:
    """Pick, for each x in ``delta(C, A)``, the lexicographically smallest
    generating pair ``(c, a)``."""
    C, A = as_finite_set(C), as_finite_set(A)
    _require_nonempty(C=C, A=A)
    assignment = {}
    # C and A are sorted, so the first hit for each x is the smallest pair.
    for c in C:
        for a in A:
            assignment.setdefault(S.delta(c, a), (c, a))
    return Section(FiniteSet.of(assignment), assignment)


def build_injection(S: DeltaStructure, A, B, C) -> InjectionWitness:
    """Materialize ``i(x, b) = (delta(b, f(x)), delta(b, g(x)))`` on
    ``delta(C, A) x B`` and report whether it is injective."""
    A, B, C = as_finite_set(A), as_finite_set(B), as_finite_set(C)
    _require_nonempty(A=A, B=B, C=C)
    section = build_section(S, C, A)
    entries = {}
    seen = {}
    collision = None
    for x in section.domain:
        fx, gx = section.assignment[x]
        for b in B:
            value = (S.delta(b, fx), S.delta(b, gx))
            entries[(x, b)] = value
            if collision is None:
                if value in seen:
                    collision = (seen[value], (x, b))
                else:
                    seen[value] = (x, b)
    return InjectionWitness(
        entries=entries,
        source_size=len(entries),
        is_injective=collision is None,
        collision=collision,
    )


def ruzsa_inequality(S: DeltaStructure, A, B, C) -> RuzsaResult:
    """Compare ``|delta(C,A)|*|B|`` with ``|delta(B,C)|*|delta(B,A)|``."""
    A, B, C = as_finite_set(A), as_finite_set(B), as_finite_set(C)
    witness = build_injection(S, A, B, C)
    lhs = len(delta_set(S, C, A)) * len(B)
    rhs = len(delta_set(S, B, C)) * len(delta_set(S, B, A))
    return RuzsaResult(lhs=lhs, rhs=rhs, holds=lhs <= rhs, witness=witness)


def reconstruct(S: DeltaStructure, c: Element, d: Element) -> Element:
    """Recover x from a witness value ``(c, d)``.

    Uses F when present, otherwise delta itself (valid under axiom 1).
    """
    op = S.weak_f if S.weak_f is not None else S.delta
    return op(c, d)


# -- axiom checks -----------------------------------------------------------

def _resolve_mode(S: DeltaStructure, mode) -> tuple[str, Optional[Sampled]]:
    if mode is None or mode == "auto":
        if S.carrier is not None and len(S.carrier) <= EXHAUSTIVE_LIMIT:
            return "exhaustive", None
        return "sampled", Sampled()
    if mode == "exhaustive":
        if S.carrier is None:
            raise CarrierError(f"{S.name}: exhaustive mode needs an enumerable carrier")
        return "exhaustive", None
    if mode == "sampled":
        return "sampled", Sampled()
    if isinstance(mode, Sampled):
        return "sampled", mode
    raise ValueError(f"unknown mode {mode!r}")


def _draw(S: DeltaStructure, rng: np.random.Generator, k: int) -> list:
    if S.carrier is not None:
        idx = rng.integers(0, len(S.carrier), size=k)
        return [S.carrier[i] for i in idx]
    if S.sampler is None:
        raise CarrierError(f"{S.name}: sampled mode needs a carrier or a sampler")
    return [S.sampler(rng) for _ in range(k)]


def _triples(S: DeltaStructure, mode) -> tuple[str, Iterable[tuple]]:
    kind, sampled = _resolve_mode(S, mode)
    if kind == "exhaustive":
        return kind, itertools.product(S.carrier, repeat=3)
    rng = np.random.default_rng(sampled.seed)
    return kind, (tuple(_draw(S, rng, 3)) for _ in range(sampled.count))


def _mode_label(kind: str, mode) -> str:
    if kind == "sampled":
        s = mode if isinstance(mode, Sampled) else Sampled()
        return f"sampled(count={s.count}, seed={s.seed})"
    return kind


def _first_bad_index(bad: np.ndarray) -> Optional[tuple]:
    hits = np.argwhere(bad)
    return tuple(int(v) for v in hits[0]) if len(hits) else None


def check_axiom1(S: DeltaStructure, mode="auto") -> AxiomReport:
    """Check ``delta(delta(a,b), delta(a,c)) == delta(b,c)``; report the first
    failing (a, b, c)."""
    kind, triples = _triples(S, mode)
    label = _mode_label(kind, mode)
    if kind == "exhaustive" and S._dense():
        t = S.table
        for a in range(t.shape[0]):
            row = t[a]
            bad = t[row[:, None], row[None, :]] != t
            hit = _first_bad_index(bad)
            if hit is not None:
                return AxiomReport(False, (a, *hit), (a + 1) * t.size, label)
        return AxiomReport(True, None, t.shape[0] * t.size, label)
    checked = 0
    for a, b, c in triples:
        checked += 1
        if not S.equal(S.delta(S.delta(a, b), S.delta(a, c)), S.delta(b, c)):
            return AxiomReport(False, (a, b, c), checked, label)
    return AxiomReport(True, None, checked, label)


def _injectivity_counterexample(values: Sequence, keys: Sequence, equal) -> Optional[tuple]:
    """First pair of distinct keys with equal values, in key order."""
    if equal is operator.eq:
        seen = {}
        for k, v in zip(keys, values):
            if v in seen and seen[v] != k:
                return seen[v], k
            seen.setdefault(v, k)
        return None
    for i, j in itertools.combinations(range(len(keys)), 2):
        if keys[i] != keys[j] and equal(values[i], values[j]):
            return keys[i], keys[j]
    return None


def check_axiom2(S: DeltaStructure, mode="auto") -> AxiomReport:
    """Check that ``z -> delta(z, a)`` is injective; counterexample (a, z, z')."""
    kind, sampled = _resolve_mode(S, mode)
    label = _mode_label(kind, mode)
    if kind == "exhaustive":
        checked = 0
        for a in S.carrier:
            zs = S.carrier
            checked += len(zs)
            hit = _injectivity_counterexample([S.delta(z, a) for z in zs], zs, S.equal)
            if hit is not None:
                return AxiomReport(False, (a, *hit), checked, label)
        return AxiomReport(True, None, checked, label)
    rng = np.random.default_rng(sampled.seed)
    for n in range(1, sampled.count + 1):
        a, z, w = _draw(S, rng, 3)
        if not S.equal(z, w) and S.equal(S.delta(z, a), S.delta(w, a)):
            return AxiomReport(False, (a, z, w), n, label)
    return AxiomReport(True, None, sampled.count, label)


def check_weak_axioms(S: DeltaStructure, mode="auto") -> WeakAxiomReport:
    """Check the weak axioms with the structure's own F and G.

    Only values reachable as ``delta(a, b)`` are fed to F and G; what they do
    elsewhere is unconstrained.
    """
    if not S.has_weak:
        raise MissingWeakOperationError(f"{S.name}: weak axioms need both F and G")
    kind, sampled = _resolve_mode(S, mode)
    _, triples = _triples(S, mode)
    label = _mode_label(kind, mode)
    F, G, D = S.weak_f, S.weak_g, S.delta
    counterexamples = {}
    checked = 0
    for a, b, c in triples:
        checked += 1
        if not S.equal(F(D(a, b), D(a, c)), D(b, c)):
            counterexamples["weak1"] = (a, b, c)
            break

    if kind == "exhaustive":
        for b in S.carrier:
            avals = S.carrier
            hit = _injectivity_counterexample([G(D(a, b), b) for a in avals], avals, S.equal)
            if hit is not None:
                counterexamples["weak2"] = (b, *hit)
                break
    else:
        rng = np.random.default_rng(sampled.seed + 1)
        for _ in range(sampled.count):
            b, a, a2 = _draw(S, rng, 3)
            if not S.equal(a, a2) and S.equal(G(D(a, b), b), G(D(a2, b), b)):
                counterexamples["weak2"] = (b, a, a2)
                break
    return WeakAxiomReport(
        ok1="weak1" not in counterexamples,
        ok2="weak2" not in counterexamples,
        counterexamples=counterexamples,
        checked=checked,
        mode=label,
    )

