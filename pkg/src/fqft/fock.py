"""Level-truncated Fock module for the free boson.

Basis enumeration over pairs of integer partitions (chiral, antichiral),
U(1) current modes j_n / jbar_n, Virasoro generators assembled from
normal-ordered current bilinears, and the Shapovalov pairing.

The zero mode j_0 acts as zero throughout (the zero-mode sector is out of
scope), and components pushed above the truncation level are dropped with a
queryable loss counter.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache

from .errors import ResourceLimitError, SpaceMismatchError

# Hard cap on the truncation level; dim grows like sum p(k)p(m) and the
# operator assembly is O(dim^2) sparse products.
L_MAX_HARD_CAP = 16


@lru_cache(maxsize=None)
def partitions(n: int) -> tuple[tuple[int, ...], ...]:
    """All partitions of n as non-increasing tuples, lexicographically sorted."""
    if n < 0:
        return ()
    if n == 0:
        return ((),)
    out = []

    def rec(remaining, max_part, prefix):
        if remaining == 0:
            out.append(tuple(prefix))
            return
        for part in range(min(remaining, max_part), 0, -1):
            rec(remaining - part, part, prefix + [part])

    rec(n, n, [])
    return tuple(sorted(out))


def partition_count(n: int) -> int:
    return len(partitions(n))


class Partition:
    """Non-increasing tuple of positive integers."""

    __slots__ = ("parts",)

    def __init__(self, parts=()):
        parts = tuple(parts)
        if any(p <= 0 for p in parts):
            raise ValueError("partition parts must be positive")
        if any(parts[i] < parts[i + 1] for i in range(len(parts) - 1)):
            raise ValueError("partition parts must be non-increasing")
        self.parts = parts

    @property
    def level(self) -> int:
        return sum(self.parts)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return f"Partition({list(self.parts)})"


class FockBasisState:
    """Pair of partitions indexing one truncated basis vector."""

    __slots__ = ("chiral", "antichiral")

    def __init__(self, chiral, antichiral):
        self.chiral = chiral if isinstance(chiral, Partition) else Partition(chiral)
        self.antichiral = (
            antichiral if isinstance(antichiral, Partition) else Partition(antichiral)
        )

    @property
    def level(self) -> int:
        return self.chiral.level + self.antichiral.level

    def key(self):
        return (self.level, self.chiral.parts, self.antichiral.parts)

    def __eq__(self, other):
        return isinstance(other, FockBasisState) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"|{list(self.chiral.parts)};{list(self.antichiral.parts)}>"


class TruncatedFockSpace:
    """All basis states with total level <= l_max, graded-lexicographic order."""

    def __init__(self, l_max: int, exact: bool = True):
        if l_max < 0:
            raise ValueError("l_max must be >= 0")
        if l_max > L_MAX_HARD_CAP:
            raise ResourceLimitError(
                f"l_max={l_max} exceeds hard cap {L_MAX_HARD_CAP}"
            )
        self.l_max = l_max
        self.exact = exact
        basis = []
        for total in range(l_max + 1):
            for k in range(total + 1):
                for mu in partitions(k):
                    for nu in partitions(total - k):
                        basis.append(FockBasisState(mu, nu))
        basis.sort(key=lambda s: s.key())
        self.basis = basis
        self.index = {s.key(): i for i, s in enumerate(basis)}
        self.dim = len(basis)
        self.levels = [s.level for s in basis]

    def zero_scalar(self):
        return Fraction(0) if self.exact else 0.0

    def one_scalar(self):
        return Fraction(1) if self.exact else 1.0

    def zero(self) -> "BoundaryState":
        return BoundaryState(self, [self.zero_scalar()] * self.dim)

    def vacuum(self) -> "BoundaryState":
        v = self.zero()
        v.coeffs[0] = self.one_scalar()
        return v

    def state(self, chiral=(), antichiral=()) -> "BoundaryState":
        """Basis vector j_{chiral} jbar_{antichiral} |0>."""
        key = FockBasisState(chiral, antichiral).key()
        if key not in self.index:
            raise ValueError(f"state {key} above truncation l_max={self.l_max}")
        v = self.zero()
        v.coeffs[self.index[key]] = self.one_scalar()
        return v

    def find(self, chiral, antichiral):
        return self.index.get(FockBasisState(chiral, antichiral).key())

    def to_json(self, operators=None) -> str:
        """Dump {l_max, basis, operators:{name: sparse triplets}} for golden files."""
        doc = {
            "l_max": self.l_max,
            "basis": [
                [list(s.chiral.parts), list(s.antichiral.parts)] for s in self.basis
            ],
            "operators": {},
        }
        for name, op in (operators or {}).items():
            triplets = [
                [i, j, _scalar_json(val)]
                for (i, j), val in sorted(op.entries.items())
            ]
            doc["operators"][name] = triplets
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def _scalar_json(x):
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, int):
        return x
    return float(x)


class BoundaryState:
    """Coefficient vector over a truncated basis; element of a boundary space."""

    __slots__ = ("space", "coeffs", "truncation_loss")

    def __init__(self, space, coeffs, truncation_loss=0):
        if len(coeffs) != space.dim:
            raise ValueError("coefficient length does not match space dimension")
        self.space = space
        self.coeffs = list(coeffs)
        self.truncation_loss = truncation_loss

    def copy(self):
        return BoundaryState(self.space, self.coeffs, self.truncation_loss)

    def __add__(self, other):
        _check_space(self, other)
        return BoundaryState(
            self.space,
            [a + b for a, b in zip(self.coeffs, other.coeffs)],
            self.truncation_loss + other.truncation_loss,
        )

    def __sub__(self, other):
        _check_space(self, other)
        return BoundaryState(
            self.space,
            [a - b for a, b in zip(self.coeffs, other.coeffs)],
            self.truncation_loss + other.truncation_loss,
        )

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c) -> "BoundaryState":
        return BoundaryState(self.space, [c * a for a in self.coeffs], self.truncation_loss)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return (
            isinstance(other, BoundaryState)
            and self.space is other.space
            and self.coeffs == other.coeffs
        )

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def norm_inf(self) -> float:
        return max((abs(float(c)) for c in self.coeffs), default=0.0)

    def nonzero(self):
        return [(i, c) for i, c in enumerate(self.coeffs) if c != 0]

    def levels_present(self):
        return sorted({self.space.levels[i] for i, _ in self.nonzero()})

    def __repr__(self):
        terms = [f"{c}*{self.space.basis[i]!r}" for i, c in self.nonzero()[:6]]
        return "BoundaryState(" + " + ".join(terms or ["0"]) + ")"


def _check_space(a, b):
    if a.space is not b.space:
        raise SpaceMismatchError("operands live in different truncated spaces")


class ModeOperator:
    """Sparse action of j_n / jbar_n / L_n / Lbar_n on a truncated space."""

    __slots__ = ("kind", "n", "space", "entries", "dropped_cols")

    def __init__(self, kind, n, space, entries, dropped_cols=frozenset()):
        self.kind = kind
        self.n = n
        self.space = space
        self.entries = entries  # {(row, col): scalar}
        self.dropped_cols = frozenset(dropped_cols)

    def compose(self, other) -> "ModeOperator":
        """Matrix product self @ other (other acts first)."""
        if self.space is not other.space:
            raise SpaceMismatchError("operators live in different spaces")
        by_col: dict[int, list] = {}
        for (i, j), val in self.entries.items():
            by_col.setdefault(j, []).append((i, val))
        entries: dict[tuple[int, int], object] = {}
        for (mid, col), val in other.entries.items():
            for row, val2 in by_col.get(mid, ()):
                key = (row, col)
                entries[key] = entries.get(key, 0) + val2 * val
        entries = {k: v for k, v in entries.items() if v != 0}
        return ModeOperator(
            "composite",
            None,
            self.space,
            entries,
            self.dropped_cols | other.dropped_cols,
        )

    def add(self, other, scale_other=1) -> "ModeOperator":
        if self.space is not other.space:
            raise SpaceMismatchError("operators live in different spaces")
        entries = dict(self.entries)
        for key, val in other.entries.items():
            entries[key] = entries.get(key, 0) + scale_other * val
        entries = {k: v for k, v in entries.items() if v != 0}
        return ModeOperator(
            "composite", None, self.space, entries, self.dropped_cols | other.dropped_cols
        )

    def scale(self, c) -> "ModeOperator":
        return ModeOperator(
            self.kind,
            self.n,
            self.space,
            {k: c * v for k, v in self.entries.items()},
            self.dropped_cols,
        )

    def is_zero(self) -> bool:
        return not self.entries

    def __add__(self, other):
        return self.add(other)

    def __mul__(self, other):
        if isinstance(other, ModeOperator):
            return self.compose(other)
        if isinstance(other, BoundaryState):
            return apply_mode(self, other)
        return self.scale(other)

    def __rmul__(self, c):
        return self.scale(c)

    def __eq__(self, other):
        return (
            isinstance(other, ModeOperator)
            and self.space is other.space
            and self.entries == other.entries
        )


def build_space(l_max: int, exact: bool = True) -> TruncatedFockSpace:
    return TruncatedFockSpace(l_max, exact=exact)


def _one(space):
    return Fraction(1) if space.exact else 1.0


def current_mode(space: TruncatedFockSpace, n: int, bar: bool = False) -> ModeOperator:
    """j_n (bar=False) or jbar_n acting on the truncated space.

    j_{-n} with n>0 adds a part; j_n removes one occurrence of n with
    weight n * multiplicity, per [j_m, j_n] = m delta_{m+n,0}.
    """
    kind = "jbar" if bar else "j"
    entries: dict[tuple[int, int], object] = {}
    dropped = set()
    one = _one(space)
    for col, state in enumerate(space.basis):
        mu = state.antichiral.parts if bar else state.chiral.parts
        other = state.chiral.parts if bar else state.antichiral.parts
        if n == 0:
            continue
        if n < 0:
            new = tuple(sorted(mu + (-n,), reverse=True))
            if state.level + (-n) > space.l_max:
                dropped.add(col)
                continue
            row = space.find(other, new) if bar else space.find(new, other)
            entries[(row, col)] = entries.get((row, col), 0) + one
        else:
            count = mu.count(n)
            if count == 0:
                continue
            new = list(mu)
            new.remove(n)
            new = tuple(new)
            row = space.find(other, new) if bar else space.find(new, other)
            entries[(row, col)] = entries.get((row, col), 0) + n * count * one
    return ModeOperator(kind, n, space, entries, dropped)


def build_virasoro(
    space: TruncatedFockSpace, n: int, bar: bool = False, shifted: bool = False
) -> ModeOperator:
    """L_n = (1/2) sum_k :j_{-k} j_{k+n}: with the sum truncated to
    |k| <= l_max + |n| (omitted terms annihilate every truncated state).

    With shifted=True, L_0 carries the -1/24 vacuum-energy offset.
    """
    if abs(n) > 2 * space.l_max and space.l_max > 0:
        # larger modes act as zero on the truncation
        return ModeOperator("Lbar" if bar else "L", n, space, {}, frozenset())
    half = Fraction(1, 2) if space.exact else 0.5
    total: dict[tuple[int, int], object] = {}
    dropped = set()
    kmax = space.l_max + abs(n)
    for k in range(-kmax, kmax + 1):
        m1, m2 = -k, k + n
        if m1 > m2:
            continue  # each unordered pair once; see weight below
        if m1 == 0 or m2 == 0:
            continue  # j_0 acts as zero
        # the k-sum visits (m1, m2) and (m2, m1); normal ordering makes both
        # equal j_{m1} j_{m2}, so the pair carries weight 2 * 1/2 unless m1 == m2
        weight = half if m1 == m2 else 2 * half
        a = current_mode(space, m1, bar=bar)
        b = current_mode(space, m2, bar=bar)
        prod = a.compose(b)
        dropped |= prod.dropped_cols
        for key, val in prod.entries.items():
            total[key] = total.get(key, 0) + weight * val
    if shifted and n == 0:
        shift = Fraction(-1, 24) if space.exact else -1.0 / 24.0
        for i in range(space.dim):
            total[(i, i)] = total.get((i, i), 0) + shift
    total = {k: v for k, v in total.items() if v != 0}
    # columns that can genuinely overflow under a level-raising L_n
    if n < 0:
        dropped |= {
            col for col, lv in enumerate(space.levels) if lv + (-n) > space.l_max
        }
    return ModeOperator("Lbar" if bar else "L", n, space, total, dropped)


def apply_mode(op: ModeOperator, v: BoundaryState) -> BoundaryState:
    """Linear action of a mode operator; counts truncation losses."""
    if op.space is not v.space:
        raise SpaceMismatchError("operator and state live in different spaces")
    out = [v.space.zero_scalar()] * v.space.dim
    for (i, j), val in op.entries.items():
        c = v.coeffs[j]
        if c != 0:
            out[i] = out[i] + val * c
    loss = sum(1 for j, c in enumerate(v.coeffs) if c != 0 and j in op.dropped_cols)
    return BoundaryState(v.space, out, v.truncation_loss + loss)


def commutator(a: ModeOperator, b: ModeOperator) -> ModeOperator:
    return a.compose(b).add(b.compose(a), scale_other=-1)


@lru_cache(maxsize=None)
def _chiral_norm(parts: tuple[int, ...]) -> int:
    """<mu|mu> = prod_k k^{m_k} m_k! from repeated mode commutation."""
    norm = 1
    for part in set(parts):
        m = parts.count(part)
        fact = 1
        for i in range(2, m + 1):
            fact *= i
        norm *= part**m * fact
    return norm


def shapovalov(u: BoundaryState, v: BoundaryState):
    """Bilinear Shapovalov pairing; basis states are pairwise orthogonal."""
    _check_space(u, v)
    space = u.space
    total = space.zero_scalar()
    for i, cu in enumerate(u.coeffs):
        cv = v.coeffs[i]
        if cu != 0 and cv != 0:
            state = space.basis[i]
            norm = _chiral_norm(state.chiral.parts) * _chiral_norm(
                state.antichiral.parts
            )
            total = total + cu * cv * norm
    return total
