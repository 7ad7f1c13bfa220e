"""Nilpotent coupling jets.

Couplings enter perturbation theory as nilpotent symbols: within one
deformation family all products g^alpha g^beta vanish, and the combined
coupling g_c of a double deformation is nilpotent at order two.  Nilpotency
is therefore tracked per *group* of symbols (total degree within the group),
on top of a global truncation order.

recombine() rewrites a double-deformation expression in (g, g~) as an
expression in the combined coupling g_c = g + g~, demanding the symmetry of
the bilinear part.
"""

from __future__ import annotations

from .errors import RecombinationError
from .rexp import coeff_eq, coeff_is_zero


class JetAlgebra:
    """Symbols with grouped nilpotency orders and a global truncation."""

    def __init__(self, groups, truncation=2):
        """groups: {group_name: (list of symbol names, nilpotency order)}."""
        self.groups = {g: (tuple(syms), int(order)) for g, (syms, order) in groups.items()}
        self.truncation = int(truncation)
        self.group_of = {}
        for g, (syms, _) in self.groups.items():
            for s in syms:
                if s in self.group_of:
                    raise ValueError(f"symbol {s!r} appears in two groups")
                self.group_of[s] = g
        self.symbols = tuple(sorted(self.group_of))

    @classmethod
    def double_coupling(cls, labels, truncation=2):
        """Symbols g[l], gt[l] for a double deformation over `labels`."""
        labels = list(labels)
        return cls(
            {
                "g": ([f"g[{l}]" for l in labels], 1),
                "gt": ([f"gt[{l}]" for l in labels], 1),
            },
            truncation=truncation,
        )

    @classmethod
    def combined_coupling(cls, labels, truncation=2):
        """Order-2 nilpotent combined symbols gc[l]."""
        return cls({"gc": ([f"gc[{l}]" for l in labels], 2)}, truncation=truncation)

    def monomial_ok(self, mono) -> bool:
        if len(mono) > self.truncation:
            return False
        degree = {}
        for s in mono:
            g = self.group_of.get(s)
            if g is None:
                raise ValueError(f"unknown symbol {s!r}")
            degree[g] = degree.get(g, 0) + 1
        return all(degree[g] <= self.groups[g][1] for g in degree)

    def __eq__(self, other):
        if not isinstance(other, JetAlgebra):
            return NotImplemented
        return self.groups == other.groups and self.truncation == other.truncation

    def __hash__(self):
        return hash((tuple(sorted(self.groups.items())), self.truncation))


class Jet:
    """Polynomial in nilpotent symbols; monomials are sorted name tuples."""

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra, coeffs=None):
        self.algebra = algebra
        self.coeffs = {}
        for mono, c in (coeffs or {}).items():
            mono = tuple(sorted(mono))
            if algebra.monomial_ok(mono) and not coeff_is_zero(c):
                self.coeffs[mono] = c

    @classmethod
    def const(cls, algebra, value):
        return cls(algebra, {(): value})

    @classmethod
    def symbol(cls, algebra, name, coeff=1):
        return cls(algebra, {(name,): coeff})

    def coefficient(self, mono=()):
        return self.coeffs.get(tuple(sorted(mono)))

    def __add__(self, other):
        self._check(other)
        coeffs = dict(self.coeffs)
        for mono, c in other.coeffs.items():
            if mono in coeffs:
                s = coeffs[mono] + c
                if coeff_is_zero(s):
                    del coeffs[mono]
                else:
                    coeffs[mono] = s
            else:
                coeffs[mono] = c
        out = Jet.__new__(Jet)
        out.algebra, out.coeffs = self.algebra, coeffs
        return out

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s):
        return Jet(self.algebra, {m: s * c for m, c in self.coeffs.items()})

    def __rmul__(self, s):
        return self.scale(s)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return self.scale(other)
        return jet_mul(self, other)

    def map_coeffs(self, f):
        return Jet(self.algebra, {m: f(c) for m, c in self.coeffs.items()})

    def __eq__(self, other):
        if not isinstance(other, Jet):
            return NotImplemented
        if self.algebra != other.algebra:
            return False
        monos = set(self.coeffs) | set(other.coeffs)
        return all(coeff_eq(self.coeffs.get(m), other.coeffs.get(m)) for m in monos)

    def is_zero(self):
        return not self.coeffs

    def __repr__(self):
        bits = []
        for mono in sorted(self.coeffs):
            label = "*".join(mono) if mono else "1"
            bits.append(f"{label}: {self.coeffs[mono]!r}")
        return "Jet{" + ", ".join(bits) + "}"

    def _check(self, other):
        if self.algebra != other.algebra:
            raise ValueError("jets over different algebras")


def jet_mul(a: Jet, b: Jet) -> Jet:
    """Truncated commutative product; nilpotent monomials drop out."""
    a._check(b)
    alg = a.algebra
    coeffs = {}
    for ma, ca in a.coeffs.items():
        for mb, cb in b.coeffs.items():
            mono = tuple(sorted(ma + mb))
            if not alg.monomial_ok(mono):
                continue
            prod = _coeff_mul(ca, cb)
            if mono in coeffs:
                coeffs[mono] = coeffs[mono] + prod
            else:
                coeffs[mono] = prod
    return Jet(alg, coeffs)


def _coeff_mul(a, b):
    """Product of jet coefficients: scalar action on vector-like values."""
    try:
        return a * b
    except TypeError:
        return b.scale(a) if hasattr(b, "scale") else a.scale(b)


def _split_symbol(name):
    """'g[x]' -> ('g', 'x')."""
    head, _, rest = name.partition("[")
    return head, rest[:-1]


def recombine(expr: Jet, labels=None) -> Jet:
    """Rewrite a (g, g~) double-deformation jet in the combined coupling.

    Linear parts must pair up (g_c = g + g~); the mixed bilinear part must be
    symmetric, and maps to (1/2) g_c g_c.  Anything else cannot be expressed
    in g_c alone and raises RecombinationError.
    """
    if labels is None:
        labels = sorted(
            {_split_symbol(s)[1] for s in expr.algebra.symbols if _split_symbol(s)[0] in ("g", "gt")}
        )
    target = JetAlgebra.combined_coupling(labels, truncation=expr.algebra.truncation)
    out = {}
    seen = set()
    const = expr.coefficient(())
    if const is not None:
        out[()] = const
    for label in labels:
        cg = expr.coefficient((f"g[{label}]",))
        cgt = expr.coefficient((f"gt[{label}]",))
        if not coeff_eq(cg, cgt):
            raise RecombinationError(
                f"linear coefficients of g[{label}] and gt[{label}] differ"
            )
        if cg is not None:
            out[(f"gc[{label}]",)] = cg
        seen.add((f"g[{label}]",))
        seen.add((f"gt[{label}]",))
    seen.add(())
    for i, li in enumerate(labels):
        for lj in labels:
            mono = tuple(sorted((f"gt[{li}]", f"g[{lj}]")))
            seen.add(mono)
        for lj in labels[i:]:
            s_ij = expr.coefficient((f"gt[{li}]", f"g[{lj}]"))
            s_ji = expr.coefficient((f"gt[{lj}]", f"g[{li}]"))
            if li == lj:
                if s_ij is None:
                    continue
                half = _halve(s_ij)
                out[(f"gc[{li}]", f"gc[{li}]")] = half
            else:
                if not coeff_eq(s_ij, s_ji):
                    raise RecombinationError(
                        f"bilinear part not symmetric in ({li}, {lj})"
                    )
                if s_ij is not None:
                    out[tuple(sorted((f"gc[{li}]", f"gc[{lj}]")))] = s_ij
    extra = set(expr.coeffs) - seen
    if extra:
        raise RecombinationError(f"monomials outside the (g, g~) scheme: {sorted(extra)}")
    return Jet(target, out)


def _halve(c):
    from fractions import Fraction

    if hasattr(c, "shape"):  # numpy coefficients stay float
        return c / 2
    try:
        return Fraction(1, 2) * c
    except TypeError:
        return c / 2
