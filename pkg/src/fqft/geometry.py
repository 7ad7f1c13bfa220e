"""Surfaces, their partition functions, and the cutting axiom.

Cylinder and annulus partition functions are diagonal operators in the
level-graded basis; the disk partition function is the vacuum state.  Gluing
composes operators or applies them to boundary states, and verify_cutting
checks the quadratic cutting identities over chains of nested annuli.

The shifted convention L_0 -> L_0 - 1/24 is the default, so annulus entries
are (r/R)^{total level} and the disk is radius-independent; shifted=False
restores the explicit 1/12 in the annulus exponent for cross-checks.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

from .errors import GeometryError, SpaceMismatchError
from .fock import BoundaryState, TruncatedFockSpace
from .scalars import PowerValue, as_float, scalar_eq


class Surface:
    """One of cylinder(H), annulus(R, r), disk(R)."""

    __slots__ = ("kind", "params")

    def __init__(self, kind, **params):
        if kind == "cylinder":
            if params.get("H", 0) <= 0:
                raise GeometryError("cylinder length must be positive")
        elif kind == "annulus":
            R, r = params.get("R", 0), params.get("r", 0)
            if not R > r > 0:
                raise GeometryError("annulus radii must satisfy R > r > 0")
        elif kind == "disk":
            if params.get("R", 0) <= 0:
                raise GeometryError("disk radius must be positive")
        else:
            raise GeometryError(f"unknown surface kind {kind!r}")
        self.kind = kind
        self.params = dict(params)

    def __repr__(self):
        args = ", ".join(f"{k}={v}" for k, v in sorted(self.params.items()))
        return f"Surface({self.kind}, {args})"


class PartitionFunction:
    """Diagonal operator (cylinder/annulus) or boundary state (disk)."""

    __slots__ = ("surface", "space", "diag", "state")

    def __init__(self, surface, space, diag=None, state=None):
        if (diag is None) == (state is None):
            raise ValueError("exactly one of diag/state must be given")
        self.surface = surface
        self.space = space
        self.diag = diag  # list of scalars, one per basis state
        self.state = state  # BoundaryState

    @property
    def is_operator(self):
        return self.diag is not None

    def apply(self, v: BoundaryState) -> BoundaryState:
        if self.space is not v.space:
            raise SpaceMismatchError("partition function and state spaces differ")
        return BoundaryState(
            self.space, [d * c for d, c in zip(self.diag, v.coeffs)], v.truncation_loss
        )


def _level_energy(space, i, shifted, exact):
    """Shifted L_0 + Lbar_0 eigenvalue of basis state i."""
    lv = space.levels[i]
    if shifted:
        return lv
    return lv + Fraction(1, 12) if exact else lv + 1.0 / 12.0


def cylinder_pf(space: TruncatedFockSpace, H, shifted: bool = True) -> PartitionFunction:
    """exp(-H (L_0 + Lbar_0)) on the cylinder of length H."""
    if H <= 0:
        raise GeometryError("cylinder length must be positive")
    surface = Surface("cylinder", H=H)
    if space.exact:
        diag = [
            PowerValue.from_exp(-Fraction(H) * _level_energy(space, i, shifted, True))
            for i in range(space.dim)
        ]
    else:
        diag = [
            math.exp(-float(H) * _level_energy(space, i, shifted, False))
            for i in range(space.dim)
        ]
    return PartitionFunction(surface, space, diag=diag)


def annulus_pf(
    space: TruncatedFockSpace, R, r, shifted: bool = True
) -> PartitionFunction:
    """(r/R)^{L_0 + Lbar_0} on the annulus r <= |z| <= R."""
    if not R > r > 0:
        raise GeometryError("annulus radii must satisfy R > r > 0")
    surface = Surface("annulus", R=R, r=r)
    if space.exact:
        ratio = Fraction(r) / Fraction(R)
        if shifted:
            diag = [ratio ** space.levels[i] for i in range(space.dim)]
        else:
            diag = [
                PowerValue.from_pow(ratio, _level_energy(space, i, False, True))
                for i in range(space.dim)
            ]
    else:
        ratio = float(r) / float(R)
        diag = [
            ratio ** float(_level_energy(space, i, shifted, False))
            for i in range(space.dim)
        ]
    return PartitionFunction(surface, space, diag=diag)


def disk_pf(space: TruncatedFockSpace, R, shifted: bool = True) -> PartitionFunction:
    """Vacuum boundary state on the disk of radius R.

    In the shifted convention the result is R-independent; unshifted it
    carries the conformal-anomaly factor R^{-1/12}.
    """
    if R <= 0:
        raise GeometryError("disk radius must be positive")
    surface = Surface("disk", R=R)
    vac = space.vacuum()
    if not shifted:
        if space.exact:
            vac = vac.scale(PowerValue.from_pow(Fraction(R), Fraction(-1, 12)))
        else:
            vac = vac.scale(float(R) ** (-1.0 / 12.0))
    return PartitionFunction(surface, space, state=vac)


def _glued_surface(outer: Surface, inner: Surface) -> Surface:
    if outer.kind == "cylinder" and inner.kind == "cylinder":
        return Surface("cylinder", H=outer.params["H"] + inner.params["H"])
    if outer.kind == "annulus" and inner.kind == "annulus":
        if outer.params["r"] != inner.params["R"]:
            raise GeometryError(
                "annulus gluing needs inner radius of outer = outer radius of inner"
            )
        return Surface("annulus", R=outer.params["R"], r=inner.params["r"])
    if outer.kind == "annulus" and inner.kind == "disk":
        if outer.params["r"] != inner.params["R"]:
            raise GeometryError("disk radius must match the annulus inner radius")
        return Surface("disk", R=outer.params["R"])
    raise GeometryError(f"cannot glue {outer.kind} onto {inner.kind}")


def glue(outer: PartitionFunction, inner) -> PartitionFunction:
    """Sew the inner boundary of `outer` to the outer boundary of `inner`."""
    if isinstance(inner, BoundaryState):
        if not outer.is_operator:
            raise GeometryError("outer piece of a gluing must be an operator")
        if outer.space is not inner.space:
            raise SpaceMismatchError("gluing across different truncated spaces")
        return PartitionFunction(outer.surface, outer.space, state=outer.apply(inner))
    if outer.space is not inner.space:
        raise SpaceMismatchError("gluing across different truncated spaces")
    surface = _glued_surface(outer.surface, inner.surface)
    if not outer.is_operator:
        raise GeometryError("outer piece of a gluing must be an operator")
    if inner.is_operator:
        diag = [a * b for a, b in zip(outer.diag, inner.diag)]
        return PartitionFunction(surface, outer.space, diag=diag)
    return PartitionFunction(surface, outer.space, state=outer.apply(inner.state))


def disjoint_union_pf(a: PartitionFunction, b: PartitionFunction):
    """Product axiom: the partition function of a disjoint union is the
    tensor product.  Returned as the dict of Kronecker diagonal entries."""
    if not (a.is_operator and b.is_operator):
        raise GeometryError("disjoint union check implemented for operators")
    return {
        (i, j): a.diag[i] * b.diag[j]
        for i in range(a.space.dim)
        for j in range(b.space.dim)
    }


def _diag_residual(diag_a, diag_b, exact):
    """Max-abs entrywise residual; index of the worst entry."""
    worst, arg = 0.0, None
    for i, (x, y) in enumerate(zip(diag_a, diag_b)):
        if exact:
            if not scalar_eq(x, y):
                d = abs(as_float(x) - as_float(y)) or float("inf")
                if d > worst or arg is None:
                    worst, arg = d, i
        else:
            d = abs(as_float(x) - as_float(y))
            if d > worst:
                worst, arg = d, i
    return worst, arg


def verify_cutting(space, cut_points, shifted=True, corrupt=None, threads=1):
    """Check the cutting axiom on an annulus chain.

    cut_points is a decreasing list of radii [R_0 > R_1 > ... > R_n]; for
    every intermediate cut m the identity
        annulus(R_0, R_m) o annulus(R_m, R_n) = annulus(R_0, R_n)
    is checked entrywise, plus the disk closure
        annulus(R_0, R_n) |disk(R_n)> = |disk(R_0)>.
    `corrupt` optionally perturbs one diagonal entry (basis index) of a glued
    factor, for fault-injection tests.  Returns a residual report dict.
    """
    radii = list(cut_points)
    if len(radii) < 2 or any(radii[i] <= radii[i + 1] for i in range(len(radii) - 1)):
        raise GeometryError("cut points must be strictly decreasing radii")
    R0, Rn = radii[0], radii[-1]
    direct = annulus_pf(space, R0, Rn, shifted=shifted)

    def check_cut(m):
        outer = annulus_pf(space, R0, radii[m], shifted=shifted)
        inner = annulus_pf(space, radii[m], Rn, shifted=shifted)
        if corrupt is not None:
            idx = corrupt
            bad = list(inner.diag)
            bump = Fraction(1, 100) if space.exact else 0.01
            bad[idx] = bad[idx] + bump
            inner = PartitionFunction(inner.surface, space, diag=bad)
        glued = glue(outer, inner)
        return _diag_residual(glued.diag, direct.diag, space.exact)

    cuts = range(1, len(radii) - 1)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(check_cut, cuts))
    else:
        results = [check_cut(m) for m in cuts]

    worst, arg, worst_cut = 0.0, None, None
    for m, (res, idx) in zip(cuts, results):
        if idx is not None and (arg is None or res > worst):
            worst, arg, worst_cut = res, idx, m

    # disk closure
    disk_inner = disk_pf(space, Rn, shifted=shifted)
    closed = glue(direct, disk_inner)
    disk_direct = disk_pf(space, R0, shifted=shifted)
    if space.exact:
        disk_ok = all(
            scalar_eq(x, y)
            for x, y in zip(closed.state.coeffs, disk_direct.state.coeffs)
        )
        disk_res = 0.0 if disk_ok else max(
            abs(as_float(x) - as_float(y))
            for x, y in zip(closed.state.coeffs, disk_direct.state.coeffs)
        )
    else:
        disk_res = max(
            abs(as_float(x) - as_float(y))
            for x, y in zip(closed.state.coeffs, disk_direct.state.coeffs)
        )

    return {
        "l_max": space.l_max,
        "mode": "exact" if space.exact else "f64",
        "shifted": shifted,
        "cuts_checked": len(list(cuts)),
        "max_residual": worst,
        "offending_index": arg,
        "offending_cut": worst_cut,
        "disk_residual": disk_res,
        "exact_zero": space.exact and arg is None and disk_res == 0.0,
    }
