"""Tests for surfaces, partition functions, gluing, and the cutting axiom."""

import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fqft.errors import GeometryError, SpaceMismatchError
from fqft.fock import build_space
from fqft.geometry import (
    PartitionFunction,
    Surface,
    annulus_pf,
    cylinder_pf,
    disjoint_union_pf,
    disk_pf,
    glue,
    verify_cutting,
)
from fqft.scalars import PowerValue, as_float, scalar_eq


def test_surface_validation():
    with pytest.raises(GeometryError):
        Surface("cylinder", H=0)
    with pytest.raises(GeometryError):
        Surface("annulus", R=1, r=1)
    with pytest.raises(GeometryError):
        Surface("annulus", R=Fraction(1, 2), r=1)
    with pytest.raises(GeometryError):
        Surface("disk", R=-1)
    with pytest.raises(GeometryError):
        Surface("torus")


def test_cylinder_entries():
    space = build_space(3)
    pf = cylinder_pf(space, 1)
    i0 = space.find((), ())
    i1 = space.find((1,), ())
    # shifted convention: vacuum energy 0, level gap 1 gives e^{-H}
    assert scalar_eq(pf.diag[i0], 1)
    assert pf.diag[i1] == pf.diag[i0] * PowerValue.from_exp(-1)


def test_cylinder_semigroup():
    space = build_space(3)
    a = glue(cylinder_pf(space, Fraction(1, 3)), cylinder_pf(space, Fraction(2, 3)))
    b = cylinder_pf(space, 1)
    assert all(scalar_eq(x, y) for x, y in zip(a.diag, b.diag))
    assert a.surface.kind == "cylinder" and a.surface.params["H"] == 1


def test_cylinder_h_to_zero_limit():
    space = build_space(2)
    pf = cylinder_pf(space, Fraction(1, 10**6), shifted=True)
    for d in pf.diag:
        assert abs(as_float(d) - 1.0) < 1e-5


def test_annulus_entries_shifted():
    space = build_space(3)
    pf = annulus_pf(space, 2, 1)
    assert pf.diag[space.find((), ())] == 1
    assert pf.diag[space.find((1,), (1,))] == Fraction(1, 4)
    assert pf.diag[space.find((2, 1), ())] == Fraction(1, 8)


def test_annulus_ratio_dependence_only():
    space = build_space(3)
    a = annulus_pf(space, 2, 1)
    b = annulus_pf(space, 6, 3)
    assert a.diag == b.diag


def test_annulus_unshifted_exponent():
    space = build_space(2)
    pf = annulus_pf(space, 2, 1, shifted=False)
    vac = pf.diag[space.find((), ())]
    assert vac == PowerValue.from_pow(Fraction(1, 2), Fraction(1, 12))
    lvl2 = pf.diag[space.find((1, 1), ())]
    assert lvl2 == PowerValue.from_pow(Fraction(1, 2), Fraction(25, 12))


def test_annulus_composition():
    space = build_space(4)
    glued = glue(annulus_pf(space, 4, 2), annulus_pf(space, 2, 1))
    direct = annulus_pf(space, 4, 1)
    assert glued.diag == direct.diag
    assert glued.surface.params == {"R": 4, "r": 1}


def test_annulus_composition_unshifted():
    space = build_space(3)
    glued = glue(
        annulus_pf(space, 4, 2, shifted=False), annulus_pf(space, 2, 1, shifted=False)
    )
    direct = annulus_pf(space, 4, 1, shifted=False)
    assert all(scalar_eq(x, y) for x, y in zip(glued.diag, direct.diag))


def test_geometric_mismatch():
    space = build_space(2)
    with pytest.raises(GeometryError):
        glue(annulus_pf(space, 4, 2), annulus_pf(space, 3, 1))
    with pytest.raises(GeometryError):
        glue(annulus_pf(space, 4, 2), disk_pf(space, 1))


def test_space_mismatch():
    a, b = build_space(2), build_space(2)
    with pytest.raises(SpaceMismatchError):
        glue(annulus_pf(a, 2, 1), annulus_pf(b, 4, 2))


def test_disk_vacuum_and_cutting_closure():
    space = build_space(4)
    for R in (1, 2, Fraction(7, 3)):
        pf = disk_pf(space, R)
        assert pf.state == space.vacuum()
    closed = glue(annulus_pf(space, 3, 1), disk_pf(space, 1))
    assert closed.state == space.vacuum()
    assert closed.surface.kind == "disk" and closed.surface.params["R"] == 3


def test_disk_unshifted_radius_dependence():
    space = build_space(2)
    pf = disk_pf(space, 2, shifted=False)
    i0 = space.find((), ())
    assert pf.state.coeffs[i0] == PowerValue.from_pow(2, Fraction(-1, 12))
    # cutting still holds unshifted: annulus(R,r) |D_r> = |D_R>
    closed = glue(annulus_pf(space, 2, 1, shifted=False), disk_pf(space, 1, shifted=False))
    direct = disk_pf(space, 2, shifted=False)
    assert all(
        scalar_eq(x, y) for x, y in zip(closed.state.coeffs, direct.state.coeffs)
    )


def test_glue_associativity_on_random_state():
    space = build_space(3)
    rng = random.Random(7)
    v = space.zero()
    for i in range(space.dim):
        v.coeffs[i] = Fraction(rng.randint(-5, 5), rng.randint(1, 4))
    lhs = glue(annulus_pf(space, 4, 2), glue(annulus_pf(space, 2, 1), v).state)
    rhs = glue(annulus_pf(space, 4, 1), v)
    assert lhs.state == rhs.state


def test_product_axiom_disjoint_union():
    space = build_space(2)
    a = cylinder_pf(space, 1)
    b = cylinder_pf(space, 2)
    kron = disjoint_union_pf(a, b)
    c3 = cylinder_pf(space, 3)
    # sanity: the (i,i) block diagonal multiplies energies additively
    for i in range(space.dim):
        assert scalar_eq(kron[(i, i)], c3.diag[i] * PowerValue.from_exp(0))
    # generic entry equals the scalar product of the factors
    assert scalar_eq(kron[(0, 1)], a.diag[0] * b.diag[1])


@given(st.integers(min_value=0, max_value=4))
@settings(max_examples=5, deadline=None)
def test_verify_cutting_exact(l_max):
    space = build_space(l_max)
    report = verify_cutting(space, [Fraction(4), Fraction(3), Fraction(2), Fraction(1)])
    assert report["exact_zero"]
    assert report["offending_index"] is None


def test_verify_cutting_float():
    space = build_space(6, exact=False)
    report = verify_cutting(space, [4.0, 3.0, 2.5, 2.0, 1.0])
    assert report["max_residual"] < 1e-12
    assert report["disk_residual"] < 1e-12


def test_verify_cutting_fault_injection():
    space = build_space(3)
    report = verify_cutting(space, [Fraction(4), Fraction(2), Fraction(1)], corrupt=5)
    assert report["max_residual"] > 0
    assert report["offending_index"] == 5


def test_verify_cutting_threads():
    space = build_space(4)
    pts = [Fraction(k) for k in range(8, 0, -1)]
    seq = verify_cutting(space, pts, threads=1)
    par = verify_cutting(space, pts, threads=4)
    assert seq == par
    assert seq["exact_zero"]


def test_cutting_unshifted_convention():
    space = build_space(3)
    report = verify_cutting(
        space, [Fraction(3), Fraction(2), Fraction(1)], shifted=False
    )
    assert report["exact_zero"]


def test_bad_cut_points():
    space = build_space(2)
    with pytest.raises(GeometryError):
        verify_cutting(space, [1, 2, 3])
    with pytest.raises(GeometryError):
        verify_cutting(space, [2])


def test_float_cylinder_matches_exact():
    exact = build_space(3)
    flt = build_space(3, exact=False)
    pe = cylinder_pf(exact, Fraction(1, 2))
    pf = cylinder_pf(flt, 0.5)
    for x, y in zip(pe.diag, pf.diag):
        assert math.isclose(as_float(x), y, rel_tol=1e-13)
