"""Tests for the truncated Fock module."""

import json
from fractions import Fraction

from hypothesis import given, settings
from hypothesis import strategies as st

from fqft.fock import (
    BoundaryState,
    FockBasisState,
    Partition,
    TruncatedFockSpace,
    apply_mode,
    build_space,
    build_virasoro,
    commutator,
    current_mode,
    partition_count,
    partitions,
    shapovalov,
)
from fqft.errors import ResourceLimitError, SpaceMismatchError

import pytest


def test_partition_counts():
    # p(0..8) = 1,1,2,3,5,7,11,15,22
    expected = [1, 1, 2, 3, 5, 7, 11, 15, 22]
    assert [partition_count(n) for n in range(9)] == expected


def test_partitions_are_sorted_and_valid():
    for n in range(7):
        ps = partitions(n)
        assert len(set(ps)) == len(ps)
        for p in ps:
            assert sum(p) == n
            assert all(p[i] >= p[i + 1] for i in range(len(p) - 1))
        assert list(ps) == sorted(ps)


def test_space_dimension():
    # dim(l_max) = sum_{k+m <= l_max} p(k) p(m)
    dims = {0: 1, 1: 3, 2: 8, 4: 38, 6: 139}
    for l_max, d in dims.items():
        assert build_space(l_max).dim == d


def test_space_hard_cap():
    with pytest.raises(ResourceLimitError):
        build_space(40)


def test_basis_graded_lex_order():
    space = build_space(3)
    levels = [s.level for s in space.basis]
    assert levels == sorted(levels)
    assert space.basis[0] == FockBasisState((), ())


def test_state_lookup_roundtrip():
    space = build_space(4)
    v = space.state((2, 1), (1,))
    idx = [i for i, c in enumerate(v.coeffs) if c != 0]
    assert len(idx) == 1
    s = space.basis[idx[0]]
    assert s.chiral.parts == (2, 1) and s.antichiral.parts == (1,)


def test_current_mode_raising_and_lowering():
    space = build_space(4)
    vac = space.vacuum()
    jm1 = current_mode(space, -1)
    jp1 = current_mode(space, 1)
    v = apply_mode(jm1, vac)
    assert v == space.state((1,))
    # j_1 j_{-1}|0> = [j_1, j_{-1}]|0> = |0>
    assert apply_mode(jp1, v) == vac
    # j_1 (j_{-1})^2 |0> = 2 j_{-1}|0>
    v2 = apply_mode(jm1, v)
    assert apply_mode(jp1, v2) == space.state((1,)).scale(2)


def test_current_mode_zero_mode_vanishes():
    space = build_space(3)
    j0 = current_mode(space, 0)
    assert j0.entries == {}


def test_antichiral_modes_commute_with_chiral():
    space = build_space(4)
    jm1 = current_mode(space, -1)
    jbm2 = current_mode(space, -2, bar=True)
    comm = commutator(jm1, jbm2)
    # commutator entries may only involve dropped columns; check action on
    # states with headroom
    v = space.vacuum()
    a = apply_mode(jm1, apply_mode(jbm2, v))
    b = apply_mode(jbm2, apply_mode(jm1, v))
    assert a == b
    assert a == space.state((1,), (2,))
    assert not any(
        val != 0 for (i, j), val in comm.entries.items() if space.levels[j] <= 1
    )


@given(
    m=st.integers(min_value=-3, max_value=3).filter(lambda x: x != 0),
    n=st.integers(min_value=-3, max_value=3).filter(lambda x: x != 0),
)
@settings(max_examples=40, deadline=None)
def test_current_commutator_interior(m, n):
    # [j_m, j_n] = m delta_{m+n,0} on columns with enough headroom
    space = build_space(6)
    comm = commutator(current_mode(space, m), current_mode(space, n))
    headroom = max(0, -m) + max(0, -n)
    for (i, j), val in comm.entries.items():
        if space.levels[j] + headroom <= space.l_max:
            expected = m * Fraction(1) if (m + n == 0 and i == j) else 0
            assert val == expected, (m, n, i, j, val)


def test_virasoro_l0_counts_level():
    space = build_space(5)
    L0 = build_virasoro(space, 0)
    Lb0 = build_virasoro(space, 0, bar=True)
    v = space.state((2, 1), (1,))
    assert apply_mode(L0, v) == v.scale(3)
    assert apply_mode(Lb0, v) == v.scale(1)


def test_virasoro_l0_shifted():
    space = build_space(3)
    L0 = build_virasoro(space, 0, shifted=True)
    vac = space.vacuum()
    assert apply_mode(L0, vac) == vac.scale(Fraction(-1, 24))


def test_virasoro_on_vacuum():
    space = build_space(4)
    # L_{-1}|0> = 0 for the j-vacuum? No: L_{-1}|0> = j_{-1} j_0 |0> = 0
    v = apply_mode(build_virasoro(space, -1), space.vacuum())
    assert v.is_zero()
    # L_{-2}|0> = (1/2) j_{-1} j_{-1} |0>
    v = apply_mode(build_virasoro(space, -2), space.vacuum())
    assert v == space.state((1, 1)).scale(Fraction(1, 2))


def test_virasoro_commutator_central_charge():
    # [L_2, L_{-2}] = 4 L_0 + (1/12)(8-2) = 4 L_0 + 1/2 on interior states
    space = build_space(6)
    L2 = build_virasoro(space, 2)
    Lm2 = build_virasoro(space, -2)
    comm = commutator(L2, Lm2)
    L0 = build_virasoro(space, 0)
    for v in [space.vacuum(), space.state((1,)), space.state((2,)), space.state((1, 1))]:
        lhs = apply_mode(comm, v)
        rhs = apply_mode(L0, v).scale(4) + v.scale(Fraction(1, 2))
        assert lhs == rhs


def test_virasoro_commutator_31():
    # [L_3, L_{-1}] = 4 L_2 (no central term)
    space = build_space(6)
    comm = commutator(build_virasoro(space, 3), build_virasoro(space, -1))
    L2 = build_virasoro(space, 2)
    for v in [space.vacuum(), space.state((2, 1)), space.state((1,), (1,))]:
        assert apply_mode(comm, v) == apply_mode(L2, v).scale(4)


def test_apply_mode_counts_truncation_loss():
    space = build_space(2)
    v = space.state((1, 1))  # level 2, at the edge
    jm1 = current_mode(space, -1)
    out = apply_mode(jm1, v)
    assert out.is_zero()
    assert out.truncation_loss == 1


def test_space_mismatch_raises():
    a = build_space(2)
    b = build_space(2)
    with pytest.raises(SpaceMismatchError):
        _ = a.vacuum() + b.vacuum()
    with pytest.raises(SpaceMismatchError):
        apply_mode(current_mode(a, -1), b.vacuum())


def test_shapovalov_norms():
    space = build_space(4)
    assert shapovalov(space.vacuum(), space.vacuum()) == 1
    assert shapovalov(space.state((1,)), space.state((1,))) == 1
    assert shapovalov(space.state((2,)), space.state((2,))) == 2
    assert shapovalov(space.state((1, 1)), space.state((1, 1))) == 2
    assert shapovalov(space.state((2, 1)), space.state((2, 1))) == 2
    assert shapovalov(space.state((2, 2)), space.state((2, 2))) == 8
    assert shapovalov(space.state((1,), (1,)), space.state((1,), (1,))) == 1
    assert shapovalov(space.state((1,)), space.state((2,))) == 0


def test_shapovalov_mode_adjointness():
    # <j_{-n} u, v> = <u, j_n v>
    space = build_space(5)
    u = space.state((2,))
    v = space.state((2, 1))
    jm1 = current_mode(space, -1)
    jp1 = current_mode(space, 1)
    assert shapovalov(apply_mode(jm1, u), v) == shapovalov(u, apply_mode(jp1, v))


def test_float_backend():
    space = build_space(3, exact=False)
    v = apply_mode(build_virasoro(space, -2), space.vacuum())
    idx = space.find((1, 1), ())
    assert abs(v.coeffs[idx] - 0.5) < 1e-14


def test_to_json_golden():
    space = build_space(2)
    ops = {"j_-1": current_mode(space, -1), "L_0": build_virasoro(space, 0)}
    doc = json.loads(space.to_json(ops))
    assert doc["l_max"] == 2
    assert doc["basis"][0] == [[], []]
    assert len(doc["basis"]) == space.dim
    names = set(doc["operators"])
    assert names == {"j_-1", "L_0"}
    # L_0 is diagonal with the chiral level
    for i, j, val in doc["operators"]["L_0"]:
        assert i == j and val == space.basis[i].chiral.level
    # deterministic serialization
    assert space.to_json(ops) == space.to_json(ops)
