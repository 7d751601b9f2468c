import itertools

import numpy as np
import pytest

from nicolai import (
    ANNIHILATE,
    CREATE,
    ConservedSequence,
    Lattice,
    ModelSpec,
    adjoint_identity_check,
    all_embeddable_sequences,
    anticommutator,
    arc_sequences,
    build_hamiltonian_susy,
    build_supercharge,
    conservation_check,
    enumerate_basis,
    enumerate_hat_xi,
    enumerate_ring_sequences,
    independence_probe,
    is_permitted,
    monomial_to_sparse,
    reference_interval_tables,
    sequence_to_operator,
    sign_sigma,
    transfer_count_hat_xi,
    transfer_count_ring_sequences,
)
from nicolai.charges import (
    anticommute_check,
    charge_algebra_report,
    enumerate_rectangle_sequences,
    has_edge_conditions,
    overlap_allows_nonzero,
    rect_constant_sequence,
    sample_edge_violating_sequences,
    torus_constant_sequence,
    vanishing_triple_products,
)


def brute_force_interval_count(n):
    """Count permitted strings on n sites [0, n-1] with constant edge pairs."""
    count = 0
    for vals in itertools.product((-1, 1), repeat=n):
        if vals[0] != vals[1] or vals[-1] != vals[-2]:
            continue
        ok = True
        for p in range(2, n, 2):
            if p + 1 >= n:
                break
            if (vals[p - 1], vals[p], vals[p + 1]) in ((-1, 1, -1), (1, -1, 1)):
                ok = False
                break
        if ok:
            count += 1
    return count


def test_is_permitted_examples():
    assert not is_permitted(ConservedSequence((1, 2, 3), (-1, 1, -1)))
    assert is_permitted(ConservedSequence((0, 1, 2, 3, 4), (1,) * 5))
    assert is_permitted(ConservedSequence((0, 1, 2, 3, 4), (-1, -1, 1, 1, 1)))
    # alternation at an odd center is allowed
    assert is_permitted(ConservedSequence((0, 1, 2), (-1, 1, -1)))


@pytest.mark.parametrize("l,expected", [(1, 2), (2, 6), (3, 18)])
def test_hat_xi_published_counts(l, expected):
    assert len(enumerate_hat_xi(0, l)) == expected


@pytest.mark.parametrize("l", [1, 2, 3, 4])
def test_hat_xi_against_brute_force(l):
    n = 2 * l + 1
    assert len(enumerate_hat_xi(0, l)) == brute_force_interval_count(n)


@pytest.mark.parametrize("l", range(1, 11))
def test_hat_xi_transfer_matrix_oracle(l):
    assert len(enumerate_hat_xi(0, l)) == transfer_count_hat_xi(0, l)


def test_hat_xi_growth_ratio():
    n9 = transfer_count_hat_xi(0, 9)
    n10 = len(enumerate_hat_xi(0, 10))
    assert n10 == transfer_count_hat_xi(0, 10)
    assert abs(n10 / n9 - 3.0) <= 0.05 * 3.0


def test_hat_xi_interval_offsets():
    # counts depend only on the length, sites carry the offset
    seqs = enumerate_hat_xi(-2, 1)
    assert len(seqs) == len(enumerate_hat_xi(0, 3))
    assert seqs[0].sites == tuple(range(-4, 3))


def test_hat_xi_lexicographic_order():
    seqs = enumerate_hat_xi(0, 2)
    assert [s.values for s in seqs] == sorted(s.values for s in seqs)


def test_hat_xi_requires_k_less_than_l():
    with pytest.raises(ValueError):
        enumerate_hat_xi(1, 1)
    with pytest.raises(ValueError):
        transfer_count_hat_xi(2, 1)


def test_reference_tables_match_enumeration():
    tables = reference_interval_tables()
    for l, rows in tables.items():
        enumerated = sorted(s.values for s in enumerate_hat_xi(0, l))
        golden = sorted(s.values for s in rows)
        assert enumerated == golden


def test_negation_closure():
    for l in (1, 2, 3):
        values = {s.values for s in enumerate_hat_xi(0, l)}
        for v in values:
            assert tuple(-x for x in v) in values


def test_ring_sequences_brute_force(ring):
    ctx = ring(2)
    lat = ctx.lattice
    seqs = enumerate_ring_sequences(lat)
    brute = 0
    from nicolai import charge_triples

    for vals in itertools.product((-1, 1), repeat=6):
        ok = True
        for (a, c, b) in charge_triples(lat):
            t = (vals[lat.rank(a)], vals[lat.rank(c)], vals[lat.rank(b)])
            if t in ((-1, 1, -1), (1, -1, 1)):
                ok = False
                break
        if ok:
            brute += 1
    assert len(seqs) == brute == transfer_count_ring_sequences(lat)
    patterns = {s.values for s in seqs}
    assert (1,) * 6 in patterns and (-1,) * 6 in patterns


@pytest.mark.parametrize("m", [2, 3, 4])
def test_ring_sequence_counts_closed_form(m, ring):
    # trace of the pair transfer matrix: 3**b + (-1)**b over b = m+1 blocks
    lat = ring(m).lattice
    b = m + 1
    assert transfer_count_ring_sequences(lat) == 3**b + (-1) ** b


def test_sequence_to_operator_examples():
    f = enumerate_hat_xi(0, 1)[0]  # all -1
    assert sequence_to_operator(f).factors == (
        (0, ANNIHILATE),
        (1, ANNIHILATE),
        (2, ANNIHILATE),
    )
    up = ConservedSequence((0, 1, 2, 3, 4), (-1, -1, -1, 1, 1))
    assert sequence_to_operator(up).factors == (
        (0, ANNIHILATE),
        (1, ANNIHILATE),
        (2, ANNIHILATE),
        (3, CREATE),
        (4, CREATE),
    )


def test_2d_constant_is_product_of_creations():
    lat = Lattice.torus(4, 4)
    r_plus = rect_constant_sequence(lat, 0, 0, 3, 3, 1)
    op = sequence_to_operator(r_plus)
    assert all(kind == CREATE for _, kind in op.factors)
    assert len(op.factors) == 9


def test_sign_sigma_values():
    assert sign_sigma(0, 1) == 3
    assert sign_sigma(0, 2) == 10
    assert sign_sigma(1, 4) == 21


def test_adjoint_of_triple_annihilation():
    basis = enumerate_basis(Lattice.chain(0, 2))
    f = ConservedSequence((0, 1, 2), (-1, -1, -1))
    op = monomial_to_sparse(sequence_to_operator(f), basis)
    neg = monomial_to_sparse(sequence_to_operator(-f), basis)
    assert (op.adjoint() + neg).is_zero()  # (a0 a1 a2)* = -a0* a1* a2*


def test_adjoint_identity_all_tables():
    basis = enumerate_basis(Lattice.chain(0, 6))
    for l, rows in reference_interval_tables().items():
        for f in rows:
            assert adjoint_identity_check(f, basis)


def _all_subinterval_sequences(lo, hi):
    seqs = []
    for k in range(lo // 2, hi // 2):
        for l in range(k + 1, hi // 2 + 1):
            seqs.extend(enumerate_hat_xi(k, l))
    return seqs


def test_anticommutator_dichotomy_exhaustive():
    # 9-site chain: anticommutators vanish whenever the overlap rule fails
    lat = Lattice.chain(0, 8)
    basis = enumerate_basis(lat)
    seqs = _all_subinterval_sequences(0, 8)
    mats = [monomial_to_sparse(sequence_to_operator(f), basis) for f in seqs]
    checked = nonzero_allowed = 0
    for i in range(len(seqs)):
        assert (mats[i] @ mats[i]).is_zero()  # nilpotency of every charge
        for j in range(i, len(seqs)):
            ac = anticommutator(mats[i], mats[j]).max_abs()
            if overlap_allows_nonzero(seqs[i], seqs[j]):
                nonzero_allowed += 1
            else:
                assert ac == 0
            checked += 1
    assert checked == len(seqs) * (len(seqs) + 1) // 2
    assert nonzero_allowed > 0


def test_disjoint_supports_anticommute():
    basis = enumerate_basis(Lattice.chain(0, 8))
    f = enumerate_hat_xi(0, 1)[0]
    g = ConservedSequence((4, 5, 6, 7, 8), (1, 1, 1, 1, 1))
    assert anticommute_check(f, g, basis) == 0


def test_opposite_sequences_can_fail_to_anticommute():
    basis = enumerate_basis(Lattice.chain(0, 2))
    f = ConservedSequence((0, 1, 2), (-1, -1, -1))
    assert anticommute_check(f, -f, basis) != 0


@pytest.mark.parametrize("m", [2, 3])
def test_conservation_exact_on_rings(m, ring):
    ctx = ring(m)
    seqs = all_embeddable_sequences(ctx.lattice) + enumerate_ring_sequences(ctx.lattice)
    for f in seqs:
        assert conservation_check(ctx.spec, f, ctx.basis, ctx.h) == 0
        assert vanishing_triple_products(ctx.spec, f, ctx.basis) == 0


def test_ring_sequences_anticommute_with_supercharge(ring):
    ctx = ring(2)
    for f in enumerate_ring_sequences(ctx.lattice):
        qf = monomial_to_sparse(sequence_to_operator(f), ctx.basis)
        assert anticommutator(ctx.q, qf).is_zero()
        assert anticommutator(ctx.q.adjoint(), qf).is_zero()


def test_edge_condition_violations_break_conservation(ring):
    hits = total = 0
    for m in (2, 4):
        ctx = ring(m)
        rng = np.random.default_rng(7)
        for f in sample_edge_violating_sequences(ctx.lattice, 60, rng):
            total += 1
            if conservation_check(ctx.spec, f, ctx.basis, ctx.h) != 0:
                hits += 1
    assert hits / total >= 0.95


def test_conservation_check_rejects_bad_supports(ring):
    ctx = ring(2)
    # not an arc of this ring
    with pytest.raises(ValueError):
        conservation_check(ctx.spec, ConservedSequence((0, 1, 9), (1, 1, 1)), ctx.basis, ctx.h)
    # odd endpoints
    with pytest.raises(ValueError):
        conservation_check(ctx.spec, ConservedSequence((-1, 0, 1), (1, 1, 1)), ctx.basis, ctx.h)
    # support as long as the whole ring but marked open
    with pytest.raises(ValueError):
        conservation_check(
            ctx.spec, ConservedSequence(ctx.lattice.sites, (1,) * 6), ctx.basis, ctx.h
        )


def test_arc_sequences_validation(ring):
    lat = ring(2).lattice
    with pytest.raises(ValueError):
        arc_sequences(lat, 1, 1)  # odd start
    with pytest.raises(ValueError):
        arc_sequences(lat, 0, 3)  # would cover the full ring
    arcs = arc_sequences(lat, 2, 1)
    assert arcs[0].sites == (2, -3, -2)  # wrapped arc


def test_independence_generators_alone():
    lat = Lattice.chain(0, 4)
    basis = enumerate_basis(lat)
    seqs = enumerate_hat_xi(0, 1) + enumerate_hat_xi(0, 2)
    ops = [monomial_to_sparse(sequence_to_operator(f), basis) for f in seqs]
    report = independence_probe(ops, max_degree=1)
    assert report.generator_count == 8
    assert report.generator_rank == 8
    assert not report.dependencies_found


def test_independence_single_generator():
    basis = enumerate_basis(Lattice.chain(0, 2))
    op = monomial_to_sparse(sequence_to_operator(enumerate_hat_xi(0, 1)[0]), basis)
    report = independence_probe([op], max_degree=1)
    assert report.generator_rank == 1


def test_independence_products_become_dependent():
    lat = Lattice.chain(0, 6)
    basis = enumerate_basis(lat)
    seqs = (
        enumerate_hat_xi(0, 1) + enumerate_hat_xi(0, 2) + enumerate_hat_xi(0, 3)
    )
    ops = [monomial_to_sparse(sequence_to_operator(f), basis) for f in seqs]
    report = independence_probe(ops, max_degree=2)
    assert report.generator_rank == report.generator_count == 26
    assert report.dependencies_found


def test_charge_algebra_report(ring):
    ctx = ring(2)
    seqs = arc_sequences(ctx.lattice, 0, 1) + arc_sequences(ctx.lattice, -2, 1)
    report = charge_algebra_report(ctx.spec, seqs, ctx.basis)
    assert report.commutant_check == 0
    assert report.all_conserved
    for (i, j), value in report.pairwise_anticommutators.items():
        if not overlap_allows_nonzero(seqs[i], seqs[j]):
            assert value == 0


def test_rectangle_sequences_contain_constants():
    lat = Lattice.torus(4, 4)
    seqs = enumerate_rectangle_sequences(lat, 0, 0, 3, 3)
    patterns = {s.values for s in seqs}
    assert (1,) * 9 in patterns and (-1,) * 9 in patterns
    for s in seqs:
        assert is_permitted(s) and has_edge_conditions(s)


def test_2d_constants_conserved_on_torus():
    spec = ModelSpec.torus(4, 4)
    basis = enumerate_basis(spec.lattice)
    h = build_hamiltonian_susy(build_supercharge(spec), basis)
    for x0, y0 in ((0, 0), (0, 2), (2, 0), (2, 2)):
        for val in (-1, 1):
            seq = rect_constant_sequence(spec.lattice, x0, y0, 3, 3, val)
            assert conservation_check(spec, seq, basis, h) == 0
    from nicolai.fock import commutator

    for val in (-1, 1):
        seq = torus_constant_sequence(spec.lattice, val)
        qf = monomial_to_sparse(sequence_to_operator(seq), basis)
        assert commutator(h, qf).is_zero()


def test_2d_forbidden_cross_detection():
    lat = Lattice.torus(4, 4)
    values = {s: -1 for s in lat.sites}
    values[(0, 0)] = 1
    seq = ConservedSequence(
        lat.sites, tuple(values[s] for s in lat.sites), closed=True, shape=(4, 4)
    )
    assert not is_permitted(seq)  # center +1 with all four arms -1


def test_sequence_serialization():
    f = enumerate_hat_xi(0, 1)[1]
    assert f.to_json_obj() == [
        {"site": 0, "value": 1},
        {"site": 1, "value": 1},
        {"site": 2, "value": 1},
    ]
    lat = Lattice.torus(4, 4)
    r = rect_constant_sequence(lat, 0, 0, 3, 3, -1)
    assert r.to_json_obj()[0] == {"site": [0, 0], "value": -1}
