import itertools
import math

import numpy as np
import pytest

from nicolai import (
    Configuration,
    Lattice,
    ModelSpec,
    apply_monomial,
    config_to_vector,
    enumerate_basis,
    enumerate_ground_configs,
    is_ground_config,
    is_permitted,
    kernel_census,
    transfer_count_ground_configs,
    verify_susy_ground,
)
from nicolai.groundstates import (
    entropy_density,
    ground_config_mask,
    occupation_monomial,
)
from nicolai.model import build_supercharge, build_hamiltonian_susy, charge_triples
from nicolai.fock import monomial_to_sparse


def brute_force_ground_count(lattice):
    count = 0
    for bits in itertools.product((0, 1), repeat=lattice.nsites):
        g = Configuration(lattice, bits)
        if is_ground_config(g):
            count += 1
    return count


def test_trivial_configs_are_ground():
    lat = Lattice.ring(2)
    assert is_ground_config(Configuration.all_empty(lat))
    assert is_ground_config(Configuration.all_occupied(lat))


def test_forbidden_patterns_detected():
    lat = Lattice.chain(-2, 2)
    base = [0] * 5
    g = Configuration(lat, tuple(base))
    assert is_ground_config(g)
    # "0,1,0" centered at the even site 0
    bad = list(base)
    bad[lat.rank(0)] = 1
    assert not is_ground_config(Configuration(lat, tuple(bad)))
    # "1,1,0" at the same triple is fine
    ok = list(base)
    ok[lat.rank(-1)] = 1
    ok[lat.rank(0)] = 1
    assert is_ground_config(Configuration(lat, tuple(ok)))


def test_wrapped_triple_checked_on_ring():
    lat = Lattice.ring(2)
    # "1,0,1" on the wrapped triple {1, 2, -3}
    values = [0] * 6
    values[lat.rank(1)] = 1
    values[lat.rank(-3)] = 1
    assert not is_ground_config(Configuration(lat, tuple(values)))


@pytest.mark.parametrize("m", [2, 3, 4, 5])
def test_ring_census_against_oracles(m):
    lat = Lattice.ring(m)
    configs = enumerate_ground_configs(lat)
    assert len(configs) == transfer_count_ground_configs(lat)
    if m <= 3:
        assert len(configs) == brute_force_ground_count(lat)
    mask = ground_config_mask(lat)
    assert int(mask.sum()) == len(configs)
    states = {g.state for g in configs}
    assert states == set(np.nonzero(mask)[0].tolist())


@pytest.mark.parametrize("nsites", [3, 5, 7, 9, 11])
def test_chain_census_against_oracles(nsites):
    lat = Lattice.chain(0, nsites - 1)
    configs = enumerate_ground_configs(lat)
    assert len(configs) == transfer_count_ground_configs(lat)
    if nsites <= 9:
        assert len(configs) == brute_force_ground_count(lat)


def test_census_lexicographic_order():
    lat = Lattice.ring(2)
    configs = enumerate_ground_configs(lat)
    values = [g.values for g in configs]
    assert values == sorted(values)
    assert len(values) >= 2


def test_exhaustive_limit():
    with pytest.raises(ValueError):
        enumerate_ground_configs(Lattice.chain(0, 30))
    # the transfer matrix still counts it
    assert transfer_count_ground_configs(Lattice.chain(0, 30)) > 0


def test_growth_is_exponential():
    lam = math.exp(2 * entropy_density(Lattice.ring(2)))
    assert lam > 1
    assert abs(lam - 3.0) < 1e-9
    # counts follow 3**blocks + (-1)**blocks on rings
    for m in (2, 3, 4, 5, 6, 7):
        lat = Lattice.ring(m)
        assert transfer_count_ground_configs(lat) == 3 ** (m + 1) + (-1) ** (m + 1)


def test_config_sequence_bijection():
    lat = Lattice.ring(2)
    for bits in itertools.product((0, 1), repeat=6):
        g = Configuration(lat, bits)
        assert is_ground_config(g) == is_permitted(g.to_sequence())


def test_particle_hole_closure():
    lat = Lattice.ring(2)
    for g in enumerate_ground_configs(lat):
        assert is_ground_config(g.flipped())


def test_config_to_vector_basis_index():
    lat = Lattice.ring(2)
    basis = enumerate_basis(lat)
    v0 = config_to_vector(Configuration.all_empty(lat), basis)
    assert v0[0] == 1.0 and v0.sum() == 1.0
    v1 = config_to_vector(Configuration.all_occupied(lat), basis)
    assert v1[-1] == 1.0


def test_occupation_monomial_gives_plus_sign():
    lat = Lattice.chain(0, 4)
    rng = np.random.default_rng(2)
    for _ in range(20):
        bits = tuple(int(b) for b in rng.integers(0, 2, size=5))
        g = Configuration(lat, bits)
        res = apply_monomial(occupation_monomial(g), 0, lat)
        assert res is not None
        amp, state = res
        assert amp == 1  # creations applied in ascending order onto the vacuum
        assert state == g.state


def test_verify_susy_ground_on_ground_configs(ring):
    ctx = ring(2)
    q_op = ctx.q
    for g in enumerate_ground_configs(ctx.lattice):
        rep = verify_susy_ground(g, ctx.spec, ctx.basis, q_op, ctx.h)
        assert rep.is_ground and rep.annihilated
        assert rep.violated_triples == []
        assert rep.flip_actions == []


def test_verify_susy_flip_action(ring):
    ctx = ring(2)
    lat = ctx.lattice
    # "1,0,1" on the triple {-1, 0, 1}, everything else empty
    values = [0] * 6
    values[lat.rank(-1)] = 1
    values[lat.rank(1)] = 1
    g = Configuration(lat, tuple(values))
    rep = verify_susy_ground(g, ctx.spec, ctx.basis, ctx.q, ctx.h)
    assert not rep.is_ground
    assert rep.q_residual != 0
    charge_flips = [f for f in rep.flip_actions if f[0] == "charge"]
    assert len(charge_flips) == 1
    _, center, amp, image = charge_flips[0]
    assert center == 0 and amp in (-1, 1)
    assert image.value_at(-1) == 0 and image.value_at(0) == 1 and image.value_at(1) == 0
    # the adjoint maps the image back
    rep_back = verify_susy_ground(image, ctx.spec, ctx.basis, ctx.q, ctx.h)
    back = [f for f in rep_back.flip_actions if f[0] == "adjoint" and f[1] == 0]
    assert len(back) == 1 and back[0][3].values == g.values


def test_no_cancellation_between_triples(ring):
    # distinct triples map one configuration to distinct images, so Q|g> = 0
    # forces every term to vanish separately
    ctx = ring(2)
    lat = ctx.lattice
    from nicolai.model import local_charge_1d

    charges = [local_charge_1d(c // 2, lat) for (_, c, _) in charge_triples(lat)]
    for state in range(64):
        for mono_set in (charges, [q.adjoint() for q in charges]):
            images = []
            for q in mono_set:
                res = apply_monomial(q, state, lat)
                if res is not None:
                    images.append(res[1])
            assert len(images) == len(set(images))


def test_ground_configs_lie_in_classical_kernel(ring):
    ctx = ring(2)
    from nicolai.model import build_h_classical

    diag = build_h_classical(ctx.spec).to_sparse(ctx.basis).diagonal()
    for g in enumerate_ground_configs(ctx.lattice):
        assert diag[ctx.basis.index_of(g.state)] == 0


@pytest.mark.parametrize("m", [2, 3])
def test_kernel_census(m):
    census = kernel_census(ModelSpec.ring(m))
    assert census.dim_ker_h_classical == census.classical_count
    assert census.dim_ker_h >= census.classical_count
    assert census.min_positive_classical == 1.0
    assert census.consistent


def test_kernel_census_rejects_2d():
    with pytest.raises(ValueError):
        kernel_census(ModelSpec.torus(4, 4))


def test_torus_census_matches_mask():
    lat = Lattice.torus(4, 4)
    configs = enumerate_ground_configs(lat)
    mask = ground_config_mask(lat)
    assert len(configs) == int(mask.sum())
    assert is_ground_config(Configuration.all_empty(lat))
    # center occupied, arms empty at (0, 0) is forbidden
    values = [0] * 16
    values[lat.rank((0, 0))] = 1
    assert not is_ground_config(Configuration(lat, tuple(values)))


def test_torus_ground_vectors_annihilated():
    spec = ModelSpec.torus(4, 4)
    lat = spec.lattice
    basis = enumerate_basis(lat)
    q = build_supercharge(spec).to_sparse(basis)
    mask = ground_config_mask(lat, basis)
    q_csc = q.matrix.tocsc()
    qd_csc = q.adjoint().matrix.tocsc()
    col_zero = (np.diff(q_csc.indptr) == 0) & (np.diff(qd_csc.indptr) == 0)
    assert np.array_equal(mask, col_zero)
