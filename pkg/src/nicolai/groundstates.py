"""Classical supersymmetric ground states of the Nicolai model.

A configuration assigns 0 or 1 to every lattice site.  It is a ground-state
configuration exactly when no even-centered triple carries the occupation
patterns "0,1,0" or "1,0,1" (on tori: no five-site cross carries "center 1,
arms 0" or "center 0, arms 1").  Three characterizations coincide and are all
implemented here: the pattern criterion, the zero set of the diagonal
classical Hamiltonian, and annihilation of the product vector by Q and Q*.

Configurations use the ``{0, 1}`` alphabet; conserved sequences use
``{-1, +1}``.  The bijection ``0 <-> -1``, ``1 <-> +1`` identifies the
forbidden patterns of the two alphabets, but the types are kept distinct: a
configuration labels a Fock product vector, a sequence labels an operator.

The census degeneracy is extensive: counts grow like ``lambda**(n/2)`` with
``lambda = 3`` the leading eigenvalue of the pair transfer matrix, an
independent counting oracle for every enumeration.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .charges import ConservedSequence
from .fock import (
    CREATE,
    FermionMonomial,
    FockBasis,
    Lattice,
    apply_monomial,
    enumerate_basis,
)
from .model import (
    ModelSpec,
    build_h_classical,
    build_hamiltonian_susy,
    build_supercharge,
    charge_crosses,
    charge_triples,
    local_charge_1d,
    local_charge_2d,
)

__all__ = [
    "Configuration",
    "GroundStateReport",
    "KernelCensus",
    "is_ground_config",
    "enumerate_ground_configs",
    "ground_config_mask",
    "transfer_count_ground_configs",
    "config_transfer_matrix",
    "entropy_density",
    "config_to_vector",
    "occupation_monomial",
    "verify_susy_ground",
    "kernel_census",
]

_FORBIDDEN_OCC = ((0, 1, 0), (1, 0, 1))


@dataclass(frozen=True)
class Configuration:
    """A ``{0, 1}`` occupation pattern, total on its lattice."""

    lattice: Lattice
    values: tuple

    def __post_init__(self):
        if len(self.values) != self.lattice.nsites:
            raise ValueError("configuration must assign every site")
        if any(v not in (0, 1) for v in self.values):
            raise ValueError("occupations must be 0 or 1")

    @classmethod
    def from_state(cls, state: int, lattice: Lattice) -> "Configuration":
        return cls(
            lattice, tuple((state >> r) & 1 for r in range(lattice.nsites))
        )

    @classmethod
    def all_empty(cls, lattice: Lattice) -> "Configuration":
        return cls(lattice, (0,) * lattice.nsites)

    @classmethod
    def all_occupied(cls, lattice: Lattice) -> "Configuration":
        return cls(lattice, (1,) * lattice.nsites)

    @property
    def state(self) -> int:
        """Occupation integer: bit r holds the value at the rank-r site."""
        return sum(1 << r for r, v in enumerate(self.values) if v)

    def value_at(self, site) -> int:
        return self.values[self.lattice.rank(site)]

    def flipped(self) -> "Configuration":
        """Particle-hole image: every occupation bit inverted."""
        return Configuration(self.lattice, tuple(1 - v for v in self.values))

    def to_sequence(self) -> ConservedSequence:
        """Image under ``0 -> -1``, ``1 -> +1`` on the same support."""
        return ConservedSequence(
            self.lattice.sites,
            tuple(2 * v - 1 for v in self.values),
            closed=self.lattice.periodic,
            shape=self.lattice.shape if self.lattice.dimension == 2 else None,
        )

    def bitstring(self) -> str:
        return "".join(str(v) for v in self.values)


def _violated_triples(g: Configuration) -> list:
    """Centers of forbidden triples/crosses, with the pattern found."""
    lat = g.lattice
    bad = []
    if lat.dimension == 1:
        for (l, c, r) in charge_triples(lat):
            pat = (g.value_at(l), g.value_at(c), g.value_at(r))
            if pat in _FORBIDDEN_OCC:
                bad.append((c, pat))
    else:
        for (xm, ym, c, xp, yp) in charge_crosses(lat):
            center = g.value_at(c)
            arms = [g.value_at(s) for s in (xm, ym, xp, yp)]
            if center == 1 and all(a == 0 for a in arms):
                bad.append((c, "center 1, arms 0"))
            elif center == 0 and all(a == 1 for a in arms):
                bad.append((c, "center 0, arms 1"))
    return bad


def is_ground_config(g: Configuration) -> bool:
    """No forbidden triple anywhere (wrapped triples included on rings)."""
    return not _violated_triples(g)


def ground_config_mask(lattice: Lattice, basis: FockBasis | None = None) -> np.ndarray:
    """Boolean mask over the full basis marking ground-state configurations.

    Vectorized bit arithmetic, independent of the depth-first enumeration.
    """
    if basis is None:
        basis = enumerate_basis(lattice)
    if basis.sector is not None:
        raise ValueError("mask is defined over the full Fock basis")
    states = basis.states
    ok = np.ones(basis.dim, dtype=bool)
    if lattice.dimension == 1:
        for (l, c, r) in charge_triples(lattice):
            bl = (states >> lattice.rank(l)) & 1
            bc = (states >> lattice.rank(c)) & 1
            br = (states >> lattice.rank(r)) & 1
            ok &= ~((bl == 0) & (bc == 1) & (br == 0))
            ok &= ~((bl == 1) & (bc == 0) & (br == 1))
    else:
        for (xm, ym, c, xp, yp) in charge_crosses(lattice):
            bc = (states >> lattice.rank(c)) & 1
            arms = [(states >> lattice.rank(s)) & 1 for s in (xm, ym, xp, yp)]
            arms_all0 = np.ones(basis.dim, dtype=bool)
            arms_all1 = np.ones(basis.dim, dtype=bool)
            for b in arms:
                arms_all0 &= b == 0
                arms_all1 &= b == 1
            ok &= ~((bc == 1) & arms_all0)
            ok &= ~((bc == 0) & arms_all1)
    return ok


def enumerate_ground_configs(
    lattice: Lattice, max_exhaustive: int = 24
) -> list:
    """All ground-state configurations in lexicographic site order.

    Raises for lattices beyond ``max_exhaustive`` sites; use
    :func:`transfer_count_ground_configs` to count larger systems.
    """
    n = lattice.nsites
    if n > max_exhaustive:
        raise ValueError(
            f"{n} sites exceeds the exhaustive limit ({max_exhaustive}); "
            "use the transfer-matrix count instead"
        )
    if lattice.dimension == 2:
        out = [
            g
            for bits in itertools.product((0, 1), repeat=n)
            for g in [Configuration(lattice, bits)]
            if is_ground_config(g)
        ]
        return out

    sites = lattice.sites
    ranks_ready: list = [[] for _ in range(n)]
    for (l, c, r) in charge_triples(lattice):
        members = (lattice.rank(l), lattice.rank(c), lattice.rank(r))
        ranks_ready[max(members)].append(members)
    out = []
    values = [0] * n

    def extend(q):
        if q == n:
            out.append(Configuration(lattice, tuple(values)))
            return
        for v in (0, 1):
            values[q] = v
            bad = False
            for (rl, rc, rr) in ranks_ready[q]:
                if (values[rl], values[rc], values[rr]) in _FORBIDDEN_OCC:
                    bad = True
                    break
            if not bad:
                extend(q + 1)

    extend(0)
    return out


def config_transfer_matrix() -> np.ndarray:
    """4x4 transfer matrix over adjacent (even, odd) occupation pairs."""
    t = np.zeros((4, 4), dtype=np.int64)
    for x, y, u, v in itertools.product(range(2), repeat=4):
        if (y, u, v) not in _FORBIDDEN_OCC:
            t[2 * x + y, 2 * u + v] = 1
    return t


def transfer_count_ground_configs(lattice: Lattice) -> int:
    """Independent transfer-matrix count of the ground-state configurations.

    Supports 1D chains with even endpoints and 1D rings.
    """
    if lattice.dimension != 1:
        raise ValueError("transfer-matrix counting is one-dimensional")
    t = config_transfer_matrix()
    if lattice.periodic:
        return int(np.trace(np.linalg.matrix_power(t, lattice.nsites // 2)))
    lo, hi = lattice.sites[0], lattice.sites[-1]
    if lo % 2 or hi % 2:
        raise ValueError("chain counting needs even endpoints")
    nblocks = (hi - lo) // 2  # pairs (2i, 2i+1); the final even site is free
    m = np.linalg.matrix_power(t, nblocks - 1)
    return int(m.sum()) * 2 if nblocks >= 1 else 2


def entropy_density(lattice: Lattice) -> float:
    """Ground-state entropy per site, ``log(lambda_max) / 2``."""
    lam = np.linalg.eigvals(config_transfer_matrix().astype(float))
    return float(np.log(np.max(np.abs(lam))) / 2.0)


def occupation_monomial(g: Configuration) -> FermionMonomial:
    """Product of creation factors at the occupied sites, ascending order."""
    return FermionMonomial(
        1,
        tuple(
            (s, CREATE)
            for s in g.lattice.sites
            if g.value_at(s) == 1
        ),
    )


def config_to_vector(g: Configuration, basis: FockBasis) -> np.ndarray:
    """Unit basis vector whose occupation bits equal the configuration.

    Identical to applying :func:`occupation_monomial` to the empty state; in
    the ascending-order convention the resulting amplitude is always +1.
    """
    if basis.lattice != g.lattice:
        raise ValueError("basis lives on a different lattice")
    v = np.zeros(basis.dim, dtype=np.float64)
    v[basis.index_of(g.state)] = 1.0
    return v


@dataclass
class GroundStateReport:
    """Outcome of the supersymmetry check on one configuration."""

    config: Configuration
    is_ground: bool
    q_residual: int
    q_dagger_residual: int
    h_residual: int
    violated_triples: list
    # per violated "1,0,1" triple: (center, signed image configuration) under
    # the local charge; per "0,1,0" triple the same under its adjoint
    flip_actions: list

    @property
    def annihilated(self) -> bool:
        return (
            self.q_residual == 0
            and self.q_dagger_residual == 0
            and self.h_residual == 0
        )


def verify_susy_ground(
    g: Configuration,
    spec: ModelSpec,
    basis: FockBasis | None = None,
    q_op=None,
    h_op=None,
) -> GroundStateReport:
    """Check ``Q|g> = Q*|g> = H|g> = 0`` triple by triple.

    For ground configurations every elementary charge (and its adjoint) kills
    the vector.  For others, each violated "1,0,1" triple is flipped to
    "0,1,0" by the local charge (and back by its adjoint), with the fermionic
    sign recorded.  Pass precomputed ``basis``/``q_op``/``h_op`` when sweeping
    many configurations.
    """
    lat = spec.lattice
    if g.lattice != lat:
        raise ValueError("configuration lives on a different lattice")
    if basis is None:
        basis = enumerate_basis(lat)
    if q_op is None:
        q_op = build_supercharge(spec).to_sparse(basis)
    if h_op is None:
        h_op = build_hamiltonian_susy(build_supercharge(spec), basis)
    state = g.state

    if spec.variant == "nicolai-1d":
        charges = [
            local_charge_1d(c // 2, lat) for (_, c, _) in charge_triples(lat)
        ]
    else:
        charges = [
            local_charge_2d(x // 2, y // 2, lat)
            for (x, y) in (cross[2] for cross in charge_crosses(lat))
        ]

    flips = []
    for q in charges:
        center = q.factors[len(q.factors) // 2][0]
        res = apply_monomial(q, state, lat)
        if res is not None:
            amp, out = res
            flips.append(("charge", center, amp, Configuration.from_state(out, lat)))
        res = apply_monomial(q.adjoint(), state, lat)
        if res is not None:
            amp, out = res
            flips.append(("adjoint", center, amp, Configuration.from_state(out, lat)))

    col = basis.index_of(state)

    def col_max(op) -> int:
        block = op.matrix[:, [col]]
        return int(np.abs(block.data).max()) if block.nnz else 0

    return GroundStateReport(
        config=g,
        is_ground=is_ground_config(g),
        q_residual=col_max(q_op),
        q_dagger_residual=col_max(q_op.adjoint()),
        h_residual=col_max(h_op),
        violated_triples=_violated_triples(g),
        flip_actions=flips,
    )


@dataclass
class KernelCensus:
    """Ground-space bookkeeping for one model."""

    classical_count: int
    dim_ker_h_classical: int
    dim_ker_h: int
    min_positive_classical: float
    min_positive_h: float

    @property
    def consistent(self) -> bool:
        """The classical kernel must match the census exactly; the full SUSY
        kernel may only be at least as large (equality is not asserted)."""
        return (
            self.dim_ker_h_classical == self.classical_count
            and self.dim_ker_h >= self.classical_count
        )


def kernel_census(spec: ModelSpec, zero_tol: float = 1e-8) -> KernelCensus:
    """Count classical ground configurations against the operator kernels."""
    from .dynamics import diagonalize  # deferred: dynamics builds on this module

    if spec.variant != "nicolai-1d":
        raise ValueError(
            "kernel census needs the classical/hopping split, available in 1D only"
        )
    lat = spec.lattice
    basis = enumerate_basis(lat)
    classical_count = len(enumerate_ground_configs(lat))

    h = build_hamiltonian_susy(build_supercharge(spec), basis)
    spectrum = diagonalize(h)
    eig = spectrum.eigenvalues
    dim_ker_h = int(np.count_nonzero(np.abs(eig) <= zero_tol))
    positive = eig[eig > zero_tol]
    min_pos_h = float(positive.min()) if positive.size else float("nan")

    diag = build_h_classical(spec).to_sparse(basis).diagonal()
    dim_ker_hcl = int(np.count_nonzero(diag == 0))
    pos = diag[diag > 0]
    min_pos_cl = float(pos.min()) if pos.size else float("nan")

    return KernelCensus(
        classical_count=classical_count,
        dim_ker_h_classical=dim_ker_hcl,
        dim_ker_h=dim_ker_h,
        min_positive_classical=min_pos_cl,
        min_positive_h=min_pos_h,
    )
