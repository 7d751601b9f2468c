"""Conserved-sequence grammar and the local fermionic constants of motion.

A sequence assigns ``-1`` or ``+1`` to each site of its support.  It is
*permitted* when no even-centered triple carries the alternating patterns
``(-1, +1, -1)`` or ``(+1, -1, +1)`` (on tori: no five-site cross carries
"center +1, arms -1" or "center -1, arms +1").  On an even-ended interval
``[2k, 2l]`` a permitted sequence whose two boundary pairs are each constant
encodes a conserved charge: mapping ``-1 -> a_i`` and ``+1 -> a_i*`` and
multiplying along the support in increasing order yields an odd, nilpotent
monomial that commutes with the Hamiltonian exactly.  The boundary-pair
constancy is what neutralizes the charge triples that straddle the edge of
the support; dropping it generically breaks the conservation.

The interval sets grow like ``2 * 3**(l-k-1)``; an independent transfer-matrix
counter over adjacent (even, odd) value pairs cross-checks every enumeration.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources

import numpy as np

from .fock import (
    ANNIHILATE,
    CREATE,
    FermionMonomial,
    FockBasis,
    SparseOperator,
    anticommutator,
    commutator,
    enumerate_basis,
    monomial_to_sparse,
)
from .model import (
    ModelSpec,
    build_hamiltonian_susy,
    build_supercharge,
    charge_crosses,
    charge_triples,
    local_charge_1d,
    local_charge_2d,
)

__all__ = [
    "ConservedSequence",
    "ChargeAlgebraReport",
    "IndependenceReport",
    "is_permitted",
    "has_edge_conditions",
    "enumerate_hat_xi",
    "arc_sequences",
    "all_embeddable_sequences",
    "enumerate_ring_sequences",
    "sequence_to_operator",
    "sign_sigma",
    "adjoint_identity_check",
    "anticommute_check",
    "overlap_allows_nonzero",
    "conservation_check",
    "vanishing_triple_products",
    "independence_probe",
    "charge_algebra_report",
    "sequence_transfer_matrix",
    "transfer_count_hat_xi",
    "transfer_count_ring_sequences",
    "rectangle_sites",
    "rect_constant_sequence",
    "torus_constant_sequence",
    "enumerate_rectangle_sequences",
    "reference_interval_tables",
    "sample_edge_violating_sequences",
]

_FORBIDDEN_TRIPLES = ((-1, 1, -1), (1, -1, 1))


@dataclass(frozen=True)
class ConservedSequence:
    """A ``{-1, +1}`` assignment on an ordered support.

    ``sites`` lists the support in traversal order: ascending for intervals,
    ring order for arcs and full rings, row-major for rectangles.  ``closed``
    marks supports that wrap onto themselves (full ring, full torus), where
    pattern checks include the wrapped triples.  ``shape`` is set for 2D
    supports.
    """

    sites: tuple
    values: tuple
    closed: bool = False
    shape: tuple | None = None

    def __post_init__(self):
        if len(self.sites) != len(self.values):
            raise ValueError("support and values have different lengths")
        if any(v not in (-1, 1) for v in self.values):
            raise ValueError("sequence values must be -1 or +1")
        if self.shape is not None and self.shape[0] * self.shape[1] != len(self.sites):
            raise ValueError("shape does not match support size")

    def __neg__(self) -> "ConservedSequence":
        return ConservedSequence(
            self.sites, tuple(-v for v in self.values), self.closed, self.shape
        )

    def __len__(self):
        return len(self.sites)

    @property
    def pattern(self) -> str:
        return "".join("+" if v > 0 else "-" for v in self.values)

    def label(self) -> str:
        if self.shape is not None:
            kind = "torus" if self.closed else f"rect{self.shape[0]}x{self.shape[1]}@{self.sites[0]}"
            return f"{kind}:{self.pattern}"
        if self.closed:
            return f"ring:{self.pattern}"
        return f"[{self.sites[0]},{self.sites[-1]}]:{self.pattern}"

    def to_json_obj(self) -> list:
        return [
            {"site": list(s) if isinstance(s, tuple) else s, "value": v}
            for s, v in zip(self.sites, self.values)
        ]


def _grid(seq: ConservedSequence) -> list:
    nx, ny = seq.shape
    return [list(seq.values[i * ny : (i + 1) * ny]) for i in range(nx)]


def is_permitted(f: ConservedSequence) -> bool:
    """No forbidden even-centered triple (1D) or forbidden cross (2D)."""
    if f.shape is not None:
        return _is_permitted_2d(f)
    n = len(f)
    for p in range(n):
        if f.sites[p] % 2:
            continue
        if not f.closed and (p == 0 or p == n - 1):
            continue
        triple = (f.values[(p - 1) % n], f.values[p], f.values[(p + 1) % n])
        if triple in _FORBIDDEN_TRIPLES:
            return False
    return True


def _is_permitted_2d(f: ConservedSequence) -> bool:
    g = _grid(f)
    nx, ny = f.shape
    for i in range(nx):
        for j in range(ny):
            x, y = f.sites[i * ny + j]
            if x % 2 or y % 2:
                continue
            if not f.closed and (i in (0, nx - 1) or j in (0, ny - 1)):
                continue
            center = g[i][j]
            arms = (
                g[(i - 1) % nx][j],
                g[(i + 1) % nx][j],
                g[i][(j - 1) % ny],
                g[i][(j + 1) % ny],
            )
            if center == 1 and all(a == -1 for a in arms):
                return False
            if center == -1 and all(a == 1 for a in arms):
                return False
    return True


def has_edge_conditions(f: ConservedSequence) -> bool:
    """Constant boundary pairs: both ends in 1D, all four pair-lines in 2D."""
    if f.closed:
        raise ValueError("edge conditions apply to open supports only")
    if f.shape is None:
        return f.values[0] == f.values[1] and f.values[-1] == f.values[-2]
    g = _grid(f)
    nx, ny = f.shape
    cols_ok = all(g[0][j] == g[1][j] and g[nx - 1][j] == g[nx - 2][j] for j in range(ny))
    rows_ok = all(g[i][0] == g[i][1] and g[i][ny - 1] == g[i][ny - 2] for i in range(nx))
    return cols_ok and rows_ok


def _enumerate_interval_values(n: int, require_edges: bool):
    """All permitted value tuples on ``n`` positions (even positions are the
    even sites), optionally with constant boundary pairs; lexicographic with
    ``-1 < +1``."""
    out = []
    values = [0] * n

    def extend(q):
        if q == n:
            out.append(tuple(values))
            return
        for v in (-1, 1):
            if require_edges and q == 1 and v != values[0]:
                continue
            if require_edges and q == n - 1 and v != values[q - 1]:
                continue
            if q >= 2 and q % 2 == 1:
                if (values[q - 2], values[q - 1], v) in _FORBIDDEN_TRIPLES:
                    continue
            values[q] = v
            extend(q + 1)

    extend(0)
    return out


def enumerate_hat_xi(k: int, l: int) -> list:
    """All conserved sequences on the interval ``[2k, 2l]``.

    Permitted, with both boundary pairs constant; deterministic lexicographic
    order over ascending sites with ``-1 < +1``.
    """
    if k >= l:
        raise ValueError(f"need k < l, got k={k}, l={l}")
    sites = tuple(range(2 * k, 2 * l + 1))
    return [
        ConservedSequence(sites, v)
        for v in _enumerate_interval_values(2 * (l - k) + 1, require_edges=True)
    ]


def arc_sequences(lattice, start: int, d: int) -> list:
    """Interval sequences embedded on the ring arc of ``2d+1`` sites from
    the even site ``start``; the arc must be proper (shorter than the ring)."""
    if lattice.dimension != 1 or not lattice.periodic:
        raise ValueError("arcs are defined on rings")
    if start % 2:
        raise ValueError("arcs start on even sites")
    length = 2 * d + 1
    if length >= lattice.nsites:
        raise ValueError("arc support must be a proper arc of the ring")
    sites = tuple(lattice.wrap(start + j) for j in range(length))
    return [
        ConservedSequence(sites, v)
        for v in _enumerate_interval_values(length, require_edges=True)
    ]


def all_embeddable_sequences(lattice) -> list:
    """Every interval sequence that embeds in the ring as a proper arc."""
    n = lattice.nsites
    seqs = []
    for d in range(1, (n - 2) // 2 + 1):
        for start in sorted(s for s in lattice.sites if s % 2 == 0):
            seqs.extend(arc_sequences(lattice, start, d))
    return seqs


def enumerate_ring_sequences(lattice) -> list:
    """All permitted sequences on the whole ring, wrapped triples included.

    No boundary-pair condition applies: the ring has no edges.  Lexicographic
    order over the ring traversal.
    """
    if lattice.dimension != 1 or not lattice.periodic:
        raise ValueError("full-ring sequences require a periodic 1D lattice")
    sites = lattice.sites
    n = len(sites)
    even_pos = [p for p in range(n) if sites[p] % 2 == 0]
    boundary_pos = [p for p in even_pos if p == 0 or p == n - 1]
    out = []
    values = [0] * n

    def extend(q):
        if q == n:
            for p in boundary_pos:
                triple = (values[(p - 1) % n], values[p], values[(p + 1) % n])
                if triple in _FORBIDDEN_TRIPLES:
                    return
            out.append(ConservedSequence(sites, tuple(values), closed=True))
            return
        for v in (-1, 1):
            if q >= 2 and sites[q - 1] % 2 == 0:
                if (values[q - 2], values[q - 1], v) in _FORBIDDEN_TRIPLES:
                    continue
            values[q] = v
            extend(q + 1)

    extend(0)
    return out


def sequence_to_operator(f: ConservedSequence) -> FermionMonomial:
    """Ordered product over the support: ``-1 -> a_i``, ``+1 -> a_i*``."""
    return FermionMonomial(
        1,
        tuple(
            (s, CREATE if v > 0 else ANNIHILATE) for s, v in zip(f.sites, f.values)
        ),
    )


def sign_sigma(k: int, l: int) -> int:
    """Adjoint-sign exponent ``(2(l-k)+1)(l-k)`` for interval supports."""
    if k >= l:
        raise ValueError(f"need k < l, got k={k}, l={l}")
    return (2 * (l - k) + 1) * (l - k)


def adjoint_identity_check(f: ConservedSequence, basis: FockBasis) -> bool:
    """Matrix identity ``Q(f)* == (-1)**sigma * Q(-f)`` on interval supports."""
    if f.closed or f.shape is not None:
        raise ValueError("the adjoint sign identity is stated for intervals")
    d = (len(f) - 1) // 2
    sign = -1 if sign_sigma(0, d) % 2 else 1
    op = monomial_to_sparse(sequence_to_operator(f), basis)
    neg = monomial_to_sparse(sequence_to_operator(-f), basis)
    return (op.adjoint() - sign * neg).is_zero()


def anticommute_check(f: ConservedSequence, g: ConservedSequence, basis: FockBasis):
    """Max-abs entry of ``{Q(f), Q(g)}``; zero unless the supports overlap
    with ``f == -g`` on the whole overlap."""
    a = monomial_to_sparse(sequence_to_operator(f), basis)
    b = monomial_to_sparse(sequence_to_operator(g), basis)
    return anticommutator(a, b).max_abs()


def overlap_allows_nonzero(f: ConservedSequence, g: ConservedSequence) -> bool:
    """True when the supports intersect and ``f == -g`` on the intersection."""
    fv = dict(zip(f.sites, f.values))
    gv = dict(zip(g.sites, g.values))
    common = set(fv) & set(gv)
    if not common:
        return False
    return all(fv[s] == -gv[s] for s in common)


def _validate_support(f: ConservedSequence, lattice):
    for s in f.sites:
        if not lattice.contains(s):
            raise ValueError(f"support site {s!r} outside the lattice")
    if f.closed:
        if set(f.sites) != set(lattice.sites):
            raise ValueError("closed sequences must cover the whole lattice")
        return
    if f.shape is None:
        if len(f) < 3 or len(f) % 2 == 0:
            raise ValueError("interval supports have odd length >= 3")
        if f.sites[0] % 2 or f.sites[-1] % 2:
            raise ValueError("interval supports end on even sites")
        if lattice.periodic and len(f) >= lattice.nsites:
            raise ValueError("arc support must be a proper arc of the ring")
        for a, b in zip(f.sites, f.sites[1:]):
            if lattice.wrap(a + 1) != b:
                raise ValueError("interval support is not contiguous")
    else:
        nx, ny = f.shape
        if nx % 2 == 0 or ny % 2 == 0 or nx < 3 or ny < 3:
            raise ValueError("rectangle supports have odd side lengths >= 3")
        x0, y0 = f.sites[0]
        if x0 % 2 or y0 % 2:
            raise ValueError("rectangle supports start on even-even sites")
        w, h = lattice.shape
        if nx > w - 1 or ny > h - 1:
            raise ValueError("rectangle must be proper in both directions")


def conservation_check(
    spec: ModelSpec,
    f: ConservedSequence,
    basis: FockBasis | None = None,
    hamiltonian: SparseOperator | None = None,
):
    """Max-abs entry of ``[H, Q(f)]`` on the full Fock space.

    Zero (exactly, in integer arithmetic) for every conserved sequence;
    generically nonzero when a boundary-pair condition is violated.
    """
    lat = spec.lattice
    _validate_support(f, lat)
    if basis is None:
        basis = enumerate_basis(lat)
    if hamiltonian is None:
        hamiltonian = build_hamiltonian_susy(build_supercharge(spec), basis)
    qf = monomial_to_sparse(sequence_to_operator(f), basis)
    return commutator(hamiltonian, qf).max_abs()


def vanishing_triple_products(
    spec: ModelSpec, f: ConservedSequence, basis: FockBasis | None = None
):
    """Max-abs entry over all products of ``Q(f)`` with the elementary charges
    whose support meets the support of ``f`` (both orders, charge and adjoint).

    This is the local mechanism behind conservation: each such product is the
    zero operator, while disjoint charges anticommute with ``Q(f)``.
    """
    lat = spec.lattice
    _validate_support(f, lat)
    if basis is None:
        basis = enumerate_basis(lat)
    qf = monomial_to_sparse(sequence_to_operator(f), basis)
    support = set(f.sites)
    if spec.variant == "nicolai-1d":
        charges = [
            local_charge_1d(c // 2, lat)
            for (l, c, r) in charge_triples(lat)
            if {l, c, r} & support
        ]
    else:
        charges = [
            local_charge_2d(c[0] // 2, c[1] // 2, lat)
            for cross in charge_crosses(lat)
            for c in [cross[2]]
            if set(cross) & support
        ]
    worst = 0
    for q in charges:
        qm = monomial_to_sparse(q, basis)
        for m in (qm, qm.adjoint()):
            worst = max(worst, (qf @ m).max_abs(), (m @ qf).max_abs())
    return worst


@dataclass
class IndependenceReport:
    """Linear (in)dependence among charge generators and their products."""

    generator_count: int
    generator_rank: int
    max_degree: int
    product_count: int
    product_rank: int

    @property
    def dependencies_found(self) -> bool:
        return self.product_rank < self.product_count


def independence_probe(
    operators: list, max_degree: int = 2
) -> IndependenceReport:
    """Numeric rank of the span of all ordered products of the generators up
    to ``max_degree`` factors, as a proxy for algebraic independence."""
    if not operators:
        raise ValueError("need at least one generator")
    dim = operators[0].dim
    if dim > 4096:
        raise ValueError("independence probe is restricted to small spaces")
    mats = [op.to_dense().astype(np.float64) for op in operators]
    gen_stack = np.stack([m.ravel() for m in mats])
    generator_rank = int(np.linalg.matrix_rank(gen_stack))
    products = list(mats)
    level = list(mats)
    for _ in range(2, max_degree + 1):
        level = [prev @ m for prev in level for m in mats]
        products.extend(level)
    stack = np.stack([m.ravel() for m in products])
    return IndependenceReport(
        generator_count=len(operators),
        generator_rank=generator_rank,
        max_degree=max_degree,
        product_count=len(products),
        product_rank=int(np.linalg.matrix_rank(stack)),
    )


@dataclass
class ChargeAlgebraReport:
    """Generators, their pairwise anticommutators, and the commutant check."""

    generators: list = field(default_factory=list)  # (sequence, monomial)
    pairwise_anticommutators: dict = field(default_factory=dict)
    commutant_check: float = 0

    @property
    def all_conserved(self) -> bool:
        return self.commutant_check == 0


def charge_algebra_report(
    spec: ModelSpec,
    sequences: list,
    basis: FockBasis | None = None,
    include_pairwise: bool = True,
) -> ChargeAlgebraReport:
    """Realize the given sequences as charges and verify their algebra."""
    lat = spec.lattice
    if basis is None:
        basis = enumerate_basis(lat)
    h = build_hamiltonian_susy(build_supercharge(spec), basis)
    report = ChargeAlgebraReport()
    mats = []
    worst = 0
    for f in sequences:
        mono = sequence_to_operator(f)
        report.generators.append((f, mono))
        qf = monomial_to_sparse(mono, basis)
        mats.append(qf)
        worst = max(worst, commutator(h, qf).max_abs())
    report.commutant_check = worst
    if include_pairwise:
        for i in range(len(mats)):
            for j in range(i, len(mats)):
                report.pairwise_anticommutators[(i, j)] = anticommutator(
                    mats[i], mats[j]
                ).max_abs()
    return report


def sequence_transfer_matrix() -> np.ndarray:
    """4x4 transfer matrix over adjacent (even-site, odd-site) value pairs.

    Index ``2*a + b`` encodes the pair ``(v_even, v_odd)`` with ``-1 -> 0``
    and ``+1 -> 1``; a transition is allowed unless the triple formed by the
    previous odd value and the next pair alternates.
    """
    t = np.zeros((4, 4), dtype=np.int64)
    vals = (-1, 1)
    for x, y, u, v in itertools.product(range(2), repeat=4):
        if (vals[y], vals[u], vals[v]) not in _FORBIDDEN_TRIPLES:
            t[2 * x + y, 2 * u + v] = 1
    return t


def transfer_count_hat_xi(k: int, l: int) -> int:
    """Transfer-matrix count of the conserved sequences on ``[2k, 2l]``."""
    if k >= l:
        raise ValueError(f"need k < l, got k={k}, l={l}")
    t = sequence_transfer_matrix()
    m = np.linalg.matrix_power(t, l - k - 1)
    # constant boundary pairs: start in (-,-) or (+,+); the final lone site
    # is pinned to its left neighbour, so it contributes no factor
    return int(m[[0, 3], :].sum())


def transfer_count_ring_sequences(lattice) -> int:
    """Transfer-matrix count of permitted sequences on the full ring."""
    if lattice.dimension != 1 or not lattice.periodic:
        raise ValueError("ring counting requires a periodic 1D lattice")
    nblocks = lattice.nsites // 2
    t = sequence_transfer_matrix()
    return int(np.trace(np.linalg.matrix_power(t, nblocks)))


def rectangle_sites(lattice, x0: int, y0: int, nx: int, ny: int) -> tuple:
    """Row-major sites of an even-aligned (possibly wrapped) rectangle arc."""
    if lattice.dimension != 2:
        raise ValueError("rectangles live on 2D lattices")
    if x0 % 2 or y0 % 2:
        raise ValueError("rectangles start on even-even sites")
    sites = tuple(
        lattice.wrap((x0 + i, y0 + j)) for i in range(nx) for j in range(ny)
    )
    if len(set(sites)) != len(sites):
        raise ValueError("rectangle wraps onto itself")
    return sites


def rect_constant_sequence(lattice, x0, y0, nx, ny, value: int) -> ConservedSequence:
    """The constant ``+-1`` sequence on an even-aligned rectangle."""
    sites = rectangle_sites(lattice, x0, y0, nx, ny)
    return ConservedSequence(sites, (value,) * len(sites), shape=(nx, ny))


def torus_constant_sequence(lattice, value: int) -> ConservedSequence:
    """The constant sequence covering the whole torus."""
    if lattice.dimension != 2 or not lattice.periodic:
        raise ValueError("needs a torus")
    return ConservedSequence(
        lattice.sites, (value,) * lattice.nsites, closed=True, shape=lattice.shape
    )


def enumerate_rectangle_sequences(lattice, x0, y0, nx, ny) -> list:
    """All permitted rectangle sequences with constant boundary pair-lines."""
    sites = rectangle_sites(lattice, x0, y0, nx, ny)
    if nx * ny > 16:
        raise ValueError("exhaustive rectangle enumeration capped at 16 sites")
    out = []
    for bits in itertools.product((-1, 1), repeat=nx * ny):
        seq = ConservedSequence(sites, bits, shape=(nx, ny))
        if is_permitted(seq) and has_edge_conditions(seq):
            out.append(seq)
    return out


def reference_interval_tables() -> dict:
    """The shipped golden tables for the three smallest interval sets,
    keyed by ``l`` (interval ``[0, 2l]``), rows in the published order."""
    tables = {}
    for l in (1, 2, 3):
        text = (
            resources.files("nicolai")
            .joinpath(f"tables/hat_xi_0{l}.json")
            .read_text()
        )
        data = json.loads(text)
        lo, hi = data["interval"]
        sites = tuple(range(lo, hi + 1))
        tables[l] = [
            ConservedSequence(sites, tuple(row)) for row in data["rows"]
        ]
    return tables


def sample_edge_violating_sequences(lattice, count: int, rng) -> list:
    """Random permitted arc sequences violating at least one boundary pair."""
    n = lattice.nsites
    ds = list(range(1, (n - 2) // 2 + 1))
    evens = sorted(s for s in lattice.sites if s % 2 == 0)
    out = []
    while len(out) < count:
        d = ds[rng.integers(len(ds))]
        start = evens[rng.integers(len(evens))]
        length = 2 * d + 1
        sites = tuple(lattice.wrap(start + j) for j in range(length))
        values = tuple(rng.choice((-1, 1)) for _ in range(length))
        seq = ConservedSequence(sites, values)
        if is_permitted(seq) and not has_edge_conditions(seq):
            out.append(seq)
    return out
