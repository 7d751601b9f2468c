"""Supercharge and Hamiltonian of the Nicolai supersymmetric fermion model.

In one dimension the elementary charge sits on an even-centered triple,

    q(2i) = a(2i+1) a*(2i) a(2i-1),

and the supercharge Q is the sum of q over all triples the lattice supports
(every even site on a ring, with wrapped neighbours; only fully contained
triples on an open chain).  Q is nilpotent by the CAR algebra, and the
Hamiltonian is the supersymmetric form H = {Q, Q*}, manifestly positive
semidefinite with [H, Q] = 0.

H splits as H = H_classical + H_hop.  The classical part is diagonal in the
occupation basis and counts, per even-centered triple, the two patterns
"0,1,0" and "1,0,1"; the hopping part moves correlated pairs between
neighbouring triples.  On two-dimensional tori the elementary charge lives on
a five-site cross centered at an even-even site and H is always derived as
{Q, Q*}.

The model carries a global U(1) symmetry ([H, N] = 0), invariance under
translation by two sites on rings, and a particle-hole transformation rho
(swap every a and a*) with rho(Q) = -Q* and rho(H) = H.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fock import (
    ANNIHILATE,
    CREATE,
    FermionMonomial,
    FockBasis,
    Lattice,
    SparseOperator,
    anticommutator,
    monomial_to_sparse,
    normal_order,
)

__all__ = [
    "OperatorSum",
    "ModelSpec",
    "charge_centers",
    "charge_triples",
    "charge_crosses",
    "local_charge_1d",
    "local_charge_2d",
    "build_supercharge",
    "build_hamiltonian_susy",
    "build_hamiltonian_explicit",
    "build_h_classical",
    "build_h_hop",
    "forbidden_triple_projector",
    "number_operator",
    "translate2",
    "particle_hole",
]


@dataclass(frozen=True)
class OperatorSum:
    """A finite sum of fermion monomials."""

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(
            self, "terms", tuple(t for t in self.terms if not t.is_zero)
        )

    @property
    def support(self) -> frozenset:
        return frozenset().union(*(t.support for t in self.terms)) if self.terms else frozenset()

    def to_sparse(self, basis: FockBasis) -> SparseOperator:
        if not self.terms:
            return SparseOperator.zero(basis)
        acc = monomial_to_sparse(self.terms[0], basis)
        for t in self.terms[1:]:
            acc = acc + monomial_to_sparse(t, basis)
        return acc

    def adjoint(self) -> "OperatorSum":
        return OperatorSum(tuple(t.adjoint() for t in self.terms))

    def scaled(self, c) -> "OperatorSum":
        return OperatorSum(tuple(t.scaled(c) for t in self.terms))

    def __add__(self, other: "OperatorSum") -> "OperatorSum":
        return OperatorSum(self.terms + other.terms)

    def __neg__(self) -> "OperatorSum":
        return self.scaled(-1)

    def normal_form(self, lattice: Lattice) -> dict:
        """Merged normal-ordered form; canonical, so usable for term equality."""
        out: dict = {}
        for t in self.terms:
            for key, c in normal_order(t, lattice).items():
                tot = out.get(key, 0) + c
                if tot == 0:
                    out.pop(key, None)
                else:
                    out[key] = tot
        return out

    def __len__(self):
        return len(self.terms)


@dataclass(frozen=True)
class ModelSpec:
    """Which lattice the model lives on, plus the variant tag."""

    lattice: Lattice
    variant: str

    def __post_init__(self):
        lat = self.lattice
        if self.variant not in ("nicolai-1d", "nicolai-2d"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.variant == "nicolai-1d":
            if lat.dimension != 1:
                raise ValueError("nicolai-1d requires a 1D lattice")
            if lat.boundary == "open":
                lo, hi = lat.sites[0], lat.sites[-1]
                if lo % 2 or hi % 2:
                    raise ValueError(
                        "open chains need even endpoints (odd site count) "
                        f"so charge triples align; got [{lo}, {hi}]"
                    )
        else:
            if lat.dimension != 2 or not lat.periodic:
                raise ValueError("nicolai-2d requires a periodic 2D lattice")
            w, h = lat.shape
            if w % 2 or h % 2 or w < 4 or h < 4:
                raise ValueError(
                    "torus sides must be even and >= 4 so every five-site "
                    f"cross has distinct sites; got {w}x{h}"
                )

    @classmethod
    def ring(cls, m: int) -> "ModelSpec":
        return cls(Lattice.ring(m), "nicolai-1d")

    @classmethod
    def chain(cls, lo: int, hi: int) -> "ModelSpec":
        return cls(Lattice.chain(lo, hi), "nicolai-1d")

    @classmethod
    def chain_sites(cls, nsites: int) -> "ModelSpec":
        """Open chain [0, nsites-1]; nsites must be odd."""
        if nsites % 2 == 0:
            raise ValueError("open chains need an odd number of sites")
        return cls.chain(0, nsites - 1)

    @classmethod
    def torus(cls, width: int, height: int) -> "ModelSpec":
        return cls(Lattice.torus(width, height), "nicolai-2d")

    def to_json(self) -> str:
        lat = self.lattice
        if lat.dimension == 1:
            extent = [lat.sites[0], lat.sites[-1]]
        else:
            w, h = lat.shape
            extent = [[0, w - 1], [0, h - 1]]
        return json.dumps(
            {
                "dimension": lat.dimension,
                "extent": extent,
                "boundary": lat.boundary,
                "variant": self.variant,
            },
            sort_keys=True,
        )

    @classmethod
    def from_json(cls, text: str) -> "ModelSpec":
        d = json.loads(text)
        if d["dimension"] == 1:
            lo, hi = d["extent"]
            if d["boundary"] == "periodic":
                if lo != -(hi + 1):
                    raise ValueError(f"periodic extent must be [-m-1, m], got {d['extent']}")
                lat = Lattice.ring(hi)
            else:
                lat = Lattice.chain(lo, hi)
        else:
            (x0, x1), (y0, y1) = d["extent"]
            if (x0, y0) != (0, 0):
                raise ValueError("2D extent must start at (0, 0)")
            if d["boundary"] == "periodic":
                lat = Lattice.torus(x1 + 1, y1 + 1)
            else:
                lat = Lattice.rectangle(x1 + 1, y1 + 1)
        return cls(lat, d["variant"])


def charge_centers(lattice: Lattice) -> list:
    """Centers of the elementary charges the lattice supports.

    1D: even sites whose triple fits (all of them on a ring).  2D periodic:
    all even-even sites.
    """
    if lattice.dimension == 1:
        centers = []
        for c in lattice.sites:
            if c % 2:
                continue
            if lattice.periodic or (
                lattice.contains(c - 1) and lattice.contains(c + 1)
            ):
                centers.append(c)
        return centers
    if not lattice.periodic:
        raise ValueError("2D charges are defined on tori")
    return [(x, y) for (x, y) in lattice.sites if x % 2 == 0 and y % 2 == 0]


def charge_triples(lattice: Lattice) -> list:
    """Even-centered triples ``(left, center, right)``, wrapped on rings."""
    if lattice.dimension != 1:
        raise ValueError("charge triples are one-dimensional")
    return [
        (lattice.wrap(c - 1), c, lattice.wrap(c + 1)) for c in charge_centers(lattice)
    ]


def charge_crosses(lattice: Lattice) -> list:
    """Five-site crosses ``(xminus, yminus, center, xplus, yplus)`` on a torus."""
    crosses = []
    for (x, y) in charge_centers(lattice):
        crosses.append(
            (
                lattice.wrap((x - 1, y)),
                lattice.wrap((x, y - 1)),
                (x, y),
                lattice.wrap((x + 1, y)),
                lattice.wrap((x, y + 1)),
            )
        )
    return crosses


def local_charge_1d(i: int, lattice: Lattice) -> FermionMonomial:
    """The three-site charge ``a(2i+1) a*(2i) a(2i-1)`` centered at ``2i``."""
    left, center, right = (
        lattice.wrap(2 * i - 1),
        lattice.wrap(2 * i),
        lattice.wrap(2 * i + 1),
    )
    for s in (left, center, right):
        if not lattice.contains(s):
            raise ValueError(f"charge triple at center {2 * i} leaves the lattice")
    if center % 2:
        raise ValueError(f"center {center} is not an even site")
    return FermionMonomial(
        1, ((right, ANNIHILATE), (center, CREATE), (left, ANNIHILATE))
    )


def local_charge_2d(i: int, j: int, lattice: Lattice) -> FermionMonomial:
    """Five-site cross charge centered at the even-even site ``(2i, 2j)``."""
    x, y = 2 * i, 2 * j
    xm, ym, c, xp, yp = (
        lattice.wrap((x - 1, y)),
        lattice.wrap((x, y - 1)),
        lattice.wrap((x, y)),
        lattice.wrap((x + 1, y)),
        lattice.wrap((x, y + 1)),
    )
    sites = (xm, ym, c, xp, yp)
    if len(set(sites)) != 5:
        raise ValueError("cross sites collide; torus too small")
    for s in sites:
        if not lattice.contains(s):
            raise ValueError(f"cross at center {(x, y)} leaves the lattice")
    return FermionMonomial(
        1,
        (
            (xm, ANNIHILATE),
            (ym, ANNIHILATE),
            (c, CREATE),
            (xp, ANNIHILATE),
            (yp, ANNIHILATE),
        ),
    )


def build_supercharge(spec: ModelSpec) -> OperatorSum:
    """Sum of the local charges over every triple/cross the lattice supports."""
    lat = spec.lattice
    if spec.variant == "nicolai-1d":
        terms = [local_charge_1d(c // 2, lat) for c in charge_centers(lat)]
    else:
        terms = [
            local_charge_2d(x // 2, y // 2, lat) for (x, y) in charge_centers(lat)
        ]
    return OperatorSum(tuple(terms))


def build_hamiltonian_susy(q: OperatorSum, basis: FockBasis) -> SparseOperator:
    """``H = {Q, Q*}`` realized on ``basis``; symmetric positive semidefinite."""
    qm = q.to_sparse(basis)
    return anticommutator(qm, qm.adjoint())


def _adjacent_center_pairs(lattice: Lattice) -> list:
    """Pairs of neighbouring charge centers ``(c, c+2)``, both supported."""
    centers = set(charge_centers(lattice))
    pairs = []
    for c in sorted(centers):
        c2 = lattice.wrap(c + 2)
        if c2 in centers and (lattice.periodic or c2 == c + 2):
            if lattice.periodic and c2 == c:
                continue  # degenerate two-site ring, not reachable for m >= 1
            pairs.append((c, c2))
    return pairs


def _hop_terms(lattice: Lattice, c: int) -> list:
    """The two pair-hopping monomials coupling centers ``c`` and ``c+2``."""
    l = lattice.wrap(c - 1)
    r2 = lattice.wrap(c + 2)
    r3 = lattice.wrap(c + 3)
    return [
        FermionMonomial(
            1, ((c, CREATE), (l, ANNIHILATE), (r2, ANNIHILATE), (r3, CREATE))
        ),
        FermionMonomial(
            1, ((l, CREATE), (c, ANNIHILATE), (r3, ANNIHILATE), (r2, CREATE))
        ),
    ]


def build_hamiltonian_explicit(spec: ModelSpec) -> OperatorSum:
    """Expanded 1D Hamiltonian, equal to {Q, Q*} as a matrix.

    Per supported center 2i the diagonal block

        a*(2i) a(2i) a(2i+1) a*(2i+1)
      + a*(2i-1) a(2i-1) a(2i) a*(2i)
      - a*(2i-1) a(2i-1) a(2i+1) a*(2i+1)

    and, for every pair of neighbouring supported centers, the two hopping
    terms of :func:`build_h_hop`.  On open chains this truncation reproduces
    {Q_truncated, Q_truncated*} exactly.
    """
    if spec.variant != "nicolai-1d":
        raise ValueError("explicit expansion is only available in 1D; use {Q, Q*}")
    lat = spec.lattice
    terms = []
    for (l, c, r) in charge_triples(lat):
        terms.append(
            FermionMonomial(1, ((c, CREATE), (c, ANNIHILATE), (r, ANNIHILATE), (r, CREATE)))
        )
        terms.append(
            FermionMonomial(1, ((l, CREATE), (l, ANNIHILATE), (c, ANNIHILATE), (c, CREATE)))
        )
        terms.append(
            FermionMonomial(-1, ((l, CREATE), (l, ANNIHILATE), (r, ANNIHILATE), (r, CREATE)))
        )
    for (c, _c2) in _adjacent_center_pairs(lat):
        terms.extend(_hop_terms(lat, c))
    return OperatorSum(tuple(terms))


def build_h_classical(spec: ModelSpec) -> OperatorSum:
    """Diagonal part: per triple ``n_c - n_l n_c - n_c n_r + n_l n_r``."""
    if spec.variant != "nicolai-1d":
        raise ValueError("the classical/hopping split is only available in 1D")
    terms = []
    for (l, c, r) in charge_triples(spec.lattice):
        terms.extend(forbidden_triple_projector(l, c, r).terms)
    return OperatorSum(tuple(terms))


def forbidden_triple_projector(l, c, r) -> OperatorSum:
    """Diagonal operator with eigenvalue 1 exactly on occupations "0,1,0" and
    "1,0,1" of the triple ``(l, c, r)`` and 0 on the other six patterns."""
    n = FermionMonomial.number
    return OperatorSum(
        (
            n(c),
            (n(l) * n(c)).scaled(-1),
            (n(c) * n(r)).scaled(-1),
            n(l) * n(r),
        )
    )


def build_h_hop(spec: ModelSpec) -> OperatorSum:
    """Pair-hopping part: two terms per pair of neighbouring centers."""
    if spec.variant != "nicolai-1d":
        raise ValueError("the classical/hopping split is only available in 1D")
    terms = []
    for (c, _c2) in _adjacent_center_pairs(spec.lattice):
        terms.extend(_hop_terms(spec.lattice, c))
    return OperatorSum(tuple(terms))


def number_operator(lattice: Lattice, basis: FockBasis) -> SparseOperator:
    """Total particle number ``N = sum_i n_i`` (diagonal)."""
    if basis.lattice != lattice:
        raise ValueError("basis does not live on the given lattice")
    return SparseOperator(
        basis, sp.diags(basis.popcounts.astype(np.int64), format="csr")
    )


def translate2(a: OperatorSum, lattice: Lattice, axis: int = 0) -> OperatorSum:
    """Shift every factor site by two lattice units (periodic lattices only)."""
    if not lattice.periodic:
        raise ValueError("translation by two is a symmetry of periodic lattices only")

    def shift(site):
        if lattice.dimension == 1:
            return lattice.wrap(site + 2)
        delta = (2, 0) if axis == 0 else (0, 2)
        return lattice.wrap((site[0] + delta[0], site[1] + delta[1]))

    return OperatorSum(
        tuple(
            FermionMonomial(t.coefficient, tuple((shift(s), k) for s, k in t.factors))
            for t in a.terms
        )
    )


def particle_hole(a: OperatorSum) -> OperatorSum:
    """Swap creation and annihilation on every factor of every term."""
    return OperatorSum(tuple(t.particle_hole() for t in a.terms))
