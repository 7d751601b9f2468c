"""Spectral analysis and ergodicity diagnostics.

The Hamiltonian conserves particle number, so diagonalization proceeds
per-sector with dense symmetric solvers and the sector blocks are merged into
one ascending spectrum.  Degenerate eigenvalues are grouped into clusters
(the spectrum is massively degenerate) and the cluster projectors define the
dephasing map

    A  ->  sum_E  P_E A P_E,

the infinite-time average of Heisenberg evolution.  For a state rho that is
invariant under the dynamics, the Mazur gap of an observable A,

    gap(A) = Tr(rho A* dephase(A)) - |Tr(rho A)|^2  >=  0,

equals the long-time average of the connected autocorrelation; a strictly
positive gap certifies that A is non-ergodic.  Every conserved charge with
its adjoint gives such an A, and the flip operator between two degenerate
classical ground vectors gives one for ground states, so ergodicity breaks
for the trace state, for every Gibbs state, and for the classical ground
states alike.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fock import FockBasis, SparseOperator, enumerate_basis
from .groundstates import (
    Configuration,
    config_to_vector,
    enumerate_ground_configs,
    is_ground_config,
)
from .model import (
    ModelSpec,
    build_h_hop,
    build_hamiltonian_susy,
    build_supercharge,
)

__all__ = [
    "Spectrum",
    "ThermalState",
    "ErgodicityReport",
    "NoResonanceReport",
    "diagonalize",
    "dephase",
    "mazur_gap",
    "time_averaged_autocorrelation",
    "evolve",
    "ergodicity_report",
    "no_resonance_check",
    "spectrum_table",
    "default_workers",
]


def default_workers() -> int:
    """Worker cap for sector diagonalization; NICOLAI_THREADS overrides."""
    env = os.environ.get("NICOLAI_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return min(4, os.cpu_count() or 1)


@dataclass
class Spectrum:
    """Merged eigendecomposition with degeneracy clusters.

    ``vectors`` holds orthonormal eigenvectors as columns, aligned with the
    ascending ``eigenvalues``; ``clusters`` are half-open index ranges of
    (near-)degenerate groups, and ``sectors`` records the particle number of
    each eigenvector (or -1 when the operator mixes sectors).
    """

    eigenvalues: np.ndarray
    vectors: np.ndarray
    clusters: list
    cluster_tolerance: float
    basis: FockBasis
    sectors: np.ndarray
    residual: float
    max_intra_spread: float
    min_inter_gap: float

    @property
    def dim(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    @property
    def well_separated(self) -> bool:
        """Intra-cluster spreads must sit far below inter-cluster gaps."""
        if self.max_intra_spread == 0.0:
            return True
        return self.min_inter_gap >= 1e3 * self.max_intra_spread

    def projector(self, i: int) -> np.ndarray:
        s, e = self.clusters[i]
        block = self.vectors[:, s:e]
        return block @ block.T


def _sector_groups(h: SparseOperator):
    basis = h.basis
    pops = basis.popcounts
    coo = h.matrix.tocoo()
    if coo.nnz and not np.array_equal(pops[coo.row], pops[coo.col]):
        return [np.arange(basis.dim)], False
    groups = []
    for k in range(int(pops.min()), int(pops.max()) + 1):
        idx = np.nonzero(pops == k)[0]
        if idx.size:
            groups.append(idx)
    return groups, True


def diagonalize(
    h: SparseOperator,
    cluster_tolerance: float = 1e-8,
    workers: int | None = None,
) -> Spectrum:
    """Dense symmetric eigendecomposition, per particle-number sector.

    Raises if the input is not symmetric.  Eigenpair residuals are checked
    against ``1e-8 * ||H||`` after merging.
    """
    m = h.matrix
    asym = m - m.T
    scale = max(float(np.abs(m.data).max()) if m.nnz else 0.0, 1.0)
    if asym.nnz and float(np.abs(asym.data).max()) > 1e-12 * scale:
        raise ValueError("diagonalize expects a symmetric operator")

    md = m.astype(np.float64).tocsr()
    dim = h.dim
    groups, sector_resolved = _sector_groups(h)

    def solve(idx):
        sub = md[idx][:, idx].toarray()
        return np.linalg.eigh(sub)

    nworkers = workers if workers is not None else 1
    if nworkers > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=nworkers) as pool:
            results = list(pool.map(solve, groups))
    else:
        results = [solve(idx) for idx in groups]

    all_w = np.empty(dim)
    all_sector = np.full(dim, -1, dtype=np.int64)
    vectors = np.zeros((dim, dim))
    pos = 0
    pops = h.basis.popcounts
    for idx, (w, v) in zip(groups, results):
        k = idx.size
        all_w[pos : pos + k] = w
        if sector_resolved:
            all_sector[pos : pos + k] = pops[idx[0]]
        vectors[idx, pos : pos + k] = v
        pos += k

    order = np.argsort(all_w, kind="stable")
    eigenvalues = all_w[order]
    vectors = vectors[:, order]
    sectors = all_sector[order]

    norm = float(np.abs(eigenvalues).max()) if dim else 0.0
    r = md @ vectors - vectors * eigenvalues[None, :]
    residual = float(np.sqrt((r * r).sum(axis=0)).max()) if dim else 0.0
    if residual > 1e-8 * max(norm, 1e-12):
        raise RuntimeError(f"eigenpair residual {residual:.3e} exceeds tolerance")

    tol = cluster_tolerance * max(1.0, norm)
    clusters = []
    start = 0
    for i in range(1, dim):
        if eigenvalues[i] - eigenvalues[i - 1] > tol:
            clusters.append((start, i))
            start = i
    clusters.append((start, dim))

    intra = max(
        (float(eigenvalues[e - 1] - eigenvalues[s]) for s, e in clusters),
        default=0.0,
    )
    inter = min(
        (
            float(eigenvalues[clusters[i + 1][0]] - eigenvalues[clusters[i][1] - 1])
            for i in range(len(clusters) - 1)
        ),
        default=float("inf"),
    )
    return Spectrum(
        eigenvalues=eigenvalues,
        vectors=vectors,
        clusters=clusters,
        cluster_tolerance=cluster_tolerance,
        basis=h.basis,
        sectors=sectors,
        residual=residual,
        max_intra_spread=intra,
        min_inter_gap=inter,
    )


def _dense(a) -> np.ndarray:
    if isinstance(a, SparseOperator):
        return a.to_dense().astype(np.float64)
    return np.asarray(a)


def dephase(a, spectrum: Spectrum) -> np.ndarray:
    """Project onto the block diagonal of the degeneracy clusters.

    Idempotent; fixes anything commuting with H; realizes the infinite-time
    average of the Heisenberg evolution of ``a``.
    """
    ad = _dense(a)
    v = spectrum.vectors
    at = v.T @ ad @ v
    out = np.zeros_like(at)
    for s, e in spectrum.clusters:
        out[s:e, s:e] = at[s:e, s:e]
    return v @ out @ v.T


@dataclass
class ThermalState:
    """Invariant state: normalized trace, Gibbs, or a classical ground vector."""

    kind: str
    beta: float | None = None
    rho: np.ndarray | None = None
    vector: np.ndarray | None = None
    dim: int = 0

    @classmethod
    def trace(cls, basis: FockBasis) -> "ThermalState":
        return cls(kind="trace", dim=basis.dim)

    @classmethod
    def gibbs(cls, spectrum: Spectrum, beta: float) -> "ThermalState":
        w = spectrum.eigenvalues
        weights = np.exp(-beta * (w - w.min()))
        weights /= weights.sum()
        v = spectrum.vectors
        rho = (v * weights[None, :]) @ v.T
        return cls(kind="gibbs", beta=beta, rho=rho, dim=spectrum.dim)

    @classmethod
    def classical_ground(cls, config: Configuration, basis: FockBasis) -> "ThermalState":
        return cls(
            kind="classical-ground",
            vector=config_to_vector(config, basis),
            dim=basis.dim,
        )

    def expectation(self, a: np.ndarray):
        if self.vector is not None:
            return self.vector.conj() @ (a @ self.vector)
        if self.kind == "trace":
            return np.trace(a) / self.dim
        return np.trace(self.rho @ a)

    def label(self) -> str:
        if self.kind == "gibbs":
            return f"gibbs(beta={self.beta:g})"
        return self.kind


def _check_invariant(state: ThermalState, spectrum: Spectrum):
    w = spectrum.eigenvalues
    v = spectrum.vectors
    scale = max(1.0, float(np.abs(w).max()) if w.size else 0.0)
    if state.kind == "trace":
        return
    if state.vector is not None:
        hv = v @ (w * (v.T @ state.vector))
        mean = state.vector @ hv
        err = float(np.linalg.norm(hv - mean * state.vector))
        if err > 1e-8 * scale:
            raise ValueError("state vector is not invariant under the dynamics")
        return
    rt = v.T @ state.rho @ v
    comm = rt * w[:, None] - rt * w[None, :]
    if float(np.abs(comm).max()) > 1e-10 * scale:
        raise ValueError("density matrix does not commute with the Hamiltonian")


def mazur_gap(a, state: ThermalState, spectrum: Spectrum) -> float:
    """Long-time-averaged connected autocorrelation of ``a`` under ``state``.

    Always ``>= 0`` up to roundoff; strictly positive certifies that ``a``
    is a non-ergodic observable for this state.
    """
    _check_invariant(state, spectrum)
    ad = _dense(a)
    d = dephase(ad, spectrum)
    m1 = state.expectation(ad.conj().T @ d)
    m2 = abs(state.expectation(ad)) ** 2
    return float(np.real(m1) - m2)


def time_averaged_autocorrelation(
    a,
    state: ThermalState,
    spectrum: Spectrum,
    t_max: float = 200.0,
    steps: int = 2000,
) -> float:
    """Brute-force trapezoid average of ``Tr(rho A* A(t))`` over ``[0, t_max]``.

    Independent of :func:`dephase`; converges to the dephased moment at rate
    ``O(1/t_max)`` and is used as the oracle for :func:`mazur_gap`.
    """
    _check_invariant(state, spectrum)
    ad = _dense(a)
    w = spectrum.eigenvalues
    v = spectrum.vectors
    at = v.T @ ad @ v
    if state.vector is not None:
        vt = v.T @ state.vector
        rt = np.outer(vt, vt.conj())
    elif state.kind == "trace":
        rt = np.eye(spectrum.dim) / spectrum.dim
    else:
        rt = v.T @ state.rho @ v
    m1 = rt @ at.conj().T
    k = m1 * at.T  # C(t) = sum_{mn} k_{mn} exp(i (w_n - w_m) t)
    delta = w[None, :] - w[:, None]
    dt = t_max / steps
    step_phase = np.exp(1j * delta * dt)
    phase = np.ones_like(step_phase)
    total = 0.0
    for s in range(steps + 1):
        weight = 0.5 if s in (0, steps) else 1.0
        total += weight * float(np.real((k * phase).sum()))
        if s < steps:
            phase *= step_phase
    return total * dt / t_max


def evolve(a, spectrum: Spectrum, t: float) -> np.ndarray:
    """Heisenberg evolution ``exp(iHt) A exp(-iHt)`` in eigenbasis arithmetic."""
    ad = _dense(a)
    w = spectrum.eigenvalues
    v = spectrum.vectors
    at = v.T @ ad @ v
    phase = np.exp(1j * w * t)
    return (v * phase[None, :]) @ at @ (v * phase[None, :]).conj().T


@dataclass
class NoResonanceReport:
    """Pair hopping annihilates every classical ground vector."""

    ground_count: int
    max_residual: int
    powers_vanish: bool
    nonground_example: tuple | None  # (bitstring, residual)


def no_resonance_check(spec: ModelSpec) -> NoResonanceReport:
    """Verify ``H_hop |g> = 0`` exactly for every ground configuration.

    All powers of the perturbation then annihilate the vector as well, so no
    matrix element connects it to anything at any perturbative order.
    """
    if spec.variant != "nicolai-1d":
        raise ValueError("the hopping split is only available in 1D")
    lat = spec.lattice
    basis = enumerate_basis(lat)
    hop = build_h_hop(spec).to_sparse(basis).matrix.tocsc()

    def col_residual(state: int) -> int:
        col = hop[:, [basis.index_of(state)]]
        return int(np.abs(col.data).max()) if col.nnz else 0

    configs = enumerate_ground_configs(lat)
    worst = max((col_residual(g.state) for g in configs), default=0)

    # any state with a nonzero hop column is necessarily non-ground
    example = None
    nnz_per_col = np.diff(hop.indptr)
    hit = np.nonzero(nnz_per_col)[0]
    if hit.size:
        state = int(basis.states[hit[0]])
        g = Configuration.from_state(state, lat)
        assert not is_ground_config(g)
        example = (g.bitstring(), col_residual(state))

    return NoResonanceReport(
        ground_count=len(configs),
        max_residual=worst,
        powers_vanish=worst == 0,
        nonground_example=example,
    )


@dataclass
class ErgodicityReport:
    """Mazur gaps of the conserved charges under invariant states."""

    generator_labels: list = field(default_factory=list)
    gaps: dict = field(default_factory=dict)  # state label -> list of gaps
    invariant_dimension: int = 0
    non_ergodic: bool = False
    classical_witness: dict | None = None

    def to_json_obj(self) -> dict:
        return {
            "generators": list(self.generator_labels),
            "gaps": {k: list(v) for k, v in self.gaps.items()},
            "invariant_dimension": self.invariant_dimension,
            "non_ergodic": self.non_ergodic,
            "classical_witness": self.classical_witness,
        }


def ergodicity_report(
    spec: ModelSpec,
    betas=(0.5, 1.0, 2.0),
    generators=None,
    workers: int | None = None,
) -> ErgodicityReport:
    """Mazur gaps of every Hermitian charge ``Q(f) + Q(f)*`` on a ring.

    Gaps are reported for the trace state and for Gibbs states at the given
    inverse temperatures; the dimension of the span of the invariant
    operators found (including the identity) is the finite-volume stand-in
    for the invariant-projection criterion: more than one dimension means
    non-ergodic.  When degenerate classical ground states exist, the flip
    operator between two of them witnesses the breaking for ground states.
    """
    from .charges import (
        all_embeddable_sequences,
        enumerate_ring_sequences,
        sequence_to_operator,
    )
    from .fock import monomial_to_sparse

    lat = spec.lattice
    if spec.variant != "nicolai-1d" or not lat.periodic:
        raise ValueError("the ergodicity report runs on rings")
    basis = enumerate_basis(lat)
    h = build_hamiltonian_susy(build_supercharge(spec), basis)
    spectrum = diagonalize(h, workers=workers)

    if generators is None:
        sequences = all_embeddable_sequences(lat) + enumerate_ring_sequences(lat)
        generators = []
        for f in sequences:
            qf = monomial_to_sparse(sequence_to_operator(f), basis)
            generators.append((f.label(), (qf + qf.adjoint()).to_dense()))

    report = ErgodicityReport()
    report.generator_labels = [lbl for lbl, _ in generators]

    states = [ThermalState.trace(basis)]
    states += [ThermalState.gibbs(spectrum, b) for b in betas]
    for st in states:
        report.gaps[st.label()] = [
            mazur_gap(a, st, spectrum) for _, a in generators
        ]

    dim = basis.dim
    stack = np.empty((len(generators) + 1, dim * dim))
    stack[0] = np.eye(dim).ravel()
    for i, (_, a) in enumerate(generators):
        stack[i + 1] = np.asarray(a, dtype=np.float64).ravel()
    report.invariant_dimension = int(np.linalg.matrix_rank(stack))
    report.non_ergodic = report.invariant_dimension >= 2

    grounds = enumerate_ground_configs(lat)
    if len(grounds) >= 2:
        g0, g1 = grounds[0], grounds[1]
        v0 = config_to_vector(g0, basis)
        v1 = config_to_vector(g1, basis)
        flip = np.outer(v0, v1) + np.outer(v1, v0)
        st = ThermalState.classical_ground(g0, basis)
        report.classical_witness = {
            "state": g0.bitstring(),
            "partner": g1.bitstring(),
            "gap": mazur_gap(flip, st, spectrum),
        }
    return report


def spectrum_table(spectrum: Spectrum) -> list:
    """Rows ``(sector, eigenvalue, multiplicity)`` sorted by sector then value.

    Eigenvalues within one degeneracy cluster are reported at the cluster
    mean; multiplicities are counted per sector.
    """
    rows = {}
    for (s, e) in spectrum.clusters:
        value = float(spectrum.eigenvalues[s:e].mean())
        for i in range(s, e):
            key = (int(spectrum.sectors[i]), value)
            rows[key] = rows.get(key, 0) + 1
    return sorted((sec, val, mult) for (sec, val), mult in rows.items())
