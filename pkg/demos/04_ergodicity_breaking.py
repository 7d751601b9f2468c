"""Certify ergodicity breaking through Mazur gaps.

For an invariant state the long-time average of the connected
autocorrelation of A equals Tr(rho A* dephase(A)) - |Tr(rho A)|^2 and is
non-negative; a strictly positive value means A retains memory forever.
Every conserved charge provides such an A, at every temperature, and the
degenerate classical ground states provide one of their own.
"""

import numpy as np

from nicolai import (
    ModelSpec,
    diagonalize,
    enumerate_basis,
    ergodicity_report,
    evolve,
    mazur_gap,
    monomial_to_sparse,
    no_resonance_check,
    sequence_to_operator,
    time_averaged_autocorrelation,
)
from nicolai.charges import arc_sequences
from nicolai.dynamics import ThermalState
from nicolai.model import build_hamiltonian_susy, build_supercharge

spec = ModelSpec.ring(2)
basis = enumerate_basis(spec.lattice)
h = build_hamiltonian_susy(build_supercharge(spec), basis)
spectrum = diagonalize(h)
print(f"spectrum: {spectrum.n_clusters} distinct levels, "
      f"lowest {spectrum.eigenvalues[0]:.2e}, "
      f"zero-energy multiplicity "
      f"{int(np.count_nonzero(np.abs(spectrum.eigenvalues) <= 1e-8))}")

# One Hermitian charge A = Q(f) + Q(f)*.
f = arc_sequences(spec.lattice, 0, 1)[0]
qf = monomial_to_sparse(sequence_to_operator(f), basis)
a = (qf + qf.adjoint()).to_dense().astype(float)

trace = ThermalState.trace(basis)
gap = mazur_gap(a, trace, spectrum)
print(f"\ncharge {f.label()}:")
print(f"  trace-state gap        {gap:.6f}")
print(f"  Tr(A^2)/dim            {np.trace(a @ a) / basis.dim:.6f}")
print(f"  brute-force average    "
      f"{time_averaged_autocorrelation(a, trace, spectrum, 200.0, 2000):.6f}")
for beta in (0.5, 1.0, 2.0):
    st = ThermalState.gibbs(spectrum, beta)
    print(f"  Gibbs gap (beta={beta:>3})   {mazur_gap(a, st, spectrum):.6f}")

# The charge is frozen under Heisenberg evolution.
drift = max(
    float(np.abs(evolve(a, spectrum, t) - a).max()) for t in (1.0, 10.0, 100.0)
)
print(f"  max |A(t) - A| over t: {drift:.2e}")

# The full report sweeps every charge on the ring.
report = ergodicity_report(spec)
print(f"\nall {len(report.generator_labels)} charges have positive gaps:",
      all(g > 0 for gaps in report.gaps.values() for g in gaps))
print("independent invariant operators found:", report.invariant_dimension)
print("non-ergodic verdict:", report.non_ergodic)
print("ground-state witness gap:", report.classical_witness["gap"])

# Zero temperature: the hopping perturbation cannot connect ground states
# to anything, at any perturbative order.
rep = no_resonance_check(spec)
print(f"\nhopping term annihilates all {rep.ground_count} ground vectors:",
      rep.max_residual == 0)
