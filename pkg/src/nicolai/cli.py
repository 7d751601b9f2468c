"""Command-line front end.

Subcommands: ``build``, ``charges``, ``groundstates``, ``ergodicity``,
``verify``.  Output is machine-readable JSON (``{"schema": 1, ...}``, floats
at 15 significant digits, keys sorted) or plain text; identical configuration
and seed produce byte-identical output.  Exit codes: 0 all pass, 2 bad
configuration, 3 verification failure.  ``NICOLAI_THREADS`` caps the worker
pool used for sector diagonalization.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import charges as ch
from . import dynamics as dyn
from . import groundstates as gs
from .fock import (
    SparseOperator,
    anticommutator,
    commutator,
    enumerate_basis,
    monomial_to_sparse,
    parity_operator,
)
from .model import (
    ModelSpec,
    build_h_classical,
    build_h_hop,
    build_hamiltonian_explicit,
    build_hamiltonian_susy,
    build_supercharge,
    number_operator,
    particle_hole,
    translate2,
)

SCHEMA = 1


def _round15(obj):
    """Round every float in a payload tree to 15 significant digits."""
    if isinstance(obj, float):
        return float(f"{obj:.15g}")
    if isinstance(obj, dict):
        return {k: _round15(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round15(v) for v in obj]
    if isinstance(obj, (np.floating,)):
        return float(f"{float(obj):.15g}")
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _render(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_round15(payload), sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        rows = payload.get("csv_rows")
        if rows is None:
            raise ValueError("this command has no CSV representation")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(payload["csv_header"])
        for row in rows:
            writer.writerow(
                [f"{v:.15g}" if isinstance(v, float) else v for v in row]
            )
        return buf.getvalue()
    lines = [f"# {payload['command']}"]
    for check in payload.get("checks", []):
        lines.append(f"{'PASS' if check['passed'] else 'FAIL'} {check['name']}")
    for key, value in payload.items():
        if key in ("command", "checks", "schema", "csv_rows", "csv_header"):
            continue
        if key == "config_lines":
            lines.extend(value)
            continue
        lines.append(f"{key}: {json.dumps(_round15(value), sort_keys=True)}")
    return "\n".join(lines) + "\n"


def _emit(payload: dict, args) -> None:
    text = _render(payload, args.format)
    if args.output:
        tmp = f"{args.output}.tmp-{os.getpid()}"
        with open(tmp, "w") as fh:
            fh.write(text)
        os.replace(tmp, args.output)
    else:
        sys.stdout.write(text)


def _add_lattice_flags(p: argparse.ArgumentParser):
    p.add_argument("--ring", action="store_true", help="periodic 1D ring [-m-1, m]")
    p.add_argument("--m", type=int, help="ring size parameter")
    p.add_argument("--chain", type=int, metavar="NSITES", help="open chain [0, NSITES-1]")
    p.add_argument("--torus", metavar="WxH", help="periodic 2D torus, e.g. 4x4")


def _resolve_spec(args) -> ModelSpec:
    picks = sum(bool(x) for x in (args.ring, args.chain is not None, args.torus))
    if picks != 1:
        raise ValueError("choose exactly one of --ring/--chain/--torus")
    if args.ring:
        if args.m is None:
            raise ValueError("--ring requires --m")
        return ModelSpec.ring(args.m)
    if args.chain is not None:
        return ModelSpec.chain_sites(args.chain)
    try:
        w, h = (int(x) for x in args.torus.lower().split("x"))
    except Exception as exc:
        raise ValueError(f"cannot parse torus size {args.torus!r}") from exc
    return ModelSpec.torus(w, h)


def _check(name: str, passed: bool, detail=None) -> dict:
    entry = {"name": name, "passed": bool(passed)}
    if detail is not None:
        entry["detail"] = detail
    return entry


def _build_checks(spec: ModelSpec, seed: int) -> list:
    lat = spec.lattice
    basis = enumerate_basis(lat)
    q = build_supercharge(spec)
    qm = q.to_sparse(basis)
    qd = qm.adjoint()
    h = anticommutator(qm, qd)
    checks = [
        _check("q_squared_zero", (qm @ qm).is_zero()),
        _check("q_dagger_squared_zero", (qd @ qd).is_zero()),
    ]

    rng = np.random.default_rng(seed)
    quad_ok, psd_ok = True, True
    for _ in range(20):
        v = rng.standard_normal(basis.dim)
        hv = float(v @ (h.matrix @ v))
        qv, qdv = qm.matrix @ v, qd.matrix @ v
        quad_ok &= abs(hv - (qv @ qv + qdv @ qdv)) <= 1e-10 * max(1.0, abs(hv))
        psd_ok &= hv >= -1e-10
    checks.append(_check("h_quadratic_form", quad_ok))
    checks.append(_check("h_positive_semidefinite", psd_ok))
    if basis.dim <= 4096:
        spectrum = dyn.diagonalize(h, workers=dyn.default_workers())
        checks.append(
            _check(
                "h_min_eigenvalue_zero",
                abs(float(spectrum.eigenvalues[0])) <= 1e-10,
                float(spectrum.eigenvalues[0]),
            )
        )

    if spec.variant == "nicolai-1d":
        hx = build_hamiltonian_explicit(spec).to_sparse(basis)
        hc = build_h_classical(spec).to_sparse(basis)
        hh = build_h_hop(spec).to_sparse(basis)
        checks.append(_check("h_susy_equals_explicit", h.equals(hx)))
        checks.append(_check("h_equals_classical_plus_hop", h.equals(hc + hh)))

    n_op = number_operator(lat, basis)
    checks.append(_check("commutes_with_number", commutator(h, n_op).is_zero()))
    par = parity_operator(basis)
    checks.append(_check("q_is_odd", (par @ qm @ par + qm).is_zero()))
    # reversing the k mutually anticommuting factors of one local charge
    # costs (-1)**(k(k-1)/2): -Q* for the 1D triples, +Q* for the 2D crosses
    k = 3 if spec.variant == "nicolai-1d" else 5
    ph_sign = -1 if (k * (k - 1) // 2) % 2 else 1
    rho_q = particle_hole(q).to_sparse(basis)
    checks.append(_check("particle_hole_q", (rho_q - ph_sign * qd).is_zero()))
    rho_h = anticommutator(rho_q, rho_q.adjoint())
    checks.append(_check("particle_hole_h", rho_h.equals(h)))
    if lat.periodic:
        shifted = translate2(q, lat)
        sm = shifted.to_sparse(basis)
        checks.append(
            _check("translation2_h", anticommutator(sm, sm.adjoint()).equals(h))
        )
    return checks


def cmd_build(args) -> int:
    spec = _resolve_spec(args)
    basis = enumerate_basis(spec.lattice)
    q = build_supercharge(spec)
    payload = {
        "schema": SCHEMA,
        "command": "build",
        "model": json.loads(spec.to_json()),
        "supercharge_terms": len(q),
        "dimension": basis.dim,
        "supercharge_nnz": q.to_sparse(basis).nnz,
    }
    code = 0
    if args.verify:
        checks = _build_checks(spec, args.seed)
        payload["checks"] = checks
        payload["failures"] = sum(not c["passed"] for c in checks)
        if payload["failures"]:
            code = 3
    _emit(payload, args)
    return code


def _sequence_rows(seqs) -> list:
    return [s.to_json_obj() for s in seqs]


def cmd_charges(args) -> int:
    payload = {"schema": SCHEMA, "command": "charges"}
    code = 0

    if args.tables:
        tables = ch.reference_interval_tables()
        out = {}
        config_lines = []
        for l, rows in tables.items():
            enumerated = {s.values for s in ch.enumerate_hat_xi(0, l)}
            match = enumerated == {s.values for s in rows}
            groups: dict = {}
            for s in rows:
                key = f"{'-' if s.values[0] < 0 else '+'}{'-' if s.values[-1] < 0 else '+'}"
                groups.setdefault(key, []).append(s.pattern)
            out[str(l)] = {
                "interval": [0, 2 * l],
                "count": len(rows),
                "groups": groups,
                "matches_enumeration": match,
            }
            config_lines.append(f"interval [0, {2 * l}] ({len(rows)} rows)")
            for key, pats in groups.items():
                for p in pats:
                    config_lines.append(f"  {key}  {p}")
            if not match:
                code = 3
        payload["tables"] = out
        payload["config_lines"] = config_lines
        _emit(payload, args)
        return code

    if args.interval:
        if args.ring or args.chain is not None or args.torus:
            raise ValueError("--interval cannot be combined with a lattice flag")
        k, l = args.interval
        seqs = ch.enumerate_hat_xi(k, l)
        payload["interval"] = [2 * k, 2 * l]
        payload["count"] = len(seqs)
        payload["transfer_matrix_count"] = ch.transfer_count_hat_xi(k, l)
        payload["sequences"] = _sequence_rows(seqs)
        if payload["count"] != payload["transfer_matrix_count"]:
            code = 3
        if args.check:
            # embed in a chain two sites wider on each side so the triples
            # straddling the support edges are present
            if l - k > 7:
                raise ValueError(
                    "--check embeds the interval in a Fock space; limited to l - k <= 7"
                )
            spec = ModelSpec.chain(2 * k - 2, 2 * l + 2)
            basis = enumerate_basis(spec.lattice)
            h = build_hamiltonian_susy(build_supercharge(spec), basis)
            residual = max(
                int(ch.conservation_check(spec, f, basis, h)) for f in seqs
            )
            payload["embedding_chain"] = [2 * k - 2, 2 * l + 2]
            payload["max_commutator_residual"] = residual
            if residual != 0:
                code = 3
    else:
        spec = _resolve_spec(args)
        if spec.variant != "nicolai-1d" or not spec.lattice.periodic:
            raise ValueError("charge listings need --interval or --ring")
        lat = spec.lattice
        arcs = ch.all_embeddable_sequences(lat)
        rings = ch.enumerate_ring_sequences(lat)
        payload["model"] = json.loads(spec.to_json())
        payload["embeddable_count"] = len(arcs)
        payload["full_ring_count"] = len(rings)
        payload["full_ring_transfer_count"] = ch.transfer_count_ring_sequences(lat)
        if payload["full_ring_count"] != payload["full_ring_transfer_count"]:
            code = 3
        if args.check:
            basis = enumerate_basis(lat)
            h = build_hamiltonian_susy(build_supercharge(spec), basis)
            residual = max(
                int(ch.conservation_check(spec, f, basis, h))
                for f in arcs + rings
            )
            payload["max_commutator_residual"] = residual
            if residual != 0:
                code = 3
    _emit(payload, args)
    return code


def cmd_groundstates(args) -> int:
    spec = _resolve_spec(args)
    lat = spec.lattice
    payload = {
        "schema": SCHEMA,
        "command": "groundstates",
        "model": json.loads(spec.to_json()),
        "sites": lat.nsites,
        "boundary": lat.boundary,
    }
    code = 0
    if args.transfer_matrix:
        payload["count"] = gs.transfer_count_ground_configs(lat)
        payload["entropy_density"] = gs.entropy_density(lat)
        _emit(payload, args)
        return code

    configs = gs.enumerate_ground_configs(lat)
    payload["count"] = len(configs)
    if lat.dimension == 1:
        payload["transfer_matrix_count"] = gs.transfer_count_ground_configs(lat)
        payload["entropy_density"] = gs.entropy_density(lat)
        if payload["count"] != payload["transfer_matrix_count"]:
            code = 3
    if len(configs) <= 10000:
        payload["configs"] = [g.bitstring() for g in configs]
        payload["config_lines"] = [g.bitstring() for g in configs]

    if args.verify_susy:
        if enumerate_basis(lat).dim > 4096:
            raise ValueError("--verify-susy is limited to lattices of <= 12 sites")
        basis = enumerate_basis(lat)
        q = build_supercharge(spec)
        q_op = q.to_sparse(basis)
        h_op = build_hamiltonian_susy(q, basis)
        bad = []
        for g in configs:
            rep = gs.verify_susy_ground(g, spec, basis, q_op, h_op)
            if not rep.annihilated:
                bad.append(g.bitstring())
        payload["susy_failures"] = bad
        if bad:
            code = 3
    _emit(payload, args)
    return code


def cmd_ergodicity(args) -> int:
    spec = _resolve_spec(args)
    report = dyn.ergodicity_report(
        spec, betas=tuple(args.beta), workers=dyn.default_workers()
    )
    payload = {
        "schema": SCHEMA,
        "command": "ergodicity",
        "model": json.loads(spec.to_json()),
        "betas": list(args.beta),
        "report": report.to_json_obj(),
    }
    code = 0
    gaps_ok = all(
        g > 0 for gaps in report.gaps.values() for g in gaps
    )
    payload["all_gaps_positive"] = gaps_ok
    if not (gaps_ok and report.non_ergodic):
        code = 3
    if args.spectrum_csv:
        basis = enumerate_basis(spec.lattice)
        h = build_hamiltonian_susy(build_supercharge(spec), basis)
        spectrum = dyn.diagonalize(h, workers=dyn.default_workers())
        rows = dyn.spectrum_table(spectrum)
        tmp = f"{args.spectrum_csv}.tmp-{os.getpid()}"
        with open(tmp, "w") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["sector", "eigenvalue", "multiplicity"])
            for sec, val, mult in rows:
                writer.writerow([sec, f"{val:.15g}", mult])
        os.replace(tmp, args.spectrum_csv)
    _emit(payload, args)
    return code


def cmd_verify(args) -> int:
    spec = _resolve_spec(args)
    lat = spec.lattice
    checks = _build_checks(spec, args.seed)
    basis = enumerate_basis(lat)
    q = build_supercharge(spec)
    qm = q.to_sparse(basis)
    h = anticommutator(qm, qm.adjoint())

    if spec.variant == "nicolai-1d":
        if lat.periodic:
            seqs = ch.all_embeddable_sequences(lat) + ch.enumerate_ring_sequences(lat)
        else:
            lo, hi = lat.sites[0], lat.sites[-1]
            seqs = [
                f
                for k in range(lo // 2, hi // 2)
                for l in range(k + 1, hi // 2 + 1)
                for f in ch.enumerate_hat_xi(k, l)
            ]
        residual = 0
        for f in seqs:
            qf = monomial_to_sparse(ch.sequence_to_operator(f), basis)
            residual = max(residual, commutator(h, qf).max_abs())
        checks.append(
            _check("charges_conserved", residual == 0, {"count": len(seqs)})
        )

        mask = gs.ground_config_mask(lat, basis)
        diag = build_h_classical(spec).to_sparse(basis).diagonal()
        q_csc = qm.matrix.tocsc()
        qd_csc = qm.adjoint().matrix.tocsc()
        col_zero = (np.diff(q_csc.indptr) == 0) & (np.diff(qd_csc.indptr) == 0)
        checks.append(
            _check(
                "ground_state_equivalence",
                bool(np.array_equal(mask, diag == 0) and np.array_equal(mask, col_zero)),
                {"count": int(mask.sum())},
            )
        )
        census = gs.kernel_census(spec) if basis.dim <= 4096 else None
        if census is not None:
            checks.append(_check("kernel_census", census.consistent, vars(census)))
        rep = dyn.no_resonance_check(spec)
        checks.append(
            _check("no_resonance", rep.max_residual == 0, {"grounds": rep.ground_count})
        )
    else:
        w, hgt = lat.shape
        residual = 0
        count = 0
        for x0 in range(0, w, 2):
            for y0 in range(0, hgt, 2):
                for val in (-1, 1):
                    seq = ch.rect_constant_sequence(lat, x0, y0, w - 1, hgt - 1, val)
                    residual = max(residual, ch.conservation_check(spec, seq, basis, h))
                    count += 2
        for val in (-1, 1):
            seq = ch.torus_constant_sequence(lat, val)
            qf = monomial_to_sparse(ch.sequence_to_operator(seq), basis)
            residual = max(residual, commutator(h, qf).max_abs())
        checks.append(
            _check("constants_conserved", residual == 0, {"count": count + 2})
        )
        mask = gs.ground_config_mask(lat, basis)
        q_csc = qm.matrix.tocsc()
        qd_csc = qm.adjoint().matrix.tocsc()
        col_zero = (np.diff(q_csc.indptr) == 0) & (np.diff(qd_csc.indptr) == 0)
        checks.append(
            _check(
                "ground_state_equivalence",
                bool(np.array_equal(mask, col_zero)),
                {"count": int(mask.sum())},
            )
        )

    payload = {
        "schema": SCHEMA,
        "command": "verify",
        "model": json.loads(spec.to_json()),
        "checks": checks,
        "failures": sum(not c["passed"] for c in checks),
    }
    _emit(payload, args)
    return 3 if payload["failures"] else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="nicolai",
        description="Exact diagonalization of the Nicolai supersymmetric fermion lattice model",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    common = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = sub.add_parser("build", help="build the model and summarize it", **common)
    _add_lattice_flags(p)
    p.add_argument("--verify", action="store_true", help="run the algebraic checks")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("charges", help="enumerate conserved sequences", **common)
    _add_lattice_flags(p)
    p.add_argument("--interval", type=int, nargs=2, metavar=("K", "L"), help="interval [2K, 2L]")
    p.add_argument("--check", action="store_true", help="verify commutators vanish")
    p.add_argument("--tables", action="store_true", help="dump the shipped golden tables")
    p.set_defaults(func=cmd_charges)

    p = sub.add_parser("groundstates", help="census of classical ground states", **common)
    _add_lattice_flags(p)
    p.add_argument("--transfer-matrix", action="store_true", help="count only, via the transfer matrix")
    p.add_argument("--verify-susy", action="store_true", help="check Q|g> = Q*|g> = H|g> = 0")
    p.set_defaults(func=cmd_groundstates)

    p = sub.add_parser("ergodicity", help="Mazur gaps of the conserved charges", **common)
    _add_lattice_flags(p)
    p.add_argument("--beta", type=float, nargs="+", default=[0.5, 1.0, 2.0], help="inverse temperatures")
    p.add_argument("--spectrum-csv", metavar="PATH", help="also export the spectrum as CSV")
    p.set_defaults(func=cmd_ergodicity)

    p = sub.add_parser("verify", help="run the full invariant suite", **common)
    _add_lattice_flags(p)
    p.set_defaults(func=cmd_verify)

    for p_ in sub.choices.values():
        p_.add_argument("--output", metavar="PATH", help="write the report to PATH")
        p_.add_argument("--format", choices=("json", "csv", "text"), default="json")
        p_.add_argument("--seed", type=int, default=0, help="seed for randomized checks")

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
