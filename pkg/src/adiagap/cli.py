"""Command-line front end.

Wires the generators, reductions, sweeps, and verification oracles into
reproducible runs: every command that writes results puts them in an
output directory together with a ``config.json`` recording the resolved
parameters, sha256 checksums of the input files, and the tool version,
so a result can always be traced back to exactly what produced it.

Exit codes: 0 success, 2 bad input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .desev import (
    DEFAULT_TOP_LEVELS,
    format_label,
    gamma_trace,
    group_levels,
    trace_metadata,
    write_trace_csv,
)
from .graphs import CKParams, WeightedGraph, generate_ck, load_graph, parse_weight, save_graph
from .hamiltonian import build
from .oracle import (
    brute_force_ising_min,
    brute_force_mis,
    check_exact_cover,
    dense_eigs,
    ising_energy,
)
from .reductions import (
    decode_ground_bitstring,
    default_coupling,
    ec3_to_1in3sat,
    ec_to_mis,
    load_cnf,
    load_ec,
    mis_to_ising,
    save_cnf,
    save_ising,
    scaled_ising,
    threesat_to_mis,
)
from .spectra import (
    DEFAULT_S_TOL,
    EigensolverError,
    art_report,
    gap_sweep,
    lowest_eigenpairs,
    refine_profile,
)

USAGE_ERROR = 2
NUMERICAL_ERROR = 3


def _precision() -> int:
    raw = os.environ.get("ADIAGAP_PRECISION", "17")
    try:
        p = int(raw)
    except ValueError:
        raise ValueError(f"ADIAGAP_PRECISION must be an integer, got {raw!r}")
    if not 1 <= p <= 17:
        raise ValueError(f"ADIAGAP_PRECISION must be in 1..17, got {p}")
    return p


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _write_config(out_dir: Path, command: str, params: dict, inputs: list[Path]) -> None:
    cfg = {
        "tool": "adiagap",
        "version": __version__,
        "command": command,
        "params": params,
        "inputs": {str(p): _sha256(p) for p in inputs},
    }
    with open(out_dir / "config.json", "w") as f:
        json.dump(cfg, f, indent=2, sort_keys=True)
        f.write("\n")


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_threads(threads: int | None) -> int:
    if threads is None:
        threads = os.cpu_count() or 1
    if threads < 1:
        raise ValueError(f"--threads must be positive, got {threads}")
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(threads)
    return threads


def _grid(points: int) -> np.ndarray:
    if points < 2:
        raise ValueError(f"--grid must be at least 2, got {points}")
    return np.linspace(0.0, 1.0, points)


def _load_instance_graph(path: str) -> WeightedGraph:
    p = Path(path)
    if not p.exists():
        raise ValueError(f"instance file not found: {path}")
    if p.suffix == ".cnf":
        return threesat_to_mis(load_cnf(p))
    with open(p) as f:
        data = json.load(f)
    if "sets" in data:
        return ec_to_mis(load_ec(p))
    if "edges" in data:
        return load_graph(p)
    raise ValueError(f"{path} is neither a graph, an exact-cover, nor a CNF file")


def _write_sweep(profile, out_dir: Path, fmt: str, precision: int) -> None:
    # Norm entries are NaN in gap-only runs; JSON gets null there.
    g = lambda x: float(f"%.{precision}g" % x) if np.isfinite(x) else None
    if fmt == "json":
        rows = {
            "s": [g(v) for v in profile.grid],
            "E0": [g(v) for v in profile.e0],
            "E1": [g(v) for v in profile.e1],
            "gap": [g(v) for v in profile.gap],
            "mat": [g(v) for v in profile.mat],
            "mat_alt": [g(v) for v in profile.mat_alt],
            "norm": [g(v) for v in profile.norm],
        }
        with open(out_dir / "sweep.json", "w") as f:
            json.dump(rows, f)
            f.write("\n")
        return
    fmtstr = f"%.{precision}g"
    with open(out_dir / "sweep.csv", "w") as f:
        f.write("s,E0,E1,gap,mat,mat_alt,norm\n")
        for t in range(len(profile.grid)):
            f.write(
                ",".join(
                    fmtstr % v
                    for v in (
                        profile.grid[t],
                        profile.e0[t],
                        profile.e1[t],
                        profile.gap[t],
                        profile.mat[t],
                        profile.mat_alt[t],
                        profile.norm[t],
                    )
                )
                + "\n"
            )


def cmd_ck_gen(args) -> int:
    params = CKParams(
        r=args.r, g=args.g, w_A=parse_weight(args.wa), w_B=parse_weight(args.wb)
    )
    graph = generate_ck(params)
    out = _out_dir(args.out)
    save_graph(graph, out / "graph.json")
    _write_config(
        out,
        "ck-gen",
        {"r": args.r, "g": args.g, "w_A": args.wa, "w_B": args.wb},
        [],
    )
    print(f"wrote {out / 'graph.json'} ({graph.n} vertices, {graph.num_edges} edges)")
    return 0


def _resolve_coupling(graph: WeightedGraph, j_arg: str | None) -> Fraction:
    if j_arg is None:
        return default_coupling(graph)
    return parse_weight(j_arg)


def cmd_reduce(args) -> int:
    out = _out_dir(args.out)
    src = Path(args.input)
    if not src.exists():
        raise ValueError(f"input file not found: {args.input}")
    if args.kind == "ec3sat":
        cnf = ec3_to_1in3sat(load_ec(src))
        save_cnf(cnf, out / "clauses.cnf")
        written = ["clauses.cnf"]
    else:
        if args.kind == "ec":
            graph = ec_to_mis(load_ec(src))
        else:
            graph = threesat_to_mis(load_cnf(src))
        coupling = _resolve_coupling(graph, args.j)
        model = scaled_ising(graph, coupling, parse_weight(args.k))
        save_graph(graph, out / "graph.json")
        save_ising(model, out / "ising.json")
        written = ["graph.json", "ising.json"]
    _write_config(
        out,
        "reduce",
        {"kind": args.kind, "input": args.input, "J": args.j, "k": args.k},
        [src],
    )
    print(f"wrote {', '.join(str(out / w) for w in written)}")
    return 0


def cmd_sweep(args) -> int:
    out = _out_dir(args.out)
    graph = _load_instance_graph(args.instance)
    coupling = _resolve_coupling(graph, args.j)
    k = parse_weight(args.k)
    model = scaled_ising(graph, coupling, k)
    H = build(model)
    profile = gap_sweep(
        H, _grid(args.grid), q=args.q, seed=args.seed, with_norm=not args.gap_only
    )
    profile = refine_profile(
        H, profile, s_tol=args.s_tol, seed=args.seed, with_ratio=not args.gap_only
    )
    if args.gap_only:
        report_dict = {
            "k": str(k),
            "s_star": profile.s_star,
            "g_min": profile.g_min,
            "mat_at_s_star": profile.mat_at_s_star,
        }
    else:
        report_dict = art_report(profile).to_json_dict(k=str(k))
    precision = _precision()
    _write_sweep(profile, out, args.format, precision)
    with open(out / "art.json", "w") as f:
        json.dump(report_dict, f, indent=2)
        f.write("\n")
    _write_config(
        out,
        "sweep",
        {
            "instance": args.instance,
            "J": args.j,
            "k": args.k,
            "grid": args.grid,
            "q": args.q,
            "s_tol": args.s_tol,
            "seed": args.seed,
            "format": args.format,
            "gap_only": args.gap_only,
            "precision": precision,
        },
        [Path(args.instance)],
    )
    line = f"s*={profile.s_star:.8f} g_min={profile.g_min:.6e}"
    if not args.gap_only:
        line += (
            f" art1={report_dict['art1']:.3e} art2={report_dict['art2']:.3e}"
            f" art3={report_dict['art3']:.3e}"
        )
    print(line)
    return 0


def cmd_desev(args) -> int:
    out = _out_dir(args.out)
    graph = _load_instance_graph(args.instance)
    coupling = _resolve_coupling(graph, args.j)
    model = scaled_ising(graph, coupling, parse_weight(args.k))
    H = build(model)
    table = group_levels(H)
    trace = gamma_trace(
        H,
        table,
        _grid(args.grid),
        top_levels=args.levels,
        eigenstate=args.eigenstate,
        track=args.track,
        seed=args.seed,
    )
    precision = _precision()
    write_trace_csv(trace, out / "desev.csv", precision=precision)
    with open(out / "metadata.json", "w") as f:
        json.dump(trace_metadata(table, trace), f, indent=2)
        f.write("\n")
    _write_config(
        out,
        "desev",
        {
            "instance": args.instance,
            "J": args.j,
            "k": args.k,
            "grid": args.grid,
            "eigenstate": args.eigenstate,
            "levels": args.levels,
            "track": args.track,
            "seed": args.seed,
            "precision": precision,
        },
        [Path(args.instance)],
    )
    print(f"wrote {out / 'desev.csv'} ({len(trace.grid)} points, {args.levels} levels)")
    return 0


def cmd_art_table(args) -> int:
    out = _out_dir(args.out)
    graph = _load_instance_graph(args.instance)
    coupling = _resolve_coupling(graph, args.j)
    k_values = [parse_weight(tok) for tok in args.k_list.split(",") if tok.strip()]
    if not k_values:
        raise ValueError("--k-list is empty")
    precision = _precision()
    rows = []
    for k in k_values:
        model = scaled_ising(graph, coupling, k)
        H = build(model)
        profile = gap_sweep(H, _grid(args.grid), q=args.q, seed=args.seed)
        profile = refine_profile(H, profile, s_tol=args.s_tol, seed=args.seed)
        rows.append(art_report(profile).to_json_dict(k=str(k)))
        print(
            f"k={k}: s*={rows[-1]['s_star']:.8f} g_min={rows[-1]['g_min']:.6e}",
            flush=True,
        )
    if args.format == "json":
        with open(out / "art_table.json", "w") as f:
            json.dump(rows, f, indent=2)
            f.write("\n")
    else:
        cols = list(rows[0].keys())
        fmtstr = f"%.{precision}g"
        with open(out / "art_table.csv", "w") as f:
            f.write(",".join(cols) + "\n")
            for row in rows:
                f.write(
                    ",".join(
                        str(row[c]) if c == "k" else fmtstr % row[c] for c in cols
                    )
                    + "\n"
                )
    _write_config(
        out,
        "art-table",
        {
            "instance": args.instance,
            "J": args.j,
            "k_list": args.k_list,
            "grid": args.grid,
            "q": args.q,
            "s_tol": args.s_tol,
            "seed": args.seed,
            "format": args.format,
            "precision": precision,
        },
        [Path(args.instance)],
    )
    return 0


def _verify_graph(graph: WeightedGraph, seed: int) -> list[tuple[str, bool, str]]:
    checks: list[tuple[str, bool, str]] = []
    coupling = default_coupling(graph)
    model = mis_to_ising(graph, coupling)

    mis = brute_force_mis(graph)
    ising = brute_force_ising_min(model)
    same_sets = set(ising.decoded) == set(mis.decoded)
    checks.append(
        (
            "Ising minimizers decode to the maximum-weight independent sets",
            same_sets,
            f"{len(ising.decoded)} minimizers vs {len(mis.decoded)} optima",
        )
    )

    # Energy identity on one optimizer: E = -4 Y + (2 sum c - sum J).
    offset = 2 * sum(graph.weights) - sum(v for _, v in model.coupling_items())
    expect = -4 * mis.optimum + offset
    checks.append(
        (
            "minimum Ising energy matches the affine objective identity",
            ising.optimum == expect,
            f"{ising.optimum} vs {expect}",
        )
    )

    ground = min(ising.optimizers)
    bits = format(ground, f"0{graph.n}b")[::-1]
    ket = "".join("0" if b == "1" else "1" for b in bits)
    decoded = decode_ground_bitstring(model, ket)
    checks.append(
        (
            "ground bitstring decodes to an optimal set",
            decoded in set(mis.decoded),
            f"{sorted(decoded)}",
        )
    )

    spot = ising_energy(model, [int(b) for b in bits])
    checks.append(
        (
            "scalar energy evaluation agrees with the scan optimum",
            spot == ising.optimum,
            f"{spot} vs {ising.optimum}",
        )
    )

    if graph.n <= 10:
        H = build(model)
        rng = np.random.default_rng(seed)
        worst = 0.0
        for s in rng.uniform(0.05, 0.95, size=3):
            w, _ = dense_eigs(H, float(s))
            res = lowest_eigenpairs(H, float(s), q=2, tol=0.0, seed=seed)
            worst = max(worst, float(np.max(np.abs(w[:2] - res.values[:2]))))
        checks.append(
            (
                "iterative eigenvalues match dense diagonalization",
                worst < 1e-10,
                f"worst |dE| = {worst:.2e}",
            )
        )
    return checks


def cmd_verify(args) -> int:
    src = Path(args.instance)
    if not src.exists():
        raise ValueError(f"instance file not found: {args.instance}")
    checks: list[tuple[str, bool, str]] = []
    is_ec = False
    if src.suffix != ".cnf":
        with open(src) as f:
            is_ec = "sets" in json.load(f)
    graph = _load_instance_graph(args.instance)
    if is_ec:
        instance = load_ec(src)
        mis = brute_force_mis(graph)
        covered = check_exact_cover(instance, sorted(mis.decoded[0]))
        has_cover = mis.optimum == instance.m
        checks.append(
            (
                "maximum independent set is an exact cover iff weight reaches m",
                covered == has_cover,
                f"weight {mis.optimum} of m={instance.m}",
            )
        )
    checks.extend(_verify_graph(graph, args.seed))

    width = max(len(name) for name, _, _ in checks)
    failures = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name:<{width}}  {detail}")
        failures += 0 if ok else 1
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return 0 if failures == 0 else NUMERICAL_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adiagap",
        description="Adiabatic-evolution spectra of hard-problem Hamiltonians",
    )
    parser.add_argument("--version", action="version", version=f"adiagap {__version__}")
    parser.add_argument(
        "--threads",
        type=int,
        default=None,
        help="cap for internal thread pools (default: all cores)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ck-gen", help="generate a clique-chain benchmark graph")
    p.add_argument("-r", type=int, required=True, help="clique size")
    p.add_argument("-g", type=int, required=True, help="group count")
    p.add_argument("--wa", default="1", help="weight of part-A vertices")
    p.add_argument("--wb", required=True, help="weight of part-B vertices")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_ck_gen)

    p = sub.add_parser("reduce", help="reduce an instance to a graph and Ising model")
    p.add_argument("kind", choices=["ec", "ec3sat", "3sat"])
    p.add_argument("input", help="instance file (exact-cover JSON or DIMACS CNF)")
    p.add_argument("--j", default=None, help="coupling value (default: smallest strict integer)")
    p.add_argument("-k", default="1", help="weight scaling divisor")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("sweep", help="sweep the spectral gap and write ART estimates")
    p.add_argument("instance", help="graph, exact-cover, or CNF file")
    p.add_argument("--j", default=None, help="coupling value (default: smallest strict integer)")
    p.add_argument("-k", default="1", help="weight scaling divisor")
    p.add_argument("--grid", type=int, default=401, help="number of grid points")
    p.add_argument("--q", type=int, default=3, help="eigenpairs per grid point")
    p.add_argument("--s-tol", type=float, default=DEFAULT_S_TOL, help="refinement tolerance in s")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument(
        "--gap-only",
        action="store_true",
        help="skip the operator-norm and ratio searches; report s* and g_min only",
    )
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("desev", help="trace eigenstate weight over objective levels")
    p.add_argument("instance", help="graph, exact-cover, or CNF file")
    p.add_argument("--j", default=None, help="coupling value (default: smallest strict integer)")
    p.add_argument("-k", default="1", help="weight scaling divisor")
    p.add_argument("--grid", type=int, default=201, help="number of grid points")
    p.add_argument("--eigenstate", type=int, choices=[0, 1], default=0)
    p.add_argument("--levels", type=int, default=DEFAULT_TOP_LEVELS, help="levels reported separately")
    p.add_argument("--track", action="store_true", help="follow the state through crossings by overlap")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_desev)

    p = sub.add_parser("art-table", help="ART estimates for a list of scaling factors")
    p.add_argument("instance", help="graph, exact-cover, or CNF file")
    p.add_argument("--j", default=None, help="coupling value (default: smallest strict integer)")
    p.add_argument("--k-list", required=True, help="comma-separated scaling divisors")
    p.add_argument("--grid", type=int, default=401, help="number of grid points")
    p.add_argument("--q", type=int, default=3, help="eigenpairs per grid point")
    p.add_argument("--s-tol", type=float, default=DEFAULT_S_TOL, help="refinement tolerance in s")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("-o", "--out", required=True, help="output directory")
    p.set_defaults(func=cmd_art_table)

    p = sub.add_parser("verify", help="run the cross-oracle invariant suite on an instance")
    p.add_argument("instance", help="graph, exact-cover, or CNF file")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_threads(args.threads)
        return args.func(args)
    except EigensolverError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR
    except (ValueError, TypeError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
