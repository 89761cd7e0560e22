"""Command-line interface.

Subcommands wrap the library modules one-to-one:

  bound          purity-sphere outer bound
  stlc           boundary of the locally controllable set along ray fans
  unitary-bound  spectrum polytope and best unitary transfer efficiency
  simulate       periodic pseudo-pure / pseudo-Bell sequences
  noe            saturation steady state
  fit            relaxation-rate estimation from trajectory CSVs
  robustness     fixed-point sensitivity to pulse-amplitude errors
  figure1        CSV/JSON bundle with all bounds and trajectories

Every command writes a `<out>.meta.json` sidecar (version, configuration,
timing).  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

import argparse
import os
import sys
import time

import numpy as np
from scipy.linalg import expm

from . import __version__
from .chloroform import BLOCKS, CHLOROFORM, RateSet, assemble_generator
from .diagonal import diag_labels, diag_slots
from .dynamics import AffineGenerator
from .errors import ReachsetError, ValidationError
from .over_approx import ellipsoid_axis_intersections, max_purity_on_ellipsoid
from .pauli import CoherenceVector, build_basis
from .parallel import worker_count
from .sequences import (
    bell_direction,
    bell_sequence,
    fixed_point,
    noe_steady_state,
    pps_direction,
    pps_pulse_sequence_builder,
    pps_sequence,
    robustness_sweep,
    simulate_sequence,
)
from .serialize import (
    dump_json,
    load_json,
    read_trajectory_csv,
    write_csv,
    write_trajectory_csv,
)
from .under_approx import build_permutation_set, fibonacci_sphere, stlc_boundary_rays
from .unitary_bound import (
    diagonal_vertex_coords,
    kappa_unitary_max,
    polytope_ray_exit,
    polytope_vertices,
)
from .chloroform import fit_rates


def _load_generator(args):
    if getattr(args, "preset", None):
        if args.preset != "chloroform":
            raise ValidationError(f"unknown preset {args.preset!r}")
        eps = getattr(args, "epsilon", 1.0)
        rates = RateSet(eps_C=eps, eps_H=4.0 * eps)
        return assemble_generator(rates), rates
    if getattr(args, "gen", None):
        if not os.path.exists(args.gen):
            raise ValidationError(f"generator file not found: {args.gen}")
        return AffineGenerator.from_json_dict(load_json(args.gen)), None
    raise ValidationError("provide --gen FILE or --preset chloroform")


def _sidecar(args, out_path, elapsed, extra=None):
    meta = {
        "version": __version__,
        "command": args.command,
        "options": {
            k: v
            for k, v in sorted(vars(args).items())
            if k not in ("command", "func") and v is not None
        },
        "elapsed_s": elapsed,
    }
    if extra:
        meta.update(extra)
    dump_json(meta, out_path + ".meta.json")


def _target_vector(spec_str):
    if spec_str == "pps":
        return pps_direction()
    if spec_str == "bell":
        return bell_direction()
    if os.path.exists(spec_str):
        return CoherenceVector.from_json_dict(load_json(spec_str))
    raise ValidationError(f"target must be pps, bell, or a JSON file: {spec_str}")


def cmd_bound(args):
    gen, _ = _load_generator(args)
    t0 = time.perf_counter()
    bound = max_purity_on_ellipsoid(
        gen, certify=not args.no_certify, n_starts=args.starts, seed=args.seed
    )
    payload = {
        "radius_sq": bound.radius_sq,
        "argmax": list(bound.argmax_r.r),
        "residual": bound.solver_residual,
        "lagrange_mult": bound.lagrange_mult,
        "axis_intersection": float(np.sqrt(bound.radius_sq)),
        "ellipsoid_axis_intersections": {
            lab: val
            for lab, val in zip(
                diag_labels(gen.n), ellipsoid_axis_intersections(gen)
            )
        },
    }
    dump_json(payload, args.out)
    _sidecar(args, args.out, time.perf_counter() - t0)
    print(f"radius_sq = {bound.radius_sq:.6f} -> {args.out}")
    return 0


def _parse_rays(spec_str):
    if spec_str.startswith("fibonacci:"):
        return fibonacci_sphere(int(spec_str.split(":", 1)[1]))
    if os.path.exists(spec_str):
        dirs = np.loadtxt(spec_str, delimiter=",", ndmin=2)
        return dirs / np.linalg.norm(dirs, axis=1)[:, None]
    raise ValidationError(f"rays must be fibonacci:N or a CSV file: {spec_str}")


def cmd_stlc(args):
    gen, _ = _load_generator(args)
    if gen.n != 2:
        raise ValidationError("boundary tracing is implemented for n=2")
    rays = _parse_rays(args.rays)
    controls = build_permutation_set(gen.n)
    if args.origin == "eq":
        origin = gen.r_eq[list(diag_slots(gen.n))]
    else:
        origin = np.zeros(2 ** gen.n - 1)
    t0 = time.perf_counter()
    radii = stlc_boundary_rays(
        gen,
        controls,
        rays,
        tol=args.tol,
        origin=origin,
        workers=worker_count(args.workers),
    )
    rows = []
    for d, r in zip(rays, radii):
        point = origin + r * d
        if args.region == "wedge" and not (
            0.0 <= point[2] <= point[0] <= point[1]
        ):
            continue
        rows.append([d[0], d[1], d[2], r])
    write_csv(args.out, ["ray_x", "ray_y", "ray_z", "boundary_radius"], rows)
    _sidecar(
        args,
        args.out,
        time.perf_counter() - t0,
        {"origin": list(origin), "rays_total": len(rays), "rays_written": len(rows)},
    )
    print(f"{len(rows)} boundary radii -> {args.out}")
    return 0


def cmd_unitary_bound(args):
    gen, _ = _load_generator(args)
    target = _target_vector(args.target)
    t0 = time.perf_counter()
    source = CoherenceVector(n=gen.n, r=gen.r_eq)
    kappa = kappa_unitary_max(source, target)
    poly = polytope_vertices(source)
    coords = diagonal_vertex_coords(poly)
    target_diag = target.r[list(diag_slots(gen.n))]
    ray_exit = None
    norm = np.linalg.norm(target_diag)
    if norm > 0:
        ray_exit = polytope_ray_exit(coords, target_diag / norm)
    payload = {
        "kappa_max": kappa,
        "vertices_spectrum": [list(vrow) for vrow in poly.vertices],
        "vertices_diag": [list(vrow) for vrow in coords],
        "ray_exit_radius": ray_exit,
    }
    dump_json(payload, args.out)
    _sidecar(args, args.out, time.perf_counter() - t0)
    print(f"kappa_max = {kappa:.6f} -> {args.out}")
    return 0


def cmd_simulate(args):
    gen, _ = _load_generator(args)
    if args.seq == "pps":
        seq = pps_sequence(args.tau, repeat=args.m)
        target = pps_direction()
    else:
        seq = bell_sequence(args.tau, repeat=args.m)
        target = bell_direction()
    t0 = time.perf_counter()
    start = CoherenceVector(n=gen.n, r=gen.r_eq)
    result = simulate_sequence(
        gen, seq, start, record_every=args.record_every, target=target
    )
    labels = sorted(result.trajectory.observables)
    rows = []
    for i, t in enumerate(result.trajectory.times):
        rows.append(
            [t]
            + [result.trajectory.observables[lab][i] for lab in labels]
            + [result.eta[i], result.theta[i]]
        )
    write_csv(args.out, ["t"] + labels + ["eta", "theta"], rows)
    report = fixed_point(gen, seq, target=target, kappa_tol=1.0)
    _sidecar(
        args,
        args.out,
        time.perf_counter() - t0,
        {
            "fixed_point_eta": report.eta_eff,
            "fixed_point_theta": report.theta,
            "spectral_radius": report.spectral_radius,
        },
    )
    print(
        f"eta* = {report.eta_eff:.4f}, theta* = {report.theta:.4f} -> {args.out}"
    )
    return 0


def cmd_noe(args):
    gen, _ = _load_generator(args)
    t0 = time.perf_counter()
    x = noe_steady_state(gen, args.saturate)
    payload = {
        "saturated": args.saturate,
        "labels": list(diag_labels(gen.n)),
        "x": list(x.x),
    }
    dump_json(payload, args.out)
    _sidecar(args, args.out, time.perf_counter() - t0)
    print(f"steady state {np.round(x.x, 4)} -> {args.out}")
    return 0


def cmd_fit(args):
    if args.block not in BLOCKS:
        raise ValidationError(
            f"block must be one of {sorted(BLOCKS)}, got {args.block!r}"
        )
    trajs = [read_trajectory_csv(p) for p in args.traj]
    init = CHLOROFORM
    if args.init:
        init = RateSet.from_json_dict(load_json(args.init))
    t0 = time.perf_counter()
    fitted, rms = fit_rates(
        trajs, args.block, init_guess=init, n_starts=args.starts, seed=args.seed
    )
    dump_json(fitted.to_json_dict(), args.out)
    _sidecar(
        args, args.out, time.perf_counter() - t0, {"rms_residual": rms}
    )
    print(f"rms residual = {rms:.3e} -> {args.out}")
    return 0


def _parse_grid(spec_str):
    try:
        lo, hi, count = spec_str.split(":")
        return np.linspace(float(lo), float(hi), int(count))
    except ValueError as exc:
        raise ValidationError(f"grid must be lo:hi:count, got {spec_str!r}") from exc


def cmd_robustness(args):
    gen, _ = _load_generator(args)
    grid = _parse_grid(args.grid)
    builder = pps_pulse_sequence_builder(args.tau, compensated=not args.plain)
    t0 = time.perf_counter()
    reference = fixed_point(gen, pps_sequence(args.tau)).x_star
    result = robustness_sweep(gen, builder, grid, grid, reference=reference)
    rows = []
    for i, a in enumerate(result.delta_c):
        for j, b in enumerate(result.delta_h):
            rows.append([a, b, result.delta[i, j]])
    write_csv(args.out, ["delta_c", "delta_h", "delta"], rows)
    _sidecar(
        args,
        args.out,
        time.perf_counter() - t0,
        {"max_delta": result.max_delta, "failed_cells": int(result.failed.sum())},
    )
    print(f"max delta = {result.max_delta:.4f} -> {args.out}")
    return 0


def cmd_figure1(args):
    gen, rates = _load_generator(args)
    os.makedirs(args.out_dir, exist_ok=True)
    t0 = time.perf_counter()
    slots = list(diag_slots(gen.n))

    bound = max_purity_on_ellipsoid(gen, seed=args.seed)
    dump_json(
        {
            "radius_sq": bound.radius_sq,
            "axis_intersection": float(np.sqrt(bound.radius_sq)),
            "ellipsoid_axis_intersections": {
                lab: val
                for lab, val in zip(
                    diag_labels(gen.n), ellipsoid_axis_intersections(gen)
                )
            },
        },
        os.path.join(args.out_dir, "sphere.json"),
    )

    controls = build_permutation_set(gen.n)
    rays = fibonacci_sphere(args.rays)
    origin = np.zeros(2 ** gen.n - 1)
    radii = stlc_boundary_rays(
        gen, controls, rays, tol=args.tol, origin=origin,
        workers=worker_count(args.workers),
    )
    rows = []
    for d, r in zip(rays, radii):
        p = origin + r * d
        if args.region == "wedge" and not (0.0 <= p[2] <= p[0] <= p[1]):
            continue
        rows.append([d[0], d[1], d[2], r, p[0], p[1], p[2]])
    write_csv(
        os.path.join(args.out_dir, "stlc_boundary.csv"),
        ["ray_x", "ray_y", "ray_z", "boundary_radius", "x1", "x2", "x3"],
        rows,
    )

    source = CoherenceVector(n=gen.n, r=gen.r_eq)
    poly = polytope_vertices(source)
    coords = diagonal_vertex_coords(poly)
    write_csv(
        os.path.join(args.out_dir, "polytope_vertices.csv"),
        ["x1", "x2", "x3"],
        [list(vrow) for vrow in coords],
    )

    seq = pps_sequence(args.tau, repeat=args.m)
    sim = simulate_sequence(gen, seq, source, target=pps_direction())
    traj_rows = []
    for i, t in enumerate(sim.trajectory.times):
        x = sim.states[i][slots]
        traj_rows.append([t, x[0], x[1], x[2], sim.eta[i], sim.theta[i]])
    write_csv(
        os.path.join(args.out_dir, "pps_trajectory.csv"),
        ["t", "x1", "x2", "x3", "eta", "theta"],
        traj_rows,
    )

    # saturation path: carbon coordinates clamped to zero, the remaining
    # subsystem relaxes from the (clamped) thermal state to its driven
    # steady state
    noe = noe_steady_state(gen, "C")
    free = [
        k - 1
        for k, lab in enumerate(build_basis(gen.n).labels)
        if k > 0 and lab[0] == "I"
    ]
    A = (gen.Hmat - gen.Rmat)[np.ix_(free, free)]
    start_free = gen.r_eq[free]
    xinf = np.linalg.solve(-A, gen.v[free])
    times = np.linspace(0.0, args.noe_duration, 200)
    noe_rows = []
    for t in times:
        xf = expm(A * t) @ (start_free - xinf) + xinf
        full = np.zeros(gen.dim)
        full[free] = xf
        x = full[slots]
        noe_rows.append([t, x[0], x[1], x[2]])
    write_csv(
        os.path.join(args.out_dir, "noe_trajectory.csv"),
        ["t", "x1", "x2", "x3"],
        noe_rows,
    )
    dump_json(
        {"noe_steady_state": list(noe.x)},
        os.path.join(args.out_dir, "noe.json"),
    )

    _sidecar(args, os.path.join(args.out_dir, "figure1"), time.perf_counter() - t0)
    print(f"figure data -> {args.out_dir}/")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="reachset",
        description="Reachable-set bounds and state engineering for "
        "coherently controlled relaxing qubits.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_default):
        p.add_argument("--gen", help="generator JSON file")
        p.add_argument(
            "--preset", choices=["chloroform"], help="bundled measured model"
        )
        p.add_argument(
            "--epsilon",
            type=float,
            default=1.0,
            help="polarization unit for the preset (default 1)",
        )
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=out_default)

    p = sub.add_parser("bound", help="purity-sphere outer bound")
    common(p, "bound.json")
    p.add_argument("--no-certify", action="store_true",
                   help="skip the multi-start oracle cross-check")
    p.add_argument("--starts", type=int, default=50)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("stlc", help="trace the locally controllable boundary")
    common(p, "stlc.csv")
    p.add_argument("--rays", default="fibonacci:200",
                   help="fibonacci:N or a CSV of unit directions")
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument(
        "--origin",
        choices=["zero", "eq"],
        default="zero",
        help="ray origin; the free equilibrium is itself a stalling point "
        "of the conservative test, so scans default to the maximally "
        "mixed state",
    )
    p.add_argument(
        "--region",
        choices=["all", "wedge"],
        default="all",
        help="wedge keeps only boundary points with 0 <= x3 <= x1 <= x2",
    )
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_stlc)

    p = sub.add_parser("unitary-bound", help="spectrum polytope and kappa")
    common(p, "polytope.json")
    p.add_argument("--target", default="pps", help="pps | bell | vector JSON")
    p.set_defaults(func=cmd_unitary_bound)

    p = sub.add_parser("simulate", help="periodic preparation sequences")
    common(p, "traj.csv")
    p.add_argument("--seq", choices=["pps", "bell"], default="pps")
    p.add_argument("--tau", type=float, default=1.5)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--record-every", type=int, default=1)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("noe", help="saturation steady state")
    common(p, "noe.json")
    p.add_argument("--saturate", choices=["C", "H"], default="C")
    p.set_defaults(func=cmd_noe)

    p = sub.add_parser("fit", help="fit block relaxation rates")
    p.add_argument("--block", required=True)
    p.add_argument("--traj", action="append", required=True,
                   help="trajectory CSV (repeatable)")
    p.add_argument("--init", help="initial-guess rates JSON")
    p.add_argument("--starts", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="rates.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("robustness", help="pulse-error sensitivity sweep")
    common(p, "delta.csv")
    p.add_argument("--grid", default="-0.05:0.05:11", help="lo:hi:count")
    p.add_argument("--tau", type=float, default=1.5)
    p.add_argument("--plain", action="store_true",
                   help="uncompensated pulses instead of BB1 composites")
    p.set_defaults(func=cmd_robustness)

    p = sub.add_parser("figure1", help="export all bounds and trajectories")
    common(p, None)
    p.add_argument("--out-dir", default="figure1_data")
    p.add_argument("--rays", type=int, default=200)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--tau", type=float, default=1.5)
    p.add_argument("--m", type=int, default=500)
    p.add_argument("--noe-duration", type=float, default=60.0)
    p.add_argument(
        "--region",
        choices=["all", "wedge"],
        default="all",
        help="wedge keeps only boundary points with 0 <= x3 <= x1 <= x2",
    )
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_figure1)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ReachsetError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
