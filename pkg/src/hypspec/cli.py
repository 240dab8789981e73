"""Command-line interface.

Exit codes: 0 success, 2 bad input (parse, validation, geometry, mesh
quality), 3 resource cap exceeded, 4 eigensolver failure.  The triangle
budget can be overridden with the HYPSPEC_MAX_TRIANGLES environment
variable.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from . import family, partition, report, spectral, surface
from .errors import (
    ConvergenceError,
    HypspecError,
    InvalidGeometryError,
    InvalidInputError,
    MeshQualityError,
    ResourceLimitError,
    SpecValidationError,
)

_EXIT_BAD_INPUT = 2
_EXIT_RESOURCE = 3
_EXIT_SOLVER = 4


def _max_triangles():
    raw = os.environ.get("HYPSPEC_MAX_TRIANGLES")
    if raw is None:
        return surface.MAX_TRIANGLES
    try:
        val = int(raw)
        if val < 1:
            raise ValueError
    except ValueError:
        raise InvalidInputError(
            f"HYPSPEC_MAX_TRIANGLES must be a positive integer, got {raw!r}")
    return val


def _load_surface(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise SpecValidationError(f"cannot read {path}: {exc}")
    return surface.assemble(surface.SurfaceSpec.from_json(text))


def _meshed(args):
    surf = _load_surface(args.surface)
    return surf, surface.triangulate(surf, h_max=args.h_max,
                                     max_triangles=_max_triangles())


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _cmd_build(args):
    surf = _load_surface(args.surface)
    info = {
        "pants": len(surf.spec.pants),
        "gluings": len(surf.spec.gluings),
        "genus": surf.genus,
        "area": surf.area,
    }
    if args.format == "json":
        _emit(report.dumps_json(info), args.out)
    else:
        _emit(f"pants={info['pants']} gluings={info['gluings']} "
              f"genus={info['genus']} area={info['area']:.4f}\n", args.out)
    return 0


def _cmd_mesh(args):
    _, mesh = _meshed(args)
    if args.out is None:
        surface.write_hypmesh(mesh, sys.stdout)
    else:
        with open(args.out, "w") as fh:
            surface.write_hypmesh(mesh, fh)
    print(f"vertices={mesh.n_vertices} edges={mesh.n_edges} "
          f"triangles={mesh.n_triangles} max_edge={mesh.max_edge:.6f}",
          file=sys.stderr)
    return 0


def _cmd_spectrum(args):
    _, mesh = _meshed(args)
    pair = spectral.assemble_fem(mesh)
    spec = spectral.lowest_eigs(pair, args.eigs, tol=args.tol,
                                maxiter=args.maxiter, seed=args.seed)
    import io
    buf = io.StringIO()
    spec.write_csv(buf)
    _emit(buf.getvalue(), args.out)
    return 0


def _cmd_partition(args):
    _, mesh = _meshed(args)
    cg = surface.cell_graph(mesh)
    graph = partition.BoundedGraph(cg.neighbors)
    part = partition.partition_bounded(graph, args.k)
    info = {
        "k": part.k,
        "alpha": part.alpha,
        "cells": cg.n,
        "blocks": [list(b) for b in part.blocks],
        "remainder": list(part.remainder),
    }
    _emit(report.dumps_json(info), args.out)
    return 0


def _cmd_cheeger(args):
    _, mesh = _meshed(args)
    est = partition.discrete_cheeger(mesh, None, exact_limit=args.exact_limit,
                                     tol=args.tol, seed=args.seed)
    info = {"value": est.value, "method": est.method, "side": list(est.side)}
    _emit(report.dumps_json(info), args.out)
    return 0


def _cmd_certify(args):
    _, mesh = _meshed(args)
    cert = partition.certify_lower_bound(
        mesh, args.epsilon, exact_limit=args.exact_limit,
        k_override=args.k_override, tol=args.tol, seed=args.seed)
    _emit(report.dumps_json(cert.to_dict()), args.out)
    if not cert.conforming:
        print("warning: certificate is non-conforming (reported, not claimed)",
              file=sys.stderr)
    return 0


def _parse_k_list(raw):
    try:
        ks = [int(x) for x in raw.split(",") if x.strip() != ""]
    except ValueError:
        raise InvalidInputError(f"--k expects a comma-separated integer list, got {raw!r}")
    if not ks:
        raise InvalidInputError("--k list is empty")
    uniq = sorted(set(ks))
    if uniq != ks:
        print("warning: --k list reordered and deduplicated", file=sys.stderr)
    return uniq


def _cmd_sharpness(args):
    ks = _parse_k_list(args.k)
    rep = family.verify_sharpness(ks, args.l, h_max=args.h_max,
                                  tol=args.tol, maxiter=args.maxiter,
                                  seed=args.seed,
                                  max_triangles=_max_triangles())
    payload = report.dumps_json(rep.to_dict())
    if args.out is None:
        sys.stdout.write(payload)
        return 0
    with open(args.out + ".json", "w") as fh:
        fh.write(payload)
    with open(args.out + ".tsv", "w") as fh:
        report.dump_tsv(("k", "upper", "lambda"),
                        [(r.k, r.upper, r.lam) for r in rep.rows], fh)
    if not args.no_figure:
        report.render_sharpness_figure(rep, args.out + ".png")
    print(f"fit_upper_exponent={rep.fit_upper_exponent} "
          f"fit_lambda_exponent={rep.fit_lambda_exponent}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(
        prog="hypspec",
        description="Spectra, partitions, and eigenvalue certificates for "
                    "closed hyperbolic surfaces glued from pants.")
    sub = p.add_subparsers(dest="command", required=True)

    def add_mesh_opts(q):
        q.add_argument("surface", help="surface description (JSON)")
        q.add_argument("--h-max", type=float, default=0.5,
                       help="edge-length target for the mesh (default 0.5)")

    def add_solver_opts(q):
        q.add_argument("--tol", type=float, default=1e-8,
                       help="eigensolver residual tolerance (default 1e-8)")
        q.add_argument("--seed", type=int, default=0,
                       help="eigensolver start seed (default 0)")
        q.add_argument("--maxiter", type=int, default=10000,
                       help="eigensolver iteration cap (default 10000)")

    q = sub.add_parser("build", help="validate a surface description")
    q.add_argument("surface")
    q.add_argument("--format", choices=("text", "json"), default="text")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_build)

    q = sub.add_parser("mesh", help="triangulate and write the mesh")
    add_mesh_opts(q)
    q.add_argument("--out")
    q.set_defaults(func=_cmd_mesh)

    q = sub.add_parser("spectrum", help="lowest eigenvalues as CSV")
    add_mesh_opts(q)
    q.add_argument("--eigs", type=int, default=6,
                   help="number of eigenvalues (default 6)")
    add_solver_opts(q)
    q.add_argument("--out")
    q.set_defaults(func=_cmd_spectrum)

    q = sub.add_parser("partition", help="split the cell graph into bounded blocks")
    add_mesh_opts(q)
    q.add_argument("--k", type=int, required=True, help="block exponent")
    q.add_argument("--out")
    q.set_defaults(func=_cmd_partition)

    q = sub.add_parser("cheeger", help="discrete Cheeger constant of the surface")
    add_mesh_opts(q)
    q.add_argument("--exact-limit", type=int, default=partition.DEFAULT_EXACT_LIMIT)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=_cmd_cheeger)

    q = sub.add_parser("certify", help="eigenvalue lower-bound certificate")
    add_mesh_opts(q)
    q.add_argument("--epsilon", type=float, required=True)
    q.add_argument("--exact-limit", type=int, default=partition.DEFAULT_EXACT_LIMIT)
    q.add_argument("--k-override", type=int, default=None,
                   help="force the block exponent (diagnostic)")
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--out")
    q.set_defaults(func=_cmd_certify)

    q = sub.add_parser("sharpness", help="upper bound vs eigenvalue across block sizes")
    q.add_argument("--k", required=True, help="comma-separated block sizes, e.g. 2,3,4")
    q.add_argument("--l", type=int, required=True, help="number of block copies")
    q.add_argument("--h-max", type=float, default=0.35)
    add_solver_opts(q)
    q.add_argument("--out", help="output prefix: writes .json, .tsv and .png")
    q.add_argument("--no-figure", action="store_true")
    q.set_defaults(func=_cmd_sharpness)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (SpecValidationError, InvalidInputError, InvalidGeometryError,
            MeshQualityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_BAD_INPUT
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_RESOURCE
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_SOLVER
    except HypspecError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
