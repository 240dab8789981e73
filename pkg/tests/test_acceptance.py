"""End-to-end gate: ten numbered criteria with pinned tolerances and
runtime budgets.  One test per criterion; the -v line is the record."""

import json
import math
import time

import numpy as np
import pytest

import oracles
from hypspec import (
    SurfaceSpec,
    assemble,
    assemble_fem,
    build_block_ring,
    cell_graph,
    certify_lower_bound,
    cli,
    coarse_mesh,
    discrete_cheeger,
    disjoint_test_functions,
    lowest_eigs,
    minimax_upper_bound,
    partition_bounded,
    staircase_function,
    subdivide,
    triangulate,
    verify_sharpness,
)
from hypspec.partition import BoundedGraph

G2_SPEC = {
    "pants": [{"cuffs": [1, 1, 1]}, {"cuffs": [1, 1, 1]}],
    "gluings": [{"from": [0, c], "to": [1, c]} for c in range(3)],
}


def surface_of_genus(g):
    if g == 2:
        return assemble(SurfaceSpec.from_dict(G2_SPEC))
    return build_block_ring(g - 1, 1)


def test_criterion_01_gauss_bonnet_area():
    for g in (2, 3, 4, 5):
        t0 = time.perf_counter()
        mesh = coarse_mesh(surface_of_genus(g))
        for _ in range(2):
            mesh = subdivide(mesh)
        expect = 2.0 * math.pi * (2 * g - 2)
        rel = abs(mesh.area - expect) / expect
        dt = time.perf_counter() - t0
        print(f"criterion 1 genus {g}: area {mesh.area:.12f} vs {expect:.12f} "
              f"rel {rel:.3e} in {dt:.2f}s")
        assert rel <= 1e-6
        assert dt < 10.0


def test_criterion_02_constant_mode():
    t0 = time.perf_counter()
    for g in (2, 3, 4, 5):
        mesh = triangulate(surface_of_genus(g), h_max=0.6)
        pair = assemble_fem(mesh)
        spec = lowest_eigs(pair, 2)
        v0 = spec.vectors[:, 0]
        cov = float(np.std(v0) / abs(np.mean(v0)))
        print(f"criterion 2 genus {g}: lambda0 {spec.values[0]:.3e} cov {cov:.3e}")
        assert spec.values[0] <= 1e-8
        assert cov <= 1e-6
    dt = time.perf_counter() - t0
    print(f"criterion 2 total {dt:.2f}s")
    assert dt < 30.0


def test_criterion_03_partition_property_suite():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    graphs = 0
    cases = 0
    for _ in range(1000):
        n = int(rng.integers(1, 201))
        extra = float(rng.uniform(0.0, 1.0))
        adj = oracles.random_graph_deg3(rng, n, extra=extra)
        g = BoundedGraph(tuple(tuple(a) for a in adj))
        ks = [k for k in range(8) if 2 ** k <= n]
        ks.append((ks[-1] if ks else 0) + 1)
        for k in ks:
            part = partition_bounded(g, k)
            bad = oracles.check_partition(adj, k, part.blocks, part.remainder)
            assert bad == [], f"n={n} k={k}: {bad}"
            cases += 1
        graphs += 1
    dt = time.perf_counter() - t0
    print(f"criterion 3: {graphs} graphs, {cases} partitions, 0 failures in {dt:.1f}s")
    assert graphs == 1000
    assert dt < 60.0


def test_criterion_04_cheeger_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(99)
    meshes = [coarse_mesh(surface_of_genus(2)), coarse_mesh(surface_of_genus(3))]
    graphs = [cell_graph(m) for m in meshes]
    checked = 0
    while checked < 200:
        mi = checked % 2
        mesh, cg = meshes[mi], graphs[mi]
        size = int(rng.integers(2, 13))
        cells = [int(rng.integers(0, cg.n))]
        while len(cells) < size:
            frontier = sorted({nb for c in cells for nb in cg.neighbors[c]}
                              - set(cells))
            if not frontier:
                break
            cells.append(int(frontier[rng.integers(0, len(frontier))]))
        est = discrete_cheeger(mesh, cells)
        ref = oracles.brute_cheeger(sorted(set(cells)), cg.interface,
                                    dict(enumerate(cg.areas)))
        assert est.method == "exact"
        assert abs(est.value - ref) <= 1e-12, f"cells={sorted(cells)}"
        checked += 1
    dt = time.perf_counter() - t0
    print(f"criterion 4: {checked} subdomains matched to 1e-12 in {dt:.1f}s")
    assert dt < 60.0


def test_criterion_05_certificate_consistency():
    t0 = time.perf_counter()
    asserted = 0
    reported = 0
    for g in (2, 3, 4):
        surf = surface_of_genus(g)
        coarse = coarse_mesh(surf)
        fine = triangulate(surf, h_max=0.35)
        pair = assemble_fem(fine)
        top = math.ceil(2 * g)
        spec = lowest_eigs(pair, top + 1)
        for eps in (0.5, 1.0, 2.0):
            cert = certify_lower_bound(coarse, eps)
            lam = float(spec.values[cert.target_index])
            assert cert.lower_bound <= 1.05 * lam
            exact_vals = [p.cheeger_value for p in cert.pieces
                          if p.cheeger_method == "exact"]
            if exact_vals:
                bound = min(exact_vals) ** 2 / 4.0
                ok = bound <= 1.05 * lam
                print(f"criterion 5 g={g} eps={eps}: exact bound {bound:.5f} "
                      f"vs 1.05*lambda_{cert.target_index} {1.05 * lam:.5f}")
                assert ok
                asserted += 1
            else:
                print(f"criterion 5 g={g} eps={eps}: sweep-only certificate, "
                      f"bound {cert.lower_bound:.5f} <= 1.05*lambda_"
                      f"{cert.target_index} {1.05 * float(spec.values[cert.target_index]):.5f} (reported)")
                reported += 1
    dt = time.perf_counter() - t0
    print(f"criterion 5: {asserted} asserted, {reported} reported in {dt:.1f}s")
    assert asserted >= 3
    assert dt < 600.0


def test_criterion_06_sharpness_scaling():
    t0 = time.perf_counter()
    rep = verify_sharpness((2, 3, 4, 5), 2, h_max=0.35)
    for row in rep.rows:
        print(f"criterion 6 k={row.k}: upper {row.upper:.6f} lambda1 {row.lam:.6f}")
        assert row.lam <= row.upper * 1.02
    print(f"criterion 6: fit exponent {rep.fit_upper_exponent:.3f}")
    assert rep.fit_upper_exponent <= -1.7
    dt = time.perf_counter() - t0
    print(f"criterion 6 total {dt:.1f}s")
    assert dt < 900.0


def test_criterion_07_test_function_scaling():
    t0 = time.perf_counter()
    ks = (1, 2, 3, 4, 5)
    masses = []
    energies = []
    for k in ks:
        mesh = triangulate(build_block_ring(k, 1), h_max=0.5)
        pair = assemble_fem(mesh)
        f = staircase_function(mesh, k, 1, 0)
        masses.append(float(f @ (pair.mass * f)))
        energies.append(float(f @ (pair.stiffness @ f)))
    fit_m = float(np.polyfit(np.log(ks), np.log(masses), 1)[0])
    fit_s = float(np.polyfit(np.log(ks), np.log(energies), 1)[0])
    dt = time.perf_counter() - t0
    print(f"criterion 7: mass exponent {fit_m:.3f} energy exponent {fit_s:.3f} "
          f"in {dt:.1f}s")
    assert fit_m >= 2.7
    assert fit_s <= 1.3
    assert dt < 300.0


def test_criterion_08_genus_formula():
    t0 = time.perf_counter()
    for k in range(1, 6):
        for l in range(1, 5):
            surf = build_block_ring(k, l)
            assert surf.genus == k * l + 1
            mesh = coarse_mesh(surf)
            chi = mesh.n_vertices - mesh.n_edges + mesh.n_triangles
            assert chi == 2 - 2 * (k * l + 1)
    dt = time.perf_counter() - t0
    print(f"criterion 8: 20 surfaces in {dt:.2f}s")
    assert dt < 5.0


def test_criterion_09_eigensolver_oracle():
    t0 = time.perf_counter()
    cases = [
        triangulate(surface_of_genus(2), h_max=0.35),
        triangulate(surface_of_genus(3), h_max=0.5),
    ]
    for mesh in cases:
        assert mesh.n_vertices <= 3000
        pair = assemble_fem(mesh)
        spec = lowest_eigs(pair, 6, tol=1e-10)
        ref = oracles.dense_eigs(pair, 6)
        scale = float(np.max(np.abs(ref)))
        worst = float(np.max(np.abs(spec.values[1:6] - ref[1:6])) / scale)
        print(f"criterion 9 n={pair.n}: worst relative gap {worst:.3e}")
        assert worst <= 1e-8
    dt = time.perf_counter() - t0
    print(f"criterion 9 total {dt:.1f}s")
    assert dt < 60.0


def test_criterion_10_deterministic_outputs(tmp_path):
    spec_path = tmp_path / "g2.json"
    spec_path.write_text(json.dumps(G2_SPEC))

    cert_blobs = []
    for tag in ("a", "b"):
        out = tmp_path / f"cert_{tag}.json"
        rc = cli.main(["certify", str(spec_path), "--epsilon", "1",
                       "--seed", "0", "--out", str(out)])
        assert rc == 0
        cert_blobs.append(out.read_bytes())
    assert cert_blobs[0] == cert_blobs[1]

    sharp_blobs = []
    for tag in ("a", "b"):
        prefix = str(tmp_path / f"sharp_{tag}")
        rc = cli.main(["sharpness", "--k", "1,2,3", "--l", "2",
                       "--h-max", "0.7", "--seed", "0", "--out", prefix])
        assert rc == 0
        sharp_blobs.append(tuple(open(prefix + ext, "rb").read()
                                 for ext in (".json", ".tsv", ".png")))
    assert sharp_blobs[0] == sharp_blobs[1]
    print("criterion 10: certify and sharpness outputs byte-identical across runs")
