"""Shared fixtures: the heavy annulus solves are session-scoped so the
acceptance criteria reuse one another's fields."""

import time

import numpy as np
import pytest

from plimit.energy import power_law
from plimit.geometry import DomainSpec, build_domain, extract_submesh
from plimit.limit_lab import compute_limit_bundle, run_lambda_sweep
from plimit.solver import solve_limit_B_pei, solve_limit_pec, wp_error_vs_exact

R_OUTER = 10.0
GAMMA = 7.0 + 12.0 / R_OUTER**2
F_EXPR = f"{GAMMA!r} * x1"
LAMBDAS = [1.0, 10.0, 100.0, 1000.0, 10000.0]

# closed-form annulus fields, derived by hand from the harmonic ansatz
K_PEC = (7.0 * R_OUTER**2 + 12.0) / (R_OUTER**2 - 1.0)
A_PEI = GAMMA * R_OUTER**2 / (R_OUTER**2 + 1.0)


def pec_exact(points):
    pts = np.atleast_2d(points)
    rho2 = (pts**2).sum(axis=1)
    s = 1.0 / np.maximum(rho2, 1e-300)
    return np.where(rho2 >= 1.0, K_PEC * (1.0 - s) * pts[:, 0], 0.0)


def pec_exact_grad(points):
    pts = np.atleast_2d(points)
    rho2 = (pts**2).sum(axis=1)
    s = 1.0 / np.maximum(rho2, 1e-300)
    gx = K_PEC * (1.0 - s + 2.0 * pts[:, 0] ** 2 * s**2)
    gy = 2.0 * K_PEC * pts[:, 0] * pts[:, 1] * s**2
    out = np.stack([gx, gy], axis=1)
    out[rho2 < 1.0] = 0.0
    return out


def pei_exact(points):
    pts = np.atleast_2d(points)
    s = 1.0 / (pts**2).sum(axis=1)
    return A_PEI * (1.0 + s) * pts[:, 0]


def pei_exact_grad(points):
    pts = np.atleast_2d(points)
    s = 1.0 / (pts**2).sum(axis=1)
    gx = A_PEI * (1.0 + s - 2.0 * pts[:, 0] ** 2 * s**2)
    gy = -2.0 * A_PEI * pts[:, 0] * pts[:, 1] * s**2
    return np.stack([gx, gy], axis=1)


@pytest.fixture(scope="session")
def annulus_coarse():
    return build_domain(DomainSpec(shape="annulus", r_outer=R_OUTER, n_radial=12))


@pytest.fixture(scope="session")
def annulus_base():
    """The acceptance mesh: about twenty thousand triangles."""
    return build_domain(DomainSpec(shape="annulus", r_outer=R_OUTER, n_radial=37))


@pytest.fixture(scope="session")
def annulus_refined():
    return build_domain(DomainSpec(shape="annulus", r_outer=R_OUTER, n_radial=74))


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@pytest.fixture(scope="session")
def pec_solves(annulus_base, annulus_refined):
    """Conducting-limit solves on the base and refined meshes, with timings
    and the oracle-measured discretization floor on the base mesh."""
    out = {}
    for name, (mesh, regions) in (("base", annulus_base), ("refined", annulus_refined)):
        res, seconds = _timed(solve_limit_pec, mesh, regions, 1.0, 2.0, F_EXPR)
        exact = pec_exact(mesh.nodes)
        rel = float(np.linalg.norm(res.field.values - exact) / np.linalg.norm(exact))
        out[name] = {"result": res, "rel_l2": rel, "seconds": seconds,
                     "mesh": mesh, "regions": regions}
    base = out["base"]
    out["floor"] = wp_error_vs_exact(
        base["result"].field, pec_exact(base["mesh"].nodes), pec_exact_grad, 2.0, base["mesh"]
    )
    return out


@pytest.fixture(scope="session")
def pei_solves(annulus_base, annulus_refined):
    out = {}
    for name, (mesh, regions) in (("base", annulus_base), ("refined", annulus_refined)):
        mesh_b, map_b = extract_submesh(mesh, regions, "B")
        res, seconds = _timed(solve_limit_B_pei, mesh_b, 1.0, 2.0, F_EXPR)
        exact = pei_exact(mesh_b.nodes)
        rel = float(np.linalg.norm(res.field.values - exact) / np.linalg.norm(exact))
        out[name] = {"result": res, "rel_l2": rel, "seconds": seconds,
                     "mesh_b": mesh_b, "map_b": map_b}
    base = out["base"]
    out["floor"] = wp_error_vs_exact(
        base["result"].field, pei_exact(base["mesh_b"].nodes), pei_exact_grad, 2.0, base["mesh_b"]
    )
    return out


def _sweep(mesh, regions, p, q):
    bundle = compute_limit_bundle(mesh, regions, 1.0, 1.0, p, q, F_EXPR)
    records = run_lambda_sweep(
        mesh, regions, power_law(1.0, p), power_law(1.0, q), p, q, F_EXPR,
        LAMBDAS, bundle,
    )
    return {"bundle": bundle, "records": records}


@pytest.fixture(scope="session")
def sweep_p2q3(annulus_base):
    mesh, regions = annulus_base
    out, seconds = _timed(_sweep, mesh, regions, 2.0, 3.0)
    out["seconds"] = seconds
    return out


@pytest.fixture(scope="session")
def sweep_p2q15(annulus_base):
    mesh, regions = annulus_base
    out, seconds = _timed(_sweep, mesh, regions, 2.0, 1.5)
    out["seconds"] = seconds
    return out


@pytest.fixture(scope="session")
def counterexample_report():
    from plimit.limit_lab import run_counterexample

    report, seconds = _timed(
        run_counterexample, big_l=11.0, lambda2_1=1.0, r=10.0, n_max=3, n_radial=37,
    )
    return {"report": report, "seconds": seconds}
