"""Figure rendering for experiment outputs.

Every report path writes PNG figures next to its delimited output.  Figures
are presentation artifacts only: no check consumes them.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

from .geometry import Mesh2D, RegionMap, REGION_A

plt.rcParams.update({
    "figure.figsize": (6.4, 4.4),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "savefig.dpi": 160,
    "savefig.bbox": "tight",
})


def _triangulation(mesh: Mesh2D) -> mtri.Triangulation:
    return mtri.Triangulation(mesh.nodes[:, 0], mesh.nodes[:, 1], mesh.triangles)


def figure_mesh(mesh: Mesh2D, regions: RegionMap, path):
    fig, ax = plt.subplots(figsize=(5.2, 5.2))
    tri = _triangulation(mesh)
    colors = (regions.element_region == REGION_A).astype(float)
    ax.tripcolor(tri, facecolors=colors, cmap="coolwarm", alpha=0.5, edgecolors="none")
    if mesh.n_triangles <= 30000:
        ax.triplot(tri, color="k", lw=0.15, alpha=0.6)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(f"{mesh.n_triangles} triangles (inner phase shaded)")
    fig.savefig(path)
    plt.close(fig)


def figure_field(mesh: Mesh2D, values: np.ndarray, path, title="potential"):
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    tri = _triangulation(mesh)
    im = ax.tricontourf(tri, np.asarray(values, float), levels=31, cmap="viridis")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_aspect("equal")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_title(title)
    fig.savefig(path)
    plt.close(fig)


def figure_sweep(records, path):
    lams = [r.lam for r in records]
    fig, axes = plt.subplots(1, 3, figsize=(12.0, 3.6))
    axes[0].semilogx(lams, [r.g_value for r in records], "o-")
    axes[0].set_xlabel("lambda")
    axes[0].set_ylabel("normalized energy")
    axes[1].loglog(lams, [r.dist_to_limit_B for r in records], "o-", label="outer distance")
    axes[1].loglog(lams, [max(r.dist_to_limit_A, 1e-300) for r in records], "s--",
                   label="inner distance")
    axes[1].loglog(lams, [max(r.trace_gap, 1e-300) for r in records], "^:",
                   label="trace gap")
    axes[1].set_xlabel("lambda")
    axes[1].set_ylabel("distance to limit")
    axes[1].legend(fontsize=8)
    axes[2].loglog(lams, [max(r.max_grad_A, 1e-300) for r in records], "o-")
    axes[2].set_xlabel("lambda")
    axes[2].set_ylabel("max inner |grad|")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def figure_counterexample(report, path):
    fig, ax = plt.subplots()
    n1 = np.arange(1, len(report.g_at_lambda_prime) + 1)
    n2 = np.arange(1, len(report.g_at_lambda_second) + 1)
    ax.plot(n2, report.g_at_lambda_second, "s-", color="tab:red", label="G at lambda''_n")
    ax.plot(n1, report.g_at_lambda_prime, "o-", color="tab:blue", label="G at lambda'_n")
    if report.control_g_prime:
        ctrl = sorted(zip(
            list(n1) + list(n2),
            report.control_g_prime + report.control_g_second,
        ))
        ax.plot([c[0] for c in ctrl], [c[1] for c in ctrl], "x--", color="gray",
                alpha=0.7, label="control density")
    ax.axhline(report.l1, color="tab:blue", ls=":", label="l1")
    ax.axhline(report.l2, color="tab:red", ls=":", label="l2")
    ax.set_xlabel("window index n")
    ax.set_ylabel("normalized energy")
    ax.set_title(f"oscillation verdict: {report.verdict}")
    ax.legend(fontsize=8)
    fig.savefig(path)
    plt.close(fig)


def figure_psi(density, path, n_points=4000):
    spec = density.psi_spec
    e_hi = float(spec.lambda_second[-1]) * spec.big_l**2
    es = np.geomspace(max(spec.lambda2_1 * 1e-2, 1e-6), e_hi, n_points)
    pts = np.zeros((1, 2))
    ratio = np.array([float(density.q(pts, np.array([e]))[0]) / e**2 for e in es])
    fig, ax = plt.subplots()
    ax.semilogx(es, ratio, lw=1.2)
    for lam in spec.lambda_prime:
        ax.axvspan(lam, spec.big_l * lam, color="tab:blue", alpha=0.12)
    for lam in spec.lambda_second:
        ax.axvspan(lam, spec.big_l * lam, color="tab:red", alpha=0.12)
    ax.set_xlabel("field magnitude E")
    ax.set_ylabel("density / E^2")
    ax.set_ylim(1.8, 3.2)
    ax.set_title("oscillating density: plateaus at 2 and 3")
    fig.savefig(path)
    plt.close(fig)
