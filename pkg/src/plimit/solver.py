"""Discrete energy assembly and constrained minimization on P1 triangles.

The potential is piecewise linear, so its gradient is constant per triangle
and one centroid sample evaluates the energy integrand exactly in E; spatial
weights are sampled at centroids.  The normalized functional is

    G(v) = lam**(-normalize_p) * sum_T area_T * Q_region(c_T, lam*|grad v|_T),

which for lam = 1, normalize_p = 0 is the plain Dirichlet energy.  Minimizers
are computed by damped Newton on the reduced unknowns: Dirichlet nodes are
eliminated, ``tied_constant`` collapses each A component (interface included)
to a single unknown, ``prescribed`` fixes interface nodes, ``natural``/
``none`` leave them free.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .energy import EnergyDensity
from .errors import ParameterError, ShapeError, TagError
from .expressions import as_point_function
from .geometry import (
    Mesh2D,
    RegionMap,
    REGION_A,
    REGION_B,
    TAG_INNER,
    TAG_INTERFACE,
    TAG_OUTER,
    boundary_edge_lengths,
    boundary_nodes,
    interface_edges,
)

logger = logging.getLogger("plimit")


@dataclass
class DiscreteField:
    """Nodal scalar potential on a mesh."""

    values: np.ndarray
    mesh: Mesh2D

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.mesh.n_nodes,):
            raise ShapeError(
                f"field has {self.values.shape} values for {self.mesh.n_nodes} nodes"
            )
        if not np.all(np.isfinite(self.values)):
            raise ShapeError("field contains non-finite values")


def field_values(f) -> np.ndarray:
    return f.values if isinstance(f, DiscreteField) else np.asarray(f, dtype=float)


@dataclass
class SolveSettings:
    grad_tol: float | None = None     # absolute; default 1e-10 * (1 + initial residual)
    max_iter: int = 80
    eps_reg: float = 1e-10
    armijo_c: float = 1e-4
    armijo_shrink: float = 0.5
    hessian_floor: float = 1e-12

    def __post_init__(self):
        if self.grad_tol is not None and self.grad_tol <= 0:
            raise ParameterError("grad_tol must be positive")
        if self.max_iter <= 0 or self.eps_reg <= 0 or self.hessian_floor <= 0:
            raise ParameterError("max_iter, eps_reg and hessian_floor must be positive")
        if not (0 < self.armijo_c <= 0.5):
            raise ParameterError("armijo_c must lie in (0, 1/2]")
        if not (0 < self.armijo_shrink < 1):
            raise ParameterError("armijo_shrink must lie in (0, 1)")


@dataclass
class BoundaryCondition:
    """Dirichlet data on the outer boundary plus the inner-interface mode."""

    outer: object                      # constant | expression text | callable(points) | nodal array
    inner_mode: str = "none"           # none | natural | tied_constant | prescribed
    inner_values: object = None        # prescribed mode: same forms, or array over interface nodes
    zero_mean: bool = False

    def __post_init__(self):
        if self.inner_mode not in ("none", "natural", "tied_constant", "prescribed"):
            raise ParameterError(f"unknown inner mode {self.inner_mode!r}")
        if self.inner_mode == "prescribed" and self.inner_values is None:
            raise ParameterError("prescribed mode needs inner_values")


@dataclass
class SolveResult:
    field: DiscreteField
    energy: float
    element_grad_mag: np.ndarray
    iterations: int
    final_residual: float
    converged: bool
    diagnostics: dict = field(default_factory=dict)


# -- P1 element data ---------------------------------------------------------


class _P1:
    def __init__(self, mesh: Mesh2D):
        tris = mesh.triangles
        p = mesh.nodes[tris]
        xs, ys = p[..., 0], p[..., 1]
        det = (xs[:, 1] - xs[:, 0]) * (ys[:, 2] - ys[:, 0]) - (xs[:, 2] - xs[:, 0]) * (
            ys[:, 1] - ys[:, 0]
        )
        self.area = 0.5 * det
        grads = np.empty((tris.shape[0], 3, 2))
        for i, (j, k) in enumerate(((1, 2), (2, 0), (0, 1))):
            grads[:, i, 0] = (ys[:, j] - ys[:, k]) / det
            grads[:, i, 1] = (xs[:, k] - xs[:, j]) / det
        self.grads = grads
        self.centroids = p.mean(axis=1)
        self.tris = tris

    def field_grad(self, values: np.ndarray) -> np.ndarray:
        return np.einsum("ti,tid->td", values[self.tris], self.grads)


def _p1(mesh: Mesh2D) -> _P1:
    cache = mesh.__dict__.get("_p1_cache")
    if cache is None:
        cache = _P1(mesh)
        mesh.__dict__["_p1_cache"] = cache
    return cache


def element_gradient_magnitude(mesh: Mesh2D, values) -> np.ndarray:
    u = _p1(mesh).field_grad(field_values(values))
    return np.sqrt((u**2).sum(axis=1))


def _region_masks(mesh: Mesh2D, regions: RegionMap | None):
    t = mesh.n_triangles
    if regions is None:
        return np.ones(t, dtype=bool), np.zeros(t, dtype=bool)
    return regions.element_region == REGION_B, regions.element_region == REGION_A


def _check_field(mesh: Mesh2D, values) -> np.ndarray:
    v = field_values(values)
    if v.shape != (mesh.n_nodes,):
        raise ShapeError(f"field length {v.shape} does not match {mesh.n_nodes} nodes")
    return v


# -- energy / gradient / Hessian ---------------------------------------------


def assemble_energy(mesh, regions, energy_b: EnergyDensity, energy_a: EnergyDensity | None,
                    values, lam: float = 1.0, normalize_p: float = 0.0) -> float:
    """Value of the normalized functional at a nodal field."""
    if lam <= 0:
        raise ParameterError("lambda must be positive")
    v = _check_field(mesh, values)
    p1 = _p1(mesh)
    g = np.sqrt((p1.field_grad(v) ** 2).sum(axis=1))
    mask_b, mask_a = _region_masks(mesh, regions)
    total = 0.0
    for mask, density in ((mask_b, energy_b), (mask_a, energy_a)):
        if density is None or not mask.any():
            continue
        q = density.q(p1.centroids[mask], lam * g[mask])
        total += float((p1.area[mask] * q).sum())
    return lam ** (-normalize_p) * total


def assemble_gradient(mesh, regions, energy_b, energy_a, values, lam: float = 1.0,
                      normalize_p: float = 0.0, eps_reg: float = 1e-10) -> np.ndarray:
    """Exact nodal gradient of the discrete functional.

    Per element the contribution is
    lam**(1-normalize_p) * area * J(c, lam*g) * (grad v . grad phi_i) / g_reg
    with g_reg = sqrt(g**2 + eps_reg**2) regularizing the denominator.
    """
    v = _check_field(mesh, values)
    p1 = _p1(mesh)
    u = p1.field_grad(v)
    g = np.sqrt((u**2).sum(axis=1))
    greg = np.sqrt(g**2 + eps_reg**2)
    mask_b, mask_a = _region_masks(mesh, regions)
    out = np.zeros(mesh.n_nodes)
    for mask, density in ((mask_b, energy_b), (mask_a, energy_a)):
        if density is None or not mask.any():
            continue
        j = density.j(p1.centroids[mask], lam * g[mask])
        coeff = lam ** (1.0 - normalize_p) * p1.area[mask] * j / greg[mask]
        s = np.einsum("td,tid->ti", u[mask], p1.grads[mask])
        np.add.at(out, p1.tris[mask].ravel(), (coeff[:, None] * s).ravel())
    return out


def _assemble_hessian(mesh, regions, energy_b, energy_a, values, lam, normalize_p, eps_reg):
    """Hessian of the regularized energy (J, J' at lam*g_reg); PSD by convexity."""
    v = _check_field(mesh, values)
    p1 = _p1(mesh)
    u = p1.field_grad(v)
    greg = np.sqrt((u**2).sum(axis=1) + eps_reg**2)
    mask_b, mask_a = _region_masks(mesh, regions)
    rows, cols, vals = [], [], []
    for mask, density in ((mask_b, energy_b), (mask_a, energy_a)):
        if density is None or not mask.any():
            continue
        cts = p1.centroids[mask]
        gr = greg[mask]
        j = density.j(cts, lam * gr)
        jp = density.j_prime(cts, lam * gr)
        area = p1.area[mask]
        c_rank1 = lam ** (2.0 - normalize_p) * area * jp - lam ** (1.0 - normalize_p) * area * j / gr
        c_metric = lam ** (1.0 - normalize_p) * area * j / gr
        s = np.einsum("td,tid->ti", u[mask], p1.grads[mask]) / gr[:, None]
        m = np.einsum("tid,tjd->tij", p1.grads[mask], p1.grads[mask])
        h = c_rank1[:, None, None] * (s[:, :, None] * s[:, None, :]) + c_metric[:, None, None] * m
        tri = p1.tris[mask]
        rows.append(np.repeat(tri, 3, axis=1).ravel())
        cols.append(np.tile(tri, (1, 3)).ravel())
        vals.append(h.ravel())
    n = mesh.n_nodes
    if not rows:
        return sp.csr_matrix((n, n))
    return sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    ).tocsr()


def laplace_stiffness(mesh: Mesh2D) -> sp.csr_matrix:
    """Standard P1 stiffness K_ij = sum_T area * grad phi_i . grad phi_j."""
    p1 = _p1(mesh)
    m = np.einsum("tid,tjd->tij", p1.grads, p1.grads) * p1.area[:, None, None]
    rows = np.repeat(p1.tris, 3, axis=1).ravel()
    cols = np.tile(p1.tris, (1, 3)).ravel()
    n = mesh.n_nodes
    return sp.coo_matrix((m.ravel(), (rows, cols)), shape=(n, n)).tocsr()


# -- boundary data and constraints --------------------------------------------


def outer_boundary_nodes(mesh: Mesh2D) -> np.ndarray:
    loops = boundary_nodes(mesh, TAG_OUTER)
    return np.unique(np.concatenate(loops))


def interface_nodes(mesh: Mesh2D, regions: RegionMap | None) -> np.ndarray:
    """Nodes on the A|B interface (or on an inner/interface-tagged boundary)."""
    if regions is not None:
        edges = interface_edges(mesh, regions)
        if edges.size:
            return np.unique(edges)
    for tag in (TAG_INNER, TAG_INTERFACE):
        try:
            loops = boundary_nodes(mesh, tag)
            return np.unique(np.concatenate(loops))
        except TagError:
            continue
    return np.array([], dtype=np.int64)


def _values_on_nodes(spec, mesh: Mesh2D, nodes: np.ndarray) -> np.ndarray:
    if isinstance(spec, DiscreteField):
        spec = spec.values
    if isinstance(spec, (np.ndarray, list, tuple)):
        arr = np.asarray(spec, dtype=float)
        if arr.shape == (mesh.n_nodes,):
            return arr[nodes]
        if arr.shape == (nodes.size,):
            return arr.copy()
        raise ShapeError(
            f"boundary values of shape {arr.shape} fit neither all {mesh.n_nodes} nodes "
            f"nor the {nodes.size} constrained nodes"
        )
    return as_point_function(spec)(mesh.nodes[nodes])


def boundary_mean(mesh: Mesh2D, tag: str, values) -> float:
    """Average of a nodal field against the discrete boundary arc measure."""
    v = field_values(values)
    edges, lengths = boundary_edge_lengths(mesh, tag)
    weighted = (lengths * 0.5 * (v[edges[:, 0]] + v[edges[:, 1]])).sum()
    return float(weighted / lengths.sum())


def check_zero_mean(mesh: Mesh2D, tag: str, values, rel_tol: float = 1e-8):
    v = field_values(values)
    mean = boundary_mean(mesh, tag, v)
    scale = float(np.max(np.abs(v))) + 1e-300
    if abs(mean) > rel_tol * scale:
        raise ParameterError(
            f"boundary data must have zero average against the arc measure: "
            f"mean {mean:.3e} exceeds {rel_tol:g} * max|f| = {rel_tol * scale:.3e}"
        )


class _Constraints:
    """Affine reduction v = R z + v0 implementing the BC modes."""

    def __init__(self, mesh: Mesh2D, regions: RegionMap | None, bc: BoundaryCondition,
                 fix_outer: bool = True):
        n = mesh.n_nodes
        fixed = np.zeros(n, dtype=bool)
        v0 = np.zeros(n)

        if fix_outer:
            outer = outer_boundary_nodes(mesh)
            outer_vals = _values_on_nodes(bc.outer, mesh, outer)
            if bc.zero_mean:
                full = np.zeros(n)
                full[outer] = outer_vals
                check_zero_mean(mesh, TAG_OUTER, full)
            fixed[outer] = True
            v0[outer] = outer_vals

        group_of = -np.ones(n, dtype=np.int64)  # tied-group id per node
        n_groups = 0
        if bc.inner_mode == "prescribed":
            iface = interface_nodes(mesh, regions)
            if iface.size == 0:
                raise ParameterError("prescribed mode needs an interface, none found")
            fixed[iface] = True
            v0[iface] = _values_on_nodes(bc.inner_values, mesh, iface)
        elif bc.inner_mode == "tied_constant":
            if regions is None:
                iface = interface_nodes(mesh, regions)
                if iface.size == 0:
                    raise ParameterError("tied_constant mode needs A components or an inner boundary")
                group_of[iface] = 0
                n_groups = 1
            else:
                mask_a = regions.element_region == REGION_A
                for comp in range(regions.n_components):
                    tris = mesh.triangles[mask_a & (regions.component_of_A == comp)]
                    group_of[np.unique(tris)] = comp
                n_groups = regions.n_components
        if np.any(fixed & (group_of >= 0)):
            raise ParameterError("a tied node is also Dirichlet-fixed; A must be interior")

        free = ~fixed & (group_of < 0)
        n_free = int(free.sum())
        cols = -np.ones(n, dtype=np.int64)
        cols[free] = np.arange(n_free)
        cols[group_of >= 0] = n_free + group_of[group_of >= 0]
        self.n_unknowns = n_free + n_groups
        keep = cols >= 0
        self.R = sp.csr_matrix(
            (np.ones(int(keep.sum())), (np.where(keep)[0], cols[keep])),
            shape=(n, self.n_unknowns),
        )
        self.v0 = v0
        self.col_multiplicity = np.asarray(self.R.sum(axis=0)).ravel()
        self.tied_group_cols = np.arange(n_free, n_free + n_groups)

    def expand(self, z: np.ndarray) -> np.ndarray:
        return self.R @ z + self.v0

    def reduce_field(self, values: np.ndarray) -> np.ndarray:
        # group-averaged projection onto the constraint set
        return (self.R.T @ (values - self.v0)) / self.col_multiplicity


def _linear_solve(mat: sp.spmatrix, rhs: np.ndarray) -> np.ndarray:
    return spla.splu(mat.tocsc()).solve(rhs)


def _linear_warm_start(mesh, cons: _Constraints) -> np.ndarray:
    k = laplace_stiffness(mesh)
    k_red = (cons.R.T @ k @ cons.R).tocsc()
    k_red = k_red + 1e-14 * sp.eye(cons.n_unknowns, format="csc")
    rhs = -cons.R.T @ (k @ cons.v0)
    try:
        return _linear_solve(k_red, rhs)
    except RuntimeError:
        return np.zeros(cons.n_unknowns)


def _newton(mesh, regions, energy_b, energy_a, cons: _Constraints, lam, normalize_p,
            settings: SolveSettings, initial=None) -> SolveResult:
    if initial is None:
        z = _linear_warm_start(mesh, cons)
    else:
        z = cons.reduce_field(_check_field(mesh, field_values(initial)))

    def energy_of(zz):
        return assemble_energy(mesh, regions, energy_b, energy_a, cons.expand(zz), lam, normalize_p)

    def grad_of(zz):
        g = assemble_gradient(
            mesh, regions, energy_b, energy_a, cons.expand(zz), lam, normalize_p, settings.eps_reg
        )
        return cons.R.T @ g

    e = energy_of(z)
    g = grad_of(z)
    res0 = float(np.max(np.abs(g))) if g.size else 0.0
    if settings.grad_tol is not None:
        tol = settings.grad_tol
    else:
        # scale-free stopping: the reference scale is the residual of the
        # zero-extended boundary data, not of the (possibly converged) warm start
        g_ref = cons.R.T @ assemble_gradient(
            mesh, regions, energy_b, energy_a, cons.v0, lam, normalize_p, settings.eps_reg
        )
        scale = float(np.max(np.abs(g_ref))) if g_ref.size else 0.0
        tol = 1e-10 * (max(res0, scale) + 1.0)

    iterations = 0
    fallbacks = 0
    stalled = 0
    energy_stationary = False
    last_decrease = 0.0
    res = res0
    converged = res0 <= tol
    while not converged and iterations < settings.max_iter:
        iterations += 1
        h = _assemble_hessian(
            mesh, regions, energy_b, energy_a, cons.expand(z), lam, normalize_p, settings.eps_reg
        )
        h_red = (cons.R.T @ h @ cons.R).tocsc()
        shift = settings.hessian_floor * (1.0 + float(np.abs(h_red.diagonal()).max(initial=0.0)))
        h_red = h_red + shift * sp.eye(cons.n_unknowns, format="csc")
        try:
            d = _linear_solve(h_red, -g)
            if not np.all(np.isfinite(d)) or float(g @ d) >= 0.0:
                raise RuntimeError("Newton step is not a descent direction")
        except RuntimeError:
            d = -g
            fallbacks += 1
        slope = float(g @ d)
        t, accepted = 1.0, False
        for _ in range(60):
            if energy_of(z + t * d) <= e + settings.armijo_c * t * slope:
                accepted = True
                break
            t *= settings.armijo_shrink
        if not accepted:
            logger.debug("line search stalled at iteration %d (res=%.3e)", iterations, res)
            break
        z = z + t * d
        e_new = energy_of(z)
        g = grad_of(z)
        res = float(np.max(np.abs(g))) if g.size else 0.0
        converged = res <= tol
        # densities with derivative jumps pin elements at the kink field value;
        # the single-valued residual then stalls while the minimum is attained
        last_decrease = e - e_new
        if last_decrease <= 1e-13 * (abs(e) + 1.0):
            stalled += 1
            if stalled >= 3:
                energy_stationary = True
                e = e_new
                break
        else:
            stalled = 0
        e = e_new

    values = cons.expand(z)
    if not converged:
        level = logging.INFO if energy_stationary else logging.WARNING
        logger.log(
            level,
            "minimize stopped at residual %.3e (tol %.3e) after %d iterations%s",
            res, tol, iterations,
            "; energy stationary (density kink pinning)" if energy_stationary else "",
        )
    return SolveResult(
        field=DiscreteField(values=values, mesh=mesh),
        energy=e,
        element_grad_mag=element_gradient_magnitude(mesh, values),
        iterations=iterations,
        final_residual=res,
        converged=bool(converged),
        diagnostics={"grad_tol": tol, "initial_residual": res0, "gradient_fallbacks": fallbacks,
                     "unknowns": cons.n_unknowns, "energy_stationary": energy_stationary,
                     "final_energy_decrease": last_decrease},
    )


def minimize(mesh, regions, energy_b, energy_a, bc: BoundaryCondition, lam: float = 1.0,
             normalize_p: float = 0.0, settings: SolveSettings | None = None,
             initial=None) -> SolveResult:
    """Damped-Newton minimizer of the normalized discrete functional."""
    settings = settings or SolveSettings()
    cons = _Constraints(mesh, regions, bc)
    return _newton(mesh, regions, energy_b, energy_a, cons, lam, normalize_p, settings, initial)


# -- limit-problem solvers -----------------------------------------------------


def solve_limit_B_pei(mesh_b: Mesh2D, beta, p: float, f, settings=None) -> SolveResult:
    """Weighted p-Dirichlet minimizer on the outer-phase submesh with natural
    (insulating) interface: Dirichlet data only on the outer boundary."""
    from .energy import power_law

    bc = BoundaryCondition(outer=f, inner_mode="natural")
    return minimize(mesh_b, None, power_law(beta, p), None, bc, settings=settings)


def solve_limit_A_inner(mesh_a: Mesh2D, alpha, q: float, interface_trace, settings=None) -> SolveResult:
    """Weighted q-Dirichlet minimizer on the inner phase with a prescribed
    trace on its whole (interface) boundary."""
    from .energy import power_law

    nodes = interface_nodes(mesh_a, None)
    if nodes.size == 0:
        raise ParameterError("inner submesh has no interface-tagged boundary")
    settings = settings or SolveSettings()
    cons = _PrescribedOnly(mesh_a, nodes, interface_trace)
    return _newton(mesh_a, None, power_law(alpha, q), None, cons, 1.0, 0.0, settings)


class _PrescribedOnly(_Constraints):
    """Constraint set fixing one node list; the A submesh has no outer tag."""

    def __init__(self, mesh: Mesh2D, nodes: np.ndarray, values):
        n = mesh.n_nodes
        fixed = np.zeros(n, dtype=bool)
        v0 = np.zeros(n)
        fixed[nodes] = True
        v0[nodes] = _values_on_nodes(values, mesh, nodes)
        free = ~fixed
        n_free = int(free.sum())
        cols = -np.ones(n, dtype=np.int64)
        cols[free] = np.arange(n_free)
        self.n_unknowns = n_free
        keep = cols >= 0
        self.R = sp.csr_matrix(
            (np.ones(int(keep.sum())), (np.where(keep)[0], cols[keep])), shape=(n, n_free)
        )
        self.v0 = v0
        self.col_multiplicity = np.asarray(self.R.sum(axis=0)).ravel()
        self.tied_group_cols = np.arange(0)


def solve_limit_pec(mesh: Mesh2D, regions: RegionMap, beta, p: float, f,
                    settings=None, zero_mean: bool = True) -> SolveResult:
    """Outer-phase p-Dirichlet minimizer over fields constant on each inner
    component; the constants are part of the solve and fill phase A."""
    from .energy import power_law

    bc = BoundaryCondition(outer=f, inner_mode="tied_constant", zero_mean=zero_mean)
    return minimize(mesh, regions, power_law(beta, p), None, bc, settings=settings)


def tied_constants(result: SolveResult, mesh: Mesh2D, regions: RegionMap) -> np.ndarray:
    """The per-component constants of a tied solve."""
    vals = result.field.values
    out = []
    mask_a = regions.element_region == REGION_A
    for comp in range(regions.n_components):
        tris = mesh.triangles[mask_a & (regions.component_of_A == comp)]
        out.append(float(vals[np.unique(tris)].mean()))
    return np.asarray(out)


# -- norms and traces ----------------------------------------------------------


@dataclass
class WpDistance:
    l_p_part: float
    grad_part: float
    total: float


def wp_distance(f1, f2, p: float, mesh: Mesh2D, regions: RegionMap | None = None,
                which: str | None = None) -> WpDistance:
    """Discrete W^{1,p}-style distance on a region subset (triangle means for
    the L^p part, elementwise P1 gradients for the seminorm)."""
    v1, v2 = field_values(f1), field_values(f2)
    if v1.shape != v2.shape or v1.shape != (mesh.n_nodes,):
        raise ShapeError("fields must live on the same mesh")
    diff = v1 - v2
    p1 = _p1(mesh)
    if which is None or regions is None:
        mask = np.ones(mesh.n_triangles, dtype=bool)
    else:
        code = REGION_A if which == "A" else REGION_B
        mask = regions.element_region == code
    means = np.abs(diff[p1.tris[mask]].mean(axis=1))
    grads = np.sqrt((p1.field_grad(diff)[mask] ** 2).sum(axis=1))
    area = p1.area[mask]
    lp = float((area * means**p).sum() ** (1.0 / p))
    gp = float((area * grads**p).sum() ** (1.0 / p))
    return WpDistance(l_p_part=lp, grad_part=gp, total=lp + gp)


def wp_error_vs_exact(field, exact_at_nodes, exact_grad_fn, p: float, mesh: Mesh2D,
                      regions: RegionMap | None = None, which: str | None = None) -> WpDistance:
    """Discretization error of a P1 field against a closed-form solution.

    The gradient part compares elementwise P1 gradients to the analytic
    gradient at centroids (comparing against the nodal interpolant instead
    would hide the mesh error, since both superconverge together).
    """
    v = _check_field(mesh, field)
    exact = _check_field(mesh, exact_at_nodes)
    p1 = _p1(mesh)
    if which is None or regions is None:
        mask = np.ones(mesh.n_triangles, dtype=bool)
    else:
        code = REGION_A if which == "A" else REGION_B
        mask = regions.element_region == code
    diff = v - exact
    means = np.abs(diff[p1.tris[mask]].mean(axis=1))
    ggap = p1.field_grad(v)[mask] - np.asarray(exact_grad_fn(p1.centroids[mask]), dtype=float)
    grads = np.sqrt((ggap**2).sum(axis=1))
    area = p1.area[mask]
    lp = float((area * means**p).sum() ** (1.0 / p))
    gp = float((area * grads**p).sum() ** (1.0 / p))
    return WpDistance(l_p_part=lp, grad_part=gp, total=lp + gp)


def trace_on(mesh: Mesh2D, tag: str, values) -> list:
    """Nodal trace along each boundary loop of a tag, with arc length."""
    v = field_values(values)
    loops = boundary_nodes(mesh, tag)
    out = []
    for loop in loops:
        pts = mesh.nodes[loop]
        seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
        arclength = np.concatenate([[0.0], np.cumsum(seg)])
        out.append({"nodes": loop, "arclength": arclength, "values": v[loop]})
    return out


def trace_l2_gap(mesh: Mesh2D, tag: str, f1, f2) -> float:
    """Edge-length weighted L2 distance of two traces on a tagged boundary."""
    v = field_values(f1) - field_values(f2)
    edges, lengths = boundary_edge_lengths(mesh, tag)
    sq = 0.5 * (v[edges[:, 0]] ** 2 + v[edges[:, 1]] ** 2)
    return float(np.sqrt((lengths * sq).sum()))
