"""Triangulated two-phase domains: disk-with-core annulus, off-center
inclusions, squares with disk inclusions.

Meshes are structured: polar rings of crossed quads (4 triangles per quad,
apex at the quad centroid) with ring nodes placed exactly on the prescribed
circles.  The concentric generator forces rings at the interface radius, at
rho = 2 (the counterexample's integral split) and at the outer radius, and is
invariant under rotation by pi so odd boundary data yields exactly odd
discrete solutions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MeshError, ParameterError, RegionError, TagError

REGION_B = 0
REGION_A = 1
REGION_LETTERS = {REGION_B: "B", REGION_A: "A"}
REGION_CODES = {"B": REGION_B, "A": REGION_A}

TAG_OUTER = "outer"
TAG_INNER = "inner"
TAG_INTERFACE = "interface"


@dataclass
class Mesh2D:
    """Nodes, counterclockwise triangles and tagged topological boundary."""

    nodes: np.ndarray          # (N, 2) float
    triangles: np.ndarray      # (T, 3) int
    edge_nodes: np.ndarray     # (E, 2) int, topological boundary edges
    edge_tags: np.ndarray      # (E,) str

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=float)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        self.edge_nodes = np.ascontiguousarray(self.edge_nodes, dtype=np.int64)
        self.edge_tags = np.asarray(self.edge_tags, dtype=object)
        for arr in (self.nodes, self.triangles, self.edge_nodes):
            arr.setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        return 0.5 * (
            (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
            - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
        )

    def centroids(self) -> np.ndarray:
        return self.nodes[self.triangles].mean(axis=1)

    def max_edge_length(self) -> float:
        p = self.nodes[self.triangles]
        lengths = [
            np.linalg.norm(p[:, i] - p[:, j], axis=1) for i, j in ((0, 1), (1, 2), (2, 0))
        ]
        return float(np.max(lengths))

    def tags(self) -> set:
        return set(self.edge_tags.tolist())


@dataclass
class RegionMap:
    """Per-triangle phase labels and connected-component ids of phase A."""

    element_region: np.ndarray   # (T,) int8, REGION_A / REGION_B
    component_of_A: np.ndarray   # (T,) int, -1 on B triangles

    def __post_init__(self):
        self.element_region = np.asarray(self.element_region, dtype=np.int8)
        self.component_of_A = np.asarray(self.component_of_A, dtype=np.int64)

    @property
    def n_components(self) -> int:
        mask = self.element_region == REGION_A
        return int(self.component_of_A[mask].max() + 1) if mask.any() else 0

    def is_A(self) -> np.ndarray:
        return self.element_region == REGION_A

    def is_B(self) -> np.ndarray:
        return self.element_region == REGION_B


@dataclass
class DomainSpec:
    """Shape description consumed by build_domain."""

    shape: str                      # annulus | disk_with_inclusion | square_with_inclusions
    n_radial: int = 24
    r_outer: float = 10.0
    inclusion_center: tuple = (0.0, 0.0)
    inclusion_radius: float = 1.0
    half_width: float = 2.0         # square shape only
    inclusions: list = field(default_factory=list)  # [(cx, cy, r), ...] square shape

    def validate(self) -> list:
        problems = []
        if self.shape not in ("annulus", "disk_with_inclusion", "square_with_inclusions"):
            problems.append(f"unknown shape {self.shape!r}")
            return problems
        if self.n_radial < 4:
            problems.append(f"n_radial must be at least 4, got {self.n_radial}")
        if self.shape == "annulus":
            if self.r_outer <= 1.0:
                problems.append(f"annulus needs r_outer > 1, got {self.r_outer}")
        elif self.shape == "disk_with_inclusion":
            cx, cy = self.inclusion_center
            if self.inclusion_radius <= 0:
                problems.append("inclusion radius must be positive")
            if math.hypot(cx, cy) + self.inclusion_radius >= self.r_outer:
                problems.append("inclusion must be strictly interior to the disk")
        else:
            if not self.inclusions:
                problems.append("square_with_inclusions needs at least one inclusion")
            for cx, cy, r in self.inclusions:
                if r <= 0:
                    problems.append(f"inclusion radius must be positive, got {r}")
                if max(abs(cx), abs(cy)) + 1.4 * r >= self.half_width:
                    problems.append(
                        f"inclusion at ({cx}, {cy}) r={r} is not strictly interior"
                    )
            for i in range(len(self.inclusions)):
                for j in range(i + 1, len(self.inclusions)):
                    xi, yi, ri = self.inclusions[i]
                    xj, yj, rj = self.inclusions[j]
                    if math.hypot(xi - xj, yi - yj) <= 1.4 * (ri + rj):
                        problems.append(f"inclusions {i} and {j} are not disjoint enough")
        return problems


# -- incremental construction ----------------------------------------------


class _Builder:
    def __init__(self):
        self.nodes: list = []
        self.tris: list = []
        self.regions: list = []

    def add_node(self, x, y) -> int:
        self.nodes.append((float(x), float(y)))
        return len(self.nodes) - 1

    def add_ring_nodes(self, center, radius, angles) -> np.ndarray:
        cx, cy = center
        ids = np.arange(len(self.nodes), len(self.nodes) + len(angles))
        self.nodes.extend(
            (cx + radius * math.cos(a), cy + radius * math.sin(a)) for a in angles
        )
        return ids

    def add_tri(self, i, j, k, region):
        self.tris.append((int(i), int(j), int(k)))
        self.regions.append(region)

    def add_crossed_band(self, inner_ids, outer_ids, region, closed=True):
        """Quads between two equally-long node rings, each split into four
        triangles meeting at the quad centroid."""
        n = len(inner_ids)
        rng = range(n) if closed else range(n - 1)
        for j in rng:
            jn = (j + 1) % n
            quad = (int(inner_ids[j]), int(outer_ids[j]), int(outer_ids[jn]), int(inner_ids[jn]))
            xs = sum(self.nodes[q][0] for q in quad)
            ys = sum(self.nodes[q][1] for q in quad)
            c = self.add_node(xs / 4.0, ys / 4.0)
            for a, b in ((0, 1), (1, 2), (2, 3), (3, 0)):
                self.add_tri(quad[a], quad[b], c, region)

    def add_fan(self, center_id, ring_ids, region, closed=True):
        n = len(ring_ids)
        rng = range(n) if closed else range(n - 1)
        for j in rng:
            jn = (j + 1) % n
            self.add_tri(center_id, ring_ids[j], ring_ids[jn], region)

    def finish(self, edge_nodes, edge_tags):
        mesh = Mesh2D(
            nodes=np.asarray(self.nodes, dtype=float),
            triangles=np.asarray(self.tris, dtype=np.int64),
            edge_nodes=np.asarray(edge_nodes, dtype=np.int64).reshape(-1, 2),
            edge_tags=np.asarray(edge_tags, dtype=object),
        )
        region = np.asarray(self.regions, dtype=np.int8)
        comp = _label_components(mesh, region)
        return mesh, RegionMap(element_region=region, component_of_A=comp)


def _label_components(mesh: Mesh2D, region: np.ndarray) -> np.ndarray:
    """Union-find over shared edges restricted to A triangles."""
    parent = np.arange(mesh.n_triangles)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    edge_owner: dict = {}
    for t, tri in enumerate(mesh.triangles):
        if region[t] != REGION_A:
            continue
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(tri[a], tri[b]), max(tri[a], tri[b]))
            if key in edge_owner:
                ra, rb = find(edge_owner[key]), find(t)
                parent[ra] = rb
            else:
                edge_owner[key] = t
    comp = np.full(mesh.n_triangles, -1, dtype=np.int64)
    roots: dict = {}
    for t in range(mesh.n_triangles):
        if region[t] == REGION_A:
            r = find(t)
            comp[t] = roots.setdefault(r, len(roots))
    return comp


def _radial_levels(r_in: float, r_out: float, n: int, forced=()) -> np.ndarray:
    """n log-spaced radial intervals from r_in to r_out hitting each forced
    radius exactly."""
    anchors = [r_in] + sorted(r for r in forced if r_in < r < r_out) + [r_out]
    logs = np.diff(np.log(anchors))
    counts = np.maximum(1, np.round(n * logs / logs.sum()).astype(int))
    while counts.sum() > n:
        counts[np.argmax(counts)] -= 1
    while counts.sum() < n:
        counts[np.argmax(logs / counts)] += 1
    levels = [r_in]
    for (a, b), k in zip(zip(anchors[:-1], anchors[1:]), counts):
        levels.extend(np.geomspace(a, b, k + 1)[1:])
    return np.asarray(levels)


def _sector_count(n_radial: int, r_in: float, r_out: float) -> int:
    # aspect-1 cells: angular step matching the logarithmic radial step
    return 4 * max(2, round(n_radial * 2.0 * math.pi / math.log(r_out / r_in) / 4.0))


def _concentric_two_phase(r_inc: float, r_outer: float, n_radial: int):
    levels = _radial_levels(r_inc, r_outer, n_radial, forced=(2.0,))
    m = _sector_count(n_radial, r_inc, r_outer)
    angles = 2.0 * math.pi * np.arange(m) / m
    b = _Builder()

    # phase A: fan plus uniform rings out to the interface circle
    g1 = levels[1] / levels[0]
    k_core = max(2, round(1.0 / (g1 - 1.0)))
    center = b.add_node(0.0, 0.0)
    core_rings = [
        b.add_ring_nodes((0.0, 0.0), r_inc * i / k_core, angles) for i in range(1, k_core + 1)
    ]
    b.add_fan(center, core_rings[0], REGION_A)
    for inner, outer in zip(core_rings[:-1], core_rings[1:]):
        b.add_crossed_band(inner, outer, REGION_A)

    # phase B: log-graded rings from the interface to the outer circle
    rings = [core_rings[-1]]
    for rho in levels[1:]:
        rings.append(b.add_ring_nodes((0.0, 0.0), rho, angles))
    for inner, outer in zip(rings[:-1], rings[1:]):
        b.add_crossed_band(inner, outer, REGION_B)

    outer_ids = rings[-1]
    edges = [(outer_ids[j], outer_ids[(j + 1) % m]) for j in range(m)]
    return b.finish(edges, [TAG_OUTER] * m)


def _offcenter_disk_with_inclusion(center, r_inc, r_outer, n_radial):
    cx, cy = center
    m = _sector_count(n_radial, r_inc, r_outer)
    angles = 2.0 * math.pi * np.arange(m) / m
    cosang, sinang = np.cos(angles), np.sin(angles)
    # distance from the inclusion center to the outer circle along each ray
    proj = cx * cosang + cy * sinang
    rho_out = -proj + np.sqrt(proj**2 + r_outer**2 - (cx**2 + cy**2))

    b = _Builder()
    g1 = r_inc * ((r_outer / r_inc) ** (1.0 / n_radial) - 1.0)
    k_core = max(2, round(r_inc / g1))
    center_id = b.add_node(cx, cy)
    core_rings = [
        b.add_ring_nodes(center, r_inc * i / k_core, angles) for i in range(1, k_core + 1)
    ]
    b.add_fan(center_id, core_rings[0], REGION_A)
    for inner, outer in zip(core_rings[:-1], core_rings[1:]):
        b.add_crossed_band(inner, outer, REGION_A)

    rings = [core_rings[-1]]
    t_levels = (np.geomspace(r_inc, r_outer, n_radial + 1) - r_inc) / (r_outer - r_inc)
    for t in t_levels[1:]:
        radii = r_inc + t * (rho_out - r_inc)
        ids = np.arange(len(b.nodes), len(b.nodes) + m)
        b.nodes.extend(
            (cx + r * c, cy + r * s) for r, c, s in zip(radii, cosang, sinang)
        )
        rings.append(ids)
    for inner, outer in zip(rings[:-1], rings[1:]):
        b.add_crossed_band(inner, outer, REGION_B)

    outer_ids = rings[-1]
    edges = [(outer_ids[j], outer_ids[(j + 1) % m]) for j in range(m)]
    return b.finish(edges, [TAG_OUTER] * m)


def _square_with_inclusions(half_width, inclusions, n_cells):
    s = float(half_width)
    n = int(n_cells)
    if n % 2:
        n += 1  # keep the grid symmetric about the axes
    h = 2.0 * s / n
    xs = np.linspace(-s, s, n + 1)

    b = _Builder()
    grid_ids = np.empty((n + 1, n + 1), dtype=np.int64)
    for iy in range(n + 1):
        for ix in range(n + 1):
            grid_ids[ix, iy] = b.add_node(xs[ix], xs[iy])

    # carve a grid-aligned square hole around each inclusion
    holes = []
    cell_blocked = np.zeros((n, n), dtype=bool)
    for cx, cy, r in inclusions:
        ix = int(round((cx + s) / h))
        iy = int(round((cy + s) / h))
        bcells = max(2, math.ceil(1.25 * r / h))
        if ix - bcells < 1 or iy - bcells < 1 or ix + bcells > n - 1 or iy + bcells > n - 1:
            raise ParameterError(
                f"inclusion at ({cx}, {cy}) r={r} does not fit strictly inside the square"
            )
        snapped = (xs[ix], xs[iy])
        cell_blocked[ix - bcells:ix + bcells, iy - bcells:iy + bcells] = True
        holes.append((snapped, r, ix, iy, bcells))

    # background cells
    for ix in range(n):
        for iy in range(n):
            if cell_blocked[ix, iy]:
                continue
            quad = [grid_ids[ix, iy], grid_ids[ix + 1, iy], grid_ids[ix + 1, iy + 1], grid_ids[ix, iy + 1]]
            c = b.add_node(
                sum(b.nodes[q][0] for q in quad) / 4.0,
                sum(b.nodes[q][1] for q in quad) / 4.0,
            )
            for a1, a2 in ((0, 1), (1, 2), (2, 3), (3, 0)):
                b.add_tri(quad[a1], quad[a2], c, REGION_B)

    # each hole: transition band from the box perimeter to the circle, then disk
    for (ccx, ccy), r, ix, iy, bcells in holes:
        per = []
        for t in range(2 * bcells):          # bottom, left to right
            per.append(grid_ids[ix - bcells + t, iy - bcells])
        for t in range(2 * bcells):          # right, bottom to top
            per.append(grid_ids[ix + bcells, iy - bcells + t])
        for t in range(2 * bcells):          # top, right to left
            per.append(grid_ids[ix + bcells - t, iy + bcells])
        for t in range(2 * bcells):          # left, top to bottom
            per.append(grid_ids[ix - bcells, iy + bcells - t])
        per = np.asarray(per)
        pts = np.asarray(b.nodes)[per]
        theta = np.arctan2(pts[:, 1] - ccy, pts[:, 0] - ccx)
        circle = np.arange(len(b.nodes), len(b.nodes) + len(per))
        b.nodes.extend(
            (ccx + r * math.cos(t), ccy + r * math.sin(t)) for t in theta
        )
        b.add_crossed_band(circle, per, REGION_B)

        # inner rings at fractional radii with the same (nonuniform) angles
        k_core = max(2, round(r / h))
        rings = []
        for i in range(1, k_core):
            ids = np.arange(len(b.nodes), len(b.nodes) + len(per))
            rr = r * i / k_core
            b.nodes.extend((ccx + rr * math.cos(t), ccy + rr * math.sin(t)) for t in theta)
            rings.append(ids)
        rings.append(circle)
        center_id = b.add_node(ccx, ccy)
        b.add_fan(center_id, rings[0], REGION_A)
        for inner, outer in zip(rings[:-1], rings[1:]):
            b.add_crossed_band(inner, outer, REGION_A)

    edges, tags = [], []
    for t in range(n):
        edges.append((grid_ids[t, 0], grid_ids[t + 1, 0]))
        edges.append((grid_ids[n, t], grid_ids[n, t + 1]))
        edges.append((grid_ids[n - t, n], grid_ids[n - t - 1, n]))
        edges.append((grid_ids[0, n - t], grid_ids[0, n - t - 1]))
    tags = [TAG_OUTER] * len(edges)
    return b.finish(edges, tags)


def build_domain(spec: DomainSpec):
    """Generate the mesh and region map for a domain spec."""
    problems = spec.validate()
    if problems:
        raise ParameterError("; ".join(problems))
    if spec.shape == "annulus":
        return _concentric_two_phase(1.0, spec.r_outer, spec.n_radial)
    if spec.shape == "disk_with_inclusion":
        cx, cy = spec.inclusion_center
        if math.hypot(cx, cy) < 1e-12:
            return _concentric_two_phase(spec.inclusion_radius, spec.r_outer, spec.n_radial)
        return _offcenter_disk_with_inclusion(
            spec.inclusion_center, spec.inclusion_radius, spec.r_outer, spec.n_radial
        )
    return _square_with_inclusions(spec.half_width, spec.inclusions, spec.n_radial)


# -- queries and derived meshes ---------------------------------------------


def _edge_triangle_incidence(mesh: Mesh2D) -> dict:
    incidence: dict = {}
    for t, tri in enumerate(mesh.triangles):
        for a, b in ((0, 1), (1, 2), (2, 0)):
            key = (min(tri[a], tri[b]), max(tri[a], tri[b]))
            incidence.setdefault(key, []).append(t)
    return incidence


def interface_edges(mesh: Mesh2D, regions: RegionMap) -> np.ndarray:
    """Edges shared by one A and one B triangle."""
    out = []
    for key, tris in _edge_triangle_incidence(mesh).items():
        if len(tris) == 2:
            ra, rb = regions.element_region[tris[0]], regions.element_region[tris[1]]
            if ra != rb:
                out.append(key)
    return np.asarray(sorted(out), dtype=np.int64).reshape(-1, 2)


def validate_mesh(mesh: Mesh2D):
    """Structural invariants: positive areas, manifold edges, boundary closure."""
    if mesh.triangles.size and (mesh.triangles.min() < 0 or mesh.triangles.max() >= mesh.n_nodes):
        raise MeshError("triangle node index out of range")
    areas = mesh.areas()
    if np.any(areas <= 0):
        raise MeshError(f"{int((areas <= 0).sum())} triangles are not counterclockwise")
    incidence = _edge_triangle_incidence(mesh)
    boundary = {key for key, tris in incidence.items() if len(tris) == 1}
    if any(len(tris) > 2 for tris in incidence.values()):
        raise MeshError("an edge is shared by more than two triangles")
    declared = {(min(a, b), max(a, b)) for a, b in mesh.edge_nodes}
    if declared != boundary:
        raise MeshError(
            f"declared boundary edges ({len(declared)}) do not cover the topological "
            f"boundary ({len(boundary)})"
        )


def validate_regions(mesh: Mesh2D, regions: RegionMap):
    """Region invariants: B edge-connected, outer boundary borders B, A
    component labels consistent with edge connectivity."""
    region = regions.element_region
    incidence = _edge_triangle_incidence(mesh)
    # outer boundary edges belong to B triangles
    for (a, b), tag in zip(mesh.edge_nodes, mesh.edge_tags):
        if tag != TAG_OUTER:
            continue
        (t,) = incidence[(min(a, b), max(a, b))]
        if region[t] != REGION_B:
            raise RegionError("an outer boundary edge borders an A triangle")
    # B edge-connected
    b_tris = np.where(region == REGION_B)[0]
    if b_tris.size:
        adj: dict = {int(t): [] for t in b_tris}
        for tris in incidence.values():
            if len(tris) == 2 and region[tris[0]] == REGION_B and region[tris[1]] == REGION_B:
                adj[tris[0]].append(tris[1])
                adj[tris[1]].append(tris[0])
        seen = {int(b_tris[0])}
        stack = [int(b_tris[0])]
        while stack:
            for nb in adj[stack.pop()]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if len(seen) != b_tris.size:
            raise RegionError("phase B is not edge-connected")
    # component ids consistent
    recomputed = _label_components(mesh, region)
    a_mask = region == REGION_A
    if a_mask.any():
        ours = regions.component_of_A[a_mask]
        theirs = recomputed[a_mask]
        pairs = set(zip(ours.tolist(), theirs.tolist()))
        if len(pairs) != len(set(p[0] for p in pairs)) or len(pairs) != len(set(p[1] for p in pairs)):
            raise RegionError("A component labels do not partition into edge-connected sets")


def extract_submesh(mesh: Mesh2D, regions: RegionMap, which: str):
    """Submesh of one phase plus the child-to-parent node map.

    Interface edges acquire tag ``inner`` on the B submesh and ``interface``
    on the A submesh; inherited boundary edges keep their tags.
    """
    code = REGION_CODES.get(which)
    if code is None:
        raise RegionError(f"phase must be 'A' or 'B', got {which!r}")
    sel = np.where(regions.element_region == code)[0]
    if sel.size == 0:
        raise RegionError(f"phase {which} is empty")
    tris = mesh.triangles[sel]
    used = np.unique(tris)
    child_of_parent = -np.ones(mesh.n_nodes, dtype=np.int64)
    child_of_parent[used] = np.arange(used.size)
    new_tris = child_of_parent[tris]

    incidence = _edge_triangle_incidence(mesh)
    selset = set(sel.tolist())
    new_edges, new_tags = [], []
    for (a, b), tag in zip(mesh.edge_nodes, mesh.edge_tags):
        (t,) = incidence[(min(a, b), max(a, b))]
        if t in selset:
            new_edges.append((child_of_parent[a], child_of_parent[b]))
            new_tags.append(tag)
    iface_tag = TAG_INNER if code == REGION_B else TAG_INTERFACE
    for (a, b) in interface_edges(mesh, regions):
        new_edges.append((child_of_parent[a], child_of_parent[b]))
        new_tags.append(iface_tag)

    sub = Mesh2D(
        nodes=mesh.nodes[used],
        triangles=new_tris,
        edge_nodes=np.asarray(new_edges, dtype=np.int64).reshape(-1, 2),
        edge_tags=np.asarray(new_tags, dtype=object),
    )
    return sub, used  # used[child] == parent index


def boundary_nodes(mesh: Mesh2D, tag: str) -> list:
    """Node loops carrying a boundary tag, each ordered along its curve."""
    edges = [tuple(e) for e, t in zip(mesh.edge_nodes, mesh.edge_tags) if t == tag]
    if not edges:
        raise TagError(f"no boundary edges tagged {tag!r} (have {sorted(mesh.tags())})")
    neighbors: dict = {}
    for a, b in edges:
        neighbors.setdefault(int(a), []).append(int(b))
        neighbors.setdefault(int(b), []).append(int(a))
    loops = []
    remaining = {frozenset(e) for e in edges}
    while remaining:
        start = min(min(e) for e in remaining)
        loop = [start]
        prev, cur = None, start
        while True:
            nxt = None
            for cand in neighbors[cur]:
                if cand != prev and frozenset((cur, cand)) in remaining:
                    nxt = cand
                    break
            if nxt is None:
                break
            remaining.discard(frozenset((cur, nxt)))
            if nxt == start:
                break
            loop.append(nxt)
            prev, cur = cur, nxt
        loops.append(np.asarray(loop, dtype=np.int64))
    return loops


def boundary_edge_lengths(mesh: Mesh2D, tag: str) -> tuple[np.ndarray, np.ndarray]:
    """(edges, lengths) for one tag; the discrete boundary measure."""
    sel = np.asarray([t == tag for t in mesh.edge_tags], dtype=bool)
    if not sel.any():
        raise TagError(f"no boundary edges tagged {tag!r} (have {sorted(mesh.tags())})")
    edges = mesh.edge_nodes[sel]
    diff = mesh.nodes[edges[:, 0]] - mesh.nodes[edges[:, 1]]
    return edges, np.linalg.norm(diff, axis=1)


def region_area(mesh: Mesh2D, regions: RegionMap, which: str) -> float:
    code = REGION_CODES[which]
    return float(mesh.areas()[regions.element_region == code].sum())


# -- plain-text mesh exchange ------------------------------------------------


def write_mesh(path, mesh: Mesh2D, regions: RegionMap):
    with open(path, "w") as fh:
        fh.write(
            f"nodes {mesh.n_nodes} triangles {mesh.n_triangles} edges {len(mesh.edge_nodes)}\n"
        )
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        for tri, reg in zip(mesh.triangles, regions.element_region):
            fh.write(f"{tri[0]} {tri[1]} {tri[2]} {REGION_LETTERS[int(reg)]}\n")
        for (a, b), tag in zip(mesh.edge_nodes, mesh.edge_tags):
            fh.write(f"{a} {b} {tag}\n")


def read_mesh(path):
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 6 or header[0] != "nodes" or header[2] != "triangles" or header[4] != "edges":
            raise MeshError(f"bad mesh header in {path}")
        n, t, e = int(header[1]), int(header[3]), int(header[5])
        nodes = np.array([[float(v) for v in fh.readline().split()] for _ in range(n)])
        tris, regs = [], []
        for _ in range(t):
            parts = fh.readline().split()
            tris.append([int(parts[0]), int(parts[1]), int(parts[2])])
            regs.append(REGION_CODES[parts[3]])
        edges, tags = [], []
        for _ in range(e):
            parts = fh.readline().split()
            edges.append((int(parts[0]), int(parts[1])))
            tags.append(parts[2])
    mesh = Mesh2D(
        nodes=nodes,
        triangles=np.asarray(tris, dtype=np.int64),
        edge_nodes=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        edge_tags=np.asarray(tags, dtype=object),
    )
    region = np.asarray(regs, dtype=np.int8)
    return mesh, RegionMap(element_region=region, component_of_A=_label_components(mesh, region))
