"""Dirichlet-energy densities Q(x, E) and their derived quantities.

A density packages the map E -> Q(x, E) together with its derivative
J(x, E) = dQ/dE and the secant conductivity sigma(x, E) = J/E.  Three kinds
are supported:

* ``PowerLaw``:       Q(x, E) = weight(x) * E**exponent,
* ``OscillatingPsi``: the piecewise-quadratic density that alternates between
                      2E^2 and 3E^2 on geometrically growing windows (the
                      construction that defeats asymptotic-weight convergence),
* ``UserClosedForm``: Q and J supplied as expressions in x1, x2, E.

The module also hosts the executable validators for the structural
assumptions (convexity sampling, two-sided growth bounds, asymptotic-weight
estimation).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, ParameterError, RangeError, RegionError
from .expressions import Expr, as_point_function

SQRT2 = math.sqrt(2.0)
# Geometry of the tangent-line construction: the tangent to 2E^2 at a = L*l2
# meets E^2 at C1*a; the line through (b, b^2) with b = L*l1 touches 2E^2 at
# C2*b.  The window seeds are two geometric progressions with ratio RATIO*L^2.
C1 = 2.0 + SQRT2
C2 = 1.0 + SQRT2 / 2.0
RATIO = 3.0 + 2.0 * SQRT2  # == C1 * C2

BRANCH_TWO = "two_E_sq"
BRANCH_THREE = "three_E_sq"
BRANCH_TANGENT = "tangent_line_plus_Esq"

# Default regularization scale for sigma at E = 0 when exponent < 2.
SIGMA_EPS_FACTOR = 1e-10


@dataclass(frozen=True)
class GrowthBounds:
    """Constants of the two-sided power sandwich on Q."""

    q_lower: float
    q_upper: float
    e0: float
    exponent: float

    def __post_init__(self):
        if not (0 < self.q_lower <= self.q_upper):
            raise ParameterError(
                f"growth bounds need 0 < q_lower <= q_upper, got {self.q_lower}, {self.q_upper}"
            )
        if self.e0 <= 0:
            raise ParameterError(f"reference field e0 must be positive, got {self.e0}")
        if self.exponent <= 1:
            raise ParameterError(f"growth exponent must exceed 1, got {self.exponent}")

    def lower(self, e):
        return self.q_lower * ((np.asarray(e, float) / self.e0) ** self.exponent - 1.0)

    def upper(self, e):
        return self.q_upper * ((np.asarray(e, float) / self.e0) ** self.exponent + 1.0)


@dataclass(frozen=True)
class PsiSegment:
    lo: float
    hi: float
    branch: str
    # phi = a2*E^2 + a1*E + a0 on [lo, hi]; the full density is phi + E^2.
    a2: float
    a1: float
    a0: float


@dataclass(frozen=True)
class OscillatingPsiSpec:
    """Window sequences and piecewise coefficients of the oscillating density."""

    big_l: float
    lambda2_1: float
    n_max: int
    lambda_prime: np.ndarray   # windows where psi = 2E^2
    lambda_second: np.ndarray  # windows where psi = 3E^2
    segments: tuple[PsiSegment, ...]
    c1: float = C1
    c2: float = C2

    def segment_edges(self):
        return np.array([seg.lo for seg in self.segments] + [self.segments[-1].hi])


def build_counterexample_psi(big_l: float, lambda2_1: float, n_max: int) -> OscillatingPsiSpec:
    """Construct the oscillating density spec up to window index n_max.

    On [l2_n, L*l2_n] the density equals 3E^2 and on [l1_n, L*l1_n] it equals
    2E^2, with l1_n = C1*L*l2_n and l2_{n+1} = C2*L*l1_n.  Between windows the
    auxiliary convex function phi (density minus E^2) follows straight lines
    tangent to 2E^2.  Below l2_1 and above the last tangency point phi is
    continued as 2E^2, so the density is defined on all of [0, inf).
    """
    if big_l <= 10:
        raise ParameterError(f"window factor L must exceed 10, got {big_l}")
    if lambda2_1 <= 0:
        raise ParameterError(f"first window seed must be positive, got {lambda2_1}")
    n_max = int(n_max)
    if n_max < 1:
        raise ParameterError(f"n_max must be at least 1, got {n_max}")

    lam2 = [float(lambda2_1)]
    lam1 = []
    for n in range(n_max):
        l1 = C1 * big_l * lam2[n]
        lam1.append(l1)
        l2_next = C2 * big_l * l1
        if not np.isfinite(l2_next) or big_l * l2_next > 1e300:
            raise RangeError(
                f"window sequence overflows double precision at n={n + 1}", achieved=n
            )
        lam2.append(l2_next)

    segments = []

    def two(lo, hi):
        segments.append(PsiSegment(lo, hi, BRANCH_THREE, 2.0, 0.0, 0.0))

    def one(lo, hi):
        segments.append(PsiSegment(lo, hi, BRANCH_TWO, 1.0, 0.0, 0.0))

    def tangent(lo, hi, touch):
        # line tangent to 2E^2 at E = touch: 4*touch*E - 2*touch^2
        segments.append(
            PsiSegment(lo, hi, BRANCH_TANGENT, 0.0, 4.0 * touch, -2.0 * touch**2)
        )

    two(0.0, big_l * lam2[0])
    for n in range(n_max):
        a = big_l * lam2[n]
        tangent(a, lam1[n], a)
        one(lam1[n], big_l * lam1[n])
        b = big_l * lam1[n]
        tangent(b, lam2[n + 1], lam2[n + 1])
        hi = big_l * lam2[n + 1] if n + 1 < n_max else math.inf
        two(lam2[n + 1], hi)

    return OscillatingPsiSpec(
        big_l=float(big_l),
        lambda2_1=float(lambda2_1),
        n_max=n_max,
        lambda_prime=np.array(lam1),
        lambda_second=np.array(lam2[:n_max]),
        segments=tuple(segments),
    )


@dataclass(frozen=True)
class EnergyDensity:
    """Pointwise Dirichlet-energy density with growth metadata.

    ``weight`` is a spatial factor (constant, expression in x1/x2, or callable
    on an (n,2) point array); it must stay bounded below by a positive
    constant on the region the density is used on.
    """

    kind: str  # PowerLaw | OscillatingPsi | UserClosedForm
    exponent: float
    bounds: GrowthBounds
    weight: object = 1.0
    psi_spec: OscillatingPsiSpec | None = None
    q_expr: Expr | None = None
    j_expr: Expr | None = None
    label: str = ""
    _weight_fn: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in ("PowerLaw", "OscillatingPsi", "UserClosedForm"):
            raise ParameterError(f"unknown density kind {self.kind!r}")
        if self.exponent <= 1:
            raise ParameterError(f"density exponent must exceed 1, got {self.exponent}")
        if self.kind == "OscillatingPsi" and self.psi_spec is None:
            raise ParameterError("OscillatingPsi density needs a psi_spec")
        if self.kind == "UserClosedForm" and (self.q_expr is None or self.j_expr is None):
            raise ParameterError("UserClosedForm density needs q and j expressions")
        object.__setattr__(self, "_weight_fn", as_point_function(self.weight))

    # -- raw evaluations (vectorized) ------------------------------------

    def weight_at(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, float))
        w = self._weight_fn(pts)
        if np.any(w <= 0):
            bad = pts[np.argmin(w)]
            raise RegionError(
                f"weight is not positive at x = ({bad[0]:.6g}, {bad[1]:.6g}); "
                "point lies outside the density's region"
            )
        return w

    def _psi_coeffs(self, e):
        spec = self.psi_spec
        edges = np.array([seg.lo for seg in spec.segments])
        idx = np.clip(np.searchsorted(edges, e, side="right") - 1, 0, len(edges) - 1)
        a2 = np.array([seg.a2 for seg in spec.segments])[idx]
        a1 = np.array([seg.a1 for seg in spec.segments])[idx]
        a0 = np.array([seg.a0 for seg in spec.segments])[idx]
        return a2, a1, a0

    def q(self, points, e) -> np.ndarray:
        """Q(x, E) for an (n,2) point array and a matching E array."""
        e = np.asarray(e, float)
        if np.any(e < 0):
            raise DomainError("field magnitude E must be nonnegative")
        if self.kind == "PowerLaw":
            return self.weight_at(points) * e**self.exponent
        if self.kind == "OscillatingPsi":
            a2, a1, a0 = self._psi_coeffs(e)
            return self.weight_at(points) * ((a2 + 1.0) * e**2 + a1 * e + a0)
        pts = np.atleast_2d(np.asarray(points, float))
        self.weight_at(points)
        return np.broadcast_to(
            self.q_expr(x1=pts[:, 0], x2=pts[:, 1], E=e), np.broadcast_shapes(e.shape, (pts.shape[0],))
        ).copy()

    def j(self, points, e) -> np.ndarray:
        """J(x, E) = dQ/dE."""
        e = np.asarray(e, float)
        if np.any(e < 0):
            raise DomainError("field magnitude E must be nonnegative")
        if self.kind == "PowerLaw":
            p = self.exponent
            return self.weight_at(points) * p * e ** (p - 1.0)
        if self.kind == "OscillatingPsi":
            a2, a1, _ = self._psi_coeffs(e)
            return self.weight_at(points) * (2.0 * (a2 + 1.0) * e + a1)
        pts = np.atleast_2d(np.asarray(points, float))
        self.weight_at(points)
        return np.broadcast_to(
            self.j_expr(x1=pts[:, 0], x2=pts[:, 1], E=e), np.broadcast_shapes(e.shape, (pts.shape[0],))
        ).copy()

    def j_prime(self, points, e) -> np.ndarray:
        """d^2 Q / dE^2, used for Newton's element Hessians."""
        e = np.asarray(e, float)
        if self.kind == "PowerLaw":
            p = self.exponent
            return self.weight_at(points) * p * (p - 1.0) * e ** (p - 2.0)
        if self.kind == "OscillatingPsi":
            a2, _, _ = self._psi_coeffs(e)
            return self.weight_at(points) * 2.0 * (a2 + 1.0)
        h = 1e-6 * (np.maximum(np.asarray(e, float), 1.0))
        return (self.j(points, e + h) - self.j(points, np.maximum(e - h, 0.0))) / (2.0 * h)


# -- public pointwise operations ------------------------------------------


def eval_Q(density: EnergyDensity, x, e) -> float | np.ndarray:
    """Energy density at one point: Q(x, E)."""
    scalar = np.isscalar(e) and np.asarray(x).ndim == 1
    out = density.q(np.atleast_2d(x), np.asarray(e, float))
    return float(out.reshape(-1)[0]) if scalar else out


def eval_J(density: EnergyDensity, x, e) -> float | np.ndarray:
    """Current magnitude at one point: J(x, E) = dQ/dE."""
    scalar = np.isscalar(e) and np.asarray(x).ndim == 1
    out = density.j(np.atleast_2d(x), np.asarray(e, float))
    return float(out.reshape(-1)[0]) if scalar else out


def eval_sigma(density: EnergyDensity, x, e, sigma_eps: float | None = None) -> float | np.ndarray:
    """Secant conductivity sigma(x, E) = J(x, E)/E.

    At E = 0 the limit is returned when the exponent is >= 2; for exponents
    below 2 the secant blows up, so a regularized value J(x, eps)/eps with
    eps = 1e-10 * E0 (configurable) is reported instead.
    """
    scalar = np.isscalar(e) and np.asarray(x).ndim == 1
    e = np.asarray(e, float)
    if sigma_eps is None:
        sigma_eps = SIGMA_EPS_FACTOR * density.bounds.e0
    e_eval = np.where(e > 0, e, sigma_eps if density.exponent < 2 else 1.0)
    out = density.j(np.atleast_2d(x), e_eval) / e_eval
    if density.exponent >= 2:
        # genuine limit: J/E -> p*weight*E^{p-2} -> {2*weight if p==2, 0 if p>2}
        lim = density.j_prime(np.atleast_2d(x), np.zeros_like(e)) if density.exponent == 2 else 0.0
        out = np.where(e > 0, out, lim)
    return float(np.asarray(out).reshape(-1)[0]) if scalar else out


@dataclass
class ValidationReport:
    verdict: bool
    violations: list
    grid_meta: dict

    def to_json(self) -> str:
        return json.dumps(
            {"verdict": bool(self.verdict), "violations": self.violations, "grid_meta": self.grid_meta},
            indent=2,
        )


def check_growth_bounds(density: EnergyDensity, points, e_values) -> ValidationReport:
    """Sample the two-sided growth sandwich on a points x fields grid."""
    pts = np.atleast_2d(np.asarray(points, float))
    es = np.asarray(e_values, float)
    if pts.size == 0 or es.size == 0:
        raise ConfigError(["growth-bound check needs a nonempty sample grid"])
    gb = density.bounds
    violations = []
    for e in es:
        q = density.q(pts, np.full(pts.shape[0], e))
        lhs = float(gb.lower(e))
        rhs = float(gb.upper(e))
        bad = np.where((q < lhs) | (q > rhs))[0]
        for i in bad:
            violations.append(
                {"x": [float(pts[i, 0]), float(pts[i, 1])], "E": float(e),
                 "lhs": lhs, "value": float(q[i]), "rhs": rhs}
            )
    meta = {"n_points": int(pts.shape[0]), "n_fields": int(es.size),
            "e_max": float(es.max()), "exponent": gb.exponent}
    return ValidationReport(verdict=len(violations) == 0, violations=violations, grid_meta=meta)


def estimate_asymptotic_weight(density: EnergyDensity, x, e_schedule) -> dict:
    """Probe Q(x, E)/E^p along an increasing field schedule.

    Returns the last ratio and the max-min oscillation over the tail half of
    the schedule; vanishing oscillation certifies an asymptotic weight
    empirically, persistent oscillation refutes it.  The schedule must hold at
    least 8 strictly increasing values spanning three decades or more.
    """
    es = np.asarray(e_schedule, float)
    if es.size < 8 or np.any(np.diff(es) <= 0):
        raise ConfigError(["field schedule must be strictly increasing with >= 8 points"])
    if es[-1] < 1e3 * es[0]:
        raise ConfigError(["field schedule must span at least 3 decades"])
    pts = np.atleast_2d(np.asarray(x, float))
    ratios = np.array(
        [float(density.q(pts, np.full(pts.shape[0], e))[0]) / e**density.exponent for e in es]
    )
    tail = ratios[es.size // 2:]
    return {
        "weight_estimate": float(ratios[-1]),
        "oscillation": float(tail.max() - tail.min()),
        "ratios": ratios,
    }


# Empirical certification threshold for the asymptotic-weight probe: a finite
# test of a limit statement needs a declared tolerance.
ASYMPTOTIC_OSCILLATION_TOL = 1e-3


def certifies_asymptotic_weight(estimate: dict) -> bool:
    return estimate["oscillation"] <= ASYMPTOTIC_OSCILLATION_TOL * max(
        abs(estimate["weight_estimate"]), 1e-300
    )


# -- constructors ----------------------------------------------------------


def power_law(weight, exponent, bounds: GrowthBounds | None = None, label="") -> EnergyDensity:
    if bounds is None:
        # constant-weight power laws sandwich themselves with q_lower=q_upper=w
        w = float(weight) if isinstance(weight, (int, float)) else 1.0
        bounds = GrowthBounds(q_lower=min(w, 1.0), q_upper=max(w, 1.0), e0=1.0, exponent=exponent)
    return EnergyDensity(kind="PowerLaw", exponent=exponent, bounds=bounds, weight=weight, label=label)


def oscillating_psi(big_l: float, lambda2_1: float, n_max: int, label="counterexample") -> EnergyDensity:
    spec = build_counterexample_psi(big_l, lambda2_1, n_max)
    bounds = GrowthBounds(q_lower=1.0, q_upper=3.0, e0=1.0, exponent=2.0)
    return EnergyDensity(
        kind="OscillatingPsi", exponent=2.0, bounds=bounds, weight=1.0,
        psi_spec=spec, label=label,
    )


def user_closed_form(q_text: str, j_text: str, exponent: float, bounds: GrowthBounds,
                     weight=1.0, label="", rng=None) -> EnergyDensity:
    """Density from Q/J expressions; J is cross-checked against finite
    differences of Q on 100 random samples at load time."""
    density = EnergyDensity(
        kind="UserClosedForm", exponent=exponent, bounds=bounds, weight=weight,
        q_expr=Expr(q_text, ("x1", "x2", "E")), j_expr=Expr(j_text, ("x1", "x2", "E")),
        label=label,
    )
    rng = np.random.default_rng(0) if rng is None else rng
    pts = rng.uniform(-1.0, 1.0, size=(100, 2))
    es = rng.uniform(0.5, 10.0, size=100)
    h = 1e-6 * np.maximum(es, 1.0)
    fd = (density.q(pts, es + h) - density.q(pts, es - h)) / (2.0 * h)
    j = density.j(pts, es)
    scale = np.maximum(np.abs(j), 1.0)
    bad = np.abs(fd - j) / scale > 1e-4
    if np.any(bad):
        i = int(np.argmax(np.abs(fd - j) / scale))
        raise ConfigError(
            [
                "closed-form J disagrees with finite differences of Q "
                f"({int(bad.sum())}/100 samples; worst at E={es[i]:.4g}: J={j[i]:.6g} vs FD={fd[i]:.6g})"
            ]
        )
    return density


def density_from_dict(data: dict) -> EnergyDensity:
    """Build a density from the structured-text (YAML/JSON) description."""
    problems = []
    if not isinstance(data, dict):
        raise ConfigError(["density description must be a mapping"])
    kind = data.get("kind")
    if kind not in ("PowerLaw", "OscillatingPsi", "UserClosedForm"):
        raise ConfigError([f"density kind must be PowerLaw|OscillatingPsi|UserClosedForm, got {kind!r}"])
    bounds = None
    if "bounds" in data:
        b = data["bounds"]
        try:
            bounds = GrowthBounds(
                q_lower=float(b["q_lower"]), q_upper=float(b["q_upper"]),
                e0=float(b["e0"]),
                exponent=float(b.get("exponent", data.get("exponent", 2.0))),
            )
        except (KeyError, TypeError) as exc:
            problems.append(f"bounds needs q_lower, q_upper, e0: {exc}")
        except ParameterError as exc:
            problems.append(str(exc))
    if problems:
        raise ConfigError(problems)
    if kind == "OscillatingPsi":
        return oscillating_psi(
            big_l=float(data["big_l"]), lambda2_1=float(data["lambda2_1"]),
            n_max=int(data.get("n_max", 3)), label=data.get("label", "counterexample"),
        )
    exponent = float(data.get("exponent", 2.0))
    weight = data.get("weight", 1.0)
    if kind == "PowerLaw":
        return power_law(weight, exponent, bounds, label=data.get("label", ""))
    if bounds is None:
        raise ConfigError(["UserClosedForm density needs explicit bounds"])
    return user_closed_form(
        data["q"], data["j"], exponent, bounds, weight=weight, label=data.get("label", "")
    )
