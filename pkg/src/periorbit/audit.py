"""Sampling-based falsification checks for the growth hypotheses.

Each audit evaluates W and its gradient over a deterministic lattice of
(time node, radius shell, direction) samples and reports the worst signed
margin of the hypothesis inequality: nonnegative margins mean no violation
was found.  Limit conditions (ratios that must diverge) are judged by a
decade-ladder proxy and can only yield `violated` or `inconclusive`, never
a proof: the strongest positive verdict is `no-violation-found`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .potentials import Potential

NO_VIOLATION = "no-violation-found"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

# Pointwise inequalities are declared violated only beyond this tolerance,
# so exact-equality cases (Euler homogeneity) stay clean under roundoff.
_ABS_TOL = 1e-12
_REL_TOL = 1e-9

_MAX_STORED = 16


def default_radius_ladder(r_min: float = 1e-4, r_max: float = 1e4, shells: int = 61) -> np.ndarray:
    """Geometric shell ladder containing the radius 1.0 exactly (needed so
    unit-scale crossovers like delta_k land on a sampled shell)."""
    if not (0 < r_min < 1.0 < r_max):
        return np.geomspace(r_min, r_max, shells)
    lo = shells // 2 + 1
    lower = np.geomspace(r_min, 1.0, lo)
    upper = np.geomspace(1.0, r_max, shells - lo + 1)
    return np.concatenate([lower, upper[1:]])


def default_directions(dim: int, seed: int = 42, count: Optional[int] = None) -> np.ndarray:
    if dim == 1:
        return np.array([[1.0], [-1.0]])
    if count is None:
        count = 32 if dim <= 3 else 8 * dim
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((count, dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    axes = np.concatenate([np.eye(dim), -np.eye(dim)])
    return np.concatenate([axes, dirs])


@dataclass(frozen=True, eq=False)
class SampleScheme:
    """Deterministic sample lattice for the audits."""

    radii: np.ndarray
    directions: np.ndarray
    time_nodes: np.ndarray
    seed: int = 42
    divergence_threshold: float = 10.0
    divergence_decades: float = 3.0

    def __post_init__(self):
        radii = np.asarray(self.radii, dtype=float)
        if radii.ndim != 1 or np.any(np.diff(radii) <= 0):
            raise ValueError("radii must be strictly increasing")
        dirs = np.atleast_2d(np.asarray(self.directions, dtype=float))
        norms = np.linalg.norm(dirs, axis=1)
        if np.abs(norms - 1.0).max() > 1e-12:
            raise ValueError("directions must be unit vectors")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "directions", dirs)
        object.__setattr__(self, "time_nodes", np.asarray(self.time_nodes, dtype=float))

    @classmethod
    def default(
        cls,
        dim: int,
        period: float,
        time_nodes: int = 32,
        r_min: float = 1e-4,
        r_max: float = 1e4,
        shells: int = 61,
        directions: Optional[int] = None,
        seed: int = 42,
        divergence_threshold: float = 10.0,
        divergence_decades: float = 3.0,
    ) -> "SampleScheme":
        t = period * np.arange(time_nodes) / time_nodes
        return cls(
            radii=default_radius_ladder(r_min, r_max, shells),
            directions=default_directions(dim, seed, directions),
            time_nodes=t,
            seed=seed,
            divergence_threshold=divergence_threshold,
            divergence_decades=divergence_decades,
        )

    @property
    def sample_count(self) -> int:
        return self.radii.size * self.directions.shape[0] * self.time_nodes.size


@dataclass(frozen=True)
class AuditReport:
    """Outcome of one hypothesis audit."""

    condition: str
    params: dict
    samples_evaluated: int
    margin: float
    verdict: str
    violations: tuple = ()
    details: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "params": self.params,
            "samples_evaluated": self.samples_evaluated,
            "margin": self.margin,
            "verdict": self.verdict,
            "violations": [
                {"t": t, "u": list(u), "margin": m} for (t, u, m) in self.violations
            ],
            "details": self.details,
        }


class _Samples:
    """Vectorized potential evaluation on the (radius, time, direction) lattice."""

    def __init__(self, potential: Potential, scheme: SampleScheme, need_grad: bool = True):
        r = scheme.radii
        t = scheme.time_nodes
        d = scheme.directions
        nr, nt, nd = r.size, t.size, d.shape[0]
        u = r[:, None, None, None] * d[None, None, :, :]  # (R, 1, D, N)
        u = np.broadcast_to(u, (nr, nt, nd, d.shape[1]))
        t_full = np.broadcast_to(t[None, :, None], (nr, nt, nd))
        flat_u = u.reshape(-1, d.shape[1])
        flat_t = t_full.reshape(-1)
        self.shape = (nr, nt, nd)
        self.radii = r
        self.t = t_full
        self.u = u
        self.w = np.asarray(potential.w(flat_t, flat_u), dtype=float).reshape(self.shape)
        if need_grad:
            g = np.asarray(potential.grad_w(flat_t, flat_u), dtype=float)
            g = g.reshape(nr, nt, nd, d.shape[1])
            self.grad_dot_u = np.einsum("rtdn,rtdn->rtd", g, u)
            self.grad_norm = np.linalg.norm(g, axis=-1)
        self.count = flat_u.shape[0]

    def extract(self, mask: np.ndarray, margins: np.ndarray):
        """Worst-first (t, u, margin) tuples where mask is set."""
        idx = np.argwhere(mask)
        if idx.size == 0:
            return ()
        vals = margins[mask]
        order = np.argsort(vals)[:_MAX_STORED]
        picked = idx[order]
        out = []
        for r_i, t_i, d_i in picked:
            out.append(
                (
                    float(self.t[r_i, t_i, d_i]),
                    tuple(float(x) for x in self.u[r_i, t_i, d_i]),
                    float(margins[r_i, t_i, d_i]),
                )
            )
        return tuple(out)


def _violating(margins: np.ndarray, scale: np.ndarray) -> np.ndarray:
    return margins < -(_ABS_TOL + _REL_TOL * scale)


def _shell_window(radii: np.ndarray, decades: float, end: str) -> np.ndarray:
    """Boolean mask of the shells within `decades` of the ladder end."""
    if end == "low":
        return radii <= radii[0] * 10.0**decades
    return radii >= radii[-1] / 10.0**decades


def _divergence_proxy(ratios: np.ndarray, threshold: float, toward_small_radius: bool):
    """Judge whether per-shell worst ratios are heading to infinity.

    `ratios` is ordered by increasing radius.  Returns (ok, violated,
    evidence_index): `ok` when the extreme shell exceeds the threshold and
    the trend is monotone toward the limit; `violated` when the trend runs
    the wrong way; otherwise inconclusive.
    """
    seq = ratios[::-1] if toward_small_radius else ratios
    # seq is now ordered toward the limit
    extreme = seq[-1]
    diffs = np.diff(seq)
    tol = 1e-9 * np.maximum(np.abs(seq[1:]), np.abs(seq[:-1]))
    nondecreasing = np.all(diffs >= -tol)
    if extreme >= threshold and nondecreasing:
        return True, False
    strictly_dropping = seq[-1] < seq[0] * (1.0 - 1e-6)
    return False, bool(strictly_dropping)


def _merge_verdicts(*verdicts: str) -> str:
    if VIOLATED in verdicts:
        return VIOLATED
    if INCONCLUSIVE in verdicts:
        return INCONCLUSIVE
    return NO_VIOLATION


def _resolve(potential: Potential, overrides: dict) -> dict:
    out = {}
    for name, value in overrides.items():
        out[name] = value if value is not None else getattr(potential.constants, name)
    missing = [n for n, v in out.items() if v is None]
    if missing:
        raise ValueError(f"audit requires declared constants: {', '.join(missing)}")
    return out


def audit_aq1(potential: Potential, scheme: SampleScheme, mu=None, r1=None) -> AuditReport:
    """W >= 0 everywhere and <grad W, u> <= mu W for |u| >= r1."""
    p = _resolve(potential, {"mu": mu, "r1": r1})
    s = _Samples(potential, scheme)
    outer = np.broadcast_to((s.radii >= p["r1"])[:, None, None], s.shape)
    euler = p["mu"] * s.w - s.grad_dot_u
    euler_scale = np.abs(p["mu"] * s.w) + np.abs(s.grad_dot_u)
    bad = _violating(s.w, np.abs(s.w))
    bad |= outer & _violating(euler, euler_scale)
    margins = np.where(outer, np.minimum(s.w, euler), s.w)
    margin = float(margins.min())
    violations = s.extract(bad, margins)
    verdict = VIOLATED if bad.any() else NO_VIOLATION
    return AuditReport(
        condition="AQ1",
        params={"mu": p["mu"], "r1": p["r1"]},
        samples_evaluated=s.count,
        margin=margin,
        verdict=verdict,
        violations=violations,
    )


def audit_aq2(
    potential: Potential, scheme: SampleScheme, c2=None, r2=None, threshold=None
) -> AuditReport:
    """W/|u|^2 -> infinity as |u| -> 0 (decade proxy) and W <= c2 |u| for
    |u| <= r2."""
    p = _resolve(potential, {"c2": c2, "r2": r2})
    threshold = scheme.divergence_threshold if threshold is None else threshold
    s = _Samples(potential, scheme, need_grad=False)
    ratios = (s.w / s.radii[:, None, None] ** 2).min(axis=(1, 2))
    window = _shell_window(s.radii, scheme.divergence_decades, "low")
    ok, proxy_violated = _divergence_proxy(ratios[window], threshold, toward_small_radius=True)

    inner = s.radii <= p["r2"]
    linear = p["c2"] * s.radii[:, None, None] - s.w
    linear_scale = np.abs(s.w) + p["c2"] * s.radii[:, None, None]
    bad_linear = np.zeros(s.shape, dtype=bool)
    bad_linear[inner] = _violating(linear, np.broadcast_to(linear_scale, s.shape))[inner]
    margin = float(linear[inner].min()) if inner.any() else np.inf

    violations = s.extract(bad_linear, np.broadcast_to(linear, s.shape))
    verdicts = [VIOLATED if bad_linear.any() else NO_VIOLATION]
    if proxy_violated:
        verdicts.append(VIOLATED)
        mask = np.zeros(s.shape, dtype=bool)
        mask[np.argmin(np.where(window, ratios, np.inf))] = True
        proxy_margins = np.broadcast_to((ratios - threshold)[:, None, None], s.shape)
        violations = violations + s.extract(mask, proxy_margins)
        margin = min(margin, float(ratios[window].min() - threshold))
    elif not ok:
        verdicts.append(INCONCLUSIVE)
    return AuditReport(
        condition="AQ2",
        params={"c2": p["c2"], "r2": p["r2"], "threshold": threshold},
        samples_evaluated=s.count,
        margin=margin,
        verdict=_merge_verdicts(*verdicts),
        violations=violations,
        details={"small_radius_ratios": [float(x) for x in ratios[window]]},
    )


def audit_aq3(potential: Potential, scheme: SampleScheme, d=None) -> AuditReport:
    """liminf of W/|u| at infinity >= d, judged on the top radius decades."""
    p = _resolve(potential, {"d": d})
    s = _Samples(potential, scheme, need_grad=False)
    window = _shell_window(s.radii, scheme.divergence_decades, "high")
    ratio = s.w / s.radii[:, None, None]
    margins = ratio - p["d"]
    scale = np.abs(ratio) + p["d"]
    bad = np.zeros(s.shape, dtype=bool)
    bad[window] = _violating(margins, scale)[window]
    margin = float(margins[window].min())

    # smallest sampled radius beyond which W >= d |u| / 2 holds everywhere
    half_ok = (s.w - 0.5 * p["d"] * s.radii[:, None, None] >= -_ABS_TOL).all(axis=(1, 2))
    r3 = None
    for i in range(s.radii.size - 1, -1, -1):
        if not half_ok[i]:
            break
        r3 = float(s.radii[i])
    return AuditReport(
        condition="AQ3",
        params={"d": p["d"]},
        samples_evaluated=s.count,
        margin=margin,
        verdict=VIOLATED if bad.any() else NO_VIOLATION,
        violations=s.extract(bad, margins),
        details={"r3_estimate": r3},
    )


def audit_sq1(potential: Potential, scheme: SampleScheme, a1=None, nu=None) -> AuditReport:
    """|grad W| <= a1 (1 + |u|^(nu-1)) on every sample."""
    p = _resolve(potential, {"a1": a1, "nu": nu})
    if p["nu"] <= 2.0:
        raise ValueError(f"nu must exceed 2, got {p['nu']}")
    s = _Samples(potential, scheme)
    bound = p["a1"] * (1.0 + s.radii[:, None, None] ** (p["nu"] - 1.0))
    margins = np.broadcast_to(bound, s.shape) - s.grad_norm
    scale = np.broadcast_to(bound, s.shape) + s.grad_norm
    bad = _violating(margins, scale)
    return AuditReport(
        condition="SQ1",
        params={"a1": p["a1"], "nu": p["nu"]},
        samples_evaluated=s.count,
        margin=float(margins.min()),
        verdict=VIOLATED if bad.any() else NO_VIOLATION,
        violations=s.extract(bad, margins),
    )


def audit_sq2(potential: Potential, scheme: SampleScheme, threshold=None) -> AuditReport:
    """W >= 0 everywhere and W/|u|^2 -> infinity at infinity (decade proxy)."""
    threshold = scheme.divergence_threshold if threshold is None else threshold
    s = _Samples(potential, scheme, need_grad=False)
    pos_bad = _violating(s.w, np.abs(s.w))
    ratios = (s.w / s.radii[:, None, None] ** 2).min(axis=(1, 2))
    window = _shell_window(s.radii, scheme.divergence_decades, "high")
    ok, proxy_violated = _divergence_proxy(ratios[window], threshold, toward_small_radius=False)
    margin = float(s.w.min())
    violations = s.extract(pos_bad, s.w)
    verdicts = [VIOLATED if pos_bad.any() else NO_VIOLATION]
    if proxy_violated:
        verdicts.append(VIOLATED)
        mask = np.zeros(s.shape, dtype=bool)
        mask[np.argmin(np.where(window, ratios, np.inf))] = True
        proxy_margins = np.broadcast_to((ratios - threshold)[:, None, None], s.shape)
        violations = violations + s.extract(mask, proxy_margins)
        margin = min(margin, float(ratios[window].min() - threshold))
    elif not ok:
        verdicts.append(INCONCLUSIVE)
    return AuditReport(
        condition="SQ2",
        params={"threshold": threshold},
        samples_evaluated=s.count,
        margin=margin,
        verdict=_merge_verdicts(*verdicts),
        violations=violations,
        details={"large_radius_ratios": [float(x) for x in ratios[window]]},
    )


def audit_sq3(
    potential: Potential, scheme: SampleScheme, varrho=None, b=None, nu=None
) -> AuditReport:
    """liminf of (<grad W, u> - 2 W)/|u|^varrho at infinity >= b."""
    p = _resolve(potential, {"varrho": varrho, "b": b, "nu": nu})
    if p["varrho"] < 1.0:
        raise ValueError(f"varrho must satisfy varrho >= 1, got {p['varrho']}")
    if p["varrho"] <= p["nu"] - 2.0:
        raise ValueError(
            f"varrho must lie in (nu - 2, inf): got varrho={p['varrho']} with nu={p['nu']}"
        )
    s = _Samples(potential, scheme)
    window = _shell_window(s.radii, scheme.divergence_decades, "high")
    ratio = (s.grad_dot_u - 2.0 * s.w) / s.radii[:, None, None] ** p["varrho"]
    margins = ratio - p["b"]
    scale = np.abs(ratio) + p["b"]
    bad = np.zeros(s.shape, dtype=bool)
    bad[window] = _violating(margins, scale)[window]

    # smallest radius beyond which <grad W, u>/2 - W >= (b/4) |u|^varrho
    quarter = 0.5 * s.grad_dot_u - s.w - 0.25 * p["b"] * s.radii[:, None, None] ** p["varrho"]
    quarter_ok = (quarter >= -_ABS_TOL).all(axis=(1, 2))
    l0 = None
    for i in range(s.radii.size - 1, -1, -1):
        if not quarter_ok[i]:
            break
        l0 = float(s.radii[i])
    return AuditReport(
        condition="SQ3",
        params={"varrho": p["varrho"], "b": p["b"], "nu": p["nu"]},
        samples_evaluated=s.count,
        margin=float(margins[window].min()),
        verdict=VIOLATED if bad.any() else NO_VIOLATION,
        violations=s.extract(bad, margins),
        details={"l0_estimate": l0},
    )


def audit_even(potential: Potential, scheme: SampleScheme) -> AuditReport:
    """W(t, -u) = W(t, u) up to 1e-12 relative."""
    s = _Samples(potential, scheme, need_grad=False)
    flat_t = s.t.reshape(-1)
    flat_u = s.u.reshape(-1, s.u.shape[-1])
    w_neg = np.asarray(potential.w(flat_t, -flat_u), dtype=float).reshape(s.shape)
    asym = np.abs(s.w - w_neg) / (1.0 + np.abs(s.w))
    margins = 1e-12 - asym
    bad = margins < 0
    return AuditReport(
        condition="even",
        params={},
        samples_evaluated=s.count,
        margin=float(margins.min()),
        verdict=VIOLATED if bad.any() else NO_VIOLATION,
        violations=s.extract(bad, margins),
    )


def audit_grad_consistency(
    potential: Potential, scheme: SampleScheme, rtol: float = 1e-5
) -> AuditReport:
    """Central finite differences of W against the declared gradient, on
    samples away from the origin."""
    keep = (scheme.radii >= 1e-2) & (scheme.radii <= 1e2)
    sub = SampleScheme(
        radii=scheme.radii[keep],
        directions=scheme.directions,
        time_nodes=scheme.time_nodes,
        seed=scheme.seed,
        divergence_threshold=scheme.divergence_threshold,
        divergence_decades=scheme.divergence_decades,
    )
    s = _Samples(potential, sub)
    flat_t = s.t.reshape(-1)
    flat_u = s.u.reshape(-1, s.u.shape[-1])
    grad = np.asarray(potential.grad_w(flat_t, flat_u), dtype=float)
    h = 1e-6 * (1.0 + np.linalg.norm(flat_u, axis=1))
    fd = np.zeros_like(grad)
    for comp in range(flat_u.shape[1]):
        up = flat_u.copy()
        dn = flat_u.copy()
        up[:, comp] += h
        dn[:, comp] -= h
        fd[:, comp] = (
            np.asarray(potential.w(flat_t, up), dtype=float)
            - np.asarray(potential.w(flat_t, dn), dtype=float)
        ) / (2.0 * h)
    rel = np.linalg.norm(fd - grad, axis=1) / (1.0 + np.linalg.norm(grad, axis=1))
    margins = (rtol - rel).reshape(s.shape)
    bad = margins < 0
    return AuditReport(
        condition="grad-consistency",
        params={"rtol": rtol},
        samples_evaluated=s.count,
        margin=float(margins.min()),
        verdict=VIOLATED if bad.any() else NO_VIOLATION,
        violations=s.extract(bad, margins),
    )


AQ_AUDITS = ("AQ1", "AQ2", "AQ3")
SQ_AUDITS = ("SQ1", "SQ2", "SQ3")


def audit_all(potential: Potential, scheme: SampleScheme, mode: str) -> list[AuditReport]:
    """Run the full battery for the declared growth mode."""
    if mode == "asymptotic":
        reports = [
            audit_aq1(potential, scheme),
            audit_aq2(potential, scheme),
            audit_aq3(potential, scheme),
        ]
    elif mode == "superquadratic":
        reports = [
            audit_sq1(potential, scheme),
            audit_sq2(potential, scheme),
            audit_sq3(potential, scheme),
        ]
    else:
        raise ValueError(f"mode must be 'asymptotic' or 'superquadratic', got {mode!r}")
    reports.append(audit_even(potential, scheme))
    reports.append(audit_grad_consistency(potential, scheme))
    return reports
