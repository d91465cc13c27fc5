"""The first-derivative operator between weighted L2 spaces of paths.

Everything here discretizes d/dt acting from {f : f, f' square-integrable
against t -> G(t)} to the plain weighted L2 space over [0, infinity):
its kernel (which constant directions are square-integrable), an explicit
right inverse under an exponential dichotomy, empirical bounds for the two
Volterra-type integration operators behind that inverse, an explicit
witness of non-surjectivity for slowly varying weights, and a smallest-
singular-value scan used as a closed-range diagnostic.

Numerics run in whitened coordinates x_k = sqrt(w_k) A(t_k) v_k built from
the profile's Gram factors, with adjacent-time transports instead of
absolute Gram matrices, so strongly expanding families stay well
conditioned at any horizon.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import (DimensionMismatchError, EmptyEndListError,
                     GridTooCoarseError, IndeterminateError,
                     SplitHypothesisUnverifiedError, TailNotIntegrableError,
                     WeightEnvelopeViolatedError)
from .profiles import NormProfile, Split, SplitCheck, verify_split_hypothesis


# ---------------------------------------------------------------------------
# paths and the discretized operator
# ---------------------------------------------------------------------------

class WeightedPath:
    """Node values of a vector-valued path with the profile's weighted norm."""

    def __init__(self, grid, values, profile: NormProfile, fn=None):
        grid = np.asarray(grid, dtype=float)
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] != grid.shape[0]:
            raise DimensionMismatchError("one value row per grid node required")
        if values.shape[1] != profile.dim:
            raise DimensionMismatchError(
                f"values have width {values.shape[1]}, profile dimension {profile.dim}")
        if np.any(np.diff(grid) <= 0):
            raise DimensionMismatchError("grid must be strictly increasing")
        self.grid = grid
        self.values = values
        self.profile = profile
        self.fn = fn

    @classmethod
    def from_function(cls, fn, grid, profile):
        grid = np.asarray(grid, dtype=float)
        vals = np.array([np.atleast_1d(fn(t)) for t in grid], dtype=float)
        return cls(grid, vals, profile, fn=fn)

    def node_norms(self):
        return np.array([self.profile.norm(t, v)
                         for t, v in zip(self.grid, self.values)])

    def weighted_norm(self):
        """Trapezoid approximation of the L2-in-time norm."""
        sq = self.node_norms() ** 2
        return float(np.sqrt(np.trapezoid(sq, self.grid)))


def _trapezoid_weights(grid):
    w = np.zeros_like(grid)
    d = np.diff(grid)
    w[:-1] += d / 2
    w[1:] += d / 2
    return w


class DiscretizedDerivative:
    """Midpoint forward differences of node values, with weighted norms.

    The domain carries the graph norm (weighted L2 of the values plus
    weighted L2 of the differences); the codomain carries weighted L2 at the
    interval midpoints.  ``apply`` acts on raw node values, so constant paths
    map to exactly zero.
    """

    def __init__(self, profile: NormProfile, t_max, density=8):
        if t_max <= 0 or density <= 0:
            raise DimensionMismatchError("t_max and density must be positive")
        n_int = max(4, int(round(t_max * density)))
        self.profile = profile
        self.grid = np.linspace(0.0, float(t_max), n_int + 1)
        self.midpoints = 0.5 * (self.grid[:-1] + self.grid[1:])
        self.density = density
        self.t_max = float(t_max)

    @property
    def n_nodes(self):
        return len(self.grid)

    def apply(self, values):
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if values.shape[0] != self.n_nodes:
            raise DimensionMismatchError("values do not match the grid")
        dt = np.diff(self.grid)[:, None]
        return np.diff(values, axis=0) / dt

    def codomain_norm(self, mid_values):
        mid_values = np.atleast_2d(np.asarray(mid_values, dtype=float))
        sq = np.array([self.profile.norm(t, v) ** 2
                       for t, v in zip(self.midpoints, mid_values)])
        return float(np.sqrt(np.sum(sq * np.diff(self.grid))))

    def graph_norm(self, values):
        path = WeightedPath(self.grid, values, self.profile)
        l2 = path.weighted_norm() ** 2
        dv = self.codomain_norm(self.apply(values)) ** 2
        return float(np.sqrt(l2 + dv))

    def whitened_matrix(self):
        """The operator as a matrix between whitened coordinates.

        Built from adjacent-time transports A(m_k) A(t_j)^{-1}; entries stay
        O(exp(rate * dt)) regardless of the horizon.
        """
        prof = self.profile
        n = prof.dim
        nn = self.n_nodes
        w = _trapezoid_weights(self.grid)
        dt = np.diff(self.grid)
        mat = np.zeros((n * (nn - 1), n * nn))
        for k in range(nn - 1):
            m = self.midpoints[k]
            scale = np.sqrt(dt[k]) / dt[k]
            left = prof.transport(m, self.grid[k]) * (scale / np.sqrt(w[k]))
            right = prof.transport(m, self.grid[k + 1]) * (scale / np.sqrt(w[k + 1]))
            mat[k * n:(k + 1) * n, k * n:(k + 1) * n] = -left
            mat[k * n:(k + 1) * n, (k + 1) * n:(k + 2) * n] = right
        return mat

    def sigma_min(self):
        """Smallest singular value on the complement of the constant kernel,
        measured from the graph norm of the domain."""
        s = np.linalg.svd(self.whitened_matrix(), compute_uv=False)
        s = np.sort(s)
        n = self.profile.dim
        # the n smallest are the discretized constants (zero up to roundoff)
        plain = float(s[n])
        return plain / float(np.hypot(1.0, plain))

    def refined(self):
        return DiscretizedDerivative(self.profile, self.t_max, self.density * 2)


# ---------------------------------------------------------------------------
# kernel of the operator
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelResult:
    basis: np.ndarray          # columns: constant directions with finite norm
    ratios: np.ndarray         # tail/head integral ratio per probed direction
    directions: np.ndarray     # probed directions (columns)
    t_used: float
    tol: float

    @property
    def dim(self):
        return self.basis.shape[1]


def kernel(profile: NormProfile, t_max=50.0, tol=0.05, density=8,
           divergence_floor=0.5) -> KernelResult:
    """Constant directions whose squared norm is integrable on [0, infinity).

    Each probe direction (right singular directions of the Gram factor at a
    probe time, which diagonalize the asymptotic growth) is classified by the
    ratio of its partial integral over [T/2, T] to the one over [0, T/2]:
    below ``tol`` converging, above ``divergence_floor`` diverging.  Ratios
    in between are neither, and raise IndeterminateError rather than being
    silently resolved.
    """
    horizon = profile.float_horizon()
    t_used = float(min(t_max, horizon))
    probe_t = t_used / 2.0
    factor = profile.gram_factor(probe_t)
    _, _, vt = np.linalg.svd(factor)
    dirs = vt.T  # columns, orthonormal

    samples = max(257, int(density * t_used) + 1)
    ts = np.linspace(0.0, t_used, samples)
    ratios = []
    for j in range(dirs.shape[1]):
        sq = np.array([profile.norm(t, dirs[:, j]) ** 2 for t in ts])
        # a float direction carries an O(eps) expanding leak; its integrand
        # turns back up at the noise elbow, so truncate the window there
        elbow = int(np.argmin(sq))
        cut = samples - 1 if elbow in (0, samples - 1) else elbow
        half = cut // 2
        head = np.trapezoid(sq[:half + 1], ts[:half + 1])
        tail = np.trapezoid(sq[half:cut + 1], ts[half:cut + 1])
        ratios.append(tail / head if head > 0 else np.inf)
    ratios = np.array(ratios)

    gray = (ratios >= tol) & (ratios < divergence_floor)
    if np.any(gray):
        raise IndeterminateError(
            f"{int(gray.sum())} direction(s) have tail/head ratio in "
            f"[{tol}, {divergence_floor}) at T={t_used}; enlarge the horizon "
            "or change tolerances", ratios=ratios)
    keep = ratios < tol
    basis = dirs[:, keep]
    return KernelResult(basis=basis, ratios=ratios, directions=dirs,
                        t_used=t_used, tol=tol)


# ---------------------------------------------------------------------------
# explicit right inverse under an exponential dichotomy
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitSolve:
    w: WeightedPath
    residual: float
    w_norm: float
    tail_norm_estimate: float
    check: SplitCheck = field(repr=False)


def solve_split(profile: NormProfile, split: Split, v: WeightedPath,
                check=None) -> SplitSolve:
    """Solve w' = v given a verified expanding/contracting splitting.

    The expanding component is integrated inward from infinity and the
    contracting component outward from zero:

        w(t) = -int_t^inf v_plus(s) ds + int_0^t v_minus(s) ds.

    Integrating the growing directions from infinity is what makes the
    bounded-operator estimates behind the dichotomy applicable; running them
    from zero instead would exit the weighted space.
    """
    if check is None:
        check = verify_split_hypothesis(profile, split)
    if not check.ok:
        raise SplitHypothesisUnverifiedError(
            f"split hypothesis fails (worst margin {check.worst.margin:.3e} "
            f"on side '{check.worst.side}')")
    if v.profile is not profile:
        raise DimensionMismatchError("path was built against another profile")

    basis = split.basis()
    coeffs = np.linalg.solve(basis, v.values.T).T   # rows: u(t_k)
    k_plus = split.expanding.shape[1]
    u_plus, u_minus = coeffs[:, :k_plus], coeffs[:, k_plus:]
    grid = v.grid

    tail_vec = _expanding_tail_integral(grid, u_plus)

    # suffix sums accumulate the tiny far-end increments first, so the
    # remaining integral keeps relative accuracy where the codomain weight
    # is largest (a forward cumsum subtracted from its total would not)
    inc = 0.5 * np.diff(grid)[:, None] * (u_plus[:-1] + u_plus[1:])
    rev = np.vstack([np.cumsum(inc[::-1], axis=0)[::-1],
                     np.zeros((1, u_plus.shape[1]))])
    w_plus = -(rev + tail_vec)
    w_minus = cumulative_trapezoid(u_minus, grid, axis=0, initial=0.0)
    w_vals = (basis @ np.hstack([w_plus, w_minus]).T).T
    w = WeightedPath(grid, w_vals, profile)

    op = DiscretizedDerivative(profile, grid[-1], density=(len(grid) - 1) / grid[-1])
    op.grid = grid
    op.midpoints = 0.5 * (grid[:-1] + grid[1:])
    dw = op.apply(w_vals)
    if v.fn is not None:
        target = np.array([np.atleast_1d(v.fn(t)) for t in op.midpoints])
    else:
        target = 0.5 * (v.values[:-1] + v.values[1:])
    residual = op.codomain_norm(dw - target)

    w_norm = w.weighted_norm()
    tail_norm = _norm_tail_estimate(profile, grid, w_vals)
    return SplitSolve(w=w, residual=residual, w_norm=w_norm,
                      tail_norm_estimate=tail_norm, check=check)


def _expanding_tail_integral(grid, u_plus):
    """Estimate int_T^inf of the expanding coefficients beyond the grid."""
    if u_plus.shape[1] == 0:
        return np.zeros(0)
    mags = np.linalg.norm(u_plus, axis=1)
    peak = mags.max()
    n_tail = max(4, len(grid) // 10)
    tail = mags[-n_tail:]
    if peak == 0 or tail.max() <= 1e-10 * peak:
        return np.zeros(u_plus.shape[1])
    # accept only decay with at least one halving scale inside the fit
    # window: anything slower cannot be extrapolated geometrically
    safe = np.log(np.maximum(tail, 1e-300 * peak))
    ts = grid[-n_tail:]
    slope = np.polyfit(ts, safe, 1)[0]
    span = ts[-1] - ts[0]
    if slope * span > -np.log(2.0):
        raise TailNotIntegrableError(
            "expanding component of the right-hand side does not decay "
            f"convincingly at the end of the grid (fitted rate {slope:.3e} "
            f"over a window of {span:.2f}); extend the grid or supply "
            "compactly supported data")
    return u_plus[-1] / (-slope)


def _norm_tail_estimate(profile, grid, values):
    """Geometric tail bound for the weighted norm beyond the grid."""
    n_tail = max(4, len(grid) // 10)
    ts = grid[-n_tail:]
    norms = np.array([profile.norm(t, v) for t, v in zip(ts, values[-n_tail:])])
    if norms.max() <= 0:
        return 0.0
    safe = np.log(np.maximum(norms, 1e-300 * norms.max()))
    slope = np.polyfit(ts, safe, 1)[0]
    if slope >= -1e-6:
        return float(np.inf)
    return float(norms[-1] ** 2 / (2.0 * -slope)) ** 0.5


# ---------------------------------------------------------------------------
# empirical bounds for the two integration operators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VolterraCheck:
    max_ratio: float
    bound: float
    which: str
    ratios: np.ndarray

    @property
    def within(self):
        return self.max_ratio <= self.bound * 1.02


def volterra_norm_check(rate, scale=1.0, which="upper", trials=100,
                        t_max=None, samples=4097, seed=0) -> VolterraCheck:
    """Empirical operator norm of integration against an exponential weight.

    ``which='upper'``: weight scale * e^{rate t} and the inward integral
    int_t^inf; ``which='lower'``: weight scale * e^{-rate t} and int_0^t.
    Both are bounded by 1 / (scale * rate); the check reports the largest
    observed ratio over random compactly supported inputs.
    """
    if rate <= 0:
        raise ValueError("rate must be positive")
    if not 0 < scale <= 1:
        raise ValueError("a two-point constant above one is vacuous; need 0 < scale <= 1")
    if which not in ("upper", "lower"):
        raise ValueError("which must be 'upper' or 'lower'")
    t_max = 40.0 / rate if t_max is None else float(t_max)
    ts = np.linspace(0.0, t_max, samples)
    sign = 1.0 if which == "upper" else -1.0
    weight_sq = scale ** 2 * np.exp(2.0 * sign * rate * ts)
    rng = np.random.default_rng(seed)

    def wnorm(g):
        return np.sqrt(np.trapezoid(weight_sq * g ** 2, ts))

    ratios = np.empty(trials)
    for i in range(trials):
        f = np.zeros_like(ts)
        for _ in range(int(rng.integers(1, 4))):
            center = rng.uniform(0.05, 0.6) * t_max
            width = rng.uniform(0.2, 2.0) / rate
            amp = rng.standard_normal()
            f += amp * np.exp(-((ts - center) / width) ** 2)
        integral = cumulative_trapezoid(f, ts, initial=0.0)
        of = (integral[-1] - integral) if which == "upper" else integral
        ratios[i] = wnorm(of) / wnorm(f)
    return VolterraCheck(max_ratio=float(ratios.max()),
                         bound=1.0 / (scale * rate), which=which, ratios=ratios)


# ---------------------------------------------------------------------------
# non-surjectivity witness for slowly varying weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NonOntoWitness:
    ts: np.ndarray
    g_values: np.ndarray
    norm_sq: float
    norm_tail_estimate: float
    divergence_table: tuple     # ((T, min-over-constants antiderivative norm), ...)

    @property
    def norm(self):
        return float(np.sqrt(self.norm_sq))


def non_onto_witness(h, envelope_c, t0=10.0, doublings=4,
                     density=64) -> NonOntoWitness:
    """A square-integrable right-hand side with no square-integrable antiderivative.

    For a scalar weight h trapped between 1/(C(1+t)) and C(1+t), the function

        g(t) = (2+t)^{-1/2} (log(2+t))^{-3/4} h(t)^{-1/2}

    has finite weighted norm (the plain (1+t)-shift of the textbook profile
    is not square-integrable near zero; shifting to 2+t keeps the tail
    argument intact), while every c + int_0^t g grows without bound in the
    weighted norm.  The divergence table tracks that minimum over c across
    doublings of the horizon.
    """
    if envelope_c <= 0:
        raise ValueError("envelope constant must be positive")
    t_list = [t0 * 2 ** j for j in range(doublings + 1)]
    t_max = t_list[-1]
    ts = np.linspace(0.0, t_max, max(9, int(t_max * density)) + 1)
    h_vals = np.array([float(h(t)) for t in ts])
    lo = 1.0 / (envelope_c * (1.0 + ts))
    hi = envelope_c * (1.0 + ts)
    if np.any(h_vals < lo) or np.any(h_vals > hi):
        bad = int(np.argmax((h_vals < lo) | (h_vals > hi)))
        raise WeightEnvelopeViolatedError(
            f"h({ts[bad]:.3f}) = {h_vals[bad]:.3e} escapes the "
            f"[1/(C(1+t)), C(1+t)] envelope with C = {envelope_c}")

    g_vals = (2.0 + ts) ** -0.5 * np.log(2.0 + ts) ** -0.75 * h_vals ** -0.5

    # g^2 h telescopes to (2+t)^{-1} log(2+t)^{-3/2}; integrate in u = log(2+t)
    u_hi = np.log(2.0 + 1e9)
    us = np.linspace(np.log(2.0), u_hi, 200001)
    norm_head = np.trapezoid(us ** -1.5, us)
    norm_tail = 2.0 / np.sqrt(u_hi)
    norm_sq = float(norm_head + norm_tail)

    anti = cumulative_trapezoid(g_vals, ts, initial=0.0)
    table = []
    for t_stop in t_list:
        sel = ts <= t_stop + 1e-12
        tt, aa, hh = ts[sel], anti[sel], h_vals[sel]
        mass = np.trapezoid(hh, tt)
        mean = np.trapezoid(aa * hh, tt) / mass
        val = np.trapezoid((aa - mean) ** 2 * hh, tt)
        table.append((float(t_stop), float(np.sqrt(max(val, 0.0)))))
    return NonOntoWitness(ts=ts, g_values=g_vals, norm_sq=norm_sq,
                          norm_tail_estimate=float(norm_tail),
                          divergence_table=tuple(table))


# ---------------------------------------------------------------------------
# smallest-singular-value scan and verdicts
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    t_list: tuple
    sigmas: tuple
    beta: float
    fit_r2: float
    verdict: str                 # closed_image_likely | not_closed_likely | inconclusive
    refinement_delta: float

    def to_json(self):
        return {"t_list": list(self.t_list), "sigma_min": list(self.sigmas),
                "beta": self.beta, "fit_r2": self.fit_r2,
                "verdict": self.verdict,
                "refinement_delta": self.refinement_delta}


def sigma_min_scan(profile: NormProfile, t_list=(10.0, 20.0, 40.0, 80.0),
                   density=8, refine_check=True, stability_ratio=0.7,
                   beta_threshold=-0.5, r2_threshold=0.9) -> ScanResult:
    """Smallest singular value of the discretized operator per horizon.

    A diagnostic, not a certificate: a floor that persists across the top
    half of the horizons suggests closed range, a power-law decay with
    exponent <= beta_threshold suggests the opposite, anything else is
    inconclusive.  Grid density is per unit time, so discretization error is
    horizon-uniform; a refinement moving the largest-horizon value by more
    than 10% raises GridTooCoarseError.
    """
    t_list = tuple(sorted(float(t) for t in t_list))
    if len(t_list) < 2:
        raise ValueError("need at least two horizons")
    sigmas = []
    for t in t_list:
        sigmas.append(DiscretizedDerivative(profile, t, density).sigma_min())
    sigmas = tuple(sigmas)

    delta = 0.0
    if refine_check:
        op = DiscretizedDerivative(profile, t_list[-1], density)
        fine = op.refined().sigma_min()
        delta = abs(fine - sigmas[-1]) / max(fine, 1e-300)
        if delta > 0.10:
            raise GridTooCoarseError(
                f"refinement changes sigma_min at T={t_list[-1]} by {delta:.1%}")

    logs_t = np.log(np.array(t_list))
    logs_s = np.log(np.maximum(np.array(sigmas), 1e-300))
    coef = np.polyfit(logs_t, logs_s, 1)
    fit = np.polyval(coef, logs_t)
    ss_res = float(np.sum((logs_s - fit) ** 2))
    ss_tot = float(np.sum((logs_s - logs_s.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    beta = float(coef[0])

    top = len(t_list) // 2
    stable = sigmas[-1] >= stability_ratio * max(sigmas[top:])
    if stable:
        verdict = "closed_image_likely"
    elif beta <= beta_threshold and r2 >= r2_threshold:
        verdict = "not_closed_likely"
    else:
        verdict = "inconclusive"
    return ScanResult(t_list=t_list, sigmas=sigmas, beta=beta, fit_r2=r2,
                      verdict=verdict, refinement_delta=delta)


@dataclass(frozen=True)
class EndVerdict:
    verdict: str                 # closed_image | not_closed_image | inconclusive
    branch: int                  # 1 dichotomy, 2 envelope witness, 3 scan heuristic
    heuristic: bool
    evidence: dict = field(default_factory=dict)

    def to_json(self):
        ev = {}
        for k, v in self.evidence.items():
            if isinstance(v, np.ndarray):
                ev[k] = v.tolist()
            elif isinstance(v, ScanResult):
                ev[k] = v.to_json()
            else:
                ev[k] = v
        return {"verdict": self.verdict, "branch": self.branch,
                "heuristic": self.heuristic, "evidence": ev}


def _envelope_constant(profile, v, ts):
    """Smallest C with 1/(C(1+t)) <= ||v||_t^2 <= C(1+t) on the grid."""
    c = 0.0
    for t in ts:
        hv = profile.norm(t, v) ** 2
        if hv <= 0:
            return np.inf
        c = max(c, hv / (1.0 + t), 1.0 / (hv * (1.0 + t)))
    return c


def end_verdict(profile: NormProfile, split=None, t_list=(10.0, 20.0, 40.0, 80.0),
                density=8, envelope_c=10.0, seed=0) -> EndVerdict:
    """Decide closed range for one end, by the strongest applicable route.

    1. A verified exponential dichotomy is sufficient for surjectivity and
       hence closed range.
    2. A direction whose squared norm stays inside the [1/(C(1+t)), C(1+t)]
       envelope rules surjectivity out.
    3. Otherwise the singular-value scan is consulted; its verdicts are
       explicitly heuristic and may stay inconclusive.
    """
    candidate = split if split is not None else profile.suggest_split()
    split_evidence = None
    if candidate is not None:
        chk = verify_split_hypothesis(profile, candidate)
        split_evidence = {"ok": chk.ok, "worst_margin": chk.worst.margin,
                          "worst_side": chk.worst.side}
        if chk.ok:
            return EndVerdict("closed_image", branch=1, heuristic=False,
                              evidence={"split_check": split_evidence,
                                        "rate": candidate.rate})

    t_hi = float(min(t_list[-1], profile.float_horizon()))
    ts = np.linspace(0.0, t_hi, max(41, int(4 * t_hi) + 1))
    rng = np.random.default_rng(seed)
    dirs = list(profile.envelope_directions())
    extra = rng.standard_normal((profile.dim, 4))
    dirs += [extra[:, j] / np.linalg.norm(extra[:, j]) for j in range(extra.shape[1])]
    for v in dirs:
        c_needed = _envelope_constant(profile, np.asarray(v, float), ts)
        if c_needed <= envelope_c:
            return EndVerdict("not_closed_image", branch=2, heuristic=False,
                              evidence={"direction": np.asarray(v, float),
                                        "envelope_constant": float(c_needed),
                                        "split_check": split_evidence})

    scan = sigma_min_scan(profile, t_list=t_list, density=density)
    verdict = {"closed_image_likely": "closed_image",
               "not_closed_likely": "not_closed_image"}.get(scan.verdict,
                                                            "inconclusive")
    return EndVerdict(verdict, branch=3, heuristic=True,
                      evidence={"scan": scan, "split_check": split_evidence})


# ---------------------------------------------------------------------------
# whole-manifold assembly
# ---------------------------------------------------------------------------

class GeometricallyFiniteEnd:
    """Marker for a cusp/flare end; such an end forces essential spectrum
    down to zero on its own."""

    kind = "geometrically_finite"


class DegenerateEnd:
    """A tubular end carrying a norm profile (and optionally a known split)."""

    kind = "degenerate"

    def __init__(self, profile: NormProfile, split=None):
        self.profile = profile
        self.split = split


@dataclass(frozen=True)
class ManifoldReport:
    zero_in_spectrum: object          # True / False / None (inconclusive)
    reason: str
    geometrically_infinite: bool
    functions_zero_in_spectrum: bool  # reported fact about the 0-form Laplacian
    inj_radius_positive: bool
    per_end: tuple

    def to_json(self):
        return {
            "zero_in_spectrum": self.zero_in_spectrum,
            "reason": self.reason,
            "geometrically_infinite": self.geometrically_infinite,
            "functions_zero_in_spectrum": self.functions_zero_in_spectrum,
            "inj_radius_positive": self.inj_radius_positive,
            "per_end": [e if isinstance(e, str) else e.to_json()
                        for e in self.per_end],
        }


def manifold_verdict(ends, inj_radius_positive, **end_kwargs) -> ManifoldReport:
    """Combine per-end decisions into the 1-form spectral-gap answer.

    Zero stays out of the spectrum on the quotient by closed forms only when
    the injectivity radius is positive, every end is degenerate, and every
    end has closed range; thin parts or any cusp/flare end fill the essential
    spectrum down to zero, and any inconclusive end propagates.
    """
    if not ends:
        raise EmptyEndListError("a manifold report needs at least one end")
    geom_infinite = any(isinstance(e, DegenerateEnd) for e in ends)
    if not inj_radius_positive:
        return ManifoldReport(
            zero_in_spectrum=True,
            reason="vanishing injectivity radius fills the essential spectrum",
            geometrically_infinite=geom_infinite,
            functions_zero_in_spectrum=geom_infinite,
            inj_radius_positive=False,
            per_end=tuple(e.kind for e in ends))

    per_end = []
    verdicts = []
    for e in ends:
        if isinstance(e, GeometricallyFiniteEnd):
            per_end.append("geometrically_finite")
            verdicts.append("geometrically_finite")
        else:
            ev = end_verdict(e.profile, split=e.split, **end_kwargs)
            per_end.append(ev)
            verdicts.append(ev.verdict)

    if "geometrically_finite" in verdicts:
        return ManifoldReport(
            zero_in_spectrum=True,
            reason="a geometrically finite end has essential spectrum down to zero",
            geometrically_infinite=geom_infinite,
            functions_zero_in_spectrum=geom_infinite,
            inj_radius_positive=True, per_end=tuple(per_end))
    if "not_closed_image" in verdicts:
        return ManifoldReport(
            zero_in_spectrum=True,
            reason="an end fails closed range",
            geometrically_infinite=geom_infinite,
            functions_zero_in_spectrum=geom_infinite,
            inj_radius_positive=True, per_end=tuple(per_end))
    if "inconclusive" in verdicts:
        return ManifoldReport(
            zero_in_spectrum=None,
            reason="at least one end is inconclusive",
            geometrically_infinite=geom_infinite,
            functions_zero_in_spectrum=geom_infinite,
            inj_radius_positive=True, per_end=tuple(per_end))
    return ManifoldReport(
        zero_in_spectrum=False,
        reason="every end is degenerate with closed range",
        geometrically_infinite=geom_infinite,
        functions_zero_in_spectrum=geom_infinite,
        inj_radius_positive=True, per_end=tuple(per_end))
