"""Interval exchange orbits, first-return homology vectors, and the
deviation-exponent filtration they generate.

Orbits run in exact arithmetic by default: rational lengths use Fraction,
and quadratic-irrational lengths such as the golden rotation use a tiny
exact a + b*sqrt(5) field, so discontinuity straddling cannot silently
corrupt visit counts.  Return loops accumulate visit-count vectors; growth
exponents of linear functionals on them estimate the deviation spectrum,
and a deflation pass assembles the nested filtration by exponent.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._linalg import orth_basis, subspace_intersection
from .errors import (AllZeroEvaluationsError, BoundaryHitError,
                     GenericityFailureError, NoReturnWithinBudgetError,
                     UnresolvedStrataError)
from .symplectic import SymplecticMatrix, eigen_split


class Sqrt5(object):
    """Exact a + b*sqrt(5) with rational a, b; supports the order field ops
    an interval exchange needs (add, subtract, compare)."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def coerce(cls, x):
        if isinstance(x, cls):
            return x
        return cls(Fraction(x))

    def __add__(self, other):
        o = Sqrt5.coerce(other)
        return Sqrt5(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __sub__(self, other):
        o = Sqrt5.coerce(other)
        return Sqrt5(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        return Sqrt5.coerce(other) - self

    def __neg__(self):
        return Sqrt5(-self.a, -self.b)

    def __mul__(self, other):
        if isinstance(other, Sqrt5):
            return Sqrt5(self.a * other.a + 5 * self.b * other.b,
                         self.a * other.b + self.b * other.a)
        q = Fraction(other)
        return Sqrt5(self.a * q, self.b * q)

    __rmul__ = __mul__

    def sign(self):
        if self.b == 0:
            return (self.a > 0) - (self.a < 0)
        if self.a == 0:
            return (self.b > 0) - (self.b < 0)
        sa = 1 if self.a > 0 else -1
        sb = 1 if self.b > 0 else -1
        if sa == sb:
            return sa
        return sa if self.a * self.a > 5 * self.b * self.b else sb

    def _cmp(self, other):
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        try:
            o = Sqrt5.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * 5 ** 0.5

    def __repr__(self):
        return f"Sqrt5({self.a}, {self.b})"


_FLOAT_GUARD = 1e-12


class IntervalExchange:
    """A piecewise translation of [0, 1) permuting subintervals.

    ``permutation`` sends source position i to target position pi(i); both
    0-based and 1-based inputs are accepted.  Reducible permutations (a
    proper prefix mapped to itself) are rejected, as are lengths that do not
    sum to one.
    """

    def __init__(self, lengths, permutation, mode="rational"):
        if mode not in ("rational", "float"):
            raise ValueError("mode must be 'rational' or 'float'")
        self.mode = mode
        lengths = list(lengths)
        m = len(lengths)
        if m < 2:
            raise ValueError("an interval exchange needs at least two intervals")

        perm = [int(p) for p in permutation]
        if sorted(perm) == list(range(1, m + 1)):
            perm = [p - 1 for p in perm]
        if sorted(perm) != list(range(m)):
            raise ValueError(f"permutation {permutation} is not a bijection on {m} letters")
        if any(max(perm[: k + 1]) == k for k in range(m - 1)):
            raise ValueError("permutation is reducible: a proper prefix maps to itself")

        if mode == "float":
            lengths = [float(x) for x in lengths]
            if any(x <= 0 for x in lengths):
                raise ValueError("lengths must be positive")
            if abs(sum(lengths) - 1.0) > 1e-14:
                raise ValueError("lengths must sum to 1 within 1e-14")
            zero = 0.0
        else:
            if any(isinstance(x, Sqrt5) for x in lengths):
                lengths = [Sqrt5.coerce(x) for x in lengths]
                zero = Sqrt5(0)
            else:
                lengths = [Fraction(x) for x in lengths]
                zero = Fraction(0)
            if any(not x > zero for x in lengths):
                raise ValueError("lengths must be positive")
            if sum(lengths, zero) != 1:
                raise ValueError("lengths must sum to 1 exactly")

        self.m = m
        self.lengths = lengths
        self.permutation = tuple(perm)
        self._zero = zero
        src = [zero]
        for x in lengths:
            src.append(src[-1] + x)
        self.src_left = src  # m+1 breakpoints, src[0] = 0, src[m] = 1
        dst = [zero] * m
        order = sorted(range(m), key=lambda i: perm[i])
        pos = zero
        for i in order:
            dst[i] = pos
            pos = pos + lengths[i]
        self.dst_left = dst

    def coerce_point(self, x):
        if self.mode == "float":
            return float(x)
        if isinstance(self.lengths[0], Sqrt5):
            return Sqrt5.coerce(x)
        return Fraction(x)

    def locate(self, x):
        """Index of the subinterval containing x; discontinuities raise."""
        x = self.coerce_point(x)
        if x < self._zero or not x < self.src_left[self.m]:
            raise ValueError(f"point {x} outside [0, 1)")
        for i in range(self.m):
            if x < self.src_left[i + 1]:
                if i > 0 and x == self.src_left[i]:
                    raise BoundaryHitError(
                        f"point is the discontinuity at breakpoint {i}")
                if self.mode == "float" and i > 0 and \
                        abs(x - float(self.src_left[i])) < _FLOAT_GUARD:
                    raise BoundaryHitError(
                        f"point within {_FLOAT_GUARD} of breakpoint {i}; "
                        "float orbit is no longer trustworthy")
                return i
        raise ValueError(f"point {x} could not be located")  # pragma: no cover

    def iterate(self, x):
        """One application of the exchange; exact in rational mode."""
        i = self.locate(x)
        return self.coerce_point(x) - self.src_left[i] + self.dst_left[i]

    def to_json(self):
        if self.mode == "float":
            lens = [float(x) for x in self.lengths]
        else:
            lens = [str(x) if isinstance(x, Fraction) else repr(x)
                    for x in self.lengths]
        return {"lengths": lens,
                "permutation": [p + 1 for p in self.permutation],
                "mode": self.mode}


def golden_rotation():
    """The rotation by 2 - golden_ratio as an exact two-interval exchange."""
    l1 = Sqrt5(Fraction(-1, 2), Fraction(1, 2))   # (sqrt5 - 1) / 2
    l2 = Sqrt5(Fraction(3, 2), Fraction(-1, 2))   # (3 - sqrt5) / 2
    return IntervalExchange([l1, l2], [2, 1])


@dataclass(frozen=True)
class ReturnLoopRecord:
    """Cumulative visit counts up to the n-th return of the orbit."""

    n: int
    visits: tuple
    iterations: int
    norm_h: float

    def vector(self):
        return np.array(self.visits, dtype=float)


def return_loops(iet: IntervalExchange, n_returns, p=None, interval=None,
                 max_iterations=10_000_000):
    """Follow the orbit of p and snapshot visit counts at returns to I.

    ``interval`` is a (lo, hi) subinterval of the first exchange interval
    and defaults to the whole of it; p defaults to its left endpoint.  The
    k-th visit is charged to the subinterval containing the point being
    mapped, so the visit total equals the iteration count.
    """
    if n_returns < 1:
        raise ValueError("need at least one return")
    lo = iet.coerce_point(0 if interval is None else interval[0])
    hi = iet.lengths[0] + iet._zero if interval is None else iet.coerce_point(interval[1])
    if not (iet._zero <= lo < hi) or hi > iet.lengths[0] + iet._zero:
        raise ValueError("interval must be a nonempty subinterval of interval 1")
    x = lo if p is None else iet.coerce_point(p)
    if not (lo <= x < hi):
        raise ValueError("starting point must lie in the return interval")

    visits = [0] * iet.m
    records = []
    iterations = 0
    while len(records) < n_returns:
        if iterations >= max_iterations:
            raise NoReturnWithinBudgetError(
                f"only {len(records)} of {n_returns} returns found within "
                f"{max_iterations} iterations", budget=max_iterations)
        i = iet.locate(x)
        visits[i] += 1
        iterations += 1
        x = iet.coerce_point(x) - iet.src_left[i] + iet.dst_left[i]
        if lo <= x < hi:
            vec = tuple(visits)
            records.append(ReturnLoopRecord(
                n=len(records) + 1, visits=vec, iterations=iterations,
                norm_h=float(np.linalg.norm(vec))))
    return records


# ---------------------------------------------------------------------------
# deviation exponents
# ---------------------------------------------------------------------------

def _as_matrix(loops):
    if len(loops) == 0:
        raise ValueError("no loop data")
    if isinstance(loops[0], ReturnLoopRecord):
        return np.array([r.visits for r in loops], dtype=float)
    return np.array(loops, dtype=float)


@dataclass(frozen=True)
class ExponentEstimate:
    """Growth estimate of log|f(h_n)| / log||h_n||.

    ``estimate`` is the upper (limsup-style) statistic: the maximum of the
    ratio over the last half of the sequence.  ``lower`` is the slope fitted
    through the strictly decreasing record minima of |f(h_n)|, which is the
    meaningful rate on contracting directions where the plain ratio
    oscillates up to its limsup at zero.  ``regression`` is the tail
    least-squares slope, and ``spread`` the distance between the primary
    statistic and the regression.
    """

    estimate: float
    upper: float
    lower: float
    regression: float
    spread: float
    n_used: int


def _ratio_series(vals, norms):
    mask = (vals > 0) & (norms > 1.0)
    return mask, np.log(vals[mask]) / np.log(norms[mask])


def _record_minima(vals, norms):
    """(log norm, log val) at strictly decreasing running minima of vals."""
    records = []
    best = np.inf
    for v, n in zip(vals, norms):
        if v > 0 and v < best and n > 1.0:
            best = v
            records.append((np.log(n), np.log(v)))
    return records


def _has_genuine_decay(vals):
    first_positive = next((v for v in vals if v > 0), 0.0)
    positive = vals[vals > 0]
    return first_positive > 0 and positive.size >= 3 and \
        positive.min() <= 0.02 * first_positive


def _record_fit(vals, norms):
    """Least-squares line through the record minima; (slope, rms) or None.

    Two contaminated bands are dropped: the earliest records (additive
    constants still matter there) and records within a factor 1e-13 of the
    evaluation's floating-point floor relative to the vector norm.
    """
    records = [(x, y) for x, y in _record_minima(vals, norms)
               if y - x > np.log(1e-13)]
    if len(records) < 3:
        return None
    xs = np.array([r[0] for r in records])
    ys = np.array([r[1] for r in records])
    cut = xs[0] + 0.2 * (xs[-1] - xs[0])
    keep = xs >= cut
    if keep.sum() >= 3:
        xs, ys = xs[keep], ys[keep]
    # median of consecutive-record slopes: intercept-free, and one spurious
    # cancellation dip corrupts only its adjacent slopes, not the median
    span = xs[-1] - xs[0]
    slopes = []
    i = 0
    while i < len(xs) - 1:
        j = i + 1
        while j < len(xs) and xs[j] - xs[i] < 0.05 * span:
            j += 1
        if j >= len(xs):
            break
        slopes.append((ys[j] - ys[i]) / (xs[j] - xs[i]))
        i = j
    if len(slopes) < 2:
        return None
    slopes = np.array(slopes)
    med = np.median(slopes)
    if med < 0:
        # a drop several times steeper than the trend is a near-exact
        # cancellation of the residual leak, not envelope decay
        keep = slopes > 4.0 * med
        if keep.sum() >= 2:
            slopes = slopes[keep]
    slope = float(np.median(slopes))
    spread = float(np.median(np.abs(slopes - slope)))
    return slope, spread


def _record_slope(vals, norms):
    if not _has_genuine_decay(vals):
        return None, 0
    fit = _record_fit(vals, norms)
    if fit is None:
        return None, 0
    return fit[0], len(_record_minima(vals, norms))


def _record_indices(vals, norms):
    idx = []
    best = np.inf
    for i, (v, nn) in enumerate(zip(vals, norms)):
        if v > 0 and v < best and nn > 1.0:
            best = v
            idx.append(i)
    return idx


def _volume_log_series(h, norms, dirs):
    """log k-volumes of evaluations of ``dirs`` on k consecutive loops, with
    a per-time noise-floor estimate.

    Determinants cancel the rank-deficient leakage of faster strata across
    neighboring times, which single evaluations cannot.  The floor models
    the determinant roundoff eps * ||h|| * prod(other column scales).
    """
    k = len(dirs)
    evals = h @ np.column_stack(dirs)          # (n, k)
    n = len(h)
    m = max(n - k + 1, 0)
    logv = np.full(m, -np.inf)
    floor = np.full(m, -np.inf)
    log_eps = np.log(1e-13)
    for i in range(m):
        block = evals[i:i + k]
        sign, logdet = np.linalg.slogdet(block.T)
        if sign != 0:
            logv[i] = logdet
        with np.errstate(divide="ignore"):
            la = np.log(np.abs(block).max(axis=0))
        la = la[np.isfinite(la)]
        if la.size:
            floor[i] = log_eps + np.log(norms[i]) + la.sum() - la.min()
        else:
            floor[i] = log_eps + np.log(norms[i])
    return logv, floor


def _fit_log_records(xs, ys, floors):
    """Consecutive-slope median through running minima of a log series,
    skipping points at or below their roundoff floor."""
    records = []
    best = np.inf
    for x, y, f in zip(xs, ys, floors):
        if np.isfinite(y) and y < best and x > 0:
            best = y
            if y > f:
                records.append((x, y))
    if len(records) < 3:
        return None
    rx = np.array([r[0] for r in records])
    ry = np.array([r[1] for r in records])
    cut = rx[0] + 0.2 * (rx[-1] - rx[0])
    keep = rx >= cut
    if keep.sum() >= 3:
        rx, ry = rx[keep], ry[keep]
    span = rx[-1] - rx[0]
    slopes = []
    i = 0
    while i < len(rx) - 1:
        j = i + 1
        while j < len(rx) and rx[j] - rx[i] < 0.05 * span:
            j += 1
        if j >= len(rx):
            break
        slopes.append((ry[j] - ry[i]) / (rx[j] - rx[i]))
        i = j
    if len(slopes) < 2:
        return None
    slopes = np.array(slopes)
    med_head = np.median(slopes[: max(2, (len(slopes) + 1) // 2)])
    if med_head < 0:
        # leakage cross terms eventually flatten the record line; keep the
        # prefix where decay still runs at a meaningful fraction of the
        # initial rate
        alive = np.flatnonzero(slopes > 0.3 * med_head)
        cutoff = alive[0] if alive.size else len(slopes)
        if cutoff >= 2:
            slopes = slopes[:cutoff]
    med = np.median(slopes)
    if med < 0:
        # a drop several times steeper than the trend is a near-exact
        # cancellation of residual leakage, not envelope decay
        keep = slopes > 4.0 * med
        if keep.sum() >= 2:
            slopes = slopes[keep]
    slope = float(np.median(slopes))
    return slope, float(np.median(np.abs(slopes - slope)))


def _fit_log_window(xs, ys, floors, lo_frac, hi_frac):
    lo = int(len(xs) * lo_frac)
    hi = max(lo + 3, int(len(xs) * hi_frac))
    x, y, f = xs[lo:hi], ys[lo:hi], floors[lo:hi]
    mask = np.isfinite(y) & (x > 0) & (y > f)
    if mask.sum() < 3 or x[mask].max() - x[mask].min() < 1e-9:
        return None
    coeffs = np.polyfit(x[mask], y[mask], 1)
    fit = np.polyval(coeffs, x[mask])
    rms = float(np.sqrt(np.mean((y[mask] - fit) ** 2))
                / max(x[mask].max() - x[mask].min(), 1.0))
    return float(coeffs[0]), rms


def _group_exponents_by_volume(h, norms, xs, dirs, growing):
    """Exponents of a group of directions from cumulative volume slopes.

    The k-volume of the group's evaluations moves at the sum of its first k
    exponents, so differences of consecutive fitted volume slopes separate
    strata even when single evaluations are contaminated by nearby rates.
    The group is ordered greedily, shallowest increment first: at each step
    the candidate whose inclusion gives the largest fitted slope increment
    joins next, which keeps the difference chain aligned with the strata.
    Returns (order, exponents, spreads) relative to the input list.
    """
    remaining = list(range(len(dirs)))
    order, exps, spreads = [], [], []
    prev_slope, prev_spread = 0.0, 0.0
    while remaining:
        best = None
        for cand in remaining:
            chosen = [dirs[i] for i in order] + [dirs[cand]]
            logv, floor = _volume_log_series(h, norms, chosen)
            x = xs[: len(logv)]
            if growing:
                fit = _fit_log_window(x, logv, floor, 0.25, 0.75)
            else:
                fit = _fit_log_records(x, logv, floor)
                if fit is None:
                    fit = _fit_log_window(x, logv, floor, 0.25, 0.75)
            if fit is None:
                continue
            if best is None or fit[0] > best[1] + 1e-12 or \
                    (abs(fit[0] - best[1]) <= 1e-12 and fit[1] < best[2]):
                best = (cand, fit[0], fit[1])
        if best is None:
            # no candidate fits: report the rest as unresolved
            for cand in remaining:
                order.append(cand)
                exps.append(np.nan)
                spreads.append(np.inf)
            break
        cand, slope, rms = best
        remaining.remove(cand)
        order.append(cand)
        exps.append(slope - prev_slope)
        spreads.append(rms + prev_spread)
        prev_slope, prev_spread = slope, rms
    return order, exps, spreads


def exponent_of(f, loops, tail_fraction=0.5, metric=None) -> ExponentEstimate:
    """Estimate the growth exponent of a covector along the loop vectors.

    The covector is normalized first, which pins the Cauchy-Schwarz bound
    estimate <= 1 exactly.  All evaluations vanishing exactly raises
    AllZeroEvaluationsError: the functional sits deeper in the filtration
    than the data can resolve.
    """
    h = _as_matrix(loops)
    if len(h) < 100:
        raise ValueError("need at least 100 loops for a stable estimate")
    f = np.asarray(f, dtype=float)
    nf = np.linalg.norm(f)
    if nf == 0:
        raise ValueError("zero covector")
    f = f / nf
    vals = np.abs(h @ f)
    if metric is None:
        norms = np.linalg.norm(h, axis=1)
    else:
        metric = np.asarray(metric, dtype=float)
        norms = np.sqrt(np.einsum("ij,jk,ik->i", h, metric, h))
    if not np.any(vals > 0):
        raise AllZeroEvaluationsError(
            "the covector annihilates every loop vector at this depth")

    start = int(len(h) * (1.0 - tail_fraction))
    mask, ratios = _ratio_series(vals[start:], norms[start:])
    if ratios.size == 0:
        raise AllZeroEvaluationsError("no usable evaluations in the tail")
    upper = float(ratios.max())
    xs = np.log(norms[start:][mask])
    ys = np.log(vals[start:][mask])
    regression = float(np.polyfit(xs, ys, 1)[0]) if xs.size >= 3 else upper
    lower, _ = _record_slope(vals, norms)
    if lower is None:
        lower = float(ratios.min())
    return ExponentEstimate(estimate=upper, upper=upper, lower=float(lower),
                            regression=regression,
                            spread=abs(upper - regression), n_used=len(h))


def _window_regression(vals, norms, window):
    v, n = vals[window], norms[window]
    mask = (v > 0) & (n > 1.0)
    if mask.sum() < 3:
        return None
    xs, ys = np.log(n[mask]), np.log(v[mask])
    if xs.max() - xs.min() < 1e-9:
        return None
    coeffs = np.polyfit(xs, ys, 1)
    fit = np.polyval(coeffs, xs)
    rms = float(np.sqrt(np.mean((ys - fit) ** 2)) / max(xs[-1] - xs[0], 1.0))
    return float(coeffs[0]), rms


def _stratum_exponent(vals, norms, stage, window, tail_fraction=0.5):
    """Exponent and uncertainty for one deflation direction.

    The leading direction (stage 0) is deflation-error free and uses the
    limsup statistic over the tail.  Later growing directions are fitted on
    their extraction window, the latest stretch where this stratum is above
    both the floating-point floor and the faster strata's leakage.
    Genuinely decaying directions (record minima below 2% of the first
    value) use the record-minimum slope, the meaningful contracting rate.
    """
    start = int(len(vals) * (1.0 - tail_fraction))
    mask, ratios = _ratio_series(vals[start:], norms[start:])
    if ratios.size == 0 and stage == 0:
        return 0.0, np.inf
    slope, _ = _record_slope(vals, norms)
    if slope is not None:
        fit = _record_fit(vals, norms)
        return slope, fit[1]
    if stage == 0:
        upper = float(ratios.max())
        xs = np.log(norms[start:][mask])
        ys = np.log(vals[start:][mask])
        regression = float(np.polyfit(xs, ys, 1)[0]) if xs.size >= 3 else upper
        return upper, abs(upper - regression)
    clean = _window_regression(vals, norms, window)
    if clean is None:
        return (float(ratios.max()), np.inf) if ratios.size else (0.0, np.inf)
    return clean[0], clean[1]


@dataclass(frozen=True)
class Stratum:
    exponent: float
    member_exponents: tuple
    basis: np.ndarray            # columns, orthonormal

    @property
    def dim(self):
        return self.basis.shape[1]


@dataclass(frozen=True)
class LyapunovFiltration:
    """Nested subspaces of covectors ordered by growth exponent.

    ``strata`` ascend from the most contracting to the leading one; raw
    exponents are the measured ratios (leading value near +1 by the
    self-normalizing denominator), ``normalized`` rescales so the top is
    exactly one.
    """

    strata: tuple
    n_loops: int
    tol_cluster: float

    @property
    def dim(self):
        return sum(s.dim for s in self.strata)

    @property
    def exponents(self):
        return tuple(s.exponent for s in self.strata)

    @property
    def normalized(self):
        top = self.strata[-1].exponent
        if top <= 0:
            return self.exponents
        return tuple(e / top for e in self.exponents)

    def chain(self):
        """Cumulative bases, slowest stratum first; the last spans everything."""
        out = []
        acc = []
        for s in self.strata:
            acc.append(s.basis)
            out.append(np.hstack(acc))
        return out

    def zero_stratum_basis(self, tol=None):
        tol = 0.5 * self.tol_cluster if tol is None else tol
        keep = [s.basis for s in self.strata if s.exponent <= tol]
        if not keep:
            return np.zeros((self.strata[0].basis.shape[0], 0))
        return np.hstack(keep)

    def zero_stratum_dim(self, tol=None):
        return self.zero_stratum_basis(tol).shape[1]

    def to_json(self):
        return {"exponents": list(self.exponents),
                "normalized": list(self.normalized),
                "dims": [s.dim for s in self.strata],
                "members": [list(s.member_exponents) for s in self.strata],
                "n_loops": self.n_loops, "tol_cluster": self.tol_cluster}


def filtration(loops, tol_cluster=0.25, tail_fraction=0.5) -> LyapunovFiltration:
    """Assemble the exponent filtration by deflation.

    Directions are peeled off fastest-first: the dominant direction of the
    normalized tail vectors is extracted, its exponent estimated by
    functional evaluation, and the analysis recurses on the orthogonal
    complement.  Estimates closer than ``tol_cluster`` merge into one
    stratum; a direction whose estimator uncertainty exceeds ``tol_cluster``
    leaves the strata unresolved and raises.
    """
    h = _as_matrix(loops)
    n, m = h.shape
    if m < 2:
        raise ValueError("need at least two coordinates")
    if n < 8:
        raise UnresolvedStrataError(f"{n} loops cannot resolve any strata")
    norms = np.linalg.norm(h, axis=1)

    remaining = np.eye(m)
    directions, estimates, spreads, decay_flags = [], [], [], []
    stage = 0
    while remaining.shape[1] > 0:
        d = remaining.shape[1]
        # multiscale window: project out the faster strata first, then keep
        # the latest rows where the projection is still numerically above
        # the floor of the full vectors; deeper strata live earlier in time
        y = h @ remaining
        ynorm = np.linalg.norm(y, axis=1)
        valid = np.flatnonzero(ynorm > 1e-10 * norms)
        if valid.size < max(4, d + 2):
            valid = np.argsort(ynorm / np.maximum(norms, 1e-300))[-max(4, d + 2):]
            valid = np.sort(valid)
        window = valid[-max(8, min(len(valid), n // 4)):]
        if d == 1:
            local = np.ones(1)
        else:
            rows = y[window] / ynorm[window][:, None]
            _, _, vt = np.linalg.svd(rows, full_matrices=False)
            local = vt[0]
        u = remaining @ local
        u = u / np.linalg.norm(u)
        vals = np.abs(h @ u)
        est, spread = _stratum_exponent(vals, norms, stage, window, tail_fraction)
        directions.append(u)
        estimates.append(est)
        spreads.append(spread)
        if d == 1:
            break
        proj = remaining - np.outer(u, u @ remaining)
        remaining = orth_basis(proj)
        stage += 1

    # refine the raw per-direction values through cumulative volume slopes,
    # separately on the growing part and on the rest; the abscissa is the
    # leading direction's own evaluation when it is clean (it has no small-
    # time transient), otherwise the plain log-norm
    grow = [i for i in range(len(estimates)) if estimates[i] > 0.25]
    rest = [i for i in range(len(estimates)) if estimates[i] <= 0.25]
    xs = np.log(np.maximum(norms, 1e-300))
    if grow:
        top = max(grow, key=lambda i: estimates[i])
        tvals = np.abs(h @ directions[top])
        if np.all(tvals > 0):
            steps = np.diff(np.log(tvals))
            if steps.size and np.mean(steps > 0) >= 0.8:
                xs = np.log(tvals)
    for group, growing in ((grow, True), (rest, False)):
        if not group:
            continue
        order_g, exps, sprs = _group_exponents_by_volume(
            h, norms, xs, [directions[i] for i in group], growing)
        for j, gi in enumerate(order_g):
            i = group[gi]
            if np.isfinite(exps[j]):
                estimates[i] = exps[j]
                spreads[i] = min(spreads[i], sprs[j]) if np.isfinite(sprs[j]) \
                    else spreads[i]

    order = np.argsort(estimates)[::-1]
    directions = [directions[i] for i in order]
    estimates = [estimates[i] for i in order]
    spreads = [spreads[i] for i in order]
    if max(spreads) > tol_cluster:
        worst = int(np.argmax(spreads))
        raise UnresolvedStrataError(
            f"direction with exponent {estimates[worst]:.3f} has estimator "
            f"uncertainty {spreads[worst]:.3f} > tol_cluster={tol_cluster}; "
            "more returns are needed")

    clusters = [[0]]
    for i in range(1, len(estimates)):
        if estimates[clusters[-1][-1]] - estimates[i] < tol_cluster:
            clusters[-1].append(i)
        else:
            clusters.append([i])

    strata = []
    for cl in reversed(clusters):     # ascending exponent order
        exps = tuple(estimates[i] for i in cl)
        basis = orth_basis(np.column_stack([directions[i] for i in cl]))
        strata.append(Stratum(exponent=float(np.mean(exps)),
                              member_exponents=exps, basis=basis))
    return LyapunovFiltration(strata=tuple(strata), n_loops=n,
                              tol_cluster=tol_cluster)


@dataclass(frozen=True)
class GapDecision:
    """The conjectural spectral-gap rule from the end invariant.

    The underlying algorithm is speculative: the deviation theory backing it
    is established for generic data, while the rays arising from positive
    injectivity radius are exactly the non-generic ones.  Every decision is
    therefore labeled conjectural.
    """

    gap_predicted: bool
    zero_stratum_dim: int
    genus: int
    conjectural: bool = True

    def to_json(self):
        return {"gap_predicted": self.gap_predicted,
                "zero_stratum_dim": self.zero_stratum_dim,
                "genus": self.genus, "conjectural": True}


def gap_decision_from_end_invariant(filt: LyapunovFiltration, genus,
                                    projection=None) -> GapDecision:
    """Conjectural rule: the gap holds when dim F_0 equals the genus.

    F_0 collects the strata with nonpositive exponent.  When a projection
    from visitation space onto the 2g-dimensional homology is supplied, the
    filtration is pushed through it before the dimension test.
    """
    if genus < 1:
        raise ValueError("genus must be at least 1")
    basis = filt.zero_stratum_basis()
    if projection is not None:
        q = np.asarray(projection, dtype=float)
        if q.shape[0] != basis.shape[0]:
            raise ValueError("projection rows must match visitation dimension")
        basis = subspace_intersection(orth_basis(q), basis)
    dim = basis.shape[1]
    return GapDecision(gap_predicted=(dim == genus), zero_stratum_dim=dim,
                       genus=genus)


# ---------------------------------------------------------------------------
# synthetic cross-check against the exact eigenvalue splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PaCrossCheck:
    ok: bool
    recovered_exponents: tuple
    recovered_dims: tuple
    expected_exponents: tuple
    expected_dims: tuple
    max_error: float

    def to_json(self):
        return {"ok": self.ok,
                "recovered_exponents": list(self.recovered_exponents),
                "recovered_dims": list(self.recovered_dims),
                "expected_exponents": list(self.expected_exponents),
                "expected_dims": list(self.expected_dims),
                "max_error": self.max_error}


def pa_cross_check(matrix: SymplecticMatrix, n_terms=48, seed=0,
                   tol_cluster=0.25, tol_exponent=0.05) -> PaCrossCheck:
    """Feed synthetic loop vectors M^n h0 to the filtration and compare.

    The recovered strata must match the modulus splitting of the matrix:
    dimensions exactly, exponents within ``tol_exponent`` of
    log(rate_i)/log(rate_max).  A starting vector that accidentally misses
    an invariant subspace is re-sampled; persistent failure raises.
    """
    split = eigen_split(matrix)
    if not split.pairs:
        raise ValueError("matrix has no off-circle spectrum to cross-check")
    top = np.log(max(p.rate for p in split.pairs))
    expected = []
    for p in split.pairs:
        expected.append((-np.log(p.rate) / top, p.dim))
    if split.unit_dim:
        expected.append((0.0, split.unit_dim))
    for p in split.pairs:
        expected.append((np.log(p.rate) / top, p.dim))
    expected.sort(key=lambda e: e[0])
    expected_exps = tuple(e[0] for e in expected)
    expected_dims = tuple(e[1] for e in expected)

    subspaces = [p.expanding for p in split.pairs] + \
                [p.contracting for p in split.pairs]
    if split.unit_dim:
        subspaces.append(split.unit_basis)

    rng = np.random.default_rng(seed)
    rows = matrix.rows()
    h0 = None
    for _ in range(10):
        cand = rng.integers(-5, 6, size=matrix.dim)
        if not cand.any():
            continue
        fc = cand.astype(float)
        if all(np.linalg.norm(b.T @ fc) > 1e-8 * np.linalg.norm(fc)
               for b in subspaces):
            h0 = [int(c) for c in cand]
            break
    if h0 is None:
        raise GenericityFailureError(
            "could not sample a starting vector meeting every stratum")

    from ._exact import mat_mul
    vecs = [h0]
    cur = h0
    for _ in range(n_terms):
        cur = [sum(r[j] * cur[j] for j in range(len(cur))) for r in rows]
        vecs.append(cur)
    filt = filtration(vecs, tol_cluster=tol_cluster)

    rec_exps = filt.exponents
    rec_dims = tuple(s.dim for s in filt.strata)
    if rec_dims != expected_dims or len(rec_exps) != len(expected_exps):
        return PaCrossCheck(False, rec_exps, rec_dims, expected_exps,
                            expected_dims, float("inf"))
    max_err = max(abs(r - e) for r, e in zip(rec_exps, expected_exps))
    return PaCrossCheck(max_err <= tol_exponent, rec_exps, rec_dims,
                        expected_exps, expected_dims, float(max_err))
