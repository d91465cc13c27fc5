"""Families of inner products t -> G(t) on the fiber cohomology of an end.

Each profile models one regime of the time-dependent metric on a tubular
end: a clean exponential expanding/contracting splitting, the periodic
pseudo-Anosov case generated by a symplectic matrix, per-direction
polynomial weights, and sampled data interpolated on the matrix-log scale
so positive definiteness is unconditional.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from ._linalg import check_spd, spd_inv_sqrt, spd_log, spd_sqrt, sym_exp
from .errors import (DegenerateWindowError, DimensionMismatchError,
                     NotPositiveDefiniteError, OutOfRangeError)
from .symplectic import EigenSplit, SymplecticMatrix, eigen_split


@dataclass(frozen=True)
class Split:
    """A candidate expanding/contracting decomposition with rate constants.

    The hypothesis the constants encode: on the expanding side the norm grows
    at least like c_plus * e^{rate * dt}, on the contracting side it decays at
    least like c_minus * e^{-rate * dt}, for every ordered pair of times.
    """

    expanding: np.ndarray
    contracting: np.ndarray
    rate: float
    c_plus: float = 1.0
    c_minus: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "expanding", np.atleast_2d(np.asarray(self.expanding, float)))
        object.__setattr__(self, "contracting", np.atleast_2d(np.asarray(self.contracting, float)))
        if self.rate <= 0 or self.c_plus <= 0 or self.c_minus <= 0:
            raise ValueError("rate and constants must be positive")

    @property
    def dim(self):
        return self.expanding.shape[0]

    def basis(self):
        return np.hstack([self.expanding, self.contracting])


class NormProfile:
    """Base class; subclasses provide ``gram`` and a ``kind`` tag.

    Besides the Gram matrix itself, profiles expose a factored evaluation
    A(t) with G(t) = A(t)^T A(t) and the relative transport A(t2) A(t1)^{-1}.
    Norms and discretizations work through these: for strongly expanding
    families the Gram matrix has condition number like e^{4at} and quadratic
    forms in it lose the contracting directions, while factors and transports
    between nearby times stay well conditioned.
    """

    kind = "abstract"
    dim = 0

    def gram(self, t):
        raise NotImplementedError

    def gram_factor(self, t):
        """Any A(t) with A(t)^T A(t) = G(t); default is the SPD square root."""
        return spd_sqrt(self.gram(t))

    def transport(self, t2, t1):
        """The frame change A(t2) A(t1)^{-1}; stable when |t2 - t1| is small."""
        return self.gram_factor(t2) @ spd_inv_sqrt(self.gram(t1))

    def float_horizon(self):
        """Largest time at which factored norms of decaying directions are
        trustworthy in double precision; +inf when evaluation is exact."""
        return np.inf

    def norm(self, t, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise DimensionMismatchError(
                f"vector has shape {v.shape}, profile dimension is {self.dim}")
        return float(np.linalg.norm(self.gram_factor(t) @ v))

    def gram_grid(self, ts):
        return np.stack([self.gram(float(t)) for t in ts])

    def classify_growth(self, v, window, samples=200):
        """Least-squares exponent of log ||v||_t over the window, with fit r^2."""
        t0, t1 = float(window[0]), float(window[1])
        if not (t1 > t0) or samples < 10:
            raise DegenerateWindowError(
                f"window [{t0}, {t1}] with {samples} samples is degenerate")
        ts = np.linspace(t0, t1, samples)
        logs = np.array([np.log(self.norm(t, v)) for t in ts])
        a = np.vstack([ts, np.ones_like(ts)]).T
        coef, res, _, _ = np.linalg.lstsq(a, logs, rcond=None)
        total = float(np.sum((logs - logs.mean()) ** 2))
        r2 = 1.0 if total == 0 else 1.0 - float(res[0]) / total if res.size else 1.0
        return GrowthFit(exponent=float(coef[0]), r2=r2)

    def suggest_split(self):
        """Profile-specific candidate Split, or None when no dichotomy exists."""
        return None

    def envelope_directions(self):
        """Candidate directions for the slowly-varying-weight test."""
        return [np.eye(self.dim)[:, i] for i in range(self.dim)]

    def to_json(self):
        raise NotImplementedError


@dataclass(frozen=True)
class GrowthFit:
    exponent: float
    r2: float


class ExponentialSplitProfile(NormProfile):
    """Exact exponential dichotomy: rates +-a on complementary subspaces.

    In the coordinates of the supplied bases the Gram matrix is
    diag(c_plus^2 e^{2at} I, c_minus^2 e^{-2at} I); the bases need not be
    orthogonal but must jointly span.
    """

    kind = "exponential_split"

    def __init__(self, plus_basis, minus_basis, rate, c_plus=1.0, c_minus=1.0):
        plus = np.atleast_2d(np.asarray(plus_basis, dtype=float))
        minus = np.atleast_2d(np.asarray(minus_basis, dtype=float))
        if plus.shape[0] != minus.shape[0]:
            raise DimensionMismatchError("bases live in different spaces")
        n = plus.shape[0]
        if plus.shape[1] + minus.shape[1] != n:
            raise NotPositiveDefiniteError("the two bases must jointly span")
        p = np.hstack([plus, minus])
        if np.linalg.matrix_rank(p) != n:
            raise NotPositiveDefiniteError("expanding + contracting bases are degenerate")
        if rate <= 0 or c_plus <= 0 or c_minus <= 0:
            raise ValueError("rate and scale constants must be positive")
        self.dim = n
        self.rate = float(rate)
        self.c_plus = float(c_plus)
        self.c_minus = float(c_minus)
        self.plus_basis = plus
        self.minus_basis = minus
        self._p_inv = np.linalg.inv(p)
        self._k_plus = plus.shape[1]

    @classmethod
    def standard(cls, n_plus, n_minus, rate=1.0, c_plus=1.0, c_minus=1.0):
        n = n_plus + n_minus
        eye = np.eye(n)
        return cls(eye[:, :n_plus], eye[:, n_plus:], rate, c_plus, c_minus)

    def _diag(self, t):
        k = self._k_plus
        d = np.empty(self.dim)
        d[:k] = self.c_plus * np.exp(self.rate * t)
        d[k:] = self.c_minus * np.exp(-self.rate * t)
        return d

    def gram(self, t):
        d = self._diag(t) ** 2
        return self._p_inv.T @ np.diag(d) @ self._p_inv

    def gram_factor(self, t):
        return self._diag(t)[:, None] * self._p_inv

    def transport(self, t2, t1):
        return np.diag(self._diag(t2) / self._diag(t1))

    def suggest_split(self):
        # model satisfies its own two-point hypothesis with c = 1; keep slack
        return Split(self.plus_basis, self.minus_basis,
                     rate=0.95 * self.rate, c_plus=0.9, c_minus=1.1)

    def to_json(self):
        return {"kind": self.kind, "rate": self.rate,
                "c_plus": self.c_plus, "c_minus": self.c_minus,
                "plus_basis": self.plus_basis.tolist(),
                "minus_basis": self.minus_basis.tolist()}


class PeriodicPAProfile(NormProfile):
    """Periodic family generated by a symplectic matrix: G(t+1) = M^T G(t) M.

    On [0, 1] the family follows the affine-invariant geodesic between G(0)
    and M^T G(0) M, which is the canonical smooth positive-definite
    interpolation; integer translates are exact integer matrix powers.
    Construction refuses matrices with non-semisimple unit-circle spectrum:
    the periodic growth model has no stated meaning for such monodromies.
    """

    kind = "periodic_pa"

    def __init__(self, matrix, base_gram=None, tol=1e-9):
        if not isinstance(matrix, SymplecticMatrix):
            matrix = SymplecticMatrix(matrix)
        self.matrix = matrix
        self.dim = matrix.dim
        self.eigen: EigenSplit = eigen_split(matrix, tol)
        if not self.eigen.semisimple_on_circle:
            raise ValueError(
                "unit-circle spectrum has a nontrivial Jordan block; "
                "the periodic growth model does not apply")
        g0 = np.eye(self.dim) if base_gram is None else check_spd(base_gram, "base gram")
        self._g0 = np.asarray(g0, dtype=float)
        a = matrix.to_array()
        g1 = a.T @ self._g0 @ a
        self._sqrt0 = spd_sqrt(self._g0)
        inv_sqrt0 = spd_inv_sqrt(self._g0)
        self._log_mid = spd_log(inv_sqrt0 @ g1 @ inv_sqrt0)
        self._powers = {0: np.eye(self.dim)}
        self._frac_cache = {}
        self._verify_periodicity()

    def _power(self, n):
        if n not in self._powers:
            self._powers[n] = np.array(self.matrix.power(n), dtype=float)
        return self._powers[n]

    def _frac_factors(self, s):
        """(G_s^{1/2}, G_s^{-1/2}) for the geodesic interpolant at s in [0, 1)."""
        key = round(s, 12)
        if key not in self._frac_cache:
            g = self._sqrt0 @ sym_exp(s * self._log_mid) @ self._sqrt0
            self._frac_cache[key] = (spd_sqrt(g), spd_inv_sqrt(g))
        return self._frac_cache[key]

    def _fractional(self, s):
        root, _ = self._frac_factors(s)
        return root @ root

    @staticmethod
    def _split_time(t):
        t = float(t)
        n = int(np.floor(t))
        return n, t - n

    def gram(self, t):
        n, s = self._split_time(t)
        g = self._fractional(s)
        if n == 0:
            return g
        pn = self._power(n)
        return pn.T @ g @ pn

    def gram_factor(self, t):
        n, s = self._split_time(t)
        root, _ = self._frac_factors(s)
        return root if n == 0 else root @ self._power(n)

    def transport(self, t2, t1):
        n2, s2 = self._split_time(t2)
        n1, s1 = self._split_time(t1)
        root2, _ = self._frac_factors(s2)
        _, invroot1 = self._frac_factors(s1)
        mid = np.array(self.matrix.power(n2 - n1), dtype=float)
        return root2 @ mid @ invroot1

    def float_horizon(self):
        if not self.eigen.pairs:
            return np.inf
        top = max(p.rate for p in self.eigen.pairs)
        # contracting quadratic forms lose ~ rate^{2t} * eps of relative accuracy
        return 13.0 * np.log(10.0) / (2.0 * np.log(top))

    def _verify_periodicity(self, grid=None):
        ts = np.linspace(0.0, 2.0, 9) if grid is None else np.asarray(grid, float)
        a = self.matrix.to_array()
        worst = 0.0
        for t in ts:
            g = self.gram(t)
            lhs = self.gram(t + 1.0)
            rhs = a.T @ g @ a
            worst = max(worst, np.abs(lhs - rhs).max() / max(np.abs(g).max(), 1e-300))
        if worst > 1e-10:
            raise NotPositiveDefiniteError(
                f"periodic consistency violated: relative error {worst:.2e}")
        return worst

    def suggest_split(self):
        if self.eigen.unit_dim > 0 or not self.eigen.pairs:
            return None
        rate = 0.9 * np.log(min(p.rate for p in self.eigen.pairs))
        plus = self.eigen.expanding_basis()
        minus = self.eigen.contracting_basis()
        # calibrate the two-point constants empirically over two periods
        ts = np.linspace(0.0, 2.0, 21)
        c_plus, c_minus = np.inf, 0.0
        for basis, side in ((plus, "+"), (minus, "-")):
            for j in range(basis.shape[1]):
                v = basis[:, j]
                norms = np.array([self.norm(t, v) for t in ts])
                for i1 in range(len(ts)):
                    for i2 in range(i1):
                        dt = ts[i1] - ts[i2]
                        ratio = norms[i1] / norms[i2]
                        if side == "+":
                            c_plus = min(c_plus, ratio / np.exp(rate * dt))
                        else:
                            c_minus = max(c_minus, ratio / np.exp(-rate * dt))
        return Split(plus, minus, rate=rate,
                     c_plus=0.95 * c_plus, c_minus=1.05 * c_minus)

    def to_json(self):
        return {"kind": self.kind, "matrix": self.matrix.to_json(),
                "base_gram": self._g0.tolist()}


class PolynomialProfile(NormProfile):
    """Diagonal family with caller-supplied positive weights h_i(t).

    The Gram matrix is diag(h_1(t), ..., h_n(t)), so the i-th coordinate
    direction has norm sqrt(h_i(t)).  Weights are callables or polynomial
    coefficient lists (ascending in t).
    """

    kind = "polynomial"

    def __init__(self, weights):
        self._weights = []
        self._coeffs = []
        for w in weights:
            if callable(w):
                self._weights.append(w)
                self._coeffs.append(None)
            else:
                coeffs = [float(c) for c in w]
                self._weights.append(np.polynomial.Polynomial(coeffs))
                self._coeffs.append(coeffs)
        self.dim = len(self._weights)
        if self.dim == 0:
            raise DimensionMismatchError("at least one weight required")

    def weight(self, i, t):
        val = float(self._weights[i](t))
        if val <= 0:
            raise NotPositiveDefiniteError(
                f"weight {i} is {val} at t={t}; weights must stay positive")
        return val

    def gram(self, t):
        return np.diag([self.weight(i, t) for i in range(self.dim)])

    def gram_factor(self, t):
        return np.diag([np.sqrt(self.weight(i, t)) for i in range(self.dim)])

    def transport(self, t2, t1):
        return np.diag([np.sqrt(self.weight(i, t2) / self.weight(i, t1))
                        for i in range(self.dim)])

    def to_json(self):
        if any(c is None for c in self._coeffs):
            raise ValueError("callable weights are not serializable")
        return {"kind": self.kind, "weights": self._coeffs}


class SampledProfile(NormProfile):
    """Knot data (t_k, G_k) interpolated linearly in the matrix logarithm.

    Knots reproduce exactly; between knots the log-linear path keeps every
    evaluation symmetric positive definite.  Queries outside the knot range
    raise unless extrapolation is enabled, in which case the first/last
    log-segment slope is continued.
    """

    kind = "sampled"

    def __init__(self, times, grams, extrapolate=False):
        times = np.asarray(times, dtype=float)
        if times.ndim != 1 or len(times) < 2 or np.any(np.diff(times) <= 0):
            raise OutOfRangeError("times must be strictly increasing, length >= 2")
        mats = [check_spd(g, f"gram at t={t}") for g, t in zip(grams, times)]
        if len(mats) != len(times):
            raise DimensionMismatchError("times and grams must align")
        self.times = times
        self.grams = [np.asarray(g, dtype=float) for g in mats]
        self.dim = self.grams[0].shape[0]
        if any(g.shape != (self.dim, self.dim) for g in self.grams):
            raise DimensionMismatchError("all gram matrices must share one size")
        self.extrapolate = bool(extrapolate)
        self._logs = [spd_log(g) for g in self.grams]

    @classmethod
    def from_csv(cls, path, extrapolate=False):
        times, grams = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                vals = [float(x) for x in row]
                n = int(round(np.sqrt(len(vals) - 1)))
                if n * n != len(vals) - 1:
                    raise DimensionMismatchError(
                        f"row of length {len(vals)} is not 1 + n^2")
                times.append(vals[0])
                grams.append(np.array(vals[1:]).reshape(n, n))
        return cls(times, grams, extrapolate=extrapolate)

    def gram(self, t):
        t = float(t)
        idx = np.searchsorted(self.times, t)
        if idx < len(self.times) and self.times[idx] == t:
            return self.grams[idx].copy()
        if t < self.times[0] or t > self.times[-1]:
            if not self.extrapolate:
                raise OutOfRangeError(
                    f"t={t} outside [{self.times[0]}, {self.times[-1]}] "
                    "and extrapolation is disabled")
            k = 0 if t < self.times[0] else len(self.times) - 2
        else:
            k = max(0, idx - 1)
        t0, t1 = self.times[k], self.times[k + 1]
        w = (t - t0) / (t1 - t0)
        return sym_exp((1.0 - w) * self._logs[k] + w * self._logs[k + 1])

    def to_json(self):
        return {"kind": self.kind, "times": self.times.tolist(),
                "grams": [g.tolist() for g in self.grams],
                "extrapolate": self.extrapolate}


@dataclass(frozen=True)
class SplitWitness:
    side: str
    t_high: float
    t_low: float
    direction: np.ndarray
    margin: float


@dataclass(frozen=True)
class SplitCheck:
    ok: bool
    worst: SplitWitness

    def __bool__(self):
        return self.ok


def verify_split_hypothesis(profile: NormProfile, split: Split, grid=None,
                            directions=16, seed=0) -> SplitCheck:
    """Sample the two-point growth/decay inequalities of a candidate split.

    Every ordered grid pair and sampled unit direction is tested; the result
    carries the minimizing witness (most negative margin) either way.  A
    passing check is evidence, not a proof: it samples, it does not certify.
    """
    if split.dim != profile.dim:
        raise DimensionMismatchError("split and profile dimensions differ")
    if grid is None:
        t_hi = float(min(20.0, profile.float_horizon()))
        ts = np.linspace(0.0, t_hi, 41)
    else:
        ts = np.asarray(grid, float)
    rng = np.random.default_rng(seed)

    def sample_dirs(basis):
        k = basis.shape[1]
        if k == 0:
            return np.zeros((profile.dim, 0))
        cols = [basis[:, [j]] for j in range(k)]
        extra = basis @ rng.standard_normal((k, max(0, directions - k)))
        mat = np.hstack(cols + ([extra] if extra.size else []))
        return mat / np.linalg.norm(mat, axis=0)

    norms = {}

    def norm_at(i, v_key, v):
        key = (i, v_key)
        if key not in norms:
            norms[key] = profile.norm(ts[i], v)
        return norms[key]

    ok = True
    worst = None
    for side, basis in (("+", split.expanding), ("-", split.contracting)):
        dirs = sample_dirs(basis)
        for j in range(dirs.shape[1]):
            v = dirs[:, j]
            for i1 in range(len(ts)):
                for i2 in range(i1):
                    dt = ts[i1] - ts[i2]
                    lo = norm_at(i2, (side, j), v)
                    hi = norm_at(i1, (side, j), v)
                    if side == "+":
                        margin = hi - split.c_plus * np.exp(split.rate * dt) * lo
                    else:
                        margin = split.c_minus * np.exp(-split.rate * dt) * lo - hi
                    rel = margin / max(hi, lo, 1e-300)
                    if worst is None or rel < worst.margin:
                        worst = SplitWitness(side=side, t_high=float(ts[i1]),
                                             t_low=float(ts[i2]), direction=v.copy(),
                                             margin=float(rel))
                    if rel < 0:
                        ok = False
    return SplitCheck(ok=ok, worst=worst)


def profile_from_json(data):
    """Rebuild a profile from its JSON description (strict on the kind tag)."""
    kind = data.get("kind")
    if kind == "exponential_split":
        return ExponentialSplitProfile(
            np.array(data["plus_basis"], dtype=float),
            np.array(data["minus_basis"], dtype=float),
            rate=data["rate"], c_plus=data.get("c_plus", 1.0),
            c_minus=data.get("c_minus", 1.0))
    if kind == "periodic_pa":
        base = data.get("base_gram")
        return PeriodicPAProfile(
            SymplecticMatrix.from_json(data["matrix"]),
            base_gram=None if base is None else np.array(base, dtype=float))
    if kind == "polynomial":
        return PolynomialProfile(data["weights"])
    if kind == "sampled":
        return SampledProfile(np.array(data["times"], dtype=float),
                              [np.array(g, dtype=float) for g in data["grams"]],
                              extrapolate=data.get("extrapolate", False))
    raise OutOfRangeError(f"unknown profile kind {kind!r}")
