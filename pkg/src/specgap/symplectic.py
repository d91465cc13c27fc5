"""Exact arithmetic on integer symplectic matrices.

Validation of the defining identity M^T J M = J runs in exact integer
arithmetic, characteristic polynomials are exact, and the unit-circle
eigenvalue decision is certificate grade: the palindromic characteristic
polynomial is tested at +-1 and then pushed through y = x + 1/x, where
conjugate pairs on the circle become real roots in (-2, 2) counted by a
rational Sturm chain.  A float eigendecomposition grouped by modulus is
provided for the growth analysis downstream, cross-checked against the
exact certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import _exact
from ._linalg import orth_basis
from .errors import (NotSquareError, NotSymplecticError, OddDimensionError,
                     ToleranceConflictError)


def standard_form(g):
    """The block form [[0, I], [-I, 0]] on R^{2g}, as integer lists."""
    j = [[0] * (2 * g) for _ in range(2 * g)]
    for i in range(g):
        j[i][g + i] = 1
        j[g + i][i] = -1
    return j


def _as_int_rows(entries):
    rows = []
    for row in entries:
        rows.append([int(x) for x in row])
    return rows


class SymplecticMatrix:
    """An element of Sp(2g, Z), validated exactly at construction."""

    def __init__(self, entries):
        rows = _as_int_rows(entries)
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise NotSquareError("entries do not form a square matrix")
        if n == 0 or n % 2 != 0:
            raise OddDimensionError(f"dimension {n} is not a positive even number")
        g = n // 2
        j = standard_form(g)
        mt = _exact.mat_transpose(rows)
        if _exact.mat_mul(_exact.mat_mul(mt, j), rows) != j:
            raise NotSymplecticError("M^T J M != J in exact arithmetic")
        self.g = g
        self.entries = tuple(tuple(r) for r in rows)
        # det = +1 is implied by symplecticity; keep it as a sanity assertion
        assert _exact.det_int(rows) == 1

    @property
    def dim(self):
        return 2 * self.g

    def to_array(self):
        return np.array(self.entries, dtype=float)

    def rows(self):
        return [list(r) for r in self.entries]

    def __matmul__(self, other):
        return SymplecticMatrix(_exact.mat_mul(self.rows(), other.rows()))

    def inverse(self):
        """Exact inverse -J M^T J (uses J^2 = -I)."""
        j = standard_form(self.g)
        prod = _exact.mat_mul(_exact.mat_mul(j, _exact.mat_transpose(self.rows())), j)
        return SymplecticMatrix(_exact.mat_scale(prod, -1))

    def conjugate_by(self, other):
        """other @ self @ other^{-1}, exactly."""
        return other @ self @ other.inverse()

    def power(self, k):
        rows = _exact.mat_identity(self.dim)
        base = self.rows() if k >= 0 else self.inverse().rows()
        for _ in range(abs(k)):
            rows = _exact.mat_mul(rows, base)
        return rows

    def __eq__(self, other):
        return isinstance(other, SymplecticMatrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        return f"SymplecticMatrix(g={self.g}, entries={[list(r) for r in self.entries]})"

    def to_json(self):
        return {"genus": self.g, "entries": [list(r) for r in self.entries]}

    @classmethod
    def from_json(cls, data):
        m = cls(data["entries"])
        if "genus" in data and data["genus"] != m.g:
            raise NotSymplecticError(
                f"declared genus {data['genus']} does not match size {m.dim}")
        return m


def validate_symplectic(entries):
    """Validate raw integer entries and wrap them; rejection is exact."""
    return SymplecticMatrix(entries)


def symplectic_direct_sum(a, b):
    """The direct sum of symplectic maps, in the standard block convention.

    A plain block-diagonal stacking breaks M^T J M = J; the (A B; C D) blocks
    of the two factors have to be interleaved instead.
    """
    ga, gb = a.g, b.g
    g = ga + gb
    out = [[0] * (2 * g) for _ in range(2 * g)]
    def put(m, gm, row_off, col_off):
        for i in range(2 * gm):
            for k in range(2 * gm):
                r = (row_off + i) if i < gm else (g + row_off + i - gm)
                c = (col_off + k) if k < gm else (g + col_off + k - gm)
                out[r][c] = m.entries[i][k]
    put(a, ga, 0, 0)
    put(b, gb, ga, ga)
    return SymplecticMatrix(out)


@dataclass(frozen=True)
class CharPoly:
    """Exact characteristic polynomial; coefficients descending, monic."""

    coefficients: tuple

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def ascending(self):
        return list(reversed(self.coefficients))

    @property
    def is_palindromic(self):
        c = self.coefficients
        return all(c[i] == c[len(c) - 1 - i] for i in range(len(c)))

    def eval(self, x):
        return _exact.poly_eval(self.ascending(), x)

    def to_json(self):
        return {"coefficients": list(self.coefficients)}


def char_poly(m: SymplecticMatrix) -> CharPoly:
    asc = _exact.charpoly_int(m.rows())
    return CharPoly(tuple(reversed(asc)))


@dataclass(frozen=True)
class UnitCircleCertificate:
    """Exact decision record for eigenvalues of modulus one.

    branch: which test fired first ("root_at_one", "root_at_minus_one",
    "sturm", "none"); sturm_count is the number of distinct conjugate pairs
    strictly inside the upper half circle.
    """

    verdict: bool
    branch: str
    mult_one: int
    mult_minus_one: int
    sturm_count: int
    analysis: _exact.UnitCircleAnalysis = field(repr=False)

    def to_json(self):
        return {
            "verdict": self.verdict,
            "branch": self.branch,
            "mult_one": self.mult_one,
            "mult_minus_one": self.mult_minus_one,
            "sturm_count": self.sturm_count,
        }


def certify_unit_circle(poly_ascending) -> UnitCircleCertificate:
    """Run the exact unit-circle decision on an integer polynomial."""
    analysis = _exact.analyze_unit_circle(poly_ascending)
    if analysis.mult_one > 0:
        branch = "root_at_one"
    elif analysis.mult_minus_one > 0:
        branch = "root_at_minus_one"
    elif analysis.pair_count > 0:
        branch = "sturm"
    else:
        branch = "none"
    return UnitCircleCertificate(
        verdict=branch != "none",
        branch=branch,
        mult_one=analysis.mult_one,
        mult_minus_one=analysis.mult_minus_one,
        sturm_count=analysis.pair_count,
        analysis=analysis,
    )


def has_unit_circle_eigenvalue(m: SymplecticMatrix) -> UnitCircleCertificate:
    """Exact decision: does m have an eigenvalue of modulus one?"""
    return certify_unit_circle(char_poly(m).ascending())


# ---------------------------------------------------------------------------
# eigenvalue split by modulus (float, cross-checked against the certificate)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GrowthPair:
    """A reciprocal pair of invariant subspaces with growth rate > 1.

    ``rate`` is the common modulus of the eigenvalues on the expanding side;
    complex quartets are grouped by modulus, so ``dim`` may exceed one even
    for simple eigenvalues.
    """

    rate: float
    dim: int
    expanding: np.ndarray
    contracting: np.ndarray


@dataclass(frozen=True)
class EigenSplit:
    """Invariant splitting of R^{2g} by eigenvalue modulus."""

    unit_dim: int
    unit_basis: np.ndarray
    pairs: tuple
    semisimple_on_circle: bool

    @property
    def dim(self):
        return self.unit_dim + 2 * sum(p.dim for p in self.pairs)

    def expanding_basis(self):
        if not self.pairs:
            return np.zeros((self.unit_basis.shape[0], 0))
        return np.hstack([p.expanding for p in self.pairs])

    def contracting_basis(self):
        if not self.pairs:
            return np.zeros((self.unit_basis.shape[0], 0))
        return np.hstack([p.contracting for p in self.pairs])


def _invariant_subspace(a, selector):
    """Orthonormal basis of the real invariant subspace for selected eigenvalues."""
    t, z, sdim = sla.schur(a, output="real", sort=selector)
    return z[:, :sdim], sdim


def eigen_split(m: SymplecticMatrix, tol: float = 1e-9) -> EigenSplit:
    """Group the spectrum by modulus: unit-circle block plus reciprocal pairs.

    The {|lambda| = 1} classification must agree with the exact certificate;
    a contradiction at the given tolerance raises ToleranceConflictError.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a = m.to_array()
    cert = has_unit_circle_eigenvalue(m)
    eigvals = np.linalg.eigvals(a)
    mods = np.abs(eigvals)
    on_circle = np.abs(mods - 1.0) <= tol
    if bool(on_circle.any()) != cert.verdict:
        raise ToleranceConflictError(
            f"numeric modulus grouping at tol={tol} contradicts the exact "
            f"certificate (branch={cert.branch})")

    unit_dim = int(on_circle.sum())
    n = m.dim

    if unit_dim:
        unit_basis, sdim = _invariant_subspace(
            a, lambda re, im: abs(np.hypot(re, im) - 1.0) <= tol)
        if sdim != unit_dim:
            raise ToleranceConflictError(
                "invariant-subspace dimension disagrees with eigenvalue count")
        # geometric multiplicity per distinct circle eigenvalue vs algebraic
        semisimple = True
        circle_vals = eigvals[on_circle]
        groups = []
        for lam in circle_vals:
            for grp in groups:
                if abs(grp[0] - lam) <= 10 * tol:
                    grp[1] += 1
                    break
            else:
                groups.append([lam, 1])
        for lam, alg in groups:
            s = np.linalg.svd(a - lam * np.eye(n), compute_uv=False)
            geo = int(np.sum(s <= max(tol, 1e-12) * max(s[0], 1.0)))
            if geo < alg:
                semisimple = False
                break
    else:
        unit_basis = np.zeros((n, 0))
        semisimple = True

    # cluster growth rates log|lambda| > 0
    logs = sorted(np.log(mods[mods > 1.0 + tol]))
    clusters = []
    for v in logs:
        if clusters and v - clusters[-1][-1] <= tol:
            clusters[-1].append(v)
        else:
            clusters.append([v])
    pairs = []
    for cl in clusters:
        lo, hi = np.exp(cl[0] - tol), np.exp(cl[-1] + tol)
        expanding, d_plus = _invariant_subspace(
            a, lambda re, im: lo <= np.hypot(re, im) <= hi)
        contracting, d_minus = _invariant_subspace(
            a, lambda re, im: 1.0 / hi <= np.hypot(re, im) <= 1.0 / lo)
        if d_plus != d_minus:
            raise ToleranceConflictError(
                f"expanding/contracting dimensions differ ({d_plus} vs {d_minus})")
        rate = float(np.exp(np.mean(cl)))
        pairs.append(GrowthPair(rate=rate, dim=d_plus,
                                expanding=expanding, contracting=contracting))
    pairs.sort(key=lambda p: p.rate)

    split = EigenSplit(unit_dim=unit_dim, unit_basis=unit_basis,
                       pairs=tuple(pairs), semisimple_on_circle=semisimple)
    if split.dim != n:
        raise ToleranceConflictError(
            f"modulus grouping does not exhaust the space "
            f"({split.dim} of {n} dimensions)")
    return split


# ---------------------------------------------------------------------------
# generators, for sampling random elements in tests and the CLI verify suite
# ---------------------------------------------------------------------------

def standard_generators(g):
    """A standard finite generating set for Sp(2g, Z)."""
    gens = []
    if g == 1:
        gens.append(SymplecticMatrix([[0, -1], [1, 0]]))
        gens.append(SymplecticMatrix([[1, 1], [0, 1]]))
        return gens
    gens.append(SymplecticMatrix(standard_form(g)))
    # shear blocks [[I, B], [0, I]] for symmetric unit B
    for i in range(g):
        b = [[0] * g for _ in range(g)]
        b[i][i] = 1
        ent = [[0] * (2 * g) for _ in range(2 * g)]
        for r in range(g):
            ent[r][r] = 1
            ent[g + r][g + r] = 1
            for c in range(g):
                ent[r][g + c] = b[r][c]
        gens.append(SymplecticMatrix(ent))
    b = [[0] * g for _ in range(g)]
    b[0][1] = b[1][0] = 1
    ent = [[0] * (2 * g) for _ in range(2 * g)]
    for r in range(g):
        ent[r][r] = 1
        ent[g + r][g + r] = 1
        for c in range(g):
            ent[r][g + c] = b[r][c]
    gens.append(SymplecticMatrix(ent))
    # GL factor diag(U, U^{-T}) for an elementary U
    u = _exact.mat_identity(g)
    u[0][1] = 1
    uinv_t = _exact.mat_transpose(_exact.inverse_int(u))
    ent = [[0] * (2 * g) for _ in range(2 * g)]
    for r in range(g):
        for c in range(g):
            ent[r][c] = u[r][c]
            ent[g + r][g + c] = uinv_t[r][c]
    gens.append(SymplecticMatrix(ent))
    return gens


def random_word(g, max_length, rng):
    """A random product of standard generators and their inverses."""
    gens = standard_generators(g)
    length = int(rng.integers(1, max_length + 1))
    m = SymplecticMatrix(_exact.mat_identity(2 * g))
    for _ in range(length):
        gen = gens[int(rng.integers(len(gens)))]
        if rng.integers(2):
            gen = gen.inverse()
        m = m @ gen
    return m
