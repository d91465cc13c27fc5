"""Exact integer/rational computations behind the certificate-grade decisions.

Polynomials are lists of coefficients in ascending degree order.  Integer
polynomials stay in Python ints; Sturm chains run over ``fractions.Fraction``
so every sign is exact.  The central service is the unit-circle analysis of a
real integer polynomial: multiplicities at +-1, plus an exact count (and
isolation) of the conjugate pairs e^{+-i theta} among its roots, obtained by
the substitution y = x + 1/x which maps those pairs to real roots of a
half-degree polynomial in (-2, 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import acos, cos, sin


# ---------------------------------------------------------------------------
# polynomial primitives (coefficients ascending, index i <-> x**i)
# ---------------------------------------------------------------------------

def poly_trim(p):
    n = len(p)
    while n > 1 and p[n - 1] == 0:
        n -= 1
    return p[:n]


def poly_deg(p):
    p = poly_trim(p)
    return len(p) - 1


def poly_is_zero(p):
    return all(c == 0 for c in p)


def poly_eval(p, x):
    acc = 0
    for c in reversed(p):
        acc = acc * x + c
    return acc


def poly_add(p, q):
    n = max(len(p), len(q))
    return poly_trim([(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0)
                      for i in range(n)])


def poly_scale(p, a):
    return poly_trim([a * c for c in p])


def poly_sub(p, q):
    return poly_add(p, poly_scale(q, -1))


def poly_mul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return poly_trim(out)


def poly_derive(p):
    if len(p) <= 1:
        return [0]
    return [i * p[i] for i in range(1, len(p))]


def poly_divmod(p, q):
    """Euclidean division over the rationals; inputs may be int or Fraction."""
    p = [Fraction(c) for c in poly_trim(p)]
    q = [Fraction(c) for c in poly_trim(q)]
    if poly_is_zero(q):
        raise ZeroDivisionError("polynomial division by zero")
    quot = [Fraction(0)] * max(1, len(p) - len(q) + 1)
    rem = p[:]
    dq = len(q) - 1
    lead = q[-1]
    while len(rem) - 1 >= dq and not poly_is_zero(rem):
        k = len(rem) - 1 - dq
        coef = rem[-1] / lead
        quot[k] = coef
        for i in range(len(q)):
            rem[k + i] -= coef * q[i]
        rem = poly_trim(rem[:-1]) if rem[-1] == 0 else poly_trim(rem)
    return poly_trim(quot), poly_trim(rem)


def poly_exact_div(p, q):
    quot, rem = poly_divmod(p, q)
    if not poly_is_zero(rem):
        raise ArithmeticError("division is not exact")
    return quot


def poly_gcd(p, q):
    """Monic gcd over the rationals."""
    a = [Fraction(c) for c in poly_trim(p)]
    b = [Fraction(c) for c in poly_trim(q)]
    while not poly_is_zero(b):
        _, r = poly_divmod(a, b)
        a, b = b, r if not poly_is_zero(r) else [Fraction(0)]
    if poly_is_zero(a):
        return [Fraction(0)]
    return poly_scale(a, 1 / a[-1])


def poly_to_int_primitive(p):
    """Clear denominators and divide by the content; sign follows the lead."""
    from math import gcd, lcm
    fr = [Fraction(c) for c in poly_trim(p)]
    den = 1
    for c in fr:
        den = lcm(den, c.denominator)
    ints = [int(c * den) for c in fr]
    g = 0
    for c in ints:
        g = gcd(g, abs(c))
    if g == 0:
        return [0]
    ints = [c // g for c in ints]
    if ints[-1] < 0:
        ints = [-c for c in ints]
    return ints


def poly_squarefree(p):
    """Squarefree part p / gcd(p, p'), returned as a primitive integer poly."""
    g = poly_gcd(p, poly_derive(p))
    if poly_deg(g) == 0:
        return poly_to_int_primitive(p)
    return poly_to_int_primitive(poly_exact_div(p, g))


def poly_reciprocal(p):
    """x^deg(p) * p(1/x); valid when p(0) != 0 so the degree is preserved."""
    p = poly_trim(p)
    return poly_trim(list(reversed(p)))


def root_multiplicity(p, x0):
    """Exact multiplicity of the rational root x0 (0 when p(x0) != 0)."""
    mult = 0
    cur = [Fraction(c) for c in poly_trim(p)]
    factor = [Fraction(-x0), Fraction(1)]
    while poly_deg(cur) >= 1 and poly_eval(cur, Fraction(x0)) == 0:
        cur = poly_exact_div(cur, factor)
        mult += 1
    return mult, poly_to_int_primitive(cur)


# ---------------------------------------------------------------------------
# Sturm sequences over the rationals
# ---------------------------------------------------------------------------

def sturm_chain(p):
    chain = [[Fraction(c) for c in poly_trim(p)]]
    d = poly_derive(chain[0])
    if poly_is_zero(d):
        return chain
    chain.append(d)
    while True:
        _, r = poly_divmod(chain[-2], chain[-1])
        if poly_is_zero(r):
            break
        chain.append(poly_scale(r, -1))
    return chain


def _sign_variations(chain, x):
    signs = []
    for f in chain:
        v = poly_eval(f, Fraction(x))
        if v != 0:
            signs.append(1 if v > 0 else -1)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def sturm_count(p, lo, hi, chain=None):
    """Number of distinct real roots of p in the half-open interval (lo, hi].

    p must not vanish at lo; repeated roots are counted once.
    """
    if chain is None:
        chain = sturm_chain(p)
    return _sign_variations(chain, lo) - _sign_variations(chain, hi)


def isolate_real_roots(p, lo, hi):
    """Isolating intervals (a, b], one per distinct real root of p in (lo, hi].

    p is made squarefree first; endpoints are Fractions and p(lo), p(hi) must
    be nonzero.
    """
    q = poly_squarefree(p)
    if poly_deg(q) == 0:
        return []
    chain = sturm_chain(q)
    lo = Fraction(lo)
    hi = Fraction(hi)
    if poly_eval(q, lo) == 0 or poly_eval(q, hi) == 0:
        raise ValueError("isolation endpoints must not be roots")
    out = []
    stack = [(lo, hi, sturm_count(q, lo, hi, chain))]
    while stack:
        a, b, cnt = stack.pop()
        if cnt == 0:
            continue
        if cnt == 1:
            out.append((a, b))
            continue
        mid = (a + b) / 2
        while poly_eval(q, mid) == 0:
            mid = (a + mid) / 2
        left = sturm_count(q, a, mid, chain)
        stack.append((a, mid, left))
        stack.append((mid, b, cnt - left))
    out.sort()
    return out


def refine_root(p, a, b, bits=60):
    """Shrink the isolating interval (a, b] by bisection; returns a float root."""
    q = poly_squarefree(p)
    fa = poly_eval(q, Fraction(a))
    if fa == 0:
        return float(a)
    for _ in range(bits):
        mid = (Fraction(a) + Fraction(b)) / 2
        fm = poly_eval(q, mid)
        if fm == 0:
            return float(mid)
        if (fm > 0) == (fa > 0):
            a = mid
        else:
            b = mid
    return float((Fraction(a) + Fraction(b)) / 2)


# ---------------------------------------------------------------------------
# unit-circle analysis of integer polynomials
# ---------------------------------------------------------------------------

def _chebyshev_like(k):
    """Integer polynomial t_k(y) with x^k + x^(-k) = t_k(x + 1/x)."""
    if k == 0:
        return [2]
    prev, cur = [2], [0, 1]
    for _ in range(k - 1):
        prev, cur = cur, poly_sub(poly_mul([0, 1], cur), prev)
    return cur


def trace_polynomial(s):
    """For palindromic s of even degree 2m, the degree-m q with s(x) = x^m q(x+1/x)."""
    s = poly_trim(s)
    deg = poly_deg(s)
    if deg % 2 != 0:
        raise ValueError("palindromic core must have even degree")
    m = deg // 2
    if any(s[i] != s[deg - i] for i in range(deg + 1)):
        raise ValueError("polynomial is not palindromic")
    q = [s[m]]
    for k in range(1, m + 1):
        q = poly_add(q, poly_scale(_chebyshev_like(k), s[m + k]))
    return q


@dataclass(frozen=True)
class UnitCircleAnalysis:
    """Exact description of the unit-circle roots of an integer polynomial."""

    mult_one: int
    mult_minus_one: int
    pair_count: int               # distinct conjugate pairs off +-1
    core: tuple                   # palindromic core (ascending ints)
    trace_poly: tuple             # q(y) with core(x) = x^m q(x + 1/x)
    pair_intervals: tuple         # isolating (a, b] Fractions for q-roots in (-2, 2)

    @property
    def has_unit_root(self):
        return self.mult_one > 0 or self.mult_minus_one > 0 or self.pair_count > 0

    def pair_values(self):
        """Float e^{i theta} (theta in (0, pi)) per isolated conjugate pair."""
        vals = []
        for a, b in self.pair_intervals:
            y = refine_root(list(self.trace_poly), a, b)
            y = min(2.0, max(-2.0, y))
            theta = acos(y / 2.0)
            vals.append(complex(cos(theta), sin(theta)))
        vals.sort(key=lambda z: z.real, reverse=True)
        return vals


def analyze_unit_circle(p):
    """Locate all unit-circle roots of a real integer polynomial exactly.

    Only roots whose inverse is also a root can lie on the circle, so the
    analysis runs on gcd(p, reciprocal(p)); +-1 multiplicities are taken in
    that reciprocal-closed core, then the remaining palindromic part is
    pushed through y = x + 1/x and counted with a Sturm chain on (-2, 2).
    """
    p = poly_trim(list(p))
    if poly_deg(p) == 0:
        return UnitCircleAnalysis(0, 0, 0, tuple(p), (1,), ())
    if p[0] == 0:
        raise ValueError("zero is a root; polynomial cannot come from an invertible matrix")
    core = poly_to_int_primitive(poly_gcd(p, poly_reciprocal(p)))
    if poly_deg(core) == 0:
        return UnitCircleAnalysis(0, 0, 0, tuple(core), (1,), ())
    m1, rest = root_multiplicity(core, 1)
    m2, rest = root_multiplicity(rest, -1)
    if poly_deg(rest) == 0:
        return UnitCircleAnalysis(m1, m2, 0, tuple(core), (1,), ())
    q = trace_polynomial(rest)
    intervals = isolate_real_roots(q, Fraction(-2), Fraction(2))
    return UnitCircleAnalysis(m1, m2, len(intervals), tuple(core), tuple(q),
                              tuple(intervals))


# ---------------------------------------------------------------------------
# exact matrix helpers (lists of lists of ints)
# ---------------------------------------------------------------------------

def mat_dim(m):
    n = len(m)
    if any(len(row) != n for row in m):
        raise ValueError("matrix is not square")
    return n


def mat_mul(a, b):
    n = mat_dim(a)
    if mat_dim(b) != n:
        raise ValueError("dimension mismatch")
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_transpose(a):
    return [list(row) for row in zip(*a)]


def mat_identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_add(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_scale(a, c):
    return [[c * x for x in row] for row in a]


def charpoly_int(m):
    """Exact characteristic polynomial det(xI - M), ascending coefficients.

    Faddeev-LeVerrier recursion; every division by the step index is exact
    over the integers.
    """
    n = mat_dim(m)
    coeffs = [0] * (n + 1)
    coeffs[n] = 1
    mk = [row[:] for row in m]
    for k in range(1, n + 1):
        if k > 1:
            mk = mat_mul(m, mat_add(mk, mat_scale(mat_identity(n), coeffs[n - k + 1])))
        tr = sum(mk[i][i] for i in range(n))
        if tr % k != 0:
            raise ArithmeticError("non-integer trace step; input was not integral")
        coeffs[n - k] = -(tr // k)
    return coeffs


def det_int(m):
    n = mat_dim(m)
    c0 = charpoly_int(m)[0]
    return c0 if n % 2 == 0 else -c0


def inverse_int(m):
    """Exact inverse of an integer matrix with determinant +-1."""
    n = mat_dim(m)
    d = det_int(m)
    if d not in (1, -1):
        raise ValueError("matrix is not unimodular")
    aug = [[Fraction(x) for x in row] + [Fraction(1 if i == j else 0) for j in range(n)]
           for i, row in enumerate(m)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            raise ValueError("matrix is singular")
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [v * inv for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [v - f * w for v, w in zip(aug[r], aug[col])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    if any(v.denominator != 1 for row in out for v in row):
        raise ArithmeticError("unimodular inverse came out non-integral")
    return [[int(v) for v in row] for row in out]
