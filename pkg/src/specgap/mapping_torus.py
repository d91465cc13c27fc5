"""Twisted cohomology of mapping tori and the resulting spectral decisions.

For a fiber automorphism acting on each cohomology degree, the Wang exact
sequence reduces the flat-line-bundle cohomology of the mapping torus at a
unit-modulus twist lambda to kernels and cokernels of I - lambda^{-1} phi*.
Only finitely many lambda give a nonzero answer; they are exactly the
unit-circle eigenvalues of the degree maps and are located exactly through
the integer characteristic polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _exact
from ._linalg import numerical_rank
from .errors import DegreeOutOfRangeError, NotUnitModulusError
from .symplectic import SymplecticMatrix, certify_unit_circle

_RANK_RTOL = 1e-10
_UNIT_ATOL = 1e-12


@dataclass(frozen=True)
class UnitRoot:
    """A unit-modulus eigenvalue tagged with exact provenance.

    ``poly`` holds descending integer coefficients of a polynomial with this
    root; ``root_index`` orders roots of that polynomial by angle in [0, pi],
    with conjugates sharing the index and distinguished by the sign of the
    imaginary part in ``value``.
    """

    value: complex
    poly: tuple
    root_index: int

    def conjugate(self):
        return UnitRoot(self.value.conjugate(), self.poly, self.root_index)

    def to_json(self):
        return {
            "poly": list(self.poly),
            "root_index": self.root_index,
            "re": self.value.real,
            "im": self.value.imag,
        }


class FiberAutomorphism:
    """Integer automorphisms of the fiber cohomology, one per degree.

    ``degree_maps[p]`` acts on degree p; an entry of ``None`` means that
    degree vanishes.  Every map must be invertible over the integers.
    """

    def __init__(self, degree_maps):
        maps = []
        for p, m in enumerate(degree_maps):
            if m is None:
                maps.append(None)
                continue
            if isinstance(m, SymplecticMatrix):
                m = m.rows()
            rows = [[int(x) for x in row] for row in m]
            if _exact.det_int(rows) not in (1, -1):
                raise ValueError(f"degree-{p} map is not invertible over Z")
            maps.append(tuple(tuple(r) for r in rows))
        self.degree_maps = tuple(maps)

    @classmethod
    def surface(cls, middle):
        """Orientation-preserving surface case: identity on top and bottom."""
        if not isinstance(middle, SymplecticMatrix):
            middle = SymplecticMatrix(middle)
        return cls([[[1]], middle, [[1]]])

    @property
    def top_degree(self):
        return len(self.degree_maps) - 1

    def map_at(self, p):
        """Degree-p map as integer rows, or None outside the range / vanishing."""
        if p < 0 or p > self.top_degree:
            return None
        return None if self.degree_maps[p] is None else [list(r) for r in self.degree_maps[p]]

    def dim_at(self, p):
        m = self.map_at(p)
        return 0 if m is None else len(m)

    def inverse(self):
        return FiberAutomorphism([
            None if m is None else _exact.inverse_int([list(r) for r in m])
            for m in self.degree_maps
        ])

    def to_json(self):
        return {"degree_maps": [None if m is None else [list(r) for r in m]
                                for m in self.degree_maps]}


def _check_unit_modulus(lam):
    value = complex(lam.value) if isinstance(lam, UnitRoot) else complex(lam)
    if not isinstance(lam, UnitRoot) and abs(abs(value) - 1.0) > _UNIT_ATOL:
        raise NotUnitModulusError(f"|lambda| = {abs(value)!r} is not 1 within {_UNIT_ATOL}")
    return value


@dataclass(frozen=True)
class WangDims:
    """Cohomology of the mapping torus at one twist, split by the exact sequence."""

    coker_dim: int
    ker_dim: int

    @property
    def total_dim(self):
        return self.coker_dim + self.ker_dim

    def to_json(self):
        return {"coker_dim": self.coker_dim, "ker_dim": self.ker_dim,
                "total_dim": self.total_dim}


def wang_dims(fiber: FiberAutomorphism, p: int, lam) -> WangDims:
    """dim Coker(I - lam^{-1} phi_{p-1}) and dim Ker(I - lam^{-1} phi_p) over C.

    Their sum is the dimension of the twisted degree-p cohomology of the
    mapping torus.  Ranks are computed by SVD with a relative threshold;
    membership of lam on the unit circle is the caller's exact certificate.
    """
    if p < 0 or p > fiber.top_degree + 1:
        raise DegreeOutOfRangeError(
            f"degree {p} outside 0..{fiber.top_degree + 1}")
    value = _check_unit_modulus(lam)

    def defect_dims(m):
        if m is None:
            return 0, 0
        a = np.array(m, dtype=complex)
        n = a.shape[0]
        op = np.eye(n) - a / value
        r = numerical_rank(op, _RANK_RTOL)
        return n - r, n - r  # square matrix: coker dim == ker dim

    coker, _ = defect_dims(fiber.map_at(p - 1))
    _, ker = defect_dims(fiber.map_at(p))
    return WangDims(coker_dim=coker, ker_dim=ker)


def _unit_circle_roots_of(m):
    """Unit-circle eigenvalues of an integer matrix as UnitRoot values."""
    if m is None:
        return []
    cert = certify_unit_circle(_exact.charpoly_int(m))
    analysis = cert.analysis
    poly = tuple(reversed(analysis.core))
    roots = []
    idx = 0
    if analysis.mult_one:
        roots.append(UnitRoot(complex(1.0, 0.0), poly, idx))
        idx += 1
    for z in analysis.pair_values():
        roots.append(UnitRoot(z, poly, idx))
        roots.append(UnitRoot(z.conjugate(), poly, idx))
        idx += 1
    if analysis.mult_minus_one:
        roots.append(UnitRoot(complex(-1.0, 0.0), poly, idx))
    return roots


@dataclass(frozen=True)
class ExceptionalLambda:
    root: UnitRoot
    dims: WangDims

    def to_json(self):
        return {"lambda": self.root.to_json(), **self.dims.to_json()}


@dataclass(frozen=True)
class ReducedL2Report:
    """Reduced L2 cohomology of the cyclic cover always vanishes in the tame
    fibered case; the report carries the finitely many twists where the
    unreduced groups jump."""

    vanishes: bool
    degree: int
    exceptional: tuple = field(default=())

    @property
    def total_exceptional_dim(self):
        return sum(e.dims.total_dim for e in self.exceptional)

    def exceptional_values(self):
        return [e.root.value for e in self.exceptional]

    def to_json(self):
        return {"vanishes": self.vanishes, "degree": self.degree,
                "exceptional": [e.to_json() for e in self.exceptional]}


def reduced_l2_vanishes(fiber: FiberAutomorphism, p: int) -> ReducedL2Report:
    """Vanishing report plus the exceptional unit-modulus twists at degree p.

    The exceptional set collects unit-circle eigenvalues of the degree p-1
    and degree p maps, found exactly; each is annotated with its twisted
    cohomology dimensions.
    """
    if p < 0 or p > fiber.top_degree + 1:
        raise DegreeOutOfRangeError(f"degree {p} outside 0..{fiber.top_degree + 1}")
    seen = {}
    for m in (fiber.map_at(p - 1), fiber.map_at(p)):
        for root in _unit_circle_roots_of(m):
            key = (round(root.value.real, 12), round(root.value.imag, 12))
            if key not in seen:
                seen[key] = root
    entries = []
    for key in sorted(seen, key=lambda k: (-k[0], k[1])):
        root = seen[key]
        entries.append(ExceptionalLambda(root=root, dims=wang_dims(fiber, p, root)))
    return ReducedL2Report(vanishes=True, degree=p, exceptional=tuple(entries))


def zero_in_spectrum_unreduced(fiber: FiberAutomorphism, p: int) -> bool:
    """Exact decision for the quotient-by-closed-forms part at degree p.

    True iff the degree-p map has a unit-modulus eigenvalue; for hyperbolic
    cyclic covers of surface mapping tori (p = 1) this settles whether zero
    lies in the spectrum on 1-forms modulo closed forms.
    """
    m = fiber.map_at(p)
    if p < 0 or p > fiber.top_degree + 1:
        raise DegreeOutOfRangeError(f"degree {p} outside 0..{fiber.top_degree + 1}")
    if m is None:
        return False
    return certify_unit_circle(_exact.charpoly_int(m)).verdict


def zero_in_spectrum_on_image_closure(fiber: FiberAutomorphism, p: int) -> bool:
    """Companion decision on the closure of the exact part at degree p.

    This side of the splitting is governed by cokernels one degree down, so
    the test is a unit-modulus eigenvalue of the degree p-1 map.  Both
    decisions are reported separately; callers pick the summand they need.
    """
    return zero_in_spectrum_unreduced(fiber, p - 1)
