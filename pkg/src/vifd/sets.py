"""Feasible sets, separating halfspaces, and stacked linear constraint systems."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

__all__ = [
    "Halfspace",
    "Box",
    "SimplexSlice",
    "Polyhedron",
    "FeasibleSet",
    "LinearConstraintSystem",
    "as_point",
    "halfspace_from_pair",
    "w_halfspace",
    "contains",
    "assemble",
]


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D float vector, optionally of a fixed length."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("vector entries must be finite")
    if dim is not None and arr.size != dim:
        raise ValueError(f"expected a vector of length {dim}, got {arr.size}")
    return arr


def _frozen(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Halfspace:
    """Closed halfspace ``{y : <normal, y - anchor> <= 0}``.

    A zero normal is allowed and denotes the whole space.
    """

    normal: np.ndarray
    anchor: np.ndarray

    def __post_init__(self):
        normal = _frozen(as_point(self.normal))
        anchor = _frozen(as_point(self.anchor, normal.size))
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "anchor", anchor)

    @property
    def dim(self) -> int:
        return self.normal.size

    @property
    def is_whole_space(self) -> bool:
        return not np.any(self.normal)


def halfspace_from_pair(z, u) -> Halfspace:
    """Halfspace ``{y : <u, y - z> <= 0}`` with its boundary through ``z``.

    The normal is rescaled to unit length so that accumulated constraint rows
    stay uniformly conditioned; a zero ``u`` yields the whole space.
    """
    z = as_point(z)
    u = as_point(u, z.size)
    norm = float(np.linalg.norm(u))
    if norm > 0.0:
        u = u / norm
    return Halfspace(u, z)


def w_halfspace(x0, x) -> Halfspace:
    """Halfspace ``{y : <y - x, x0 - x> <= 0}``; equals the whole space when x0 = x."""
    x0 = as_point(x0)
    x = as_point(x, x0.size)
    return Halfspace(x0 - x, x)


def contains(halfspace: Halfspace, y, tol: float = 0.0) -> bool:
    """Membership test ``<normal, y - anchor> <= tol``."""
    y = as_point(y, halfspace.dim)
    return float(halfspace.normal @ (y - halfspace.anchor)) <= tol


@dataclass(frozen=True, eq=False)
class Box:
    """Axis-aligned box; entries of ``lower``/``upper`` may be -inf/+inf."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lower.ndim != 1 or upper.shape != lower.shape:
            raise ValueError("box bounds must be two vectors of equal length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper componentwise")
        object.__setattr__(self, "lower", _frozen(lower))
        object.__setattr__(self, "upper", _frozen(upper))

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, y, tol: float = 0.0) -> bool:
        y = as_point(y, self.dim)
        return bool(np.all(y >= self.lower - tol) and np.all(y <= self.upper + tol))


@dataclass(frozen=True, eq=False)
class SimplexSlice:
    """Scaled simplex ``{x >= 0, sum(x) = a}`` with ``a > 0``."""

    a: float
    dim: int

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0.0):
            raise ValueError("simplex slice requires a finite a > 0")
        if self.dim < 1:
            raise ValueError("simplex slice requires dimension >= 1")

    def contains(self, y, tol: float = 0.0) -> bool:
        y = as_point(y, self.dim)
        return bool(np.all(y >= -tol) and abs(float(y.sum()) - self.a) <= tol)


@dataclass(frozen=True, eq=False)
class Polyhedron:
    """General polyhedron ``{y : G y <= h, A y = b}``; validated nonempty."""

    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        G, h, A, b = _validate_rows(self.G, self.h, self.A, self.b)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        # nonemptiness check: one feasibility projection from the origin
        from . import qp

        qp.least_distance(
            LinearConstraintSystem(self.G, self.h, self.A, self.b),
            np.zeros(self.dim),
        )

    @property
    def dim(self) -> int:
        return self.G.shape[1]

    def contains(self, y, tol: float = 0.0) -> bool:
        y = as_point(y, self.dim)
        ok_ineq = self.G.shape[0] == 0 or float(np.max(self.G @ y - self.h)) <= tol
        ok_eq = self.A.shape[0] == 0 or float(np.max(np.abs(self.A @ y - self.b))) <= tol
        return bool(ok_ineq and ok_eq)


FeasibleSet = Union[Box, SimplexSlice, Polyhedron]


def _validate_rows(G, h, A, b):
    G = np.atleast_2d(np.asarray(G, dtype=float))
    A = np.atleast_2d(np.asarray(A, dtype=float))
    h = np.atleast_1d(np.asarray(h, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if G.size == 0:
        G = G.reshape(0, A.shape[1] if A.size else G.shape[-1])
    if A.size == 0:
        A = A.reshape(0, G.shape[1])
    if h.size == 0:
        h = h.reshape(0)
    if b.size == 0:
        b = b.reshape(0)
    if G.shape[0] != h.size or A.shape[0] != b.size:
        raise ValueError("row counts of G/h and A/b must agree")
    if G.shape[1] != A.shape[1]:
        raise ValueError("G and A must share the ambient dimension")
    if not (np.all(np.isfinite(G)) and np.all(np.isfinite(h))
            and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ValueError("constraint data must be finite")
    return _frozen(G), _frozen(h), _frozen(A), _frozen(b)


@dataclass(frozen=True, eq=False)
class LinearConstraintSystem:
    """Stacked constraints ``G y <= h`` and ``A y = b`` over one ambient space."""

    G: np.ndarray
    h: np.ndarray
    A: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        G, h, A, b = _validate_rows(self.G, self.h, self.A, self.b)
        object.__setattr__(self, "G", G)
        object.__setattr__(self, "h", h)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.G.shape[1]

    def max_violation(self, y) -> float:
        """Largest constraint violation at ``y`` (0 when feasible)."""
        y = as_point(y, self.n)
        worst = 0.0
        if self.G.shape[0]:
            worst = max(worst, float(np.max(self.G @ y - self.h)))
        if self.A.shape[0]:
            worst = max(worst, float(np.max(np.abs(self.A @ y - self.b))))
        return worst

    def contains(self, y, tol: float = 0.0) -> bool:
        return self.max_violation(y) <= tol


def _box_rows(box: Box):
    n = box.dim
    rows, rhs = [], []
    eye = np.eye(n)
    for i in range(n):
        if np.isfinite(box.upper[i]):
            rows.append(eye[i])
            rhs.append(box.upper[i])
    for i in range(n):
        if np.isfinite(box.lower[i]):
            rows.append(-eye[i])
            rhs.append(-box.lower[i])
    G = np.array(rows, dtype=float).reshape(len(rows), n)
    return G, np.array(rhs, dtype=float), np.zeros((0, n)), np.zeros(0)


def _simplex_rows(s: SimplexSlice):
    n = s.dim
    return -np.eye(n), np.zeros(n), np.ones((1, n)), np.array([s.a])


def assemble(C: FeasibleSet, halfspaces) -> LinearConstraintSystem:
    """Stack the rows of ``C`` with one row per halfspace.

    Box bounds become +-identity rows (infinite bounds are skipped), a simplex
    slice becomes nonnegativity rows plus one all-ones equality, and a
    polyhedron contributes its rows verbatim.  Halfspace rows follow in list
    order with unit-normalized normals; whole-space halfspaces are dropped.
    """
    if isinstance(C, Box):
        G, h, A, b = _box_rows(C)
    elif isinstance(C, SimplexSlice):
        G, h, A, b = _simplex_rows(C)
    elif isinstance(C, Polyhedron):
        G, h, A, b = C.G, C.h, C.A, C.b
    else:
        raise TypeError(f"unsupported feasible set type: {type(C).__name__}")
    n = C.dim
    halfspaces = list(halfspaces)
    if halfspaces:
        bad = next((hs for hs in halfspaces if hs.dim != n), None)
        if bad is not None:
            raise ValueError(
                f"halfspace dimension {bad.dim} does not match feasible set dimension {n}"
            )
        normals = np.stack([hs.normal for hs in halfspaces])
        anchors = np.stack([hs.anchor for hs in halfspaces])
        norms = np.linalg.norm(normals, axis=1)
        keep = norms > 0.0
        if np.any(keep):
            rows = normals[keep] / norms[keep, None]
            rhs = np.einsum("ij,ij->i", rows, anchors[keep])
            G = np.vstack([G, rows])
            h = np.concatenate([h, rhs])
    return LinearConstraintSystem(G, h, A, b)
