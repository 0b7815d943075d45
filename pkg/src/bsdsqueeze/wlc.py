"""Squeezing lower bounds for convex bodies through special coordinates.

A bounded convex body is given by halfspaces ``Re<x, nu_k> < b_k`` with
``<x, nu> = nu^H x``.  At a base point ``z0`` we pick boundary points
``a^1, ..., a^n`` by successively minimizing the distance to the boundary
inside orthogonal complements, normalize them to the unit vectors with a
unitary map and a diagonal scaling, and straighten the supporting complex
hyperplanes with a unit lower-triangular matrix ``A``.  The largest
polydisk ``c D^n`` inside the resulting body, together with the Koebe
quarter theorem applied coordinatewise, gives ``s(z0) >= c / (16 sqrt(n))``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from .errors import ConsistencyError, PreconditionError, StructuralError

INTERIOR_MARGIN = 1e-10
TIE_RTOL = 1e-12
FRAME_TOL = 1e-8

KOEBE_PROVENANCE = {
    "fact": "s_D(z0) >= c/(16 sqrt(n)) for the inscribed polydisk radius c of the straightened body",
    "ingredients": "Koebe quarter theorem on each coordinate projection; c D^n inside the straightened body",
    "hypotheses": "contractible, weakly linearly convex, connected slices (automatic for convex bodies)",
}


def _interleave(z):
    z = np.asarray(z, dtype=complex)
    return [float(v) for pair in zip(z.real, z.imag) for v in pair]


def _deinterleave(vals):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim != 1 or vals.size % 2:
        raise PreconditionError("complex vectors are written as [re, im, re, im, ...]")
    return vals[0::2] + 1j * vals[1::2]


def _matrix_rows(m):
    return [_interleave(row) for row in np.atleast_2d(m)]


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """``{x in C^n : Re<x, nu_k> < b_k for all k}`` with a strictly interior point."""

    normals: np.ndarray = field(repr=False)  # (K, n) complex
    offsets: np.ndarray = field(repr=False)  # (K,) real
    interior_point: np.ndarray = None

    def __post_init__(self):
        nu = np.atleast_2d(np.asarray(self.normals, dtype=complex))
        b = np.asarray(self.offsets, dtype=float).reshape(-1)
        p = np.asarray(self.interior_point, dtype=complex).reshape(-1)
        if nu.shape[0] != b.size or nu.shape[1] != p.size:
            raise StructuralError("normals, offsets and interior point have inconsistent shapes")
        if np.any(np.linalg.norm(nu, axis=1) == 0):
            raise PreconditionError("zero normal vector")
        for name, arr in (("normals", nu), ("offsets", b), ("interior_point", p)):
            arr = arr.copy()
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)
        if np.min(self.slack(p)) <= INTERIOR_MARGIN:
            raise PreconditionError("interior point is not strictly feasible")

    @classmethod
    def bounded(cls, normals, offsets, interior_point):
        """Construct and verify boundedness (2n support problems)."""
        body = cls(normals, offsets, interior_point)
        body.check_bounded()
        return body

    @property
    def dim(self):
        return self.normals.shape[1]

    def slack(self, z):
        """``b_k - Re<z, nu_k>`` for each constraint (batched over leading axes of ``z``)."""
        z = np.asarray(z, dtype=complex)
        return self.offsets - np.real(z @ np.conj(self.normals).T)

    def contains(self, z):
        return np.min(self.slack(z), axis=-1) > INTERIOR_MARGIN

    def _real_constraints(self):
        return np.hstack([self.normals.real, self.normals.imag])

    def support(self, direction):
        """``max Re<x, direction>`` over the closure (``inf`` if unbounded)."""
        d = np.asarray(direction, dtype=complex)
        c = -np.concatenate([d.real, d.imag])
        res = linprog(c, A_ub=self._real_constraints(), b_ub=self.offsets,
                      bounds=[(None, None)] * (2 * self.dim), method="highs")
        if res.status == 3:
            return math.inf
        if res.status != 0:
            raise ConsistencyError(f"support problem failed: {res.message}")
        return float(-res.fun)

    def check_bounded(self):
        n = self.dim
        for k in range(n):
            for unit in (1.0, 1j):
                for sign in (1.0, -1.0):
                    d = np.zeros(n, dtype=complex)
                    d[k] = sign * unit
                    if not math.isfinite(self.support(d)):
                        raise PreconditionError("convex body is unbounded")

    def affine(self, t, v):
        """The body ``t * self + v`` for ``t > 0``."""
        if t <= 0:
            raise PreconditionError("scale factor must be positive")
        v = np.asarray(v, dtype=complex)
        b = t * self.offsets + np.real(np.conj(self.normals) @ v)
        return ConvexBody(self.normals, b, t * self.interior_point + v)

    def linear_image(self, T, z0):
        """The body ``{T (x - z0) : x in self}`` for invertible ``T``."""
        T = np.asarray(T, dtype=complex)
        nu = np.linalg.solve(T.conj().T, self.normals.T).T
        b = self.slack(z0)
        return ConvexBody(nu, b, np.zeros(self.dim, dtype=complex))

    def sample_interior(self, rng, size, shrink=0.999):
        """Random interior points along random rays from the interior point.

        The ray length fraction is ``u**(1/(2n))``, uniform in volume for a
        star-shaped body, capped at ``shrink``.
        """
        n = self.dim
        g = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
        d = g / np.linalg.norm(g, axis=1, keepdims=True)
        rate = np.real(d @ np.conj(self.normals).T)
        s = self.slack(self.interior_point)
        with np.errstate(divide="ignore"):
            reach = np.where(rate > 0, s / np.where(rate > 0, rate, 1.0), np.inf)
        tmax = np.min(reach, axis=1)
        frac = shrink * rng.random(size) ** (1.0 / (2 * n))
        return self.interior_point + (frac * tmax)[:, None] * d

    def to_dict(self):
        return {
            "normals": _matrix_rows(self.normals),
            "offsets": [float(b) for b in self.offsets],
            "interior_point": _interleave(self.interior_point),
        }

    @classmethod
    def from_dict(cls, data, check=True):
        try:
            nu = np.array([_deinterleave(row) for row in data["normals"]])
            b = np.asarray(data["offsets"], dtype=float)
            p = _deinterleave(data["interior_point"])
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"malformed convex body: {exc}") from exc
        return cls.bounded(nu, b, p) if check else cls(nu, b, p)

    # -- standard test bodies --------------------------------------------

    @classmethod
    def polygon_polydisk(cls, n, m=64, radius=1.0):
        """Product of regular ``m``-gons circumscribed about discs of ``radius``.

        Contained in the polydisk of radius ``radius / cos(pi/m)``.
        """
        omega = np.exp(2j * np.pi * np.arange(m) / m)
        rows = []
        for i in range(n):
            block = np.zeros((m, n), dtype=complex)
            block[:, i] = omega
            rows.append(block)
        return cls(np.vstack(rows), np.full(n * m, float(radius)), np.zeros(n, dtype=complex))

    @classmethod
    def polyhedral_ball(cls, alphas=9, phases=16, radius=1.0):
        """Circumscribed polytope of the ball in ``C^2``.

        Normals ``(cos a e^{ib}, sin a e^{ig})`` over grids of ``a`` in
        ``[0, pi/2]`` (endpoints included) and phases ``b, g``; repeated
        normals at the endpoints are dropped.
        """
        th = 2 * np.pi * np.arange(phases) / phases
        rows = []
        for a in np.linspace(0.0, np.pi / 2, alphas):
            ca, sa = math.cos(a), math.sin(a)
            if abs(sa) < 1e-15:
                rows.extend((np.exp(1j * b), 0.0) for b in th)
            elif abs(ca) < 1e-15:
                rows.extend((0.0, np.exp(1j * g)) for g in th)
            else:
                rows.extend((ca * np.exp(1j * b), sa * np.exp(1j * g)) for b in th for g in th)
        nu = np.array(rows, dtype=complex)
        return cls(nu, np.full(len(nu), float(radius)), np.zeros(2, dtype=complex))


def subspace_boundary_distance(body, z0, H):
    """Distance from ``z0`` to the boundary inside the slice ``z0 + span(H)``.

    ``H`` has orthonormal columns.  Returns ``(r, contact)``.
    """
    r, contact, _ = _slice_contact(body, z0, H)
    return r, contact


def _slice_contact(body, z0, H):
    # also returns the active constraint index (lowest index on ties)
    z0 = np.asarray(z0, dtype=complex)
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != body.dim or H.shape[1] == 0:
        raise PreconditionError("H must be an (n, d) basis with d >= 1")
    if not np.allclose(H.conj().T @ H, np.eye(H.shape[1]), atol=1e-10):
        raise PreconditionError("H must have orthonormal columns")
    s = body.slack(z0)
    if np.min(s) <= INTERIOR_MARGIN:
        raise PreconditionError("z0 is not an interior point")
    P = (H.conj().T @ body.normals.T).T  # row k: H^H nu_k
    pn = np.linalg.norm(P, axis=1)
    live = pn > 1e-14 * np.linalg.norm(body.normals, axis=1)
    if not np.any(live):
        raise PreconditionError("slice is unbounded in the body")
    r_all = np.full(len(s), np.inf)
    r_all[live] = s[live] / pn[live]
    rmin = np.min(r_all)
    k = int(np.flatnonzero(r_all <= rmin * (1 + TIE_RTOL))[0])
    r = float(r_all[k])
    contact = z0 + H @ (P[k] * (s[k] / pn[k] ** 2))
    return r, contact, k


@dataclass(frozen=True, eq=False)
class WlcFrame:
    z0: np.ndarray
    contact_points: np.ndarray  # (n, n), row j is a^{j+1}
    distances: np.ndarray
    U: np.ndarray
    Dscale: np.ndarray
    A: np.ndarray
    constraints: tuple  # active constraint index per contact point
    W_normals: np.ndarray  # W_{j-1} = ker(nu^H) for row j
    c: float
    residuals: dict
    cross_polytope_ok: bool

    @property
    def n(self):
        return self.z0.size

    @property
    def T(self):
        return self.A @ self.Dscale @ self.U

    @property
    def bound(self):
        return koebe_lower_bound(self)

    def to_dict(self):
        return {
            "z0": _interleave(self.z0),
            "contact_points": _matrix_rows(self.contact_points),
            "distances": [float(r) for r in self.distances],
            "U": _matrix_rows(self.U),
            "Dscale": [float(d) for d in np.diag(self.Dscale).real],
            "A": _matrix_rows(self.A),
            "constraints": list(self.constraints),
            "W_normals": _matrix_rows(self.W_normals),
            "c": self.c,
            "bound": self.bound,
            "residuals": dict(self.residuals),
            "cross_polytope_ok": self.cross_polytope_ok,
            "provenance": dict(KOEBE_PROVENANCE),
        }


def build_frame(body, z0):
    z0 = np.asarray(z0, dtype=complex)
    n = body.dim
    if z0.shape != (n,):
        raise StructuralError(f"z0 must have {n} coordinates")
    H = np.eye(n, dtype=complex)
    contacts, dists, idx, units = [], [], [], []
    for _ in range(n):
        r, a, k = _slice_contact(body, z0, H)
        u = (a - z0) / r
        contacts.append(a)
        dists.append(r)
        idx.append(k)
        units.append(u)
        if H.shape[1] > 1:
            H = H @ null_space((H.conj().T @ u)[None, :].conj())
    dists = np.array(dists)
    U = np.array(units).conj()
    Dscale = np.diag(1.0 / dists).astype(complex)
    nu = body.normals[idx]
    # m[j, i] = <u_i, nu_{k_j}> components of the active normals in the new basis
    m = (U @ nu.T).T
    A = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for i in range(j + 1):
            A[j, i] = np.conj(m[j, i]) * dists[i] / (np.conj(m[j, j]) * dists[j])
        A[j, j] = 1.0
    T = A @ Dscale @ U

    contacts = np.array(contacts)
    res_unit = float(np.max(np.abs(U @ U.conj().T - np.eye(n))))
    slack_c = np.array([body.slack(a)[k] for a, k in zip(contacts, idx)])
    res_contact = float(np.max(np.abs(slack_c)))
    res_hyper = 0.0
    res_level = 0.0
    for j in range(n):
        W = null_space(nu[j].conj()[None, :])
        if W.size:
            res_hyper = max(res_hyper, float(np.max(np.abs(T[j] @ W))))
        res_level = max(res_level, abs(T[j] @ (contacts[j] - z0) - 1.0))
    res_orth = 0.0
    for j in range(1, n):
        prev = contacts[:j] - z0
        res_orth = max(res_orth, float(np.max(np.abs(prev.conj() @ (contacts[j] - z0)))))
    # 1 lies on the boundary of the j-th coordinate projection
    res_proj = 0.0
    for j in range(n):
        sup = body.support(np.conj(T[j])) - float(np.real(T[j] @ z0))
        res_proj = max(res_proj, abs(sup - 1.0))
    residuals = {
        "unitary": res_unit,
        "contact_active": res_contact,
        "hyperplane_kernel": res_hyper,
        "hyperplane_level": float(res_level),
        "orthogonality": res_orth,
        "projection_boundary": res_proj,
    }
    worst = max(residuals.values())
    if worst > FRAME_TOL:
        raise ConsistencyError(f"frame checks failed: {residuals}")

    image = body.linear_image(T, z0)
    c = inscribed_polydisk_radius(image)
    scaled = body.linear_image(Dscale @ U, z0)
    cross_ok = bool(np.all(np.max(np.abs(scaled.normals), axis=1) <= scaled.offsets * (1 + 1e-9)))
    return WlcFrame(z0.copy(), contacts, dists, U, Dscale, A, tuple(idx), nu.copy(),
                    c, residuals, cross_ok)


def inscribed_polydisk_radius(body_image):
    """Largest ``c`` with ``c D^n`` inside the body (which must contain 0)."""
    b = body_image.slack(np.zeros(body_image.dim))
    if np.min(b) <= INTERIOR_MARGIN:
        raise PreconditionError("0 is not an interior point of the body")
    return float(np.min(b / np.sum(np.abs(body_image.normals), axis=1)))


def koebe_lower_bound(frame):
    return frame.c / (16.0 * math.sqrt(frame.n))


@dataclass(frozen=True)
class ScanResult:
    """Sampled infimum of the per-point lower bound (not the true infimum)."""

    value: float
    argmin: int
    bounds: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)

    def to_dict(self):
        return {
            "value": self.value,
            "argmin": self.argmin,
            "point": _interleave(self.points[self.argmin]),
            "count": int(len(self.bounds)),
            "caveat": "minimum over sampled points only",
            "provenance": dict(KOEBE_PROVENANCE),
        }


def hhr_scan(body, grid, threads=1):
    grid = np.atleast_2d(np.asarray(grid, dtype=complex))
    if grid.shape[1] != body.dim:
        raise StructuralError("grid points have the wrong dimension")
    if not np.all(body.contains(grid)):
        raise PreconditionError("grid contains points outside the body")

    def one(z):
        return koebe_lower_bound(build_frame(body, z))

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            bounds = np.array(list(pool.map(one, grid)))
    else:
        bounds = np.array([one(z) for z in grid])
    i = int(np.argmin(bounds))
    return ScanResult(float(bounds[i]), i, bounds, grid)
