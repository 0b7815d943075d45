"""Kobayashi distances on balanced realizations.

Only the cases with closed forms are supported: distance from the origin of
any (product) domain, and two-point distances on products of balls and
discs.  ``dist_to_set`` turns a sampled set into a non-increasing sequence of
upper estimates for the distance to that set.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from .errors import PreconditionError, StructuralError, UnsupportedOperation
from .phjts import spectral_norm_coords
from .symdomain import BOUNDARY_BAND, DomainSpec

# a sample closer than this to z counts as z itself
COINCIDENCE_TOL = 1e-12


def _atanh_norm(r):
    r = np.asarray(r, dtype=float)
    if np.any(r >= 1.0 - BOUNDARY_BAND):
        raise PreconditionError("point is not in the interior")
    return np.arctanh(r)


def dist_from_origin(domain, w):
    """``K(0, w) = atanh |w|_D`` (vectorized over leading axes of ``w``)."""
    out = _atanh_norm(domain.norm(w))
    return float(out) if np.ndim(out) == 0 else out


def ball_distance(z, w):
    """Kobayashi distance of the unit ball; ``w`` may carry leading batch axes."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    nz = np.sum(np.abs(z) ** 2, axis=-1)
    nw = np.sum(np.abs(w) ** 2, axis=-1)
    if np.any(nz >= 1.0) or np.any(nw >= 1.0):
        raise PreconditionError("ball distance needs interior points")
    # |phi_z(w)|^2 = 1 - (1-|z|^2)(1-|w|^2)/|1-<w,z>|^2, with the numerator
    # rewritten as |d|^2 (1-|z|^2) + |<d,z>|^2 (d = w - z) to avoid cancellation
    d = w - z
    num = np.sum(np.abs(d) ** 2, axis=-1) * (1.0 - nz) + np.abs(np.sum(d * np.conj(z), axis=-1)) ** 2
    den = np.abs(1.0 - np.sum(w * np.conj(z), axis=-1))
    out = np.arctanh(np.sqrt(num) / den)
    return float(out) if np.ndim(out) == 0 else out


def _factor_distance(f, s, zf, wf):
    if f.kind == "I" and f.dims[0] == 1:
        return ball_distance(zf / s, wf / s)
    zero_z = not np.any(zf)
    zero_w = np.all(wf == 0, axis=-1)
    if zero_z:
        return _atanh_norm(_fnorm(f, wf) / s)
    if np.all(zero_w):
        r = _fnorm(f, zf) / s
        return np.broadcast_to(_atanh_norm(r), zero_w.shape)
    raise UnsupportedOperation(
        f"two-point Kobayashi distance on the rank-{f.rank} factor {f} is only "
        "available when one of the points is 0"
    )


def _fnorm(f, coords):
    return spectral_norm_coords(f, coords)


def product_distance(domain, z, w):
    """Max over factors of the factor distances.

    Rank-one factors (balls and discs) are handled in general; higher-rank
    factors only when the factor block of ``z`` or of ``w`` is zero.
    """
    zs = domain.split(z)
    ws = domain.split(w)
    parts = [
        _factor_distance(f, s, zf, wf)
        for f, s, zf, wf in zip(domain.factors, domain.scales, zs, ws)
    ]
    out = np.max(np.stack(np.broadcast_arrays(*parts)), axis=0)
    return float(out) if np.ndim(out) == 0 else out


# -- removed sets ------------------------------------------------------------


def _sobol(dim, count, seed):
    m = int(np.log2(count))
    if 2**m != count:
        raise PreconditionError(f"sample counts must be powers of two, got {count}")
    return qmc.Sobol(dim, scramble=True, seed=seed).random_base2(m)


@dataclass(frozen=True, eq=False)
class RemovedSet:
    """A set ``S`` inside the ambient domain, emitted level by level.

    Level ``L`` of a sampled set is the first ``samples * 4**L`` points of a
    fixed scrambled Sobol sequence, so every level contains the previous one
    and any level can be regenerated on its own.
    """

    kind: str
    domain: DomainSpec
    points: np.ndarray = field(default=None, repr=False)
    param_map: object = field(default=None, repr=False)
    lower: np.ndarray = None
    upper: np.ndarray = None
    samples: int = 256
    seed: int = 0
    description: dict = None

    @classmethod
    def from_points(cls, domain, points):
        pts = np.atleast_2d(np.asarray(points, dtype=complex))
        if pts.shape[-1] != domain.total_dim:
            raise StructuralError("removed points do not match the domain dimension")
        s = cls("points", domain, points=pts, description={"kind": "points", "count": len(pts)})
        s._check_interior(pts)
        return s

    @classmethod
    def parametric(cls, domain, param_map, lower, upper, samples=256, seed=0, description=None):
        """Image of a real parameter box under ``param_map`` (batched: (M, d) -> (M, N)).

        Parameters mapping outside the domain are discarded.
        """
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        desc = description or {"kind": "parametric", "dim": int(lower.size)}
        return cls("parametric", domain, param_map=param_map, lower=lower, upper=upper,
                   samples=int(samples), seed=int(seed), description=desc)

    @classmethod
    def slice(cls, domain, index, samples=256, seed=0):
        """``S = {z in domain : z_index = 0}`` (0-based ``index``)."""
        n = domain.total_dim
        if not 0 <= index < n or n < 2:
            raise PreconditionError(f"cannot slice coordinate {index} of a {n}-dimensional domain")
        # every coordinate of a domain point is bounded by its Euclidean norm
        bound = max(np.sqrt(f.rank) * s for f, s in zip(domain.factors, domain.scales))
        free = [k for k in range(n) if k != index]

        def embed(t):
            out = np.zeros((t.shape[0], n), dtype=complex)
            out[:, free] = t[:, 0::2] + 1j * t[:, 1::2]
            return out

        box = np.full(2 * (n - 1), bound)
        desc = {"kind": "slice", "equation": f"z_{index + 1}=0", "samples": int(samples)}
        return cls.parametric(domain, embed, -box, box, samples, seed, desc)

    @classmethod
    def closed_ball(cls, domain, center, radius, samples=256, seed=0):
        """Sphere of the closed Euclidean ball ``|w - center| <= radius``.

        For a point outside the ball the distance to the ball is attained on
        its boundary sphere, so only the sphere is sampled.
        """
        center = np.asarray(center, dtype=complex)
        n = domain.total_dim
        if center.shape != (n,) or radius <= 0:
            raise PreconditionError("closed ball needs a center in the domain and a positive radius")

        def sphere(t):
            g = ndtri(np.clip(t, 1e-12, 1 - 1e-12))
            v = g[:, 0::2] + 1j * g[:, 1::2]
            v /= np.linalg.norm(v, axis=1, keepdims=True)
            return center + radius * v

        box = np.ones(2 * n)
        desc = {"kind": "ball", "center": center, "radius": float(radius), "samples": int(samples)}
        return cls.parametric(domain, sphere, 0 * box, box, samples, seed, desc)

    def _check_interior(self, pts):
        if np.any(self.domain.norm(pts) >= 1.0 - BOUNDARY_BAND):
            raise PreconditionError("removed set must lie in the interior of the domain")

    def level_points(self, level):
        if self.kind == "points":
            return self.points
        count = self.samples * 4**level
        unit = _sobol(self.lower.size, count, self.seed)
        t = self.lower + unit * (self.upper - self.lower)
        pts = np.asarray(self.param_map(t), dtype=complex)
        keep = self.domain.norm(pts) < 1.0 - BOUNDARY_BAND
        if self.description.get("kind") == "ball" and not np.all(keep):
            raise PreconditionError("removed ball leaves the domain")
        return pts[keep]

    def to_dict(self):
        d = dict(self.description)
        if "center" in d:
            d["center"] = _interleave(d["center"])
        return d

    @classmethod
    def from_dict(cls, domain, data, seed=0):
        kind = data.get("kind")
        if kind == "points":
            pts = [_deinterleave(p) for p in data["data"]]
            return cls.from_points(domain, pts)
        if kind == "slice":
            eq = str(data.get("equation", "z_n=0")).replace(" ", "")
            m = re.fullmatch(r"z_(\d+|n)=0", eq)
            if not m:
                raise PreconditionError(f"unsupported slice equation {eq!r}; use z_k=0")
            k = domain.total_dim if m.group(1) == "n" else int(m.group(1))
            return cls.slice(domain, k - 1, int(data.get("samples", 256)), seed)
        if kind == "ball":
            return cls.closed_ball(domain, _deinterleave(data["center"]), float(data["radius"]),
                                   int(data.get("samples", 256)), seed)
        raise PreconditionError(f"unknown removed-set kind {kind!r}")


def _interleave(z):
    z = np.asarray(z, dtype=complex)
    return [float(v) for pair in zip(z.real, z.imag) for v in pair]


def _deinterleave(vals):
    vals = np.asarray(vals, dtype=float)
    if vals.ndim != 1 or vals.size % 2:
        raise PreconditionError("complex vectors are written as [re, im, re, im, ...]")
    return vals[0::2] + 1j * vals[1::2]


@dataclass(frozen=True)
class DistanceEnvelope:
    """Upper estimates of ``K(z; S)``, one per refinement level."""

    values: tuple
    samples: tuple
    argmin: np.ndarray = field(repr=False)
    degenerate: bool = False

    @property
    def value(self):
        return self.values[-1]

    def to_dict(self):
        return {
            "values": list(self.values),
            "samples": list(self.samples),
            "argmin": _interleave(self.argmin),
            "degenerate": self.degenerate,
            "direction": "upper estimate (non-increasing in level)",
        }


def pointwise_distance(domain, z, w):
    """``K(z, w)`` for a single ``z`` against a batch ``w`` of shape (M, N)."""
    z = np.asarray(z, dtype=complex)
    if not np.any(z):
        return dist_from_origin(domain, w)
    return product_distance(domain, z, w)


def dist_to_set(domain, z, removed, levels=4):
    z = np.asarray(z, dtype=complex)
    if domain.norm(z) >= 1.0 - BOUNDARY_BAND:
        raise PreconditionError("z must be an interior point")
    if levels < 1:
        raise PreconditionError("need at least one refinement level")
    values, counts = [], []
    best, best_pt = np.inf, None
    degenerate = False
    for level in range(levels):
        pts = removed.level_points(level)
        counts.append(int(len(pts)))
        if len(pts) == 0:
            values.append(best)
            continue
        gaps = np.linalg.norm(pts - z, axis=1)
        if np.min(gaps) <= COINCIDENCE_TOL:
            degenerate = True
            best, best_pt = 0.0, pts[int(np.argmin(gaps))]
        else:
            d = np.atleast_1d(pointwise_distance(domain, z, pts))
            i = int(np.argmin(d))
            if d[i] < best:
                best, best_pt = float(d[i]), pts[i]
        values.append(best)
    if best_pt is None:
        raise PreconditionError("removed set produced no interior samples")
    return DistanceEnvelope(tuple(values), tuple(counts), best_pt, degenerate)
