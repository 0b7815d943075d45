"""Bounded symmetric domains realized as spectral-norm unit balls.

A :class:`DomainSpec` is a finite product of classical Cartan factors.  A
point is a complex vector of length ``total_dim``: the concatenated factor
coordinates (see :mod:`bsdsqueeze.phjts`).  Each factor carries a scale
``s``; the factor domain is ``{x : |x|_spec < s}``.  Scale 1 is the
canonical realization, scale ``1/sqrt(rank)`` the normalized one whose
Shilov boundary sits on the unit sphere.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from . import phjts
from .errors import ConsistencyError, PreconditionError, StructuralError
from .phjts import CartanFactor, JtsElement

BOUNDARY_BAND = 1e-10
UNIT_LAMBDA_TOL = 1e-8


class Membership(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class Scaling:
    """The linear map ``x -> scale * x`` on one factor's coordinates."""

    factor: CartanFactor
    scale: float

    def __call__(self, coords):
        return self.scale * np.asarray(coords, dtype=complex)

    def inverse(self, coords):
        return np.asarray(coords, dtype=complex) / self.scale

    def matrix(self):
        return self.scale * np.eye(self.factor.ambient_dim)


def normalize_realization(factor):
    """Scaling onto the normalized realization: ``1/sqrt(rank)`` times identity.

    In the orthonormal coordinates used throughout, the invariant inner
    product is already the standard one, so no further change of basis is
    needed.
    """
    return Scaling(factor, 1.0 / np.sqrt(factor.rank))


@dataclass(frozen=True)
class DomainSpec:
    factors: tuple
    scales: tuple = None

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise PreconditionError("a domain needs at least one factor")
        for f in factors:
            if not isinstance(f, CartanFactor):
                raise StructuralError(f"not a CartanFactor: {f!r}")
        scales = (1.0,) * len(factors) if self.scales is None else tuple(map(float, self.scales))
        if len(scales) != len(factors) or min(scales) <= 0:
            raise PreconditionError("need one positive scale per factor")
        object.__setattr__(self, "factors", factors)
        object.__setattr__(self, "scales", scales)

    @classmethod
    def of(cls, *factors):
        return cls(tuple(factors))

    @classmethod
    def ball(cls, n):
        return cls((CartanFactor.type_i(1, n),))

    @classmethod
    def polydisk(cls, n):
        return cls((CartanFactor.type_i(1, 1),) * n)

    @property
    def total_dim(self):
        return sum(f.ambient_dim for f in self.factors)

    @property
    def rank(self):
        return sum(f.rank for f in self.factors)

    @property
    def irreducible(self):
        return len(self.factors) == 1

    def normalized(self):
        return DomainSpec(self.factors, tuple(normalize_realization(f).scale for f in self.factors))

    @property
    def offsets(self):
        return np.cumsum([0] + [f.ambient_dim for f in self.factors])

    def split(self, z):
        """Per-factor coordinate blocks of ``z`` (leading axes are batch axes)."""
        z = np.asarray(z, dtype=complex)
        if z.shape[-1] != self.total_dim:
            raise StructuralError(f"point has {z.shape[-1]} coordinates, domain needs {self.total_dim}")
        off = self.offsets
        return [z[..., off[i]:off[i + 1]] for i in range(len(self.factors))]

    def join(self, blocks):
        return np.concatenate([np.asarray(b, dtype=complex) for b in blocks], axis=-1)

    def norm(self, z):
        """Minkowski functional of the domain (max of scaled spectral norms)."""
        parts = [
            phjts.spectral_norm_coords(f, b) / s
            for f, s, b in zip(self.factors, self.scales, self.split(z))
        ]
        return np.max(np.stack(parts), axis=0)

    def to_dict(self):
        out = {"factors": [f.to_dict() for f in self.factors]}
        if any(s != 1.0 for s in self.scales):
            out["scales"] = list(self.scales)
        return out

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict) or "factors" not in data:
            raise PreconditionError('domain JSON needs a "factors" list')
        factors = tuple(CartanFactor.from_dict(f) for f in data["factors"])
        dom = cls(factors, data.get("scales"))
        return dom.normalized() if data.get("normalized") else dom


def membership(domain, z):
    r = float(domain.norm(z))
    if abs(r - 1.0) <= BOUNDARY_BAND:
        return Membership.BOUNDARY
    return Membership.INTERIOR if r < 1.0 else Membership.EXTERIOR


@dataclass(frozen=True, eq=False)
class BoundaryStratum:
    """``x = scale * (e + v)`` with ``e`` a rank-``j`` tripotent and ``v`` in V_0(e)."""

    j: int
    e: JtsElement
    v: JtsElement
    scale: float
    reconstruction_residual: float
    pierce_residual: float
    v_norm: float

    def point(self):
        return self.scale * (self.e.coords + self.v.coords)


def boundary_stratum(domain, x, tol=UNIT_LAMBDA_TOL):
    if not domain.irreducible:
        raise PreconditionError("boundary strata are only defined for irreducible domains")
    if membership(domain, x) is not Membership.BOUNDARY:
        raise PreconditionError("point is not on the boundary")
    f, scale = domain.factors[0], domain.scales[0]
    y = JtsElement(f, np.asarray(x, dtype=complex) / scale)
    dec = phjts.spectral_decompose(y)
    e = f.zero()
    for lam, t in zip(dec.lambdas, dec.tripotents):
        if lam >= 1.0 - tol:
            e = e + t
    v = y - e
    j = phjts.tripotent_rank(e)
    pierce = float(np.linalg.norm(phjts.derivation_matrix(e, e) @ v.coords))
    v_norm = phjts.spectral_norm(v)
    if pierce > 1e3 * max(tol, dec.residual):
        raise ConsistencyError(f"remainder is not in V_0(e) (residual {pierce:.3g})")
    if v_norm >= 1.0 - tol:
        raise ConsistencyError(f"remainder has spectral norm {v_norm} >= 1")
    recon = float(np.linalg.norm(scale * (e.coords + v.coords) - np.asarray(x)))
    return BoundaryStratum(j, e, v, scale, recon, pierce, v_norm)


def shilov_membership(domain, x, tol=UNIT_LAMBDA_TOL):
    return boundary_stratum(domain, x, tol).j == domain.rank


def frame(factor):
    """``rank`` mutually orthogonal primitive tripotents of a factor."""
    r = factor.expected_rank
    n_amb = factor.ambient_dim
    out = []
    if factor.kind == "IV":
        ep = np.zeros(n_amb, dtype=complex)
        ep[0], ep[1] = 1 / np.sqrt(2), 1j / np.sqrt(2)
        return [JtsElement(factor, ep), JtsElement(factor, np.conj(ep))]
    shape = factor.matrix_shape
    for k in range(r):
        m = np.zeros(shape, dtype=complex)
        if factor.kind == "II":
            m[2 * k, 2 * k + 1], m[2 * k + 1, 2 * k] = 1, -1
        else:
            m[k, k] = 1
        out.append(JtsElement(factor, factor.from_matrix(m)))
    return out


@dataclass(frozen=True, eq=False)
class PolydiskEmbedding:
    """``zeta -> sum_j zeta_j e_j`` over the concatenated (scaled) frames."""

    domain: DomainSpec
    vectors: np.ndarray = field(repr=False)  # (rank, total_dim)

    @property
    def rank(self):
        return self.vectors.shape[0]

    def __call__(self, zeta):
        zeta = np.asarray(zeta, dtype=complex)
        if zeta.shape[-1] != self.rank:
            raise StructuralError(f"polydisk has dimension {self.rank}, got {zeta.shape[-1]}")
        return zeta @ self.vectors

    def axis_disc(self, j):
        """The disc ``zeta -> phi(zeta * eps_j)`` (vectorized in ``zeta``)."""
        vec = self.vectors[j]
        return lambda zeta: np.asarray(zeta, dtype=complex)[..., None] * vec


def maximal_polydisk(domain):
    rows = []
    off = domain.offsets
    for i, (f, s) in enumerate(zip(domain.factors, domain.scales)):
        for e in frame(f):
            v = np.zeros(domain.total_dim, dtype=complex)
            v[off[i]:off[i + 1]] = s * e.coords
            rows.append(v)
    vectors = np.array(rows)
    vectors.flags.writeable = False
    return PolydiskEmbedding(domain, vectors)


def sample_boundary(factor, rng, size, stratum=None):
    """Boundary points of the canonical (scale 1) factor domain.

    Each sample picks a stratum ``j`` (uniformly unless given), sets the first
    ``j`` spectral values to 1 and draws the rest uniformly from [0, 1), then
    moves the point by a random automorphism fixing 0.
    """
    r = factor.expected_rank
    pts = np.empty((size, factor.ambient_dim), dtype=complex)
    for i in range(size):
        j = int(rng.integers(1, r + 1)) if stratum is None else stratum
        lam = np.concatenate([np.ones(j), np.sort(rng.random(r - j))[::-1]])
        pts[i] = phjts.element_with_spectrum(factor, lam, rng).coords
    return pts


def sample_shilov(factor, rng, size):
    return sample_boundary(factor, rng, size, stratum=factor.expected_rank)
