"""Squeezing-function values and bounds.

Everything here returns a :class:`SqueezeBound` (or a certificate) that says
which fact produced each side of the bound, so downstream reports can carry
the provenance verbatim.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .kobayashi import dist_to_set
from .symdomain import maximal_polydisk

EXACT_TOL = 1e-12


@dataclass(frozen=True)
class SqueezeBound:
    lower: float
    upper: float
    exact: bool = False
    provenance: tuple = ()
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        lo, hi = float(self.lower), float(self.upper)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if not 0.0 <= lo <= hi + EXACT_TOL or hi > 1.0 + EXACT_TOL:
            raise PreconditionError(f"invalid squeezing bound [{lo}, {hi}]")
        if self.exact and hi - lo > EXACT_TOL:
            raise PreconditionError("an exact bound needs lower == upper")

    def to_dict(self):
        out = {
            "lower": self.lower,
            "upper": self.upper,
            "exact": self.exact,
            "provenance": [dict(p) for p in self.provenance],
        }
        if self.metadata:
            out["metadata"] = self.metadata
        return out


def exact_constant(domain):
    """``1/sqrt(rank)`` for any bounded symmetric domain (products included)."""
    ranks = [f.rank for f in domain.factors]
    value = 1.0 / math.sqrt(sum(ranks))
    prov = (
        {
            "fact": "squeezing constant of a bounded symmetric domain equals 1/sqrt(rank)",
            "upper": "polydisk of dimension rank plus Hardy-space coefficient bound",
            "lower": "normalized realization contains the ball of radius 1/sqrt(rank)",
        },
        {
            "fact": "rank is additive over irreducible factors",
            "factor_ranks": ranks,
        },
    )
    return SqueezeBound(value, value, True, prov)


def product_lower_bound(parts):
    """``(sum 1/s_i^2)^(-1/2)`` for per-factor squeezing values ``s_i``."""
    parts = [float(s) for s in parts]
    if not parts:
        raise PreconditionError("need at least one factor value")
    if any(not 0.0 < s <= 1.0 for s in parts):
        raise PreconditionError(f"factor squeezing values must lie in (0, 1], got {parts}")
    return 1.0 / math.sqrt(sum(1.0 / s**2 for s in parts))


def aux_conversion(value, rank, direction="std->aux"):
    """Interval for the other squeezing function (standard vs normalized-domain model).

    Both functions are at most 1, so the upper end is capped there.
    """
    if direction not in ("std->aux", "aux->std"):
        raise PreconditionError(f"unknown direction {direction!r}")
    if not 0.0 < value <= 1.0 or int(rank) != rank or rank < 1:
        raise PreconditionError("need value in (0, 1] and a positive integer rank")
    root = math.sqrt(rank)
    return (value / root, min(1.0, root * value))


def removed_set_bounds(domain, z, removed, levels=4):
    """Two-sided bound for the squeezing function of ``domain`` minus ``removed``.

    ``tanh(K)/sqrt(rank) <= s(z) <= tanh(K)`` with ``K = K(z; S)``; equality on
    the upper side when the domain is a ball.  ``K`` is replaced by the
    sampled envelope, which over-estimates it.
    """
    if not domain.irreducible:
        raise PreconditionError("removed-set bounds need an irreducible ambient domain")
    if domain.total_dim < 2:
        raise PreconditionError("removed-set bounds need dimension >= 2")
    env = dist_to_set(domain, z, removed, levels)
    rank = domain.rank
    t = math.tanh(env.value)
    meta = {
        "kobayashi_envelope": env.to_dict(),
        "rank": rank,
        "approximation": {
            "upper": "tanh of an over-estimate of K(z;S): may exceed the true upper bound",
            "lower": "same envelope divided by sqrt(rank)",
        },
    }
    if env.degenerate:
        meta["note"] = "z lies in the removed set"
        return SqueezeBound(0.0, 0.0, False, (), meta)
    prov = (
        {"fact": "tanh(K(z;S)) is an upper bound after removing an analytic subvariety or compact set"},
        {"fact": "normalized realization with 0 at z contains tanh(K(z;S)) times itself; "
                 "comparison with the ball costs a factor sqrt(rank)"},
    )
    return SqueezeBound(t / math.sqrt(rank), t, rank == 1, prov, meta)


def product_exclusion(s_value, contractible, pseudoconvex, dim):
    """Which product decompositions a squeezing value rules out.

    The topological hypotheses are taken on trust and echoed back in every
    diagnostic.
    """
    if not 0.0 < s_value <= 1.0:
        raise PreconditionError("squeezing value must lie in (0, 1]")
    hyp = {"contractible": bool(contractible), "pseudoconvex": bool(pseudoconvex),
           "dim": int(dim), "verified": False}
    out = []
    if dim < 2 or not pseudoconvex:
        return out
    for m in range(2, dim + 1):
        if s_value > 1.0 / math.sqrt(m) and contractible:
            out.append({"part": "a", "m": m, "hypotheses": hyp,
                        "conclusion": f"not biholomorphic to a product of {m} or more irreducible factors"})
    if dim >= 4:
        for m in range(2, dim // 2 + 1):
            if s_value > 1.0 / math.sqrt(m):
                out.append({"part": "b", "m": m, "hypotheses": hyp,
                            "conclusion": f"not biholomorphic to a product of {m} factors of dimension >= 2"})
    return out


# -- Hardy-space certificate --------------------------------------------------

DEFAULT_RHOS = (0.9, 0.99, 0.999)


@dataclass(frozen=True)
class HardyCertificate:
    p: int
    R: float
    per_disc_mass: tuple
    total_mass: float
    samples: int
    torus_samples: int
    rho_schedule: tuple
    mass_history: tuple  # (rho, per-disc masses, total) per schedule entry
    slack: float
    center_residual: float
    ok: bool
    failures: tuple
    conclusion: float
    hypotheses: dict

    def to_dict(self):
        return {
            "p": self.p,
            "R": self.R,
            "per_disc_mass": list(self.per_disc_mass),
            "total_mass": self.total_mass,
            "samples": self.samples,
            "torus_samples": self.torus_samples,
            "rho_schedule": list(self.rho_schedule),
            "mass_history": [
                {"rho": r, "per_disc_mass": list(m), "total_mass": t}
                for r, m, t in self.mass_history
            ],
            "conclusion": self.conclusion,
            "slack": self.slack,
            "center_residual": self.center_residual,
            "ok": self.ok,
            "failures": list(self.failures),
            "hypotheses": self.hypotheses,
        }


def _is_pow2(n):
    return n >= 1 and (n & (n - 1)) == 0


def _disc_mass(F, disc, rho, samples):
    theta = 2 * np.pi * np.arange(samples) / samples
    g = np.asarray(F(disc(rho * np.exp(1j * theta))), dtype=complex)
    coeffs = np.fft.fft(g, axis=0) / samples
    # coefficient 0 is g at the center, which must vanish
    return float(np.sum(np.abs(coeffs[1:]) ** 2)), float(np.linalg.norm(coeffs[0]))


def _torus_mass(F, phi, p, rho, m):
    axes = [2 * np.pi * np.arange(m) / m] * p
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, p)
    g = np.asarray(F(phi(rho * np.exp(1j * grid))), dtype=complex)
    return float(np.mean(np.sum(np.abs(g) ** 2, axis=-1)))


def hardy_certificate(F, phi, p, R, samples=4096, rho_schedule=DEFAULT_RHOS, torus_samples=None):
    """Certificate that ``s_D(z) <= 1/sqrt(p)`` from a polydisk ``phi`` through ``z``.

    ``F`` is an injective map of ``D`` into the unit ball with ``F(z) = 0`` and
    ``B(0, R)`` inside its image; ``phi`` maps the ``p``-polydisk into ``D``
    with ``phi(0) = z`` and boundary values of its axis discs on the boundary
    of ``D``.  These hypotheses are asserted by the caller.  Both maps are
    vectorized over leading axes.

    The axis-disc masses (sum of squared Taylor coefficients of ``F o phi``
    along each axis) are computed by FFT on circles of radius ``rho``; the
    full mass by Parseval on a ``torus_samples**p`` grid.  The chain
    ``p R^2 <= sum of axis masses <= total <= 1`` is then checked with a
    relative slack of ``10/samples``.
    """
    if not _is_pow2(samples):
        raise PreconditionError(f"samples must be a power of two, got {samples}")
    if p < 1 or R <= 0:
        raise PreconditionError("need p >= 1 and R > 0")
    rhos = tuple(float(r) for r in rho_schedule)
    if not rhos or any(not 0 < r < 1 for r in rhos) or list(rhos) != sorted(rhos):
        raise PreconditionError("rho schedule must be increasing inside (0, 1)")
    if torus_samples is None:
        torus_samples = max(8, 1 << (int(round(math.log2(samples))) // p))
    if not _is_pow2(torus_samples):
        raise PreconditionError("torus_samples must be a power of two")

    def disc(j):
        def axis(zeta):
            pts = np.zeros(np.shape(zeta) + (p,), dtype=complex)
            pts[..., j] = zeta
            return phi(pts)

        return axis

    history = []
    center = 0.0
    for rho in rhos:
        masses = []
        for j in range(p):
            mass, c0 = _disc_mass(F, disc(j), rho, samples)
            masses.append(mass)
            center = max(center, c0)
        total = _torus_mass(F, phi, p, rho, torus_samples)
        history.append((rho, tuple(masses), total))

    slack = 10.0 / samples
    _, masses, total = history[-1]
    failures = []
    for j, mass in enumerate(masses):
        if mass < R**2 * (1 - slack):
            failures.append(f"axis disc {j}: mass {mass:.6g} < R^2 = {R**2:.6g}")
    if total > 1 + slack:
        failures.append(f"total mass {total:.6g} exceeds 1")
    if sum(masses) > total * (1 + slack):
        failures.append("axis masses exceed the total mass")
    if p * R**2 * (1 - slack) > total:
        failures.append(f"p R^2 = {p * R**2:.6g} exceeds the total mass {total:.6g}")
    if center > 1e-9:
        failures.append(f"F(phi(0)) = {center:.3g} is not 0")
    return HardyCertificate(
        p=int(p), R=float(R), per_disc_mass=tuple(masses), total_mass=total,
        samples=int(samples), torus_samples=int(torus_samples), rho_schedule=rhos,
        mass_history=tuple(history), slack=slack, center_residual=center,
        ok=not failures, failures=tuple(failures), conclusion=1.0 / math.sqrt(p),
        hypotheses={"boundary_cluster_condition": "asserted", "F_injective": "asserted",
                    "ball_of_radius_R_in_image": "asserted"},
    )


def symmetric_domain_certificate(domain, samples=4096, rho_schedule=DEFAULT_RHOS, torus_samples=None):
    """Hardy certificate for a bounded symmetric domain at the origin.

    Uses ``F = id / sqrt(rank)`` in the orthonormal coordinates, which maps
    the canonical realization into the unit ball and contains the ball of
    radius ``1/sqrt(rank)``, together with the maximal polydisk.
    """
    r = domain.rank
    scale = math.sqrt(r)
    norms = np.array(domain.scales)
    if not np.allclose(norms, norms[0]):
        raise PreconditionError("certificate needs a common realization scale")
    F = lambda pts: np.asarray(pts) / (scale * norms[0])  # noqa: E731
    return hardy_certificate(F, maximal_polydisk(domain), r, 1.0 / scale, samples,
                             rho_schedule, torus_samples)
