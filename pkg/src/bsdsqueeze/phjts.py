"""Jordan triple algebra of the four classical Cartan factors.

Elements are stored as complex coordinate vectors in an orthonormal basis
for the K-invariant inner product normalized so that primitive tripotents
have unit length.  Concretely:

* type I (p x q):   the matrix entries, row-major;
* type II (n x n antisymmetric):  the entries x[i, j], i < j, row-major;
* type III (n x n symmetric):  x[i, i] and sqrt(2) * x[i, j] (i < j), taken
  row-major over the upper triangle;
* type IV (spin factor):  the vector itself.

With this choice the standard Hermitian product of coordinate vectors *is*
the normalized invariant product, which keeps every Euclidean distance in
the rest of the package honest.

Triple products
---------------
Matrix types use ``{x, y, z} = x y* z + z y* x`` (so that ``D(e, e) e = 2 e``
and ``Q(x) y = x y* x``); types II and III are the restriction of this
product to antisymmetric / symmetric matrices.  The spin factor uses
``{x, y, z} = <x, y> z + <z, y> x - (x^T z) conj(y)``.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .errors import ConsistencyError, PreconditionError, StructuralError

__all__ = [
    "CartanFactor",
    "JtsElement",
    "SpectralDecomposition",
    "PierceDecomposition",
    "triple_product",
    "triple_product_coords",
    "quadratic_map",
    "odd_power",
    "is_tripotent",
    "spectral_decompose",
    "spectral_norm",
    "spectral_norm_coords",
    "derivation_matrix",
    "pierce_decompose",
    "are_orthogonal",
    "dominates",
    "tripotent_rank",
    "system_rank",
    "random_element",
    "random_unit_batch",
    "jordan_residual",
    "haar_unitary",
    "element_with_spectrum",
]

DEFAULT_TOL = 1e-9
# singular values closer than this (relative to the largest) share a tripotent
GROUP_RTOL = 1e-8

_SQRT2 = np.sqrt(2.0)
_KINDS = ("I", "II", "III", "IV")


@functools.lru_cache(maxsize=None)
def _certified_rank(kind, dims):
    factor = CartanFactor(kind, dims)
    found = system_rank(factor, trials=4, seed=0)
    if found != factor.expected_rank:
        raise ConsistencyError(
            f"{factor}: random elements have spectral length {found}, "
            f"expected rank {factor.expected_rank}"
        )
    return found


@dataclass(frozen=True)
class CartanFactor:
    """A classical irreducible Cartan factor.

    Use the ``type_i`` ... ``type_iv`` constructors; ``dims`` is ``(p, q)``
    for type I and ``(n,)`` otherwise.
    """

    kind: str
    dims: tuple

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        object.__setattr__(self, "dims", dims)
        if self.kind not in _KINDS:
            raise PreconditionError(f"unknown Cartan factor kind {self.kind!r}")
        if self.kind == "I":
            if len(dims) != 2:
                raise PreconditionError("type I needs dims (p, q)")
            p, q = dims
            if not 1 <= p <= q:
                raise PreconditionError(f"type I needs 1 <= p <= q, got {dims}")
        else:
            if len(dims) != 1:
                raise PreconditionError(f"type {self.kind} needs dims (n,)")
            n = dims[0]
            # II(1) is the zero space and IV(1) is not a spin factor
            lowest = 1 if self.kind == "III" else 2
            if n < lowest:
                raise PreconditionError(f"type {self.kind} needs n >= {lowest}, got {n}")

    @classmethod
    def type_i(cls, p, q):
        return cls("I", (p, q))

    @classmethod
    def type_ii(cls, n):
        return cls("II", (n,))

    @classmethod
    def type_iii(cls, n):
        return cls("III", (n,))

    @classmethod
    def type_iv(cls, n):
        return cls("IV", (n,))

    def __str__(self):
        return f"{self.kind}({','.join(map(str, self.dims))})"

    @property
    def n(self):
        return self.dims[-1]

    @property
    def ambient_dim(self):
        if self.kind == "I":
            return self.dims[0] * self.dims[1]
        n = self.dims[0]
        return {"II": n * (n - 1) // 2, "III": n * (n + 1) // 2, "IV": n}[self.kind]

    @property
    def matrix_shape(self):
        if self.kind == "I":
            return self.dims
        if self.kind == "IV":
            return None
        return (self.dims[0], self.dims[0])

    @property
    def expected_rank(self):
        """Textbook rank of the factor; only used to cross-check `rank`."""
        if self.kind == "I":
            return min(self.dims)
        n = self.dims[0]
        return {"II": n // 2, "III": n, "IV": 2}[self.kind]

    @property
    def rank(self):
        """Rank certified by :func:`system_rank` (computed once per factor)."""
        return _certified_rank(self.kind, self.dims)

    # -- coordinates <-> matrices -------------------------------------------

    def to_matrix(self, coords):
        """Matrix form of coordinate vectors; leading axes are batch axes."""
        coords = np.asarray(coords)
        if self.kind == "IV":
            return coords
        if self.kind == "I":
            return coords.reshape(coords.shape[:-1] + self.dims)
        n = self.dims[0]
        out = np.zeros(coords.shape[:-1] + (n, n), dtype=complex)
        if self.kind == "II":
            i, j = np.triu_indices(n, 1)
            out[..., i, j] = coords
            out[..., j, i] = -coords
        else:
            i, j = np.triu_indices(n)
            vals = coords * _triu_weights(n)
            out[..., i, j] = vals
            out[..., j, i] = vals
        return out

    def from_matrix(self, mat):
        """Coordinates of matrices, projecting onto the factor's symmetry class."""
        mat = np.asarray(mat, dtype=complex)
        if self.kind == "IV":
            return mat
        if self.kind == "I":
            return mat.reshape(mat.shape[:-2] + (self.ambient_dim,))
        n = self.dims[0]
        swapped = np.swapaxes(mat, -1, -2)
        if self.kind == "II":
            i, j = np.triu_indices(n, 1)
            return ((mat - swapped) / 2)[..., i, j]
        i, j = np.triu_indices(n)
        return ((mat + swapped) / 2)[..., i, j] / _triu_weights(n)

    def element(self, coords):
        return JtsElement(self, coords)

    def element_from_matrix(self, mat):
        """Element with the given matrix; the symmetry class is checked exactly."""
        mat = np.asarray(mat, dtype=complex)
        if self.kind == "IV":
            raise StructuralError("type IV elements have no matrix form")
        if mat.shape != self.matrix_shape:
            raise StructuralError(f"expected a {self.matrix_shape} matrix, got {mat.shape}")
        if self.kind == "II" and not np.array_equal(mat, -mat.T):
            raise StructuralError("type II elements must be antisymmetric")
        if self.kind == "III" and not np.array_equal(mat, mat.T):
            raise StructuralError("type III elements must be symmetric")
        return JtsElement(self, self.from_matrix(mat))

    def zero(self):
        return JtsElement(self, np.zeros(self.ambient_dim, dtype=complex))

    def to_dict(self):
        if self.kind == "I":
            return {"kind": "I", "p": self.dims[0], "q": self.dims[1]}
        return {"kind": self.kind, "n": self.dims[0]}

    @classmethod
    def from_dict(cls, data):
        try:
            kind = str(data["kind"])
            if kind == "I":
                return cls.type_i(int(data["p"]), int(data["q"]))
            return cls(kind, (int(data["n"]),))
        except (KeyError, TypeError) as exc:
            raise PreconditionError(f"malformed factor description {data!r}: {exc}") from None


@functools.lru_cache(maxsize=None)
def _triu_weights(n):
    i, j = np.triu_indices(n)
    w = np.where(i == j, 1.0, 1.0 / _SQRT2)
    w.flags.writeable = False
    return w


@dataclass(frozen=True, eq=False)
class JtsElement:
    factor: CartanFactor
    coords: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coords, dtype=complex).reshape(-1)
        if c.shape[0] != self.factor.ambient_dim:
            raise StructuralError(
                f"{self.factor} has dimension {self.factor.ambient_dim}, "
                f"got {c.shape[0]} coordinates"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coords", c)

    def __repr__(self):
        return f"JtsElement({self.factor}, {np.array2string(self.coords, precision=4)})"

    @property
    def matrix(self):
        return self.factor.to_matrix(self.coords)

    def norm(self):
        """Norm of the (normalized) invariant inner product."""
        return float(np.linalg.norm(self.coords))

    def _check(self, other):
        if not isinstance(other, JtsElement):
            raise StructuralError(f"expected a JtsElement, got {type(other).__name__}")
        if other.factor != self.factor:
            raise StructuralError(f"factor mismatch: {self.factor} vs {other.factor}")

    def __add__(self, other):
        self._check(other)
        return JtsElement(self.factor, self.coords + other.coords)

    def __sub__(self, other):
        self._check(other)
        return JtsElement(self.factor, self.coords - other.coords)

    def __neg__(self):
        return JtsElement(self.factor, -self.coords)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return JtsElement(self.factor, complex(scalar) * self.coords)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return JtsElement(self.factor, self.coords / complex(scalar))


# -- products -----------------------------------------------------------------


def triple_product_coords(factor, x, y, z):
    """Batched triple product on raw coordinate arrays of shape (..., N)."""
    if factor.kind == "IV":
        x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=complex) for a in (x, y, z)))
        yc = np.conj(y)
        xy = np.sum(x * yc, axis=-1)[..., None]
        zy = np.sum(z * yc, axis=-1)[..., None]
        xz = np.sum(x * z, axis=-1)[..., None]
        return xy * z + zy * x - xz * yc
    a = factor.to_matrix(x)
    bh = np.conj(np.swapaxes(factor.to_matrix(y), -1, -2))
    c = factor.to_matrix(z)
    return factor.from_matrix(a @ bh @ c + c @ bh @ a)


def jordan_residual(factor, x, y, u, v, w):
    """Norm of the Jordan identity defect, batched over leading axes.

    ``{x,y,{u,v,w}} - {{x,y,u},v,w} + {u,{y,x,v},w} - {u,v,{x,y,w}}``
    """
    tp = lambda a, b, c: triple_product_coords(factor, a, b, c)  # noqa: E731
    lhs = tp(x, y, tp(u, v, w))
    rhs = tp(tp(x, y, u), v, w) - tp(u, tp(y, x, v), w) + tp(u, v, tp(x, y, w))
    return np.linalg.norm(lhs - rhs, axis=-1)


def random_unit_batch(factor, rng, size):
    """``size`` Gaussian coordinate vectors scaled to unit norm."""
    n = factor.ambient_dim
    g = rng.standard_normal((size, n)) + 1j * rng.standard_normal((size, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _same_factor(*elems):
    f = elems[0].factor
    for e in elems:
        if not isinstance(e, JtsElement):
            raise StructuralError(f"expected JtsElement, got {type(e).__name__}")
        if e.factor != f:
            raise StructuralError(f"factor mismatch: {f} vs {e.factor}")
    return f


def triple_product(x, y, z):
    f = _same_factor(x, y, z)
    return JtsElement(f, triple_product_coords(f, x.coords, y.coords, z.coords))


def quadratic_map(x, y):
    """``Q(x) y``: half of ``{x, y, x}``, conjugate-linear in ``y``."""
    f = _same_factor(x, y)
    return JtsElement(f, triple_product_coords(f, x.coords, y.coords, x.coords) / 2)


def odd_power(x, k):
    """The odd power ``x^(k)`` defined by ``x^(k) = Q(x) x^(k-2)``."""
    if isinstance(k, bool) or int(k) != k or k < 1 or k % 2 == 0:
        raise PreconditionError(f"odd power needs an odd positive integer, got {k!r}")
    out = x
    for _ in range((int(k) - 1) // 2):
        out = quadratic_map(x, out)
    return out


def derivation_matrix(x, y):
    """Matrix of the complex-linear map ``z -> {x, y, z}`` in coordinates."""
    f = _same_factor(x, y)
    basis = np.eye(f.ambient_dim, dtype=complex)
    images = triple_product_coords(f, x.coords[None, :], y.coords[None, :], basis)
    return images.T


def is_tripotent(x, tol=DEFAULT_TOL):
    if tol <= 0:
        raise PreconditionError("tolerance must be positive")
    return bool(np.linalg.norm(odd_power(x, 3).coords - x.coords) <= tol)


# -- spectral theory ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    element: JtsElement
    lambdas: tuple
    tripotents: tuple
    residual: float

    @property
    def s(self):
        return len(self.lambdas)

    def reconstruct(self):
        out = self.element.factor.zero()
        for lam, e in zip(self.lambdas, self.tripotents):
            out = out + lam * e
        return out


def _groups(values, rtol):
    """Split a non-increasing sequence into runs separated by gaps > rtol*max."""
    if len(values) == 0:
        return []
    gap = rtol * values[0]
    groups = [[0]]
    for i in range(1, len(values)):
        if values[i - 1] - values[i] > gap:
            groups.append([i])
        else:
            groups[-1].append(i)
    return groups


def _spectral_matrix(x, tol):
    f = x.factor
    u, s, vh = np.linalg.svd(x.matrix, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return [], []
    keep = s > tol * s[0]
    s = s[keep]
    lambdas, trips = [], []
    for g in _groups(s, GROUP_RTOL):
        e = u[:, g] @ vh[g, :]
        lambdas.append(float(np.mean(s[g])))
        trips.append(JtsElement(f, f.from_matrix(e)))
    return lambdas, trips


def _spin_parts(coords):
    """Phase and real/imaginary parts with ``x = e^{i theta} (a + i b)``, a.b = 0."""
    q = np.sum(coords * coords)
    theta = np.angle(q) / 2
    y = coords * np.exp(-1j * theta)
    return theta, y.real, y.imag


def _spectral_spin(x, tol):
    f = x.factor
    if not np.any(x.coords):
        return [], []
    theta, a, b = _spin_parts(x.coords)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    l1 = (na + nb) / _SQRT2
    l2 = (na - nb) / _SQRT2
    phase = np.exp(1j * theta)
    ahat = a / na
    if l1 - l2 <= GROUP_RTOL * l1:
        # both spectral values coincide: a single maximal tripotent
        return [float((l1 + l2) / 2)], [JtsElement(f, phase * _SQRT2 * ahat)]
    bhat = b / nb
    e1 = JtsElement(f, phase * (ahat + 1j * bhat) / _SQRT2)
    if l2 <= tol * l1:
        return [float(l1)], [e1]
    e2 = JtsElement(f, phase * (ahat - 1j * bhat) / _SQRT2)
    return [float(l1), float(l2)], [e1, e2]


def spectral_decompose(x, tol=DEFAULT_TOL):
    """Spectral decomposition ``x = sum_i lambda_i e_i``.

    Spectral values within ``GROUP_RTOL`` (relative) of each other are merged
    into one tripotent; values below ``tol * lambda_1`` are dropped.  The zero
    element has the empty decomposition.
    """
    if not np.all(np.isfinite(x.coords)):
        raise PreconditionError("element has non-finite coordinates")
    if x.factor.kind == "IV":
        lambdas, trips = _spectral_spin(x, tol)
    else:
        lambdas, trips = _spectral_matrix(x, tol)
    recon = np.zeros_like(x.coords)
    for lam, e in zip(lambdas, trips):
        recon = recon + lam * e.coords
    residual = float(np.linalg.norm(x.coords - recon))
    return SpectralDecomposition(x, tuple(lambdas), tuple(trips), residual)


def spectral_norm_coords(factor, coords):
    """Spectral norm of a batch of coordinate vectors (..., N) -> (...)."""
    coords = np.asarray(coords, dtype=complex)
    if factor.kind == "IV":
        n2 = np.sum(np.abs(coords) ** 2, axis=-1)
        q = np.abs(np.sum(coords * coords, axis=-1))
        s = np.sqrt(n2 + q)  # lambda_1 + lambda_2
        # lambda_1 - lambda_2 = 2 |a ^ b| / s for x = a + ib, which avoids
        # cancelling n2 - q when the two spectral values are close
        a, b = coords.real, coords.imag
        wedge = a[..., :, None] * b[..., None, :] - b[..., :, None] * a[..., None, :]
        w = np.sqrt(np.sum(wedge**2, axis=(-2, -1)) / 2)
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.where(s > 0, 2 * w / np.where(s > 0, s, 1.0), 0.0)
        return (s + d) / 2
    mats = factor.to_matrix(coords)
    return np.linalg.svd(mats, compute_uv=False)[..., 0]


def spectral_norm(x):
    return float(spectral_norm_coords(x.factor, x.coords))


# -- Pierce decomposition and the tripotent order ------------------------------


@dataclass(frozen=True, eq=False)
class PierceDecomposition:
    e: JtsElement
    bases: tuple  # three (N, d_j) arrays with orthonormal columns
    dims: tuple
    eigen_residual: float
    rule_residual: float

    def space(self, j):
        return self.bases[j]


def _pierce_rule_residual(f, dee, bases):
    probes = {}
    for j, basis in enumerate(bases):
        if basis.shape[1]:
            total = basis.sum(axis=1)
            probes[j] = [basis[:, 0], total / np.linalg.norm(total)]
    worst = 0.0
    for alpha, us in probes.items():
        for beta, vs in probes.items():
            for gamma, ws in probes.items():
                target = alpha - beta + gamma
                for u in us:
                    for v in vs:
                        for w in ws:
                            out = triple_product_coords(f, u, v, w)
                            if 0 <= target <= 2:
                                r = np.linalg.norm(dee @ out - target * out)
                            else:
                                r = np.linalg.norm(out)
                            worst = max(worst, float(r))
    return worst


def pierce_decompose(e, tol=DEFAULT_TOL):
    """Eigenspaces of ``D(e, e)`` for the eigenvalues 0, 1 and 2.

    Raises :class:`PreconditionError` if ``e`` is not a tripotent and
    :class:`ConsistencyError` if ``D(e, e)`` has an eigenvalue away from
    {0, 1, 2} or the product rule ``{V_a, V_b, V_c} in V_{a-b+c}`` fails.
    """
    if not is_tripotent(e, tol):
        raise PreconditionError("Pierce decomposition needs a tripotent")
    f = e.factor
    dee = derivation_matrix(e, e)
    herm = np.linalg.norm(dee - dee.conj().T)
    if herm > 100 * tol:
        raise ConsistencyError(f"D(e, e) is not self-adjoint (residual {herm:.3g})")
    w, v = np.linalg.eigh((dee + dee.conj().T) / 2)
    labels = np.rint(w).astype(int)
    eig_res = float(np.max(np.abs(w - labels))) if w.size else 0.0
    if eig_res > tol or np.any((labels < 0) | (labels > 2)):
        raise ConsistencyError(f"D(e, e) has spectrum {w} outside {{0, 1, 2}}")
    bases = tuple(v[:, labels == j] for j in range(3))
    dims = tuple(b.shape[1] for b in bases)
    rule = _pierce_rule_residual(f, dee, bases)
    if rule > 100 * tol * max(1.0, e.norm() ** 3):
        raise ConsistencyError(f"Pierce product rule violated (residual {rule:.3g})")
    return PierceDecomposition(e, bases, dims, eig_res, rule)


def _require_tripotents(tol, *elems):
    for e in elems:
        if not is_tripotent(e, tol):
            raise PreconditionError("argument is not a tripotent")


def _orthogonal(e1, e2, tol):
    return bool(np.linalg.norm(derivation_matrix(e1, e2), 2) <= tol)


def are_orthogonal(e1, e2, tol=DEFAULT_TOL):
    """True iff the operator ``D(e1, e2)`` vanishes (operator norm <= tol)."""
    _same_factor(e1, e2)
    _require_tripotents(tol, e1, e2)
    return _orthogonal(e1, e2, tol)


def dominates(e, eprime, tol=DEFAULT_TOL):
    """True iff ``e <= eprime``: ``eprime - e`` is a tripotent orthogonal to ``e``."""
    _same_factor(e, eprime)
    _require_tripotents(tol, e, eprime)
    d = eprime - e
    if d.norm() <= tol:
        return True
    return is_tripotent(d, tol) and _orthogonal(e, d, tol)


def tripotent_rank(e, tol=DEFAULT_TOL):
    """Number of orthogonal primitive tripotents summing to ``e``."""
    if e.norm() <= tol:
        raise PreconditionError("the zero tripotent has no rank")
    _require_tripotents(tol, e)
    f = e.factor
    if f.kind == "IV":
        # primitive tripotents are isotropic (e.e = 0); maximal ones have |e.e| = 2
        rank = 2 if abs(np.sum(e.coords * e.coords)) > 1.0 else 1
    else:
        s = np.linalg.svd(e.matrix, compute_uv=False)
        count = int(np.sum(s > 0.5))
        # antisymmetric primitive tripotents carry a pair of unit singular values
        rank = count // 2 if f.kind == "II" else count
    if not 1 <= rank <= f.expected_rank:
        raise ConsistencyError(f"tripotent rank {rank} out of range for {f}")
    return rank


def random_element(factor, rng):
    """Element with independent standard complex Gaussian coordinates."""
    n = factor.ambient_dim
    coords = (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / _SQRT2
    return JtsElement(factor, coords)


def system_rank(factor, trials=8, seed=0):
    """Largest spectral length over ``trials`` random elements.

    Random elements are generic with probability one, so this is the rank of
    the triple system.
    """
    if trials < 1:
        raise PreconditionError("system_rank needs at least one trial")
    rng = np.random.default_rng(seed)
    return max(spectral_decompose(random_element(factor, rng)).s for _ in range(trials))


# -- prescribed spectra -------------------------------------------------------


def haar_unitary(n, rng, real=False):
    """Haar-distributed unitary (orthogonal if ``real``) matrix."""
    z = rng.standard_normal((n, n))
    if not real:
        z = z + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def element_with_spectrum(factor, lambdas, rng=None):
    """Element whose spectral values are ``lambdas`` (padded with zeros).

    The element is the image of ``sum_j lambdas[j] * frame[j]`` under a random
    linear automorphism fixing 0, or the frame combination itself when
    ``rng`` is None.
    """
    lam = np.zeros(factor.expected_rank)
    given = np.asarray(lambdas, dtype=float)
    if given.size > lam.size:
        raise PreconditionError(f"{factor} has rank {lam.size}, got {given.size} values")
    lam[: given.size] = given
    kind = factor.kind
    if kind == "IV":
        n = factor.n
        ep = np.zeros(n, dtype=complex)
        ep[0], ep[1] = 1 / _SQRT2, 1j / _SQRT2
        x = lam[0] * ep + lam[1] * np.conj(ep)
        if rng is not None:
            x = np.exp(2j * np.pi * rng.random()) * (haar_unitary(n, rng, real=True) @ x)
        return JtsElement(factor, x)
    if kind == "I":
        p, q = factor.dims
        core = np.zeros((p, q), dtype=complex)
        core[np.arange(p), np.arange(p)] = lam
        if rng is not None:
            core = haar_unitary(p, rng) @ core @ haar_unitary(q, rng).conj().T
        return JtsElement(factor, factor.from_matrix(core))
    n = factor.n
    core = np.zeros((n, n), dtype=complex)
    if kind == "II":
        for k, val in enumerate(lam):
            core[2 * k, 2 * k + 1] = val
            core[2 * k + 1, 2 * k] = -val
    else:
        core[np.arange(n), np.arange(n)] = lam
    if rng is not None:
        u = haar_unitary(n, rng)
        core = u @ core @ u.T
    return JtsElement(factor, factor.from_matrix(core))
