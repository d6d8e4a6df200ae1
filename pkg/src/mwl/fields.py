"""Grid-discretized matrix weight fields on a periodic 1-D domain.

A field assigns to each midpoint x_i = (i + 1/2) h of a uniform grid a small
complex matrix (weights) or vector (functions).  All quadrature is the
midpoint Riemann sum with cell width h, and cube averages use the dyadic
family of intervals, so norms and Muckenhoupt characteristics share one
discretization convention.
"""

import json
import numpy as np

from .linalg import (
    LinalgError,
    hermitian_part,
    jacobi_eigh,
)

__all__ = [
    "EIG_MIN",
    "EIG_MAX",
    "GridDomain",
    "DyadicCubeFamily",
    "MatrixWeightField",
    "GeneralWeightField",
    "VectorField",
    "identity_weight",
    "scalar_weight_field",
    "general_weight_field",
    "vector_field",
    "absolute_value_field",
    "log_weight_field",
    "weighted_norm",
    "unweighted_l2_norm",
    "ap_characteristic",
    "bmo_norm",
    "gen_commuting_pair",
    "gen_rotating_weight",
    "scalar_sample_a2",
    "random_vector_field",
    "save_weight_field",
    "load_weight_field",
]

# Spectral clamps for weight fields; keeps every W^t and log W representable.
EIG_MIN = 1e-12
EIG_MAX = 1e12


class FieldError(ValueError):
    pass


class GridDomain:
    """Uniform periodic grid: N midpoints on [0, length), N a power of two."""

    def __init__(self, n_points, length=1.0, dim=1):
        n_points = int(n_points)
        if dim != 1:
            raise FieldError("only dim = 1 is supported in this version")
        if n_points < 16 or n_points > 2 ** 16 or (n_points & (n_points - 1)) != 0:
            raise FieldError(
                f"n_points must be a power of two in [16, 65536], got {n_points}")
        if not length > 0:
            raise FieldError("length must be positive")
        self.n_points = n_points
        self.length = float(length)
        self.dim = 1

    @property
    def h(self):
        return self.length / self.n_points

    def points(self):
        return (np.arange(self.n_points) + 0.5) * self.h

    def __eq__(self, other):
        return (isinstance(other, GridDomain)
                and self.n_points == other.n_points
                and self.length == other.length)

    def __hash__(self):
        return hash((self.n_points, self.length))

    def __repr__(self):
        return f"GridDomain(n_points={self.n_points}, length={self.length})"


class DyadicCubeFamily:
    """Dyadic intervals of the domain, from the full period down to cells.

    Scale s has 2**s cubes of n_points / 2**s grid cells each; every scale
    partitions the domain and consecutive scales nest.
    """

    def __init__(self, domain):
        self.domain = domain
        self.n_scales = int(np.log2(domain.n_points)) + 1

    def iter_scales(self):
        """Yield (cube_size_in_cells, number_of_cubes) per scale, coarse first."""
        size = self.domain.n_points
        while size >= 1:
            yield size, self.domain.n_points // size
            size //= 2


def _same_domain(a, b):
    if a.domain != b.domain:
        raise FieldError("fields live on different grid domains")
    if a.n != b.n:
        raise FieldError(f"vector dimensions differ: {a.n} vs {b.n}")


class MatrixWeightField:
    """Positive definite Hermitian matrix at every grid point.

    The per-point eigendecomposition is computed once at construction (it
    also validates the spectral clamps) and reused for all powers and logs.
    Instances are immutable.
    """

    def __init__(self, domain, values, _spectral=None):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 3 or values.shape[0] != domain.n_points \
                or values.shape[1] != values.shape[2]:
            raise FieldError(f"expected shape (N, n, n), got {values.shape}")
        values = hermitian_part(values)
        if _spectral is None:
            lam, U = jacobi_eigh(values)
        else:
            lam, U = _spectral
        bad = np.nonzero((lam.min(axis=-1) < EIG_MIN) | (lam.max(axis=-1) > EIG_MAX))[0]
        if bad.size:
            i = int(bad[0])
            raise FieldError(
                f"weight not positive definite within clamps at grid index {i} "
                f"(eigenvalues {np.sort(lam[i])})")
        self.domain = domain
        self.values = values
        self.lam = lam
        self.U = U
        self.values.flags.writeable = False

    @property
    def n(self):
        return self.values.shape[-1]

    def power(self, t):
        """Pointwise W^t as a new weight field (t real)."""
        new_lam = self.lam ** float(t)
        vals = np.einsum("xij,xj,xkj->xik", self.U, new_lam, np.conj(self.U))
        order = np.argsort(-new_lam, axis=-1, kind="stable")
        lam_sorted = np.take_along_axis(new_lam, order, axis=-1)
        U_sorted = np.take_along_axis(self.U, order[:, None, :], axis=-1)
        return MatrixWeightField(self.domain, vals, _spectral=(lam_sorted, U_sorted))

    def log(self):
        """Pointwise log W as a plain Hermitian stack (may be indefinite)."""
        return hermitian_part(
            np.einsum("xij,xj,xkj->xik", self.U, np.log(self.lam), np.conj(self.U)))

    def apply(self, f):
        """Pointwise matrix-vector product W f."""
        _same_domain(self, f)
        return VectorField(self.domain, np.einsum("xij,xj->xi", self.values, f.values))

    def power_amplitudes(self, f, t):
        """Pointwise ||W^t f||_2 without forming W^t (uses cached spectrum)."""
        _same_domain(self, f)
        coeff = np.einsum("xij,xi->xj", np.conj(self.U), f.values)
        return np.sqrt(np.einsum("xj,xj->x", self.lam ** (2.0 * t),
                                 np.abs(coeff) ** 2).real)


class GeneralWeightField:
    """Invertible (not necessarily Hermitian) matrix at every grid point."""

    def __init__(self, domain, values, cond_limit=1e12):
        values = np.asarray(values, dtype=complex)
        if values.ndim != 3 or values.shape[0] != domain.n_points \
                or values.shape[1] != values.shape[2]:
            raise FieldError(f"expected shape (N, n, n), got {values.shape}")
        gram = hermitian_part(np.einsum("xji,xjk->xik", np.conj(values), values))
        lam, U = jacobi_eigh(gram)
        smin = np.sqrt(np.maximum(lam.min(axis=-1), 0.0))
        smax = np.sqrt(np.maximum(lam.max(axis=-1), 0.0))
        bad = np.nonzero((smin <= 0) | (smax > cond_limit * smin))[0]
        if bad.size:
            i = int(bad[0])
            raise FieldError(
                f"weight is singular/ill-conditioned at grid index {i} "
                f"(smallest singular value {smin[i]:.3e})")
        self.domain = domain
        self.values = values
        self._gram_lam = lam
        self._gram_U = U
        self.values.flags.writeable = False

    @property
    def n(self):
        return self.values.shape[-1]

    def apply(self, f):
        _same_domain(self, f)
        return VectorField(self.domain, np.einsum("xij,xj->xi", self.values, f.values))

    def absolute(self):
        """Pointwise |V| = (V* V)^(1/2) as a MatrixWeightField."""
        vals = np.einsum("xij,xj,xkj->xik", self._gram_U,
                         np.sqrt(np.maximum(self._gram_lam, 0.0)),
                         np.conj(self._gram_U))
        lam = np.sqrt(np.maximum(self._gram_lam, 0.0))
        return MatrixWeightField(self.domain, vals, _spectral=(lam, self._gram_U))


class VectorField:
    """Complex n-vector at every grid point."""

    def __init__(self, domain, values):
        values = np.asarray(values, dtype=complex)
        if values.ndim == 1:
            values = values[:, None]
        if values.ndim != 2 or values.shape[0] != domain.n_points:
            raise FieldError(f"expected shape (N, n), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise FieldError("vector field has non-finite entries")
        self.domain = domain
        self.values = values
        self.values.flags.writeable = False

    @property
    def n(self):
        return self.values.shape[-1]

    def __add__(self, other):
        _same_domain(self, other)
        return VectorField(self.domain, self.values + other.values)

    def __sub__(self, other):
        _same_domain(self, other)
        return VectorField(self.domain, self.values - other.values)

    def __mul__(self, c):
        return VectorField(self.domain, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return VectorField(self.domain, -self.values)

    def amplitudes(self):
        """Pointwise Euclidean norm ||f(x)||_2."""
        return np.sqrt(np.einsum("xi,xi->x", np.conj(self.values),
                                 self.values).real)


# ---------------------------------------------------------------------------
# constructors

def identity_weight(domain, n):
    vals = np.tile(np.eye(n, dtype=complex), (domain.n_points, 1, 1))
    lam = np.ones((domain.n_points, n))
    return MatrixWeightField(domain, vals, _spectral=(lam, vals.copy()))

def scalar_weight_field(domain, w):
    """Wrap a positive scalar weight w(x) as an n = 1 matrix field."""
    w = np.asarray(w, dtype=float).reshape(-1)
    if w.shape[0] != domain.n_points:
        raise FieldError("scalar weight length does not match the grid")
    return MatrixWeightField(domain, w[:, None, None].astype(complex))

def general_weight_field(domain, values):
    return GeneralWeightField(domain, values)

def vector_field(domain, values):
    return VectorField(domain, values)

def absolute_value_field(V):
    if isinstance(V, MatrixWeightField):
        return V
    return V.absolute()

def log_weight_field(W):
    return W.log()


# ---------------------------------------------------------------------------
# norms

def weighted_norm(f, W, p, convention="plain"):
    """Weighted L^p norm of a vector field.

    plain:  (sum_x ||W(x) f(x)||_2^p h)^(1/p)
    tilde:  same with W^(1/p) in place of W; W must then be Hermitian PD.
    """
    if not p >= 1 or not np.isfinite(p):
        raise FieldError(f"p must be a finite real >= 1, got {p}")
    if convention == "plain":
        amp = W.apply(f).amplitudes()
    elif convention == "tilde":
        if not isinstance(W, MatrixWeightField):
            raise FieldError("tilde convention requires a Hermitian PD weight field")
        amp = W.power_amplitudes(f, 1.0 / p)
    else:
        raise FieldError(f"unknown convention {convention!r}")
    h = f.domain.h
    return float(np.sum(amp ** p) * h) ** (1.0 / p)


def unweighted_l2_norm(f):
    return float(np.sqrt(np.sum(f.amplitudes() ** 2) * f.domain.h))


# ---------------------------------------------------------------------------
# operator-norm kernels on stacked small matrices (vectorized hot loops)

def _opnorm_general_stack(T):
    """Largest singular value of each matrix in a (..., n, n) stack."""
    n = T.shape[-1]
    if n == 1:
        return np.abs(T[..., 0, 0])
    if n == 2:
        fro2 = np.sum(np.abs(T) ** 2, axis=(-2, -1))
        det = T[..., 0, 0] * T[..., 1, 1] - T[..., 0, 1] * T[..., 1, 0]
        disc = np.sqrt(np.maximum(fro2 ** 2 - 4.0 * np.abs(det) ** 2, 0.0))
        return np.sqrt(0.5 * (fro2 + disc))
    gram = np.einsum("...ji,...jk->...ik", np.conj(T), T)
    ev = np.linalg.eigvalsh(gram)
    return np.sqrt(np.maximum(ev[..., -1], 0.0))


def _opnorm_hermitian_stack(T):
    """Largest |eigenvalue| of each Hermitian matrix in a stack."""
    n = T.shape[-1]
    if n == 1:
        return np.abs(T[..., 0, 0].real)
    if n == 2:
        mu = 0.5 * (T[..., 0, 0] + T[..., 1, 1]).real
        r = np.sqrt((0.5 * (T[..., 0, 0] - T[..., 1, 1]).real) ** 2
                    + np.abs(T[..., 0, 1]) ** 2)
        return np.abs(mu) + r
    ev = np.linalg.eigvalsh(T)
    return np.max(np.abs(ev), axis=-1)


# ---------------------------------------------------------------------------
# Muckenhoupt characteristic and BMO

def ap_characteristic(W, p, cubes=None):
    """Discrete Muckenhoupt A_p characteristic over the dyadic cube family.

    sup over cubes Q of  avg_x ( avg_y ||W^(1/p)(x) W^(-1/p)(y)||_op^q )^(p/q)
    with q the Hoelder conjugate of p.  Always >= 1 up to roundoff (the
    single-cell cubes give exactly 1).
    """
    if not p > 1:
        raise FieldError("ap_characteristic requires p > 1")
    if cubes is None:
        cubes = DyadicCubeFamily(W.domain)
    q = p / (p - 1.0)
    N = W.domain.n_points

    if W.n == 1:
        w = W.values[:, 0, 0].real
        a = w
        b = w ** (-q / p)
        best = 1.0
        for size, count in cubes.iter_scales():
            ma = a.reshape(count, size).mean(axis=1)
            mb = b.reshape(count, size).mean(axis=1)
            best = max(best, float(np.max(ma * mb ** (p / q))))
        return best

    P = W.power(1.0 / p).values
    Pm = W.power(-1.0 / p).values
    n = W.n
    best = 1.0
    for size, count in cubes.iter_scales():
        if size == 1:
            best = max(best, 1.0)
            continue
        Pc = P.reshape(count, size, n, n)
        Pmc = Pm.reshape(count, size, n, n)
        inner_means = np.empty((count, size))
        # vectorize across cubes; chunk the x index to cap the pair tensor
        x_step = max(1, int(4e6) // (count * size * n * n))
        for x0 in range(0, size, x_step):
            x1 = min(size, x0 + x_step)
            T = np.einsum("cxab,cybd->cxyad", Pc[:, x0:x1], Pmc)
            G = _opnorm_general_stack(T)
            inner_means[:, x0:x1] = np.mean(G ** q, axis=2)
        outer = np.mean(inner_means ** (p / q), axis=1)
        best = max(best, float(np.max(outer)))
    return best


def bmo_norm(B, cubes):
    """sup over cubes of the mean operator-norm oscillation of a Hermitian field.

    B is a (N,) real array or (N, n, n) Hermitian stack; B_Q is the cube
    average and the oscillation is avg_x ||B(x) - B_Q||_op.
    """
    B = np.asarray(B)
    if B.ndim == 1:
        B = B[:, None, None].astype(complex)
    B = hermitian_part(B)
    n = B.shape[-1]
    best = 0.0
    for size, count in cubes.iter_scales():
        Bc = B.reshape(count, size, n, n)
        BQ = Bc.mean(axis=1, keepdims=True)
        dev = _opnorm_hermitian_stack(Bc - BQ)
        best = max(best, float(np.max(dev.mean(axis=1))))
    return best


# ---------------------------------------------------------------------------
# weight generators (deterministic per seed)

def _trig_profile(rng, domain, harmonics, lo, hi):
    """Smooth random profile with values in [lo, hi] (trig polynomial)."""
    x = domain.points() / domain.length
    raw = np.zeros_like(x)
    for k in range(1, harmonics + 1):
        a, b = rng.standard_normal(2) / k
        raw += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    span = raw.max() - raw.min()
    if span < 1e-12:
        return np.full_like(x, 0.5 * (lo + hi))
    u = (raw - raw.min()) / span
    return lo + (hi - lo) * u


def _random_unitary_field(rng, domain, n, harmonics):
    """Smooth pointwise-unitary field built from Givens rotations and phases."""
    N = domain.n_points
    U = np.tile(np.eye(n, dtype=complex), (N, 1, 1))
    for i in range(n):
        psi = _trig_profile(rng, domain, harmonics, -np.pi, np.pi)
        U[:, :, i] *= np.exp(1j * psi)[:, None]
    for i in range(n):
        for j in range(i + 1, n):
            th = _trig_profile(rng, domain, harmonics, 0.0, 2.0 * np.pi)
            c, s = np.cos(th), np.sin(th)
            col_i = U[:, :, i].copy()
            col_j = U[:, :, j].copy()
            U[:, :, i] = c[:, None] * col_i - s[:, None] * col_j
            U[:, :, j] = s[:, None] * col_i + c[:, None] * col_j
    return U


def gen_commuting_pair(seed, n, domain, spectral_range=(0.2, 20.0), harmonics=3):
    """Two weight fields sharing a (point-dependent) eigenbasis.

    Both are positive definite with eigenvalue profiles inside
    spectral_range, and [W0(x), W1(x)] = 0 at every point by construction.
    """
    rng = np.random.default_rng(seed)
    lo, hi = spectral_range
    if not (EIG_MIN <= lo < hi <= EIG_MAX):
        raise FieldError("spectral_range outside the supported clamps")
    Q = _random_unitary_field(rng, domain, n, harmonics)
    fields = []
    for _ in range(2):
        lam = np.stack([
            np.exp(_trig_profile(rng, domain, harmonics, np.log(lo), np.log(hi)))
            for _ in range(n)], axis=-1)
        vals = np.einsum("xij,xj,xkj->xik", Q, lam, np.conj(Q))
        order = np.argsort(-lam, axis=-1, kind="stable")
        lam_s = np.take_along_axis(lam, order, axis=-1)
        Q_s = np.take_along_axis(Q, order[:, None, :], axis=-1)
        fields.append(MatrixWeightField(domain, vals, _spectral=(lam_s, Q_s)))
    return fields[0], fields[1]


def gen_rotating_weight(seed, domain, n=2, angle=None, eig_profiles=None,
                        spectral_range=(0.2, 20.0), harmonics=3):
    """2x2 weight W(x) = R(gamma(x)) diag(l1(x), l2(x)) R(gamma(x))^T.

    angle and eig_profiles may be arrays sampled on the grid; by default
    smooth random profiles are drawn from the seed.  Eigenvalue profiles
    must stay within [1e-6, 1e6].
    """
    if n != 2:
        raise FieldError("gen_rotating_weight supports n = 2 only")
    rng = np.random.default_rng(seed)
    if angle is None:
        gamma = _trig_profile(rng, domain, harmonics, 0.0, 2.0 * np.pi)
    else:
        gamma = np.asarray(angle, dtype=float).reshape(-1)
    if eig_profiles is None:
        lo, hi = spectral_range
        l1 = np.exp(_trig_profile(rng, domain, harmonics, np.log(lo), np.log(hi)))
        l2 = np.exp(_trig_profile(rng, domain, harmonics, np.log(lo), np.log(hi)))
    else:
        l1, l2 = (np.asarray(v, dtype=float).reshape(-1) for v in eig_profiles)
    for l in (l1, l2):
        if l.min() < 1e-6 or l.max() > 1e6:
            raise FieldError("eigenvalue profiles must stay within [1e-6, 1e6]")
    c, s = np.cos(gamma), np.sin(gamma)
    R = np.empty((domain.n_points, 2, 2), dtype=complex)
    R[:, 0, 0], R[:, 0, 1] = c, -s
    R[:, 1, 0], R[:, 1, 1] = s, c
    lam = np.stack([l1, l2], axis=-1)
    vals = np.einsum("xij,xj,xkj->xik", R, lam, np.conj(R))
    return MatrixWeightField(domain, vals)


def scalar_sample_a2(domain, exponent=0.5):
    """The |sin(pi x)|^exponent scalar A_2 sample weight on the unit period."""
    x = domain.points() / domain.length
    return np.abs(np.sin(np.pi * x)) ** exponent


def random_vector_field(rng, domain, n, smooth=True, harmonics=4):
    """Random complex test function; smooth (trig) or white noise."""
    if smooth:
        cols = []
        for _ in range(n):
            re = _trig_profile(rng, domain, harmonics, -1.0, 1.0)
            im = _trig_profile(rng, domain, harmonics, -1.0, 1.0)
            cols.append(re + 1j * im)
        vals = np.stack(cols, axis=-1)
    else:
        vals = (rng.standard_normal((domain.n_points, n))
                + 1j * rng.standard_normal((domain.n_points, n)))
    return VectorField(domain, vals)


# ---------------------------------------------------------------------------
# .mwf.json weight-field files

def save_weight_field(path, W):
    """Write a weight field in the .mwf.json interchange format."""
    data = []
    for i in range(W.domain.n_points):
        flat = W.values[i].reshape(-1)
        data.append([[float(z.real), float(z.imag)] for z in flat])
    doc = {
        "version": 1,
        "domain": {"d": 1, "N": W.domain.n_points, "length": W.domain.length},
        "n": W.n,
        "data": data,
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_weight_field(path):
    """Read a .mwf.json file; symmetrizes and rejects non-PD points."""
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("version") != 1:
        raise FieldError(f"unsupported .mwf.json version {doc.get('version')!r}")
    dom = doc["domain"]
    domain = GridDomain(dom["N"], length=dom.get("length", 1.0), dim=dom.get("d", 1))
    n = int(doc["n"])
    raw = np.asarray(doc["data"], dtype=float)
    if raw.shape != (domain.n_points, n * n, 2):
        raise FieldError(f"data block has shape {raw.shape}, "
                         f"expected ({domain.n_points}, {n * n}, 2)")
    vals = (raw[..., 0] + 1j * raw[..., 1]).reshape(domain.n_points, n, n)
    vals = hermitian_part(vals)
    lam, U = jacobi_eigh(vals)
    bad = np.nonzero(lam.min(axis=-1) < EIG_MIN)[0]
    if bad.size:
        raise FieldError(
            f"loaded weight is not positive definite at grid index {int(bad[0])}")
    return MatrixWeightField(domain, vals, _spectral=(lam, U))
