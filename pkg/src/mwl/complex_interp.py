"""Complex-method interpolation of matrix-weighted L^p couples.

Constructs the interpolated weights in both norm conventions, the extremal
analytic sections on the unit strip, and the first-order (and, for equal
exponents, higher-order) derivation maps obtained by differentiating the
sections at theta.
"""

import math

import numpy as np

from .fields import (
    GeneralWeightField,
    MatrixWeightField,
    VectorField,
    weighted_norm,
)
from .linalg import jacobi_eigh, hermitian_part

__all__ = [
    "InterpParams",
    "UnsupportedFeatureError",
    "as_strip_point",
    "interp_weight_plain",
    "interp_weight_tilde",
    "couple_transform",
    "extremal_section",
    "omega_complex",
    "polar_diagonalize_field",
]


class UnsupportedFeatureError(NotImplementedError):
    pass


class InterpParams:
    """Endpoint exponents p0, p1 in [1, inf) and theta in (0, 1)."""

    def __init__(self, p0, p1, theta):
        if not (p0 >= 1 and p1 >= 1 and np.isfinite(p0) and np.isfinite(p1)):
            raise ValueError("p0 and p1 must be finite reals >= 1")
        if not 0.0 < theta < 1.0:
            raise ValueError("theta must lie strictly inside (0, 1)")
        self.p0 = float(p0)
        self.p1 = float(p1)
        self.theta = float(theta)

    @property
    def p_theta(self):
        return 1.0 / ((1.0 - self.theta) / self.p0 + self.theta / self.p1)

    def __repr__(self):
        return f"InterpParams(p0={self.p0}, p1={self.p1}, theta={self.theta})"


def as_strip_point(z):
    """Validate 0 <= Re(z) <= 1 and return z as a complex number."""
    z = complex(z)
    if not 0.0 <= z.real <= 1.0:
        raise ValueError(f"point {z} lies outside the unit strip")
    return z


class _RelativeSpectral:
    """Per-point spectral data of A = |G1 G0^-1| for two PD weight fields.

    Since |M| = (M* M)^(1/2), the eigenvectors of the Gram matrix of
    M = G1 G0^-1 diagonalize A directly; one batched Jacobi run serves every
    power and logarithm of A afterwards.
    """

    def __init__(self, G0, G1):
        if G0.domain != G1.domain or G0.n != G1.n:
            raise ValueError("weight fields must share domain and dimension")
        M = np.einsum("xij,xjk->xik", G1.values,
                      G0.power(-1.0).values)
        gram = hermitian_part(np.einsum("xji,xjk->xik", np.conj(M), M))
        lam2, U = jacobi_eigh(gram)
        self.G0 = G0
        self.lam = np.sqrt(np.maximum(lam2, 0.0))   # descending
        self.U = U

    def power_values(self, c):
        """A^c per point; c may be complex (principal branch)."""
        scal = np.exp(c * np.log(self.lam.astype(complex)))
        return np.einsum("xij,xj,xkj->xik", self.U, scal, np.conj(self.U))

    def log_values(self):
        return hermitian_part(
            np.einsum("xij,xj,xkj->xik", self.U, np.log(self.lam), np.conj(self.U)))

    def weighted_values(self, c):
        """A^c G0 per point (the generalized interpolated weight at power c)."""
        return np.einsum("xij,xjk->xik", self.power_values(c), self.G0.values)


def _plain_spectral(W0, W1):
    return _RelativeSpectral(W0, W1)


def _tilde_spectral(W0, W1, params):
    return _RelativeSpectral(W0.power(1.0 / params.p0), W1.power(1.0 / params.p1))


def interp_weight_plain(W0, W1, params):
    """|W1 W0^-1|^theta W0 pointwise, with its PD polar representative.

    Returns (raw, pd): raw is the generalized weight from the interpolation
    formula, pd = |raw| induces the same weighted space.
    """
    rel = _plain_spectral(W0, W1)
    raw = GeneralWeightField(W0.domain, rel.weighted_values(params.theta))
    return raw, raw.absolute()


def interp_weight_tilde(W0, W1, params):
    """| |W1^(1/p1) W0^(-1/p0)|^theta W0^(1/p0) |^p_theta pointwise."""
    rel = _tilde_spectral(W0, W1, params)
    inner = GeneralWeightField(W0.domain, rel.weighted_values(params.theta))
    return inner.absolute().power(params.p_theta)


def couple_transform(f, V):
    """Pointwise weight action f -> V f (the isometry between weighted spaces)."""
    return V.apply(f)


def polar_diagonalize_field(W0, W1):
    """Pointwise |W1 W0^-1| = U D U^-1 over the whole grid.

    Returns (U, d) with U of shape (N, n, n) unitary per point and d the
    (N, n) array of positive diagonal entries sorted descending.
    """
    rel = _plain_spectral(W0, W1)
    return rel.U.copy(), rel.lam.copy()


def _section_pieces(f, rel, params, convention):
    """Shared data for extremal sections and derivations.

    Returns (amp, coeff) where amp(x) = ||A^theta G0 f||_2 pointwise and
    coeff are the G0 f coordinates in the eigenbasis of A.
    """
    g = np.einsum("xij,xj->xi", rel.G0.values, f.values)
    coeff = np.einsum("xij,xi->xj", np.conj(rel.U), g)
    amp = np.sqrt(np.einsum("xj,xj->x", rel.lam ** (2.0 * params.theta),
                            np.abs(coeff) ** 2).real)
    return g, coeff, amp


def _theta_norm_from_amp(amp, domain, p_theta):
    return float(np.sum(amp ** p_theta) * domain.h) ** (1.0 / p_theta)


def theta_norm_plain(f, W0, W1, params):
    """||f|| in the plain interpolated space (no PD conversion needed)."""
    rel = _plain_spectral(W0, W1)
    _, _, amp = _section_pieces(f, rel, params, "plain")
    return _theta_norm_from_amp(amp, f.domain, params.p_theta)


def extremal_section(f, W0, W1, params, z, norm_theta):
    """Value at z of the analytic strip family through f at theta.

    B(z) = (||(A^th W0 f)(x)||_2 / ||f||_th)^(p_th (1/p1 - 1/p0)(z - th))
           * W0^-1 A^(th - z) W0 f          with A = |W1 W0^-1|.

    norm_theta must be the precomputed plain interpolated norm of f.
    """
    z = as_strip_point(z)
    if norm_theta <= 0:
        raise ValueError("extremal_section requires f != 0 and norm_theta > 0")
    rel = _plain_spectral(W0, W1)
    g, coeff, amp = _section_pieces(f, rel, params, "plain")

    c_exp = params.p_theta * (1.0 / params.p1 - 1.0 / params.p0) * (z - params.theta)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(amp / norm_theta)
    sigma = np.where(amp > 0.0, np.exp(c_exp * log_ratio.astype(complex)), 0.0)

    # W0^-1 A^(theta - z) W0 f, through the eigenbasis of A
    scal = np.exp((params.theta - z) * np.log(rel.lam.astype(complex)))
    h = np.einsum("xij,xj->xi", rel.U, scal * coeff)
    vec = np.einsum("xij,xj->xi", rel.G0.power(-1.0).values, h)
    return VectorField(f.domain, sigma[:, None] * vec)


def omega_complex(f, W0, W1, params, convention="plain", order=1):
    """Derivation map of the complex method applied to f.

    order 1 works for any exponent pair; the log-norm scalar term vanishes
    when p0 = p1.  Higher orders are available only for p0 = p1, where the
    n-th derivation is ((-1)^n / n!) G0^-1 (log A)^n G0 f.
    """
    if order < 1:
        raise ValueError("order must be >= 1")
    if convention == "plain":
        rel = _plain_spectral(W0, W1)
    elif convention == "tilde":
        rel = _tilde_spectral(W0, W1, params)
    else:
        raise ValueError(f"unknown convention {convention!r}")

    equal_p = params.p0 == params.p1
    if order > 1 and not equal_p:
        raise UnsupportedFeatureError(
            "higher-order complex derivations are defined here only for p0 = p1")

    g, coeff, amp = _section_pieces(f, rel, params, convention)
    log_lam = np.log(rel.lam)
    G0_inv = rel.G0.power(-1.0).values

    if equal_p:
        n = order
        scal = ((-1.0) ** n / math.factorial(n)) * log_lam ** n
        h = np.einsum("xij,xj->xi", rel.U, scal * coeff)
        vals = np.einsum("xij,xj->xi", G0_inv, h)
        return VectorField(f.domain, vals)

    norm_theta = _theta_norm_from_amp(amp, f.domain, params.p_theta)
    with np.errstate(divide="ignore"):
        log_ratio = np.log(amp / norm_theta)
    scalar_term = params.p_theta * (1.0 / params.p1 - 1.0 / params.p0) * log_ratio
    scalar_term = np.where(amp > 0.0, scalar_term, 0.0)

    h = np.einsum("xij,xj->xi", rel.U, log_lam * coeff)
    mat_term = np.einsum("xij,xj->xi", G0_inv, h)
    vals = scalar_term[:, None] * f.values - mat_term
    return VectorField(f.domain, vals)
