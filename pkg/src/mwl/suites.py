"""Verification suites: desk-scale reproductions of the library's claims.

Each suite function takes a RunConfig and returns a Report whose checks
carry explicit tolerances.  All randomness flows through per-stream
generators derived from the run seed, so reports are bit-reproducible.
"""

import math

import numpy as np

from . import linalg
from .fields import (
    DyadicCubeFamily,
    GridDomain,
    VectorField,
    bmo_norm,
    gen_commuting_pair,
    gen_rotating_weight,
    identity_weight,
    random_vector_field,
    scalar_sample_a2,
    scalar_weight_field,
    weighted_norm,
)
from .complex_interp import (
    InterpParams,
    extremal_section,
    interp_weight_plain,
    interp_weight_tilde,
    omega_complex,
    polar_diagonalize_field,
    theta_norm_plain,
)
from .couples import (
    CoupleSpec,
    LogGrid,
    SelectorSandwichError,
    k_functional,
    k_surrogate,
    k_sweep,
    selector,
    sum_norm,
)
from .real_method import (
    beurling_norm_approx,
    l_space_norm,
    lifted_matrix_derivation,
    lorentz_norm,
    omega_real,
    phi_norm,
    real_interp_norm,
)
from .operators import (
    hilbert_operator,
    hilbert_transform,
    iterated_commutator,
    charact_strip_function,
    martingale_operator,
    matrix_multiplication_operator,
    operator_norm_weighted,
    random_martingale_signs,
)
from .reporting import Report, parallel_map

__all__ = ["SUITES", "run_suite", "run_all"]


# ---------------------------------------------------------------------------
# shared sample builders

def _random_pd(rng, n, spread=2.0):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, _ = np.linalg.qr(X)
    lam = np.exp(rng.uniform(-spread, spread, n))
    return (Q * lam) @ np.conj(Q.T)


def _random_weight_field(rng, domain, n, spread=(0.3, 8.0)):
    if n == 2:
        return gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                                   spectral_range=spread)
    W0, _ = gen_commuting_pair(int(rng.integers(2 ** 31)), n, domain,
                               spectral_range=spread)
    return W0


def _operator_pool(rng, domain, n, martingales, multipliers):
    ops = [hilbert_operator()]
    for i in range(martingales):
        signs = random_martingale_signs(rng, domain.n_points)
        ops.append(martingale_operator(signs, label=f"T_sigma[{i}]"))
    for i in range(multipliers):
        B = (rng.standard_normal((domain.n_points, n, n))
             + 1j * rng.standard_normal((domain.n_points, n, n))) / math.sqrt(n)
        ops.append(matrix_multiplication_operator(B, label=f"M[{i}]"))
    return ops


# ---------------------------------------------------------------------------
# linalg suite

def run_linalg(config):
    rep = Report("linalg", config)
    rng = config.rng("linalg")
    pairs = config.size("spectral_pairs")

    worst_rec = 0.0
    worst_rt = 0.0
    for _ in range(pairs):
        n = int(rng.integers(2, 5))
        W0 = _random_pd(rng, n)
        W1 = _random_pd(rng, n)
        U, D = linalg.polar_diagonalize(W0, W1)
        absM = linalg.absolute_value(W1 @ linalg.matrix_function(W0, ("power", -1)))
        rec = np.linalg.norm(U @ D @ np.conj(U.T) - absM) \
            / (1.0 + np.linalg.norm(absM))
        worst_rec = max(worst_rec, rec)
        A = _random_pd(rng, n)
        back = linalg.matrix_function(linalg.matrix_function(A, "log"), "exp")
        worst_rt = max(worst_rt, np.max(np.abs(back - A)) / (1.0 + np.max(np.abs(A))))
    rep.add("polar_reconstruction", "linalg_core.polar_diagonalize",
            worst_rec, 1e-9, inputs={"pairs": pairs})
    rep.add("exp_log_roundtrip", "linalg_core.matrix_function",
            worst_rt, 1e-10, inputs={"pairs": pairs})

    dec = linalg.eig_hermitian([[2.0, 1.0], [1.0, 2.0]])
    rep.add("analytic_2x2_eigs", "linalg_core.eig_hermitian",
            float(np.max(np.abs(dec.lam - [3.0, 1.0]))), 1e-12)
    av = linalg.absolute_value(np.diag([-3.0, 2.0]))
    rep.add("absolute_value_diag", "linalg_core.absolute_value",
            float(np.max(np.abs(av - np.diag([3.0, 2.0])))), 1e-12)

    # pointwise log-convexity of the interpolated weight (Heinz bound)
    samples = config.size("log_convexity_samples")
    worst = 0.0
    for _ in range(samples):
        n = int(rng.integers(2, 5))
        W0 = _random_pd(rng, n, spread=1.5)
        W1 = _random_pd(rng, n, spread=1.5)
        theta = float(rng.choice([0.25, 0.5, 0.75]))
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        M = W1 @ linalg.matrix_function(W0, ("power", -1))
        A_theta = linalg.matrix_function(linalg.absolute_value(M), ("power", theta))
        lhs = np.linalg.norm(A_theta @ W0 @ x)
        rhs = np.linalg.norm(W0 @ x) ** (1 - theta) * np.linalg.norm(W1 @ x) ** theta
        worst = max(worst, lhs / rhs)
    rep.add("heinz_log_convexity", "linalg_core.properties",
            worst, 1.0 + 1e-9, inputs={"samples": samples})
    return rep


# ---------------------------------------------------------------------------
# complex interpolation suite

def _commuting_identity_error(config, rng, pairs, thetas, domain):
    worst = 0.0
    for _ in range(pairs):
        n = int(rng.integers(1, 4))
        W0, W1 = gen_commuting_pair(int(rng.integers(2 ** 31)), n, domain,
                                    spectral_range=(0.2, 20.0))
        for theta in thetas:
            params = InterpParams(2.0, 2.0, theta)
            raw, _ = interp_weight_plain(W0, W1, params)
            ref = np.einsum("xij,xjk->xik", W0.power(1 - theta).values,
                            W1.power(theta).values)
            worst = max(worst, float(np.max(np.abs(raw.values - ref))))
    return worst


def run_complex(config):
    rep = Report("complex", config)
    rng = config.rng("complex")
    domain = GridDomain(config.size("exactness_N"))

    worst = _commuting_identity_error(config, rng, config.size("commuting_pairs"),
                                      config.data["theta_list"], domain)
    rep.add("commuting_case_identity", "interp_complex.interp_weight_plain",
            worst, 1e-9)

    # extremal section: B(theta) = f, finite differences against the derivation
    W0 = gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                             spectral_range=(0.4, 5.0))
    W1 = gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                             spectral_range=(0.4, 5.0))
    f = random_vector_field(rng, domain, 2)
    params = InterpParams(1.5, 3.0, 0.4)
    nt = theta_norm_plain(f, W0, W1, params)
    B0 = extremal_section(f, W0, W1, params, params.theta, nt)
    rep.add("section_at_theta", "interp_complex.extremal_section",
            float(np.max(np.abs(B0.values - f.values))), 1e-10)
    h = 1e-5
    Bp = extremal_section(f, W0, W1, params, params.theta + h, nt)
    Bm = extremal_section(f, W0, W1, params, params.theta - h, nt)
    fd = (Bp.values - Bm.values) / (2 * h)
    om = omega_complex(f, W0, W1, params, "plain", 1)
    rel = float(np.linalg.norm(fd - om.values) / np.linalg.norm(om.values))
    rep.add("finite_difference_vs_omega", "interp_complex.omega_complex",
            rel, 1e-4)

    # norm identity through the pointwise diagonalization
    U, d = polar_diagonalize_field(W0, W1)
    g = np.einsum("xji,xj->xi", np.conj(U),
                  np.einsum("xij,xj->xi", W0.values, f.values))
    amp = np.sqrt(np.sum((d ** params.theta * np.abs(g)) ** 2, axis=-1))
    rhs = float(np.sum(amp ** params.p_theta) * domain.h) ** (1 / params.p_theta)
    lhs = theta_norm_plain(f, W0, W1, params)
    rep.add("diagonalization_norm_identity", "interp_complex.interp_weight_plain",
            abs(lhs - rhs) / rhs, 1e-9)

    # endpoint consistency of the interpolated norms
    worst = 0.0
    for theta, j in ((1e-3, 0), (1 - 1e-3, 1)):
        params_e = InterpParams(2.0, 2.0, theta)
        Wt = interp_weight_tilde(W0, W1, params_e)
        num = weighted_norm(f, Wt, params_e.p_theta, "tilde")
        den = weighted_norm(f, (W0, W1)[j], 2.0, "tilde")
        worst = max(worst, abs(num / den - 1.0))
    rep.add("endpoint_consistency", "interp_complex.interp_weight_tilde",
            worst, 0.02)

    # omega homogeneity for positive scalings
    lam = 3.7
    om_l = omega_complex(lam * f, W0, W1, params, "plain", 1)
    rep.add("omega_homogeneity", "interp_complex.omega_complex",
            float(np.max(np.abs(om_l.values - lam * om.values))
                  / np.max(np.abs(om.values))), 1e-10)

    # exactness of the interpolation functor at p = 2 (tilde)
    margin = run_exactness(config, rep_rng=config.rng("exactness"))
    rep.add("exactness_inequality", "operators.operator_norm_weighted",
            margin, 1.0 + 1e-8,
            inputs={"tuples": config.size("exactness_tuples")})
    return rep


def run_exactness(config, rep_rng=None, tuples=None, N=None, max_n=3):
    """Worst ratio ||T||_{W_theta} / max(||T||_{W_0}, ||T||_{W_1}), p = 2
    tilde, over random (operator, weight pair, theta) tuples."""
    rng = rep_rng if rep_rng is not None else config.rng("exactness")
    tuples = tuples or config.size("exactness_tuples")
    domain = GridDomain(N or config.size("exactness_N"))

    def one_tuple(i):
        sub = np.random.default_rng([config.seed, 77, i])
        n = int(sub.integers(1, max_n + 1))
        W0 = _random_weight_field(sub, domain, n, spread=(0.4, 6.0))
        W1 = _random_weight_field(sub, domain, n, spread=(0.4, 6.0))
        theta = float(sub.uniform(0.15, 0.85))
        pool = _operator_pool(sub, domain, n, martingales=1, multipliers=1)
        T = pool[int(sub.integers(0, len(pool)))]
        params = InterpParams(2.0, 2.0, theta)
        Wt = interp_weight_tilde(W0, W1, params)
        seed = int(sub.integers(2 ** 31))
        n_t, _ = operator_norm_weighted(T, Wt, Wt, 2, "tilde", "exact2", seed=seed)
        n_0, _ = operator_norm_weighted(T, W0, W0, 2, "tilde", "exact2", seed=seed)
        n_1, _ = operator_norm_weighted(T, W1, W1, 2, "tilde", "exact2", seed=seed)
        return n_t / max(n_0, n_1)

    ratios = parallel_map(one_tuple, range(tuples))
    return float(np.max(ratios))


# ---------------------------------------------------------------------------
# real interpolation suite

def run_real(config):
    rep = Report("real", config)
    rng = config.rng("real")
    domain = GridDomain(64)
    x = domain.points()

    # Phi closed form at a grid fine enough for the stated tolerance
    fine = LogGrid.default(1e-6, 1e6, 24001)
    worst = 0.0
    for theta in (0.3, 0.5, 0.7):
        for q in (1.0, 2.0, 4.0):
            val = phi_norm(theta, q, fine, np.minimum(1.0, fine.t))
            ref = (1.0 / ((1 - theta) * q) + 1.0 / (theta * q)) ** (1.0 / q)
            worst = max(worst, abs(val - ref) / ref)
    rep.add("phi_closed_form", "interp_real.phi_norm", worst, 1e-6)
    grid241 = LogGrid.default(1e-6, 1e6, config.size("t_grid_points"))
    rep.add("phi_divergence_flag", "interp_real.phi_norm",
            1.0 if np.isinf(phi_norm(0.5, 2.0, grid241, grid241.t ** 0.5)) else 0.0,
            1.0, comparator=">=")

    w0 = np.exp(1.5 * np.sin(2 * np.pi * x) + 0.3)
    w1 = np.exp(-1.2 * np.cos(4 * np.pi * x) - 0.2)

    # K-functional: concavity, monotonicity, surrogate envelope
    c22 = CoupleSpec.scalar(domain, 2.0, 2.0, w0, w1)
    f = random_vector_field(rng, domain, 1)
    sweep = k_sweep(f, c22, grid241)
    t = grid241.t
    lam = (t[2:] - t[1:-1]) / (t[2:] - t[:-2])
    second = lam * sweep.values[:-2] + (1 - lam) * sweep.values[2:] - sweep.values[1:-1]
    rep.add("k_concavity", "interp_real.k_functional",
            float(np.max(second)), 1e-6 * float(np.max(sweep.values)))
    rep.add("k_nondecreasing", "interp_real.k_functional",
            float(np.min(np.diff(sweep.values))), -1e-12, comparator=">=")
    worst_hi, worst_lo = 0.0, np.inf
    for _ in range(config.size("random_functions")):
        tt = float(np.exp(rng.uniform(-6, 6)))
        g = random_vector_field(rng, domain, 1, smooth=False)
        val, _ = k_functional(tt, g, c22)
        S = k_surrogate(tt, g, c22)
        worst_hi = max(worst_hi, val / S)
        worst_lo = min(worst_lo, val / S)
    rep.add("k_surrogate_upper", "interp_real.k_functional", worst_hi, 2.0 + 1e-9)
    rep.add("k_surrogate_lower", "interp_real.k_functional", worst_lo,
            1.0 - 1e-9, comparator=">=")

    # sum/intersection norms
    s = sum_norm(f, c22)
    rep.add("sum_norm_bound", "interp_real.sum_norm",
            s / min(c22.endpoint_norm(f, 0), c22.endpoint_norm(f, 1)),
            1.0 + 1e-9)

    # q = p equivalence with the weighted geometric-mean norm
    worst_band = 0.0
    for p in config.data["p_values"]:
        cpp = CoupleSpec.scalar(domain, p, p, w0, w1)
        theta = 0.4
        ratios = []
        for _ in range(config.size("random_functions")):
            g = random_vector_field(rng, domain, 1)
            num = real_interp_norm(g, cpp, theta, p, "K", grid241)
            den = float(np.sum((np.abs(g.values[:, 0])
                                * w0 ** (1 - theta) * w1 ** theta) ** p)
                        * domain.h) ** (1.0 / p)
            ratios.append(num / den)
        worst_band = max(worst_band, max(ratios) / min(ratios))
    rep.add("q_equals_p_equivalence_band", "interp_real.real_interp_norm",
            worst_band, 4.0)

    # derivation dual paths
    a = np.exp(1.2 * np.sin(2 * np.pi * x) + 0.8 * np.cos(4 * np.pi * x)) \
        * np.exp(1j * 0.7 * np.sin(2 * np.pi * x))
    fs = VectorField(domain, a[:, None])
    fine_grid = LogGrid.default(1e-6, 1e6, config.size("fine_grid_points"))
    c153 = CoupleSpec.scalar(domain, 1.5, 3.0, w0, w1)
    alpha = 3.0 / (3.0 - 1.5)
    worst = 0.0
    for order in (1, 2, 3):
        oc = omega_real(fs, c153, ("E", alpha), order, fine_grid, path="closed")
        oq = omega_real(fs, c153, ("E", alpha), order, fine_grid, path="quadrature")
        worst = max(worst, float(np.linalg.norm(oq.values - oc.values)
                                 / np.linalg.norm(oc.values)))
    rep.add("e_closed_vs_quadrature", "interp_real.omega_real", worst, 0.05)

    W0m = gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                              spectral_range=(0.4, 6.0))
    W1m = gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                              spectral_range=(0.4, 6.0))
    fm = random_vector_field(rng, domain, 2)
    worst = 0.0
    for method, p0, p1 in (("K", 2.0, 2.0), (("E", alpha), 1.5, 3.0)):
        lift = lifted_matrix_derivation(fm, W0m, W1m, p0, p1, method, 1,
                                        fine_grid, path="closed")
        cm = CoupleSpec.matrix(W0m, W1m, p0, p1, "plain")
        direct = omega_real(fm, cm, method, 1, fine_grid, path="quadrature",
                            selector_kind="conjugated")
        worst = max(worst, float(np.linalg.norm(direct.values - lift.values)
                                 / np.linalg.norm(lift.values)))
    rep.add("lifted_vs_direct_derivation", "interp_real.lifted_matrix_derivation",
            worst, 0.10)

    # K-method derivation is proportional to the complex one (p0 = p1)
    Wf0 = scalar_weight_field(domain, w0)
    Wf1 = scalar_weight_field(domain, w1)
    params = InterpParams(2.0, 2.0, 0.4)
    cvs = []
    for _ in range(6):
        g = random_vector_field(rng, domain, 1)
        oK = omega_real(g, c22, "K", 1, path="closed")
        oC = omega_complex(g, Wf0, Wf1, params, "plain", 1)
        mask = np.abs(oC.values[:, 0]) > 1e-9 * np.max(np.abs(oC.values))
        r = (oK.values[mask, 0] / oC.values[mask, 0]).real
        cvs.append(np.std(r) / abs(np.mean(r)))
    rep.add("k_vs_complex_ratio_cv", "interp_real.omega_real",
            float(np.max(cvs)), 0.1)

    # selector sandwiches
    violations = 0
    trials = config.size("random_functions")
    for _ in range(trials):
        tt = float(np.exp(rng.uniform(-4, 4)))
        g = random_vector_field(rng, domain, 1, smooth=False)
        try:
            selector(tt, g, c153, "K", eps=1e-2)
            selector(tt, g, c153, ("E", alpha), eps=2e-2)
        except SelectorSandwichError:
            violations += 1
    rep.add("selector_sandwich_violations", "interp_real.selector",
            violations, 0, inputs={"trials": trials})

    # K-method vs E-method norms within a fixed factor
    vK = real_interp_norm(fs, c153, 0.4, 2.0, "K", grid241)
    vE = real_interp_norm(fs, c153, 0.4, 2.0, ("E", alpha), grid241)
    band = max(vK / vE, vE / vK)
    rep.add("k_vs_e_method_band", "interp_real.real_interp_norm", band, 8.0)

    # Lorentz and Beurling sanity, L(D;...) degenerate identity
    ln = lorentz_norm(f, 2.5, 2.5, np.ones(domain.n_points))
    ref = float(np.sum(np.abs(f.values[:, 0]) ** 2.5) * domain.h) ** (1 / 2.5)
    rep.add("lorentz_q_equals_p", "interp_real.lorentz_norm",
            abs(ln - ref) / ref, 1e-12)
    lo_b, up_b = beurling_norm_approx(f, 2.0, 2.0, 0.4, w0)
    rep.add("beurling_anchor", "interp_real.beurling_norm_approx",
            abs(lo_b - up_b), 1e-15)
    fm2 = random_vector_field(rng, domain, 2)
    d = np.stack([w0, w1], axis=-1)
    p0, p1, theta = 1.5, 3.0, 0.4
    p_theta = 1.0 / ((1 - theta) / p0 + theta / p1)
    lhs = l_space_norm(fm2, d, p0, p1, p_theta, theta)
    amp = np.sqrt(np.sum((d ** theta) ** 2 * np.abs(fm2.values) ** 2, axis=-1))
    rhs = float(np.sum(amp ** p_theta) * domain.h) ** (1 / p_theta)
    rep.add("l_space_degenerate_identity", "interp_real.l_space_norm",
            abs(lhs - rhs) / rhs, 1e-12)
    return rep


# ---------------------------------------------------------------------------
# commutator suite

def _log_commutator_norm(N, weight, seed):
    domain = GridDomain(N)
    if weight == "scalar_a2":
        W = scalar_weight_field(domain, scalar_sample_a2(domain))
    else:
        W = gen_rotating_weight(90, domain, spectral_range=(0.25, 4.0))
    H = hilbert_operator()
    C = iterated_commutator(W.log(), H, 1)
    I = identity_weight(domain, W.n)
    est, _ = operator_norm_weighted(C, I, I, 2, "tilde", "exact2", seed=seed)
    return est


def run_commutator(config):
    rep = Report("commutator", config)
    resolutions = config.size("resolutions")
    rows = []
    for weight in ("scalar_a2", "rotating"):
        norms = [_log_commutator_norm(N, weight, config.seed + i)
                 for i, N in enumerate(resolutions)]
        rows.extend((weight, N, v) for N, v in zip(resolutions, norms))
        rep.add(f"log_commutator_bounded_{weight}",
                "operators.iterated_commutator",
                max(norms) / min(norms), 2.0,
                inputs={"resolutions": resolutions})
    rep.add_table("log_commutator_norms", ["weight", "N", "norm"], rows)

    # commutator theorem: [Omega_theta, T] bounded on the interpolated space
    rng = config.rng("commutator")
    domain = GridDomain(min(config.size("exactness_N"), 256))
    W0 = gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                             spectral_range=(0.4, 4.0))
    W1 = gen_rotating_weight(int(rng.integers(2 ** 31)), domain,
                             spectral_range=(0.4, 4.0))
    H = hilbert_operator()
    worst = 0.0
    ratio_rows = []
    for theta in config.data["theta_list"]:
        params = InterpParams(2.0, 2.0, theta)
        Wt = interp_weight_tilde(W0, W1, params)
        n0, _ = operator_norm_weighted(H, W0, W0, 2, "tilde", "exact2",
                                       seed=config.seed)
        n1, _ = operator_norm_weighted(H, W1, W1, 2, "tilde", "exact2",
                                       seed=config.seed)
        endpoint = max(n0, n1)
        best = 0.0
        for _ in range(8):
            g = random_vector_field(rng, domain, 2, smooth=False)
            og = omega_complex(g, W0, W1, params, "tilde", 1)
            oTg = omega_complex(hilbert_transform(g), W0, W1, params, "tilde", 1)
            comm = hilbert_transform(og) - oTg
            num = weighted_norm(comm, Wt, 2.0, "tilde")
            den = endpoint * weighted_norm(g, Wt, 2.0, "tilde")
            best = max(best, num / den)
        ratio_rows.append((theta, best))
        worst = max(worst, best)
    rep.add_table("omega_commutator_ratios", ["theta", "ratio"], ratio_rows)
    rep.add("omega_commutator_bounded", "interp_complex.omega_complex",
            worst, 100.0)
    return rep


# ---------------------------------------------------------------------------
# charact suite (logarithms of A_2 weights via commutator growth)

def _charact_rates(config, W, domain, orders, seed):
    H = hilbert_operator()
    I = identity_weight(domain, W.n)
    logW = W.log()
    r = []
    for n in range(1, orders + 1):
        C = iterated_commutator(logW, H, n)
        est, _ = operator_norm_weighted(C, I, I, 2, "tilde", "exact2", seed=seed)
        r.append(est / math.factorial(n))
    return np.array(r)


def run_charact(config):
    rep = Report("charact", config)
    rng = config.rng("charact")
    domain = GridDomain(min(config.size("exactness_N"), 256))
    orders = config.size("charact_orders")

    # W = I: every commutator vanishes
    I2 = identity_weight(domain, 2)
    rI = _charact_rates(config, I2, domain, 3, config.seed)
    rep.add("identity_weight_rates", "operators.iterated_commutator",
            float(np.max(rI)), 1e-12)

    rows = []
    for name, W in (("scalar_a2",
                     scalar_weight_field(domain, scalar_sample_a2(domain))),
                    ("rotating",
                     gen_rotating_weight(91, domain, spectral_range=(0.3, 3.0)))):
        rates = _charact_rates(config, W, domain, orders, config.seed)
        ns = np.arange(1, orders + 1)
        mask = rates > 0
        coef = np.polyfit(ns[mask], np.log(rates[mask]), 1)
        fit = np.polyval(coef, ns[mask])
        resid = float(np.max(np.abs(np.log(rates[mask]) - fit)))
        rho = float(np.exp(coef[0]))
        rows.extend((name, int(n), v) for n, v in zip(ns, rates))
        rep.add(f"growth_fit_residual_{name}", "operators.iterated_commutator",
                resid, 0.5, extra={"rho": rho})
    rep.add_table("commutator_rates", ["weight", "n", "rate"], rows)

    # Cauchy quadrature of the strip function against direct commutators
    W = gen_rotating_weight(91, domain, spectral_range=(0.3, 3.0))
    f = random_vector_field(rng, domain, 2)
    radius, nodes = 0.2, 64
    phis = 2 * np.pi * np.arange(nodes) / nodes
    ring = np.array([charact_strip_function(f, 0.5 + radius * np.exp(1j * ph), W).values
                     for ph in phis])
    worst = 0.0
    H = hilbert_operator()
    for n in (1, 2, 3):
        cauchy = np.mean(ring * (radius * np.exp(1j * phis))[:, None, None] ** (-n),
                         axis=0)
        comm = iterated_commutator(W.log(), H, n).apply(f).values \
            * ((-1.0) ** n) / math.factorial(n)
        worst = max(worst, float(np.max(np.abs(cauchy - comm))
                                 / np.max(np.abs(comm))))
    rep.add("cauchy_vs_commutator", "operators.charact_strip_function",
            worst, 1e-6)
    rep.add("strip_function_at_center", "operators.charact_strip_function",
            float(np.max(np.abs(charact_strip_function(f, 0.5, W).values
                                - hilbert_transform(f).values))), 1e-12)
    return rep


# ---------------------------------------------------------------------------
# bloom suite (divergence of the mixed commutator quantity)

def _bloom_symbols(domain):
    x = domain.points() / domain.length
    b1 = (x < 0.5).astype(float)
    b2 = np.log(np.abs(2.0 * np.sin(np.pi * x)))
    return b1, b2


def run_bloom(config):
    rep = Report("bloom", config)
    resolutions = config.size("resolutions")
    rows = []
    mixed = []
    single = []
    for i, N in enumerate(resolutions):
        domain = GridDomain(N)
        b1, b2 = _bloom_symbols(domain)
        H = hilbert_operator()
        M1 = matrix_multiplication_operator(b1, label="b1")
        M2 = matrix_multiplication_operator(b2, label="b2")
        from .operators import op_add, op_compose, op_scale
        S = op_add(op_compose(M1, op_compose(H, M2)),
                   op_scale(-1.0, op_compose(M2, op_compose(H, M1))),
                   label="b1 H b2 - b2 H b1")
        I1 = identity_weight(domain, 1)
        est, _ = operator_norm_weighted(S, I1, I1, 2, "tilde", "exact2",
                                        seed=config.seed + i)
        C2 = iterated_commutator(b2, H, 1)
        est2, _ = operator_norm_weighted(C2, I1, I1, 2, "tilde", "exact2",
                                         seed=config.seed + i)
        cubes = DyadicCubeFamily(domain)
        rows.append((N, est, est2, bmo_norm(b1, cubes), bmo_norm(b2, cubes),
                     bmo_norm(b1 * b2, cubes)))
        mixed.append(est)
        single.append(est2)
    rep.add_table("bloom_quantities",
                  ["N", "mixed_commutator", "bmo_commutator",
                   "bmo_b1", "bmo_b2", "bmo_b1b2"], rows)
    increasing = all(b > a * (1.0 + 1e-9) for a, b in zip(mixed, mixed[1:]))
    rep.add("mixed_commutator_increasing", "operators.iterated_commutator",
            1.0 if increasing else 0.0, 1.0, comparator=">=",
            inputs={"resolutions": resolutions})
    rep.add("bmo_commutator_bounded", "operators.iterated_commutator",
            max(single) / min(single), 2.0)
    return rep


# ---------------------------------------------------------------------------

SUITES = {
    "linalg": run_linalg,
    "complex": run_complex,
    "real": run_real,
    "commutator": run_commutator,
    "charact": run_charact,
    "bloom": run_bloom,
}


def run_suite(name, config):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](config)


def run_all(config):
    return [SUITES[name](config) for name in
            ("linalg", "complex", "real", "commutator", "charact", "bloom")]
