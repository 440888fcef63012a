"""Analytic tails for the radial symbol integrals.

Beyond a split radius X >= 2.5k the symbols admit geometric expansions in
(k/rho)^2 with power-law terms rho^p.  Against the exact exponential form of
the basis-product factors the leftover integrals reduce to

* n=2:  integrals  int_X^inf e^{i nu xi} xi^{-m} d xi  = X^{1-m} E_m(-i nu X),
  evaluated through the generalized exponential integral (continued fraction
  for |z| >= 8, mpmath below), and

* n=3:  exterior-of-square integrals of |xi|^p * P(xi) for separable P,
  computed through the heat-kernel factorization
      |xi|^{-s} = (1/Gamma(s/2)) int_0^inf v^{s/2-1} e^{-|xi|^2 v} dv
  (and its once-subtracted variant for 0 < p < 2), which turns every term
  into products of 1-D Gaussian-damped axis integrals.

All neglected pieces carry explicit envelope/IBP bounds that are accumulated
into the quadrature's certified tail bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import binom, erfc, gammaln

from .factors import PairProfile
from .rules import gauss_panels, split_interval

_EXPINT_CACHE: dict[tuple[float, float, float], complex] = {}


def _expint_cf(m: float, z: complex, eps: float = 1e-15, maxiter: int = 400) -> complex:
    """E_m(z) by modified Lentz continued fraction (good for |z| >= ~6)."""
    b = z + m
    tiny = 1e-300
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, maxiter):
        a = -i * (m - 1.0 + i)
        b = b + 2.0
        d = 1.0 / (a * d + b)
        c = b + a / c
        delta = c * d
        h = h * delta
        if abs(delta - 1.0) < eps:
            return h * np.exp(-z)
    return h * np.exp(-z)


def expint(m: float, z: complex) -> complex:
    """Generalized exponential integral E_m(z), complex z, real order m > 0."""
    key = (float(m), float(np.real(z)), float(np.imag(z)))
    hit = _EXPINT_CACHE.get(key)
    if hit is not None:
        return hit
    if abs(z) >= 8.0:
        val = _expint_cf(m, complex(z))
    else:
        import mpmath

        val = complex(mpmath.expint(m, complex(z)))
    _EXPINT_CACHE[key] = val
    return val


def halfline_osc_integral(m: float, nu: float, X: float) -> complex:
    """int_X^inf e^{i nu xi} xi^{-m} d xi  (m > 1 when nu == 0)."""
    if nu == 0.0:
        if m <= 1.0:
            raise ValueError("halfline_osc_integral: divergent DC tail (m <= 1)")
        return X ** (1.0 - m) / (m - 1.0) + 0.0j
    return X ** (1.0 - m) * expint(m, -1j * nu * X)


def profile_tail(profile: PairProfile, p: float, X: float) -> complex:
    """int_{|xi| > X} |xi|^p F(xi) d xi for F given by the profile expansion."""
    q = profile.q
    m = q - p
    total = 0.0j
    sgn = (-1.0) ** q
    for c, nu in profile.terms:
        total += c * (halfline_osc_integral(m, nu, X)
                      + sgn * halfline_osc_integral(m, -nu, X))
    return total


def profile_abs_integral(profile: PairProfile, w: np.ndarray,
                         values: np.ndarray, Y: float) -> float:
    """Envelope estimate of int_R |F|: rule part on (0,Y) doubled + tail."""
    rule_part = 2.0 * float(np.sum(np.abs(w) * np.abs(values)))
    q = profile.q
    tail = 2.0 * profile.abs_coeff_sum() * Y ** (1 - q) / (q - 1)
    return rule_part + tail


# ---------------------------------------------------------------------------
# symbol expansions sigma(rho) = sum coef * rho^p + remainder, rho >= X
# ---------------------------------------------------------------------------
def symbol_series(kind, M: int) -> list[tuple[float, float]]:
    """First M+1 terms (coef, p) of the large-rho expansion of the symbol."""
    k = kind.k
    terms = []
    if kind.tag == "single_layer":
        # 1/(2 sqrt(rho^2-k^2)) = (1/2) sum_m C(2m,m)/4^m k^{2m} rho^{-1-2m}
        for m in range(M + 1):
            c = binom(2 * m, m) / 4.0 ** m
            terms.append((0.5 * c * k ** (2 * m), -1.0 - 2 * m))
    elif kind.tag == "hypersingular":
        # -(1/2) sqrt(rho^2-k^2) = -(1/2) sum_m binom(1/2,m)(-1)^m k^{2m} rho^{1-2m}
        for m in range(M + 1):
            c = binom(0.5, m) * (-1.0) ** m
            terms.append((-0.5 * c * k ** (2 * m), 1.0 - 2 * m))
    else:
        for m in range(M + 1):
            c = binom(kind.s, m)
            terms.append((c * k ** (2 * m), 2.0 * kind.s - 2 * m))
    return terms


def symbol_series_remainder(kind, M: int, X: float) -> tuple[float, float]:
    """(coef, p) envelope of the neglected remainder for rho >= X."""
    k = kind.k
    r = (k / X) ** 2
    if r >= 0.5:
        raise ValueError("symbol series needs X >= sqrt(2) k")
    geo = 1.0 / (1.0 - r)
    m = M + 1
    if kind.tag == "single_layer":
        c = binom(2 * m, m) / 4.0 ** m
        return 0.5 * c * k ** (2 * m) * geo, -1.0 - 2 * m
    if kind.tag == "hypersingular":
        c = abs(binom(0.5, m))
        return 0.5 * c * k ** (2 * m) * geo * 2.0, 1.0 - 2 * m
    c = abs(binom(kind.s, m)) * (1 + m) ** 2
    return c * k ** (2 * m) * geo, 2.0 * kind.s - 2 * m


# ---------------------------------------------------------------------------
# n=3 tensor tail engine
# ---------------------------------------------------------------------------
def _gauss_tail_dc(q: int, v: np.ndarray, Y: float) -> np.ndarray:
    """g_q(v) = int_Y^inf xi^{-q} e^{-xi^2 v} d xi for even q in {0,2,4}."""
    v = np.asarray(v, dtype=float)
    vc = np.maximum(v, 1e-300)
    rY = np.sqrt(vc) * Y
    g0 = 0.5 * np.sqrt(np.pi / vc) * erfc(rY)
    if q == 0:
        return np.where(v == 0.0, np.inf, g0)
    g2 = np.exp(-vc * Y * Y) / Y - 2.0 * vc * g0
    g2 = np.where(v == 0.0, 1.0 / Y, g2)
    if q == 2:
        return g2
    if q == 4:
        g4 = np.exp(-vc * Y * Y) / (3.0 * Y ** 3) - (2.0 * vc / 3.0) * g2
        return np.where(v == 0.0, 1.0 / (3.0 * Y ** 3), g4)
    raise ValueError(f"unsupported DC tail order q={q}")


def _delta_gauss_tail_dc(q: int, v: np.ndarray, Y: float) -> np.ndarray:
    """g_q(0) - g_q(v), evaluated without cancellation."""
    v = np.asarray(v, dtype=float)
    em1 = -np.expm1(-v * Y * Y)      # 1 - e^{-Y^2 v}
    g0 = _gauss_tail_dc(0, v, Y)
    if q == 2:
        return em1 / Y + 2.0 * v * g0
    if q == 4:
        g2 = _gauss_tail_dc(2, v, Y)
        return em1 / (3.0 * Y ** 3) + (2.0 * v / 3.0) * g2
    raise ValueError(f"unsupported DC tail order q={q}")


@dataclass
class VGrid:
    """Shared log-panel grid for the heat-kernel parameter v."""

    nodes: np.ndarray
    weights: np.ndarray
    v_min: float
    v_big: float

    @classmethod
    def build(cls, X: float, panels_per_decade: int = 2, order: int = 8) -> "VGrid":
        v_min, v_big = 1e-16, 150.0 / (X * X)
        decades = math.log10(v_big / v_min)
        n_panels = max(8, int(math.ceil(decades * panels_per_decade)))
        u = np.linspace(math.log(v_min), math.log(v_big), n_panels + 1)
        un, uw = gauss_panels(u, order)
        nodes = np.exp(un)
        return cls(nodes=nodes, weights=uw * nodes, v_min=v_min, v_big=v_big)


@dataclass
class AxisTable:
    """Per-axis-pair 1-D Gaussian-damped integral tables over a VGrid.

    d(v) covers (-X, X); e(v) covers |xi| in (X, Y) plus analytic tails; the
    full-line integral is q(v) = d(v) + e(v).  Delta arrays hold the stable
    differences value(0) - value(v).
    """

    q: int
    d0: float
    e0: float
    dv: np.ndarray
    ev: np.ndarray
    ddv: np.ndarray       # d(0) - d(v)
    dev: np.ndarray       # e(0) - e(v)
    m2_full: float        # int xi^2 F (full line, exact tails), nan if q < 4
    d2: float             # int_{-X}^{X} xi^2 F
    abs_int: float        # envelope of int |F|
    model_bound: float    # certified bound on the neglected non-DC tail model

    @property
    def q0(self) -> float:
        return self.d0 + self.e0


def _real_dot_tables(xi, w, F, vgrid, Y):
    """exp dots and their expm1 deltas for weights 2*Re(w F) over the v grid."""
    rw = 2.0 * np.real(w * F)
    base = float(np.sum(rw))
    vals = np.empty(vgrid.nodes.size)
    deltas = np.empty(vgrid.nodes.size)
    xi2 = xi * xi
    # small-v fast path: polynomial in (v Y^2) from scaled moments
    r = xi2 / (Y * Y)
    J = 40
    mom = np.empty(J + 1)
    rj = np.ones_like(r)
    for j in range(J + 1):
        mom[j] = float(np.sum(rw * rj))
        rj = rj * r
    v_fast = 4.0 / (Y * Y)
    for iv, v in enumerate(vgrid.nodes):
        if v <= v_fast:
            x = -v * Y * Y
            term = 1.0
            acc = 0.0
            for j in range(1, J + 1):
                term *= x / j
                acc += term * mom[j]
            deltas[iv] = -acc
            vals[iv] = base - deltas[iv]
        else:
            cut = np.searchsorted(xi2, 45.0 / v)
            ex = np.exp(-v * xi2[:cut])
            vals[iv] = float(np.sum(rw[:cut] * ex))
            deltas[iv] = base - vals[iv]
    return base, vals, deltas


def build_axis_table(profile: PairProfile, X: float, Y: float, omega: float,
                     vgrid: VGrid, order: int = 16, scale: float = 1.0) -> AxisTable:
    """Assemble the Gaussian-damped tables for one axis pair."""
    q = profile.q
    if q % 2 != 0:
        raise ValueError("tensor tails require even per-axis decay order")
    xi_d, w_d = gauss_panels(split_interval(0.0, X, scale * np.pi / max(omega, 0.5),
                                            min_panels=4), order)
    xi_e, w_e = gauss_panels(split_interval(X, Y, scale * np.pi / max(omega, 0.5),
                                            min_panels=4), order)
    F_d = profile.value(xi_d)
    F_e = profile.value(xi_e)

    d0, dvals, ddel = _real_dot_tables(xi_d, w_d, F_d, vgrid, Y)
    e0r, evals, edel = _real_dot_tables(xi_e, w_e, F_e, vgrid, Y)

    cdc = profile.dc_coefficient()
    cdc_r = float(np.real(cdc))      # imaginary part integrates to zero
    dc0 = 2.0 * cdc_r * float(_gauss_tail_dc(q, np.array([0.0]), Y)[0])
    dc_v = 2.0 * cdc_r * _gauss_tail_dc(q, vgrid.nodes, Y)
    dc_delta = 2.0 * cdc_r * _delta_gauss_tail_dc(q, vgrid.nodes, Y)

    # exact non-DC tail at v=0; modelled as nonDC0 * e^{-Y^2 v} for v > 0
    non_dc0 = 0.0
    sgn = (-1.0) ** q
    for c, nu in profile.nonzero_terms():
        non_dc0 += np.real(c * (halfline_osc_integral(q, nu, Y)
                                + sgn * halfline_osc_integral(q, -nu, Y)))
    damp = np.exp(-vgrid.nodes * Y * Y)
    e0 = e0r + dc0 + non_dc0
    ev = evals + dc_v + non_dc0 * damp
    dev = edel + dc_delta + non_dc0 * (1.0 - damp)

    # certified bound on the model error (IBP and envelope variants)
    s_nz = sum(abs(c) for c, _ in profile.nonzero_terms())
    nu_min = profile.min_nonzero_freq()
    k_ibp = 2.0 * s_nz / (nu_min * Y ** q) if np.isfinite(nu_min) else np.inf
    k_env = 2.0 * s_nz / ((q - 1) * Y ** (q - 1))
    model_k = min(k_ibp, k_env)

    # exact second moments where absolutely convergent
    if q >= 4:
        m2_rule = (2.0 * float(np.sum(np.real(w_d * F_d) * xi_d ** 2))
                   + 2.0 * float(np.sum(np.real(w_e * F_e) * xi_e ** 2)))
        m2_tail = np.real(profile_tail(profile, 2.0, Y))
        m2_full = m2_rule + float(m2_tail)
    else:
        m2_full = float("nan")
    d2 = 2.0 * float(np.sum(np.real(w_d * F_d) * xi_d ** 2))

    abs_int = profile_abs_integral(profile, np.concatenate([w_d, w_e]),
                                   np.concatenate([F_d, F_e]), Y)

    return AxisTable(q=q, d0=d0, e0=e0, dv=dvals, ev=ev, ddv=ddel, dev=dev,
                     m2_full=m2_full, d2=d2, abs_int=abs_int,
                     model_bound=model_k)


def required_axis_Y(profile: PairProfile, other_abs: float, budget: float,
                    has_subtracted: bool, Y_min: float = 2000.0,
                    Y_max: float = 4.0e5) -> float:
    """Smallest power-of-two-scaled Y meeting the model-error budget."""
    q = profile.q
    s_nz = sum(abs(c) for c, _ in profile.nonzero_terms())
    nu_min = profile.min_nonzero_freq()
    Y = Y_min
    while Y <= Y_max:
        k_ibp = 2.0 * s_nz / (nu_min * Y ** q) if np.isfinite(nu_min) else np.inf
        k_env = 2.0 * s_nz / ((q - 1) * Y ** (q - 1))
        K = min(k_ibp, k_env)
        err = K * other_abs * (4.0 * Y if has_subtracted else 1.0 / Y)
        if err <= budget:
            return Y
        Y *= 2.0
    from .engine import QuadratureError

    raise QuadratureError("axis tail truncation cannot meet the requested tolerance")


def tensor_tail_term(p: float, ax: AxisTable, ay: AxisTable, vgrid: VGrid) -> float:
    """Exterior-of-square integral int_{max|xi_i|>X} |xi|^p P(xi) d xi.

    Supported exponents: p = 2 and p = 0 exactly, p in (0,2) by the
    subtracted heat-kernel identity, p < 0 by the direct one.
    """
    T0 = ax.e0 * ay.e0 + ax.e0 * ay.d0 + ax.d0 * ay.e0
    if p == 0.0:
        return T0
    if p == 2.0:
        if not (np.isfinite(ax.m2_full) and np.isfinite(ay.m2_full)):
            raise ValueError("rho^2 moment requires axis decay order >= 4")
        return _m2_exterior(ax, ay)

    v, wv = vgrid.nodes, vgrid.weights
    if p < 0.0:
        s = -p
        # E(v) = ex ey + ex dy + dx ey  (cancellation-free exterior integral)
        E = ax.ev * ay.ev + ax.ev * ay.dv + ax.dv * ay.ev
        integral = float(np.sum(wv * v ** (s / 2.0 - 1.0) * E))
        # analytic completion below v_min where E ~ T0
        integral += T0 * (2.0 / s) * vgrid.v_min ** (s / 2.0)
        return integral / math.exp(gammaln(s / 2.0))

    if 0.0 < p < 2.0:
        # bracket(v) = T0 - E(v) = e0x dqy + qy(v) dex + d0x dey + ey(v) ddx
        dq_y = ay.ddv + ay.dev
        q_yv = ay.dv + ay.ev
        bracket = (ax.e0 * dq_y + q_yv * ax.dev + ax.d0 * ay.dev + ay.ev * ax.ddv)
        c_p = -1.0 / math.gamma(-p / 2.0)
        integral = float(np.sum(wv * v ** (-p / 2.0 - 1.0) * bracket))
        integral += T0 * (2.0 / p) * vgrid.v_big ** (-p / 2.0)
        if np.isfinite(ax.m2_full) and np.isfinite(ay.m2_full):
            # small-v completion: bracket ~ v * M2_ext below v_min
            m2_ext = _m2_exterior(ax, ay)
            integral += m2_ext * vgrid.v_min ** (1.0 - p / 2.0) / (1.0 - p / 2.0)
        return c_p * integral

    raise ValueError(f"unsupported tail exponent p={p}")


def _m2_exterior(ax: AxisTable, ay: AxisTable) -> float:
    """int_{ext} rho^2 P = int_{ext}(xi1^2 + xi2^2) P via tensor moments."""
    t1 = ax.m2_full * ay.q0 - ax.d2 * ay.d0
    t2 = ay.m2_full * ax.q0 - ay.d2 * ax.d0
    return t1 + t2
