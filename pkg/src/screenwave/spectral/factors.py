"""Closed-form Fourier transforms of the 1-D basis building blocks.

Every mesh function factors per screen axis into one of three shapes whose
transforms are exact trigonometric expressions:

* ``box``  (P0 indicator of width h at center c):
      f(xi) = h * sinc(xi h / 2) * exp(-i c xi) / sqrt(2 pi)
* ``hat``  (P1 tent of half-width h at node c):
      f(xi) = h * sinc(xi h / 2)^2 * exp(-i c xi) / sqrt(2 pi)
* ``dhat`` (x-derivative of a hat):  f(xi) = i xi * hat(xi)

For |xi| -> infinity each factor is a finite sum of complex exponentials over
a power of xi,

    f(xi) = xi^{-p} * sum_t a_t exp(i w_t xi),

which we expose exactly; products of two factors then have the same structure
and drive all analytic tail integrals.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_SQRT2PI = np.sqrt(2.0 * np.pi)


def sinc(t: np.ndarray) -> np.ndarray:
    """sin(t)/t with a series fallback below |t| = 1e-4 (avoids cancellation)."""
    t = np.asarray(t, dtype=float)
    small = np.abs(t) < 1e-4
    out = np.empty_like(t)
    ts = t[small]
    out[small] = 1.0 - ts * ts / 6.0 * (1.0 - ts * ts / 20.0)
    tb = t[~small]
    out[~small] = np.sin(tb) / tb
    return out


@dataclass(frozen=True)
class AxisFactor:
    """One 1-D Fourier factor of a dof basis function."""

    kind: str      # "box" | "hat" | "dhat"
    center: float
    h: float

    def value(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        a = xi * self.h / 2.0
        phase = np.exp(-1j * self.center * xi)
        if self.kind == "box":
            return self.h * sinc(a) * phase / _SQRT2PI
        if self.kind == "hat":
            return self.h * sinc(a) ** 2 * phase / _SQRT2PI
        if self.kind == "dhat":
            return 1j * xi * self.h * sinc(a) ** 2 * phase / _SQRT2PI
        raise ValueError(f"unknown factor kind {self.kind!r}")

    def exp_terms(self) -> tuple[int, list[tuple[complex, float]]]:
        """Exact large-|xi| form: power p and terms (a_t, w_t)."""
        c, h = self.center, self.h
        half = h / 2.0
        if self.kind == "box":
            # (2/sqrt(2pi)) sin(xi h/2) e^{-ic xi} / xi
            amp = 2.0 / _SQRT2PI
            return 1, [(amp / 2j, half - c), (-amp / 2j, -half - c)]
        if self.kind in ("hat", "dhat"):
            # (4/(h sqrt(2pi))) sin^2(xi h/2) e^{-ic xi} / xi^2
            amp = 4.0 / (h * _SQRT2PI)
            terms = [
                (amp * 0.5, -c),
                (-amp * 0.25, h - c),
                (-amp * 0.25, -h - c),
            ]
            if self.kind == "hat":
                return 2, terms
            return 1, [(1j * a, w) for a, w in terms]
        raise ValueError(f"unknown factor kind {self.kind!r}")

    def moment0(self) -> float:
        """Integral of the spatial function (so value(0) = moment0/sqrt(2pi))."""
        if self.kind == "box":
            return self.h
        if self.kind == "hat":
            return self.h
        return 0.0


@dataclass(frozen=True)
class PairProfile:
    """F(xi) = f(xi) * conj(g(xi)) for two axis factors (real xi).

    ``q`` and ``terms`` give the exact representation
    F(xi) = xi^{-q} sum_t c_t exp(i nu_t xi); conjugate symmetry holds:
    F(-xi) = conj(F(xi)).
    """

    f: AxisFactor
    g: AxisFactor
    q: int
    terms: tuple[tuple[complex, float], ...]

    def value(self, xi: np.ndarray) -> np.ndarray:
        return self.f.value(xi) * np.conj(self.g.value(xi))

    def dc_coefficient(self) -> complex:
        return sum(c for c, nu in self.terms if nu == 0.0)

    def nonzero_terms(self) -> list[tuple[complex, float]]:
        return [(c, nu) for c, nu in self.terms if nu != 0.0]

    def abs_coeff_sum(self) -> float:
        return float(sum(abs(c) for c, _ in self.terms))

    def min_nonzero_freq(self) -> float:
        nz = [abs(nu) for _, nu in self.terms if nu != 0.0]
        return min(nz) if nz else np.inf

    def max_freq(self) -> float:
        return max((abs(nu) for _, nu in self.terms), default=0.0)


def pair_profile(f: AxisFactor, g: AxisFactor) -> PairProfile:
    pf, tf = f.exp_terms()
    pg, tg = g.exp_terms()
    acc: dict[float, complex] = {}
    # conj(g)(xi) = sum conj(a) e^{-i w xi} / xi^{pg} for real xi (pg even in
    # xi only matters through the power; sign of xi handled by callers who
    # integrate over xi > 0 and mirror by conjugate symmetry).
    for af, wf in tf:
        for ag, wg in tg:
            nu = wf - wg
            acc[nu] = acc.get(nu, 0.0) + af * np.conj(ag)
    terms = tuple(sorted(((c, nu) for nu, c in acc.items()), key=lambda t: t[1]))
    return PairProfile(f=f, g=g, q=pf + pg, terms=terms)
