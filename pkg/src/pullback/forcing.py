"""Separable non-autonomous forcings ``g(x, t) = g0(x) + h(t) * phi(x)``.

Amplitudes built from exponential pieces carry closed-form integrals, so
tails such as ``int_tau^inf h(s)^2 ds`` or exponentially weighted pasts are
evaluated exactly and divergence is detected analytically. Amplitudes
without a closed form fall back to :func:`scipy.integrate.quad`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate


class DivergentIntegralError(ValueError):
    """An improper integral of the forcing does not converge."""

    def __init__(self, message, term=None):
        super().__init__(message)
        self.term = term


@dataclass(frozen=True)
class ExpPiece:
    """``coef * exp(rate * s)`` restricted to ``lo <= s <= hi``."""

    lo: float
    hi: float
    coef: float
    rate: float


def _exp_integral(coef, rate, a, b, ref):
    # int_a^b coef * exp(rate * (s - ref)) ds, a < b, endpoints may be infinite
    if coef == 0.0:
        return 0.0
    if rate == 0.0:
        if math.isinf(a) or math.isinf(b):
            raise DivergentIntegralError("non-decaying integrand on an infinite interval")
        return coef * (b - a)
    if math.isinf(a):
        if rate < 0:
            raise DivergentIntegralError("integrand grows as s -> -inf")
        if math.isinf(b):
            raise DivergentIntegralError("integrand grows as s -> +inf")
        return coef * math.exp(rate * (b - ref)) / rate
    if math.isinf(b):
        if rate > 0:
            raise DivergentIntegralError("integrand grows as s -> +inf")
        return -coef * math.exp(rate * (a - ref)) / rate
    return coef * math.exp(rate * (a - ref)) * math.expm1(rate * (b - a)) / rate


class Amplitude:
    """Scalar time profile ``h(t)`` of a separable perturbation.

    Subclasses implement ``__call__`` (vectorised) and may override
    :meth:`integral`; the default uses adaptive quadrature.
    """

    name = "amplitude"

    def __call__(self, t):
        raise NotImplementedError

    @property
    def is_zero(self):
        return False

    def integral(self, a, b, power=1, weight_rate=0.0, ref=0.0):
        """``int_a^b h(s)**power * exp(weight_rate * (s - ref)) ds``.

        Raises :class:`DivergentIntegralError` when an infinite endpoint makes
        the integral diverge (heuristically, from the quadrature error estimate).
        """
        if b <= a:
            return 0.0

        def integrand(s):
            return float(self(s)) ** power * math.exp(weight_rate * (s - ref))

        points = [0.0] if (a < 0.0 < b and not (math.isinf(a) or math.isinf(b))) else None
        if math.isinf(a) or math.isinf(b):
            pieces = [(a, min(b, 0.0)), (max(a, 0.0), b)] if a < 0.0 < b else [(a, b)]
            total = 0.0
            for lo, hi in pieces:
                if hi <= lo:
                    continue
                val, err = integrate.quad(integrand, lo, hi, limit=200, epsabs=1e-13, epsrel=1e-12)
                if not math.isfinite(val) or err > 1e-6 * max(1.0, abs(val)):
                    raise DivergentIntegralError(f"quadrature of {self.name} failed to converge")
                total += val
            return total
        val, _ = integrate.quad(integrand, a, b, points=points, limit=200, epsabs=1e-13, epsrel=1e-12)
        return val

    def __repr__(self):
        return f"{type(self).__name__}()"


class PiecewiseExponential(Amplitude):
    """Amplitude defined piecewise by non-overlapping :class:`ExpPiece` terms.

    All weighted integrals of ``h`` and ``h**2`` are evaluated in closed form.
    """

    def __init__(self, pieces, name="piecewise_exp"):
        self.pieces = tuple(pieces)
        self.name = name

    @property
    def is_zero(self):
        return all(p.coef == 0.0 for p in self.pieces)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for p in self.pieces:
            # closed pieces share endpoints with equal values, so assign instead of add
            mask = (t >= p.lo) & (t <= p.hi)
            out = np.where(mask, p.coef * np.exp(p.rate * t), out)
        return out if out.ndim else float(out)

    def integral(self, a, b, power=1, weight_rate=0.0, ref=0.0):
        if b <= a:
            return 0.0
        if power == 0:
            return _exp_integral(1.0, weight_rate, a, b, ref)
        total = 0.0
        for p in self.pieces:
            lo, hi = max(a, p.lo), min(b, p.hi)
            if hi <= lo or p.coef == 0.0:
                continue
            rate = power * p.rate + weight_rate
            # coef^power * exp(power*rate_p*s) = coef^power * exp(power*rate_p*ref) * exp(...(s-ref))
            scale = p.coef ** power * math.exp(power * p.rate * ref)
            total += _exp_integral(scale, rate, lo, hi, ref)
        return total

    def __repr__(self):
        return f"PiecewiseExponential({list(self.pieces)!r}, name={self.name!r})"


def zero():
    return PiecewiseExponential([], name="zero")


def constant(value=1.0):
    return PiecewiseExponential([ExpPiece(-math.inf, math.inf, float(value), 0.0)], name="constant")


def two_sided_exp(amplitude=1.0, rate=1.0):
    """``amplitude * exp(-rate * |t|)``."""
    return PiecewiseExponential(
        [ExpPiece(-math.inf, 0.0, float(amplitude), float(rate)),
         ExpPiece(0.0, math.inf, float(amplitude), -float(rate))],
        name="two_sided_exp",
    )


def exponential(amplitude=1.0, rate=1.0):
    """``amplitude * exp(rate * t)`` on the whole line."""
    return PiecewiseExponential([ExpPiece(-math.inf, math.inf, float(amplitude), float(rate))],
                                name="exponential")


class PowerLaw(Amplitude):
    """``amplitude * (1 + |t|)**(-exponent)``; slow algebraic decay in both directions."""

    name = "power_law"

    def __init__(self, amplitude=1.0, exponent=0.25):
        self.amplitude = float(amplitude)
        self.exponent = float(exponent)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.amplitude * (1.0 + np.abs(t)) ** (-self.exponent)
        return out if out.ndim else float(out)

    def integral(self, a, b, power=1, weight_rate=0.0, ref=0.0):
        if b <= a:
            return 0.0
        decay = power * self.exponent
        if self.amplitude != 0.0 and power > 0:
            # algebraic tail integrable iff decay > 1 when the weight does not help
            if math.isinf(b) and weight_rate >= 0 and (weight_rate > 0 or decay <= 1.0):
                raise DivergentIntegralError(f"(1+s)^-{decay:g} tail diverges as s -> +inf")
            if math.isinf(a) and weight_rate <= 0 and (weight_rate < 0 or decay <= 1.0):
                raise DivergentIntegralError(f"(1+|s|)^-{decay:g} tail diverges as s -> -inf")
        return super().integral(a, b, power, weight_rate, ref)

    def __repr__(self):
        return f"PowerLaw(amplitude={self.amplitude!r}, exponent={self.exponent!r})"


class ForcingSpec:
    """Forcing ``g(t) = g0 + h(t) * phi`` on a state space with norm weight ``weight``.

    ``g0`` and ``phi`` are vectors of the state dimension; the ambient norm is
    ``||v||^2 = weight * sum(v**2)``.
    """

    def __init__(self, g0, phi, amplitude, weight=1.0):
        self.g0 = np.atleast_1d(np.asarray(g0, dtype=float)).copy()
        self.phi = np.atleast_1d(np.asarray(phi, dtype=float)).copy()
        if self.g0.shape != self.phi.shape or self.g0.ndim != 1:
            raise ValueError("g0 and phi must be vectors of the same length")
        if not (np.all(np.isfinite(self.g0)) and np.all(np.isfinite(self.phi))):
            raise ValueError("forcing profiles must be finite")
        self.g0.setflags(write=False)
        self.phi.setflags(write=False)
        self.amplitude = amplitude
        self.weight = float(weight)
        self.g0_sq = self.weight * float(np.dot(self.g0, self.g0))
        self.cross = self.weight * float(np.dot(self.g0, self.phi))
        self.phi_sq = self.weight * float(np.dot(self.phi, self.phi))

    @property
    def dim(self):
        return self.g0.size

    @property
    def is_autonomous(self):
        return self.amplitude.is_zero or self.phi_sq == 0.0

    def limit(self):
        """The autonomous limit forcing ``g0``."""
        return ForcingSpec(self.g0, self.phi, zero(), self.weight)

    def value(self, t):
        return self.g0 + float(self.amplitude(t)) * self.phi

    def perturbation_norm(self, t):
        """``||g(t) - g0||``; vectorised over ``t``."""
        return np.abs(self.amplitude(t)) * math.sqrt(self.phi_sq)

    def weighted_sq_integral(self, a, b, lam, ref):
        """``int_a^b exp(lam (s - ref)) ||g(s)||^2 ds`` with termwise closed forms."""
        terms = (
            ("g0", self.g0_sq, 0),
            ("cross", 2.0 * self.cross, 1),
            ("perturbation", self.phi_sq, 2),
        )
        total = 0.0
        divergent = []
        for label, coef, power in terms:
            if coef == 0.0 or (power > 0 and self.amplitude.is_zero):
                continue
            try:
                if power == 0:
                    total += coef * _exp_integral(1.0, lam, a, b, ref)
                else:
                    total += coef * self.amplitude.integral(a, b, power, lam, ref)
            except DivergentIntegralError:
                divergent.append(label)
        if divergent:
            raise DivergentIntegralError(
                "divergent forcing term(s): " + ", ".join(divergent), term=divergent[0])
        return total

    def perturbation_sq_integral(self, a, b, weight_rate=0.0, ref=0.0):
        """``int_a^b exp(weight_rate (s - ref)) ||g(s) - g0||^2 ds``."""
        if self.phi_sq == 0.0 or self.amplitude.is_zero:
            return 0.0
        return self.phi_sq * self.amplitude.integral(a, b, 2, weight_rate, ref)

    def __repr__(self):
        return (f"ForcingSpec(dim={self.dim}, amplitude={self.amplitude!r}, "
                f"||g0||^2={self.g0_sq:.6g}, ||phi||^2={self.phi_sq:.6g})")
