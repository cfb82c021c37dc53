"""Shifted Gegenbauer (ultraspherical) polynomial bases."""

from __future__ import annotations

import math
import threading

import numpy as np

from .fractional import caputo_monomial_coefficient

MAX_MONOMIAL_DEGREE = 32


def gegenbauer_values(lam: float, count: int, mu) -> np.ndarray:
    """Evaluate C_0 ... C_{count-1} with parameter ``lam`` at ``mu``.

    Uses the three-term recurrence. Output has shape ``mu.shape + (count,)``.
    """
    mu = np.asarray(mu, dtype=float)
    out = np.empty(mu.shape + (count,))
    if count == 0:
        return out
    out[..., 0] = 1.0
    if count > 1:
        out[..., 1] = 2.0 * lam * mu
    for n in range(1, count - 1):
        out[..., n + 1] = (2.0 * (n + lam) * mu * out[..., n] - (n + 2.0 * lam - 1.0) * out[..., n - 1]) / (n + 1)
    return out


def gegenbauer_mu_coefficients(lam: float, count: int) -> np.ndarray:
    """Coefficients of C_n^(lam) in powers of its argument, one row per degree.

    Row n holds sum_k (-1)^k (lam)_{n-k} / (k! (n-2k)!) 2^(n-2k) at column n-2k.
    """
    a = np.zeros((count, count))
    for n in range(count):
        for k in range(n // 2 + 1):
            # (lam)_{n-k} = Gamma(n-k+lam) / Gamma(lam), as a product to avoid Gamma(lam) poles
            poch = math.prod(lam + i for i in range(n - k))
            a[n, n - 2 * k] = (-1) ** k * poch * 2.0 ** (n - 2 * k) / (math.factorial(k) * math.factorial(n - 2 * k))
    return a


class GegenbauerBasis:
    """The family G_i(t) = C_i^(lam)(mu(t)), i = 0 .. degree_count-1, on ``domain``.

    ``mu(t) = (2t - a - b) / (b - a)`` maps the domain onto [-1, 1].

    Parameters
    ----------
    lam : float
        Gegenbauer parameter, ``lam > -1/2`` and ``lam != 0``.
        ``lam = 0.5`` gives the Legendre polynomials.
    degree_count : int
        Number of basis functions d.
    domain : (float, float)
        Interval the family is shifted to.
    """

    def __init__(self, lam: float, degree_count: int, domain=(-1.0, 1.0)):
        lam = float(lam)
        if not lam > -0.5:
            raise ValueError(f"Gegenbauer parameter must exceed -1/2, got {lam}")
        if lam == 0.0:
            raise ValueError("lambda = 0 degenerates the Gegenbauer family; use lambda = 0.5 for Legendre")
        if degree_count < 1:
            raise ValueError("degree_count must be positive")
        a, b = map(float, domain)
        if not a < b:
            raise ValueError(f"domain must satisfy a < b, got {domain}")
        self.lam = lam
        self.degree_count = int(degree_count)
        self.domain = (a, b)
        # mu(t) = scale * t + shift
        self.scale = 2.0 / (b - a)
        self.shift = -(a + b) / (b - a)
        self._monomials = None
        self._lock = threading.Lock()

    def __repr__(self):
        return f"GegenbauerBasis(lam={self.lam}, degree_count={self.degree_count}, domain={self.domain})"

    def mu(self, t):
        return self.scale * np.asarray(t, dtype=float) + self.shift

    def eval(self, t) -> np.ndarray:
        """Values of all basis functions at ``t``; shape ``t.shape + (d,)``."""
        return gegenbauer_values(self.lam, self.degree_count, self.mu(t))

    def monomial_coefficients(self) -> np.ndarray:
        """Lower-triangular M with G_i(t) = sum_m M[i, m] t^m (cached)."""
        if self._monomials is None:
            with self._lock:
                if self._monomials is None:
                    self._monomials = self._compute_monomials()
        return self._monomials

    def _compute_monomials(self) -> np.ndarray:
        d = self.degree_count
        if d > MAX_MONOMIAL_DEGREE:
            raise ValueError(f"monomial expansion is limited to d <= {MAX_MONOMIAL_DEGREE}")
        a = gegenbauer_mu_coefficients(self.lam, d)
        # (s t + c)^p = sum_m binom(p, m) s^m c^(p-m) t^m
        s, c = self.scale, self.shift
        b = np.zeros((d, d))
        for p in range(d):
            for m in range(p + 1):
                b[p, m] = math.comb(p, m) * s**m * c ** (p - m)
        with np.errstate(over="ignore", invalid="ignore"):
            m_coef = a @ b
        if not np.all(np.isfinite(m_coef)) or np.max(np.abs(m_coef)) > 1e300 or np.max(np.abs(a)) > 1e300:
            raise OverflowError("monomial coefficients overflow")
        m_coef = np.tril(m_coef)
        m_coef.setflags(write=False)
        return m_coef

    def derivative(self, t, k: int = 1) -> np.ndarray:
        """k-th derivative in t of every basis function.

        Uses d/dmu C_n^(lam) = 2 lam C_{n-1}^(lam+1) k times, times ``scale**k``.
        """
        if k < 1:
            raise ValueError("derivative order must be positive")
        mu = self.mu(t)
        out = np.zeros(mu.shape + (self.degree_count,))
        if k >= self.degree_count:
            return out
        factor = self.scale**k * 2.0**k * math.prod(self.lam + i for i in range(k))
        out[..., k:] = factor * gegenbauer_values(self.lam + k, self.degree_count - k, mu)
        return out

    def caputo(self, t, alpha: float) -> np.ndarray:
        """Caputo derivative (lower terminal 0) of order ``alpha`` of every basis function.

        Applied term-wise to the monomial expansion in t. At ``t = 0`` the
        surviving terms with positive exponent vanish; a negative exponent
        there raises ``ZeroDivisionError``.
        """
        alpha = float(alpha)
        if alpha < 0:
            raise ValueError("Caputo order must be non-negative")
        t = np.asarray(t, dtype=float)
        integer_order = alpha.is_integer()
        if not integer_order and np.any(t < 0):
            raise ValueError("fractional Caputo derivative needs t >= 0")
        d = self.degree_count
        coef = np.array([caputo_monomial_coefficient(m, alpha) for m in range(d)])
        live = np.nonzero(coef)[0]
        powers = np.zeros(t.shape + (d,))
        if live.size:
            exps = live - alpha
            tt = t[..., None]
            if integer_order:
                exps = np.rint(exps).astype(int)
                powers[..., live] = coef[live] * tt**exps
            else:
                if np.any(t == 0) and np.any(exps < 0):
                    raise ZeroDivisionError(f"Caputo derivative of order {alpha} is singular at t = 0")
                powers[..., live] = coef[live] * tt**exps
        return powers @ self.monomial_coefficients().T

    def roots(self, n: int) -> np.ndarray:
        """The n roots of G_n in ascending order (Golub-Welsch)."""
        if not 1 <= n < MAX_MONOMIAL_DEGREE:
            raise ValueError(f"root count must be in [1, {MAX_MONOMIAL_DEGREE - 1}]")
        lam = self.lam
        k = np.arange(1, n, dtype=float)
        off = np.sqrt(k * (k + 2 * lam - 1) / (4 * (k + lam) * (k + lam - 1)))
        jac = np.diag(off, 1) + np.diag(off, -1)
        mu = np.linalg.eigvalsh(jac)
        return np.sort((mu - self.shift) / self.scale)

    def from_monomials(self, coeffs) -> np.ndarray:
        """Basis weights representing the polynomial ``sum_m coeffs[m] t^m``."""
        p = np.zeros(self.degree_count)
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.size > self.degree_count and np.any(coeffs[self.degree_count:]):
            raise ValueError("polynomial degree exceeds the basis")
        p[: min(coeffs.size, self.degree_count)] = coeffs[: self.degree_count]
        # solve w^T M = p with M lower triangular
        return np.linalg.solve(self.monomial_coefficients().T, p)


def kernel_value(basis: GegenbauerBasis, t, s) -> float:
    """Gegenbauer kernel K(t, s) = sum_j G_j(t) G_j(s)."""
    return float(basis.eval(t) @ basis.eval(s))
