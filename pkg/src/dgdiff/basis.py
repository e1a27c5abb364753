"""Legendre modal basis and Gauss quadrature on the reference element [-1, 1]."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

NEWTON_TOL = 1.0e-14
NEWTON_MAXIT = 100


def legendre_eval(l: int, xi):
    """Evaluate the Legendre polynomial ``P_l`` at ``xi`` (three-term recurrence)."""
    xi = np.asarray(xi, dtype=float)
    p0 = np.ones_like(xi)
    if l == 0:
        return p0 if p0.ndim else float(p0)
    p1 = xi.copy()
    for n in range(1, l):
        p0, p1 = p1, ((2 * n + 1) * xi * p1 - n * p0) / (n + 1)
    return p1 if p1.ndim else float(p1)


def legendre_deriv(l: int, xi):
    """Evaluate ``dP_l/dxi``."""
    out = legendre_vandermonde_deriv(l, xi)[..., l]
    return out if out.ndim else float(out)


def legendre_vandermonde(p: int, xi) -> np.ndarray:
    """Values ``P_0..P_p`` at ``xi``; shape ``xi.shape + (p + 1,)``."""
    xi = np.asarray(xi, dtype=float)
    out = np.empty(xi.shape + (p + 1,))
    out[..., 0] = 1.0
    if p >= 1:
        out[..., 1] = xi
    for n in range(1, p):
        out[..., n + 1] = ((2 * n + 1) * xi * out[..., n] - n * out[..., n - 1]) / (n + 1)
    return out


def legendre_vandermonde_deriv(p: int, xi) -> np.ndarray:
    """Derivatives ``P'_0..P'_p`` at ``xi``; shape ``xi.shape + (p + 1,)``."""
    xi = np.asarray(xi, dtype=float)
    vals = legendre_vandermonde(p, xi)
    out = np.zeros_like(vals)
    if p >= 1:
        out[..., 1] = 1.0
    for n in range(1, p):
        out[..., n + 1] = out[..., n - 1] + (2 * n + 1) * vals[..., n]
    return out


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.nodes.size

    def integrate(self, f: Callable) -> float:
        return np.sum(self.weights * f(self.nodes))


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> QuadratureRule:
    """Gauss-Legendre rule with ``n`` nodes, exact up to degree ``2n - 1``.

    Nodes are the roots of ``P_n`` found by Newton iteration from the
    Chebyshev-like initial guess.
    """
    if n < 1:
        raise ValueError(f"need at least one quadrature node, got {n}")
    i = np.arange(1, n + 1)
    x = np.cos(np.pi * (i - 0.25) / (n + 0.5))
    for _ in range(NEWTON_MAXIT):
        pn = legendre_vandermonde(n, x)
        # P'_n from (1 - x^2) P'_n = n (P_{n-1} - x P_n)
        dpn = n * (pn[:, n - 1] - x * pn[:, n]) / (1.0 - x * x)
        dx = pn[:, n] / dpn
        x = x - dx
        if np.max(np.abs(dx)) < NEWTON_TOL:
            break
    else:
        raise RuntimeError(f"Gauss-Legendre Newton iteration did not converge for n={n}")
    pn = legendre_vandermonde(n, x)
    dpn = n * (pn[:, n - 1] - x * pn[:, n]) / (1.0 - x * x)
    w = 2.0 / ((1.0 - x * x) * dpn * dpn)
    order = np.argsort(x)
    nodes, weights = x[order], w[order]
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return QuadratureRule(nodes, weights)


@dataclass(frozen=True)
class ReferenceBasis:
    """Legendre basis of degree ``p`` with its endpoint tables."""

    p: int

    def __post_init__(self):
        if self.p < 1:
            raise ValueError(f"polynomial degree must be >= 1, got {self.p}")

    @property
    def ndof(self) -> int:
        return self.p + 1

    @property
    def right_values(self) -> np.ndarray:
        """phi_l(+1) = 1."""
        return np.ones(self.p + 1)

    @property
    def left_values(self) -> np.ndarray:
        """phi_l(-1) = (-1)^l."""
        return (-1.0) ** np.arange(self.p + 1)

    @property
    def right_derivs(self) -> np.ndarray:
        """phi_l'(+1) = l (l + 1) / 2."""
        l = np.arange(self.p + 1)
        return l * (l + 1) / 2.0

    @property
    def left_derivs(self) -> np.ndarray:
        l = np.arange(self.p + 1)
        return (-1.0) ** (l + 1) * l * (l + 1) / 2.0

    def __call__(self, xi) -> np.ndarray:
        return legendre_vandermonde(self.p, xi)

    def deriv(self, xi) -> np.ndarray:
        return legendre_vandermonde_deriv(self.p, xi)


@dataclass(frozen=True)
class LocalMatrices:
    """Diagonal mass ``M_ll = (1/2) int phi_l^2`` and stiffness ``S_lj = int phi_l' phi_j'``."""

    M: np.ndarray
    S: np.ndarray

    @property
    def L(self) -> np.ndarray:
        """Projection denominators ``int phi_l^2 = 2 M_ll``."""
        return 2.0 * self.M


@lru_cache(maxsize=32)
def build_local_matrices(p: int) -> LocalMatrices:
    """Closed forms ``M_ll = 1/(2l+1)`` and ``S_lj = m(m+1)``, ``m = min(l, j)``, for even ``l+j``."""
    if p < 1:
        raise ValueError(f"polynomial degree must be >= 1, got {p}")
    l = np.arange(p + 1)
    M = 1.0 / (2 * l + 1)
    m = np.minimum.outer(l, l)
    S = np.where((l[:, None] + l[None, :]) % 2 == 0, m * (m + 1), 0).astype(float)
    M.setflags(write=False)
    S.setflags(write=False)
    return LocalMatrices(M, S)


def projection_nodes(p: int) -> int:
    """Quadrature size used to project transcendental data."""
    return 4 * (p + 1)


def project_element(f: Callable, xc, h: float, p: int, nq: int | None = None) -> np.ndarray:
    """L2-project ``f`` onto P^p on elements centred at ``xc``.

    Returns modal coefficients of shape ``xc.shape + (p + 1,)``; complex if
    ``f`` is complex.
    """
    rule = gauss_legendre(nq or projection_nodes(p))
    xc = np.asarray(xc, dtype=float)
    x = xc[..., None] + 0.5 * h * rule.nodes
    fx = f(x)
    phi = legendre_vandermonde(p, rule.nodes)
    denom = 2.0 / (2 * np.arange(p + 1) + 1)
    return np.einsum("...q,q,ql->...l", fx, rule.weights, phi) / denom


def fourier_projection(kh: float, p: int, nq: int | None = None) -> np.ndarray:
    """Projected coefficients of ``exp(i k x)`` relative to the element centre.

    ``mu_l = int exp(i kh xi / 2) phi_l(xi) dxi / L_ll``.  At least 20 nodes
    are used so the low-``p`` Nyquist cases also reach round-off.
    """
    rule = gauss_legendre(nq or max(projection_nodes(p), 20))
    phi = legendre_vandermonde(p, rule.nodes)
    f = np.exp(0.5j * kh * rule.nodes)
    denom = 2.0 / (2 * np.arange(p + 1) + 1)
    return (rule.weights * f) @ phi / denom


def eval_solution(dofs, xi):
    """Evaluate ``sum_j U_j phi_j(xi)``; ``dofs`` may carry leading axes."""
    dofs = np.asarray(dofs)
    p = dofs.shape[-1] - 1
    phi = legendre_vandermonde(p, xi)
    if np.ndim(xi) == 0:
        return dofs @ phi
    return np.einsum("...l,ql->...q", dofs, phi)
