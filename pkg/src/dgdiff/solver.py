"""Modal DG solver on a uniform periodic grid: heat and viscous Burgers equations."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np

from .basis import gauss_legendre, legendre_vandermonde, legendre_vandermonde_deriv, project_element
from .schemes import StencilOperator, stencil_apply

logger = logging.getLogger(__name__)

BLOWUP_THRESHOLD = 1.0e10


class BlowUpError(FloatingPointError):
    def __init__(self, stage: int, time: float, step: int | None = None):
        where = f"stage {stage}" + (f" of step {step}" if step is not None else "")
        super().__init__(f"solution blew up at {where} (t={time:.6g})")
        self.stage = stage
        self.time = time
        self.step = step


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_elements: int

    def __post_init__(self):
        if self.n_elements < 1:
            raise ValueError(f"grid needs at least 1 element, got {self.n_elements}")
        if not self.x_max > self.x_min:
            raise ValueError(f"empty domain [{self.x_min}, {self.x_max}]")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def h(self) -> float:
        return self.length / self.n_elements

    @property
    def centers(self) -> np.ndarray:
        return self.x_min + self.h * (np.arange(self.n_elements) + 0.5)


@dataclass
class DGField:
    coeffs: np.ndarray  # (..., n_elements, p + 1)
    grid: GridSpec
    time: float = 0.0

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs)
        if self.coeffs.shape[-2] != self.grid.n_elements:
            raise ValueError(f"coefficient array has {self.coeffs.shape[-2]} elements, "
                             f"grid has {self.grid.n_elements}")

    @property
    def p(self) -> int:
        return self.coeffs.shape[-1] - 1

    def with_coeffs(self, coeffs, time=None) -> "DGField":
        return replace(self, coeffs=coeffs, time=self.time if time is None else time)


def l2_project(f: Callable, grid: GridSpec, p: int, nq: int | None = None) -> DGField:
    """Element-wise L2 projection of ``f(x)`` onto degree-``p`` Legendre modes."""
    return DGField(project_element(f, grid.centers, grid.h, p, nq), grid)


@dataclass(frozen=True)
class RKTableau:
    """Explicit Butcher tableau."""

    name: str
    a: tuple
    b: tuple

    @property
    def stages(self) -> int:
        return len(self.b)

    @property
    def order(self) -> int:
        return self.stages


SSP_RK2 = RKTableau("SSP-RK2", ((), (1.0,)), (0.5, 0.5))
SSP_RK3 = RKTableau("SSP-RK3", ((), (1.0,), (0.25, 0.25)), (1 / 6, 1 / 6, 2 / 3))
RK4 = RKTableau("RK4", ((), (0.5,), (0.0, 0.5), (0.0, 0.0, 1.0)), (1 / 6, 1 / 3, 1 / 3, 1 / 6))

TABLEAUS = {"RK2": SSP_RK2, "RK3": SSP_RK3, "RK4": RK4}


def get_tableau(tag) -> RKTableau:
    if isinstance(tag, RKTableau):
        return tag
    if hasattr(tag, "s"):
        tag = tag.s
    if isinstance(tag, int):
        tag = f"RK{tag}"
    key = str(tag).upper().replace("SSP-", "").replace("SSP", "")
    try:
        return TABLEAUS[key]
    except KeyError:
        raise ValueError(f"unknown RK scheme {tag!r}; expected RK2, RK3 or RK4") from None


def _check(u, stage, time):
    if not np.all(np.isfinite(u)) or np.max(np.abs(u)) > BLOWUP_THRESHOLD:
        raise BlowUpError(stage, time)


def rk_step_array(u: np.ndarray, rhs: Callable, dt: float, tableau: RKTableau,
                  time: float = 0.0) -> np.ndarray:
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    k = []
    for i in range(tableau.stages):
        ui = u
        for aij, kj in zip(tableau.a[i], k):
            if aij:
                ui = ui + (dt * aij) * kj
        if i:
            _check(ui, i, time)
        k.append(rhs(ui))
    out = u
    for bi, ki in zip(tableau.b, k):
        out = out + (dt * bi) * ki
    _check(out, tableau.stages, time + dt)
    return out


def rk_step(field: DGField, rhs: Callable, dt: float, tableau: RKTableau) -> DGField:
    """One explicit RK step; ``rhs`` maps a coefficient array to its time derivative."""
    return field.with_coeffs(rk_step_array(field.coeffs, rhs, dt, tableau, field.time),
                             field.time + dt)


def heat_rhs_array(u: np.ndarray, op: StencilOperator, gamma: float, h: float) -> np.ndarray:
    return stencil_apply(op, u, gamma, h)


def heat_rhs(field: DGField, op: StencilOperator, gamma: float) -> DGField:
    return field.with_coeffs(heat_rhs_array(field.coeffs, op, gamma, field.grid.h))


@lru_cache(maxsize=16)
def _convection_tables(p: int):
    # ceil(3p/2) + 1 Gauss points integrate u^2 * phi' exactly
    n = math.ceil(1.5 * p) + 1
    rule = gauss_legendre(n)
    phi = legendre_vandermonde(p, rule.nodes)
    dphi_w = legendre_vandermonde_deriv(p, rule.nodes) * rule.weights[:, None]
    sign = (-1.0) ** np.arange(p + 1)
    inv_mass = 2 * np.arange(p + 1) + 1.0
    return phi, dphi_w, sign, inv_mass


def rusanov_flux(um, up):
    """Local Lax-Friedrichs flux for ``F = u^2 / 2``."""
    return 0.25 * (um * um + up * up) - 0.5 * np.maximum(np.abs(um), np.abs(up)) * (up - um)


def convection_rhs_array(u: np.ndarray, h: float) -> np.ndarray:
    """Weak-form DG term ``-dF/dx`` with Rusanov interface fluxes."""
    p = u.shape[-1] - 1
    phi, dphi_w, sign, inv_mass = _convection_tables(p)
    uq = u @ phi.T
    vol = (0.5 * uq * uq) @ dphi_w
    u_right = u.sum(axis=-1)
    u_left = u @ sign
    flux_r = rusanov_flux(u_right, np.roll(u_left, -1, axis=-1))
    flux_l = np.roll(flux_r, 1, axis=-1)
    surf = flux_r[..., None] - flux_l[..., None] * sign
    return inv_mass * (vol - surf) / h


def burgers_rhs_array(u: np.ndarray, op: StencilOperator, gamma: float, h: float) -> np.ndarray:
    out = convection_rhs_array(u, h)
    if gamma:
        out = out + stencil_apply(op, u, gamma, h)
    return out


def burgers_rhs(field: DGField, op: StencilOperator, gamma: float) -> DGField:
    return field.with_coeffs(burgers_rhs_array(field.coeffs, op, gamma, field.grid.h))


def field_energy(field_or_coeffs) -> np.ndarray:
    """Domain RMS ``sqrt((1/(2 N_e)) sum_e int (u^e)^2 dxi)``; leading axes are kept."""
    u = field_or_coeffs.coeffs if isinstance(field_or_coeffs, DGField) else np.asarray(field_or_coeffs)
    p = u.shape[-1] - 1
    rule = gauss_legendre(p + 1)
    uq = u @ legendre_vandermonde(p, rule.nodes).T
    ne = u.shape[-2]
    return np.sqrt(np.einsum("...eq,q->...", np.abs(uq) ** 2, rule.weights) / (2 * ne))


def cell_means(field: DGField) -> np.ndarray:
    return field.coeffs[..., 0]


def time_step(grid: GridSpec, gamma: float, dt: float | None = None,
              dtau: float | None = None) -> float:
    """Resolve the step size from either ``dt`` or ``dtau = gamma dt / h^2``."""
    if (dt is None) == (dtau is None):
        raise ValueError("give exactly one of dt or dtau")
    if dt is None:
        dt = dtau * grid.h**2 / gamma
    if not dt > 0:
        raise ValueError(f"time step must be positive, got {dt}")
    return dt


def integrate(field: DGField, rhs: Callable, tableau: RKTableau, dt: float, t_end: float,
              callback: Callable | None = None, callback_every: int = 1,
              exact_end: bool = True) -> DGField:
    """March ``field`` to ``t_end``.

    With ``exact_end`` the last step is shortened to land on ``t_end``;
    otherwise the loop stops at the last full step not beyond it.
    ``callback(step, field)`` runs after every ``callback_every`` steps.
    """
    tableau = get_tableau(tableau)
    u, t = field.coeffs, field.time
    remaining = t_end - t
    n_full = int(math.floor(remaining / dt * (1 + 1e-12)))
    step = 0
    try:
        for step in range(1, n_full + 1):
            u = rk_step_array(u, rhs, dt, tableau, t)
            t = field.time + step * dt
            if callback is not None and step % callback_every == 0:
                callback(step, field.with_coeffs(u, t))
        last = t_end - t
        if exact_end and last > 1e-12 * dt:
            step += 1
            u = rk_step_array(u, rhs, last, tableau, t)
            t = t_end
            if callback is not None:
                callback(step, field.with_coeffs(u, t))
    except BlowUpError as exc:
        exc.step = step + 1 if step else 1
        raise
    return field.with_coeffs(u, t)


def sample_continuous(field: DGField, q: int = 10):
    """``q`` uniform samples per element; shared endpoints get the mean of both traces.

    Returns ``(x, u)`` with ``u`` shaped ``(..., q * n_elements)``.
    """
    if q < 2:
        raise ValueError(f"need at least 2 samples per element, got {q}")
    grid = field.grid
    p = field.p
    xi = -1.0 + 2.0 * np.arange(q) / q
    u = field.coeffs @ legendre_vandermonde(p, xi).T  # (..., ne, q)
    right_trace = field.coeffs.sum(axis=-1)
    left_trace = u[..., 0]
    u = u.copy()
    u[..., 0] = 0.5 * (left_trace + np.roll(right_trace, 1, axis=-1))
    x = grid.x_min + grid.h * (np.arange(grid.n_elements)[:, None] + 0.5 * (xi + 1.0))
    return x.ravel(), u.reshape(u.shape[:-2] + (-1,))
