"""Semi- and fully-discrete von Neumann analysis of the DG diffusion stencils.

Conventions: ``kh`` is the element wavenumber in ``[0, (p+1) pi]``,
``K = kh / (p+1)``, eigenvalues ``lambda`` of ``A(kh)`` equal ``-(k_m h)^2``,
and ``tau = gamma t / h^2`` with ``tau_p = (p+1)^2 tau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import linear_sum_assignment

from .basis import fourier_projection, gauss_legendre, legendre_vandermonde
from .schemes import Formulation, SchemeConfig, StencilOperator, assemble_stencil

GROWTH_TOL = 1.0e-9
EIG_RESIDUAL_TOL = 1.0e-12
N_KH_SCAN = 401
MAX_COND = 1.0e12


class EigenError(RuntimeError):
    def __init__(self, message: str, residual: float = math.nan):
        super().__init__(message)
        self.residual = residual


class SingularModesError(EigenError):
    def __init__(self, kh: float, cond: float):
        super().__init__(f"eigenvector matrix is singular at kh={kh:.6g} (cond={cond:.3g})")
        self.kh = kh
        self.cond = cond


def amplification_matrix(stencil: StencilOperator, kh) -> np.ndarray:
    """``A(kh) = sum_s K_s exp(i s kh)``; a scalar ``kh`` gives one matrix, an array a stack."""
    kh = np.asarray(kh, dtype=float)
    out = np.zeros(kh.shape + stencil.L.shape, dtype=complex)
    for s, K in stencil.blocks.items():
        if np.any(K):
            out += np.exp(1j * s * kh)[..., None, None] * K
    return out


@dataclass
class EigenSystem:
    lambdas: np.ndarray
    modes: np.ndarray  # columns are unit eigenvectors
    kh: float = math.nan
    weights: np.ndarray | None = None
    shares: np.ndarray | None = None

    def reorder(self, perm) -> "EigenSystem":
        perm = np.asarray(perm)
        return EigenSystem(
            self.lambdas[perm], self.modes[:, perm], self.kh,
            None if self.weights is None else self.weights[perm],
            None if self.shares is None else self.shares[perm],
        )


def eigen_decompose(A: np.ndarray, kh: float = math.nan) -> EigenSystem:
    """Dense complex eigen-decomposition with a residual check.

    Backed by LAPACK's shifted-QR ``geev``; eigenvectors come out unit-norm.
    """
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    try:
        lam, vec = np.linalg.eig(A)
    except np.linalg.LinAlgError as exc:
        raise EigenError(f"eigensolver did not converge at kh={kh:.6g}: {exc}") from exc
    vec = vec / np.linalg.norm(vec, axis=0)
    scale = max(1.0, np.linalg.norm(A, ord=2))
    residual = np.linalg.norm(A @ vec - vec * lam, axis=0).max() / scale
    if residual > EIG_RESIDUAL_TOL:
        raise EigenError(f"eigen residual {residual:.3g} exceeds tolerance at kh={kh:.6g}", residual)
    order = np.argsort(-lam.real, kind="stable")
    return EigenSystem(lam[order], vec[:, order], kh)


def mode_weights(eig: EigenSystem, mu_hat: np.ndarray) -> EigenSystem:
    """Expansion weights ``theta`` with ``modes @ theta = mu_hat`` and energy shares."""
    cond = np.linalg.cond(eig.modes)
    if not np.isfinite(cond) or cond > MAX_COND:
        raise SingularModesError(eig.kh, cond)
    theta = np.linalg.solve(eig.modes, mu_hat)
    w2 = np.abs(theta) ** 2
    return EigenSystem(eig.lambdas, eig.modes, eig.kh, theta, w2 / w2.sum())


def _match(prev: EigenSystem, new: EigenSystem) -> EigenSystem:
    overlap = np.abs(prev.modes.conj().T @ new.modes)
    _, cols = linear_sum_assignment(-overlap)
    return new.reorder(cols)


def track_modes(stencil: StencilOperator, kh_values) -> list[EigenSystem]:
    """Eigen-decompose along an increasing ``kh`` grid with continuity-tracked labels.

    Index 0 of every returned system is the physical mode: at the first sample
    it is the eigenvalue nearest ``-(kh)^2``; afterwards modes follow maximal
    eigenvector overlap with the previous sample.
    """
    kh_values = np.asarray(kh_values, dtype=float)
    if np.any(np.diff(kh_values) <= 0):
        raise ValueError("kh samples must be strictly increasing for mode tracking")
    out: list[EigenSystem] = []
    for kh in kh_values:
        eig = eigen_decompose(amplification_matrix(stencil, kh), kh)
        if not out:
            first = int(np.argmin(np.abs(eig.lambdas + kh**2)))
            perm = [first] + [j for j in range(eig.lambdas.size) if j != first]
            eig = eig.reorder(perm)
        else:
            eig = _match(out[-1], eig)
        out.append(eig)
    return out


def _tracking_grid(kh: float, step: float = math.pi / 200) -> np.ndarray:
    n = max(2, int(math.ceil(kh / step)) + 1)
    return np.linspace(0.0, kh, n)


def _tracked_at(stencil: StencilOperator, kh: np.ndarray) -> list[EigenSystem]:
    """Tracked systems at each ``kh``, sweeping from 0 on a grid refined to at most pi/200."""
    if np.any(np.diff(kh) <= 0) or kh[0] < 0:
        raise ValueError("wavenumber grid must be non-negative and strictly increasing")
    fine = _tracking_grid(float(kh[-1])) if kh[-1] > 0 else np.zeros(1)
    sweep = np.union1d(fine, kh)
    systems = track_modes(stencil, sweep)
    idx = np.searchsorted(sweep, kh)
    return [systems[i] for i in idx]


def physical_eigensystem(stencil: StencilOperator, kh: float) -> EigenSystem:
    """Eigen-system at ``kh`` with index 0 the tracked physical mode."""
    if kh == 0.0:
        return track_modes(stencil, [0.0])[0]
    return track_modes(stencil, _tracking_grid(kh))[-1]


@lru_cache(maxsize=16)
def _energy_rule(p: int):
    rule = gauss_legendre(p + 2)
    return rule.weights, legendre_vandermonde(p, rule.nodes)


def modal_energy(coeffs: np.ndarray) -> np.ndarray:
    """Average amplitude ``sqrt((1/2) int |sum_l c_l phi_l|^2 dxi)`` over the last axis."""
    coeffs = np.asarray(coeffs)
    w, phi = _energy_rule(coeffs.shape[-1] - 1)
    u = coeffs @ phi.T
    return np.sqrt(0.5 * np.abs(u) ** 2 @ w)


def _combined(eig: EigenSystem, factors: np.ndarray) -> np.ndarray:
    return eig.modes @ (eig.weights * factors)


def combined_mode_G(config: SchemeConfig, kh: float, tau_p: float,
                    stencil: StencilOperator | None = None) -> tuple[float, float, float]:
    """Semi-discrete combined-mode ``(G_true, G_phys, |dG|)`` at one wavenumber."""
    if tau_p < 0:
        raise ValueError(f"tau_p must be non-negative, got {tau_p}")
    stencil = stencil or assemble_stencil(config)
    p = config.p
    eig = physical_eigensystem(stencil, kh)
    mu_hat = fourier_projection(kh, p)
    eig = mode_weights(eig, mu_hat)
    tau = tau_p / (p + 1) ** 2
    c = _combined(eig, np.exp(eig.lambdas * tau))
    e0 = modal_energy(mu_hat)
    g_true = float(modal_energy(c) / e0)
    g_phys = float(np.exp(eig.lambdas[0].real * tau))
    g_exact = math.exp(-(kh**2) * tau)
    return g_true, g_phys, abs(g_exact - g_true)


@dataclass
class DiffusionProfile:
    tau_p: float
    K: np.ndarray
    G_true: np.ndarray
    G_phys: np.ndarray
    G_exact: np.ndarray
    dG: np.ndarray

    @property
    def samples(self):
        return list(zip(self.K, self.G_true, self.G_phys, self.G_exact, self.dG))


@dataclass
class ModeTable:
    """Per-wavenumber eigen data: ``lambdas[i, j]`` and ``shares[i, j]`` for mode ``j``."""

    K: np.ndarray
    lambdas: np.ndarray
    shares: np.ndarray


def analyze(config: SchemeConfig, K_grid, tau_p_list) -> tuple[list[DiffusionProfile], ModeTable]:
    """Diffusion profiles over a normalized wavenumber grid for each ``tau_p``.

    One tracked sweep serves all times; ``K_grid`` must be increasing.
    """
    K_grid = np.asarray(K_grid, dtype=float)
    p = config.p
    stencil = assemble_stencil(config)
    kh = K_grid * (p + 1)
    systems = _tracked_at(stencil, kh)
    mus = [fourier_projection(k, p) for k in kh]
    systems = [mode_weights(e, m) for e, m in zip(systems, mus)]
    e0 = np.array([modal_energy(m) for m in mus])
    profiles = []
    for tau_p in tau_p_list:
        tau = tau_p / (p + 1) ** 2
        g_true = np.array([modal_energy(_combined(e, np.exp(e.lambdas * tau)))
                           for e, m in zip(systems, mus)]) / e0
        g_phys = np.array([np.exp(e.lambdas[0].real * tau) for e in systems])
        g_exact = np.exp(-(K_grid**2) * tau_p)
        profiles.append(DiffusionProfile(float(tau_p), K_grid, g_true, g_phys, g_exact,
                                         np.abs(g_exact - g_true)))
    table = ModeTable(K_grid, np.array([e.lambdas for e in systems]),
                      np.array([e.shares for e in systems]))
    return profiles, table


def scan_kh(p: int, n: int = N_KH_SCAN) -> np.ndarray:
    """Wavenumber samples for stability scans.

    ``A(kh)`` is 2pi-periodic and ``A(-kh) = conj(A(kh))``, so ``[0, pi]``
    carries the whole spectrum of ``[0, (p+1) pi]``.
    """
    return np.linspace(0.0, math.pi, n)


def spectrum_on_grid(stencil: StencilOperator, kh) -> np.ndarray:
    """Eigenvalues of ``A`` at each ``kh``; shape ``(len(kh), p + 1)``."""
    return np.linalg.eigvals(amplification_matrix(stencil, kh))


def max_growth(config: SchemeConfig, n_kh: int = N_KH_SCAN) -> float:
    """Largest real part of any eigenvalue over the scan grid."""
    lam = spectrum_on_grid(assemble_stencil(config), scan_kh(config.p, n_kh))
    return float(lam.real.max())


def default_eta_grid(formulation, p: int) -> np.ndarray:
    """Search grid for the penalty bound: steps of 0.01 for BR2/BR1, integers for LDG."""
    formulation = Formulation.parse(formulation)
    if formulation is Formulation.LDG:
        return np.arange(-(4 * p + 4), 2, dtype=float)
    lo = 0.0 if formulation is Formulation.SIPG_BR2 else -1.0
    return np.round(np.arange(lo, 3.0 + 1e-9, 0.01), 2)


def min_eta_scan(formulation, p: int, eta_grid, n_kh: int = N_KH_SCAN) -> float:
    """Smallest ``eta`` on ``eta_grid`` with no growing semi-discrete mode, NaN if none."""
    eta_grid = np.asarray(eta_grid, dtype=float)
    d = np.diff(eta_grid)
    if not (np.all(d > 0) or np.all(d < 0)):
        raise ValueError("eta_grid must be strictly monotone")
    formulation = Formulation.parse(formulation)
    for eta in np.sort(eta_grid):
        cfg = SchemeConfig(formulation, p, float(eta))
        if max_growth(cfg, n_kh) <= GROWTH_TOL:
            return float(eta)
    return math.nan


@dataclass(frozen=True)
class RKScheme:
    """Linear stability polynomial ``P(z) = sum_{m<=s} z^m / m!`` of an s-stage explicit RK."""

    s: int

    def __post_init__(self):
        if self.s not in (2, 3, 4):
            raise ValueError(f"RK stage count must be 2, 3 or 4, got {self.s}")

    @classmethod
    def parse(cls, tag) -> "RKScheme":
        if isinstance(tag, cls):
            return tag
        if isinstance(tag, int):
            return cls(tag)
        key = str(tag).strip().upper().replace("SSP-", "").replace("SSP", "")
        if key.startswith("RK") and key[2:].isdigit():
            return cls(int(key[2:]))
        raise ValueError(f"unknown RK scheme {tag!r}; expected RK2, RK3 or RK4")

    @property
    def name(self) -> str:
        return f"RK{self.s}"

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([1.0 / math.factorial(m) for m in range(self.s + 1)])

    def __call__(self, z):
        # Horner
        c = self.coefficients
        out = np.full_like(np.asarray(z, dtype=complex), c[-1])
        for a in c[-2::-1]:
            out = out * z + a
        return out

    def real_axis_limit(self, tol: float = 1e-14) -> float:
        """Largest ``x`` with ``|P(-y)| <= 1`` for all ``0 <= y <= x``."""
        lo, hi = 0.0, 1.0
        while abs(self(-hi)) <= 1.0:
            lo, hi = hi, 2.0 * hi
        while hi - lo > tol * hi:
            mid = 0.5 * (lo + hi)
            if abs(self(-mid)) <= 1.0:
                lo = mid
            else:
                hi = mid
        return lo


def rk_amplification(A: np.ndarray, dtau: float, rk: RKScheme) -> np.ndarray:
    """``G = P(dtau A)`` by the Horner matrix recurrence."""
    if not dtau > 0:
        raise ValueError(f"dtau must be positive, got {dtau}")
    A = np.asarray(A, dtype=complex)
    Z = dtau * A
    eye = np.eye(A.shape[-1])
    c = rk.coefficients
    G = c[-1] * np.broadcast_to(eye, A.shape).astype(complex)
    for a in c[-2::-1]:
        G = Z @ G + a * eye
    return G


def fully_discrete_Km(lambda_G, dtau_p: float) -> tuple[float, str]:
    """Numerical wavenumber ``K_m^2 = -ln|lambda_G| / dtau_p`` and a mode status.

    Status is ``"decaying"``, ``"neutral"``, ``"growing"`` (``|lambda_G| > 1``,
    so ``-K_m^2 > 0``) or ``"oscillating"`` for a real negative ``lambda_G``
    inside the unit disc.
    """
    if not dtau_p > 0:
        raise ValueError(f"dtau_p must be positive, got {dtau_p}")
    lam = complex(lambda_G)
    if lam == 0:
        raise ValueError("lambda_G = 0: logarithm undefined (over-damped step)")
    mag = abs(lam)
    km2 = -math.log(mag) / dtau_p
    if mag > 1.0 + GROWTH_TOL:
        status = "growing"
    elif lam.real < 0:
        status = "oscillating"
    elif abs(mag - 1.0) <= GROWTH_TOL:
        status = "neutral"
    else:
        status = "decaying"
    return km2, status


def max_dtau_scan(config: SchemeConfig, rk: RKScheme, n_kh: int = N_KH_SCAN,
                  rel_tol: float = 1e-6) -> float:
    """Largest ``dtau = gamma dt / h^2`` with every fully-discrete mode non-growing (bisection)."""
    rk = RKScheme.parse(rk)
    lam = spectrum_on_grid(assemble_stencil(config), scan_kh(config.p, n_kh)).ravel()
    if lam.real.max() > GROWTH_TOL:
        raise ValueError(f"{config.label} is semi-discretely unstable; no stable time step")

    def stable(dtau):
        return np.abs(rk(dtau * lam)).max() <= 1.0 + GROWTH_TOL

    lo, hi = 0.0, 1.0
    while stable(hi):
        lo, hi = hi, 2.0 * hi
        if hi > 1e8:
            return math.inf
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo


def fully_discrete_G(config: SchemeConfig, rk: RKScheme, dtau: float, n_steps: int, kh: float,
                     stencil: StencilOperator | None = None) -> tuple[float, float]:
    """Combined-mode ``(G_true, G_phys)`` after ``n_steps`` RK steps of size ``dtau``."""
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")
    rk = RKScheme.parse(rk)
    stencil = stencil or assemble_stencil(config)
    eig = physical_eigensystem(stencil, kh)
    mu_hat = fourier_projection(kh, config.p)
    eig = mode_weights(eig, mu_hat)
    lam_g = rk(dtau * eig.lambdas)
    c = _combined(eig, lam_g**n_steps)
    g_true = float(modal_energy(c) / modal_energy(mu_hat))
    g_phys = float(abs(lam_g[0]) ** n_steps)
    return g_true, g_phys


def fully_discrete_profile(config: SchemeConfig, rk: RKScheme, dtau: float, tau_p: float,
                           K_grid) -> DiffusionProfile:
    """Fully-discrete combined-mode profile at the step count nearest ``tau_p``."""
    rk = RKScheme.parse(rk)
    p = config.p
    dtau_p = (p + 1) ** 2 * dtau
    n = int(round(tau_p / dtau_p))
    K_grid = np.asarray(K_grid, dtype=float)
    stencil = assemble_stencil(config)
    kh = K_grid * (p + 1)
    systems = _tracked_at(stencil, kh)
    g_true, g_phys = [], []
    for e, k in zip(systems, kh):
        mu = fourier_projection(k, p)
        e = mode_weights(e, mu)
        lam_g = rk(dtau * e.lambdas)
        g_true.append(modal_energy(_combined(e, lam_g**n)) / modal_energy(mu))
        g_phys.append(abs(lam_g[0]) ** n)
    tau_n = n * dtau_p
    g_exact = np.exp(-(K_grid**2) * tau_n)
    g_true = np.array(g_true, dtype=float)
    return DiffusionProfile(tau_n, K_grid, g_true, np.array(g_phys), g_exact,
                            np.abs(g_exact - g_true))
