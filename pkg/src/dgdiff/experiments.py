"""Numerical experiments: single Fourier mode, Gaussian wave, decaying Burgers turbulence."""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import special

from .basis import fourier_projection
from .fourier import combined_mode_G
from .schemes import SchemeConfig, assemble_stencil
from .solver import (
    BlowUpError,
    DGField,
    GridSpec,
    burgers_rhs_array,
    field_energy,
    get_tableau,
    heat_rhs_array,
    integrate,
    l2_project,
    sample_continuous,
    time_step,
)

logger = logging.getLogger(__name__)

THREADS_ENV = "DGDIFF_THREADS"


def default_workers() -> int:
    """Worker count from ``DGDIFF_THREADS``, else the available CPUs."""
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"{THREADS_ENV} must be a positive integer, got {env!r}")
        return n
    try:
        return len(os.sched_getaffinity(0))
    except AttributeError:  # pragma: no cover - non-Linux
        return os.cpu_count() or 1


def tau_p_to_time(tau_p: float, h: float, p: int, gamma: float) -> float:
    return tau_p * h * h / ((p + 1) ** 2 * gamma)


def time_to_tau_p(t: float, h: float, p: int, gamma: float) -> float:
    return (p + 1) ** 2 * gamma * t / (h * h)


# ---------------------------------------------------------------------------
# spectra


@dataclass
class Spectrum:
    """One-sided energies ``E(k)`` on integer ring modes; leading axes index samples."""

    k: np.ndarray
    E: np.ndarray

    def __post_init__(self):
        self.k = np.asarray(self.k)
        self.E = np.asarray(self.E)

    @property
    def total(self) -> np.ndarray:
        return self.E.sum(axis=-1)

    def at(self, k: int) -> np.ndarray:
        return self.E[..., int(k)]


def discrete_spectrum(samples) -> Spectrum:
    """FFT energies normalized so that ``sum_k E(k)`` is the mean square of the samples.

    ``E(0) = |u_0|^2``, ``E(k) = 2 |u_k|^2`` for ``0 < k < n/2`` and, for even
    ``n``, ``E(n/2) = |u_{n/2}|^2`` with ``u_k`` the DFT divided by ``n``.
    """
    u = np.asarray(samples, dtype=float)
    n = u.shape[-1]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    uh = np.fft.rfft(u, axis=-1) / n
    E = np.abs(uh) ** 2
    E[..., 1:] *= 2.0
    if n % 2 == 0:
        E[..., -1] *= 0.5
    return Spectrum(np.arange(E.shape[-1]), E)


def field_spectrum(field: DGField, q: int = 10) -> Spectrum:
    _, u = sample_continuous(field, q)
    return discrete_spectrum(u)


def dg_spectrum(field: DGField, n_modes: int) -> Spectrum:
    """One-sided energies of the exact Fourier coefficients of the DG polynomial.

    ``u_m = (1/L) int u exp(-i k_m x) dx`` is integrated element by element in
    closed form, so unlike the sampled path the ``m = 0`` entry is the exact
    domain mean.  Energies use the same one-sided convention as
    :func:`discrete_spectrum` (no Nyquist halving).
    """
    grid = field.grid
    p = field.p
    m = np.arange(n_modes + 1)
    kh = 2 * math.pi * m / grid.n_elements
    # int phi_l exp(-i kh xi / 2) dxi / 2 = conj(mu_l(kh)) / (2l + 1)
    w = np.array([np.conj(fourier_projection(k, p)) for k in kh]) / (2 * np.arange(p + 1) + 1)
    phase = np.exp(-1j * np.outer(kh, np.arange(grid.n_elements) + 0.5))  # (modes, ne)
    uh = np.einsum("me,...el,ml->...m", phase, field.coeffs, w) / grid.n_elements
    E = np.abs(uh) ** 2
    E[..., 1:] *= 2.0
    return Spectrum(m, E)


# ---------------------------------------------------------------------------
# single Fourier mode


@dataclass(frozen=True)
class FourierModeResult:
    E_cos: float
    E_sin: float
    E_tot: float
    G_num: float
    dG_num: float
    E_init: float
    G_exact: float
    tau_p: float
    history: tuple = ()  # (t, E_tot) pairs when requested
    final: DGField | None = field(default=None, compare=False, repr=False)  # cos, sin stacked

    def __iter__(self):
        return iter((self.E_cos, self.E_sin, self.E_tot, self.G_num, self.dG_num))


def ring_mode(K_target: float, N_e: int, p: int, L: float, tol: float = 1e-9) -> int:
    """Integer number of periods on ``[0, L]`` for ``k = K N_e (p+1) / L``; error if not integral."""
    k = K_target * N_e * (p + 1) / L
    m = k * L / (2 * math.pi)
    if abs(m - round(m)) > tol * max(1.0, abs(m)) or round(m) < 0:
        raise ValueError(f"K={K_target} with N_e={N_e}, p={p} gives k={k:.6g}, "
                         f"which is not a periodic mode on a domain of length {L}")
    return int(round(m))


def fourier_mode_experiment(config: SchemeConfig, K_target: float, N_e: int, dt: float,
                            t_end: float | None = None, *, tau_p: float | None = None,
                            rk="RK3", L: float = 1.0, history_every: int = 0,
                            history: list | None = None) -> FourierModeResult:
    """Decay of a single sine and cosine wave under the heat equation.

    Give either ``t_end`` or ``tau_p``.  The combined amplitude
    ``sqrt(E_cos^2 + E_sin^2)`` is compared with ``exp(-K^2 tau_p)``.
    With ``history_every`` the pairs ``(t, E_tot)`` are appended to
    ``history`` as the run goes, so a caller keeps them if the run blows up.
    """
    p, gamma = config.p, config.gamma
    m = ring_mode(K_target, N_e, p, L)
    k = 2 * math.pi * m / L
    grid = GridSpec(0.0, L, N_e)
    if (t_end is None) == (tau_p is None):
        raise ValueError("give exactly one of t_end or tau_p")
    if t_end is None:
        t_end = tau_p_to_time(tau_p, grid.h, p, gamma)
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    op = assemble_stencil(config)
    tableau = get_tableau(rk)
    h = grid.h

    # both waves share one batched run
    u0 = np.stack([l2_project(lambda x: np.cos(k * x), grid, p).coeffs,
                   l2_project(lambda x: np.sin(k * x), grid, p).coeffs])
    start = DGField(u0, grid)
    e_start = field_energy(start)
    hist = [] if history is None else history
    if history_every:
        hist.append((0.0, float(math.hypot(*e_start))))

    def record(step, f):
        if step % history_every == 0 or abs(f.time - t_end) <= 1e-12 * max(1.0, t_end):
            e = field_energy(f)
            hist.append((f.time, float(math.hypot(*e))))

    end = integrate(start, lambda u: heat_rhs_array(u, op, gamma, h), tableau, dt, t_end,
                    callback=record if history_every else None)
    e_cos, e_sin = (float(v) for v in field_energy(end))
    e_init = float(math.hypot(*e_start))
    e_tot = math.hypot(e_cos, e_sin)
    tp = time_to_tau_p(end.time, h, p, gamma)
    g_ex = math.exp(-K_target**2 * tp)
    g_num = e_tot / e_init
    return FourierModeResult(e_cos, e_sin, e_tot, g_num, abs(g_num - g_ex), e_init, g_ex, tp,
                             tuple(hist), end)


# ---------------------------------------------------------------------------
# complex error function


def complex_erf(z) -> complex:
    """Error function of a finite complex argument (scipy's Faddeeva-based ``erf``)."""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"erf argument must be finite, got {z}")
    return complex(special.erf(z))


# ---------------------------------------------------------------------------
# Gaussian wave


SERIES_TAIL_TOL = 1.0e-14
_EXP_TAIL = 1.0e-16


@dataclass(frozen=True)
class GaussianCase:
    """Heat equation on ``[-L, L]`` from ``u(x, 0) = exp(-b x^2)``."""

    b: float = 1.5e4
    L: float = 1.0
    gamma: float = 0.01
    M_terms: int | None = None

    def __post_init__(self):
        if not self.b > 0:
            raise ValueError(f"b must be positive, got {self.b}")
        if not self.L > 0:
            raise ValueError(f"L must be positive, got {self.L}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.M_terms is None:
            # smallest M with exp(-(M pi / L)^2 / (4 b)) < 1e-16
            m = math.ceil(2 * self.c * math.sqrt(math.log(1 / _EXP_TAIL)) / math.pi)
            object.__setattr__(self, "M_terms", m)
        elif self.M_terms < 1:
            raise ValueError(f"M_terms must be >= 1, got {self.M_terms}")

    @property
    def c(self) -> float:
        return self.L * math.sqrt(self.b)

    @property
    def a0(self) -> float:
        return math.sqrt(math.pi) / (2 * self.c)

    def z(self, m) -> complex:
        return complex(self.c, m * math.pi / (2 * self.c))

    def coefficient(self, m: int) -> float:
        """Cosine coefficient ``a_m`` of ``exp(-b x^2)`` on the period ``2L``."""
        if m == 0:
            return self.a0
        decay = math.exp(-((m * math.pi / (2 * self.c)) ** 2))
        return math.sqrt(math.pi) / self.c * complex_erf(self.z(m)).real * decay

    def coefficients(self) -> np.ndarray:
        return np.array([self.coefficient(m) for m in range(self.M_terms + 1)])

    def initial(self, x):
        return np.exp(-self.b * np.asarray(x) ** 2)


def gaussian_exact(case: GaussianCase, x, t: float) -> np.ndarray:
    """Series solution ``a0 + sum_m a_m cos(m pi x / L) exp(-gamma (m pi / L)^2 t)``."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    a = _gaussian_coefficients(case)
    tail = abs(a[-1])
    if tail >= SERIES_TAIL_TOL:
        raise ValueError(f"series tail |a_M| = {tail:.3g} with M_terms={case.M_terms} is above "
                         f"{SERIES_TAIL_TOL:g}; increase M_terms")
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) > case.L * (1 + 1e-12)):
        raise ValueError(f"x must lie in [-{case.L}, {case.L}]")
    m = np.arange(1, a.size)
    km = m * math.pi / case.L
    amp = a[1:] * np.exp(-case.gamma * km**2 * t)
    return a[0] + np.cos(x[..., None] * km) @ amp


def _gaussian_coefficients(case: GaussianCase) -> np.ndarray:
    return _cached_coefficients(case.b, case.L, case.M_terms)


@lru_cache(maxsize=8)
def _cached_coefficients(b: float, L: float, M: int) -> np.ndarray:
    a = GaussianCase(b, L, 1.0, M).coefficients()
    a.setflags(write=False)
    return a


@dataclass
class GaussianResult:
    """Per-mode diffusion factors; ``K = 2 pi m / (N_e (p+1))`` for ring mode ``m``."""

    K: np.ndarray
    modes: np.ndarray
    E0: np.ndarray  # spectrum of the projected initial field
    E0_exact: np.ndarray  # spectrum of the exact Gaussian sampled on the same points
    tau_p: np.ndarray
    G_num: np.ndarray  # (len(tau_p), len(K))
    G_exact: np.ndarray
    energy: np.ndarray  # domain RMS at each tau_p
    final: DGField | None = field(default=None, repr=False)


def gaussian_experiment(case: GaussianCase, scheme: SchemeConfig, rk="RK3", dtau: float = 0.0025,
                        tau_p_list=(0.01, 0.5), *, N_e: int = 50, q: int = 10,
                        transform: str = "sampled", history: list | None = None) -> GaussianResult:
    """Run the projected Gaussian to each ``tau_p`` and report FFT-based ``G(K)``.

    ``G(K)`` is the amplitude ratio ``sqrt(E(K; tau_p) / E(K; 0))``, the
    quantity that decays as ``exp(-K^2 tau_p)`` for the exact solution.
    ``transform="sampled"`` takes the FFT of interface-averaged uniform samples;
    ``"exact"`` integrates the Fourier coefficients of the DG polynomial.
    ``(tau_p, E_num)`` pairs are appended to ``history`` as they are reached.
    """
    p = scheme.p
    if transform not in ("sampled", "exact"):
        raise ValueError(f"transform must be 'sampled' or 'exact', got {transform!r}")
    if q <= p + 1:
        raise ValueError(f"need more than p+1={p + 1} samples per element, got q={q}")
    grid = GridSpec(-case.L, case.L, N_e)
    h = grid.h
    gamma = case.gamma
    op = assemble_stencil(scheme)
    tableau = get_tableau(rk)
    dt = time_step(grid, gamma, dtau=dtau)
    f = l2_project(case.initial, grid, p, nq=max(4 * (p + 1), 24))
    if history is not None:
        history.append((0.0, float(field_energy(f))))
    n_modes = N_e * (p + 1) // 2
    modes = np.arange(n_modes + 1)
    K = 2 * math.pi * modes / (N_e * (p + 1))

    def spectrum(g):
        if transform == "exact":
            return dg_spectrum(g, n_modes).E
        return field_spectrum(g, q).E[: n_modes + 1]

    x, _ = sample_continuous(f, q)
    E0_exact = discrete_spectrum(case.initial(x)).E[: n_modes + 1]
    E0 = spectrum(f)

    taus = np.asarray(sorted(tau_p_list), dtype=float)
    G = np.empty((taus.size, modes.size))
    energy = np.empty(taus.size)
    rhs = lambda u: heat_rhs_array(u, op, gamma, h)  # noqa: E731
    for i, tp in enumerate(taus):
        f = integrate(f, rhs, tableau, dt, tau_p_to_time(tp, h, p, gamma))
        E = spectrum(f)
        with np.errstate(divide="ignore", invalid="ignore"):
            G[i] = np.sqrt(E / E0)
        energy[i] = float(field_energy(f))
        if history is not None:
            history.append((float(tp), energy[i]))
    G_exact = np.exp(-np.outer(taus, K**2))
    return GaussianResult(K, modes, E0, E0_exact, taus, G, G_exact, energy, f)


def gaussian_analysis_G(scheme: SchemeConfig, K, tau_p: float) -> np.ndarray:
    """Combined-mode ``G_true`` on the same K points, for comparison with the experiment."""
    op = assemble_stencil(scheme)
    return np.array([combined_mode_G(scheme, float(k) * (scheme.p + 1), tau_p, op)[0]
                     for k in np.asarray(K)])


# ---------------------------------------------------------------------------
# Burgers turbulence

SPECTRUM_FORMS = ("alternative", "printed")


@dataclass(frozen=True)
class TurbulenceCase:
    rho: float = 10.0
    amp: float = 2.0 / (3.0 * math.sqrt(math.pi))
    k_max: int = 2048
    n_samples: int = 64
    seed: int = 0
    N_e: int = 50
    p: int = 2
    gamma: float = 0.015
    spectrum: str = "alternative"

    def __post_init__(self):
        if not self.amp > 0:
            raise ValueError(f"amp must be positive, got {self.amp}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.k_max < 1:
            raise ValueError(f"k_max must be >= 1, got {self.k_max}")
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be >= 1, got {self.n_samples}")
        if self.spectrum not in SPECTRUM_FORMS:
            raise ValueError(f"spectrum must be one of {SPECTRUM_FORMS}, got {self.spectrum!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def grid(self) -> GridSpec:
        return GridSpec(0.0, 2 * math.pi, self.N_e)

    def E0(self, k) -> np.ndarray:
        """Initial spectrum: ``A k^4 rho^5 exp(-k^2 rho^2)`` (printed) or the
        ``rho -> 1/rho`` form ``A k^4 rho^-5 exp(-k^2 / rho^2)`` (alternative)."""
        k = np.asarray(k, dtype=float)
        r = self.rho if self.spectrum == "printed" else 1.0 / self.rho
        return self.amp * k**4 * r**5 * np.exp(-(k * k) * r * r)

    def peak_wavenumber(self) -> float:
        """Continuous maximiser of ``E0``: ``sqrt(2)/rho`` or ``sqrt(2) rho``."""
        return math.sqrt(2) / self.rho if self.spectrum == "printed" else math.sqrt(2) * self.rho


def phases(case: TurbulenceCase, sample_index: int) -> np.ndarray:
    """``Phi(k)`` for ``k = 0..k_max``.

    Each sample owns a Philox stream keyed by ``SeedSequence([seed, sample_index])``;
    ``Phi(k)`` is the ``k``-th uniform double of that stream, so a phase depends
    only on ``(seed, sample_index, k)``.
    """
    if sample_index < 0:
        raise ValueError(f"sample_index must be non-negative, got {sample_index}")
    ss = np.random.SeedSequence([int(case.seed), int(sample_index)])
    gen = np.random.Generator(np.random.Philox(ss))
    return gen.random(case.k_max + 1)


def burgers_raw_field(case: TurbulenceCase, sample_index: int, cutoff: float = 1e-18):
    """Callable ``v(x) = sum_k sqrt(2 E0(k)) cos(k x + 2 pi Phi(k))``.

    Modes with amplitude below ``cutoff`` times the largest are dropped; they
    are below double-precision resolution of the sum.
    """
    k = np.arange(case.k_max + 1)
    amp = np.sqrt(2.0 * case.E0(k))
    phi = phases(case, sample_index)
    keep = amp > cutoff * amp.max() if amp.max() > 0 else np.zeros_like(amp, bool)
    kk, aa, pp = k[keep], amp[keep], 2 * math.pi * phi[keep]

    def v(x):
        x = np.asarray(x, dtype=float)
        return np.cos(x[..., None] * kk + pp) @ aa

    return v


def burgers_init_field(case: TurbulenceCase, sample_index: int) -> DGField:
    """Random-phase initial velocity projected onto the DG space."""
    v = burgers_raw_field(case, sample_index)
    return l2_project(v, case.grid, case.p, nq=max(4 * (case.p + 1), 12))


@dataclass
class EnsembleSpectrum:
    k: np.ndarray
    E_mean: np.ndarray
    E_std: np.ndarray
    n_valid_samples: int

    def rows(self):
        n = np.full(self.k.shape, self.n_valid_samples)
        return np.column_stack([self.k, self.E_mean, self.E_std, n])


@dataclass
class BurgersResult:
    spectrum: EnsembleSpectrum
    initial_spectrum: EnsembleSpectrum
    times: np.ndarray
    urms: np.ndarray  # (n_samples, len(times)); NaN for flagged samples
    h: float
    gamma: float
    sample_indices: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)  # sample index -> message

    @property
    def failed(self) -> list:
        return sorted(self.failures)

    @property
    def valid(self) -> np.ndarray:
        return np.array([i not in self.failures for i in self.sample_indices], dtype=bool)

    @property
    def pe(self) -> np.ndarray:
        """Per-sample ``Pe = u_rms h / gamma``."""
        return self.urms * self.h / self.gamma

    @property
    def pe_mean(self) -> np.ndarray:
        return _mean_valid(self.pe, self.valid, self.times.size)

    @property
    def pe_mean_square(self) -> np.ndarray:
        """Ensemble mean of ``u_rms^2 h / gamma``, the squared-amplitude variant."""
        return _mean_valid(self.urms**2 * self.h / self.gamma, self.valid, self.times.size)

    @property
    def flagged(self) -> bool:
        return bool(self.failures)


def _mean_valid(a, valid, n):
    if not valid.any():
        return np.full(n, np.nan)
    return np.add.reduce(a[valid], axis=0) / int(valid.sum())


def _reduce(E: np.ndarray, valid: np.ndarray, n_modes: int) -> EnsembleSpectrum:
    E = E[valid][:, : n_modes + 1]
    n = int(valid.sum())
    k = np.arange(n_modes + 1)
    if n == 0:
        nan = np.full(k.shape, np.nan)
        return EnsembleSpectrum(k, nan, nan, 0)
    # fixed order reduction over samples
    mean = np.add.reduce(E, axis=0) / n
    std = np.sqrt(np.add.reduce((E - mean) ** 2, axis=0) / n)
    return EnsembleSpectrum(k, mean, std, n)


def burgers_ensemble(case: TurbulenceCase, scheme: SchemeConfig, rk="RK3", dtau: float | None = None,
                     t_end: float = 0.5, *, dt: float | None = None, q: int = 10,
                     pe_every: int = 100, chunk: int = 8, workers: int | None = None,
                     sample_indices=None) -> BurgersResult:
    """Ensemble of Burgers runs with the viscous term discretized by ``scheme``.

    Samples run in batches; a batch that blows up is rerun sample by sample
    so only the offending samples are flagged and excluded from averages.
    """
    if scheme.p != case.p:
        scheme = replace(scheme, p=case.p)
    grid = case.grid
    h, gamma = grid.h, case.gamma
    if dt is None and dtau is None:
        dt = 1e-4
    dt = time_step(grid, gamma, dt=dt, dtau=dtau)
    op = assemble_stencil(scheme)
    tableau = get_tableau(rk)
    idx = list(range(case.n_samples)) if sample_indices is None else list(sample_indices)
    n_modes = grid.n_elements * (case.p + 1) // 2
    if t_end < 0:
        raise ValueError(f"t_end must be non-negative, got {t_end}")
    n_full = int(math.floor(t_end / dt * (1 + 1e-12)))
    rec_steps = list(range(0, n_full + 1, pe_every))
    times = [s * dt for s in rec_steps]
    if t_end - times[-1] > 1e-12 * dt:
        times.append(t_end)
    times = np.array(times)

    def rhs(u):
        return burgers_rhs_array(u, op, gamma, h)

    def run(batch):
        u0 = np.stack([burgers_init_field(case, i).coeffs for i in batch])
        f0 = DGField(u0, grid)
        E_init = field_spectrum(f0, q).E
        urms = np.full((len(batch), times.size), np.nan)
        urms[:, 0] = field_energy(f0)
        slot = {s: j for j, s in enumerate(rec_steps) if j}

        def record(step, f):
            if abs(f.time - t_end) <= 1e-12 * max(1.0, t_end):
                j = times.size - 1
            else:
                j = slot.get(step)
            if j is not None:
                urms[:, j] = field_energy(f)

        f = integrate(f0, rhs, tableau, dt, t_end, callback=record)
        return E_init, field_spectrum(f, q).E, urms

    def run_safe(batch):
        try:
            return run(batch), {}
        except BlowUpError as exc:
            if len(batch) == 1:
                return None, {batch[0]: str(exc)}
            outs, errs = [], {}
            for i in batch:
                o, e = run_safe([i])
                outs.append((i, o))
                errs.update(e)
            return outs, errs

    batches = [idx[i:i + chunk] for i in range(0, len(idx), chunk)]
    workers = workers or default_workers()
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(batches)))) as pool:
        results = list(pool.map(run_safe, batches))

    n = len(idx)
    size = q * grid.n_elements // 2 + 1
    E0 = np.full((n, size), np.nan)
    E1 = np.full((n, size), np.nan)
    urms = np.full((n, times.size), np.nan)
    valid = np.zeros(n, bool)
    failures: dict = {}
    pos = {s: j for j, s in enumerate(idx)}
    for batch, (out, errs) in zip(batches, results):
        failures.update(errs)
        if out is None:
            continue
        if isinstance(out, tuple):
            parts = [(i, (out[0][j:j + 1], out[1][j:j + 1], out[2][j:j + 1]))
                     for j, i in enumerate(batch)]
        else:
            parts = [(i, o) for i, o in out if o is not None]
        for i, (a, b, c) in parts:
            j = pos[i]
            E0[j], E1[j], urms[j] = a[0], b[0], c[0]
            valid[j] = True
    for i, msg in failures.items():
        logger.warning("sample %d flagged: %s", i, msg)
    return BurgersResult(_reduce(E1, valid, n_modes), _reduce(E0, valid, n_modes), times, urms,
                         h, gamma, idx, failures)


def spectral_slope(k, E, k_lo: float, k_hi: float) -> float:
    """Least-squares slope of ``log E`` against ``log k`` on ``k_lo <= k <= k_hi``."""
    k = np.asarray(k, dtype=float)
    E = np.asarray(E, dtype=float)
    sel = (k >= k_lo) & (k <= k_hi) & (E > 0)
    if sel.sum() < 2:
        raise ValueError(f"fewer than two positive modes in [{k_lo}, {k_hi}]")
    slope, _ = np.polyfit(np.log(k[sel]), np.log(E[sel]), 1)
    return float(slope)
