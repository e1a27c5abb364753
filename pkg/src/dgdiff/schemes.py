"""Element-stencil operators of the primal DG form for 1D diffusion.

Every formulation reduces, on a uniform periodic grid, to

    dU^e/dt = (gamma / h^2) * sum_{s=-2..2} K_s U^{e+s}

with dimensionless ``(p+1) x (p+1)`` blocks ``K_s``.  Interface jumps use the
orientation ``[[u]]_f = u_left(f) - u_right(f)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .basis import ReferenceBasis, build_local_matrices


class Formulation(str, enum.Enum):
    SIPG_BR2 = "SIPG_BR2"
    BR1 = "BR1"
    LDG = "LDG"

    @classmethod
    def parse(cls, tag) -> "Formulation":
        if isinstance(tag, cls):
            return tag
        key = str(tag).strip().upper()
        aliases = {"BR2": cls.SIPG_BR2, "SIPG": cls.SIPG_BR2, "SIPG_BR2": cls.SIPG_BR2,
                   "BR1": cls.BR1, "LDG": cls.LDG}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown formulation {tag!r}; expected one of "
                             f"{[f.value for f in cls]}") from None


def penalty_constant(p: int) -> float:
    """C(p) = (p+1)^2 / 2."""
    return 0.5 * (p + 1) ** 2


def br1_cross_constant(p: int) -> float:
    """C1(p) = (-1)^(p+1) (p+1) / 4, weight of the next-nearest jumps in BR1."""
    return (-1) ** (p + 1) * (p + 1) / 4.0


def eta_min(formulation, p: int) -> float:
    """Closed-form semi-discrete stability bound on the penalty."""
    formulation = Formulation.parse(formulation)
    if formulation is Formulation.SIPG_BR2:
        return p / (p + 1)
    if formulation is Formulation.LDG:
        return -(2.0 * p + 1)
    return 0.0


SCHEME_KEYS = ("formulation", "p", "eta", "beta_switch", "gamma")


@dataclass(frozen=True)
class SchemeConfig:
    formulation: Formulation
    p: int
    eta: float
    beta_switch: str = "right"
    gamma: float = 1.0
    h: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "formulation", Formulation.parse(self.formulation))
        if int(self.p) != self.p or self.p < 1:
            raise ValueError(f"polynomial degree p must be an integer >= 1, got {self.p}")
        object.__setattr__(self, "p", int(self.p))
        if self.beta_switch not in ("right", "left"):
            raise ValueError(f"beta_switch must be 'right' or 'left', got {self.beta_switch!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not self.h > 0:
            raise ValueError(f"h must be positive, got {self.h}")

    @property
    def eta_min(self) -> float:
        return eta_min(self.formulation, self.p)

    @property
    def potentially_unstable(self) -> bool:
        """True when eta is below the semi-discrete stability minimum."""
        return self.eta < self.eta_min - 1e-12

    @property
    def label(self) -> str:
        name = "BR2" if self.formulation is Formulation.SIPG_BR2 else self.formulation.value
        return f"{name}p{self.p}-eta{self.eta:g}"

    def to_dict(self) -> dict:
        return {"formulation": self.formulation.value, "p": self.p, "eta": self.eta,
                "beta_switch": self.beta_switch, "gamma": self.gamma}

    @classmethod
    def from_dict(cls, d: dict, h: float = 1.0) -> "SchemeConfig":
        missing = [k for k in ("formulation", "p", "eta") if k not in d]
        if missing:
            raise KeyError(f"scheme config missing key(s): {', '.join(missing)}")
        return cls(formulation=d["formulation"], p=d["p"], eta=float(d["eta"]),
                   beta_switch=d.get("beta_switch", "right"),
                   gamma=float(d.get("gamma", 1.0)), h=h)


OFFSETS = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class StencilOperator:
    Kmm: np.ndarray
    Km: np.ndarray
    L: np.ndarray
    Kp: np.ndarray
    Kpp: np.ndarray
    config: SchemeConfig | None = field(default=None, compare=False)

    @property
    def p(self) -> int:
        return self.L.shape[0] - 1

    @property
    def blocks(self) -> dict[int, np.ndarray]:
        return {-2: self.Kmm, -1: self.Km, 0: self.L, 1: self.Kp, 2: self.Kpp}

    @property
    def compact(self) -> bool:
        return not (np.any(self.Kmm) or np.any(self.Kpp))

    @property
    def total(self) -> np.ndarray:
        return self.Kmm + self.Km + self.L + self.Kp + self.Kpp


class _Accumulator:
    """Collects ``outer(test_vector, functional)`` contributions per neighbour offset."""

    def __init__(self, p: int):
        self.p = p
        self.blocks = {s: np.zeros((p + 1, p + 1)) for s in OFFSETS}

    def add(self, test: np.ndarray, functional: dict, scale: float = 1.0):
        for s, row in functional.items():
            self.blocks[s] += scale * np.outer(test, row)

    def finish(self, config=None) -> StencilOperator:
        # divide on the left by the mass matrix M_ll = 1 / (2l + 1)
        inv_mass = 2.0 * np.arange(self.p + 1) + 1.0
        b = {s: inv_mass[:, None] * m for s, m in self.blocks.items()}
        for m in b.values():
            m.setflags(write=False)
        return StencilOperator(b[-2], b[-1], b[0], b[1], b[2], config)


def _jump(basis: ReferenceBasis, s: int) -> dict:
    """Functional for [[u]] at face e + 1/2 + s."""
    return {s: basis.right_values, s + 1: -basis.left_values}


def _grad_sum(basis: ReferenceBasis, s: int) -> dict:
    """Functional for h <du/dx> at face e + 1/2 + s (= sum of one-sided du/dxi)."""
    return {s: basis.right_derivs, s + 1: basis.left_derivs}


def _central_terms(acc: _Accumulator, basis: ReferenceBasis, penalty: float):
    """Terms shared by SIPG/BR2 and BR1: average gradient, jump penalty, stiffness, lift."""
    v1, vm, d1, dm = basis.right_values, basis.left_values, basis.right_derivs, basis.left_derivs
    acc.add(v1, _grad_sum(basis, 0))
    acc.add(vm, _grad_sum(basis, -1), -1.0)
    acc.add(v1, _jump(basis, 0), -penalty)
    acc.add(vm, _jump(basis, -1), penalty)
    acc.blocks[0] -= 2.0 * build_local_matrices(basis.p).S
    acc.add(d1, _jump(basis, 0))
    acc.add(dm, _jump(basis, -1))


def sipg_stencil(p: int, penalty: float, config=None) -> StencilOperator:
    """Symmetric interior penalty with dimensionless jump coefficient ``penalty = eta_f C h / hbar_f``."""
    basis = ReferenceBasis(p)
    acc = _Accumulator(p)
    _central_terms(acc, basis, penalty)
    return acc.finish(config)


def _br1(config: SchemeConfig) -> StencilOperator:
    p = config.p
    basis = ReferenceBasis(p)
    acc = _Accumulator(p)
    _central_terms(acc, basis, (1.0 + config.eta) * penalty_constant(p))
    c1 = br1_cross_constant(p)
    v1, vm = basis.right_values, basis.left_values
    acc.add(v1, _jump(basis, 1), c1)
    acc.add(v1, _jump(basis, -1), c1)
    acc.add(vm, _jump(basis, 0), -c1)
    acc.add(vm, _jump(basis, -2), -c1)
    return acc.finish(config)


def _ldg(config: SchemeConfig) -> StencilOperator:
    p = config.p
    basis = ReferenceBasis(p)
    acc = _Accumulator(p)
    v1, vm, d1, dm = basis.right_values, basis.left_values, basis.right_derivs, basis.left_derivs
    sigma = 2.0 * penalty_constant(p) + config.eta
    if config.beta_switch == "right":
        # gradient flux from the left element of each face, solution flux from the right
        acc.add(v1, {0: d1}, 2.0)
        acc.add(vm, {-1: d1}, -2.0)
        acc.add(d1, _jump(basis, 0), 2.0)
    else:
        acc.add(v1, {1: dm}, 2.0)
        acc.add(vm, {0: dm}, -2.0)
        acc.add(dm, _jump(basis, -1), 2.0)
    acc.add(v1, _jump(basis, 0), -sigma)
    acc.add(vm, _jump(basis, -1), sigma)
    acc.blocks[0] -= 2.0 * build_local_matrices(p).S
    return acc.finish(config)


def _legendre_fractions(p: int) -> list[list[Fraction]]:
    """Monomial coefficients of P_0..P_p in exact arithmetic (Bonnet recursion)."""
    polys = [[Fraction(1)], [Fraction(0), Fraction(1)]]
    for n in range(1, p):
        a = [Fraction(0)] + [Fraction(2 * n + 1, n + 1) * c for c in polys[n]]
        b = [Fraction(n, n + 1) * c for c in polys[n - 1]] + [Fraction(0)] * 2
        polys.append([x - y for x, y in zip(a, b)])
    return polys[: p + 1]


def _peval(c, x):
    return sum(ci * Fraction(x) ** i for i, ci in enumerate(c))


def _pderiv(c):
    return [i * ci for i, ci in enumerate(c)][1:] or [Fraction(0)]


def _pint(c):
    """Integral over [-1, 1]."""
    return sum(2 * ci / (i + 1) for i, ci in enumerate(c) if i % 2 == 0)


def _pmul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def br2_lift_stencil(p: int, eta: float, config=None) -> StencilOperator:
    """BR2 built from its local lift operators, in exact rational arithmetic.

    Each face lift ``r_f`` solves ``int r_f v = -(1/2) [[u]] v(face)`` on both
    neighbours, the flux is ``{du/dx} + eta {r_f}`` and the volume term uses
    the global lift with the central trace.  Only ``eta`` enters in floating
    point, so the result is independent of the closed-form SIPG assembly.
    """
    P = _legendre_fractions(p)
    dP = [_pderiv(c) for c in P]
    n = p + 1
    v1 = [_peval(c, 1) for c in P]
    vm = [_peval(c, -1) for c in P]
    d1 = [_peval(c, 1) for c in dP]
    dm = [_peval(c, -1) for c in dP]
    norm = [_pint(_pmul(c, c)) for c in P]  # int phi_l^2 dxi
    S = [[_pint(_pmul(a, b)) for b in dP] for a in dP]
    G = [[_pint(_pmul(P[m], dP[l])) for m in range(n)] for l in range(n)]  # int phi_m phi_l'

    def zero():
        return {s: [[Fraction(0)] * n for _ in range(n)] for s in OFFSETS}

    base, pen = zero(), zero()

    def add(blocks, l, functional, scale):
        for s, row in functional.items():
            for j in range(n):
                blocks[s][l][j] += scale * row[j]

    def jump(s):  # [[u]] at face e + 1/2 + s
        return {s: v1, s + 1: [-x for x in vm]}

    # lift values at a face: r^L(+1) and r^R(-1), each per unit jump
    lift_left = sum(-v1[m] * v1[m] / norm[m] for m in range(n))
    lift_right = sum(-vm[m] * vm[m] / norm[m] for m in range(n))
    avg_lift = (lift_left + lift_right) / 2
    for l in range(n):
        # average gradient at both faces (h = 1: du/dx = 2 du/dxi)
        add(base, l, {0: d1, 1: dm}, v1[l])
        add(base, l, {-1: d1, 0: dm}, -vm[l])
        # eta {r_f} part of the flux
        add(pen, l, jump(0), avg_lift * v1[l])
        add(pen, l, jump(-1), -avg_lift * vm[l])
        # stiffness
        add(base, l, {0: [2 * x for x in S[l]]}, Fraction(-1))
        # global lift R^g with coefficients -([[u]]_R phi_m(1) + [[u]]_L phi_m(-1)) / norm_m
        for m in range(n):
            add(base, l, jump(0), G[l][m] * v1[m] / norm[m])
            add(base, l, jump(-1), G[l][m] * vm[m] / norm[m])
    blocks = {}
    for s in OFFSETS:
        b = np.array([[float(base[s][l][j] * 2 / norm[l]) for j in range(n)] for l in range(n)])
        q = np.array([[float(pen[s][l][j] * 2 / norm[l]) for j in range(n)] for l in range(n)])
        out = b + eta * q
        out.setflags(write=False)
        blocks[s] = out
    return StencilOperator(blocks[-2], blocks[-1], blocks[0], blocks[1], blocks[2], config)


def assemble_stencil(config: SchemeConfig) -> StencilOperator:
    """Build the five coupling blocks for ``config``."""
    if not isinstance(config, SchemeConfig):
        raise TypeError(f"expected SchemeConfig, got {type(config).__name__}")
    f = config.formulation
    if f is Formulation.SIPG_BR2:
        return sipg_stencil(config.p, config.eta * penalty_constant(config.p), config)
    if f is Formulation.BR1:
        return _br1(config)
    if f is Formulation.LDG:
        return _ldg(config)
    raise ValueError(f"unknown formulation {f!r}")


def stencil_apply(op: StencilOperator, coeffs: np.ndarray, gamma: float, h: float) -> np.ndarray:
    """Periodic application of the stencil; element axis is ``-2``, modal axis ``-1``."""
    coeffs = np.asarray(coeffs)
    ne = coeffs.shape[-2]
    if coeffs.shape[-1] != op.p + 1:
        raise ValueError(f"field has {coeffs.shape[-1]} modes, operator expects {op.p + 1}")
    if not op.compact and ne < 5:
        raise ValueError(f"non-compact stencil needs at least 5 elements on the ring, got {ne}")
    if ne < 3:
        raise ValueError(f"periodic stencil needs at least 3 elements, got {ne}")
    out = coeffs @ op.L.T
    for s, K in op.blocks.items():
        if s == 0 or not np.any(K):
            continue
        out = out + np.roll(coeffs, -s, axis=-2) @ K.T
    return (gamma / h**2) * out
