"""Finite-dimensional Wiener drivers and noise coefficient families.

Three families ship, each mapping a state u to a Hilbert-Schmidt operator on
the driver space: additive (fixed unit-norm single-mode fields with
amplitudes sigma_j), linear multiplicative (sigma * u, one driver) and
diagonal spectral (driver j scales mode k_j of u by sigma_j).  Every family
keeps its range in the divergence-free zero-mean subspace.

Gaussian increments come from Philox4x64 keyed by (master seed, trajectory
id) with the step index in the high word of the block counter, so draws are
reproducible for any execution order of trajectories and steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import (
    ModelContext,
    SpectralField,
    canonical_mode,
    lattice,
    polarization,
    random_field,
    sobolev_norm,
)


# ---------------------------------------------------------------------------
# Wiener increments


@dataclass(frozen=True)
class WienerStream:
    """Identifies one trajectory's increment stream."""

    master_seed: int
    trajectory_id: int
    dim: int

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("driver dimension must be >= 1")
        if self.master_seed < 0 or self.trajectory_id < 0:
            raise ValueError("master seed and trajectory id must be >= 0 (they key a Philox counter)")


@dataclass(frozen=True)
class WienerIncrement:
    dt: float
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float, copy=True)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)


def wiener_increment(stream: WienerStream, dt: float, step: int) -> WienerIncrement:
    """Gaussian increments with variance dt per driver dimension,
    deterministic in (master seed, trajectory id, step)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if step < 0:
        raise ValueError("step index must be >= 0")
    bitgen = np.random.Philox(
        key=np.array([stream.master_seed, stream.trajectory_id], dtype=np.uint64),
        counter=np.array([0, 0, 0, step], dtype=np.uint64),
    )
    draws = np.random.Generator(bitgen).standard_normal(stream.dim)
    return WienerIncrement(dt, draws * math.sqrt(dt))


# ---------------------------------------------------------------------------
# noise families


class NoiseFamily:
    """Base for concrete noise coefficient realisations."""

    kind: str = "abstract"

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def apply(self, u: SpectralField, incr: WienerIncrement) -> SpectralField:
        raise NotImplementedError

    def hs_norm_sq(self, u: SpectralField, s: float = 0.0) -> float:
        raise NotImplementedError

    def describe(self) -> str:
        raise NotImplementedError

    def signature(self) -> tuple:
        """Hashable identity used to reject mixed-configuration ensembles."""
        raise NotImplementedError

    def _check_increment(self, incr: WienerIncrement) -> None:
        if incr.values.shape != (self.dim,):
            raise ValueError(
                f"increment dimension {incr.values.shape} does not match driver dimension {self.dim}"
            )


def _normalize_modes(modes, sigmas, n: int):
    canon = []
    for k in modes:
        k = canonical_mode(tuple(k))
        if max(abs(c) for c in k) > n:
            raise ValueError(f"noise mode {k} lies outside the truncation n={n}")
        canon.append(k)
    if len(set(canon)) != len(canon):
        raise ValueError("duplicate noise modes after +-k canonicalisation")
    sig = [float(s) for s in sigmas]
    if len(sig) != len(canon):
        raise ValueError("need one amplitude per noise mode")
    if any(s < 0 or not math.isfinite(s) for s in sig):
        raise ValueError("amplitudes must be finite and >= 0")
    return tuple(canon), tuple(sig)


@dataclass(frozen=True)
class AdditiveNoise(NoiseFamily):
    """g(u) e_j = sigma_j f_j with f_j the unit-norm divergence-free field
    carrying the single mode pair +-k_j."""

    modes: tuple[tuple[int, int, int], ...]
    sigmas: tuple[float, ...]
    n: int
    kind: str = field(default="additive", init=False)

    def __post_init__(self):
        modes, sigmas = _normalize_modes(self.modes, self.sigmas, self.n)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def dim(self) -> int:
        return len(self.modes)

    def _rows_and_vectors(self):
        lat = lattice(self.n)
        rows = np.array([lat.index_of(k) for k in self.modes])
        vecs = np.stack([polarization(k) for k in self.modes]) / math.sqrt(2.0)
        return rows, vecs

    def apply(self, u: SpectralField, incr: WienerIncrement) -> SpectralField:
        self._check_increment(incr)
        if u.n != self.n:
            raise ValueError(f"state truncation n={u.n} does not match noise n={self.n}")
        rows, vecs = self._rows_and_vectors()
        coeffs = np.zeros((lattice(self.n).size, 3), dtype=np.complex128)
        amp = np.asarray(self.sigmas) * incr.values
        np.add.at(coeffs, rows, amp[:, None] * vecs)
        return SpectralField(self.n, coeffs)

    def hs_norm_sq(self, u: SpectralField, s: float = 0.0) -> float:
        weights = np.array([sum(c * c for c in k) for k in self.modes], dtype=float) ** s
        return float(np.sum(np.asarray(self.sigmas) ** 2 * weights))

    def describe(self) -> str:
        parts = ", ".join(f"{k}:{s:g}" for k, s in zip(self.modes, self.sigmas))
        return f"additive[{parts}]"

    def signature(self) -> tuple:
        return ("additive", self.n, self.modes, self.sigmas)


@dataclass(frozen=True)
class LinearMultiplicativeNoise(NoiseFamily):
    """g(u) e_1 = sigma * u, a one-dimensional driver."""

    sigma: float
    kind: str = field(default="linear-multiplicative", init=False)

    def __post_init__(self):
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise ValueError("sigma must be finite and >= 0")

    @property
    def dim(self) -> int:
        return 1

    def apply(self, u: SpectralField, incr: WienerIncrement) -> SpectralField:
        self._check_increment(incr)
        return SpectralField(u.n, (self.sigma * incr.values[0]) * u.coeffs)

    def hs_norm_sq(self, u: SpectralField, s: float = 0.0) -> float:
        return self.sigma**2 * sobolev_norm(u, s) ** 2

    def describe(self) -> str:
        return f"linear-multiplicative[sigma={self.sigma:g}]"

    def signature(self) -> tuple:
        return ("linear-multiplicative", self.sigma)


@dataclass(frozen=True)
class DiagonalSpectralNoise(NoiseFamily):
    """Driver j rescales the +-k_j coefficient pair of u by sigma_j."""

    modes: tuple[tuple[int, int, int], ...]
    sigmas: tuple[float, ...]
    n: int
    kind: str = field(default="diagonal-spectral", init=False)

    def __post_init__(self):
        modes, sigmas = _normalize_modes(self.modes, self.sigmas, self.n)
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "sigmas", sigmas)

    @property
    def dim(self) -> int:
        return len(self.modes)

    def apply(self, u: SpectralField, incr: WienerIncrement) -> SpectralField:
        self._check_increment(incr)
        lat = lattice(self.n)
        if u.n != self.n:
            raise ValueError(f"state truncation n={u.n} does not match noise n={self.n}")
        rows = np.array([lat.index_of(k) for k in self.modes])
        coeffs = np.zeros_like(u.coeffs)
        scale = np.asarray(self.sigmas) * incr.values
        coeffs[rows] = scale[:, None] * u.coeffs[rows]
        return SpectralField(self.n, coeffs)

    def hs_norm_sq(self, u: SpectralField, s: float = 0.0) -> float:
        lat = lattice(self.n)
        rows = np.array([lat.index_of(k) for k in self.modes])
        weights = np.array([sum(c * c for c in k) for k in self.modes], dtype=float) ** s
        energies = 2.0 * np.sum(np.abs(u.coeffs[rows]) ** 2, axis=1)
        return float(np.sum(np.asarray(self.sigmas) ** 2 * weights * energies))

    def describe(self) -> str:
        parts = ", ".join(f"{k}:{s:g}" for k, s in zip(self.modes, self.sigmas))
        return f"diagonal-spectral[{parts}]"

    def signature(self) -> tuple:
        return ("diagonal-spectral", self.n, self.modes, self.sigmas)


def decay_modes(n: int, driver_dim: int, sigma: float, gamma: float):
    """First driver_dim canonical modes ordered by (|k|^2, lex) with the decay
    law sigma_j = sigma * |k_j|^{-gamma}."""
    lat = lattice(n)
    order = np.lexsort(
        (lat.wavevectors[:, 2], lat.wavevectors[:, 1], lat.wavevectors[:, 0], lat.k_sq)
    )
    if driver_dim > lat.size:
        raise ValueError(f"driver_dim {driver_dim} exceeds the {lat.size} stored modes")
    modes = [tuple(int(c) for c in lat.wavevectors[i]) for i in order[:driver_dim]]
    sigmas = [sigma * float(lat.k_sq[i]) ** (-gamma / 2.0) for i in order[:driver_dim]]
    return tuple(modes), tuple(sigmas)


def apply_noise(family: NoiseFamily, u: SpectralField, incr: WienerIncrement) -> SpectralField:
    """Realise g(u) dW for one increment; linear in the increment."""
    return family.apply(u, incr)


def hs_norm_sq(family: NoiseFamily, u: SpectralField, s: float = 0.0) -> float:
    """||Lambda^s g(u)||^2 summed over driver dimensions (s in {0, 1} is what
    the integrator records; any s >= 0 is accepted)."""
    return family.hs_norm_sq(u, s)


# ---------------------------------------------------------------------------
# hypothesis audit


@dataclass(frozen=True)
class NoiseAudit:
    family: str
    scales: tuple[float, ...]
    growth_l2: tuple[float, ...]
    growth_h1: tuple[float, ...]
    lipschitz: tuple[float, ...]
    max_growth_l2: float
    max_growth_h1: float
    max_lipschitz: float
    flagged: bool

    def render(self) -> str:
        lines = [
            f"noise audit: {self.family}",
            f"  max ||g(u)||_HS^2 / (1 + ||u||_L2^2)      = {self.max_growth_l2:.6g}",
            f"  max ||Lambda g(u)||_HS^2 / (1 + ||u||_1^2) = {self.max_growth_h1:.6g}",
            f"  max ||g(u)-g(v)||_HS / ||u-v||_L2          = {self.max_lipschitz:.6g}",
            "  scale   growth_L2     growth_H1     lipschitz",
        ]
        for sc, g0, g1, lp in zip(self.scales, self.growth_l2, self.growth_h1, self.lipschitz):
            lines.append(f"  {sc:<7g} {g0:<13.6g} {g1:<13.6g} {lp:.6g}")
        verdict = "FLAGGED: ratios grow with the norm scale" if self.flagged else "bounded ratios"
        lines.append(f"  verdict: {verdict}")
        return "\n".join(lines)


def _hs_distance(family: NoiseFamily, u: SpectralField, v: SpectralField) -> float:
    """||g(u) - g(v)||_HS via unit increments along each driver."""
    total = 0.0
    for j in range(family.dim):
        e = np.zeros(family.dim)
        e[j] = 1.0
        incr = WienerIncrement(1.0, e)
        diff = family.apply(u, incr) - family.apply(v, incr)
        total += sobolev_norm(diff, 0.0) ** 2
    return math.sqrt(total)


def audit_hypotheses(
    family: NoiseFamily,
    ctx: ModelContext,
    samples: int = 8,
    seed: int = 0,
    scales: tuple[float, ...] = (0.1, 1.0, 10.0, 100.0),
) -> NoiseAudit:
    """Empirical envelopes of the growth and Lipschitz ratios over random
    fields at escalating norm scales; a family whose envelope keeps growing
    with the scale is flagged."""
    if samples < 2:
        raise ValueError("need at least 2 samples per scale")
    growth0, growth1, lips = [], [], []
    for si, scale in enumerate(scales):
        g0 = g1 = lp = 0.0
        for j in range(samples):
            u = random_field(ctx, seed=seed + 1000 * si + 2 * j, amplitude=scale)
            v = random_field(ctx, seed=seed + 1000 * si + 2 * j + 1, amplitude=scale)
            g0 = max(g0, family.hs_norm_sq(u, 0.0) / (1.0 + sobolev_norm(u, 0.0) ** 2))
            g1 = max(g1, family.hs_norm_sq(u, 1.0) / (1.0 + sobolev_norm(u, 1.0) ** 2))
            dist = sobolev_norm(u - v, 0.0)
            if dist > 0:
                lp = max(lp, _hs_distance(family, u, v) / dist)
        growth0.append(g0)
        growth1.append(g1)
        lips.append(lp)
    # bounded families saturate between the two largest scales; anything still
    # growing by a factor > 5 across one decade there is effectively unbounded
    floor = 1e-12
    flagged = (
        growth0[-1] > 5.0 * (growth0[-2] + floor)
        or growth1[-1] > 5.0 * (growth1[-2] + floor)
        or lips[-1] > 5.0 * (lips[-2] + floor)
    )
    return NoiseAudit(
        family=family.describe(),
        scales=tuple(scales),
        growth_l2=tuple(growth0),
        growth_h1=tuple(growth1),
        lipschitz=tuple(lips),
        max_growth_l2=max(growth0),
        max_growth_h1=max(growth1),
        max_lipschitz=max(lips),
        flagged=flagged,
    )
