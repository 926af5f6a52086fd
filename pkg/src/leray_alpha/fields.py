"""Divergence-free spectral fields on the periodic torus and their diagonal
operator calculus.

A field is stored as one complex 3-vector per canonical wavevector of the
truncated lattice {k in Z^3 \\ {0} : |k_i| <= n}.  Only one representative of
each +-k pair is kept (k3 > 0, or k3 = 0 and k2 > 0, or k2 = k3 = 0 and
k1 > 0); the conjugate half is implied, so reconstructed physical fields are
real by construction and the zero mode never exists.  Sobolev norms follow
the lattice convention ||u||_s^2 = sum_k |k|^{2s} |u_k|^2 over the full
(both halves) lattice; L^p norms use the volume-normalised measure
dx/(2pi)^3 so that the p = 2 case coincides with the lattice sum.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft as sfft

# Threads handed to scipy.fft batch transforms.  pocketfft splits work over
# the batch axis only, so results are bitwise identical for any setting.
_FFT_WORKERS = 1


def set_fft_workers(workers: int) -> None:
    global _FFT_WORKERS
    _FFT_WORKERS = max(1, int(workers))


def get_fft_workers() -> int:
    return _FFT_WORKERS


def default_fft_workers() -> int:
    return min(2, os.cpu_count() or 1)


def next_fft_size(m: int) -> int:
    """Smallest 5-smooth integer >= m (FFT-friendly grid length)."""
    size = max(1, int(m))
    while True:
        rest = size
        for p in (2, 3, 5):
            while rest % p == 0:
                rest //= p
        if rest == 1:
            return size
        size += 1


class _GridPlan:
    """Scatter/gather indexing between the canonical half-lattice and the
    rfftn layout of a cubic grid with ng points per axis."""

    def __init__(self, lat: "Lattice", ng: int):
        if ng < 2 * lat.n + 1:
            raise ValueError(f"grid size {ng} cannot resolve truncation n={lat.n}")
        self.ng = ng
        self.half_shape = (ng, ng, ng // 2 + 1)
        k = lat.wavevectors
        i1 = np.mod(k[:, 0], ng)
        i2 = np.mod(k[:, 1], ng)
        i3 = k[:, 2]  # canonical k3 >= 0 < ng//2
        self.idx_main = np.ravel_multi_index((i1, i2, i3), self.half_shape)
        # modes in the k3 = 0 plane also need their conjugate image so the
        # plane is Hermitian under 2D index negation
        plane = np.flatnonzero(k[:, 2] == 0)
        self.mirror_rows = plane
        self.idx_mirror = np.ravel_multi_index(
            (np.mod(-k[plane, 0], ng), np.mod(-k[plane, 1], ng), k[plane, 2]),
            self.half_shape,
        )
        # signed wavenumbers of the rfftn layout, broadcastable to half_shape
        line = np.rint(np.fft.fftfreq(ng) * ng)
        self.kx = line.reshape(ng, 1, 1)
        self.ky = line.reshape(1, ng, 1)
        self.kz = np.arange(ng // 2 + 1, dtype=float).reshape(1, 1, ng // 2 + 1)

    def scatter(self, coeffs: np.ndarray, out: np.ndarray | None = None) -> np.ndarray:
        """Place half-lattice coefficients (M, 3) into a (3, *half_shape)
        complex array suitable for irfftn."""
        if out is None:
            out = np.zeros((3,) + self.half_shape, dtype=np.complex128)
        else:
            out[...] = 0.0
        flat = out.reshape(3, -1)
        flat[:, self.idx_main] = coeffs.T
        flat[:, self.idx_mirror] = np.conj(coeffs[self.mirror_rows]).T
        return out

    def gather(self, spectrum: np.ndarray) -> np.ndarray:
        """Read the canonical half-lattice back out of a (3, *half_shape)
        rfftn spectrum."""
        return np.ascontiguousarray(spectrum.reshape(3, -1)[:, self.idx_main].T)

    def to_physical(self, spectrum: np.ndarray) -> np.ndarray:
        return sfft.irfftn(
            spectrum,
            s=(self.ng,) * 3,
            axes=(-3, -2, -1),
            norm="forward",
            workers=_FFT_WORKERS,
        )

    def to_spectrum(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfftn(values, axes=(-3, -2, -1), norm="forward", workers=_FFT_WORKERS)


class Lattice:
    """Canonical half-lattice for truncation n, with cached multipliers and
    grid plans.  Obtain instances through lattice(n)."""

    def __init__(self, n: int):
        if n < 1:
            raise ValueError("truncation n must be >= 1")
        self.n = n
        side = np.arange(-n, n + 1)
        k1, k2, k3 = np.meshgrid(side, side, side, indexing="ij")
        k = np.stack([k1.ravel(), k2.ravel(), k3.ravel()], axis=1)
        canonical = (k[:, 2] > 0) | ((k[:, 2] == 0) & (k[:, 1] > 0)) | (
            (k[:, 2] == 0) & (k[:, 1] == 0) & (k[:, 0] > 0)
        )
        k = k[canonical]
        # lexicographic (k1, k2, k3) order; snapshot payloads rely on it
        order = np.lexsort((k[:, 2], k[:, 1], k[:, 0]))
        self.wavevectors = np.ascontiguousarray(k[order])
        self.wavevectors.setflags(write=False)
        self.size = len(self.wavevectors)
        self.k_sq = np.einsum("ij,ij->i", self.wavevectors, self.wavevectors).astype(float)
        self.k_sq.setflags(write=False)
        self.kfloat = self.wavevectors.astype(float)
        self.kfloat.setflags(write=False)
        self.index = {tuple(row): i for i, row in enumerate(self.wavevectors)}
        # product grid large enough that the 2/3-rule band of the grid covers
        # the whole truncation cube: quadratic products are then alias-free
        # and equal the exact truncated convolution
        self.product_ng = next_fft_size(3 * n + 2)
        self.transform_ng = next_fft_size(2 * n + 2)
        self._plans: dict[int, _GridPlan] = {}
        self._powers: dict[float, np.ndarray] = {}

    def plan(self, ng: int) -> _GridPlan:
        plan = self._plans.get(ng)
        if plan is None:
            plan = _GridPlan(self, ng)
            self._plans[ng] = plan
        return plan

    def power(self, exponent: float) -> np.ndarray:
        """|k|^exponent per stored mode (exponent may be negative: k != 0)."""
        exponent = float(exponent)
        arr = self._powers.get(exponent)
        if arr is None:
            if exponent == 0.0:
                arr = np.ones(self.size)
            else:
                arr = self.k_sq ** (exponent / 2.0)
            arr.setflags(write=False)
            self._powers[exponent] = arr
        return arr

    def index_of(self, k: tuple[int, int, int]) -> int:
        try:
            return self.index[k]
        except KeyError:
            raise ValueError(f"wavevector {k} is not a canonical mode of n={self.n}") from None


@lru_cache(maxsize=16)
def lattice(n: int) -> Lattice:
    return Lattice(n)


def canonical_mode(k: tuple[int, int, int]) -> tuple[int, int, int]:
    """Map a wavevector onto its stored +-pair representative."""
    k = tuple(int(c) for c in k)
    if k == (0, 0, 0):
        raise ValueError("the zero mode is excluded (fields have zero mean)")
    if (k[2] > 0) or (k[2] == 0 and k[1] > 0) or (k[2] == 0 and k[1] == 0 and k[0] > 0):
        return k
    return (-k[0], -k[1], -k[2])


@dataclass(frozen=True)
class SpectralField:
    """Velocity field as Fourier coefficients on the canonical half-lattice.

    coeffs has shape (M, 3) where M = ((2n+1)^3 - 1) / 2; row order matches
    lattice(n).wavevectors.  Instances are immutable.
    """

    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        lat = lattice(self.n)
        arr = np.asarray(self.coeffs, dtype=np.complex128)
        if arr.shape != (lat.size, 3):
            raise ValueError(
                f"coefficient array must have shape ({lat.size}, 3) for n={self.n}, got {arr.shape}"
            )
        if not np.all(np.isfinite(arr.view(float))):
            raise ValueError("coefficients must be finite")
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)

    @property
    def lattice(self) -> Lattice:
        return lattice(self.n)

    def divergence_defect(self) -> float:
        """max_k |u_k . k| / (|u_k| |k|), 0.0 for the zero field."""
        lat = self.lattice
        dots = np.abs(np.einsum("ij,ij->i", self.coeffs, lat.kfloat))
        scale = np.linalg.norm(self.coeffs, axis=1) * np.sqrt(lat.k_sq)
        mask = scale > 0
        if not mask.any():
            return 0.0
        return float(np.max(dots[mask] / scale[mask]))

    def is_divergence_free(self, rtol: float = 1e-12) -> bool:
        return self.divergence_defect() <= rtol

    def __add__(self, other: "SpectralField") -> "SpectralField":
        _check_same_truncation(self, other)
        return SpectralField(self.n, self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField") -> "SpectralField":
        _check_same_truncation(self, other)
        return SpectralField(self.n, self.coeffs - other.coeffs)

    def __mul__(self, scalar: complex) -> "SpectralField":
        return SpectralField(self.n, self.coeffs * scalar)

    __rmul__ = __mul__

    @classmethod
    def zero(cls, n: int) -> "SpectralField":
        return cls(n, np.zeros((lattice(n).size, 3), dtype=np.complex128))

    @classmethod
    def single_mode(cls, n: int, k: tuple[int, int, int], amplitude: complex) -> "SpectralField":
        """Divergence-free field carrying one +-k pair with L^2 norm
        |amplitude|; the polarisation is a fixed unit vector orthogonal to k."""
        k = canonical_mode(k)
        lat = lattice(n)
        coeffs = np.zeros((lat.size, 3), dtype=np.complex128)
        coeffs[lat.index_of(k)] = (amplitude / math.sqrt(2.0)) * polarization(k)
        return cls(n, coeffs)


def _check_same_truncation(a: SpectralField, b: SpectralField) -> None:
    if a.n != b.n:
        raise ValueError(f"truncation mismatch: n={a.n} vs n={b.n}")


def polarization(k: tuple[int, int, int]) -> np.ndarray:
    """Deterministic real unit vector orthogonal to k."""
    kv = np.asarray(k, dtype=float)
    helper = np.array([0.0, 0.0, 1.0]) if (k[0], k[1]) != (0, 0) else np.array([1.0, 0.0, 0.0])
    e = np.cross(kv, helper)
    return e / np.linalg.norm(e)


@dataclass(frozen=True)
class ModelContext:
    """Model parameters and truncation.

    nu > 0 viscosity, alpha > 0 smoothing length scale, theta1 >= 0 smoothing
    order, theta2 > 0 dissipation order, n >= 1 cube truncation |k_i| <= n.
    """

    nu: float
    alpha: float
    theta1: float
    theta2: float
    n: int

    def __post_init__(self):
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise ValueError("nu must be positive and finite")
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ValueError("alpha must be positive and finite")
        if not (self.theta1 >= 0 and math.isfinite(self.theta1)):
            raise ValueError("theta1 must be >= 0 and finite")
        if not (self.theta2 > 0 and math.isfinite(self.theta2)):
            raise ValueError("theta2 must be > 0")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    @property
    def lattice(self) -> Lattice:
        return lattice(self.n)

    @property
    def filter_multiplier(self) -> np.ndarray:
        """Diagonal symbol of (I + alpha^{2 theta1} Lambda^{2 theta1})^{-1},
        in (0, 1] for every mode."""
        return _filter_multiplier(self.n, self.alpha, self.theta1)

    @property
    def dissipation_multiplier(self) -> np.ndarray:
        """Diagonal symbol |k|^{2 theta2} of the fractional dissipation."""
        return self.lattice.power(2.0 * self.theta2)

    @property
    def dealias_mask(self) -> np.ndarray:
        """2/3-rule mask of the product grid, restricted to the retained
        band; the product grid is sized so the whole truncation survives."""
        return _dealias_mask(self.n)

    def smoothing_gain(self, beta: float) -> float:
        """Sharp constant sup_k |k|^beta / (1 + alpha^{2 theta1} |k|^{2 theta1})
        over the truncation lattice (operator norm H^s -> H^{s+beta} of the
        smoother)."""
        lat = self.lattice
        return float(np.max(lat.power(beta) * self.filter_multiplier))


@lru_cache(maxsize=32)
def _filter_multiplier(n: int, alpha: float, theta1: float) -> np.ndarray:
    lat = lattice(n)
    arr = 1.0 / (1.0 + alpha ** (2.0 * theta1) * lat.power(2.0 * theta1))
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=16)
def _dealias_mask(n: int) -> np.ndarray:
    lat = lattice(n)
    cutoff = lat.product_ng // 3
    mask = np.all(np.abs(lat.wavevectors) <= cutoff, axis=1)
    mask.setflags(write=False)
    return mask


# ---------------------------------------------------------------------------
# transforms


def to_grid(field: SpectralField, grid_size: int | None = None) -> np.ndarray:
    """Evaluate the field on the collocation grid (3, ng, ng, ng) of
    [0, 2pi)^3.  ng defaults to the FFT-friendly size >= 2n+2 and must be
    at least 2n+1."""
    lat = field.lattice
    ng = lat.transform_ng if grid_size is None else int(grid_size)
    plan = lat.plan(ng)  # rejects ng < 2n+1
    return plan.to_physical(plan.scatter(field.coeffs))


def from_grid(values: np.ndarray, n: int) -> SpectralField:
    """Project grid samples (3, ng, ng, ng) onto the truncated lattice."""
    values = np.asarray(values, dtype=float)
    if values.ndim != 4 or values.shape[0] != 3 or len(set(values.shape[1:])) != 1:
        raise ValueError("expected a (3, ng, ng, ng) array of grid samples")
    if not np.all(np.isfinite(values)):
        raise ValueError("grid samples must be finite")
    lat = lattice(n)
    plan = lat.plan(values.shape[1])
    return SpectralField(n, plan.gather(plan.to_spectrum(values)))


# ---------------------------------------------------------------------------
# diagonal operators


def leray_project(field: SpectralField) -> SpectralField:
    """Remove the component of each coefficient along its wavevector:
    u_k <- u_k - (u_k . k) k / |k|^2."""
    lat = field.lattice
    dots = np.einsum("ij,ij->i", field.coeffs, lat.kfloat)
    return SpectralField(field.n, field.coeffs - (dots / lat.k_sq)[:, None] * lat.kfloat)


def fractional_laplacian(field: SpectralField, s: float) -> SpectralField:
    """Apply the Fourier multiplier |k|^s (any real s; k = 0 never occurs)."""
    return SpectralField(field.n, field.coeffs * field.lattice.power(float(s))[:, None])


def helmholtz_filter(field: SpectralField, ctx: ModelContext) -> SpectralField:
    """Apply the inverse Helmholtz-type smoother
    (I + alpha^{2 theta1} Lambda^{2 theta1})^{-1}; this recovers the advecting
    velocity from the model state."""
    if field.n != ctx.n:
        raise ValueError(f"truncation mismatch: field n={field.n}, context n={ctx.n}")
    return SpectralField(field.n, field.coeffs * ctx.filter_multiplier[:, None])


def sobolev_norm(field: SpectralField, s: float = 0.0) -> float:
    """||u||_s = sqrt(sum_k |k|^{2s} |u_k|^2) over the full +-k lattice."""
    lat = field.lattice
    weights = lat.power(2.0 * float(s))
    total = np.sum(weights * np.sum(np.abs(field.coeffs) ** 2, axis=1))
    return math.sqrt(2.0 * float(total))


def inner_product(a: SpectralField, b: SpectralField, s: float = 0.0) -> float:
    """Real pairing sum_k |k|^{2s} a_k . conj(b_k) over the full lattice."""
    _check_same_truncation(a, b)
    weights = a.lattice.power(2.0 * float(s))
    return 2.0 * float(np.real(np.sum(weights * np.einsum("ij,ij->i", a.coeffs, np.conj(b.coeffs)))))


def lp_norm(field: SpectralField, p: float, grid_size: int | None = None) -> float:
    """Collocation L^p norm with the normalised measure dx/(2pi)^3; p = inf
    gives the max of |u(x)|.  For p = 2 this matches sobolev_norm(field, 0)
    to quadrature accuracy."""
    if p != math.inf and p < 1:
        raise ValueError("p must be >= 1 or inf")
    values = to_grid(field, grid_size)
    mag = np.sqrt(np.sum(values * values, axis=0))
    if p == math.inf:
        return float(np.max(mag))
    return float(np.mean(mag ** p) ** (1.0 / p))


def random_field(
    ctx: ModelContext,
    seed: int,
    spectrum_slope: float = 2.0,
    amplitude: float = 1.0,
) -> SpectralField:
    """Divergence-free Gaussian field with |u_k| ~ |k|^{-spectrum_slope},
    normalised so ||u||_{L^2} = amplitude (deterministic in seed)."""
    lat = ctx.lattice
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((lat.size, 3)) + 1j * rng.standard_normal((lat.size, 3))
    raw *= lat.power(-float(spectrum_slope))[:, None]
    dots = np.einsum("ij,ij->i", raw, lat.kfloat)
    raw -= (dots / lat.k_sq)[:, None] * lat.kfloat
    norm = math.sqrt(2.0 * float(np.sum(np.abs(raw) ** 2)))
    if norm > 0:
        raw *= amplitude / norm
    return SpectralField(ctx.n, raw)
