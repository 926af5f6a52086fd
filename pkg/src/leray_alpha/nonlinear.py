"""Advection operator B(u, v) = P_sigma((u . grad) v), its smoothed variant
B(Gu, u), the trilinear pairing <B(u, v), w> and the multiplier commutator
[Lambda^s, f] g.

All quadratic terms are evaluated pseudo-spectrally on a grid whose 2/3-rule
dealias band contains the whole truncation cube, so every product returned
here is the exact Galerkin-truncated convolution (no aliasing contamination).
"""

from __future__ import annotations

import numpy as np
import scipy.fft as sfft

from .fields import (
    ModelContext,
    SpectralField,
    _check_same_truncation,
    fractional_laplacian,
    get_fft_workers,
    helmholtz_filter,
    inner_product,
)

_DIV_FREE_TOL = 1e-8


def _require_div_free(u: SpectralField, who: str) -> None:
    defect = u.divergence_defect()
    if defect > _DIV_FREE_TOL:
        raise ValueError(f"{who} must be divergence-free (defect {defect:.3e})")


def advect(u: SpectralField, v: SpectralField, ctx: ModelContext, *, project: bool = True) -> SpectralField:
    """B(u, v): advect v by the divergence-free velocity u and project back
    onto the divergence-free truncated lattice.  project=False returns the
    raw (u . grad) v, still truncated."""
    _check_same_truncation(u, v)
    if u.n != ctx.n:
        raise ValueError(f"truncation mismatch: fields n={u.n}, context n={ctx.n}")
    _require_div_free(u, "the advecting field")
    lat = ctx.lattice
    plan = lat.plan(lat.product_ng)

    # batch: 3 velocity components + 9 derivative spectra d_m v_j
    stack = np.empty((12,) + plan.half_shape, dtype=np.complex128)
    plan.scatter(u.coeffs, out=stack[0:3])
    spec_v = plan.scatter(v.coeffs)
    for m, km in enumerate((plan.kx, plan.ky, plan.kz)):
        np.multiply(spec_v, km, out=stack[3 + 3 * m : 6 + 3 * m])
    stack[3:12] *= 1j
    phys = plan.to_physical(stack)

    conv = np.empty((3, plan.ng, plan.ng, plan.ng))
    for j in range(3):
        np.multiply(phys[0], phys[3 + j], out=conv[j])
        conv[j] += phys[1] * phys[6 + j]
        conv[j] += phys[2] * phys[9 + j]
    coeffs = plan.gather(plan.to_spectrum(conv))

    if project:
        dots = np.einsum("ij,ij->i", coeffs, lat.kfloat)
        coeffs -= (dots / lat.k_sq)[:, None] * lat.kfloat
    return SpectralField(ctx.n, coeffs)


def leray_advection(u: SpectralField, ctx: ModelContext) -> SpectralField:
    """The model nonlinearity B(Gu, u): the advecting velocity is the
    Helmholtz-smoothed state."""
    return advect(helmholtz_filter(u, ctx), u, ctx)


def trilinear(u: SpectralField, v: SpectralField, w: SpectralField, ctx: ModelContext) -> float:
    """<B(u, v), w>; skew in (v, w) and zero for w = v when u is
    divergence-free."""
    _check_same_truncation(v, w)
    return inner_product(advect(u, v, ctx), w)


def pointwise_multiply(f: SpectralField, g: SpectralField, ctx: ModelContext) -> SpectralField:
    """Component-wise product (f_i g_i), dealiased and truncated back onto
    the lattice."""
    _check_same_truncation(f, g)
    lat = ctx.lattice
    plan = lat.plan(lat.product_ng)
    stack = np.empty((6,) + plan.half_shape, dtype=np.complex128)
    stack[0:3] = plan.scatter(f.coeffs)
    stack[3:6] = plan.scatter(g.coeffs)
    phys = plan.to_physical(stack)
    prod = phys[0:3] * phys[3:6]
    return SpectralField(ctx.n, plan.gather(plan.to_spectrum(prod)))


def commutator(f: SpectralField, g: SpectralField, s: float, ctx: ModelContext) -> SpectralField:
    """[Lambda^s, f] g = Lambda^s(f g) - f Lambda^s g with component-wise
    products; identically zero for s = 0."""
    if s < 0:
        raise ValueError("commutator order s must be >= 0")
    first = fractional_laplacian(pointwise_multiply(f, g, ctx), s)
    second = pointwise_multiply(f, fractional_laplacian(g, s), ctx)
    return first - second


def convective_commutator(a: SpectralField, v: SpectralField, s: float, ctx: ModelContext) -> SpectralField:
    """[Lambda^s, a . grad] v = Lambda^s((a . grad) v) - (a . grad)(Lambda^s v),
    the object controlling H^s energy estimates of the advection term."""
    if s < 0:
        raise ValueError("commutator order s must be >= 0")
    first = fractional_laplacian(advect(a, v, ctx, project=False), s)
    second = advect(a, fractional_laplacian(v, s), ctx, project=False)
    return first - second


def gradient_lp_norm(field: SpectralField, p: float, ctx: ModelContext) -> float:
    """L^p norm of the pointwise Frobenius norm of grad u (normalised
    measure), used by the commutator-estimate audits."""
    lat = ctx.lattice
    plan = lat.plan(lat.transform_ng)
    spec = plan.scatter(field.coeffs)
    stack = np.empty((9,) + plan.half_shape, dtype=np.complex128)
    for m, km in enumerate((plan.kx, plan.ky, plan.kz)):
        stack[3 * m : 3 * m + 3] = (1j * km) * spec
    phys = sfft.irfftn(
        stack, s=(plan.ng,) * 3, axes=(-3, -2, -1), norm="forward", workers=get_fft_workers()
    )
    mag = np.sqrt(np.sum(phys * phys, axis=0))
    if p == np.inf:
        return float(np.max(mag))
    return float(np.mean(mag ** p) ** (1.0 / p))
