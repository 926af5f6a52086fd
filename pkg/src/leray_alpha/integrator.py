"""Semi-implicit Euler-Maruyama integrator for the truncated model

    du + [nu Lambda^{2 theta2} u + chi B(Gu, u)] dt = chi g(u) dW,

with the diagonal linear part treated exactly implicitly (unconditionally
stable for the stiff dissipation multiplier) and the nonlinearity and noise
explicit:

    u_{m+1} = (u_m - dt chi B(Gu_m, u_m) + chi g(u_m) dW_m)
              / (1 + dt nu |k|^{2 theta2}) .

chi = smooth_cutoff(||u_m||_1, R) damps the dynamics once the H^1 norm leaves
the ball of radius R (chi = 1 when no cutoff radius is configured).  Stopping
monitors observe the run without halting it; only a non-finite state halts,
recorded separately from monitor hits.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .fields import (
    ModelContext,
    SpectralField,
    random_field,
    set_fft_workers,
)
from .nonlinear import leray_advection
from .noise import NoiseFamily, WienerStream, wiener_increment

MONITOR_KINDS = ("tau_R", "rho_M", "gamma_K")


def smooth_cutoff(x: float, radius: float) -> float:
    """C^infinity decreasing profile: 1 for x <= R, 0 for x >= 2R, smooth
    monotone transition on (R, 2R) with value 1/2 at the midpoint."""
    if radius <= 0:
        raise ValueError("cutoff radius must be positive")
    if x <= radius:
        return 1.0
    if x >= 2.0 * radius:
        return 0.0
    t = (x - radius) / radius

    def bump(y: float) -> float:
        return math.exp(-1.0 / y) if y > 0 else 0.0

    return bump(1.0 - t) / (bump(t) + bump(1.0 - t))


@dataclass(frozen=True)
class Monitor:
    """A stopping-time observer.

    tau_R:   first grid time with ||u(t)||_1 >= threshold
    rho_M:   first grid time with sup_{s<=t} ||u(s)||_1^2
             + int_0^t ||u||_{theta2+1}^2 ds >= threshold
    gamma_K: first grid time with int_0^t ||u||_{theta2}^2 ds >= threshold
    """

    kind: str
    threshold: float

    def __post_init__(self):
        if self.kind not in MONITOR_KINDS:
            raise ValueError(f"unknown monitor kind {self.kind!r}; expected one of {MONITOR_KINDS}")
        if not (self.threshold > 0 and math.isfinite(self.threshold)):
            raise ValueError("monitor threshold must be positive and finite")


@dataclass(frozen=True)
class StoppingRecord:
    kind: str
    threshold: float
    hit_time: float


@dataclass(frozen=True)
class InitialData:
    """Initial state specification: a single +-k mode pair with given L^2
    amplitude, or a seeded random field with power-law spectrum."""

    kind: str
    amplitude: float = 1.0
    mode: tuple[int, int, int] | None = None
    seed: int = 0
    slope: float = 2.0

    def __post_init__(self):
        if self.kind not in ("single_mode", "random"):
            raise ValueError("initial kind must be 'single_mode' or 'random'")
        if self.kind == "single_mode" and self.mode is None:
            raise ValueError("single_mode initial data needs a mode")
        if not math.isfinite(self.amplitude) or self.amplitude < 0:
            raise ValueError("initial amplitude must be finite and >= 0")

    def build(self, ctx: ModelContext) -> SpectralField:
        if self.kind == "single_mode":
            if self.amplitude == 0:
                return SpectralField.zero(ctx.n)
            return SpectralField.single_mode(ctx.n, self.mode, self.amplitude)
        return random_field(ctx, seed=self.seed, spectrum_slope=self.slope, amplitude=self.amplitude)


@dataclass(frozen=True)
class RunConfig:
    """Everything one trajectory needs; ensembles vary trajectory_id only."""

    ctx: ModelContext
    dt: float
    horizon: float
    noise: NoiseFamily
    initial: InitialData
    seed: int = 0
    trajectory_id: int = 0
    cutoff_radius: float | None = None
    monitors: tuple[Monitor, ...] = ()
    snapshot_every: float | None = None
    nonlinear: bool = True

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive and finite")
        if not (self.horizon > self.dt):
            raise ValueError("horizon T must exceed dt")
        if self.cutoff_radius is not None and not self.cutoff_radius > 0:
            raise ValueError("cutoff radius must be positive")
        if self.snapshot_every is not None and not self.snapshot_every > 0:
            raise ValueError("snapshot cadence must be positive")
        object.__setattr__(self, "monitors", tuple(self.monitors))

    @property
    def steps(self) -> int:
        return max(1, int(round(self.horizon / self.dt)))

    def ensemble_key(self) -> tuple:
        """Identity of the run setup; trajectories of one ensemble share it."""
        return (
            self.ctx,
            self.dt,
            self.horizon,
            self.noise.signature(),
            self.initial,
            self.seed,
            self.cutoff_radius,
            self.monitors,
            self.nonlinear,
        )


@dataclass(frozen=True)
class TrajectoryState:
    t: float
    u: SpectralField
    step_index: int
    stream: WienerStream
    halted: StoppingRecord | None = None


@dataclass(frozen=True)
class TrajectoryRecord:
    """One sample path: norm time series, energy-ledger increments, monitor
    outcomes and optional snapshots.  Arrays are truncated at the halt point
    when a run blows up (complete = False)."""

    cfg: RunConfig
    t: np.ndarray
    norm_l2: np.ndarray
    norm_h1: np.ndarray
    norm_th2: np.ndarray
    norm_th2p1: np.ndarray
    int_diss_th2: np.ndarray
    int_diss_th2p1: np.ndarray
    injection_cum: np.ndarray
    mart_l2: np.ndarray
    inj_l2: np.ndarray
    mart_h1: np.ndarray
    inj_h1: np.ndarray
    adv_h1: np.ndarray
    chi: np.ndarray
    hits: tuple[StoppingRecord | None, ...]
    overflow: StoppingRecord | None
    snapshots: tuple[tuple[float, SpectralField], ...]
    final_field: SpectralField

    @property
    def complete(self) -> bool:
        return self.overflow is None

    @property
    def trajectory_id(self) -> int:
        return self.cfg.trajectory_id


class _StepCore:
    """Per-run precomputation shared by step() and run_trajectory()."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        lat = cfg.ctx.lattice
        self.lat = lat
        self.denom = (1.0 + cfg.dt * cfg.ctx.nu * cfg.ctx.dissipation_multiplier)[:, None]
        self.w0 = np.ones(lat.size)
        self.w1 = lat.power(2.0)

    def _inner(self, a: np.ndarray, b: np.ndarray, weights: np.ndarray) -> float:
        return 2.0 * float(np.real(np.sum(weights * np.einsum("ij,ij->i", a, np.conj(b)))))

    def advance(self, u: SpectralField, step_index: int, norm_h1: float, stream: WienerStream):
        cfg = self.cfg
        chi = 1.0
        if cfg.cutoff_radius is not None:
            chi = smooth_cutoff(norm_h1, cfg.cutoff_radius)

        if cfg.nonlinear:
            bconv = leray_advection(u, cfg.ctx).coeffs
        else:
            bconv = None

        incr = wiener_increment(stream, cfg.dt, step_index)
        gw = cfg.noise.apply(u, incr).coeffs

        new = u.coeffs + chi * gw
        if bconv is not None:
            new = new - (cfg.dt * chi) * bconv
        new = new / self.denom

        stats = {
            "chi": chi,
            "mart_l2": 2.0 * chi * self._inner(gw, u.coeffs, self.w0),
            "inj_l2": chi * chi * cfg.noise.hs_norm_sq(u, 0.0) * cfg.dt,
            "mart_h1": 2.0 * chi * self._inner(gw, u.coeffs, self.w1),
            "inj_h1": chi * chi * cfg.noise.hs_norm_sq(u, 1.0) * cfg.dt,
            "adv_h1": (2.0 * chi * self._inner(bconv, u.coeffs, self.w1) * cfg.dt)
            if bconv is not None
            else 0.0,
        }
        return new, stats


def initial_state(cfg: RunConfig) -> TrajectoryState:
    from .fields import leray_project

    u0 = leray_project(cfg.initial.build(cfg.ctx))
    stream = WienerStream(cfg.seed, cfg.trajectory_id, cfg.noise.dim)
    return TrajectoryState(t=0.0, u=u0, step_index=0, stream=stream)


def step(state: TrajectoryState, cfg: RunConfig) -> TrajectoryState:
    """Advance one grid step; raises on a halted state, halts (with an
    overflow record, distinct from monitor hits) when the update is not
    finite."""
    if state.halted is not None:
        raise ValueError("cannot step a halted trajectory")
    from .fields import sobolev_norm

    core = _StepCore(cfg)
    t_next = (state.step_index + 1) * cfg.dt
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            new, _ = core.advance(state.u, state.step_index, sobolev_norm(state.u, 1.0), state.stream)
    except ValueError as exc:
        if "finite" not in str(exc):
            raise
        new = None
    if new is None or not np.all(np.isfinite(new.view(float))):
        return TrajectoryState(
            t=state.t,
            u=state.u,
            step_index=state.step_index,
            stream=state.stream,
            halted=StoppingRecord("overflow", math.inf, t_next),
        )
    return TrajectoryState(
        t=t_next, u=SpectralField(cfg.ctx.n, new), step_index=state.step_index + 1, stream=state.stream
    )


def run_trajectory(cfg: RunConfig) -> TrajectoryRecord:
    """Integrate one path over [0, steps * dt], recording norms, ledger
    increments, monitor hits and snapshots at the configured cadence."""
    lat = cfg.ctx.lattice
    core = _StepCore(cfg)
    state0 = initial_state(cfg)
    stream = state0.stream
    u = state0.u
    steps = cfg.steps
    th2 = cfg.ctx.theta2

    t = np.arange(steps + 1) * cfg.dt
    norm_l2 = np.zeros(steps + 1)
    norm_h1 = np.zeros(steps + 1)
    norm_th2 = np.zeros(steps + 1)
    norm_th2p1 = np.zeros(steps + 1)
    int_th2 = np.zeros(steps + 1)
    int_th2p1 = np.zeros(steps + 1)
    injection = np.zeros(steps + 1)
    mart_l2 = np.zeros(steps)
    inj_l2 = np.zeros(steps)
    mart_h1 = np.zeros(steps)
    inj_h1 = np.zeros(steps)
    adv_h1 = np.zeros(steps)
    chi_series = np.zeros(steps)

    w_th2 = lat.power(2.0 * th2)
    w_th2p1 = lat.power(2.0 * (th2 + 1.0))

    def fill_norms(m: int, coeffs: np.ndarray) -> None:
        e = np.sum(np.abs(coeffs) ** 2, axis=1)
        norm_l2[m] = math.sqrt(2.0 * float(np.sum(e)))
        norm_h1[m] = math.sqrt(2.0 * float(np.sum(core.w1 * e)))
        norm_th2[m] = math.sqrt(2.0 * float(np.sum(w_th2 * e)))
        norm_th2p1[m] = math.sqrt(2.0 * float(np.sum(w_th2p1 * e)))

    fill_norms(0, u.coeffs)
    hits: list[StoppingRecord | None] = [None] * len(cfg.monitors)
    runmax_h1_sq = norm_h1[0] ** 2

    def check_monitors(m: int) -> None:
        for i, mon in enumerate(cfg.monitors):
            if hits[i] is not None:
                continue
            if mon.kind == "tau_R":
                value = norm_h1[m]
            elif mon.kind == "rho_M":
                value = runmax_h1_sq + int_th2p1[m]
            else:
                value = int_th2[m]
            if value >= mon.threshold:
                hits[i] = StoppingRecord(mon.kind, mon.threshold, t[m])

    check_monitors(0)

    cadence = None
    if cfg.snapshot_every is not None:
        cadence = max(1, int(round(cfg.snapshot_every / cfg.dt)))
    snapshots: list[tuple[float, SpectralField]] = []
    if cadence is not None:
        snapshots.append((0.0, u))

    overflow = None
    last = steps
    for m in range(steps):
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                new, stats = core.advance(u, m, norm_h1[m], stream)
        except ValueError as exc:
            # non-finite intermediates inside the dealiased products
            if "finite" not in str(exc):
                raise
            overflow = StoppingRecord("overflow", math.inf, t[m + 1])
            last = m
            break
        finite = bool(np.all(np.isfinite(new.view(float))))
        if finite:
            with np.errstate(over="ignore", invalid="ignore"):
                fill_norms(m + 1, new)
            finite = all(
                math.isfinite(arr[m + 1]) for arr in (norm_l2, norm_h1, norm_th2, norm_th2p1)
            )
        if not finite:
            overflow = StoppingRecord("overflow", math.inf, t[m + 1])
            last = m
            break
        u = SpectralField(cfg.ctx.n, new)
        int_th2[m + 1] = int_th2[m] + 0.5 * cfg.dt * (norm_th2[m] ** 2 + norm_th2[m + 1] ** 2)
        int_th2p1[m + 1] = int_th2p1[m] + 0.5 * cfg.dt * (
            norm_th2p1[m] ** 2 + norm_th2p1[m + 1] ** 2
        )
        injection[m + 1] = injection[m] + stats["inj_l2"]
        mart_l2[m] = stats["mart_l2"]
        inj_l2[m] = stats["inj_l2"]
        mart_h1[m] = stats["mart_h1"]
        inj_h1[m] = stats["inj_h1"]
        adv_h1[m] = stats["adv_h1"]
        chi_series[m] = stats["chi"]
        runmax_h1_sq = max(runmax_h1_sq, norm_h1[m + 1] ** 2)
        check_monitors(m + 1)
        if cadence is not None and ((m + 1) % cadence == 0 or m + 1 == steps):
            snapshots.append((t[m + 1], u))

    end = last + 1
    return TrajectoryRecord(
        cfg=cfg,
        t=t[:end],
        norm_l2=norm_l2[:end],
        norm_h1=norm_h1[:end],
        norm_th2=norm_th2[:end],
        norm_th2p1=norm_th2p1[:end],
        int_diss_th2=int_th2[:end],
        int_diss_th2p1=int_th2p1[:end],
        injection_cum=injection[:end],
        mart_l2=mart_l2[:last],
        inj_l2=inj_l2[:last],
        mart_h1=mart_h1[:last],
        inj_h1=inj_h1[:last],
        adv_h1=adv_h1[:last],
        chi=chi_series[:last],
        hits=tuple(hits),
        overflow=overflow,
        snapshots=tuple(snapshots),
        final_field=u,
    )


def detect_stopping(record: TrajectoryRecord, kind: str, threshold: float) -> float | None:
    """First grid time at which the monitored functional reaches the
    threshold, or None; recomputed from the recorded series."""
    if kind not in MONITOR_KINDS:
        raise ValueError(f"unknown monitor kind {kind!r}")
    if kind == "tau_R":
        series = record.norm_h1
    elif kind == "rho_M":
        series = np.maximum.accumulate(record.norm_h1**2) + record.int_diss_th2p1
    else:
        series = record.int_diss_th2
    crossed = series >= threshold
    if not crossed.any():
        return None
    return float(record.t[int(np.argmax(crossed))])


# ---------------------------------------------------------------------------
# ensembles


def _pool_worker(cfg: RunConfig) -> TrajectoryRecord:
    return run_trajectory(cfg)


def _pool_init(fft_workers: int) -> None:
    set_fft_workers(fft_workers)


def run_ensemble(cfg: RunConfig, size: int, workers: int = 1) -> list[TrajectoryRecord]:
    """Run `size` trajectories with ids 0..size-1.  Records are identical for
    any worker count: streams are keyed by (seed, id) and never shared."""
    if size < 1:
        raise ValueError("ensemble size must be >= 1")
    cfgs = [replace(cfg, trajectory_id=i) for i in range(size)]
    if workers <= 1 or size == 1:
        return [run_trajectory(c) for c in cfgs]
    import os

    per_child = max(1, (os.cpu_count() or 1) // workers)
    with ProcessPoolExecutor(
        max_workers=workers, initializer=_pool_init, initargs=(per_child,)
    ) as pool:
        return list(pool.map(_pool_worker, cfgs, chunksize=max(1, size // (4 * workers))))
