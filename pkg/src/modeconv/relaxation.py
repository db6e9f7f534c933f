"""Euler with strong friction and its nonlinear-diffusion limit on the 1D torus.

With internal energy ``h(rho) = k rho^gamma / (gamma - 1)`` the pressure is
``P(rho) = k rho^gamma`` and the scaled system reads

    rho_t + m_x = 0
    m_t + (m^2 / rho + P(rho) / eps)_x = -m / eps

whose limit as ``eps -> 0`` is ``rho_t = P(rho)_xx``.  The relative energy
between the two is tracked, and the relative entropy is split into the part
where ``rho <= R`` (controlled quadratically) and the rest.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import binom


class SolverError(RuntimeError):
    """A step could not be completed (CFL violation, vacuum, non-finite data)."""


@dataclass(frozen=True)
class EnergyLaw:
    k: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not self.gamma > 1:
            raise ValueError("gamma must exceed 1")

    def h(self, rho):
        return self.k * np.power(rho, self.gamma) / (self.gamma - 1)

    def dh(self, rho):
        return self.k * self.gamma / (self.gamma - 1) * np.power(rho, self.gamma - 1)

    def d2h(self, rho):
        return self.k * self.gamma * np.power(rho, self.gamma - 2)

    def pressure(self, rho):
        return self.k * np.power(rho, self.gamma)

    def dpressure(self, rho):
        return self.k * self.gamma * np.power(rho, self.gamma - 1)


# ---------------------------------------------------------------------------
# relative entropy


def _bregman_kernel(x: np.ndarray, gamma: float) -> np.ndarray:
    """``((1+x)^gamma - 1 - gamma x) / x^2``, accurate near ``x = 0``."""
    x = np.asarray(x, dtype=float)
    if float(gamma).is_integer():
        g = int(gamma)
        # exact polynomial: sum_{i>=2} C(g, i) x^(i-2)
        out = np.zeros_like(x)
        for i in range(g, 1, -1):
            out = out * x + math.comb(g, i)
        return out
    small = np.abs(x) < 1e-3
    out = np.empty_like(x)
    xs = x[small]
    series = np.zeros_like(xs)
    for i in range(10, 1, -1):
        series = series * xs + binom(gamma, i)
    out[small] = series
    xl = x[~small]
    out[~small] = (np.power(1 + xl, gamma) - 1 - gamma * xl) / (xl * xl)
    return out


def rel_entropy(rho, rho_bar, law: EnergyLaw):
    """``h(rho) - h(rho_bar) - h'(rho_bar)(rho - rho_bar)``, elementwise."""
    rho = np.asarray(rho, dtype=float)
    rho_bar = np.asarray(rho_bar, dtype=float)
    if np.any(rho < 0):
        raise ValueError("density must be nonnegative")
    if np.any(rho_bar <= 0):
        raise ValueError("reference density must be positive")
    diff = rho - rho_bar
    x = diff / rho_bar
    val = law.k / (law.gamma - 1) * np.power(rho_bar, law.gamma - 2) * _bregman_kernel(x, law.gamma) * diff * diff
    val = np.maximum(val, 0.0)
    return float(val) if val.ndim == 0 else val


def _quadratic_ratio(rho, rho_bar, law: EnergyLaw):
    """``h(rho | rho_bar) / (rho - rho_bar)^2`` without cancellation."""
    x = (rho - rho_bar) / rho_bar
    return law.k / (law.gamma - 1) * np.power(rho_bar, law.gamma - 2) * _bregman_kernel(x, law.gamma)


# ---------------------------------------------------------------------------
# lemma constants


@dataclass(frozen=True)
class LemmaConstants:
    R: float
    C1: float
    C2: float
    k: float
    gamma: float
    delta_low: float
    M: float
    R_max: float

    def lower_bound(self, rho, rho_bar):
        rho = np.asarray(rho, dtype=float)
        gap = np.abs(rho - np.asarray(rho_bar, dtype=float))
        return np.where(rho <= self.R, self.C1 * gap**2, self.C2 * gap**self.gamma)


SAFETY = 1 - 1e-6
GRID = 512


def lemma_constants(law: EnergyLaw, delta_low: float, M: float, R_max: float = 50.0, grid: int = GRID, attempts: int = 8) -> LemmaConstants:
    """Grid lower estimates of the quadratic and power-law bounds on ``h(rho|rho_bar)``."""
    if not 0 < delta_low < M < R_max:
        raise ValueError("need 0 < delta_low < M < R_max")
    R = M + 1.0
    bars = np.linspace(delta_low, M, grid)
    for _ in range(attempts):
        if R >= R_max:
            break
        rhos = np.linspace(0.0, R, grid)
        rr, bb = np.meshgrid(rhos, bars, indexing="ij")
        keep = rr != bb
        c1 = SAFETY * float(np.min(_quadratic_ratio(rr[keep], bb[keep], law)))
        far = np.linspace(R, R_max, grid + 1)[1:]
        fr, fb = np.meshgrid(far, bars, indexing="ij")
        ratio2 = rel_entropy(fr, fb, law) / np.abs(fr - fb) ** law.gamma
        c2 = SAFETY * float(np.min(ratio2))
        if c1 > 0 and c2 > 0:
            return LemmaConstants(R, c1, c2, law.k, law.gamma, delta_low, M, R_max)
        R += 1.0
    raise SolverError(f"could not find positive constants (last R = {R}, C1 = {c1}, C2 = {c2})")


def check_lemma(consts: LemmaConstants, law: EnergyLaw, samples: int = 10_000, seed: int = 0) -> tuple[float, float]:
    """Smallest slack of both lower bounds on fresh uniform samples."""
    rng = np.random.default_rng(seed)
    bars = rng.uniform(consts.delta_low, consts.M, samples)
    near = rng.uniform(0.0, consts.R, samples)
    far = rng.uniform(consts.R, consts.R_max, samples)
    far = np.where(far > consts.R, far, np.nextafter(consts.R, np.inf))
    s1 = rel_entropy(near, bars, law) - consts.C1 * (near - bars) ** 2
    s2 = rel_entropy(far, bars, law) - consts.C2 * np.abs(far - bars) ** consts.gamma
    return float(s1.min()), float(s2.min())


# ---------------------------------------------------------------------------
# solvers


@dataclass(frozen=True)
class RelaxationState:
    rho: np.ndarray
    momentum: np.ndarray
    eps: float
    time: float = 0.0

    def __post_init__(self):
        if self.rho.shape != self.momentum.shape or self.rho.ndim != 1:
            raise ValueError("rho and momentum must be matching 1D arrays")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def cells(self) -> int:
        return self.rho.size

    @property
    def dx(self) -> float:
        return 1.0 / self.rho.size

    @property
    def mass(self) -> float:
        return float(math.fsum(self.rho) * self.dx)

    @property
    def velocity(self) -> np.ndarray:
        return self.momentum / self.rho


def grid_points(J: int) -> np.ndarray:
    """Cell centres of the unit torus."""
    return (np.arange(J) + 0.5) / J


def cfl_euler(st: RelaxationState, law: EnergyLaw, safety: float = 0.4) -> float:
    speed = np.abs(st.velocity) + np.sqrt(law.dpressure(st.rho) / st.eps)
    return safety * st.dx / float(np.max(speed))


def _rusanov(rho, m, law: EnergyLaw, eps: float):
    u = m / rho
    flux_r = m
    flux_m = m * u + law.pressure(rho) / eps
    speed = np.abs(u) + np.sqrt(law.dpressure(rho) / eps)
    rho_r, m_r = np.roll(rho, -1), np.roll(m, -1)
    fr_r, fm_r = np.roll(flux_r, -1), np.roll(flux_m, -1)
    a = np.maximum(speed, np.roll(speed, -1))
    # interface j + 1/2 between cell j and j + 1
    F_rho = 0.5 * (flux_r + fr_r) - 0.5 * a * (rho_r - rho)
    F_m = 0.5 * (flux_m + fm_r) - 0.5 * a * (m_r - m)
    return F_rho, F_m


def step_euler(st: RelaxationState, law: EnergyLaw, dt: float) -> RelaxationState:
    """One Rusanov step of the convective part, then exact friction decay."""
    if np.any(st.rho <= 0):
        raise SolverError("vacuum in the input state")
    limit = cfl_euler(st, law, safety=0.4)
    if dt > limit * (1 + 1e-12):
        raise SolverError(f"time step {dt:.3g} exceeds the CFL bound {limit:.3g}")
    F_rho, F_m = _rusanov(st.rho, st.momentum, law, st.eps)
    lam = dt / st.dx
    rho = st.rho - lam * (F_rho - np.roll(F_rho, 1))
    m = st.momentum - lam * (F_m - np.roll(F_m, 1))
    if np.any(rho <= 0) or not np.all(np.isfinite(rho)) or not np.all(np.isfinite(m)):
        raise SolverError("step produced vacuum or non-finite values")
    m = m * math.exp(-dt / st.eps)
    return RelaxationState(rho, m, st.eps, st.time + dt)


def advance_euler(st: RelaxationState, law: EnergyLaw, t_end: float, safety: float = 0.4, max_halvings: int = 20) -> RelaxationState:
    """March to ``t_end`` exactly; a rejected step is retried with half the step."""
    while st.time < t_end:
        dt = min(cfl_euler(st, law, safety), t_end - st.time)
        for _ in range(max_halvings + 1):
            try:
                nxt = step_euler(st, law, dt)
                break
            except SolverError:
                dt /= 2
        else:
            raise SolverError(f"step rejected {max_halvings} times at t = {st.time:.6g} (eps = {st.eps})")
        if t_end - nxt.time < 1e-14 * max(1.0, t_end):
            nxt = replace(nxt, time=t_end)
        st = nxt
    return st


def diffusion_dt(rho_bar: np.ndarray, law: EnergyLaw) -> float:
    dx = 1.0 / rho_bar.size
    return dx * dx / (2 * float(np.max(law.dpressure(rho_bar))))


def step_diffusion(rho_bar: np.ndarray, law: EnergyLaw, dt: float) -> np.ndarray:
    """Explicit centred step of ``rho_t = P(rho)_xx`` on the torus."""
    if np.any(rho_bar <= 0):
        raise SolverError("diffusion needs a positive density")
    if dt > diffusion_dt(rho_bar, law) * (1 + 1e-12):
        raise SolverError("time step exceeds the explicit stability bound")
    dx = 1.0 / rho_bar.size
    P = law.pressure(rho_bar)
    flux = (np.roll(P, -1) - P) / dx  # at j + 1/2
    return rho_bar + dt / dx * (flux - np.roll(flux, 1))


def advance_diffusion(rho_bar: np.ndarray, law: EnergyLaw, t0: float, t_end: float, safety: float = 0.9) -> np.ndarray:
    t = t0
    while t < t_end:
        dt = min(safety * diffusion_dt(rho_bar, law), t_end - t)
        rho_bar = step_diffusion(rho_bar, law, dt)
        t += dt
        if t_end - t < 1e-14 * max(1.0, t_end):
            t = t_end
    return rho_bar


def darcy_velocity(rho_bar: np.ndarray, law: EnergyLaw) -> np.ndarray:
    """``-d/dx h'(rho_bar)`` by centred differences."""
    dx = 1.0 / rho_bar.size
    hp = law.dh(rho_bar)
    return -(np.roll(hp, -1) - np.roll(hp, 1)) / (2 * dx)


def relative_energy(st: RelaxationState, rho_bar: np.ndarray, law: EnergyLaw) -> float:
    """``int eps/2 rho |u - u_bar|^2 + h(rho | rho_bar) dx``."""
    if rho_bar.shape != st.rho.shape:
        raise ValueError("grid mismatch between states")
    ubar = darcy_velocity(rho_bar, law)
    rel_m = st.momentum - st.rho * ubar
    kinetic = 0.5 * st.eps * rel_m * rel_m / st.rho
    total = math.fsum(kinetic + rel_entropy(st.rho, rho_bar, law)) * st.dx
    return float(total)


@dataclass(frozen=True)
class EntropySplit:
    trimmed_l2: float
    complement_measure: float
    entropy_total: float
    far_power: float
    chain_holds: bool


def entropy_split(st: RelaxationState, rho_bar: np.ndarray, consts: LemmaConstants, law: EnergyLaw) -> EntropySplit:
    """Split the relative entropy at ``rho <= R`` and check the lower-bound chain."""
    if np.any(rho_bar < consts.delta_low - 1e-12) or np.any(rho_bar > consts.M + 1e-12):
        raise ValueError("reference density leaves [delta_low, M]")
    dx = st.dx
    inside = st.rho <= consts.R
    gap = st.rho - rho_bar
    trimmed = math.fsum(gap[inside] ** 2) * dx
    comp = int(np.count_nonzero(~inside)) * dx
    far = math.fsum(np.abs(gap[~inside]) ** consts.gamma) * dx
    total = math.fsum(rel_entropy(st.rho, rho_bar, law)) * dx
    min_gap = float(np.min(np.abs(gap[~inside]))) if comp else 0.0
    bound = consts.C1 * trimmed + consts.C2 * comp * min_gap**consts.gamma
    chain = total >= consts.C1 * trimmed + consts.C2 * far - 1e-12 and total >= bound - 1e-12
    return EntropySplit(trimmed, comp, total, far, bool(chain))


# ---------------------------------------------------------------------------
# the experiment


@dataclass(frozen=True)
class ExperimentConfig:
    k: float = 1.0
    gamma: float = 2.0
    J: int = 128
    T_final: float = 0.25
    eps_list: tuple[float, ...] = (1 / 4, 1 / 16, 1 / 64)
    dt_safety: float = 0.4
    delta_low: float = 0.5
    M: float = 2.0
    R_max: float = 50.0
    amplitude: float = 0.3
    mode: int = 1
    samples: int = 50
    well_prepared: bool = True

    @property
    def law(self) -> EnergyLaw:
        return EnergyLaw(self.k, self.gamma)


@dataclass(frozen=True)
class EpsRun:
    eps: float
    times: tuple[float, ...]
    psi: tuple[float, ...]
    splits: tuple[EntropySplit, ...]
    mass: tuple[float, ...]

    @property
    def n(self) -> float:
        return 1 / self.eps

    @property
    def sup_psi(self) -> float:
        return max(self.psi)

    @property
    def mass_drift(self) -> float:
        return max(abs(m - self.mass[0]) for m in self.mass) / abs(self.mass[0])


@dataclass(frozen=True)
class ExperimentReport:
    config: ExperimentConfig
    constants: LemmaConstants
    runs: tuple[EpsRun, ...]
    rho_bar_range: tuple[float, float]
    diffusion_mass_drift: float

    def rows(self) -> list[dict]:
        out = []
        for run in self.runs:
            for t, psi, sp, m in zip(run.times, run.psi, run.splits, run.mass):
                out.append(
                    {
                        "time": t,
                        "eps": run.eps,
                        "psi": psi,
                        "entropy_total": sp.entropy_total,
                        "trimmed_l2": sp.trimmed_l2,
                        "complement_measure": sp.complement_measure,
                        "mass": m,
                    }
                )
        return out

    def final_series(self) -> list[tuple[float, float, float]]:
        """``(n = 1/eps, trimmed_l2, complement_measure)`` at the final time."""
        return [(r.n, r.splits[-1].trimmed_l2, r.splits[-1].complement_measure) for r in self.runs]


def initial_density(cfg: ExperimentConfig) -> np.ndarray:
    x = grid_points(cfg.J)
    return 1.0 + cfg.amplitude * np.cos(2 * np.pi * cfg.mode * x)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("MODECONV_THREADS", "1")))
    except ValueError:
        return 1


def relaxation_experiment(cfg: ExperimentConfig = ExperimentConfig()) -> ExperimentReport:
    """Run the diffusion limit once and the Euler system for every ``eps``."""
    eps_list = list(cfg.eps_list)
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps_list must decrease")
    law = cfg.law
    consts = lemma_constants(law, cfg.delta_low, cfg.M, cfg.R_max)
    times = [cfg.T_final * i / cfg.samples for i in range(cfg.samples + 1)]

    bars = [initial_density(cfg)]
    for t0, t1 in zip(times, times[1:]):
        bars.append(advance_diffusion(bars[-1], law, t0, t1))
    lo = min(float(b.min()) for b in bars)
    hi = max(float(b.max()) for b in bars)
    masses = [math.fsum(b) / cfg.J for b in bars]
    drift = max(abs(m - masses[0]) for m in masses) / masses[0]

    def run(eps: float) -> EpsRun:
        rho0 = bars[0].copy()
        m0 = rho0 * darcy_velocity(bars[0], law) if cfg.well_prepared else np.zeros_like(rho0)
        st = RelaxationState(rho0, m0, eps)
        psi, splits, mass = [], [], []
        for t, bar in zip(times, bars):
            try:
                st = advance_euler(st, law, t, cfg.dt_safety)
            except SolverError as exc:
                raise SolverError(f"eps = {eps}: {exc}") from exc
            psi.append(relative_energy(st, bar, law))
            splits.append(entropy_split(st, bar, consts, law))
            mass.append(st.mass)
        return EpsRun(eps, tuple(times), tuple(psi), tuple(splits), tuple(mass))

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        runs = tuple(pool.map(run, eps_list))
    return ExperimentReport(cfg, consts, runs, (lo, hi), drift)


__all__ = [
    "EnergyLaw",
    "LemmaConstants",
    "RelaxationState",
    "EntropySplit",
    "ExperimentConfig",
    "ExperimentReport",
    "EpsRun",
    "SolverError",
    "rel_entropy",
    "lemma_constants",
    "check_lemma",
    "step_euler",
    "advance_euler",
    "step_diffusion",
    "advance_diffusion",
    "diffusion_dt",
    "cfl_euler",
    "darcy_velocity",
    "relative_energy",
    "entropy_split",
    "relaxation_experiment",
    "initial_density",
    "grid_points",
]
