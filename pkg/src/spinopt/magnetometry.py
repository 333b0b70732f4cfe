"""XY-8 dynamical-decoupling AC magnetometry on a noisy two-level ensemble.

A sensing run prepares a superposition with an ideal pi/2 pulse, applies
repeated XY-8 blocks of pi pulses centered on the zero crossings of the AC
signal g_ac * cos(w_s t) * sigma_z, and reads out the |0> population after an
ideal 3*pi/2 pulse at the end of each block.  Each noise realization draws a
static detuning from the inhomogeneous line and an Ornstein-Uhlenbeck path
for the dynamic detuning.  Pi pulses are rectangular, shaped (two
phase-modulated quadrature fields), or instantaneous-ideal (validation hook).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    DEFAULT_DELTA_FWHM,
    FWHM_TO_SIGMA,
    _GAUSS_HI,
    _GAUSS_LO,
    _cf4_stack,
    _ordered_product,
)
from .fields import ControlField, pm_field, quadratures
from .optimize import DEFAULT_AMP_LIMIT

RECT = "rect"
SHAPED = "shaped"
IDEAL = "ideal"

XY8_AXES = ("x", "y", "x", "y", "y", "x", "y", "x")

DEFAULT_OU_TAU = 20e-6
# Stationary standard deviation sqrt(c * tau / 2) of the dynamic detuning.
DEFAULT_OU_STD = 2.0 * np.pi * 50e3
DEFAULT_G_AC = 2.0 * np.pi * 0.1e6

# Robust pi-pulse found by the surrogate-assisted gate optimizer at the
# reference ensemble settings (100 ns, two PM parameter sets).  Its average
# gate fidelity over the reference noise grid is 0.923, with a flat profile
# (0.91 to 0.99) across the 2*pi*[-10, 10] MHz detuning band.
_SHAPED_PI_AMPLITUDES = (-67919134.2561762, 57744640.35913703)
_SHAPED_PI_DEPTHS = (62705051.01112497, 101957601.14500621)
_SHAPED_PI_FREQS = (0.0, 63140270.21532747)


def default_shaped_pi_field(duration: float = 100e-9, amp_limit: float = DEFAULT_AMP_LIMIT) -> ControlField:
    """Bundled pre-optimized phase-modulated pi pulse (Pauli-X gate)."""
    return pm_field(
        _SHAPED_PI_AMPLITUDES,
        _SHAPED_PI_DEPTHS,
        _SHAPED_PI_FREQS,
        duration,
        amp_limit,
    )


@dataclass(frozen=True)
class NoiseSettings:
    """Static inhomogeneous broadening plus OU dynamic detuning."""

    delta_fwhm: float = DEFAULT_DELTA_FWHM
    tau: float = DEFAULT_OU_TAU
    c: float = 2.0 * DEFAULT_OU_STD**2 / DEFAULT_OU_TAU
    n_realizations: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.c < 0:
            raise ValueError("c must be nonnegative")

    @property
    def stationary_std(self) -> float:
        return float(np.sqrt(self.c * self.tau / 2.0))

    @classmethod
    def from_stationary_std(cls, std, tau=DEFAULT_OU_TAU, **kwargs) -> "NoiseSettings":
        return cls(tau=tau, c=2.0 * std**2 / tau, **kwargs)

    @classmethod
    def disabled(cls, n_realizations: int = 1, seed: int = 0) -> "NoiseSettings":
        return cls(delta_fwhm=0.0, c=0.0, n_realizations=n_realizations, seed=seed)


@dataclass(frozen=True)
class AcSignal:
    """Cosine AC signal on sigma_z, zero phase at t = 0."""

    g_ac: float = DEFAULT_G_AC
    omega_s: float = np.pi / 400e-9

    def __post_init__(self):
        if self.g_ac < 0:
            raise ValueError("g_ac must be nonnegative")


@dataclass(frozen=True)
class PulseSequence:
    """Timed XY-8 schedule of pi pulses.

    One block spans 8 * (t_pulse + tau_pulse); pulse k is centered at
    (k + 1/2) * (t_pulse + tau_pulse), a zero crossing of the matched AC
    signal with omega_s = pi / (t_pulse + tau_pulse).
    """

    kind: str
    t_pulse: float
    tau_pulse: float
    n_periods: int
    x_field: ControlField | None = None
    y_field: ControlField | None = None

    @property
    def omega_s(self) -> float:
        return np.pi / (self.t_pulse + self.tau_pulse)

    @property
    def spacing(self) -> float:
        return self.t_pulse + self.tau_pulse

    @property
    def period(self) -> float:
        return 8.0 * self.spacing


def build_xy8(kind, t_pulse, tau_pulse, n_periods, x_field=None, y_field=None) -> PulseSequence:
    """Construct an XY-8 sequence (pulse order X Y X Y Y X Y X per block).

    Rectangular pulses drive a pi rotation in t_pulse (constant quadrature
    pi / (2 t_pulse), i.e. Bloch rotation rate pi / t_pulse).  Shaped pulses
    take their quadratures from the supplied phase-modulated field(s); the
    Y pulse reuses the X field with the quadratures swapped onto (y, -x)
    unless a dedicated y_field is given.
    """
    if kind not in (RECT, SHAPED, IDEAL):
        raise ValueError(f"unknown pulse kind {kind!r}")
    if t_pulse <= 0 or tau_pulse <= 0:
        raise ValueError("t_pulse and tau_pulse must be positive")
    if n_periods < 1:
        raise ValueError("n_periods must be at least 1")
    if kind == SHAPED:
        if x_field is None:
            raise ValueError("shaped sequences need an x_field")
        if y_field is None:
            y_field = x_field
        for fld in (x_field, y_field):
            if abs(fld.duration - t_pulse) > 1e-15:
                raise ValueError("shaped field duration must equal t_pulse")
    else:
        x_field = None
        y_field = None
    return PulseSequence(
        kind=kind,
        t_pulse=float(t_pulse),
        tau_pulse=float(tau_pulse),
        n_periods=int(n_periods),
        x_field=x_field,
        y_field=y_field,
    )


def ou_step(delta_d, dt, tau, c, rng: np.random.Generator):
    """One exact Ornstein-Uhlenbeck update over dt (scalar or array state)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    decay = np.exp(-dt / tau)
    scale = np.sqrt(c * tau / 2.0 * (1.0 - decay * decay))
    noise = rng.standard_normal(np.shape(delta_d))
    return delta_d * decay + scale * noise


def ideal_phase(g_ac, omega_s, t):
    """Closed form of int_0^t g_ac |cos(omega_s u)| du, piecewise per half-period."""
    if omega_s <= 0:
        raise ValueError("omega_s must be positive")
    t = np.asarray(t, dtype=float)
    half = np.pi / omega_s
    m = np.floor(t / half)
    r = t - m * half
    s = np.sin(omega_s * r)
    partial = np.where(omega_s * r <= 0.5 * np.pi, s, 2.0 - s)
    return g_ac * (2.0 * m + partial) / omega_s


@dataclass
class RamseyTrace:
    times: np.ndarray  # block terminals, seconds
    p0_mean: np.ndarray
    p0_stderr: np.ndarray
    pulse_kind: str


@dataclass
class T2Estimate:
    t2: float
    lower_bound: bool  # no decay resolved within the trace; t2 >= last time


# Readout row: <0| exp(-i (3 pi / 4) sigma_y), applied virtually at each block
# terminal.  Prep column: exp(-i (pi / 4) sigma_y) |0>.
_PREP = np.array([np.cos(np.pi / 4), np.sin(np.pi / 4)], dtype=complex)
_READ_ROW = np.array([np.cos(3 * np.pi / 4), -np.sin(3 * np.pi / 4)], dtype=complex)


def _pulse_unitaries(seq, signal, pulse_index, delta_total, n_sub, kappa):
    """Pi-pulse propagators for every realization, shape (R, 2, 2).

    ``delta_total`` holds delta + delta_d per realization; the dynamic part
    is frozen for the pulse duration.
    """
    axis = XY8_AXES[pulse_index % 8]
    t_center = (pulse_index + 0.5) * seq.spacing
    t_start = t_center - 0.5 * seq.t_pulse
    dt = seq.t_pulse / n_sub
    base = np.arange(n_sub) * dt

    def coefficients(t_local):
        if seq.kind == RECT:
            rate = np.pi / (2.0 * seq.t_pulse)  # quadrature of an exact pi pulse
            w1 = np.full(n_sub, rate)
            w2 = np.zeros(n_sub)
        else:
            fld = seq.x_field if axis == "x" else seq.y_field
            w1, w2 = quadratures(fld, t_local)
        if axis == "x":
            hx, hy = kappa * w1, kappa * w2
        else:
            hx, hy = -kappa * w2, kappa * w1
        hz = 0.5 * delta_total[None, :] + signal.g_ac * np.cos(
            signal.omega_s * (t_start + t_local)
        )[:, None]
        return (
            np.broadcast_to(hx[:, None], hz.shape),
            np.broadcast_to(hy[:, None], hz.shape),
            hz,
        )

    h1 = coefficients(base + _GAUSS_LO * dt)
    h2 = coefficients(base + _GAUSS_HI * dt)
    return _ordered_product(_cf4_stack(h1, h2, dt))


def _free_phase(signal, delta_total, t0, t1):
    """Relative z phase accumulated over [t0, t1] with no drive."""
    sig = 2.0 * signal.g_ac / signal.omega_s * (
        np.sin(signal.omega_s * t1) - np.sin(signal.omega_s * t0)
    )
    return delta_total * (t1 - t0) + sig


def simulate_ramsey(
    seq: PulseSequence,
    signal: AcSignal,
    noise: NoiseSettings,
    t_max: float,
    n_steps_per_pulse: int = 50,
    kappa: float = 1.0,
) -> RamseyTrace:
    """Population trace P0(t) at XY-8 block terminals, averaged over noise.

    Per realization: draw a static detuning, evolve the prepared
    superposition through the pulse schedule with the OU detuning updated
    once per pulse/gap segment, and record the readout population at every
    block terminal.  Preparation and readout pulses are ideal.
    """
    if noise.n_realizations < 1:
        raise ValueError("n_realizations must be positive")
    n_blocks = min(seq.n_periods, int(np.floor(t_max / seq.period + 1e-9)))
    if n_blocks < 2:
        raise ValueError("t_max must span at least 2 XY-8 periods")

    rng = np.random.default_rng(noise.seed)
    r = noise.n_realizations
    if noise.delta_fwhm > 0:
        delta = rng.normal(0.0, noise.delta_fwhm * FWHM_TO_SIGMA, r)
    else:
        delta = np.zeros(r)
    if noise.c > 0:
        delta_d = rng.normal(0.0, noise.stationary_std, r)
    else:
        delta_d = np.zeros(r)

    state = np.tile(_PREP, (r, 1))
    times = np.empty(n_blocks)
    p0_mean = np.empty(n_blocks)
    p0_err = np.empty(n_blocks)

    ideal_x = np.array([[0.0, -1.0j], [-1.0j, 0.0]])  # exp(-i pi/2 sigma_x)
    ideal_y = np.array([[0.0, -1.0], [1.0, 0.0]], dtype=complex)  # exp(-i pi/2 sigma_y)

    def advance_free(t0, t1):
        nonlocal delta_d, state
        if t1 <= t0:
            return
        phase = _free_phase(signal, delta + delta_d, t0, t1)
        rot = np.exp(-0.5j * phase)
        state[:, 0] *= rot
        state[:, 1] *= np.conj(rot)
        delta_d = ou_step(delta_d, t1 - t0, noise.tau, noise.c, rng) if noise.c > 0 else delta_d

    half_pulse = 0.0 if seq.kind == IDEAL else 0.5 * seq.t_pulse
    t_now = 0.0
    pulse_index = 0
    for block in range(n_blocks):
        for _ in range(8):
            t_center = (pulse_index + 0.5) * seq.spacing
            advance_free(t_now, t_center - half_pulse)
            if seq.kind == IDEAL:
                axis = XY8_AXES[pulse_index % 8]
                op = ideal_x if axis == "x" else ideal_y
                state = state @ op.T
                t_now = t_center
            else:
                total = delta + delta_d
                pulse_u = _pulse_unitaries(
                    seq, signal, pulse_index, total, n_steps_per_pulse, kappa
                )
                state = np.einsum("rij,rj->ri", pulse_u, state)
                if noise.c > 0:
                    delta_d = ou_step(delta_d, seq.t_pulse, noise.tau, noise.c, rng)
                t_now = t_center + half_pulse
            pulse_index += 1
        t_block = (block + 1) * seq.period
        advance_free(t_now, t_block)
        t_now = t_block
        amp = state @ _READ_ROW
        p0 = np.abs(amp) ** 2
        times[block] = t_block
        p0_mean[block] = p0.mean()
        p0_err[block] = p0.std(ddof=1) / np.sqrt(r) if r > 1 else 0.0
    return RamseyTrace(times=times, p0_mean=p0_mean, p0_stderr=p0_err, pulse_kind=seq.kind)


def estimate_t2(
    times,
    p0,
    envelope_window: float = 0.0,
    min_envelope: float = 1e-3,
) -> T2Estimate:
    """Fit the decay envelope of |2 P0 - 1| to exp(-t / T2).

    With a positive ``envelope_window`` the trace is reduced to the maximum
    of |2 P0 - 1| inside successive windows of that length, which rides the
    Ramsey fringes; points below ``min_envelope`` are dropped before the
    least-squares fit of the log envelope.  If no decay is resolved the
    estimate is flagged as a lower bound with t2 set to the trace length.
    """
    times = np.asarray(times, dtype=float)
    p0 = np.asarray(p0, dtype=float)
    if times.size < 10:
        raise ValueError("trace must contain at least 10 points")
    env = np.abs(2.0 * p0 - 1.0)
    if envelope_window > 0:
        sel_t, sel_e = [], []
        n_win = int(np.ceil(times[-1] / envelope_window))
        for w in range(n_win):
            mask = (times >= w * envelope_window) & (times < (w + 1) * envelope_window)
            if not np.any(mask):
                continue
            i = np.argmax(env[mask])
            sel_t.append(times[mask][i])
            sel_e.append(env[mask][i])
        fit_t = np.asarray(sel_t)
        fit_e = np.asarray(sel_e)
    else:
        fit_t, fit_e = times, env
    keep = fit_e > max(min_envelope, 0.0)
    fit_t, fit_e = fit_t[keep], fit_e[keep]
    if fit_t.size < 3:
        return T2Estimate(t2=float(times[-1]), lower_bound=True)
    slope, _ = np.polyfit(fit_t, np.log(fit_e), 1)
    span = fit_t[-1] - fit_t[0]
    # less than ~2 percent decay across the fitted span is unresolvable
    if slope >= 0 or -1.0 / slope > 50.0 * span:
        return T2Estimate(t2=float(times[-1]), lower_bound=True)
    return T2Estimate(t2=float(-1.0 / slope), lower_bound=False)


def fringe_window(signal: AcSignal, n_points: int = 4, readout_dt: float | None = None) -> float:
    """Envelope window: a few readout intervals, at least one |cos| fringe.

    The accumulated phase 2*chi grows at mean rate 4 g_ac / pi, so one
    envelope fringe of |cos(2 chi)| lasts about pi^2 / (4 g_ac).  Without a
    signal there are no fringes and every point lies on the envelope
    (window 0).
    """
    if signal.g_ac == 0:
        return 0.0
    fringe = np.pi**2 / (4.0 * signal.g_ac)
    if readout_dt is None:
        return fringe
    return max(n_points * readout_dt, fringe)
