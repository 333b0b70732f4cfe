"""Parameterized control fields for driving a two-level spin.

Two basis families are supported: a standard Fourier basis (SFB), where each
parameter set is an amplitude-modulated cosine split between the two
rotating-frame quadratures, and a phase-modulated (PM) basis, where each set
is a carrier with sinusoidal phase modulation.  Amplitudes follow the lab
convention: a single constant set of amplitude ``a`` drives the x quadrature
at ``a / 2``, so its Bloch rotation rate is ``a``.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

SFB = "sfb"
PM = "pm"

# Frequency-like parameters are kept within [0, FREQ_CAP_CYCLES * 2*pi / T]
# and phases within [0, 2*pi] by enforce_amplitude_constraint.
FREQ_CAP_CYCLES = 5.0


class InvalidFieldError(ValueError):
    """Control-field parameters are malformed or non-finite."""


def _vector(x, name):
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise InvalidFieldError(f"{name} must be a scalar or 1-d sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidFieldError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class ControlField:
    """A pulse built from ``n_sets`` parameter sets on one basis.

    PM sets use (amplitudes, mod_depths, mod_freqs) = (a_j, b_j, nu_j); SFB
    sets use (amplitudes, freqs, phases, quad_angles) = (a_j, omega_j, phi_j,
    varphi_j).  All rates are angular (rad/s), durations are seconds.
    """

    basis: str
    amplitudes: np.ndarray
    duration: float
    amp_limit: float
    mod_depths: np.ndarray | None = None
    mod_freqs: np.ndarray | None = None
    freqs: np.ndarray | None = None
    phases: np.ndarray | None = None
    quad_angles: np.ndarray | None = None

    def __post_init__(self):
        if self.basis not in (SFB, PM):
            raise InvalidFieldError(f"unknown basis {self.basis!r}")
        amps = _vector(self.amplitudes, "amplitudes")
        object.__setattr__(self, "amplitudes", amps)
        if not (np.isfinite(self.duration) and self.duration > 0):
            raise InvalidFieldError("duration must be positive and finite")
        if not (np.isfinite(self.amp_limit) and self.amp_limit > 0):
            raise InvalidFieldError("amp_limit must be positive and finite")
        n = amps.size
        if self.basis == PM:
            needed = {"mod_depths": self.mod_depths, "mod_freqs": self.mod_freqs}
        else:
            needed = {
                "freqs": self.freqs,
                "phases": self.phases,
                "quad_angles": self.quad_angles,
            }
        for name, value in needed.items():
            if value is None:
                raise InvalidFieldError(f"{self.basis} basis requires {name}")
            vec = _vector(value, name)
            if vec.size != n:
                raise InvalidFieldError(
                    f"{name} has {vec.size} entries, expected {n}"
                )
            object.__setattr__(self, name, vec)

    @property
    def n_sets(self) -> int:
        return self.amplitudes.size


def pm_field(amplitudes, mod_depths, mod_freqs, duration, amp_limit) -> ControlField:
    return ControlField(
        basis=PM,
        amplitudes=amplitudes,
        duration=duration,
        amp_limit=amp_limit,
        mod_depths=mod_depths,
        mod_freqs=mod_freqs,
    )


def sfb_field(amplitudes, freqs, phases, quad_angles, duration, amp_limit) -> ControlField:
    return ControlField(
        basis=SFB,
        amplitudes=amplitudes,
        duration=duration,
        amp_limit=amp_limit,
        freqs=freqs,
        phases=phases,
        quad_angles=quad_angles,
    )


def constant_drive(rotation_rate, duration, amp_limit) -> ControlField:
    """Constant x drive with the given Bloch rotation rate (quadrature rate/2)."""
    return pm_field([rotation_rate], [0.0], [0.0], duration, amp_limit)


def quadratures(field: ControlField, t):
    """Rotating-frame quadratures (Omega_x, Omega_y) at time(s) ``t``.

    For PM sets the modulation phase is b_j * t * sinc(nu_j * t / pi), which
    equals (b_j / nu_j) * sin(nu_j * t) for nu_j != 0 and tends to b_j * t as
    nu_j -> 0.
    """
    t_arr = np.asarray(t, dtype=float)
    tt = t_arr[..., None]
    half = 0.5 * field.amplitudes
    if field.basis == PM:
        phase = field.mod_depths * tt * np.sinc(field.mod_freqs * tt / np.pi)
        wx = np.sum(half * np.cos(phase), axis=-1)
        wy = np.sum(half * np.sin(phase), axis=-1)
    else:
        env = half * np.cos(field.freqs * tt + field.phases)
        wx = np.sum(env * np.cos(field.quad_angles), axis=-1)
        wy = np.sum(env * np.sin(field.quad_angles), axis=-1)
    if t_arr.ndim == 0:
        return float(wx), float(wy)
    return wx, wy


def envelope(field: ControlField, t):
    wx, wy = quadratures(field, t)
    return np.hypot(wx, wy)


def peak_amplitude(field: ControlField, n_grid: int = 2001) -> float:
    """Max of sqrt(Omega_x^2 + Omega_y^2) on a dense time grid."""
    ts = np.linspace(0.0, field.duration, n_grid)
    return float(np.max(envelope(field, ts)))


def enforce_amplitude_constraint(field: ControlField, n_grid: int = 2001) -> ControlField:
    """Clamp frequency/phase parameters and rescale amplitudes to the limit.

    Frequencies are clamped into [0, 5 * 2*pi / T] and phases into [0, 2*pi].
    If the dense-grid peak envelope exceeds amp_limit, every amplitude is
    scaled by amp_limit / peak; the envelope is linear in the amplitudes, so
    the rescaled peak equals amp_limit exactly.
    """
    freq_cap = FREQ_CAP_CYCLES * 2.0 * np.pi / field.duration
    updates = {}
    if field.basis == PM:
        clamped = {
            "mod_depths": np.clip(field.mod_depths, 0.0, freq_cap),
            "mod_freqs": np.clip(field.mod_freqs, 0.0, freq_cap),
        }
    else:
        clamped = {
            "freqs": np.clip(field.freqs, 0.0, freq_cap),
            "phases": np.clip(field.phases, 0.0, 2.0 * np.pi),
            "quad_angles": np.clip(field.quad_angles, 0.0, 2.0 * np.pi),
        }
    for name, value in clamped.items():
        if not np.array_equal(value, getattr(field, name)):
            updates[name] = value
    candidate = dataclasses.replace(field, **updates) if updates else field
    peak = peak_amplitude(candidate, n_grid)
    if peak > candidate.amp_limit:
        updates["amplitudes"] = candidate.amplitudes * (candidate.amp_limit / peak)
    if not updates:
        return field
    return dataclasses.replace(field, **updates)
