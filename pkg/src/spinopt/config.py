"""Run configuration: JSON schema with unit-suffixed keys.

Every physical quantity in a config file carries its unit in the key name
(``_mhz``, ``_khz``, ``_ns``, ``_us``, ``_rad_ns``); this module owns the
conversions to the library's internal units (angular rad/s and seconds).
``_mhz``/``_khz`` denote ordinary frequencies, converted to angular rates by
2 * pi.  Defaults ship in ``default_config.json`` with the reference values.
"""
from __future__ import annotations

import copy
import json
from importlib import resources

import numpy as np

from .fields import ControlField, pm_field
from .magnetometry import AcSignal, NoiseSettings, default_shaped_pi_field
from .optimize import OptConfig

TWO_PI = 2.0 * np.pi


class ConfigError(ValueError):
    """Malformed, unknown, or unreadable run configuration."""


def rad_s_from_mhz(v):
    return TWO_PI * 1e6 * np.asarray(v, dtype=float)


def rad_s_from_khz(v):
    return TWO_PI * 1e3 * np.asarray(v, dtype=float)


def rad_s_from_rad_ns(v):
    return 1e9 * np.asarray(v, dtype=float)


def s_from_ns(v):
    return 1e-9 * np.asarray(v, dtype=float)


def s_from_us(v):
    return 1e-6 * np.asarray(v, dtype=float)


def mhz_from_rad_s(v):
    return np.asarray(v, dtype=float) / (TWO_PI * 1e6)


def default_config() -> dict:
    text = resources.files("spinopt").joinpath("default_config.json").read_text()
    return json.loads(text)


def _merge(base: dict, override: dict, path: str):
    for key, value in override.items():
        here = f"{path}.{key}" if path else key
        if key not in base:
            raise ConfigError(f"unknown config key: {here}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {here} must be an object")
            _merge(base[key], value, here)
        else:
            base[key] = value


def load_config(path: str | None) -> dict:
    """Defaults overlaid with the user's config file, if any."""
    cfg = copy.deepcopy(default_config())
    if path is None:
        return cfg
    try:
        with open(path) as fh:
            user = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file is not valid JSON: {exc}") from exc
    if not isinstance(user, dict):
        raise ConfigError("config root must be a JSON object")
    _merge(cfg, user, "")
    return cfg


def field_from_config(params: dict, duration: float, amp_limit: float) -> ControlField:
    try:
        return pm_field(
            rad_s_from_rad_ns(params["amplitudes_rad_ns"]),
            rad_s_from_rad_ns(params["mod_depths_rad_ns"]),
            rad_s_from_rad_ns(params["mod_freqs_rad_ns"]),
            duration,
            amp_limit,
        )
    except KeyError as exc:
        raise ConfigError(f"field parameters are missing key {exc}") from exc


def opt_config_from(cfg: dict, seed: int | None = None, **overrides) -> OptConfig:
    o = cfg["optimize"]
    dmin, dmax = o["delta_range_mhz"]
    kwargs = dict(
        method=o["method"],
        objective=o["objective"],
        n_sets=int(o["n_sets"]),
        n_samples=int(o["n_samples"]),
        search_grid=tuple(o["search_grid"]),
        verify_grid=tuple(o["verify_grid"]),
        duration=float(s_from_ns(o["duration_ns"])),
        amp_limit=float(rad_s_from_mhz(o["amp_limit_mhz"])),
        n_steps=int(o["n_steps"]),
        seed=int(cfg["seed"] if seed is None else seed),
        max_model_attempts=int(o["max_model_attempts"]),
        delta_range=(float(rad_s_from_mhz(dmin)), float(rad_s_from_mhz(dmax))),
        kappa_range=tuple(float(x) for x in o["kappa_range"]),
        delta_fwhm=float(rad_s_from_mhz(o["delta_fwhm_mhz"])),
        kappa_fwhm=float(o["kappa_fwhm"]),
        kappa_mean=float(o["kappa_mean"]),
        nm_f_tol=float(o["nm_f_tol"]),
        nm_max_iter=None if o["nm_max_iter"] is None else int(o["nm_max_iter"]),
    )
    kwargs.update(overrides)
    try:
        return OptConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def magnetometry_from(cfg: dict, seed: int | None = None):
    """(rect sequence settings, shaped settings, signal, noise) from config."""
    m = cfg["magnetometry"]
    amp_limit = rad_s_from_mhz(cfg["optimize"]["amp_limit_mhz"])
    rect = {
        "t_pulse": float(s_from_ns(m["rect_pulse_ns"])),
        "tau_pulse": float(s_from_ns(m["rect_gap_ns"])),
    }
    shaped_pulse = float(s_from_ns(m["shaped_pulse_ns"]))
    shaped = {
        "t_pulse": shaped_pulse,
        "tau_pulse": float(s_from_ns(m["shaped_gap_ns"])),
        "x_field": (
            field_from_config(m["shaped_field"], shaped_pulse, float(amp_limit))
            if m.get("shaped_field")
            else default_shaped_pi_field(shaped_pulse, float(amp_limit))
        ),
    }
    omega_rect = np.pi / (rect["t_pulse"] + rect["tau_pulse"])
    omega_shaped = np.pi / (shaped["t_pulse"] + shaped["tau_pulse"])
    if abs(omega_rect - omega_shaped) > 1e-6 * omega_rect:
        raise ConfigError(
            "rectangular and shaped sequences must share one signal frequency"
        )
    signal = AcSignal(g_ac=float(rad_s_from_mhz(m["g_ac_mhz"])), omega_s=omega_rect)
    base_seed = int(cfg["seed"] if seed is None else seed)
    if m["noise_enabled"]:
        std = float(rad_s_from_khz(m["ou_stationary_khz"]))
        tau = float(s_from_us(m["ou_tau_us"]))
        noise = NoiseSettings(
            delta_fwhm=float(rad_s_from_mhz(m["delta_fwhm_mhz"])),
            tau=tau,
            c=2.0 * std**2 / tau,
            n_realizations=int(m["n_realizations"]),
            seed=base_seed,
        )
    else:
        noise = NoiseSettings.disabled(
            n_realizations=int(m["n_realizations"]), seed=base_seed
        )
    run = {
        "t_max": float(s_from_us(m["t_max_us"])),
        "n_steps_per_pulse": int(m["n_steps_per_pulse"]),
    }
    return rect, shaped, signal, noise, run
