"""Physical parameters, simulation grid, and drive-pulse construction.

All rates (kappa, chi, Delta) are stored internally as angular frequencies in
rad/s.  Configuration files may instead give them in "MHz over 2*pi" (the
convention of device tables), in which case the loader applies the 2*pi*1e6
conversion.  Drive envelopes carry units of sqrt(photons/s): the steady-state
intracavity photon number of a single driven resonator is
|eps|^2 * kappa_s / ((Delta +- chi)^2 + kappa_bar^2 / 4).

All parameter objects are immutable after construction and safe to share
across concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
import yaml

__all__ = [
    "ConfigError",
    "ChipParams",
    "SystemParams",
    "TimeGrid",
    "PulseSequence",
    "smoothed_square",
    "load_config",
    "default_config",
    "serialize_config",
    "get_param",
    "set_param",
]

_TWO_PI = 2.0 * math.pi

#: hard limit on dt * (fastest rate); beyond this fixed-step integration of
#: the field and master equations is not trusted.
GRID_RESOLUTION_LIMIT = 0.05


class ConfigError(ValueError):
    """Raised for missing keys, non-physical values, or too-coarse grids."""


@dataclass(frozen=True)
class ChipParams:
    """Per-chip resonator constants, all angular rates in rad/s.

    Attributes
    ----------
    kappa_s : float
        Linewidth contribution of the strongly coupled port (> 0).
    kappa_w : float
        Linewidth contribution of the weakly coupled port (>= 0).
    kappa_i : float
        Intrinsic-loss contribution (>= 0).
    chi : float
        Dispersive shift; may be negative.
    delta : float
        Resonator detuning from the drive tone.
    """

    kappa_s: float
    kappa_w: float
    kappa_i: float
    chi: float
    delta: float

    def __post_init__(self):
        if not self.kappa_s > 0:
            raise ConfigError(f"kappa_s must be > 0, got {self.kappa_s}")
        if self.kappa_w < 0:
            raise ConfigError(f"kappa_w must be >= 0, got {self.kappa_w}")
        if self.kappa_i < 0:
            raise ConfigError(f"kappa_i must be >= 0, got {self.kappa_i}")

    @property
    def kappa_bar(self) -> float:
        """Total linewidth kappa_s + kappa_w + kappa_i."""
        return self.kappa_s + self.kappa_w + self.kappa_i

    @property
    def max_rate(self) -> float:
        """Fastest dynamical rate of the chip, used for grid validation."""
        return max(
            self.kappa_bar,
            abs(self.delta + self.chi),
            abs(self.delta - self.chi),
        )


@dataclass(frozen=True)
class SystemParams:
    """Full two-chip system: chips, link, detection chain, and decoherence.

    ``eta_l`` is the inter-chip *power transmission* (1 = lossless link); the
    commonly quoted inter-chip loss is ``1 - eta_l``.  ``theta`` is the
    homodyne readout quadrature angle in radians; ``None`` means "choose
    automatically from the field solution" (see
    :func:`bouncesim.sme.optimal_readout_angle`).  ``amp_scale`` maps a
    dimensionless drive amplitude onto an envelope amplitude in
    sqrt(photons/s).
    """

    chip1: ChipParams
    chip2: ChipParams
    eta_l: float
    phi: float
    eta_m: float
    theta: Optional[float] = None
    gamma1_q1: float = 0.0
    gamma1_q2: float = 0.0
    gammaphi_q1: float = 0.0
    gammaphi_q2: float = 0.0
    amp_scale: float = 1.0

    def __post_init__(self):
        for name in ("eta_l", "eta_m"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} outside [0,1]: {v}")
        for name in ("gamma1_q1", "gamma1_q2", "gammaphi_q1", "gammaphi_q2"):
            v = getattr(self, name)
            if v < 0:
                raise ConfigError(f"{name} must be >= 0, got {v}")
        if self.amp_scale <= 0:
            raise ConfigError(f"amp_scale must be > 0, got {self.amp_scale}")

    @property
    def max_rate(self) -> float:
        return max(self.chip1.max_rate, self.chip2.max_rate)


@dataclass(frozen=True)
class TimeGrid:
    """Uniformly sampled time axis, ``n_samples`` points spaced ``dt``."""

    dt: float
    n_samples: int

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt must be > 0, got {self.dt}")
        if self.n_samples < 2:
            raise ConfigError(f"n_samples must be >= 2, got {self.n_samples}")

    @property
    def duration(self) -> float:
        return self.dt * (self.n_samples - 1)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_samples) * self.dt

    def validate_rates(self, params: SystemParams) -> None:
        """Check that the grid resolves the fastest system rate."""
        product = self.dt * params.max_rate
        if product >= GRID_RESOLUTION_LIMIT:
            raise ConfigError(
                f"grid too coarse: dt * max_rate = {product:.3g} >= "
                f"{GRID_RESOLUTION_LIMIT}"
            )


@dataclass(frozen=True)
class PulseSequence:
    """Strong-port and weak-port drive envelopes on a shared grid.

    Both envelopes carry units of sqrt(photons/s).  For Fourier-domain field
    solutions the envelopes must vanish at the first and last grid sample
    (the cavities start and end undriven).
    """

    grid: TimeGrid
    eps_s: np.ndarray
    eps_w: np.ndarray
    amplitude: float = 0.0
    plateau: float = 0.0
    rise: float = 0.0

    def __post_init__(self):
        eps_s = np.asarray(self.eps_s, dtype=complex)
        eps_w = np.asarray(self.eps_w, dtype=complex)
        object.__setattr__(self, "eps_s", eps_s)
        object.__setattr__(self, "eps_w", eps_w)
        n = self.grid.n_samples
        if eps_s.shape != (n,) or eps_w.shape != (n,):
            raise ConfigError(
                f"envelope shapes {eps_s.shape}, {eps_w.shape} do not match "
                f"grid length {n}"
            )

    def edges_are_zero(self, rtol: float = 1e-6) -> bool:
        """True if the drives vanish where causality requires it.

        The strong drive must vanish at both grid edges; the weak drive only
        at the first sample (a synthesized compensation pulse may carry a
        truncated ring-down tail at the final sample, which cannot affect
        any output inside the simulated window).
        """
        scale = max(np.abs(self.eps_s).max(), np.abs(self.eps_w).max(), 1e-300)
        edge = max(
            abs(self.eps_s[0]), abs(self.eps_s[-1]), abs(self.eps_w[0])
        )
        return edge <= rtol * scale

    def with_weak(self, eps_w: np.ndarray) -> "PulseSequence":
        return replace(self, eps_w=np.asarray(eps_w, dtype=complex))


def smoothed_square(
    amplitude: complex,
    plateau: float,
    rise: float,
    grid: TimeGrid,
    delay: float = 0.0,
) -> np.ndarray:
    """Square pulse with half-cosine rise and fall edges.

    The envelope rises from 0 over ``rise`` seconds, holds ``amplitude`` for
    ``plateau`` seconds, and falls symmetrically; it is zero elsewhere.
    ``rise = 0`` degenerates to an exact rectangular pulse.

    Raises
    ------
    ConfigError
        If the pulse does not fit on the grid.
    """
    if plateau < 0 or rise < 0 or delay < 0:
        raise ConfigError("plateau, rise, and delay must be >= 0")
    if delay + plateau + 2 * rise > grid.duration:
        raise ConfigError(
            f"pulse length {delay + plateau + 2 * rise:.3g} s exceeds grid "
            f"duration {grid.duration:.3g} s"
        )
    t = grid.times
    env = np.zeros(grid.n_samples, dtype=complex)
    t0 = delay
    t1 = delay + rise
    t2 = t1 + plateau
    t3 = t2 + rise
    if rise > 0:
        up = (t >= t0) & (t < t1)
        env[up] = 0.5 * (1.0 - np.cos(np.pi * (t[up] - t0) / rise))
        down = (t >= t2) & (t < t3)
        env[down] = 0.5 * (1.0 + np.cos(np.pi * (t[down] - t2) / rise))
    flat = (t >= t1) & (t < t2)
    env[flat] = 1.0
    return amplitude * env


# --------------------------------------------------------------------------
# configuration loading

_CHIP_RATE_KEYS = ("kappa_s", "kappa_w", "kappa_i", "chi", "delta")


def _chip_from_dict(d: dict, label: str) -> ChipParams:
    vals = {}
    for key in _CHIP_RATE_KEYS:
        if key in d:
            vals[key] = float(d[key])
        elif key + "_mhz" in d:
            # table convention: value is rate / 2pi in MHz
            vals[key] = float(d[key + "_mhz"]) * _TWO_PI * 1e6
        else:
            raise ConfigError(f"missing key {label}.{key} (or {key}_mhz)")
    return ChipParams(**vals)


def _decay_rate(d: dict, rate_key: str, time_key: str, scale: float) -> float:
    """Read a decoherence rate either directly (1/s) or as a time in us."""
    if rate_key in d:
        return float(d[rate_key])
    if time_key in d:
        return scale / (float(d[time_key]) * 1e-6)
    return 0.0


def load_config(source) -> tuple[SystemParams, TimeGrid, PulseSequence]:
    """Load and validate a configuration document.

    Parameters
    ----------
    source : str | dict
        Path to a YAML document, or an equivalent already-parsed mapping.
        Required sections: ``system`` (with ``chip1``, ``chip2``, ``eta_l``,
        ``phi``, ``eta_m``), ``grid`` (``dt_ns``, ``n_samples``) and
        ``pulse`` (``amplitude``, ``plateau_ns``, ``rise_ns``).  Chip rates
        accept either ``<name>`` in rad/s or ``<name>_mhz`` as rate/2pi in
        MHz.  Decoherence accepts ``gamma1_qN`` / ``gammaphi_qN`` in 1/s or
        ``t1_qN_us`` / ``tphi_qN_us``.

    Returns
    -------
    (SystemParams, TimeGrid, PulseSequence)
    """
    if isinstance(source, (str, bytes)):
        with open(source) as fh:
            doc = yaml.safe_load(fh)
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ConfigError("configuration document must be a mapping")

    for section in ("system", "grid", "pulse"):
        if section not in doc:
            raise ConfigError(f"missing section '{section}'")
    sys_d = doc["system"]
    for key in ("chip1", "chip2", "eta_l", "phi", "eta_m"):
        if key not in sys_d:
            raise ConfigError(f"missing key system.{key}")

    theta = sys_d.get("theta", None)
    if isinstance(theta, str):
        if theta != "auto":
            raise ConfigError(f"theta must be a number or 'auto', got {theta!r}")
        theta = None
    params = SystemParams(
        chip1=_chip_from_dict(sys_d["chip1"], "chip1"),
        chip2=_chip_from_dict(sys_d["chip2"], "chip2"),
        eta_l=float(sys_d["eta_l"]),
        phi=float(sys_d["phi"]),
        eta_m=float(sys_d["eta_m"]),
        theta=None if theta is None else float(theta),
        gamma1_q1=_decay_rate(sys_d, "gamma1_q1", "t1_q1_us", 1.0),
        gamma1_q2=_decay_rate(sys_d, "gamma1_q2", "t1_q2_us", 1.0),
        gammaphi_q1=_decay_rate(sys_d, "gammaphi_q1", "tphi_q1_us", 1.0),
        gammaphi_q2=_decay_rate(sys_d, "gammaphi_q2", "tphi_q2_us", 1.0),
        amp_scale=float(sys_d.get("amp_scale", 1.0)),
    )

    grid_d = doc["grid"]
    if "dt" in grid_d:
        dt = float(grid_d["dt"])
    elif "dt_ns" in grid_d:
        dt = float(grid_d["dt_ns"]) * 1e-9
    else:
        raise ConfigError("missing key grid.dt (s) or grid.dt_ns")
    if "n_samples" not in grid_d:
        raise ConfigError("missing key grid.n_samples")
    grid = TimeGrid(dt=dt, n_samples=int(grid_d["n_samples"]))
    grid.validate_rates(params)

    pulse_d = doc["pulse"]

    def _time(key):
        if key in pulse_d:
            return float(pulse_d[key])
        if key + "_ns" in pulse_d:
            return float(pulse_d[key + "_ns"]) * 1e-9
        raise ConfigError(f"missing key pulse.{key} (s) or pulse.{key}_ns")

    amplitude = complex(pulse_d.get("amplitude", 0.0))
    plateau = _time("plateau")
    rise = _time("rise")
    delay = float(pulse_d.get("delay", pulse_d.get("delay_ns", 0.0) * 1e-9))
    eps_s = smoothed_square(
        amplitude * params.amp_scale, plateau, rise, grid, delay=delay
    )
    pulses = PulseSequence(
        grid=grid,
        eps_s=eps_s,
        eps_w=np.zeros(grid.n_samples, dtype=complex),
        amplitude=abs(amplitude),
        plateau=plateau,
        rise=rise,
    )
    return params, grid, pulses


def default_config() -> dict:
    """Baseline configuration for the measured two-chip device.

    Total linewidths are kappa/2pi = 3.01 MHz and 4.53 MHz with a weakly
    coupled compensation port and small intrinsic loss on each chip;
    dispersive shifts chi/2pi = -335 kHz on both.  Line transmission 88.2%
    (11.8% loss), measurement efficiency 50%, and T1 = 9 us on the
    first-chip qubit.  Pass the returned mapping to :func:`load_config`, or
    mutate a copy first.
    """
    return {
        "system": {
            "chip1": {
                "kappa_s_mhz": 2.99,
                "kappa_w_mhz": 0.01,
                "kappa_i_mhz": 0.01,
                "chi_mhz": -0.335,
                "delta_mhz": 0.0,
            },
            "chip2": {
                "kappa_s_mhz": 4.40,
                "kappa_w_mhz": 0.12,
                "kappa_i_mhz": 0.01,
                "chi_mhz": -0.335,
                "delta_mhz": 0.0,
            },
            "eta_l": 0.882,
            "phi": 0.0,
            "eta_m": 0.5,
            "theta": "auto",
            "t1_q1_us": 9.0,
            "t1_q2_us": 15.0,
            "tphi_q1_us": 100.0,
            "tphi_q2_us": 100.0,
            "amp_scale": 5.0e3,
        },
        "grid": {"dt_ns": 0.5, "n_samples": 2001},
        "pulse": {"amplitude": 1.0, "plateau_ns": 260.0, "rise_ns": 20.0},
    }


def serialize_config(
    params: SystemParams, grid: TimeGrid, pulses: PulseSequence
) -> dict:
    """Inverse of :func:`load_config`, emitting exact SI-unit values.

    Numeric fields survive a serialize/load round trip bit-exactly because no
    unit conversion is applied on output.
    """

    def chip(c: ChipParams) -> dict:
        return {k: getattr(c, k) for k in _CHIP_RATE_KEYS}

    return {
        "system": {
            "chip1": chip(params.chip1),
            "chip2": chip(params.chip2),
            "eta_l": params.eta_l,
            "phi": params.phi,
            "eta_m": params.eta_m,
            "theta": "auto" if params.theta is None else params.theta,
            "gamma1_q1": params.gamma1_q1,
            "gamma1_q2": params.gamma1_q2,
            "gammaphi_q1": params.gammaphi_q1,
            "gammaphi_q2": params.gammaphi_q2,
            "amp_scale": params.amp_scale,
        },
        "grid": {"dt": grid.dt, "n_samples": grid.n_samples},
        "pulse": {
            "amplitude": pulses.amplitude,
            "plateau": pulses.plateau,
            "rise": pulses.rise,
        },
    }


# --------------------------------------------------------------------------
# named-parameter access, used by the compensation-pulse optimizer

def get_param(params: SystemParams, name: str) -> float:
    """Read a (possibly dotted) scalar field, e.g. ``'chip2.kappa_w'``."""
    obj = params
    for part in name.split("."):
        obj = getattr(obj, part)
    return obj


def set_param(params: SystemParams, name: str, value: float) -> SystemParams:
    """Return a copy of ``params`` with one dotted scalar field replaced."""
    parts = name.split(".")
    if len(parts) == 1:
        return replace(params, **{name: value})
    if len(parts) == 2 and parts[0] in ("chip1", "chip2"):
        chip = replace(getattr(params, parts[0]), **{parts[1]: value})
        return replace(params, **{parts[0]: chip})
    raise ValueError(f"unknown parameter name {name!r}")
