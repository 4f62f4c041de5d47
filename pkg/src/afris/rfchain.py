"""Behavioral RF chain models: bandpass filter, cascaded amplifier, 2-bit
phase shifter and the shared combine/amplify/divide path of a subarray.

All device responses are voltage transfer ratios sampled on a frequency
grid. Magnitudes are built from dB anchor tables; phase is only modelled
for the element phase shifter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np


class OutOfRangeError(ValueError):
    """Query outside the validated range of a device model."""


def db_to_voltage(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 20.0)


def voltage_to_db(v):
    return 20.0 * np.log10(np.abs(v))


@dataclass(frozen=True)
class FrequencyGrid:
    samples: np.ndarray

    def __post_init__(self):
        s = np.atleast_1d(np.asarray(self.samples, dtype=float))
        if s.ndim != 1 or s.size == 0:
            raise ValueError("frequency grid must be a non-empty 1-D sequence")
        if not np.all(np.isfinite(s)) or np.any(s <= 0):
            raise ValueError("frequency samples must be finite and > 0 Hz")
        if np.any(np.diff(s) <= 0):
            raise ValueError("frequency samples must be strictly increasing")
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @classmethod
    def linspace(cls, f_start: float, f_stop: float, num: int) -> "FrequencyGrid":
        return cls(np.linspace(f_start, f_stop, num))

    @classmethod
    def single(cls, f: float) -> "FrequencyGrid":
        return cls(np.array([f], dtype=float))

    def __len__(self):
        return self.samples.size

    def __eq__(self, other):
        if not isinstance(other, FrequencyGrid):
            return NotImplemented
        return self.samples.shape == other.samples.shape and bool(
            np.all(self.samples == other.samples)
        )

    __hash__ = None


@dataclass(frozen=True)
class ComplexResponse:
    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if v.shape != (len(self.grid),):
            raise ValueError(
                f"response has {v.size} values for a grid of {len(self.grid)} samples"
            )
        if not np.all(np.isfinite(v)):
            raise ValueError("response values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def identity(cls, grid: FrequencyGrid) -> "ComplexResponse":
        return cls(grid, np.ones(len(grid), dtype=complex))

    @classmethod
    def flat_db(cls, grid: FrequencyGrid, gain_db: float) -> "ComplexResponse":
        return cls(grid, np.full(len(grid), db_to_voltage(gain_db), dtype=complex))

    def magnitude_db(self) -> np.ndarray:
        return voltage_to_db(self.values)


def _check_anchor_table(x, y, what):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or x.shape != y.shape:
        raise ValueError(f"{what}: anchor columns must be equal-length 1-D sequences")
    if x.size < 2:
        raise ValueError(f"{what}: need at least 2 anchors")
    if np.any(np.diff(x) <= 0):
        raise ValueError(f"{what}: anchors must be strictly increasing")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError(f"{what}: anchors must be finite")
    x.setflags(write=False)
    y.setflags(write=False)
    return x, y


@dataclass(frozen=True)
class FilterProfile:
    """Peak-normalized magnitude table of a bandpass filter.

    ``interpolation`` is kept as a tag so profile files stay self-describing;
    only ``"linear-db"`` (dB linear in frequency, ends held constant) exists.
    """

    freqs_hz: np.ndarray
    gains_db: np.ndarray
    interpolation: str = "linear-db"

    def __post_init__(self):
        f, g = _check_anchor_table(self.freqs_hz, self.gains_db, "filter profile")
        if np.any(f <= 0):
            raise ValueError("filter profile: anchor frequencies must be > 0")
        if g.max() != 0.0:
            raise ValueError("filter profile: maximum relative gain must be exactly 0 dB")
        if self.interpolation != "linear-db":
            raise ValueError(f"unknown interpolation rule {self.interpolation!r}")
        object.__setattr__(self, "freqs_hz", f)
        object.__setattr__(self, "gains_db", g)

    @property
    def span(self) -> tuple[float, float]:
        return float(self.freqs_hz[0]), float(self.freqs_hz[-1])

    @classmethod
    def from_csv(cls, path) -> "FilterProfile":
        f, g = _read_anchor_csv(path, "freq_hz")
        return cls(f, g)


# Edge levels follow the element measurements (+8 dB in band, -21 dB at
# 2.6 GHz, -16 dB at 3.4 GHz); outer anchors keep BW_20dB finite. The
# 2.7 GHz point makes the lower skirt steepen toward the passband edge.
DEFAULT_FILTER = FilterProfile(
    freqs_hz=np.array([2.5e9, 2.6e9, 2.7e9, 2.8e9, 3.2e9, 3.4e9, 3.5e9]),
    gains_db=np.array([-40.0, -29.0, -18.0, 0.0, 0.0, -24.0, -35.0]),
)


@dataclass(frozen=True)
class AmpModel:
    """Control-voltage to gain table of the cascaded amplifier pair.

    Gain is linear in dB between anchors. There is no extrapolation: a
    voltage outside ``[v_min, v_max]`` raises :class:`OutOfRangeError`.
    """

    volts: np.ndarray
    gains_db: np.ndarray

    def __post_init__(self):
        v, g = _check_anchor_table(self.volts, self.gains_db, "amplifier model")
        if np.any(np.diff(g) < 0):
            raise ValueError("amplifier model: gain must be non-decreasing in voltage")
        object.__setattr__(self, "volts", v)
        object.__setattr__(self, "gains_db", g)

    @property
    def v_min(self) -> float:
        return float(self.volts[0])

    @property
    def v_max(self) -> float:
        return float(self.volts[-1])

    @classmethod
    def from_csv(cls, path) -> "AmpModel":
        v, g = _read_anchor_csv(path, "volts")
        return cls(v, g)


# Second-stage supply swept 1.0 V .. 7.0 V, first stage fixed at 12 V.
DEFAULT_AMP = AmpModel(volts=np.array([1.0, 7.0]), gains_db=np.array([-1.1, 26.5]))


@dataclass(frozen=True)
class PhaseShifterModel:
    """2-bit element phase control: a 0/90 deg shifter plus a 0/180 deg switch.

    With ``drift`` enabled, the 90 deg bit drifts linearly from
    ``+drift_deg`` at ``f_lo`` to ``-drift_deg`` at ``f_hi`` (95 deg to 85 deg
    across the band for the defaults). The 180 deg switch does not drift.
    """

    insertion_loss_db: float = 0.0
    drift: bool = False
    drift_deg: float = 5.0
    f_lo: float = 2.8e9
    f_hi: float = 3.2e9

    def __post_init__(self):
        if not self.insertion_loss_db >= 0:
            raise ValueError("phase shifter insertion loss must be >= 0 dB")
        if not self.f_hi > self.f_lo:
            raise ValueError("phase drift needs f_hi > f_lo")


@dataclass(frozen=True)
class ChainConfig:
    """Shared filter + amplifier path of one subarray.

    ``loss_db`` is the fixed in-band loss of the active path (filter
    insertion loss and routing). With ``enabled=False`` the filter and
    amplifiers are replaced by a through line of ``bypass_loss_db``.
    """

    filter: FilterProfile = DEFAULT_FILTER
    amp: AmpModel = DEFAULT_AMP
    amp_voltage: float = 7.0
    loss_db: float = 0.65
    enabled: bool = True
    bypass_loss_db: float = 0.0

    def __post_init__(self):
        if not self.amp.v_min <= self.amp_voltage <= self.amp.v_max:
            raise OutOfRangeError(
                f"amp_voltage {self.amp_voltage} V outside amplifier range "
                f"[{self.amp.v_min}, {self.amp.v_max}] V"
            )
        if not self.loss_db >= 0 or not self.bypass_loss_db >= 0:
            raise ValueError("chain losses must be >= 0 dB")


def _read_anchor_csv(path, x_name: str):
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or [c.strip() for c in rows[0]] != [x_name, "gain_db"]:
        raise ValueError(f"{path}: expected header '{x_name},gain_db'")
    xs, ys = [], []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 2:
            raise ValueError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
        try:
            xs.append(float(row[0]))
            ys.append(float(row[1]))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    return np.array(xs), np.array(ys)


def write_anchor_csv(path, xs: Sequence[float], gains_db: Sequence[float], x_name: str):
    lines = [f"{x_name},gain_db"]
    lines += [f"{x!r},{g!r}" for x, g in zip(map(float, xs), map(float, gains_db))]
    Path(path).write_text("\n".join(lines) + "\n")


def filter_response(profile: FilterProfile, grid: FrequencyGrid) -> ComplexResponse:
    """Zero-phase filter response; outside the anchor span the edge level is held."""
    f = grid.samples
    gain_db = np.interp(f, profile.freqs_hz, profile.gains_db)
    # np.interp is exact at the anchors already; keep the lookup explicit so
    # ties never depend on floating-point interpolation weights
    idx = np.searchsorted(profile.freqs_hz, f)
    idx = np.clip(idx, 0, len(profile.freqs_hz) - 1)
    hit = profile.freqs_hz[idx] == f
    gain_db[hit] = profile.gains_db[idx[hit]]
    return ComplexResponse(grid, db_to_voltage(gain_db).astype(complex))


def amp_gain_db(model: AmpModel, voltage: float) -> float:
    if not model.v_min <= voltage <= model.v_max:
        raise OutOfRangeError(
            f"voltage {voltage} V outside amplifier range [{model.v_min}, {model.v_max}] V"
        )
    exact = np.flatnonzero(model.volts == voltage)
    if exact.size:
        return float(model.gains_db[exact[0]])
    return float(np.interp(voltage, model.volts, model.gains_db))


def phase_state_coefficient(model: PhaseShifterModel, code: int, f) -> complex | np.ndarray:
    """Complex reflection coefficient of 2-bit state ``code`` at frequency ``f``.

    ``f`` may be a scalar or an array; the result has the same shape.
    """
    if isinstance(code, bool) or int(code) != code or not 0 <= code <= 3:
        raise ValueError(f"phase code must be one of 0, 1, 2, 3; got {code!r}")
    code = int(code)
    f = np.asarray(f, dtype=float)
    phase_deg = np.full(f.shape, 90.0 * code)
    if model.drift and code & 1:
        frac = (f - model.f_lo) / (model.f_hi - model.f_lo)
        phase_deg = phase_deg + model.drift_deg * (1.0 - 2.0 * frac)
    mag = 10.0 ** (-model.insertion_loss_db / 20.0)
    if not model.drift:
        # exact quarter turns so that code 2 is -1+0j, not -1+1.2e-16j
        out = np.full(f.shape, mag * (1j**code), dtype=complex)
    else:
        out = mag * np.exp(1j * np.deg2rad(phase_deg))
    return complex(out) if out.ndim == 0 else out


def cascade(a: ComplexResponse, b: ComplexResponse) -> ComplexResponse:
    if a.grid != b.grid:
        raise ValueError("cannot cascade responses sampled on different grids")
    return ComplexResponse(a.grid, a.values * b.values)


def chain_response(cfg: ChainConfig, grid: FrequencyGrid) -> ComplexResponse:
    if not cfg.enabled:
        return ComplexResponse.flat_db(grid, -cfg.bypass_loss_db)
    amp = ComplexResponse.flat_db(grid, amp_gain_db(cfg.amp, cfg.amp_voltage) - cfg.loss_db)
    return cascade(filter_response(cfg.filter, grid), amp)
