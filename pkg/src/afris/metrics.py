"""Filtering figures of merit over amplitude curves, and the DC power budget."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .array import ArrayConfig, gain_vs_plate
from .rfchain import FrequencyGrid


class UnboundedBandwidthError(ValueError):
    """The curve never drops far enough below its peak on one side."""


@dataclass(frozen=True)
class AmplitudeCurve:
    """Amplitude response in dB on a frequency grid.

    The maximum must sit away from both grid ends. Several samples may share
    the maximum only if they are contiguous (a flat-topped passband).
    """

    grid: FrequencyGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(self.grid),):
            raise ValueError("curve values must match the grid length")
        if not np.all(np.isfinite(v)):
            raise ValueError("curve values must be finite")
        peak_idx = np.flatnonzero(v == v.max())
        if peak_idx[0] == 0 or peak_idx[-1] == v.size - 1:
            raise ValueError("curve maximum lies on the grid boundary")
        if peak_idx[-1] - peak_idx[0] + 1 != peak_idx.size:
            raise ValueError("curve has several separated global maxima")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_arrays(cls, freqs_hz, values_db) -> "AmplitudeCurve":
        return cls(FrequencyGrid(np.asarray(freqs_hz, dtype=float)), values_db)

    @property
    def peak_db(self) -> float:
        return float(self.values.max())

    def _plateau(self):
        idx = np.flatnonzero(self.values == self.values.max())
        return int(idx[0]), int(idx[-1])


def _crossing(f, v, level, start, step):
    # walk outward from the peak; the first sample at or below level brackets
    # the crossing nearest the peak
    j = start + step
    while 0 <= j < v.size:
        if v[j] <= level:
            inner = j - step
            if v[j] == level:
                return float(f[j])
            t = (level - v[inner]) / (v[j] - v[inner])
            return float(f[inner] + t * (f[j] - f[inner]))
        j += step
    side = "left" if step < 0 else "right"
    raise UnboundedBandwidthError(f"no {side} crossing {v.max() - level:g} dB below peak")


def band_edges(curve: AmplitudeCurve, n_db: float) -> tuple[float, float]:
    if not n_db > 0:
        raise ValueError("n must be > 0 dB")
    f = curve.grid.samples
    v = curve.values
    level = curve.peak_db - n_db
    lo, hi = curve._plateau()
    return _crossing(f, v, level, lo, -1), _crossing(f, v, level, hi, +1)


def bandwidth_ndb(curve: AmplitudeCurve, n_db: float) -> float:
    left, right = band_edges(curve, n_db)
    return right - left


def rectangle_coefficient(curve: AmplitudeCurve) -> float:
    """K20dB = BW_20dB / BW_3dB; 1 for an ideal brick-wall response."""
    return bandwidth_ndb(curve, 20.0) / bandwidth_ndb(curve, 3.0)


def center_frequency(curve: AmplitudeCurve) -> float:
    left, right = band_edges(curve, 3.0)
    return 0.5 * (left + right)


def q_factor(curve: AmplitudeCurve) -> float:
    left, right = band_edges(curve, 3.0)
    return 0.5 * (left + right) / (right - left)


def array_amplitude_curve(config: ArrayConfig, target_deg: float, grid: FrequencyGrid) -> AmplitudeCurve:
    """Plate-relative gain toward ``target_deg`` across ``grid`` (codes held fixed)."""
    vals = [gain_vs_plate(config, target_deg, float(f)) for f in grid.samples]
    return AmplitudeCurve(grid, np.array(vals))


METRICS_HEADER = "voltage_v,angle_deg,bw3db_hz,bw20db_hz,k20db,q"


def metrics_row(voltage_v: float, angle_deg: float, curve: AmplitudeCurve) -> str:
    bw3 = bandwidth_ndb(curve, 3.0)
    bw20 = bandwidth_ndb(curve, 20.0)
    return f"{voltage_v:.6g},{angle_deg:.6g},{bw3:.6g},{bw20:.6g},{bw20 / bw3:.6g},{q_factor(curve):.6g}"


@dataclass(frozen=True)
class PowerConfig:
    """DC supply budget.

    ``diode_current_a`` is the per-diode share of the element bias: the three
    PIN diodes of an element together draw 30 mA at 1.33 V (39.9 mW), so the
    default is 10 mA per diode.
    """

    elements: int = 8
    diodes_per_element: int = 3
    diode_voltage_v: float = 1.33
    diode_current_a: float = 0.010
    amp_stages: tuple[tuple[float, float], ...] = ((12.0, 0.035), (7.0, 0.015))
    chains: int = 1

    def __post_init__(self):
        scalars = (self.elements, self.diodes_per_element, self.diode_voltage_v, self.diode_current_a, self.chains)
        if any(x < 0 for x in scalars) or any(x < 0 for st in self.amp_stages for x in st):
            raise ValueError("power configuration values must be >= 0")


@dataclass(frozen=True)
class PowerBreakdown:
    total_mw: float
    elements_mw: float
    chains_mw: float
    per_element_mw: float
    per_chain_mw: float


def _q(x) -> Fraction:
    # decimal literal of the float, so 1.33 means exactly 133/100
    return Fraction(repr(float(x)))


def power_consumption(cfg: PowerConfig) -> PowerBreakdown:
    per_element = cfg.diodes_per_element * _q(cfg.diode_voltage_v) * _q(cfg.diode_current_a) * 1000
    per_chain = sum((_q(v) * _q(i) for v, i in cfg.amp_stages), Fraction(0)) * 1000
    elements = cfg.elements * per_element
    chains = cfg.chains * per_chain
    return PowerBreakdown(
        total_mw=float(elements + chains),
        elements_mw=float(elements),
        chains_mw=float(chains),
        per_element_mw=float(per_element),
        per_chain_mw=float(per_chain),
    )
