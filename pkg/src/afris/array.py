"""Sub-connected 2-bit coding array: code synthesis, far-field patterns and
gain relative to an equal-size metallic plate.

Geometry: ``rows`` subarrays stacked along x, each a line of ``cols``
elements along y with pitch ``spacing_m``. Steering happens in the plane
containing the element lines; angles are measured from broadside.

Signal flow of one subarray: every element receives, the combiner sums the
received voltages (1/sqrt(M) normalized), the shared chain filters and
amplifies, the divider splits the result back (1/sqrt(M) again) and every
element re-radiates through its own phase state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .rfchain import (
    ChainConfig,
    FrequencyGrid,
    PhaseShifterModel,
    chain_response,
    phase_state_coefficient,
)

C0 = 299_792_458.0

# Fitted once: 7 V broadside gain over plate = 19.15 dB with the default
# chain (26.5 dB amp, 0.65 dB in-band loss). See calibrate_offset.
DEFAULT_CALIBRATION_OFFSET_DB = -6.7
# Plate-relative targets at broadside, midpoints of the reported ranges.
AFRIS_TARGET_GAIN_DB = 19.15
LOSSY_TARGET_GAIN_DB = -6.7

PEAK_WINDOW_DEG = 10.0
PEAK_STEP_DEG = 0.1


def wavenumber(f):
    return 2.0 * np.pi * np.asarray(f, dtype=float) / C0


@dataclass(frozen=True)
class ArrayGeometry:
    rows: int = 4
    cols: int = 8
    spacing_m: float = 0.045

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError("array needs at least one row and one column")
        if not self.spacing_m > 0:
            raise ValueError("element spacing must be > 0")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class PhaseCodeSequence:
    codes: tuple[int, ...]

    def __post_init__(self):
        codes = tuple(int(c) for c in self.codes)
        if any(c not in (0, 1, 2, 3) for c in codes):
            raise ValueError(f"phase codes must be in 0..3, got {codes}")
        object.__setattr__(self, "codes", codes)

    def __len__(self):
        return len(self.codes)

    @classmethod
    def uniform(cls, n: int, code: int = 0) -> "PhaseCodeSequence":
        return cls((code,) * n)

    def reversed(self) -> "PhaseCodeSequence":
        return PhaseCodeSequence(self.codes[::-1])

    def shifted(self, offset: int) -> "PhaseCodeSequence":
        return PhaseCodeSequence(tuple((c + offset) % 4 for c in self.codes))

    def negated(self) -> "PhaseCodeSequence":
        return PhaseCodeSequence(tuple((-c) % 4 for c in self.codes))


@dataclass(frozen=True)
class ArrayConfig:
    geometry: ArrayGeometry = field(default_factory=ArrayGeometry)
    codes: PhaseCodeSequence | None = None
    chain: ChainConfig = field(default_factory=ChainConfig)
    phase_shifter: PhaseShifterModel = field(default_factory=PhaseShifterModel)
    q: float = 0.0
    calibration_offset_db: float = 0.0

    def __post_init__(self):
        if self.codes is None:
            object.__setattr__(self, "codes", PhaseCodeSequence.uniform(self.geometry.cols))
        if len(self.codes) != self.geometry.cols:
            raise ValueError(
                f"{len(self.codes)} codes given for {self.geometry.cols} columns"
            )
        if not self.q >= 0:
            raise ValueError("element factor exponent q must be >= 0")

    def with_codes(self, codes: PhaseCodeSequence) -> "ArrayConfig":
        return replace(self, codes=codes)


@dataclass(frozen=True)
class ScatterPattern:
    angles: np.ndarray
    values: np.ndarray
    reference: str = "absolute"

    def __post_init__(self):
        a = np.asarray(self.angles, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if a.shape != v.shape or a.ndim != 1:
            raise ValueError("pattern angles and values must be equal-length 1-D arrays")
        if np.any(np.diff(a) <= 0):
            raise ValueError("pattern angles must be strictly increasing")
        if self.reference not in ("absolute", "plate-relative"):
            raise ValueError(f"unknown pattern reference {self.reference!r}")
        object.__setattr__(self, "angles", a)
        object.__setattr__(self, "values", v)

    def peak(self) -> tuple[float, float]:
        i = int(np.argmax(self.values))
        return float(self.angles[i]), float(self.values[i])

    def to_csv(self) -> str:
        lines = ["theta_deg,power_db"]
        lines += [f"{a:.6g},{v:.6g}" for a, v in zip(self.angles, self.values)]
        return "\n".join(lines) + "\n"


def _check_angle(theta_deg):
    theta = np.asarray(theta_deg, dtype=float)
    if np.any(np.abs(theta) > 90.0):
        raise ValueError("angles must lie in [-90, 90] degrees")
    return theta


def _element_factor(theta_deg, q):
    cos = np.clip(np.cos(np.deg2rad(theta_deg)), 0.0, None)
    return cos ** (q / 2.0)


def _to_db(field_values):
    return 20.0 * np.log10(np.maximum(np.abs(field_values), 1e-300))


def synthesize_code(geometry: ArrayGeometry, target_deg: float, f: float) -> PhaseCodeSequence:
    """Quantize the linear steering phase ramp toward ``target_deg`` to 2 bits.

    Each element takes the code nearest (circularly) to its ideal phase; an
    exact half-way tie goes to the smaller of the two code values.
    """
    if not abs(target_deg) < 90.0:
        raise ValueError("steering target must satisfy |target| < 90 degrees")
    n = np.arange(geometry.cols)
    ideal_deg = -np.rad2deg(wavenumber(f) * geometry.spacing_m * n * math.sin(math.radians(target_deg)))
    x = np.mod(ideal_deg, 360.0) / 90.0
    codes = []
    for xi in x:
        lo = math.floor(xi)
        frac = xi - lo
        if frac < 0.5:
            c = lo
        elif frac > 0.5:
            c = lo + 1
        else:
            c = min(lo % 4, (lo + 1) % 4)
        codes.append(c % 4)
    return PhaseCodeSequence(tuple(codes))


def subarray_field(config: ArrayConfig, theta_in, theta_out, f: float):
    """Complex far-field amplitude of one subarray (scalar or array over ``theta_out``)."""
    theta_in = float(_check_angle(theta_in))
    theta_out = _check_angle(theta_out)
    geo = config.geometry
    m = geo.cols
    k = float(wavenumber(f))
    n = np.arange(m)

    h = chain_response(config.chain, FrequencyGrid.single(f)).values[0]

    sin_in = math.sin(math.radians(theta_in))
    c_rx = _element_factor(theta_in, config.q) * np.exp(1j * k * geo.spacing_m * n * sin_in).sum()
    c_rx /= math.sqrt(m)

    states = np.array([phase_state_coefficient(config.phase_shifter, c, f) for c in config.codes.codes])
    sin_out = np.sin(np.deg2rad(theta_out))[..., None]
    steer = np.exp(1j * k * geo.spacing_m * n * sin_out)
    c_tx = _element_factor(theta_out, config.q) * (states * steer).sum(axis=-1) / math.sqrt(m)

    out = h * c_rx * c_tx
    return complex(out) if np.ndim(out) == 0 else out


def scatter_pattern(config: ArrayConfig, theta_in: float, angle_grid, f: float) -> ScatterPattern:
    angles = np.asarray(angle_grid, dtype=float)
    total = config.geometry.rows * subarray_field(config, theta_in, angles, f)
    return ScatterPattern(angles, _to_db(total), "absolute")


def plate_reference(geometry: ArrayGeometry, theta_in: float, angle_grid, f: float, q: float = 0.0) -> ScatterPattern:
    """Pattern of a perfect reflector sampled at the element positions."""
    theta_in = float(_check_angle(theta_in))
    angles = _check_angle(np.asarray(angle_grid, dtype=float))
    k = float(wavenumber(f))
    n = np.arange(geometry.cols)
    sin_sum = math.sin(math.radians(theta_in)) + np.sin(np.deg2rad(angles))[..., None]
    af = np.exp(1j * k * geometry.spacing_m * n * sin_sum).sum(axis=-1)
    total = geometry.rows * _element_factor(theta_in, q) * _element_factor(angles, q) * af
    return ScatterPattern(angles, _to_db(total), "absolute")


def peak_window(target_deg: float) -> np.ndarray:
    lo = max(target_deg - PEAK_WINDOW_DEG, -90.0)
    hi = min(target_deg + PEAK_WINDOW_DEG, 90.0)
    # integer steps keep the grid free of accumulated rounding
    n_lo = math.ceil(round(lo / PEAK_STEP_DEG, 9))
    n_hi = math.floor(round(hi / PEAK_STEP_DEG, 9))
    return np.arange(n_lo, n_hi + 1) * PEAK_STEP_DEG


def gain_vs_plate(config: ArrayConfig, target_deg: float, f: float) -> float:
    """Peak power near ``target_deg`` relative to the plate's broadside peak, dB."""
    window = peak_window(target_deg)
    _, peak_db = scatter_pattern(config, 0.0, window, f).peak()
    plate_db = float(plate_reference(config.geometry, 0.0, [0.0], f, config.q).values[0])
    return peak_db - plate_db + config.calibration_offset_db


def calibrate_offset(config: ArrayConfig, f: float = 3.0e9, target_db: float = AFRIS_TARGET_GAIN_DB) -> float:
    """Additive dB offset making the broadside gain of ``config`` equal ``target_db``."""
    raw = gain_vs_plate(replace(config, calibration_offset_db=0.0), 0.0, f)
    return target_db - raw


def calibrate_bypass_loss(config: ArrayConfig, f: float = 3.0e9, target_db: float = LOSSY_TARGET_GAIN_DB) -> float:
    """Bypass loss putting the lossy (chain disabled) broadside gain at ``target_db``,
    keeping ``config.calibration_offset_db`` fixed."""
    lossless = replace(config, chain=replace(config.chain, enabled=False, bypass_loss_db=0.0))
    loss = gain_vs_plate(lossless, 0.0, f) - target_db
    if loss < -1e-9:
        raise ValueError(f"calibration would need a negative bypass loss ({loss:.3f} dB)")
    return max(loss, 0.0)


def default_config(
    amp_voltage: float = 7.0,
    enabled: bool = True,
    target_deg: float = 0.0,
    design_freq: float = 3.0e9,
    geometry: ArrayGeometry | None = None,
    **chain_overrides,
) -> ArrayConfig:
    """Calibrated 4x8 AF-RIS with codes steering toward ``target_deg`` at ``design_freq``."""
    geometry = geometry or ArrayGeometry()
    chain = ChainConfig(amp_voltage=amp_voltage, enabled=enabled, **chain_overrides)
    return ArrayConfig(
        geometry=geometry,
        codes=synthesize_code(geometry, target_deg, design_freq),
        chain=chain,
        calibration_offset_db=DEFAULT_CALIBRATION_OFFSET_DB,
    )
