"""Symbol-rate QPSK over AWGN.

Randomness comes from numpy's PCG64 (128-bit state, 64-bit outputs) keyed
by ``numpy.random.SeedSequence``, so every run is reproducible from one
integer seed and independent sub-streams are derived with ``spawn``.
Gaussian noise is produced by the Box-Muller transform from PCG64 uniforms
rather than numpy's ziggurat sampler, which keeps the noise definition
explicit and stable across numpy releases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .link import case_scenario, snr_db as link_snr_db

MAX_CONSTELLATION_POINTS = 4096
_INV_SQRT2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class ModemReport:
    snr_est_db: float
    evm_pct: float
    ber: float
    n_bits: int
    bit_errors: int
    constellation: np.ndarray = field(repr=False)

    def to_text(self) -> str:
        return (
            f"snr_est_db={self.snr_est_db:.6f}\n"
            f"evm_pct={self.evm_pct:.6f}\n"
            f"ber={self.ber:.9g}\n"
            f"bit_errors={self.bit_errors}\n"
            f"n_bits={self.n_bits}\n"
        )

    def constellation_csv(self) -> str:
        pts = self.constellation
        lines = ["i,q"] + [f"{z.real:.6g},{z.imag:.6g}" for z in pts]
        return "\n".join(lines) + "\n"


def _as_bits(bits) -> np.ndarray:
    b = np.asarray(bits)
    if b.ndim != 1:
        raise ValueError("bit stream must be 1-D")
    if b.size < 2 or b.size % 2:
        raise ValueError(f"bit stream length must be even and >= 2, got {b.size}")
    if not np.all((b == 0) | (b == 1)):
        raise ValueError("bit stream may only contain 0 and 1")
    return b.astype(np.int8)


def qpsk_modulate(bits) -> np.ndarray:
    """Gray-mapped QPSK, unit average energy: (b0, b1) -> ((1-2 b0) + j(1-2 b1)) / sqrt(2)."""
    b = _as_bits(bits)
    i = 1.0 - 2.0 * b[0::2]
    q = 1.0 - 2.0 * b[1::2]
    return (i + 1j * q) * _INV_SQRT2


def gaussian_pairs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``n`` pairs of independent standard normals via Box-Muller on PCG64 uniforms."""
    rng = np.random.Generator(np.random.PCG64(seed))
    u = rng.random((2, n))
    # 1 - u lies in (0, 1], so the log is finite
    r = np.sqrt(-2.0 * np.log1p(-u[0]))
    theta = 2.0 * np.pi * u[1]
    return r * np.cos(theta), r * np.sin(theta)


def apply_channel(iq, snr_db: float, seed: int) -> np.ndarray:
    """Add circular Gaussian noise of total power 10^(-snr/10) (per-symbol SNR)."""
    iq = np.asarray(iq, dtype=complex)
    if snr_db == math.inf:
        return iq.copy()
    if not math.isfinite(snr_db):
        raise ValueError(f"channel SNR must be finite or +inf, got {snr_db}")
    sigma = math.sqrt(10.0 ** (-snr_db / 10.0) / 2.0)
    zi, zq = gaussian_pairs(iq.size, seed)
    return iq + sigma * (zi + 1j * zq).reshape(iq.shape)


def qpsk_demodulate(iq, reference) -> ModemReport:
    """Sign decisions against the transmitted ``reference`` bits.

    EVM is data-aided (error relative to the transmitted symbols), and the
    SNR estimate is -20 log10(EVM).
    """
    iq = np.asarray(iq, dtype=complex).ravel()
    ref = _as_bits(reference)
    if ref.size != 2 * iq.size:
        raise ValueError(f"reference has {ref.size} bits for {iq.size} symbols")
    decided = np.empty(ref.size, dtype=np.int8)
    decided[0::2] = iq.real < 0
    decided[1::2] = iq.imag < 0
    errors = int(np.count_nonzero(decided != ref))

    ideal = qpsk_modulate(ref)
    evm = math.sqrt(np.mean(np.abs(iq - ideal) ** 2) / np.mean(np.abs(ideal) ** 2))
    snr_est = -20.0 * math.log10(evm) if evm > 0 else math.inf
    return ModemReport(
        snr_est_db=snr_est,
        evm_pct=100.0 * evm,
        ber=errors / ref.size,
        n_bits=int(ref.size),
        bit_errors=errors,
        constellation=iq[:MAX_CONSTELLATION_POINTS].copy(),
    )


def random_bits(n: int, seed) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(seed))
    return rng.integers(0, 2, size=n, dtype=np.int8)


def split_seed(seed: int, n: int = 2) -> list[int]:
    """Derive ``n`` independent 64-bit seeds from one integer seed."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [int(c.generate_state(1, np.uint64)[0]) for c in children]


def simulate(snr_db: float, nbits: int, seed: int) -> ModemReport:
    bits_seed, noise_seed = split_seed(seed)
    bits = random_bits(nbits, bits_seed)
    rx = apply_channel(qpsk_modulate(bits), snr_db, noise_seed)
    return qpsk_demodulate(rx, bits)


def run_case(case_id: int, nbits: int, seed: int, **scenario_overrides) -> ModemReport:
    """Monte-Carlo run of one experiment case at the SNR given by the link budget."""
    scenario = case_scenario(case_id, **scenario_overrides)
    return simulate(link_snr_db(scenario), nbits, seed)
