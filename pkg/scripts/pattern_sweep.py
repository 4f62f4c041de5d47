"""Scattering patterns of the 4x8 subarray for a set of steering targets.

Writes one CSV per target into --out and prints the peak location and the
gain relative to a same-size metal plate.
"""

import argparse
from pathlib import Path

import numpy as np

from afris.array import default_config, gain_vs_plate, scatter_pattern


def main():
    ap = argparse.ArgumentParser(description="subarray pattern sweep")
    ap.add_argument("--targets", type=float, nargs="+", default=[0.0, 10.0, 20.0, 30.0])
    ap.add_argument("--freq", type=float, default=3.0e9)
    ap.add_argument("--voltage", type=float, default=7.0)
    ap.add_argument("--bypass", action="store_true", help="amplifier chains disabled")
    ap.add_argument("--out", type=Path, default=Path("results/patterns"))
    args = ap.parse_args()

    args.out.mkdir(parents=True, exist_ok=True)
    angles = np.arange(-900, 901) * 0.1
    for target in args.targets:
        cfg = default_config(amp_voltage=args.voltage, enabled=not args.bypass, target_deg=target)
        pat = scatter_pattern(cfg, 0.0, angles, args.freq)
        peak_deg, peak_db = pat.peak()
        gain = gain_vs_plate(cfg, target, args.freq)
        path = args.out / f"pattern_{target:+05.1f}deg.csv"
        path.write_text(pat.to_csv())
        print(f"target {target:5.1f} deg  peak {peak_deg:6.1f} deg ({peak_db:7.2f} dB)  vs plate {gain:6.2f} dB  -> {path}")


if __name__ == "__main__":
    main()
