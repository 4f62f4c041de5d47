"""Amplitude control: chain gain and filter metrics against supply voltage."""

import argparse

import numpy as np

from afris.metrics import AmplitudeCurve, bandwidth_ndb, q_factor, rectangle_coefficient
from afris.rfchain import ChainConfig, FrequencyGrid, chain_response


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--step", type=float, default=1.0)
    args = ap.parse_args()

    grid = FrequencyGrid(np.arange(2400, 3601, 5) * 1e6)
    i0 = int(np.argmin(np.abs(grid.samples - 3.0e9)))
    print(f"{'V':>5} {'G(3GHz)':>9} {'BW3_MHz':>9} {'BW20_MHz':>9} {'K20':>7} {'Q':>7}")
    for v in np.arange(1.0, 7.0 + 1e-9, args.step):
        db = chain_response(ChainConfig(amp_voltage=float(v)), grid).magnitude_db()
        curve = AmplitudeCurve(grid, db)
        print(
            f"{v:5.2f} {db[i0]:9.2f} {bandwidth_ndb(curve, 3) / 1e6:9.2f} "
            f"{bandwidth_ndb(curve, 20) / 1e6:9.2f} {rectangle_coefficient(curve):7.3f} {q_factor(curve):7.3f}"
        )


if __name__ == "__main__":
    main()
