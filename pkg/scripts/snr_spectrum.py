"""SNR versus carrier frequency for a link preset (default: case 3)."""

import argparse
from pathlib import Path

from afris.link import case_scenario, snr_spectrum, spectrum_csv
from afris.rfchain import FrequencyGrid


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--case", type=int, default=3)
    ap.add_argument("--start", type=float, default=2.4e9)
    ap.add_argument("--stop", type=float, default=3.6e9)
    ap.add_argument("--points", type=int, default=121)
    ap.add_argument("--out", type=Path, default=Path("results/snr_spectrum.csv"))
    args = ap.parse_args()

    spec = snr_spectrum(case_scenario(args.case), FrequencyGrid.linspace(args.start, args.stop, args.points))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(spectrum_csv(spec))
    f_best, s_best = max(spec, key=lambda p: p[1])
    print(f"case {args.case}: max SNR {s_best:.2f} dB at {f_best / 1e9:.3f} GHz; wrote {args.out}")
    for f, s in spec[:: max(1, len(spec) // 12)]:
        print(f"  {f / 1e9:6.3f} GHz  {s:7.2f} dB")


if __name__ == "__main__":
    main()
