"""Run the five link presets and print a table of link SNR and Monte Carlo results.

    python3 scripts/reproduce_cases.py --nbits 1000000 --seed 7
"""

import argparse

from afris.link import CASES, case_scenario, link_report
from afris.modem import run_case


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nbits", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print(f"{'case':>4} {'beam':>5} {'rx':>4} {'amp':>4} {'f_GHz':>6} {'SNR_dB':>8} {'est_dB':>8} {'EVM_%':>7} {'BER':>10}")
    for cid, (beam, rx, amp, f) in sorted(CASES.items()):
        link = link_report(case_scenario(cid))
        mc = run_case(cid, args.nbits, seed=args.seed)
        print(
            f"{cid:>4} {beam:>5g} {rx:>4g} {'on' if amp else 'off':>4} {f / 1e9:>6.2f} "
            f"{link.snr_db:>8.2f} {mc.snr_est_db:>8.2f} {mc.evm_pct:>7.2f} {mc.ber:>10.3e}"
        )


if __name__ == "__main__":
    main()
