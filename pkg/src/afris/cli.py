"""Scenario files, experiment presets and the ``afris`` command line.

Scenario files are flat sectioned ``key = value`` text::

    [array]
    target_deg = 30
    [link]
    freq_hz = 3.0e9
    [sweep]
    kind = pattern

Unknown sections or keys are errors. Every key left out takes its default
and the substitution is logged.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import tempfile
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import erfc

from . import link as _link
from .array import ArrayGeometry, default_config, gain_vs_plate, scatter_pattern, synthesize_code
from .link import CASES, DESIGN_FREQ_HZ, LinkScenario, link_report, snr_spectrum, spectrum_csv
from .metrics import METRICS_HEADER, array_amplitude_curve, metrics_row
from .modem import simulate
from .rfchain import DEFAULT_AMP, FrequencyGrid

log = logging.getLogger("afris")

SWEEP_KINDS = ("pattern", "spectrum", "voltage", "ber")
U64_MAX = 2**64 - 1


class ScenarioError(ValueError):
    pass


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError(f"{s!r} is not a finite number")
    return v


def _int(s):
    f = float(s)
    if f != int(f):
        raise ValueError(f"{s!r} is not an integer")
    return int(f)


def _u64(s):
    v = int(s, 0)
    if not 0 <= v <= U64_MAX:
        raise ValueError(f"{s} is outside the unsigned 64-bit range")
    return v


def _bool(s):
    t = s.strip().lower()
    if t in ("1", "true", "yes", "on", "y"):
        return True
    if t in ("0", "false", "no", "off", "n"):
        return False
    raise ValueError(f"{s!r} is not a boolean")


def _kind(s):
    if s not in SWEEP_KINDS:
        raise ValueError(f"sweep kind must be one of {', '.join(SWEEP_KINDS)}")
    return s


def _at_least_one(v):
    if v < 1:
        raise ValueError("must be >= 1")


def _positive(v):
    if not v > 0:
        raise ValueError("must be > 0")


def _nonneg(v):
    if not v >= 0:
        raise ValueError("must be >= 0")


def _angle(v):
    if not -90.0 <= v <= 90.0:
        raise ValueError("must lie within [-90, 90] degrees")


def _target(v):
    if not abs(v) < 90.0:
        raise ValueError("must satisfy |target| < 90 degrees")


def _amp_voltage(v):
    if not DEFAULT_AMP.v_min <= v <= DEFAULT_AMP.v_max:
        raise ValueError(
            f"outside the amplifier model range [{DEFAULT_AMP.v_min}, {DEFAULT_AMP.v_max}] V"
        )


def _even_bits(v):
    if v < 2 or v % 2:
        raise ValueError("must be an even count >= 2")


# section -> key -> (parser, default, check)
SCHEMA = {
    "array": {
        "rows": (_int, 4, _at_least_one),
        "cols": (_int, 8, _at_least_one),
        "spacing_m": (_float, 0.045, _positive),
        "q": (_float, 0.0, _nonneg),
        "amp_voltage_v": (_float, 7.0, _amp_voltage),
        "chain_enabled": (_bool, True, None),
        "target_deg": (_float, 0.0, _target),
    },
    "link": {
        "freq_hz": (_float, None, _positive),
        "tx_power_dbm": (_float, _link.DEFAULT_TX_POWER_DBM, None),
        "d1_m": (_float, _link.DEFAULT_DISTANCE_M, _positive),
        "d2_m": (_float, _link.DEFAULT_DISTANCE_M, _positive),
        "rx_noise_dbm": (_float, _link.DEFAULT_RX_NOISE_DBM, None),
        "evm_floor_db": (_float, _link.DEFAULT_EVM_FLOOR_DB, _positive),
        "rx_angle_deg": (_float, 0.0, _angle),
    },
    "modem": {
        "nbits": (_int, 100_000, _even_bits),
        "seed": (_u64, 7, None),
    },
    "sweep": {
        "kind": (_kind, None, None),
        "theta_start_deg": (_float, -90.0, _angle),
        "theta_stop_deg": (_float, 90.0, _angle),
        "theta_step_deg": (_float, 0.1, _positive),
        "f_start_hz": (_float, 2.4e9, _positive),
        "f_stop_hz": (_float, 3.6e9, _positive),
        "f_step_hz": (_float, 1.0e7, _positive),
        "v_start": (_float, 1.0, _amp_voltage),
        "v_stop": (_float, 7.0, _amp_voltage),
        "v_step": (_float, 1.0, _positive),
        "angles_deg": (lambda s: tuple(_float(x) for x in s.split(",")), (0.0, 10.0, 20.0, 30.0), None),
        "ebn0_start_db": (_float, 0.0, None),
        "ebn0_stop_db": (_float, 10.0, None),
        "ebn0_step_db": (_float, 2.0, _positive),
    },
}

REQUIRED = {("link", "freq_hz")}


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple):
        return ",".join(_fmt(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _span(start, stop, step):
    """Inclusive arithmetic ladder computed from integer step counts."""
    n = math.floor((stop - start) / step + 1e-9)
    if n < 0:
        raise ScenarioError(f"empty sweep range {start}..{stop}")
    return start + step * np.arange(n + 1)


@dataclass(frozen=True)
class Scenario:
    """Fully resolved scenario: every key of every section has a value
    (``[sweep] kind`` may be None for a plain link + modem run)."""

    values: dict
    case_id: int | None = None

    def get(self, section, key):
        return self.values[section][key]

    def to_text(self) -> str:
        lines = []
        if self.case_id is not None:
            lines.append(f"# preset case {self.case_id}")
        for section, keys in SCHEMA.items():
            lines.append(f"[{section}]")
            for key in keys:
                v = self.values[section][key]
                if v is not None:
                    lines.append(f"{key} = {_fmt(v)}")
        return "\n".join(lines) + "\n"

    def with_values(self, **updates) -> "Scenario":
        """``updates`` keys are ``section__key``."""
        vals = {s: dict(kv) for s, kv in self.values.items()}
        for name, v in updates.items():
            section, key = name.split("__")
            parser, _, check = SCHEMA[section][key]
            if check is not None and v is not None:
                try:
                    check(v)
                except ValueError as exc:
                    raise ScenarioError(f"[{section}] {key}: {exc}") from None
            vals[section][key] = v
        return replace(self, values=vals)

    # -- model builders --------------------------------------------------
    def geometry(self) -> ArrayGeometry:
        a = self.values["array"]
        return ArrayGeometry(rows=a["rows"], cols=a["cols"], spacing_m=a["spacing_m"])

    def array_config(self, amp_voltage=None):
        a = self.values["array"]
        cfg = default_config(
            amp_voltage=a["amp_voltage_v"] if amp_voltage is None else amp_voltage,
            enabled=a["chain_enabled"],
            target_deg=a["target_deg"],
            design_freq=DESIGN_FREQ_HZ,
            geometry=self.geometry(),
        )
        return replace(cfg, q=a["q"])

    def link_scenario(self) -> LinkScenario:
        lk = self.values["link"]
        return LinkScenario(
            freq_hz=lk["freq_hz"],
            tx_power_dbm=lk["tx_power_dbm"],
            d1_m=lk["d1_m"],
            d2_m=lk["d2_m"],
            rx_noise_dbm=lk["rx_noise_dbm"],
            evm_floor_db=lk["evm_floor_db"],
            array=self.array_config(),
            rx_angle_deg=lk["rx_angle_deg"],
            target_deg=self.values["array"]["target_deg"],
        )


def resolve(raw: dict, case_id=None, where="<scenario>") -> Scenario:
    """Apply defaults to parsed ``raw`` values, logging each substitution."""
    vals = {}
    for section, keys in SCHEMA.items():
        vals[section] = {}
        for key, (_, default, _) in keys.items():
            if key in raw.get(section, {}):
                vals[section][key] = raw[section][key]
                continue
            if (section, key) in REQUIRED:
                raise ScenarioError(f"{where}: missing required key [{section}] {key}")
            if section == "sweep" and key == "kind":
                vals[section][key] = None
                continue
            vals[section][key] = default
            log.info("default applied: [%s] %s = %s", section, key, _fmt(default))
    if "sweep" in raw and raw["sweep"] and vals["sweep"]["kind"] is None:
        raise ScenarioError(f"{where}: [sweep] section needs a kind")
    return Scenario(vals, case_id)


def parse_scenario_text(text: str, where="<scenario>") -> Scenario:
    raw: dict = {}
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if s.startswith("[") and s.endswith("]"):
            section = s[1:-1].strip()
            if section not in SCHEMA:
                raise ScenarioError(f"{where}:{lineno}: unknown section [{section}]")
            raw.setdefault(section, {})
            continue
        if "=" not in s:
            raise ScenarioError(f"{where}:{lineno}: expected 'key = value', got {s!r}")
        if section is None:
            raise ScenarioError(f"{where}:{lineno}: key outside any section")
        key, value = (t.strip() for t in s.split("=", 1))
        if key not in SCHEMA[section]:
            raise ScenarioError(f"{where}:{lineno}: unknown key '{key}' in [{section}]")
        if key in raw[section]:
            raise ScenarioError(f"{where}:{lineno}: duplicate key '{key}' in [{section}]")
        parser, _, check = SCHEMA[section][key]
        try:
            v = parser(value)
            if check is not None:
                check(v)
        except ValueError as exc:
            raise ScenarioError(f"{where}:{lineno}: [{section}] {key} = {value}: {exc}") from None
        raw[section][key] = v
    return resolve(raw, where=where)


def parse_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario_text(text, where=str(path))


def case_preset(case_id: int) -> Scenario:
    """Scenario for one of the five experiment cases, on top of the defaults."""
    if case_id not in CASES:
        raise ScenarioError(f"case must be one of {sorted(CASES)}, got {case_id}")
    beam, rx, amplifying, freq = CASES[case_id]
    raw = {
        "array": {"target_deg": beam, "chain_enabled": amplifying, "amp_voltage_v": 7.0},
        "link": {"freq_hz": freq, "rx_angle_deg": rx},
    }
    return resolve(raw, case_id=case_id, where=f"case {case_id}")


# -- run --------------------------------------------------------------------

def _run_link(sc: Scenario) -> dict[str, str]:
    report = link_report(sc.link_scenario())
    m = sc.values["modem"]
    modem = simulate(report.snr_db, m["nbits"], m["seed"])
    summary = "[link_report]\n" + report.summary() + "[modem_report]\n" + modem.to_text()
    return {"summary": summary, "constellation.csv": modem.constellation_csv()}


def _run_pattern(sc: Scenario) -> dict[str, str]:
    sw = sc.values["sweep"]
    angles = _span(sw["theta_start_deg"], sw["theta_stop_deg"], sw["theta_step_deg"])
    f = sc.get("link", "freq_hz")
    pat = scatter_pattern(sc.array_config(), 0.0, angles, f)
    peak_deg, peak_db = pat.peak()
    codes = ",".join(map(str, sc.array_config().codes.codes))
    summary = f"[pattern]\ncodes={codes}\npeak_deg={peak_deg:.6g}\npeak_db={peak_db:.6g}\n"
    return {"summary": summary, "pattern.csv": pat.to_csv()}


def _freq_grid(sw) -> FrequencyGrid:
    return FrequencyGrid(_span(sw["f_start_hz"], sw["f_stop_hz"], sw["f_step_hz"]))


def _run_spectrum(sc: Scenario) -> dict[str, str]:
    spec = snr_spectrum(sc.link_scenario(), _freq_grid(sc.values["sweep"]))
    f_pk, s_pk = max(spec, key=lambda t: t[1])
    summary = f"[spectrum]\npeak_freq_hz={f_pk:.6g}\npeak_snr_db={s_pk:.6g}\n"
    return {"summary": summary, "spectrum.csv": spectrum_csv(spec)}


def _run_voltage(sc: Scenario) -> dict[str, str]:
    sw = sc.values["sweep"]
    volts = _span(sw["v_start"], sw["v_stop"], sw["v_step"])
    f0 = sc.get("link", "freq_hz")
    target = sc.get("array", "target_deg")
    grid = _freq_grid(sw)
    gain_rows = ["voltage_v,freq_hz,gain_db"]
    metric_rows = [METRICS_HEADER]
    gains = []
    for v in volts:
        g = gain_vs_plate(sc.array_config(amp_voltage=float(v)), target, f0)
        gains.append(g)
        gain_rows.append(f"{v:.6g},{f0:.6g},{g:.6g}")
        for angle in sw["angles_deg"]:
            cfg = replace(sc.array_config(amp_voltage=float(v)), codes=synthesize_code(sc.geometry(), angle, DESIGN_FREQ_HZ))
            metric_rows.append(metrics_row(float(v), angle, array_amplitude_curve(cfg, angle, grid)))
    summary = f"[voltage]\ntuning_range_db={max(gains) - min(gains):.6g}\n"
    return {
        "summary": summary,
        "voltage_gain.csv": "\n".join(gain_rows) + "\n",
        "metrics.csv": "\n".join(metric_rows) + "\n",
    }


def _run_ber(sc: Scenario) -> dict[str, str]:
    sw = sc.values["sweep"]
    m = sc.values["modem"]
    rows = ["ebn0_db,snr_db,ber,theory_ber,evm_pct"]
    for ebn0 in _span(sw["ebn0_start_db"], sw["ebn0_stop_db"], sw["ebn0_step_db"]):
        snr = ebn0 + 10.0 * math.log10(2.0)
        r = simulate(snr, m["nbits"], m["seed"])
        theory = 0.5 * erfc(math.sqrt(10.0 ** (ebn0 / 10.0)))
        rows.append(f"{ebn0:.6g},{snr:.6g},{r.ber:.6g},{theory:.6g},{r.evm_pct:.6g}")
    return {"summary": "[ber]\n", "ber.csv": "\n".join(rows) + "\n"}


RUNNERS = {
    None: _run_link,
    "pattern": _run_pattern,
    "spectrum": _run_spectrum,
    "voltage": _run_voltage,
    "ber": _run_ber,
}


def render(sc: Scenario) -> dict[str, str]:
    """All output files of a run, as ``name -> text``; nothing touches disk."""
    out = RUNNERS[sc.get("sweep", "kind")](sc)
    out["summary.txt"] = sc.to_text() + out.pop("summary")
    return out


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def run(sc: Scenario, output_dir) -> list[Path]:
    files = render(sc)
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name in sorted(files):
        _write_atomic(out / name, files[name])
        written.append(out / name)
    return written


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afris", description="AF-RIS link and array simulator")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", type=Path, help="sectioned key=value scenario file")
    src.add_argument("--case", type=int, choices=sorted(CASES), help="experiment preset 1..5")
    p.add_argument("--sweep", choices=SWEEP_KINDS, help="override [sweep] kind")
    p.add_argument("--target", type=float, help="override [array] target_deg")
    p.add_argument("--seed", type=_u64, help="override [modem] seed (unsigned 64-bit)")
    p.add_argument("--nbits", type=int, help="override [modem] nbits")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("-q", "--quiet", action="store_true", help="suppress the default echo")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(name)s: %(message)s")
    try:
        if args.scenario is not None:
            sc = parse_scenario(args.scenario)
        elif args.case is not None:
            sc = case_preset(args.case)
        else:
            sc = resolve({"link": {"freq_hz": DESIGN_FREQ_HZ}}, where="defaults")
        updates = {}
        if args.sweep is not None:
            updates["sweep__kind"] = args.sweep
        if args.target is not None:
            updates["array__target_deg"] = args.target
        if args.seed is not None:
            updates["modem__seed"] = args.seed
        if args.nbits is not None:
            updates["modem__nbits"] = args.nbits
        sc = sc.with_values(**updates)
        written = run(sc, args.out)
    except (ValueError, OSError) as exc:
        print(f"afris: error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
