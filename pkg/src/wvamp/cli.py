"""Command-line front end.

Subcommands: ``figure``, ``scan``, ``mc-validate``, ``optimize-jp``.
Exit codes: 0 success, 1 validation failure, 2 usage or config error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from .figures import figure_table
from .meter import MeterConfig
from .montecarlo import Basis, McCase, McConfig, default_suite, run_case
from .noise import NoiseConfig, NoiseKind, find_optimal_jp
from .quantum import state_from_angles
from .scan import SpecParseError, parse_number, parse_scan_spec, read_config, run_scan

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (float, int)) and not isinstance(v, bool):
        return format(float(v), ".17g")
    return str(v)


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_safe(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


def json_text(obj) -> str:
    return json.dumps(_json_safe(obj), indent=2, allow_nan=False) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    with open(out, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


# --- figure / scan --------------------------------------------------------------

def cmd_figure(args) -> int:
    header, rows = figure_table(args.n, workers=args.threads)
    _emit(csv_text(header, rows), args.out)
    return EXIT_OK


def cmd_scan(args) -> int:
    try:
        text = Path(args.config).read_text(encoding="utf-8")
        overrides = dict(_split_override(s) for s in args.set)
        spec = parse_scan_spec(text, overrides)
    except (OSError, SpecParseError) as exc:
        print(f"scan: {exc}", file=sys.stderr)
        return EXIT_USAGE
    header, rows = run_scan(spec, workers=args.threads)
    _emit(csv_text(header, rows), args.out)
    return EXIT_OK


def _split_override(s: str) -> tuple[str, str]:
    key, sep, value = s.partition("=")
    if not sep:
        raise SpecParseError(f"--set {s!r}: expected SECTION.KEY=VALUE")
    return key.strip(), value.strip()


# --- mc-validate ----------------------------------------------------------------

def parse_mc_config(text: str, seed: int | None = None, trials: int | None = None,
                    workers: int = 1) -> list[McCase]:
    """Validation cases from ``[case.<name>]`` sections; ``[defaults]`` fills gaps.

    Keys: ``basis`` (x|p), ``theta``, ``phi``, ``pre_theta``, ``pre_phi``,
    ``g`` or ``d``, ``sigma``, ``noise`` (none|x0|p0), ``width``, ``trials``,
    ``seed``, ``corrupt``.
    """
    cp = read_config(text)
    defaults = dict(cp["defaults"]) if cp.has_section("defaults") else {}
    cases = []
    for idx, section in enumerate(s for s in cp.sections() if s.startswith("case.")):
        raw = {**defaults, **dict(cp[section])}
        name = section[len("case."):]

        def num(key, fallback=None):
            if key not in raw:
                if fallback is None:
                    raise SpecParseError(f"[{section}] missing {key}")
                return fallback
            try:
                return parse_number(raw[key])
            except ValueError:
                raise SpecParseError(f"[{section}] {key}: not a number: {raw[key]!r}") from None

        try:
            sigma = num("sigma", 1.0)
            if "g" in raw and "d" in raw:
                raise SpecParseError(f"[{section}] give either g or d")
            m = (MeterConfig.from_strength(num("g"), sigma) if "g" in raw
                 else MeterConfig(num("d"), sigma))
            noise = NoiseConfig(NoiseKind(raw.get("noise", "none")),
                                num("width", 0.0) if raw.get("noise", "none") != "none" else 0.0)
            n_trials = trials if trials is not None else int(num("trials", 1e6))
            base_seed = seed if seed is not None else int(num("seed", 0))
            cfg = McConfig(n_trials, base_seed + idx, Basis(raw.get("basis", "x")), noise, workers)
            cases.append(McCase(
                name,
                state_from_angles(num("pre_theta", math.pi / 2), num("pre_phi", 0.0)),
                state_from_angles(num("theta"), num("phi", 0.0)),
                m, cfg, corrupt=num("corrupt", 0.0),
            ))
        except SpecParseError:
            raise
        except ValueError as exc:
            raise SpecParseError(f"[{section}] {exc}") from None
    if not cases:
        raise SpecParseError("no [case.<name>] sections")
    return cases


def cmd_mc_validate(args) -> int:
    try:
        if args.config:
            cases = parse_mc_config(Path(args.config).read_text(encoding="utf-8"),
                                    seed=args.seed, trials=args.trials, workers=args.threads)
        else:
            kw = {"workers": args.threads}
            if args.seed is not None:
                kw["seed"] = args.seed
            if args.trials is not None:
                kw["trials"] = args.trials
            cases = default_suite(**kw)
    except (OSError, SpecParseError) as exc:
        print(f"mc-validate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    rows = [row for case in cases for row in run_case(case)]
    _emit(json_text(rows), args.out)
    for r in rows:
        print(f"{'PASS' if r['pass'] else 'FAIL'} {r['case']} {r['quantity']} z={r['z']:+.3f}",
              file=sys.stderr)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_FAIL


# --- optimize-jp ----------------------------------------------------------------

def cmd_optimize_jp(args) -> int:
    try:
        theta, phi = parse_number(args.theta), parse_number(args.phi)
        m = MeterConfig(args.d, args.sigma)
        if not args.jp_min < args.jp_max:
            raise ValueError(f"empty Jp range [{args.jp_min}, {args.jp_max}]")
        pre = state_from_angles(math.pi / 2, 0.0)
        opt = find_optimal_jp(pre, state_from_angles(theta, phi), m, (args.jp_min, args.jp_max))
    except ValueError as exc:
        print(f"optimize-jp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    report = {
        "jp_star": opt.jp_star,
        "snr_star": opt.snr_star,
        "snr_noise_free": opt.snr_noise_free,
        "gain_over_noise_free": opt.gain,
        "warning": None if opt.unimodal else "not_unimodal: returned best grid point",
    }
    _emit(json_text(report), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wvamp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, seed=False):
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--threads", type=int, default=1, help="worker count")
        if seed:
            sp.add_argument("--seed", type=int, default=None)

    sp = sub.add_parser("figure", help="emit the data behind figure N (1-6) as CSV")
    sp.add_argument("n", type=int, choices=range(1, 7))
    common(sp)
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("scan", help="evaluate a declarative parameter scan")
    sp.add_argument("--config", required=True)
    sp.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                    help="override a config value (repeatable)")
    common(sp)
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("mc-validate", help="Monte Carlo vs closed-form z-score checks")
    sp.add_argument("--config", default=None, help="case file (default: built-in 8-case suite)")
    sp.add_argument("--trials", type=int, default=None)
    common(sp, seed=True)
    sp.set_defaults(func=cmd_mc_validate)

    sp = sub.add_parser("optimize-jp", help="noise width maximizing the momentum-readout SNR")
    sp.add_argument("--sigma", type=float, required=True)
    sp.add_argument("--d", type=float, default=1.0)
    sp.add_argument("--theta", default="1.49pi")
    sp.add_argument("--phi", default="pi/4")
    sp.add_argument("--jp-min", type=float, default=1e-4)
    sp.add_argument("--jp-max", type=float, default=10.0)
    common(sp)
    sp.set_defaults(func=cmd_optimize_jp)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if getattr(args, "threads", 1) < 1:
        print("--threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except SpecParseError as exc:
        print(f"{args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
