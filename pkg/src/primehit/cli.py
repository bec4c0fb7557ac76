"""Command-line entry point: ``primehit {exact,bounds,simulate,verify}``.

Exit codes: 0 success, 1 runtime failure, 2 configuration error,
3 certification refused (exact results still emitted), 4 verification failure.

Output goes to stdout unless ``--output`` is given; if ``PRIMEHIT_OUTPUT_DIR``
is set and ``--output`` is not, output is written to
``$PRIMEHIT_OUTPUT_DIR/primehit-<command>.<format>``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from primehit import __version__
from primehit.checks import run_verification
from primehit.errors import (
    CapOverflowError,
    CertificationUnavailable,
    PreconditionError,
    PrimeHitError,
)
from primehit.exact_dp import PRIMES, DpConfig, render_decimal, run_dp
from primehit.primes import DEFAULT_SIEVE_LIMIT, build_prime_table
from primehit.simulate import DEFAULT_CAP, run_simulation
from primehit.tail_bounds import DEFAULT_N_CUT, DEFAULT_PREC, MIN_K, certify

log = logging.getLogger("primehit")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_CONFIG = 2
EXIT_REFUSED = 3
EXIT_VERIFY = 4

OUTPUT_DIR_ENV = "PRIMEHIT_OUTPUT_DIR"
COMMANDS = ("exact", "bounds", "simulate", "verify")
FORMATS = ("json", "csv", "text")


class ConfigError(PreconditionError):
    pass


@dataclass
class RunConfig:
    command: str
    sides: int = 6
    k_max: int = 1000
    sieve_limit: int = DEFAULT_SIEVE_LIMIT
    n_cut: int = DEFAULT_N_CUT
    precision_digits: int = 15
    prec_bits: int = DEFAULT_PREC
    sharp_pi: bool = False
    reps: int = 1_000_000
    seed: int = 42
    workers: int = 1
    cap: int = DEFAULT_CAP
    target: str = PRIMES
    format: str = "json"
    output: Optional[str] = None
    omit_timings: bool = False
    proposition_k: int = 30
    oracle_k: int = 8
    scan_max: int = 100_000
    target_members: Optional[frozenset] = field(default=None, repr=False)

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"unknown format {self.format!r}")
        for name in ("sides", "k_max", "sieve_limit", "precision_digits", "reps", "workers", "cap"):
            if getattr(self, name) < 1:
                raise ConfigError(f"--{name.replace('_', '-')} must be positive")
        if self.sides < 2:
            raise ConfigError("--sides must be >= 2")
        if self.sieve_limit < 2:
            raise ConfigError("--sieve-limit must be >= 2")
        if self.prec_bits < 80:
            raise ConfigError("--prec-bits must be >= 80")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("--seed must fit in 64 bits")
        custom = self.target != PRIMES
        if self.command in ("exact", "bounds"):
            need = self.sides * self.k_max + self.sides
            if self.sieve_limit < need:
                raise ConfigError(f"--sieve-limit must be >= sides*k_max + sides = {need}")
        if self.command == "bounds":
            if custom:
                raise ConfigError("tail certification unavailable for custom targets")
            if self.sides != 6:
                raise ConfigError("tail certification is only available for 6-sided dice")
            if self.k_max < MIN_K:
                raise ConfigError(f"bounds need --k-max >= {MIN_K}")
            if self.n_cut < self.k_max:
                raise ConfigError("--n-cut must be >= --k-max")
            if self.sharp_pi and self.n_cut > self.sieve_limit:
                raise ConfigError("--sharp-pi needs --n-cut <= --sieve-limit")
        if self.command == "simulate":
            if custom:
                raise ConfigError("simulate supports the primes target only")
            if self.cap * self.sides > self.sieve_limit:
                raise ConfigError("--cap * --sides must not exceed --sieve-limit")
        if self.command == "verify" and self.sieve_limit <= MIN_K:
            raise ConfigError(f"verify needs --sieve-limit > {MIN_K}")
        if custom:
            self.target_members = _read_target(self.target, self.sieve_limit)

    @property
    def dp_target(self):
        return PRIMES if self.target == PRIMES else self.target_members

    def public(self) -> dict:
        d = asdict(self)
        d.pop("target_members")
        return d


def _read_target(path: str, cap: int) -> frozenset:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read target file {path}: {exc}") from exc
    members = set()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            m = int(line)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: not an integer: {line!r}") from None
        if not 2 <= m <= cap:
            raise ConfigError(f"{path}:{lineno}: target {m} outside [2, {cap}]")
        members.add(m)
    if not members:
        raise ConfigError(f"target file {path} is empty")
    return frozenset(members)


# ---------------------------------------------------------------------------
# formatting helpers


def fmt_sci(x: Fraction, sig: int = 6, rounding: str = "up") -> str:
    """Scientific rendering with ``sig`` significant digits and directed rounding."""
    x = Fraction(x)
    if x == 0:
        return "0"
    if x < 0:
        flipped = {"up": "down", "down": "up"}.get(rounding, rounding)
        return "-" + fmt_sci(-x, sig, flipped)
    e = len(str(x.numerator)) - len(str(x.denominator))
    while x >= Fraction(10) ** e:
        e += 1
    while x < Fraction(10) ** (e - 1):
        e -= 1
    e -= 1  # now 10^e <= x < 10^(e+1)
    mant = render_decimal(x / Fraction(10) ** e, sig - 1, rounding)
    if mant.startswith("10."):
        e += 1
        mant = render_decimal(x / Fraction(10) ** e, sig - 1, rounding)
    return f"{mant}e{e:+d}"


def _exact_pair(x: Fraction, sides: int, exponent: int) -> dict:
    num = x * sides**exponent
    if num.denominator != 1:
        return {"numerator": str(x.numerator), "denominator": str(x.denominator)}
    return {"numerator": str(num.numerator), "denominator_exponent": exponent}


def _interval(lo: Fraction, hi: Fraction, digits: int) -> list[str]:
    return [render_decimal(lo, digits, "down"), render_decimal(hi, digits, "up")]


# ---------------------------------------------------------------------------
# commands


def _tail_results(report, digits: int) -> dict:
    d = max(digits, 12)
    return {
        "K": report.K,
        "R_upper": fmt_sci(report.R_upper),
        "R2_upper": fmt_sci(report.R2_upper),
        "RV_abs_upper": fmt_sci(report.RV_abs_upper),
        "E_interval": _interval(*report.E_interval, d),
        "Var_interval": _interval(*report.Var_interval, d),
        "n_cut": report.n_cut,
        "prec_bits": report.prec,
        "sharp_pi": report.sharp,
        "pnt_verified_range": list(report.pnt_verified),
    }


def cmd_exact(cfg: RunConfig, timings: dict):
    t = time.perf_counter()
    primes = build_prime_table(cfg.sieve_limit) if cfg.target == PRIMES else None
    timings["sieve_s"] = time.perf_counter() - t

    t = time.perf_counter()
    series = run_dp(DpConfig(cfg.sides, cfg.k_max, cfg.dp_target), primes)
    timings["dp_s"] = time.perf_counter() - t

    digits = cfg.precision_digits
    K = cfg.k_max
    results = {
        "K": K,
        "sides": cfg.sides,
        "target": cfg.target,
        "E_K": render_decimal(series.E_K, digits),
        "E2_K": render_decimal(series.E2_K, digits),
        "Var_K": render_decimal(series.Var_K, digits),
        "E_K_exact": _exact_pair(series.E_K, cfg.sides, K - 1),
        "E2_K_exact": _exact_pair(series.E2_K, cfg.sides, K - 1),
        "certified": None,
        "warnings": [],
    }
    assumptions: list[str] = []
    code = EXIT_OK
    t = time.perf_counter()
    try:
        if cfg.target != PRIMES:
            raise CertificationUnavailable("tail certification unavailable for custom targets")
        if K < MIN_K:
            raise CertificationUnavailable(f"tail certification needs K >= {MIN_K}")
        report = certify(series, K, primes, cfg.n_cut, cfg.prec_bits, cfg.sharp_pi)
    except CertificationUnavailable as exc:
        results["warnings"].append(f"{exc}; reporting exact truncated values only")
        code = EXIT_REFUSED
    else:
        results["certified"] = _tail_results(report, digits)
        assumptions = report.assumptions
    timings["bounds_s"] = time.perf_counter() - t
    return results, assumptions, code, series


def cmd_bounds(cfg: RunConfig, timings: dict):
    results, assumptions, code, _ = cmd_exact(cfg, timings)
    return results, assumptions, code, None


def cmd_simulate(cfg: RunConfig, timings: dict):
    t = time.perf_counter()
    primes = build_prime_table(cfg.sieve_limit)
    timings["sieve_s"] = time.perf_counter() - t
    t = time.perf_counter()
    summary = run_simulation(
        cfg.reps, cfg.seed, cfg.sides, primes, cfg.workers, cap=cfg.cap, strict=True
    )
    timings["simulate_s"] = time.perf_counter() - t
    results = {
        "reps": summary.reps,
        "seed": summary.seed,
        "workers": summary.workers,
        "mean": repr(summary.mean),
        "variance": repr(summary.variance),
        "max": summary.max,
        "degenerate": summary.degenerate,
        "histogram": summary.histogram,
        "histogram_overflow": summary.histogram_overflow,
        "cap_overflow": summary.cap_overflow,
        "tau_sum": str(summary.tau_sum),
        "tau_sq_sum": str(summary.tau_sq_sum),
        "warnings": summary.notes,
    }
    return results, [], EXIT_OK, None


def cmd_verify(cfg: RunConfig, timings: dict):
    t = time.perf_counter()
    primes = build_prime_table(cfg.sieve_limit)
    timings["sieve_s"] = time.perf_counter() - t
    t = time.perf_counter()
    sweeps = run_verification(primes, cfg.proposition_k, cfg.oracle_k, cfg.scan_max)
    timings["verify_s"] = time.perf_counter() - t
    results = {
        "sweeps": [
            {
                "name": s.name,
                "passed": s.passed,
                "detail": s.detail,
                "witness": list(s.witness) if s.witness else None,
            }
            for s in sweeps
        ],
        "all_passed": all(s.passed for s in sweeps),
    }
    code = EXIT_OK if results["all_passed"] else EXIT_VERIFY
    return results, [], code, None


HANDLERS = {
    "exact": cmd_exact,
    "bounds": cmd_bounds,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# renderers


def render_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def render_csv(cfg: RunConfig, doc: dict, series) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if cfg.command == "exact" and series is not None:
        w.writerow(["k", "p_k_numerator", "p_k_denominator_exponent", "p_k_decimal"])
        for j, c in enumerate(series.numerators):
            p = Fraction(c, cfg.sides**j)
            w.writerow([j + 1, c, j, render_decimal(p, cfg.precision_digits)])
        return buf.getvalue()
    w.writerow(["key", "value"])
    for key, value in _flatten(doc["results"]):
        w.writerow([key, value])
    return buf.getvalue()


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix.rstrip("."), "" if obj is None else obj


def render_text(cfg: RunConfig, doc: dict) -> str:
    r = doc["results"]
    lines = []
    if cfg.command in ("exact", "bounds"):
        K = r["K"]
        lines.append(f"E_{K} = {r['E_K']}")
        lines.append(f"Var_{K} = {r['Var_K']}")
        c = r["certified"]
        if c:
            lines.append(f"R_{K} < {c['R_upper']}")
            lines.append(f"R2_{K} < {c['R2_upper']}")
            lines.append(f"|RV_{K}| < {c['RV_abs_upper']}")
            lines.append(f"E(tau) in [{c['E_interval'][0]}, {c['E_interval'][1]}]")
            lines.append(f"Var(tau) in [{c['Var_interval'][0]}, {c['Var_interval'][1]}]")
    elif cfg.command == "simulate":
        lines.append(f"repetitions   {r['reps']}")
        lines.append(f"mean(tau)     {float(r['mean']):.4f}")
        lines.append(f"variance(tau) {float(r['variance']):.4f}")
        lines.append(f"max(tau)      {r['max']}")
    else:
        for s in r["sweeps"]:
            lines.append(f"[{'PASS' if s['passed'] else 'FAIL'}] {s['name']}: {s['detail']}")
    for a in doc["assumptions"]:
        lines.append(f"assumption: {a}")
    for wmsg in r.get("warnings", []):
        lines.append(f"warning: {wmsg}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--sides", type=int, default=6)
    common.add_argument("--k-max", type=int, default=1000)
    common.add_argument("--sieve-limit", type=int, default=DEFAULT_SIEVE_LIMIT)
    common.add_argument("--n-cut", type=int, default=DEFAULT_N_CUT)
    common.add_argument("--precision-digits", type=int, default=15)
    common.add_argument("--prec-bits", type=int, default=DEFAULT_PREC)
    common.add_argument(
        "--sharp-pi", action="store_true", help="use exact pi_strict(n) up to n-cut in tail sums"
    )
    common.add_argument("--reps", type=int, default=1_000_000)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--cap", type=int, default=DEFAULT_CAP)
    common.add_argument("--target", default=PRIMES, help="'primes' or a file of integers")
    common.add_argument("--format", choices=FORMATS, default="json")
    common.add_argument("--output", "-o", default=None)
    common.add_argument("--omit-timings", action="store_true")
    common.add_argument("--proposition-k", type=int, default=30)
    common.add_argument("--oracle-k", type=int, default=8)
    common.add_argument("--scan-max", type=int, default=100_000)
    common.add_argument("--verbose", "-v", action="store_true")

    parser = argparse.ArgumentParser(
        prog="primehit",
        description="Moments of the first time a running dice sum is prime.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("exact", parents=[common], help="exact E_K, Var_K and certified intervals")
    sub.add_parser("bounds", parents=[common], help="certified remainder bounds")
    sub.add_parser("simulate", parents=[common], help="seeded Monte Carlo summary")
    sub.add_parser("verify", parents=[common], help="run the verification sweeps")
    return parser


def _config_from_args(ns: argparse.Namespace) -> RunConfig:
    fields = {k: v for k, v in vars(ns).items() if k != "verbose"}
    return RunConfig(**fields)


def _destination(cfg: RunConfig) -> Optional[Path]:
    if cfg.output:
        return Path(cfg.output)
    outdir = os.environ.get(OUTPUT_DIR_ENV)
    if outdir:
        return Path(outdir) / f"primehit-{cfg.command}.{cfg.format}"
    return None


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if ns.verbose else logging.WARNING, format="%(levelname)s %(message)s"
    )
    cfg = _config_from_args(ns)
    try:
        cfg.validate()
    except ConfigError as exc:
        print(f"primehit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    timings: dict = {}
    start = time.perf_counter()
    try:
        results, assumptions, code, series = HANDLERS[cfg.command](cfg, timings)
    except PreconditionError as exc:
        print(f"primehit: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CapOverflowError, PrimeHitError) as exc:
        print(f"primehit: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    timings["total_s"] = time.perf_counter() - start

    doc = {
        "version": __version__,
        "config": cfg.public(),
        "results": results,
        "assumptions": assumptions,
        "timings": {} if cfg.omit_timings else {k: round(v, 6) for k, v in timings.items()},
    }
    if cfg.format == "json":
        out = render_json(doc)
    elif cfg.format == "csv":
        out = render_csv(cfg, doc, series)
    else:
        out = render_text(cfg, doc)

    dest = _destination(cfg)
    if dest is None:
        sys.stdout.write(out)
    else:
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(out)
        log.info("wrote %s", dest)
    for wmsg in results.get("warnings", []):
        print(f"primehit: warning: {wmsg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
