"""Counts of p1 (p2 + a) in residue classes and character sums over shifted primes.

Every flag may also come from a JSON/YAML file given with ``--config`` (keys
are flag names, dashes or underscores) or, for the global flags, from
``SHIFTPRIMES_<FLAG>`` environment variables. Precedence: flag, environment,
file, default.

Exit codes: 0 success, 1 invariant violation or failed verification,
2 usage error, 3 computation guard exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Sequence

import yaml

from .characters import all_characters, build_basis, parse_character, CharacterParseError
from .charsums import (
    KERNELS,
    T_sum,
    bv_error_sum,
    bv_threshold,
    nontriviality_report,
    shifted_char_sum,
    t_sum,
)
from .ntcore import GuardError, Modulus, OverflowGuardError
from .pi2 import (
    GoldbachCapExceeded,
    InstanceError,
    NoGoldbachNumber,
    Pi2Instance,
    brun_titchmarsh_check,
    char_decomposition,
    jutila_ratio_scan,
    least_goldbach,
    pi2_exact,
    pi2_report,
)
from .verify import SUITES, run_suite

ENV_PREFIX = "SHIFTPRIMES_"
QUANTITIES = ("pi2", "decomp", "t-sum", "T-sum", "shifted-sum", "bv", "brun-titchmarsh", "goldbach", "nontriviality")
SUM_COLUMNS = ["quantity", "q", "x", "parameters", "value", "elapsed-ms"]
GLOBAL_DEFAULTS = {"threads": os.cpu_count() or 1, "mode": "fast", "out": None, "format": None, "seed": 0, "timing": False}


class UsageError(Exception):
    pass


class InvariantViolation(Exception):
    pass


# ---------------------------------------------------------------- parsing


def parse_number(text: str | int | float) -> int:
    """Integer from ``"1e7"``, ``"10_000"`` or a plain literal."""
    if isinstance(text, int):
        return text
    if isinstance(text, float):
        if not text.is_integer():
            raise UsageError(f"expected an integer, got {text}")
        return int(text)
    s = str(text).strip().replace("_", "")
    try:
        return int(s)
    except ValueError:
        pass
    try:
        v = Fraction(s) if "e" not in s.lower() else Fraction(float(s)).limit_denominator(1)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None
    if v.denominator != 1:
        raise UsageError(f"expected an integer, got {text!r}")
    return int(v)


def parse_real(text: str | float) -> float:
    try:
        return float(str(text).replace("_", ""))
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None


def parse_grid(text, what: str) -> list[int]:
    """``"3,5,7"``, ``"3..50"``, ``"3..50:2"`` or a YAML/JSON list."""
    if text is None:
        raise UsageError(f"--{what} is required")
    if isinstance(text, (list, tuple)):
        parts = [str(v) for v in text]
    else:
        parts = [p for p in str(text).split(",") if p.strip()]
    out: list[int] = []
    for part in parts:
        if ".." in part:
            lo, _, rest = part.partition("..")
            hi, _, step = rest.partition(":")
            out.extend(range(parse_number(lo), parse_number(hi) + 1, parse_number(step) if step else 1))
        else:
            out.append(parse_number(part))
    if not out:
        raise UsageError(f"--{what}: empty grid")
    return out


def parse_unit_grid(text, q: int, what: str) -> list[int]:
    if text is None or str(text).strip().lower() == "all":
        return [int(u) for u in build_basis(q).units]
    return parse_grid(text, what)


def parse_reals(text, what: str) -> list[float]:
    if text is None:
        raise UsageError(f"--{what} is required")
    parts = text if isinstance(text, (list, tuple)) else [p for p in str(text).split(",") if p.strip()]
    out = [parse_real(p) for p in parts]
    if not out:
        raise UsageError(f"--{what}: empty grid")
    return out


def fmt(v: Any) -> str:
    """Integers in full, reals to 12 significant digits, complex as ``a+bj``."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, complex):
        return f"{fmt(v.real)}{'+' if v.imag >= 0 or math.isnan(v.imag) else '-'}{fmt(abs(v.imag))}j"
    if isinstance(v, float):
        if math.isfinite(v) and v.is_integer() and abs(v) < 1e15:
            return str(int(v)) if v != 0 or math.copysign(1, v) > 0 else "0"
        return format(v, ".12g")
    return str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, bool) or v is None or isinstance(v, (int, str)):
        return v
    if isinstance(v, float):
        return float(format(v, ".12g")) if math.isfinite(v) else str(v)
    if isinstance(v, complex):
        return {"re": _json_value(v.real), "im": _json_value(v.imag)}
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return str(v)


# ---------------------------------------------------------------- sweep config


@dataclass
class SweepConfig:
    quantity: str
    options: dict[str, Any]
    out: str | None = None
    format: str = "csv"
    threads: int = 1
    mode: str = "fast"
    seed: int = 0
    timing: bool = False
    points: list[tuple] = field(default_factory=list)


def _opt(cfg: SweepConfig, name: str, default=None):
    return cfg.options.get(name, default)


def build_points(cfg: SweepConfig) -> list[tuple]:
    """Expand the grid in lexicographic order and validate every point up front."""
    qn = cfg.quantity
    pts: list[tuple] = []
    if qn in ("pi2", "decomp"):
        for q in sorted(parse_grid(_opt(cfg, "q"), "q")):
            for x1 in sorted(parse_grid(_opt(cfg, "x1"), "x1")):
                for x2 in sorted(parse_grid(_opt(cfg, "x2"), "x2")):
                    for a in sorted(parse_unit_grid(_opt(cfg, "a", "1"), q, "a")):
                        for l in sorted(parse_unit_grid(_opt(cfg, "l"), q, "l")):
                            try:
                                pts.append((Pi2Instance.make(q, x1, x2, a, l),))
                            except (InstanceError, ValueError) as exc:
                                raise UsageError(f"invalid grid point q={q} a={a} l={l}: {exc}") from None
    elif qn == "t-sum":
        pts = [(q, x) for q in sorted(parse_grid(_opt(cfg, "q"), "q")) for x in sorted(parse_grid(_opt(cfg, "x"), "x"))]
        _check_kernel(cfg)
    elif qn == "T-sum":
        pts = [(Q, x) for Q in sorted(parse_grid(_opt(cfg, "Q"), "Q")) for x in sorted(parse_grid(_opt(cfg, "x"), "x"))]
        _check_kernel(cfg)
    elif qn == "shifted-sum":
        chi_text = _opt(cfg, "char")
        if chi_text:
            try:
                chi = parse_character(str(chi_text))
            except CharacterParseError as exc:
                raise UsageError(str(exc)) from None
            qs = [chi.q]
        else:
            chi = None
            qs = sorted(parse_grid(_opt(cfg, "q"), "q"))
        for q in qs:
            for x in sorted(parse_grid(_opt(cfg, "x"), "x")):
                for a in sorted(parse_unit_grid(_opt(cfg, "a", "1"), q, "a")):
                    if math.gcd(a, q) != 1:
                        raise UsageError(f"invalid grid point q={q} a={a}: gcd(a,q) > 1")
                    pts.append((q, x, a, chi))
    elif qn == "bv":
        pts = [(x, Q) for x in sorted(parse_grid(_opt(cfg, "x"), "x")) for Q in sorted(parse_grid(_opt(cfg, "Qcap"), "Qcap"))]
        for x, Q in pts:
            if x < 10 or Q < 1:
                raise UsageError(f"bv needs x >= 10 and Qcap >= 1, got x={x}, Qcap={Q}")
    elif qn == "brun-titchmarsh":
        for q in sorted(parse_grid(_opt(cfg, "q"), "q")):
            for x in sorted(parse_grid(_opt(cfg, "x"), "x")):
                if q > x:
                    raise UsageError(f"brun-titchmarsh needs q <= x, got q={q}, x={x}")
                for a in sorted(parse_unit_grid(_opt(cfg, "a"), q, "a")):
                    if math.gcd(a, q) != 1:
                        raise UsageError(f"invalid grid point q={q} a={a}: gcd(a,q) > 1")
                    pts.append((q, x, a))
    elif qn == "goldbach":
        for q in sorted(parse_grid(_opt(cfg, "q"), "q")):
            if q < 1:
                raise UsageError("q must be >= 1")
            ls = parse_unit_grid(_opt(cfg, "l"), q, "l")
            for l in sorted(ls):
                if not 0 <= l < q:
                    raise UsageError(f"goldbach needs 0 <= l < q, got l={l}, q={q}")
                pts.append((q, l))
    elif qn == "nontriviality":
        exps = parse_reals(_opt(cfg, "exponents"), "exponents")
        for q in sorted(parse_grid(_opt(cfg, "q"), "q")):
            for a in sorted(parse_unit_grid(_opt(cfg, "a", "1"), q, "a")):
                if math.gcd(a, q) != 1:
                    raise UsageError(f"invalid grid point q={q} a={a}: gcd(a,q) > 1")
                pts.append((q, a, tuple(exps)))
    else:
        raise UsageError(f"unknown quantity {qn!r}")
    if not pts:
        raise UsageError("empty grid")
    return pts


def _check_kernel(cfg: SweepConfig) -> None:
    if _opt(cfg, "kernel", "von-mangoldt") not in KERNELS:
        raise UsageError(f"--kernel must be one of {KERNELS}")


# ---------------------------------------------------------------- evaluation


def _elapsed(t0: float, cfg: SweepConfig):
    return round((time.perf_counter() - t0) * 1000, 3) if cfg.timing else None


def _sum_row(quantity, q, x, params: str, value, t0, cfg) -> dict:
    return {"quantity": quantity, "q": q, "x": x, "parameters": params, "value": value, "elapsed-ms": _elapsed(t0, cfg)}


def evaluate_point(cfg: SweepConfig, pt: tuple, inner_threads: int) -> list[dict]:
    qn = cfg.quantity
    t0 = time.perf_counter()
    eps = Fraction(str(_opt(cfg, "eps", "0.01")))
    A = parse_real(_opt(cfg, "A", 1.0))
    kernel = _opt(cfg, "kernel", "von-mangoldt")
    if qn == "pi2":
        (inst,) = pt
        return [pi2_report(inst, eps, cfg.mode, inner_threads).to_json_dict()]
    if qn == "decomp":
        (inst,) = pt
        d = char_decomposition(inst, cfg.mode, inner_threads)
        exact = pi2_exact(inst, inner_threads)
        residual = (d.M2_exact + d.R2_exact - exact) if d.R2_exact is not None else d.total - exact
        row = {"q": inst.q, "x1": inst.x1, "x2": inst.x2, "a": inst.a, "l": inst.l, "exact": exact,
               "M2": d.M2, "R2_re": d.R2.real, "R2_im": d.R2.imag, "mode": d.mode,
               "residual": float(residual)}
        if d.mode == "exact" and (d.R2_exact is None or residual != 0):
            raise InvariantViolation(f"decomposition identity fails at {inst}: residual {residual}")
        if d.mode == "fast" and (abs(residual) > 1e-6 or abs(d.R2.imag) > 1e-6):
            raise InvariantViolation(f"decomposition identity fails at {inst}: residual {residual}, imag {d.R2.imag}")
        return [row]
    if qn == "t-sum":
        q, x = pt
        v = t_sum(x, q, kernel, cfg.mode, inner_threads)
        return [_sum_row("t-sum", q, x, f"kernel={kernel}", v, t0, cfg)]
    if qn == "T-sum":
        Q, x = pt
        v = T_sum(x, Q, kernel, cfg.mode, inner_threads)
        return [_sum_row("T-sum", Q, x, f"kernel={kernel}", v, t0, cfg)]
    if qn == "shifted-sum":
        q, x, a, chi = pt
        chars = [chi] if chi is not None else all_characters(q)
        rows = []
        for c in chars:
            t1 = time.perf_counter()
            v = shifted_char_sum(c, x, a, cfg.mode)
            rows.append(_sum_row("shifted-sum", q, x, f"a={a};chi={c.serialize()}", v, t1, cfg))
        return rows
    if qn == "bv":
        x, Q = pt
        v = bv_error_sum(x, Q)
        return [_sum_row("bv", Q, x, f"Qcap={Q};A={fmt(A)};threshold={fmt(bv_threshold(x, A))}", v, t0, cfg)]
    if qn == "brun-titchmarsh":
        q, x, a = pt
        r = brun_titchmarsh_check(x, q, a)
        return [{"q": q, "x": x, "a": a, "lhs": r.lhs, "rhs": r.rhs, "holds": r.holds}]
    if qn == "goldbach":
        q, l = pt
        try:
            g = least_goldbach(q, l)
            return [{"q": q, "l": l, "G": g.n, "p": g.p, "p_prime": g.p_prime, "note": ""}]
        except NoGoldbachNumber as exc:
            return [{"q": q, "l": l, "G": None, "p": None, "p_prime": None, "note": str(exc)}]
        except GoldbachCapExceeded as exc:
            return [{"q": q, "l": l, "G": None, "p": None, "p_prime": None, "note": f"cap-exhausted: {exc}"}]
    if qn == "nontriviality":
        q, a, exps = pt
        return [{"q": q, "a": a, "exponent": r.exponent, "x": r.x, "max_ratio": r.max_ratio,
                 "argmax_character": r.argmax_character, "theta": r.theta, "above_theta": r.above_theta,
                 "note": r.note} for r in nontriviality_report(q, a, exps, cfg.mode)]
    raise UsageError(f"unknown quantity {qn!r}")


def _violations(cfg: SweepConfig, rows: list[dict]) -> list[str]:
    if cfg.quantity == "brun-titchmarsh":
        return [f"Brun-Titchmarsh fails at q={r['q']} x={r['x']} a={r['a']}" for r in rows if not r["holds"]]
    return []


def render(rows: list[dict], fmt_name: str, columns: Sequence[str] | None = None, single: bool = False) -> str:
    if fmt_name == "json":
        data = [_json_value(r) for r in rows]
        return json.dumps(data[0] if single and len(data) == 1 else data, indent=2) + "\n"
    cols = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        w.writerow([fmt(";".join(r[c]) if isinstance(r.get(c), list) else r.get(c)) for c in cols])
    return buf.getvalue()


def run(cfg: SweepConfig) -> int:
    """Evaluate the whole grid; rows come out in grid order regardless of threads."""
    pts = cfg.points or build_points(cfg)
    threads = max(1, int(cfg.threads))
    if threads > 1 and len(pts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            chunks = list(pool.map(lambda p: evaluate_point(cfg, p, 1), pts))
    else:
        chunks = [evaluate_point(cfg, p, threads) for p in pts]
    rows = [r for chunk in chunks for r in chunk]
    columns = SUM_COLUMNS if cfg.quantity in ("t-sum", "T-sum", "shifted-sum", "bv") else None
    text = render(rows, cfg.format, columns, single=len(pts) == 1)
    _write_output(cfg.out, text)
    bad = _violations(cfg, rows)
    if bad:
        for b in bad[:10]:
            print(b, file=sys.stderr)
        return 1
    return 0


def _write_output(out: str | None, text: str) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    tmp = path.with_name(path.name + ".partial")
    try:
        tmp.write_text(text, encoding="utf-8", newline="\n")
        tmp.replace(path)
    finally:
        if tmp.exists():
            tmp.unlink()


# ---------------------------------------------------------------- argparse


def _global_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global")
    g.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="worker threads (default: all cores)")
    g.add_argument("--mode", choices=("exact", "fast"), default=argparse.SUPPRESS)
    g.add_argument("--out", default=argparse.SUPPRESS, help="output path (default stdout)")
    g.add_argument("--format", choices=("csv", "json"), default=argparse.SUPPRESS)
    g.add_argument("--json", dest="format", action="store_const", const="json", default=argparse.SUPPRESS,
                   help="same as --format json")
    g.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomly sampled instances")
    g.add_argument("--timing", action="store_true", default=argparse.SUPPRESS, help="fill the elapsed-ms column")
    g.add_argument("--config", default=argparse.SUPPRESS, help="JSON or YAML file with flag values")
    return p


_SUBCOMMANDS: dict[str, list[tuple[str, str]]] = {
    "pi2": [("q", "moduli"), ("x1", "bound for p1"), ("x2", "bound for p2"), ("a", "shift(s), default 1"),
            ("l", "target class(es), default all units"), ("eps", "epsilon, default 0.01")],
    "decomp": [("q", "moduli"), ("x1", "bound for p1"), ("x2", "bound for p2"), ("a", "shift(s)"), ("l", "target class(es)")],
    "t-sum": [("q", "moduli"), ("x", "bounds"), ("kernel", "von-mangoldt or prime-indicator")],
    "T-sum": [("Q", "modulus caps"), ("x", "bounds"), ("kernel", "von-mangoldt or prime-indicator")],
    "shifted-sum": [("q", "moduli"), ("x", "bounds"), ("a", "shift(s)"), ("char", "one character, e.g. 5:exps=[2]")],
    "bv": [("x", "bounds"), ("Qcap", "modulus caps"), ("A", "exponent A for the printed threshold")],
    "brun-titchmarsh": [("q", "moduli"), ("x", "bounds"), ("a", "classes, default all units")],
    "goldbach": [("q", "moduli"), ("l", "classes, default all units")],
    "nontriviality": [("q", "moduli"), ("a", "shift(s)"), ("exponents", "exponents e, x = ceil(q^e)")],
}

_HELP = {
    "pi2": "exact pair count, main term and character split (JSON by default)",
    "decomp": "principal and non-principal parts of the pair count, checked against the count",
    "t-sum": "sum over characters mod q of the prefix maximum of the character sum",
    "T-sum": "weighted prefix maxima over primitive characters of modulus up to Q",
    "shifted-sum": "sum of chi(p + a) over primes p <= x",
    "bv": "averaged progression error sum_q max_y max_l |pi(y;q,l) - Li(y)/phi(q)|",
    "brun-titchmarsh": "check pi(x;q,a) <= 2x / (phi(q) ln(2x/q))",
    "goldbach": "least sum of two odd primes in each residue class",
    "nontriviality": "max over non-principal chi of |T(chi, x)| / x at x = ceil(q^e)",
}


def build_parser() -> argparse.ArgumentParser:
    parent = _global_parent()
    parser = argparse.ArgumentParser(prog="shiftprimes", description=__doc__.splitlines()[0], parents=[parent])
    sub = parser.add_subparsers(dest="command")
    for name, opts in _SUBCOMMANDS.items():
        sp = sub.add_parser(name, parents=[parent], help=_HELP[name])
        for opt, helptext in opts:
            sp.add_argument(f"--{opt}", default=argparse.SUPPRESS, help=helptext)
        if name == "goldbach":
            sp.add_argument("--jutila", action="store_true", default=argparse.SUPPRESS,
                            help="report max_l G(q,l)/q^(11/8) per odd prime q instead")
    sp = sub.add_parser("verify", parents=[parent], help="run a property suite; exit 0 iff every check passes")
    sp.add_argument("suite", choices=SUITES)
    sp.add_argument("--scale", choices=("quick", "full"), default=argparse.SUPPRESS)
    sp = sub.add_parser("run", parents=[parent], help="run a sweep described entirely by --config")
    return parser


def _load_config(path: str) -> dict:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    try:
        data = json.loads(text) if path.endswith(".json") else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a mapping")
    return {str(k).replace("-", "_"): v for k, v in data.items()}


def _env_settings() -> dict:
    out = {}
    for key in GLOBAL_DEFAULTS:
        v = os.environ.get(ENV_PREFIX + key.upper())
        if v is not None:
            out[key] = v
    return out


def _resolve(ns: argparse.Namespace) -> tuple[str, dict]:
    flags = {k.replace("-", "_"): v for k, v in vars(ns).items()}
    cfg_file = _load_config(flags.pop("config")) if "config" in flags else {}
    command = flags.pop("command", None)
    if command in (None, "run"):
        command = cfg_file.pop("quantity", None) or cfg_file.pop("command", None)
        if command is None:
            raise UsageError("no subcommand given (and no 'quantity' in --config)")
    merged = {**GLOBAL_DEFAULTS, **cfg_file, **_env_settings(), **flags}
    return command, merged


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    out_path = None
    try:
        command, opts = _resolve(ns)
        if command == "verify":
            return _verify(opts)
        if command not in QUANTITIES:
            raise UsageError(f"unknown quantity {command!r}")
        out_path = opts.get("out")
        fmt_name = opts.get("format") or ("json" if command == "pi2" else "csv")
        cfg = SweepConfig(
            quantity=command,
            options={k: v for k, v in opts.items() if k not in GLOBAL_DEFAULTS},
            out=out_path,
            format=fmt_name,
            threads=parse_number(opts["threads"]),
            mode=str(opts["mode"]),
            seed=parse_number(opts["seed"]),
            timing=str(opts["timing"]).lower() in ("1", "true", "yes"),
        )
        if cfg.mode not in ("exact", "fast"):
            raise UsageError(f"--mode must be exact or fast, got {cfg.mode!r}")
        if cfg.format not in ("csv", "json"):
            raise UsageError(f"--format must be csv or json, got {cfg.format!r}")
        if command == "goldbach" and opts.get("jutila"):
            qs = parse_grid(opts.get("q"), "q")
            rows = [r.__dict__ for r in jutila_ratio_scan(qs)]
            _write_output(out_path, render(rows, cfg.format))
            return 0
        cfg.points = build_points(cfg)
        return run(cfg)
    except UsageError as exc:
        print(f"shiftprimes: error: {exc}", file=sys.stderr)
        return 2
    except (GuardError, OverflowGuardError) as exc:
        print(f"shiftprimes: guard exceeded: {exc}", file=sys.stderr)
        return 3
    except (InvariantViolation, InstanceError) as exc:
        print(f"shiftprimes: invariant violated: {exc}", file=sys.stderr)
        return 1


def _verify(opts: dict) -> int:
    results = run_suite(opts["suite"], opts.get("scale", "quick"), parse_number(opts.get("seed", 0)))
    status = 0
    for r in results:
        print(r.line())
        if not r.passed:
            if status == 0:
                print(f"  first counterexample: {r.counterexample}")
            status = 1
    return status


if __name__ == "__main__":
    sys.exit(main())
