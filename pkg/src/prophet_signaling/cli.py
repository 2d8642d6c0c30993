"""Command-line front end.

Exit codes: 0 success, 1 a reproduced or checked claim does not hold, 2 bad input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from .dist import Dist, discrete, linear, mixture, point_mass, uniform
from .mc import SimConfig, simulate, simulate_signaling, simulate_threshold
from .prophet import Instance, expected_max, nonstrategic_payoff, spectrum
from .reproduce import CASES, reproduce
from .signaling import best_response
from .stackelberg import (
    DP, HEM, MEDIAN, Policy, Profile, UnsupportedCase, solve_frozen, solve_two_box,
)
from .strategic import strategic_payoff

COLUMNS = ("case_id", "quantity", "value", "reference", "verdict")
MASS_SLACK = 1e-9


class InputError(ValueError):
    pass


# instance parsing ---------------------------------------------------------------


def _num(x, where: str) -> float:
    if isinstance(x, bool):
        raise InputError(f"{where}: expected a number, got {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    if isinstance(x, str):
        try:
            return float(Fraction(x.strip()))
        except (ValueError, ZeroDivisionError):
            pass
    raise InputError(f"{where}: expected a number, got {x!r}")


def _field(obj: dict, key: str, where: str):
    if key not in obj:
        raise InputError(f"{where}: missing field {key!r}")
    return obj[key]


def _check_mass(total: float, where: str) -> None:
    if abs(total - 1.0) > MASS_SLACK:
        raise InputError(f"{where}: masses sum to {total!r}, not 1")


def dist_from_json(obj, where: str = "dist") -> Dist:
    """Build a Dist from its JSON description; mixtures are flattened."""
    if not isinstance(obj, dict):
        raise InputError(f"{where}: expected an object")
    kind = _field(obj, "type", where)
    try:
        if kind == "uniform":
            return uniform(_num(_field(obj, "a", where), f"{where}.a"), _num(_field(obj, "b", where), f"{where}.b"))
        if kind == "pointmass":
            return point_mass(_num(_field(obj, "v", where), f"{where}.v"))
        if kind == "discrete":
            pts = _field(obj, "points", where)
            if not isinstance(pts, list) or not pts:
                raise InputError(f"{where}.points: expected a nonempty list")
            parsed = []
            for k, pt in enumerate(pts):
                if not isinstance(pt, (list, tuple)) or len(pt) != 2:
                    raise InputError(f"{where}.points[{k}]: expected [value, mass]")
                parsed.append((_num(pt[0], f"{where}.points[{k}][0]"), _num(pt[1], f"{where}.points[{k}][1]")))
            _check_mass(sum(m for _, m in parsed), f"{where}.points")
            return discrete(parsed, normalize=True)
        if kind == "linear":
            args = [_num(_field(obj, k, where), f"{where}.{k}") for k in ("lo", "hi", "f_lo", "f_hi")]
            lo, hi, fa, fb = args
            _check_mass(0.5 * (fa + fb) * (hi - lo), where)
            return linear(lo, hi, fa, fb, normalize=True)
        if kind == "mixture":
            ws = _field(obj, "weights", where)
            cs = _field(obj, "components", where)
            if not isinstance(ws, list) or not isinstance(cs, list) or len(ws) != len(cs) or not ws:
                raise InputError(f"{where}: weights and components must be equal-length nonempty lists")
            weights = [_num(w, f"{where}.weights[{k}]") for k, w in enumerate(ws)]
            _check_mass(sum(weights), f"{where}.weights")
            total = sum(weights)
            comps = [dist_from_json(c, f"{where}.components[{k}]") for k, c in enumerate(cs)]
            return mixture([w / total for w in weights], comps)
    except InputError:
        raise
    except ValueError as e:
        raise InputError(f"{where}: {e}") from None
    raise InputError(f"{where}.type: unknown distribution type {kind!r}")


def parse_instance(source) -> Instance:
    """Instance from a path or JSON text: {"boxes": [...]} or a bare list of dists."""
    text = str(source)
    if not text.lstrip().startswith(("{", "[")):
        try:
            text = Path(source).read_text()
        except OSError as e:
            raise InputError(f"cannot read {source}: {e.strerror}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    boxes = doc.get("boxes") if isinstance(doc, dict) else doc
    if not isinstance(boxes, list) or not boxes:
        raise InputError("expected a nonempty list of boxes")
    return Instance([dist_from_json(b, f"boxes[{k}]") for k, b in enumerate(boxes)])


# output -----------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, float):
        return format(v, ".6g")
    return "" if v is None else str(v)


def emit_report(rows: Sequence[tuple], fmt: str = "table") -> str:
    """Render (case_id, quantity, value, reference, verdict) rows."""
    rows = [tuple(r) for r in rows]
    if fmt == "json":
        return json.dumps([dict(zip(COLUMNS, r)) for r in rows], indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(COLUMNS)
        for r in rows:
            w.writerow([_fmt(x) for x in r])
        return buf.getvalue()
    cells = [COLUMNS] + [tuple(_fmt(x) for x in r) for r in rows]
    widths = [max(len(c[i]) for c in cells) for i in range(len(COLUMNS))]
    lines = ["  ".join(c[i].ljust(widths[i]) for i in range(len(COLUMNS))).rstrip() for c in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


# commands ---------------------------------------------------------------------


def _name(path: str) -> str:
    return Path(path).stem if not path.lstrip().startswith(("{", "[")) else "inline"


def cmd_opt(a):
    inst = parse_instance(a.file)
    return [(_name(a.file), "opt", expected_max(inst), "", "")], 0


def cmd_spectrum(a):
    inst = parse_instance(a.file)
    sp = spectrum(inst)
    n = _name(a.file)
    return [(n, k, getattr(sp, k), "", "") for k in ("t_kw", "t_sc", "median_lower", "t_star")], 0


def cmd_best_response(a):
    inst = parse_instance(a.file)
    rows, n = [], _name(a.file)
    for i, d in enumerate(inst, 1):
        s = best_response(d, a.threshold)
        rows.append((n, f"box{i}.accept_prob", s.accept_prob, "", s.kind))
        rows.append((n, f"box{i}.reject_prob", s.reject_prob, "", s.kind))
        if s.cutoff is not None:
            rows.append((n, f"box{i}.cutoff", s.cutoff, "", s.kind))
            rows.append((n, f"box{i}.partial_mass", s.partial_mass, "", s.kind))
        if s.low_posterior is not None:
            rows.append((n, f"box{i}.low_posterior", s.low_posterior, "", s.kind))
    return rows, 0


def cmd_payoff(a):
    inst = parse_instance(a.file)
    f = strategic_payoff if a.mode == "strategic" else nonstrategic_payoff
    u, opt = f(inst, a.threshold), expected_max(inst)
    n = _name(a.file)
    return [(n, f"payoff_{a.mode}", u, "", ""), (n, "opt", opt, "", ""), (n, "ratio", u / opt if opt else 1.0, "", "")], 0


POLICIES = {"dp": DP, "hem": HEM, "median": MEDIAN}


def _equilibrium(inst: Instance, policy: str, frozen: bool):
    kind = POLICIES[policy] + ("_H" if frozen else "")
    if frozen:
        return kind, solve_frozen(kind, list(inst))
    if len(inst) != 2:
        raise InputError("prior-free equilibria are solved for two boxes only; use --frozen for N boxes")
    try:
        return kind, solve_two_box(kind, inst[0], inst[1])
    except UnsupportedCase as e:
        raise InputError(str(e)) from None


def cmd_equilibrium(a):
    inst = parse_instance(a.file)
    kind, out = _equilibrium(inst, a.policy, a.frozen)
    n = _name(a.file)
    rows = [(n, f"threshold_box{i}", t, kind, "") for i, t in enumerate(out.thresholds, 1)]
    rows += [(n, f"win_prob_box{i}", w, "", "") for i, w in enumerate(out.win_probs, 1)]
    rows += [(n, "payoff", out.searcher_payoff, "", ""), (n, "opt", out.opt, "", "")]
    tag = "below-half" if out.ratio_vs_half_opt < 1 else "at-least-half"
    rows.append((n, "payoff/(OPT/2)", out.ratio_vs_half_opt, "", tag))
    return rows, 0


def cmd_simulate(a):
    inst = parse_instance(a.file)
    cfg = SimConfig(a.samples, a.seed, a.streams)
    n = _name(a.file)
    if a.policy == "fixed":
        if a.threshold is None:
            raise InputError("--policy fixed needs --threshold")
        if a.mode == "strategic":
            sim, analytic = simulate_signaling(inst, a.threshold, cfg), strategic_payoff(inst, a.threshold)
        else:
            sim, analytic = simulate_threshold(inst.boxes, a.threshold, cfg), nonstrategic_payoff(inst, a.threshold)
    else:
        kind, out = _equilibrium(inst, a.policy, a.frozen)
        sim, analytic = simulate(Policy(kind), out.profile, cfg), out.searcher_payoff
    ok = sim.agrees(analytic)
    rows = [
        (n, "payoff_mean", sim.payoff_mean, f"samples={sim.samples} seed={a.seed}", ""),
        (n, "payoff_stderr", sim.payoff_stderr, "", ""),
        (n, "analytic", analytic, "4 stderr", "agree" if ok else "FAIL"),
    ]
    rows += [(n, f"win_freq_box{i}", w, "", "") for i, w in enumerate(sim.win_freqs, 1)]
    return rows, 0 if ok else 1


def cmd_reproduce(a):
    if a.case == "all":
        reps = [reproduce(c, a.count) for c in CASES]
        return [r.summary_row() for r in reps], 0 if all(r.passed for r in reps) else 1
    if a.case not in CASES:
        raise InputError(f"unknown case id {a.case!r}; known: {', '.join(CASES)}, all")
    rep = reproduce(a.case, a.count)
    return rep.rows, 0 if rep.passed else 1


def _suites():
    from . import suites

    return {
        "kw": lambda n: reproduce("kw-robustness", n),
        "iid": lambda n: reproduce("iid-robustness", n),
        "hemh-2box": lambda n: reproduce("hemh-2box-positive", n),
        "dph-2box": lambda n: reproduce("dph-2box-positive", n),
        "mc-agreement": lambda n: suites.check_mc(n or 200),
        "best-response-oracle": lambda n: suites.check_best_response(n or 100),
        "hem-fixed-point": lambda n: suites.check_hem(n or 200),
    }


def cmd_check(a):
    table = _suites()
    if a.suite not in table:
        raise InputError(f"unknown suite {a.suite!r}; known: {', '.join(table)}")
    rep = table[a.suite](a.count)
    return rep.rows, 0 if rep.passed else 1


def _default_seed() -> int:
    raw = os.environ.get("PROPHET_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PROPHET_SEED must be an integer, got {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("table", "csv", "json"), default="table")
    p = argparse.ArgumentParser(prog="prophet-signaling", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, parents=[common])
        sp.set_defaults(fn=fn)
        return sp

    add("opt", cmd_opt, "expected maximum reward").add_argument("file")
    add("spectrum", cmd_spectrum, "threshold spectrum").add_argument("file")
    sp = add("best-response", cmd_best_response, "optimal pooling per box")
    sp.add_argument("file")
    sp.add_argument("--threshold", type=float, required=True)
    sp = add("payoff", cmd_payoff, "searcher payoff of a threshold")
    sp.add_argument("file")
    sp.add_argument("--threshold", type=float, required=True)
    sp.add_argument("--mode", choices=("strategic", "classic"), default="strategic")
    sp = add("equilibrium", cmd_equilibrium, "Stackelberg outcome for a policy")
    sp.add_argument("file")
    sp.add_argument("--policy", choices=tuple(POLICIES), required=True)
    sp.add_argument("--frozen", action="store_true", help="thresholds fixed from priors")
    sp = add("simulate", cmd_simulate, "Monte Carlo estimate of the searcher payoff")
    sp.add_argument("file")
    sp.add_argument("--policy", choices=tuple(POLICIES) + ("fixed",), default="fixed")
    sp.add_argument("--frozen", action="store_true")
    sp.add_argument("--threshold", type=float)
    sp.add_argument("--mode", choices=("strategic", "classic"), default="strategic")
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--streams", type=int, default=1)
    sp = add("reproduce", cmd_reproduce, "reproduce a registered case, or all")
    sp.add_argument("case")
    sp.add_argument("--count", type=int, default=None, help="instances for randomized cases")
    sp = add("check", cmd_check, "run a property or oracle suite")
    sp.add_argument("suite")
    sp.add_argument("--count", type=int, default=None)
    return p


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
        if getattr(args, "threshold", None) is not None and args.threshold < 0:
            raise InputError("--threshold must be nonnegative")
        rows, code = args.fn(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    out.write(emit_report(rows, args.format))
    return code


def main() -> None:
    sys.exit(run())
