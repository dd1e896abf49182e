"""Reproducible experiment driver.

Every run prints a single artifact (JSON by default, CSV for tabular data)
with the full configuration echoed, so a run is reproducible from its own
output.  Wall time goes to stderr, keeping artifacts byte-identical across
repeated runs with the same config and seed.

Exit codes: 0 success, 1 bad input, 2 budget refusal.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

from .errors import BudgetExceeded
from .fourier import best_factor_search, count_structured, enumerate_structured, function_entropy, polynomial_to_text
from .gf2 import Subspace, rooted_subspace_packing
from .hereditary import (
    census,
    core_membership,
    core_membership_refute,
    count_free_extensions,
    forb,
    property_critical_number,
    ramsey_dimension,
    typical_structure_fraction,
    verify_ramsey_result,
)
from .matroid import (
    Matroid,
    Pattern,
    RealFunction,
    builtin_pattern,
    count_instances,
    critical_number,
    density,
    density_in_function,
    find_instance,
    load_json_dict,
    load_table,
)

SCHEMA = "binmat/1"

_NAME_ALIAS = re.compile(r"^(ones|zeros)(\d+)$")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; this driver reserves 2 for
    budget refusals, so parse errors raise and map to exit 1."""

    def error(self, message):
        raise _UsageError(f"{self.prog}: {message}")


class _UsageError(ValueError):
    pass


# --- input loading ----------------------------------------------------------------

def _load_object(spec: str):
    """File path (text or JSON table) or builtin pattern name."""
    path = Path(spec)
    if path.exists():
        text = path.read_text()
        if text.lstrip().startswith("{"):
            return load_json_dict(json.loads(text))
        return load_table(text)
    name = spec
    m = _NAME_ALIAS.match(spec)
    if m:
        name = f"{m.group(1)}:{m.group(2)}"
    return builtin_pattern(name)


def _pattern_arg(spec: str) -> Pattern:
    obj = _load_object(spec)
    return obj.to_pattern() if isinstance(obj, Matroid) else obj


def _matroid_arg(spec: str) -> Matroid:
    obj = _load_object(spec)
    if isinstance(obj, Pattern):
        if not obj.is_star_free:
            raise ValueError(f"{spec!r} has wildcard cells; a matroid is required")
        obj = obj.to_matroid()
    return obj


def _property_arg(specs) -> object:
    return forb(*(_pattern_arg(s) for s in specs))


def _values_arg(path: str) -> list:
    """Whitespace-separated exact values ('1/3', '0.25', '1')."""
    toks = Path(path).read_text().split()
    return [Fraction(t) for t in toks]


def _parse_range(spec: str) -> tuple[int, int]:
    lo, _, hi = spec.partition(":")
    lo = int(lo)
    hi = int(hi) if hi else lo
    if lo < 0 or hi < lo:
        raise ValueError(f"bad range {spec!r}")
    return lo, hi


# --- output ------------------------------------------------------------------------

def _enc(x):
    """Fractions to 'p/q'; counts are pre-rendered as decimal strings by the
    subcommands, structural integers (dims, seeds) stay JSON numbers."""
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, dict):
        return {str(k): _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    return x


def _render_json(artifact: dict) -> str:
    return json.dumps(artifact, sort_keys=True, indent=2) + "\n"


def _render_csv(artifact: dict, columns, rows) -> str:
    buf = io.StringIO()
    for key in ("schema", "command"):
        buf.write(f"# {key}={artifact[key]}\n")
    for key, val in sorted(artifact["config"].items()):
        buf.write(f"# config.{key}={json.dumps(val)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    if rows is None:
        writer.writerow(["key", "value"])
        flat = artifact["result"]
        for key in sorted(flat):
            writer.writerow([key, json.dumps(flat[key], sort_keys=True)])
    else:
        writer.writerow(columns)
        for row in rows:
            writer.writerow([row[c] for c in columns])
    return buf.getvalue()


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


# --- subcommands --------------------------------------------------------------------
# each returns (result_dict, row_list_or_None, csv_columns_or_None)

def _cmd_census(args):
    P = _property_arg(args.forbid)
    lo, hi = _parse_range(args.n)
    rows = [census(P, n).to_json_dict() for n in range(lo, hi + 1)]
    return {"rows": rows}, rows, ["n", "count", "entropy"]


def _cmd_entropy_table(args):
    P = _property_arg(args.forbid)
    lo, hi = _parse_range(args.n)
    if P.forbidden:
        try:
            chi = property_critical_number(P)
        except ValueError:
            chi = 0  # trivial property: no constant family survives
    else:
        chi = None  # Forb(empty): every matroid qualifies
    chi_term = 1.0 if chi is None else 1.0 - 2.0 ** (-chi)
    rows = []
    violations = 0
    for n in range(lo, hi + 1):
        row = census(P, n).to_json_dict()
        count = int(row["count"])
        k = n if chi is None else min(chi, n)
        floor_log2 = (1 << n) - (1 << (n - k))
        ok = count >= 1 << floor_log2
        violations += not ok
        row.update(
            {
                "entropy_ratio": row["entropy"] / (1 << n),
                "chi_term": chi_term,
                "sandwich_ok": ok,
            }
        )
        rows.append(row)
    result = {
        "rows": rows,
        "chi": "inf" if chi is None else chi,
        "violations": violations,
    }
    cols = ["n", "count", "entropy", "entropy_ratio", "chi_term", "sandwich_ok"]
    return result, rows, cols


def _cmd_chi(args):
    P = _property_arg(args.forbid)
    return {"chi": property_critical_number(P)}, None, None


def _cmd_critical(args):
    M = _matroid_arg(args.input)
    return {"dim": M.dim, "critical": critical_number(M)}, None, None


def _cmd_instance(args):
    src = _pattern_arg(args.pattern)
    tgt = _pattern_arg(args.target)
    phi = find_instance(src, tgt)
    result = {
        "found": phi is not None,
        "map": list(phi.images) if phi else None,
    }
    if args.count:
        result["count"] = str(count_instances(src, tgt))
    return result, None, None


def _cmd_density(args):
    N = _pattern_arg(args.pattern)
    M = _matroid_arg(args.input)
    if args.samples is None:
        t = density(N, M)
        return {"density": t, "density_float": float(t)}, None, None
    est = density_in_function(
        N, RealFunction.from_matroid(M), samples=args.samples, seed=args.seed
    )
    return (
        {"estimate": float(est), "samples": args.samples, "seed": args.seed},
        None,
        None,
    )


def _cmd_ramsey(args):
    kwargs = {} if args.budget is None else {"node_budget": args.budget}
    res = ramsey_dimension(args.d, int(args.n), **kwargs)
    verified = verify_ramsey_result(res, samples=1000, seed=args.seed)
    return (
        {
            "flat_dim": res.flat_dim,
            "value": res.value,
            "counterexamples": {
                str(n): M.to_json_dict() for n, M in sorted(res.counterexamples.items())
            },
            "transcript": res.transcript,
            "verified": verified,
        },
        None,
        None,
    )


def _cmd_pack(args):
    n, du, dw = int(args.n), args.d, args.k
    if not du <= dw <= n:
        raise ValueError("need dim(U) <= dim(W) <= dim(V)")
    U = Subspace.from_vectors(n, [1 << i for i in range(du)])
    W = Subspace.from_vectors(n, [1 << i for i in range(dw)])
    fam = rooted_subspace_packing(U, W, n)
    d = n - dw + du
    strict = du < dw < n
    return (
        {
            "m": len(fam),
            "member_dim": d,
            "guarantee": (1 << (n - 2 * d)) if strict and n >= 2 * d else 1,
            "subspaces": [S.to_json_dict() for S in fam],
        },
        None,
        None,
    )


def _cmd_core(args):
    M = _matroid_arg(args.input)
    P = _property_arg(args.forbid)
    if args.samples is None:
        return {"in_core": core_membership(M, P, args.k)}, None, None
    refuted = core_membership_refute(M, P, args.k, args.samples, seed=args.seed)
    verdict = False if refuted is False else None
    return (
        {"in_core": verdict, "samples": args.samples, "seed": args.seed},
        None,
        None,
    )


def _cmd_ext_count(args):
    M = _matroid_arg(args.input)
    Np = _pattern_arg(args.pattern)
    rep = count_free_extensions(M, int(args.n), Np)
    return (
        {
            "count": str(rep.count),
            "total": str(rep.total),
            "base_dim": rep.base_dim,
            "ambient_dim": rep.ambient_dim,
            "pattern_dim": rep.pattern_dim,
            "codim": rep.codim,
            "applicable": rep.applicable,
            "epsilon": rep.epsilon,
            "bound_log2": rep.bound_log2,
            "bound_holds": rep.holds,
        },
        None,
        None,
    )


def _cmd_o2_check(args):
    P = _property_arg(args.forbid)
    lo, hi = _parse_range(args.n)
    rows = []
    for n in range(lo, hi + 1):
        frac = typical_structure_fraction(P, n, args.k)
        total = census(P, n).count
        joint = frac * total
        assert joint.denominator == 1
        rows.append(
            {
                "n": n,
                "k": args.k,
                "structured_count": str(joint.numerator),
                "member_count": str(total),
                "fraction": f"{frac.numerator}/{frac.denominator}",
                "fraction_float": float(frac),
            }
        )
    cols = ["n", "k", "structured_count", "member_count", "fraction", "fraction_float"]
    return {"rows": rows}, rows, cols


def _cmd_decomp_probe(args):
    g = _values_arg(args.input)
    factor, residual = best_factor_search(g, args.d, args.k)
    return (
        {
            "degree": args.d,
            "complexity": args.k,
            "n_parts": factor.n_parts,
            "polys": [polynomial_to_text(P) for P in factor.polys],
            "residual": residual,
        },
        None,
        None,
    )


def _cmd_structured(args):
    vals = _values_arg(args.input)
    size = len(vals) + 1
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError("need 2^n - 1 point values")
    f = RealFunction(n, tuple(vals))
    count = count_structured(f)
    bound_log2 = function_entropy(f)
    result = {
        "count": str(count),
        "entropy_bound_log2": bound_log2,
        "bound_holds": count == 0 or float(count) <= 2.0**bound_log2 * (1 + 1e-12),
    }
    if args.list:
        result["tables"] = [M.to_json_dict() for M in enumerate_structured(f)]
    return result, None, None


_DISPATCH = {
    "census": _cmd_census,
    "entropy-table": _cmd_entropy_table,
    "chi": _cmd_chi,
    "critical": _cmd_critical,
    "instance": _cmd_instance,
    "density": _cmd_density,
    "ramsey": _cmd_ramsey,
    "pack": _cmd_pack,
    "core": _cmd_core,
    "ext-count": _cmd_ext_count,
    "o2-check": _cmd_o2_check,
    "decomp-probe": _cmd_decomp_probe,
    "structured": _cmd_structured,
}


def _add_common(sub, *, forbid=False, n=False, k=False, d=False, input_=False,
                pattern=False, target=False, samples=False):
    if forbid:
        sub.add_argument(
            "--forbid",
            action="append",
            default=[],
            metavar="PAT",
            help="forbidden pattern: file path or builtin "
            "(O2, I1, BB:k:d, ones:d, zeros:d); repeatable",
        )
    if n:
        sub.add_argument("--n", required=True, help="dimension, or LO:HI range")
    if k:
        sub.add_argument("--k", type=int, required=True, help="codimension parameter")
    if d:
        sub.add_argument("--d", type=int, required=True, help="dimension parameter")
    if input_:
        sub.add_argument("--input", required=True, help="input file (or builtin name)")
    if pattern:
        sub.add_argument("--pattern", required=True, help="pattern file or builtin name")
    if target:
        sub.add_argument("--target", required=True, help="target file or builtin name")
    if samples:
        sub.add_argument(
            "--samples", type=int, default=None,
            help="Monte-Carlo sample count (exact mode when omitted)",
        )
    sub.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    sub.add_argument("--budget", type=int, default=None, help="search node budget")
    sub.add_argument("--out", default=None, help="output file (default stdout)")
    sub.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )


def _build_parser() -> _Parser:
    parser = _Parser(prog="binmat", description=__doc__)
    subs = parser.add_subparsers(dest="command", required=True)

    _add_common(subs.add_parser("census", help="labeled member counts"),
                forbid=True, n=True)
    _add_common(subs.add_parser("entropy-table", help="entropy rows with the critical-number limit"),
                forbid=True, n=True)
    _add_common(subs.add_parser("chi", help="critical number of a property"),
                forbid=True)
    _add_common(subs.add_parser("critical", help="critical number of a matroid"),
                input_=True)
    p = subs.add_parser("instance", help="find a pattern instance")
    p.add_argument("--count", action="store_true", help="also count all instances")
    _add_common(p, pattern=True, target=True)
    _add_common(subs.add_parser("density", help="instance density of a pattern in a matroid"),
                pattern=True, input_=True, samples=True)
    _add_common(subs.add_parser("ramsey", help="least dimension forcing a monochromatic flat"),
                n=True, d=True)
    _add_common(subs.add_parser("pack", help="rooted subspace packing (coordinate U <= W)"),
                n=True, k=True, d=True)
    _add_common(subs.add_parser("core", help="does every k-extension stay in the property"),
                input_=True, forbid=True, k=True, samples=True)
    _add_common(subs.add_parser("ext-count", help="pattern-free extension count and bound"),
                input_=True, pattern=True, n=True)
    _add_common(subs.add_parser("o2-check", help="fraction of members with small critical number"),
                forbid=True, n=True, k=True)
    _add_common(subs.add_parser("decomp-probe", help="best low-complexity factor of a function"),
                input_=True, d=True, k=True)
    p = subs.add_parser("structured", help="level-structured matroid count")
    p.add_argument("--list", action="store_true", help="enumerate the tables too")
    _add_common(p, input_=True)
    return parser


def _config_echo(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "command"}
    return _enc(cfg)


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = _build_parser().parse_args(argv)
        result, rows, cols = _DISPATCH[args.command](args)
        artifact = {
            "schema": SCHEMA,
            "command": args.command,
            "config": _config_echo(args),
            "result": _enc(result),
        }
        if args.format == "csv":
            text = _render_csv(artifact, cols, _enc(rows) if rows is not None else None)
        else:
            text = _render_json(artifact)
        _emit(text, args.out)
        return 0
    except SystemExit as e:  # --help
        return int(e.code or 0)
    except BudgetExceeded as e:
        print(f"binmat: budget refused: {e}", file=sys.stderr)
        return 2
    except (_UsageError, ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"binmat: error: {e}", file=sys.stderr)
        return 1
    finally:
        print(f"wall_time_s={time.perf_counter() - started:.3f}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
