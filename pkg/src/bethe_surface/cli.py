"""Command-line front end.

Every subcommand prints one JSON object ``{"ok", "results", "diagnostics"}``
with sorted keys and floats at 17 significant digits.  Complex numbers are
``[re, im]`` pairs and points at infinity are ``{"inf": true}``.

Exit codes: 0 success, 1 a verification failed, 2 validation error,
3 numerical failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from pathlib import Path

import numpy as np

from .errors import NumericalFailure, ValidationError

log = logging.getLogger("bethe_surface")

EXIT_OK, EXIT_FAILED, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 3, 64


# ---------------------------------------------------------------------------
# encoding
# ---------------------------------------------------------------------------

def parse_complex(v):
    """Accept ``3``, ``"1+2i"``, ``"i"``, ``[re, im]`` or ``{"inf": true}``."""
    if isinstance(v, dict):
        if v.get("inf"):
            return complex("inf")
        raise ValidationError(f"cannot parse {v!r} as a complex number")
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ValidationError(f"complex pairs need two entries, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    if isinstance(v, str):
        s = v.strip().replace(" ", "").replace("I", "i").replace("i", "j")
        if s in ("j", "+j", "-j"):
            s = s.replace("j", "1j")
        try:
            return complex(s)
        except ValueError as exc:
            raise ValidationError(f"cannot parse {v!r} as a complex number") from exc
    return complex(v)


def to_plain(obj):
    """Convert results to JSON-ready Python objects (complex as ``[re, im]``)."""
    if hasattr(obj, "to_json"):
        return to_plain(obj.to_json())
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        z = complex(obj)
        if math.isinf(z.real) or math.isinf(z.imag):
            return {"inf": True}
        return [float(z.real), float(z.imag)]
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def dumps(obj) -> str:
    """Canonical JSON: sorted keys and ``%.17g`` floats."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        if math.isnan(obj) or math.isinf(obj):
            return "null"
        text = format(obj + 0.0, ".17g")  # folds -0.0 into 0.0
        return text if any(c in text for c in ".en") else text + ".0"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(k)}:{dumps(obj[k])}" for k in sorted(obj)) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _load(text):
    """JSON from an inline string or a file path."""
    if text is None:
        return None
    t = text.strip()
    if t[:1] in "[{\"" or t[:1].isdigit() or t[:1] == "-":
        try:
            return json.loads(t)
        except json.JSONDecodeError:
            pass
    p = Path(text)
    if not p.exists():
        raise ValidationError(f"{text!r} is neither JSON nor an existing file")
    return json.loads(p.read_text())


def _complex_list(text):
    return [parse_complex(v) for v in _load(text)]


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def _config(args):
    obj = _load(args.config)
    if obj is None:
        raise ValidationError("--config is required")
    if args.genus == 0:
        from .genus0 import Genus0Config
        return Genus0Config.from_json(obj)
    if args.genus == 1:
        from .elliptic import EllipticConfig
        return EllipticConfig.from_json(obj)
    from .genusg import GenusGConfig
    return GenusGConfig.from_json(obj)


def cmd_check(args):
    c = _config(args)
    if args.genus == 0:
        from .genus0 import residue_check, sb_residual
        sb, oracle = sb_residual(c), residue_check(c, normalized=True)
        out = {"sb_residual": sb, "residue_oracle": oracle}
    elif args.genus == 1:
        from .elliptic import residue_check_elliptic, sb_residual_elliptic
        sb, oracle = sb_residual_elliptic(c), residue_check_elliptic(c)
        out = {"sb_residual": sb, "residue_oracle": oracle, "balance": c.balance()}
    else:
        from .genusg import residue_oracle_genusg, sb_residual_genusg
        sb = sb_residual_genusg(c)
        oracle = np.array([residue_oracle_genusg(c, k) for k in c.zero_indices[:-1]])
        b1, b2 = c.reduced_characteristic()
        out = {"sb_residual": sb, "residue_oracle": oracle, "beta1": c.beta1, "beta2": c.beta2,
               "reduced_beta1": b1, "reduced_beta2": b2, "beta_residual": c.beta_residual}
    norm = float(np.max(np.abs(sb), initial=0.0))
    out["sb_norm"] = norm
    out["satisfies_sb"] = norm < args.tol
    return out


def cmd_solve(args):
    poles = _complex_list(args.poles)
    orders = [int(r) for r in _load(args.orders)]
    rng = np.random.default_rng(args.seed)
    if args.genus == 0:
        from .genus0 import solve_sb
        fixed = _complex_list(args.fixed_zeros) if args.fixed_zeros else ()
        sols = solve_sb(poles, orders, fixed, tol=args.tol, n_seeds=args.n_seeds, rng=rng)
        from .genus0 import sb_residual
        return {"solutions": [s.to_json() for s in sols],
                "residuals": [float(np.max(np.abs(sb_residual(s)), initial=0.0)) for s in sols]}
    if args.genus == 1:
        from .elliptic import sb_residual_elliptic, solve_sb_elliptic
        sigma = parse_complex(_load(args.sigma))
        sols = solve_sb_elliptic(sigma, poles, orders, args.beta1, args.beta2, tol=args.tol, rng=rng)
        return {"solutions": [s.to_json() for s in sols],
                "residuals": [float(np.max(np.abs(sb_residual_elliptic(s)), initial=0.0)) for s in sols]}
    raise ValidationError("solve supports genus 0 and 1 only")


def cmd_tau_yy(args):
    c = _config(args)
    if args.genus == 0:
        from .genus0 import tau_yy
        return {"tau_yy": tau_yy(c)}
    if args.genus == 1:
        from .elliptic import tau_yy_elliptic
        return {"tau_yy": tau_yy_elliptic(c)}
    from .genusg import tau_yy_genusg, tau_yy_genusg_squared
    return {"tau_yy": tau_yy_genusg(c, args.ordered), "tau_yy_squared": tau_yy_genusg_squared(c, args.ordered),
            "ordered_pairs": args.ordered}


def _curve(args):
    from .hypersurface import HyperellipticCurve
    if args.curve is None:
        raise ValidationError("--curve is required")
    return HyperellipticCurve(_complex_list(args.curve))


def cmd_tau_b(args):
    if args.genus == 0:
        from .genus0 import tau_b_cubed
        c = _config(args)
        val, branches = tau_b_cubed(c, return_branches=True)
        return {"tau_b_cubed": val,
                "branches": [{"i": i, "j": j, "exponent": e, "log": lg} for i, j, e, lg in branches]}
    from .genusg import GenusGConfig, HyperellipticFunction, tau_b_three_halves
    obj = _load(args.config)
    C = _curve(args) if args.curve else None
    c = GenusGConfig.from_json(obj, C)
    fobj = _load(args.function)
    F = HyperellipticFunction(c.curve, [parse_complex(v) for v in fobj["a"]], [parse_complex(v) for v in fobj["b"]])
    samples = []
    for s in _load(args.samples):
        x = parse_complex(s["x"])
        samples.append(c.curve.lift(c.curve.point(x, int(s.get("sheet", 1)))))
    val, q2 = tau_b_three_halves(c, F, samples, rel_tol=max(args.tol, 1e-12))
    return {"tau_b_three_halves": val, "Q_squared": q2}


def cmd_accessory(args):
    c = _config(args)
    if args.genus == 0:
        from .genus0 import accessory
        return {"H": accessory(c)}
    if args.genus == 1:
        from .elliptic import accessory_elliptic
        return {"H": accessory_elliptic(c, exact=args.exact), "exact": args.exact}
    from .genusg import accessory_genusg
    return {"H": accessory_genusg(c, exact=args.exact), "exact": args.exact}


def cmd_potential(args):
    if args.map:
        from .numkit import ComplexRational
        from .schwarz import potential_from_map
        m = _load(args.map)
        F = ComplexRational([parse_complex(v) for v in m["numerator"]], [parse_complex(v) for v in m.get("denominator", [1])])
        u = potential_from_map(F)
        xs = _complex_list(args.x)
        return {"x": xs, "u": [u(x) for x in xs]}
    c = _config(args)
    if args.genus == 0:
        from .genus0 import phi_value
        from .numkit import taylor_coefficients
        xs = _complex_list(args.x)
        vals = []
        for x in xs:
            co = taylor_coefficients(lambda z: phi_value(c, z), x, 1e-2, 2)
            vals.append(2 * co[2] / co[0])
        return {"x": xs, "u": vals}
    if args.genus == 1:
        from .elliptic import potential_elliptic
        xs = _complex_list(args.x)
        return {"x": xs, "u": [potential_elliptic(c, x, sb_tol=max(args.tol, 1e-8)) for x in xs]}
    from .genusg import potential_genusg
    vals = []
    pts = _load(args.x)
    for s in pts:
        L = c.curve.lift(c.curve.point(parse_complex(s["x"]), int(s.get("sheet", 1))))
        vals.append(potential_genusg(c, L)(0.0))
    return {"points": pts, "u": vals, "chart": "x"}


def cmd_monodromy(args):
    from . import monodromy as M
    from .numkit import ComplexRational, ContourSpec
    loops = None
    if args.loop:
        spec = _load(args.loop)
        spec = spec if isinstance(spec, list) else [spec]
        loops = [ContourSpec.from_json(s) for s in spec]
    if args.map:
        m = _load(args.map)
        target = ComplexRational([parse_complex(v) for v in m["numerator"]], [parse_complex(v) for v in m.get("denominator", [1])])
    elif args.function:
        from .genusg import HyperellipticFunction
        C = _curve(args)
        fobj = _load(args.function)
        target = HyperellipticFunction(C, [parse_complex(v) for v in fobj["a"]], [parse_complex(v) for v in fobj["b"]])
    else:
        if args.genus != 0:
            raise ValidationError("config-based monodromy is available for genus 0")
        target = _config(args)
    rep = M.check_trivial(target, loops, tol=max(args.tol, 1e-12))
    return rep.to_json()


def cmd_periods(args):
    if args.genus == 1:
        from .elliptic import period_conditions
        c = _config(args)
        A, B = period_conditions(c, tol=args.tol)
        return {"periods": [A, B], "cycles": ["a", "b"]}
    C = _curve(args) if args.curve else None
    if args.config:
        from .genusg import GenusGConfig, period_conditions_genusg
        c = GenusGConfig.from_json(_load(args.config), C)
        per, res = period_conditions_genusg(c)
        return {"periods": per, "residues": res, "cycles": [f"{n}{j + 1}" for n in "ab" for j in range(c.g)]}
    if C is None:
        raise ValidationError("--curve or --config is required")
    return C.period_data_json()


def cmd_theta(args):
    from .riemanntheta import ThetaCharacteristic, theta, theta_char, theta_deriv
    om = np.array([[parse_complex(v) for v in row] for row in _load(args.omega)])
    z = np.array(_complex_list(args.z))
    out = {}
    if args.char:
        ch = _load(args.char)
        char = ThetaCharacteristic(ch["beta1"], ch["beta2"])
        out["value"] = theta_char(char, z, om, args.tol)
        out["parity"] = char.parity
    elif args.deriv:
        out["value"] = theta_deriv([int(k) for k in _load(args.deriv)], z, om, args.tol)
    else:
        out["value"] = theta(z, om, args.tol)
    return out


def cmd_fit_covering(args):
    from .genus0 import critical_values_residual, fit_covering
    r = [int(v) for v in _load(args.r)]
    z = _complex_list(args.z)
    F, cfg = fit_covering(r, z, tol=args.tol, rng=np.random.default_rng(args.seed))
    return {"covering": F.to_json(), "config": cfg.to_json(), "critical_value_residual":
            critical_values_residual(F, cfg, z)}


def cmd_verify_suite(args):
    from .acceptance import run_all
    only = [int(k) for k in args.only.split(",")] if args.only else None
    results = run_all(args.level, only)
    for r in results:
        log.info(r.line())
    gating_ok = all(r.passed for r in results if r.gating)
    return {"criteria": [r.to_json() for r in results], "all_gating_passed": gating_ok}, gating_ok


COMMANDS = {
    "check": cmd_check, "solve": cmd_solve, "tau-yy": cmd_tau_yy, "tau-b": cmd_tau_b,
    "accessory": cmd_accessory, "potential": cmd_potential, "monodromy": cmd_monodromy,
    "periods": cmd_periods, "theta": cmd_theta, "fit-covering": cmd_fit_covering,
    "verify-suite": cmd_verify_suite,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-10, help="tolerance passed to the kernels")
    common.add_argument("--seed", type=int, default=0, help="seed for randomized steps")
    common.add_argument("--json-out", help="write the result here instead of stdout")
    common.add_argument("--timing", action="store_true", help="add wall time to diagnostics")
    common.add_argument("--genus", type=int, default=0)
    common.add_argument("--config", help="config JSON (inline or path)")
    common.add_argument("--curve", help="polynomial coefficients of P(x), lowest degree first")

    p = _Parser(prog="bethe-surface", description="Monodromy-free potentials on Riemann surfaces.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("check", parents=[common], help="SB residuals and the quadrature oracle")
    s = sub.add_parser("solve", parents=[common], help="solve the SB system for the zeros")
    s.add_argument("--poles", required=True)
    s.add_argument("--orders", required=True)
    s.add_argument("--fixed-zeros")
    s.add_argument("--sigma", default='"i"')
    s.add_argument("--beta1", type=int, default=0)
    s.add_argument("--beta2", type=int, default=0)
    s.add_argument("--n-seeds", type=int, default=64)
    s = sub.add_parser("tau-yy", parents=[common], help="Yang-Yang function")
    s.add_argument("--ordered", action="store_true", help="product over ordered pairs (genus >= 2)")
    s = sub.add_parser("tau-b", parents=[common], help="Bergman tau-function")
    s.add_argument("--function", help='{"a": [...], "b": [...]} for F = a(x) + b(x) y')
    s.add_argument("--samples", help='[{"x": ..., "sheet": 1}, ...]')
    s = sub.add_parser("accessory", parents=[common], help="accessory parameters")
    s.add_argument("--exact", action="store_true", help="include the characteristic terms")
    s = sub.add_parser("potential", parents=[common], help="evaluate the potential")
    s.add_argument("--map", help='{"numerator": [...], "denominator": [...]}')
    s.add_argument("--x", required=True)
    s = sub.add_parser("monodromy", parents=[common], help="monodromy of the potential around loops")
    s.add_argument("--map")
    s.add_argument("--function")
    s.add_argument("--loop", help="loop JSON or a list of loops")
    sub.add_parser("periods", parents=[common], help="period data or period conditions")
    s = sub.add_parser("theta", parents=[common], help="Riemann theta function")
    s.add_argument("--omega", required=True)
    s.add_argument("--z", required=True)
    s.add_argument("--char")
    s.add_argument("--deriv")
    s = sub.add_parser("fit-covering", parents=[common], help="rational covering with given critical values")
    s.add_argument("--r", required=True)
    s.add_argument("--z", required=True)
    s = sub.add_parser("verify-suite", parents=[common], help="run the acceptance criteria")
    s.add_argument("--level", choices=["quick", "full"], default="quick")
    s.add_argument("--only", help="comma-separated criterion numbers")
    return p


def _digest(argv):
    h = hashlib.sha256()
    for a in argv:
        h.update(a.encode())
        h.update(b"\0")
        if Path(a).is_file():
            h.update(Path(a).read_bytes())
    return h.hexdigest()[:16]


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code not in (None, 0) else (EXIT_USAGE if exc.code else 0)
    if not args.tol > 0:
        print("--tol must be positive", file=sys.stderr)
        return EXIT_USAGE
    t0 = time.perf_counter()
    diagnostics = {"subcommand": args.command, "tol": args.tol, "seed": args.seed, "input_digest": _digest(argv)}
    code = EXIT_OK
    try:
        out = COMMANDS[args.command](args)
        ok = True
        if isinstance(out, tuple):
            out, ok = out
            code = EXIT_OK if ok else EXIT_FAILED
        payload = {"ok": ok, "results": to_plain(out)}
    except ValidationError as exc:
        payload, code = {"ok": False, "error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_VALIDATION
    except NumericalFailure as exc:
        payload, code = {"ok": False, "error": {"type": type(exc).__name__, "message": str(exc)}}, EXIT_NUMERICAL
    if args.timing:
        diagnostics["wall_time"] = time.perf_counter() - t0
    payload["diagnostics"] = diagnostics
    text = dumps(to_plain(payload))
    if args.json_out:
        Path(args.json_out).write_text(text + "\n")
    else:
        print(text)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
