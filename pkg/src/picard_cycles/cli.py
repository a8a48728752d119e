"""picard-cycles command line.

Exit codes: 0 pass, 2 configuration error, 3 inconclusive, 4 property failure.
Options may also come from ``--config FILE`` holding ``key = value`` lines
(keys are option names, with - or _); command-line flags win.  If no --out is
given and PICARD_CYCLES_OUTDIR is set, reports go to <dir>/<command>.json,
otherwise to stdout.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__

EXIT_OK, EXIT_CONFIG, EXIT_INCONCLUSIVE, EXIT_FAIL = 0, 2, 3, 4
REPORT_SCHEMA = "picard-cycles/report/1"
OUTDIR_ENV = "PICARD_CYCLES_OUTDIR"


class ConfigError(ValueError):
    pass


def read_config(path: str) -> dict:
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _merge_config(parser: argparse.ArgumentParser, args: argparse.Namespace, cfg: dict) -> None:
    actions = {a.dest: a for a in parser._actions}
    for a in parser._actions:
        for opt in a.option_strings:
            actions.setdefault(opt.lstrip("-").replace("-", "_"), a)
    for key, raw in cfg.items():
        if key not in actions or key in ("config", "command"):
            raise ConfigError(f"unknown config key {key!r}")
        action = actions[key]
        key = action.dest
        if getattr(args, key) not in (None, False):
            continue
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                value = action.type(raw) if action.type else raw
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"bad value for {key}: {raw!r}") from exc
            if action.choices is not None and value not in action.choices:
                raise ConfigError(f"bad value for {key}: {raw!r}")
        setattr(args, key, value)


def _fill_defaults(args: argparse.Namespace, defaults: dict) -> None:
    for k, v in defaults.items():
        if getattr(args, k, None) is None:
            setattr(args, k, v)


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _config_dict(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config", "func")}


def emit(args, result: dict, status: str) -> None:
    cfg = _config_dict(args)
    report = {
        "schema": REPORT_SCHEMA,
        "command": args.command,
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "config": cfg,
        "config_hash": config_hash(cfg),
        "status": status,
        "result": result,
    }
    text = json.dumps(report, indent=2, sort_keys=True, default=_json_default)
    out = args.out
    if out is None and os.environ.get(OUTDIR_ENV):
        out = str(Path(os.environ[OUTDIR_ENV]) / f"{args.command}.json")
    if out is None or out == "-":
        sys.stdout.write(text + "\n")
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text + "\n")


def _json_default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return str(o)
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load {path}: {exc}") from exc


def _field(D):
    from .quad_field import make_field

    if D is None:
        raise ConfigError("--D is required")
    try:
        return make_field(D)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _padic(p, M, ctx=None):
    from .hida import PadicCtx

    if p is None:
        raise ConfigError("--p is required")
    try:
        return PadicCtx(p, M, ctx)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


# subcommands

def cmd_series(args) -> int:
    from .cogdell_series import cusp_series, default_params, higher_weight_series
    from .qexp import InsufficientPrecision, modularity_check

    _fill_defaults(args, {"D": 7, "terms": 100, "k": 0, "n0_norm": "1", "h_sigma": "1", "constant": "0",
                          "samples": 200, "tol": 1e-8, "seed": 0})
    _field(args.D)
    if args.terms < 1:
        raise ConfigError("--terms must be at least 1")
    try:
        params = default_params(args.D, N=args.terms, weight_k=args.k, n0_norm=Fraction(args.n0_norm),
                                h_sigma=Fraction(args.h_sigma), constant_term=Fraction(args.constant))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    f = cusp_series(params) if args.k == 0 else higher_weight_series(params)
    result = {"series": f.to_json(), "params": params.to_json()}
    status, code = "pass", EXIT_OK
    if args.check:
        try:
            rep = modularity_check(f, samples=args.samples, tol=args.tol, seed=args.seed)
        except InsufficientPrecision as exc:
            result["modularity"] = {"status": "inconclusive", "reason": str(exc)}
            status, code = "inconclusive", EXIT_INCONCLUSIVE
        else:
            result["modularity"] = rep.to_json()
            status = rep.status
            code = {"pass": EXIT_OK, "inconclusive": EXIT_INCONCLUSIVE}.get(rep.status, EXIT_FAIL)
    emit(args, result, status)
    return code


def _verify_targets(args) -> dict:
    from . import big_pairing as bp
    from . import hida, level_groups as lg
    from .quad_field import make_field, split_type

    p, r, seed = args.p, args.r, args.seed
    out = {}
    targets = ["gamma-lemma", "lemma46", "inclusions", "pairing-diagram", "projector", "hida-congruence"]
    chosen = targets if args.target == "all" else [args.target]
    for tgt in chosen:
        if tgt == "gamma-lemma":
            rep = lg.verify_gamma(r, p, args.samples, seed)
            out[tgt] = {"pass": rep["pass"], "items": {k: v["pass"] for k, v in rep["items"].items()}}
        elif tgt == "lemma46":
            D = args.D if args.D is not None else next(
                d for d in range(1, 200) if _sqfree(d) and split_type(make_field(d), p) == "split"
                and lg.default_varpi(make_field(d), p))
            ctx = _field(D)
            if p == 2 or split_type(ctx, p) != "split":
                raise ConfigError(f"lemma46 needs an odd prime split in Q(sqrt(-{D}))")
            varpis = lg.default_varpi(ctx, p)
            if not varpis:
                raise ConfigError(f"no principal prime above {p} in Q(sqrt(-{D}))")
            reps = [lg.lemma46_check(ctx, v, p, args.s) for v in varpis]
            out[tgt] = {"pass": all(x["pass"] for x in reps), "runs": reps}
        elif tgt == "inclusions":
            rep = lg.inclusion_check(p, r, args.samples, seed)
            out[tgt] = {"pass": rep["pass"], "failures": rep["failures"]}
        elif tgt == "normality":
            reps = [lg.normality_check("K1", "K", p, r, args.samples, seed),
                    lg.normality_check("K", "K0", p, r, args.samples, seed)]
            out[tgt] = {"pass": all(x["pass"] for x in reps), "runs": reps}
        elif tgt == "pairing-diagram":
            ok = 0
            rng = np.random.default_rng(seed)
            for i in range(args.instances):
                T = bp.regular_tower(p, 8, 4, d0=int(rng.integers(1, 3)), seed=int(rng.integers(2 ** 31)))
                lv = int(rng.integers(1, T.R))
                m = T.modulus
                x = rng.integers(0, m, T.level(lv + 1).rank)
                y = rng.integers(0, m, T.level(lv + 1).rank)
                lhs = bp.pair_r(T.level(lv + 1), x, y).project()
                rhs = bp.pair_r(T.level(lv), T.push(lv + 1, x), T.push(lv + 1, y))
                ok += lhs == rhs
            out[tgt] = {"pass": ok == args.instances, "passed": ok, "instances": args.instances}
        elif tgt == "projector":
            rng = np.random.default_rng(seed)
            ok = 0
            for i in range(args.instances):
                q = int(rng.choice([2, 3, 5, 11]))
                d, M = int(rng.integers(1, 9)), int(rng.integers(1, 13))
                A = rng.integers(0, q ** M, size=(d, d)).tolist()
                model = hida.FiniteUpModel(q, M, A)
                e, _ = hida.ordinary_projector(model)
                from . import modmat

                mm = model.modulus
                good = (np.array_equal(modmat.matmul(e, e, mm), e)
                        and np.array_equal(modmat.matmul(e, model.matrix, mm), modmat.matmul(model.matrix, e, mm))
                        and modmat.rank_mod_p(e, q) == hida.unit_root_count(A, q))
                ok += good
            out[tgt] = {"pass": ok == args.instances, "passed": ok, "instances": args.instances}
        elif tgt == "hida-congruence":
            D = args.D if args.D is not None else 7
            pc = _padic(p, 20, _field(D))
            F = hida.eisenstein_family(pc.field, pc, 50)
            rng = np.random.default_rng(seed)
            ok = 0
            for i in range(args.instances):
                m = int(rng.integers(0, 4))
                k = int(rng.integers(2, 50))
                kp = k + (p - 1) * p ** m * int(rng.integers(1, 5))
                ok += hida.congruence_check(F, k, kp, m)
            out[tgt] = {"pass": ok == args.instances, "passed": ok, "instances": args.instances}
    return out


def _sqfree(n):
    from .quad_field import is_squarefree

    return is_squarefree(n)


def cmd_verify(args) -> int:
    _fill_defaults(args, {"target": "all", "p": 3, "r": 2, "samples": 10_000, "instances": 100, "seed": 0, "s": 5})
    res = _verify_targets(args)
    ok = all(v["pass"] for v in res.values())
    emit(args, res, "pass" if ok else "fail")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_levels(args) -> int:
    from . import level_groups as lg

    _fill_defaults(args, {"p": 3, "r": 2, "verify": "all", "samples": 10_000, "seed": 0})
    if args.r < 1:
        raise ConfigError("--r must be at least 1")
    res = {}
    if args.verify in ("gamma", "all"):
        res["gamma"] = lg.verify_gamma(args.r, args.p, args.samples, args.seed)
    if args.verify in ("inclusions", "all"):
        res["inclusions"] = lg.inclusion_check(args.p, args.r, args.samples, args.seed)
    if args.verify == "normality":
        res["normality"] = [lg.normality_check("K1", "K", args.p, args.r, args.samples, args.seed),
                            lg.normality_check("K", "K0", args.p, args.r, args.samples, args.seed)]
    if args.member:
        if Path(args.member).is_file():
            g = _load_json(args.member)
        else:
            try:
                g = json.loads(args.member)
            except json.JSONDecodeError as exc:
                raise ConfigError(f"--member: not a file or JSON matrix: {exc}") from exc
        if not (isinstance(g, list) and len(g) == 3 and all(isinstance(r, list) and len(r) == 3 for r in g)):
            raise ConfigError("--member expects a 3x3 integer matrix")
        res["membership"] = {lv: lg.member(lv, g, args.p, args.r) for lv in lg.LEVELS}
    ok = all(v["pass"] for v in res.values() if isinstance(v, dict) and "pass" in v)
    if "normality" in res:
        ok = ok and all(x["pass"] for x in res["normality"])
    emit(args, res, "pass" if ok else "fail")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_hida(args) -> int:
    from . import hida, modmat
    from .qexp import eisenstein3

    _fill_defaults(args, {"D": 7, "p": 11, "M": 20, "terms": 50, "family": "eisenstein", "seed": 0})
    res, ok = {}, True
    if args.project:
        try:
            model = hida.FiniteUpModel.from_json(_load_json(args.project))
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"bad model file: {exc}") from exc
        e, its = hida.ordinary_projector(model)
        m = model.modulus
        idem = np.array_equal(modmat.matmul(e, e, m), e)
        comm = np.array_equal(modmat.matmul(e, model.matrix, m), modmat.matmul(model.matrix, e, m))
        res["projector"] = {"e": e.tolist(), "iterations": its, "idempotent": idem, "commutes": comm,
                            "rank_mod_p": modmat.rank_mod_p(e, model.p)}
        ok &= idem and comm
    if args.specialize is not None or args.congruence:
        ctx = _field(args.D)
        pc = _padic(args.p, args.M, ctx)
        if args.family != "eisenstein":
            raise ConfigError(f"unknown family {args.family!r}")
        F = hida.eisenstein_family(ctx, pc, args.terms)
        res["family"] = F.to_json()
        if args.specialize is not None:
            f = hida.specialize(F, hida.ArithPoint(args.specialize), args.terms)
            res["specialization"] = f.to_json()
            if args.specialize == 3:
                ref = eisenstein3(ctx, args.terms)
                # p-deprivation: drop divisors divisible by p
                match = all(
                    f[n] == sum(c for d, c in _p_deprived_terms(ctx, n, 3, args.p)) % pc.modulus
                    for n in range(1, args.terms + 1)
                )
                res["matches_eisenstein3_p_deprived"] = match
                res["eisenstein3_prefix"] = [str(ref[n]) for n in range(min(args.terms, 10) + 1)]
                ok &= match
        if args.congruence:
            if args.k is None or args.kprime is None or args.m is None:
                raise ConfigError("--congruence needs --k, --kprime and --m")
            try:
                passed = hida.congruence_check(F, args.k, args.kprime, args.m)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
            res["congruence"] = {"k": args.k, "kprime": args.kprime, "m": args.m, "pass": passed}
            ok &= passed
    if not res:
        raise ConfigError("nothing to do: give --project, --specialize or --congruence")
    emit(args, res, "pass" if ok else "fail")
    return EXIT_OK if ok else EXIT_FAIL


def _p_deprived_terms(ctx, n, k, p):
    from .quad_field import chi

    for d in range(1, n + 1):
        if n % d == 0 and d % p:
            yield d, chi(ctx, d) * d ** (k - 1)


def _parse_specialize(text: str) -> tuple[int, int]:
    try:
        kv = dict(part.split("=") for part in text.split(","))
        return int(kv["k"]), int(kv["r"])
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"--specialize expects k=<int>,r=<int>, got {text!r}") from exc


def cmd_bigpair(args) -> int:
    from . import big_pairing as bp

    _fill_defaults(args, {"terms": 50, "seed": 0, "model": "regular", "p": 3, "R": 4, "d0": 2})
    if args.bind_D is not None:
        _field(args.bind_D)
        _padic(args.p, 8, _field(args.bind_D))
        T, phi, moments, params = bp.bind_trivial_context(args.bind_D, args.p, 8, args.R, args.terms)
        xis, zeta = None, None
    else:
        if args.context:
            try:
                T = bp.PairingTower.from_json(_load_json(args.context))
            except (KeyError, ValueError) as exc:
                raise ConfigError(f"bad context file: {exc}") from exc
        elif args.model == "regular":
            T = bp.regular_tower(args.p, 8, args.R, args.d0, args.seed)
        else:
            T = bp.trivial_tower(args.p, 8, args.R)
        rng = np.random.default_rng(args.seed)
        m = T.modulus
        top = T.level(T.R).rank
        if args.xis:
            data = _load_json(args.xis)
            xis = {int(n): bp.BigClass.from_json(b) for n, b in data["classes"].items()}
        else:
            xis = {n: bp.build_tower_from_top(T, rng.integers(0, m, top)) for n in range(1, args.terms + 1)}
        zeta = (bp.BigClass.from_json(_load_json(args.zeta)) if args.zeta
                else bp.build_tower_from_top(T, rng.integers(0, m, top)))
        try:
            phi = bp.phi_expansion(T, xis, zeta, args.terms)
        except ValueError as exc:
            emit(args, {"error": str(exc)}, "fail")
            return EXIT_FAIL
        moments = None
    res = {"phi": phi.to_json(), "incoherent": bp.check_coherence(phi)}
    if args.specialize:
        k, r = _parse_specialize(args.specialize)
        if r not in phi.coeffs:
            raise ConfigError(f"r={r} exceeds the tower height")
        res["specialization"] = bp.nu_specialize(phi, k, r, moments).to_json()
    emit(args, res, "pass")
    return EXIT_OK


def cmd_lattice(args) -> int:
    from .herm_lattice import dual_lattice, norm_counts, rank_one, standard_lattice, theta_series

    _fill_defaults(args, {"D": 7, "terms": 20})
    ctx = _field(args.D)
    L = standard_lattice(ctx)
    dual = dual_lattice(L)
    f = rank_one(L, L.zbasis[2])
    res = {
        "lattice": L.to_json(),
        "det": str(L.det),
        "dual_det": str(dual.det),
        "rank_one_form": f.to_json(),
        "counts": norm_counts(f, args.terms),
        "theta": theta_series(f, args.terms).to_json(),
    }
    emit(args, res, "pass")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="picard-cycles", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key = value file with defaults for these options")
        p.add_argument("--out", help="output path ('-' for stdout)")
        p.add_argument("--seed", type=int)
        return p

    s = common(sub.add_parser("series", help="intersection series and modularity check"))
    s.add_argument("--D", type=int)
    s.add_argument("--terms", type=int)
    s.add_argument("--k", "--weight-k", dest="k", type=int, help="weight parameter (weight 2k+3)")
    s.add_argument("--n0-norm", "--n0", dest="n0_norm")
    s.add_argument("--h-sigma", "--hsigma", dest="h_sigma")
    s.add_argument("--constant", "--const", dest="constant")
    s.add_argument("--check", action="store_true")
    s.add_argument("--samples", type=int)
    s.add_argument("--tol", type=float)
    s.set_defaults(func=cmd_series)

    v = common(sub.add_parser("verify", help="machine checks of the level and pairing statements"))
    v.add_argument("--target", choices=["all", "gamma-lemma", "lemma46", "inclusions", "normality",
                                        "pairing-diagram", "projector", "hida-congruence"])
    v.add_argument("--p", type=int)
    v.add_argument("--r", type=int)
    v.add_argument("--D", type=int)
    v.add_argument("--s", type=int, help="lemma46 works over Z/p^s")
    v.add_argument("--samples", type=int)
    v.add_argument("--instances", type=int)
    v.set_defaults(func=cmd_verify)

    h = common(sub.add_parser("hida", help="families, specializations, projector"))
    h.add_argument("--family", choices=["eisenstein"])
    h.add_argument("--D", type=int)
    h.add_argument("--p", type=int)
    h.add_argument("--M", type=int)
    h.add_argument("--terms", type=int)
    h.add_argument("--specialize", type=int, metavar="K")
    h.add_argument("--congruence", "--check-congruence", dest="congruence", action="store_true")
    h.add_argument("--k", type=int)
    h.add_argument("--kprime", type=int)
    h.add_argument("--m", type=int)
    h.add_argument("--project", metavar="MODEL_JSON")
    h.set_defaults(func=cmd_hida)

    b = common(sub.add_parser("bigpair", help="Lambda-adic expansion from a pairing tower"))
    b.add_argument("--context", metavar="TOWER_JSON")
    b.add_argument("--model", choices=["regular", "trivial"])
    b.add_argument("--p", type=int)
    b.add_argument("--R", type=int)
    b.add_argument("--d0", type=int)
    b.add_argument("--xis", metavar="XIS_JSON")
    b.add_argument("--zeta", metavar="ZETA_JSON")
    b.add_argument("--terms", type=int)
    b.add_argument("--specialize", metavar="k=K,r=R")
    b.add_argument("--bind-D", dest="bind_D", type=int, help="bind the trivial context to series data for D")
    b.set_defaults(func=cmd_bigpair)

    lv = common(sub.add_parser("levels", help="level subgroup checks"))
    lv.add_argument("--p", type=int)
    lv.add_argument("--r", type=int)
    lv.add_argument("--verify", choices=["all", "gamma", "inclusions", "normality", "none"])
    lv.add_argument("--samples", type=int)
    lv.add_argument("--member", metavar="MATRIX_JSON")
    lv.set_defaults(func=cmd_levels)

    la = common(sub.add_parser("lattice", help="standard lattice, dual and rank-one form"))
    la.add_argument("--D", type=int)
    la.add_argument("--terms", type=int)
    la.set_defaults(func=cmd_lattice)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        if args.config:
            _merge_config(subparser, args, read_config(args.config))
        return args.func(args)
    except ConfigError as exc:
        print(f"picard-cycles: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
