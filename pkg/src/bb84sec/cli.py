"""Command-line front end: ``bb84sec validate|bounds|brute-check|simulate``.

Aggregate reports are a single JSON document; ``bounds`` emits one JSON
record per line. Keys are sorted so identical inputs give identical bytes.
Exit status is 0 on success, 1 when a check fails, 2 on bad input.
"""

from __future__ import annotations

import argparse
import itertools
import json
import sys
from typing import Any, Iterable

import numpy as np

from . import attack as attack_mod
from . import gf2, protocol, security
from .scenario import Scenario, ScenarioError, load_scenario

SWEEPABLE = {"n": int, "r": int, "alpha": float, "p_test": float, "delta": float}
EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _dumps(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, allow_nan=True)


class _Output:
    def __init__(self, path: str | None):
        self.path = path
        self.lines: list[str] = []

    def emit(self, obj: Any) -> None:
        self.lines.append(_dumps(obj))

    def close(self) -> None:
        text = "".join(line + "\n" for line in self.lines)
        if self.path:
            with open(self.path, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def parse_sweep(spec: str) -> tuple[str, list]:
    """``param=lo:hi:steps`` -> (param, inclusive evenly spaced values)."""
    try:
        name, rng = spec.split("=", 1)
        lo, hi, steps = rng.split(":")
        steps = int(steps)
        lo_f, hi_f = float(lo), float(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad sweep {spec!r}; expected param=lo:hi:steps") from None
    name = name.strip()
    if name not in SWEEPABLE:
        raise argparse.ArgumentTypeError(f"cannot sweep {name!r}; choose from {sorted(SWEEPABLE)}")
    if steps < 1:
        raise argparse.ArgumentTypeError("steps must be >= 1")
    values = np.linspace(lo_f, hi_f, steps).tolist() if steps > 1 else [lo_f]
    if SWEEPABLE[name] is int:
        values = [int(round(v)) for v in values]
    return name, values


def cmd_validate(sc: Scenario, args) -> tuple[dict, int]:
    checks = []
    for i, a in enumerate(sc.attacks):
        viol = attack_mod.validate(a)
        checks.append({
            "item": f"attack[{i}]",
            "ok": not viol,
            "violations": [{"invariant": v.invariant, "residual": v.residual} for v in viol],
        })
        if not viol:
            checks[-1]["error_rates"] = attack_mod.error_rates(a).to_dict()
    if sc.code_strings is not None:
        v, ecc, bits = sc.code_strings
        problems = gf2.code_problems(v, ecc, bits)
        checks.append({"item": "code", "ok": not problems, "violations": [{"invariant": p} for p in problems]})
        if not problems and (sc.noise_raw is not None or sc.attacks):
            try:
                noise = sc.noise()
                checks.append({"item": "noise", "ok": True, "violations": [],
                               "worst_case_consistent": noise.worst_case_consistent})
            except (ScenarioError, ValueError) as exc:
                checks.append({"item": "noise", "ok": False, "violations": [{"invariant": str(exc)}]})
    ok = all(c["ok"] for c in checks)
    return {"command": "validate", "passed": ok, "checks": checks}, EXIT_OK if ok else EXIT_FAIL


def _grid(sweeps: list[tuple[str, list]]) -> Iterable[dict]:
    names = [s[0] for s in sweeps]
    for combo in itertools.product(*(s[1] for s in sweeps)):
        yield dict(zip(names, combo))


def _bound_record(sc: Scenario, base: dict, mode: str) -> dict:
    params = dict(base)
    weights = params.pop("weights", None)
    if mode == "per_coset" and weights is None and sc.code_strings is not None:
        cw = gf2.coset_weights(sc.code())
        weights = cw.weights
        params.setdefault("n", sc.code().n)
        params.setdefault("r", sc.code().r)
        params.setdefault("alpha", cw.alpha())
    missing = [k for k in ("n", "r", "alpha", "p_test", "delta") if k not in params]
    if missing:
        raise security.DomainError(f"missing bound parameters: {missing}")
    rep = security.total_info_bound(
        params["n"], params["r"], params["alpha"], params["p_test"], params["delta"],
        mode=mode, weights=weights,
    )
    return rep.to_dict()


def cmd_bounds(sc: Scenario, args, out: _Output) -> int:
    mode = args.mode or sc.bounds.get("mode", "uniform")
    base = {k: v for k, v in sc.bounds.items() if k != "mode"}
    status = EXIT_OK

    if sc.code_strings is not None and (sc.noise_raw is not None or sc.attacks):
        code, noise = sc.code(), sc.noise()
        tr, terms = security.trace_norm_bound(code, noise)
        out.emit({
            "record": "code",
            "n": code.n,
            "r": code.r,
            "tr_delta_bound": tr,
            "per_coset_terms": terms,
            "sd_bound": min(1.0, 0.5 * tr),
            "sd_bound_loose": min(1.0, tr),
            "coset_weights": gf2.coset_weights(code).weights,
            "noise_worst_case_consistent": noise.worst_case_consistent,
        })

    sweeps = args.sweep or []
    if base or sweeps or mode == "per_coset":
        for index, point in enumerate(_grid(sweeps)):
            params = {**base, **point}
            rec = {"record": "bound", "index": index, "params": params}
            try:
                rec["report"] = _bound_record(sc, params, mode)
            except (ValueError, gf2.GF2Error) as exc:
                rec["error"] = str(exc)
                status = EXIT_FAIL
            out.emit(rec)

    if args.find_witness:
        w = security.find_witness(p_test=args.witness_p_test, r_frac=args.witness_r_frac)
        if w is None:
            out.emit({"record": "witness", "found": False})
            status = EXIT_FAIL
        else:
            hp = security.verify_uniform_bound_mp(w)
            out.emit({
                "record": "witness",
                "found": True,
                "report": w.to_dict(),
                "log2_total_high_precision": hp,
                "verified": hp <= -100.0,
            })
            if hp > -100.0:
                status = EXIT_FAIL
    return status


def cmd_brute_check(sc: Scenario, args) -> tuple[dict, int]:
    code, noise = sc.code(), sc.noise()
    seed = args.seed if args.seed is not None else (sc.protocol.rng_seed if sc.protocol else 0)
    rep = security.brute_force_check(code, noise, np.random.default_rng(seed), povm_trials=args.povm_trials)
    doc = {"command": "brute-check", "seed": seed, **rep.to_dict()}
    return doc, EXIT_OK if rep.passed else EXIT_FAIL


def cmd_simulate(sc: Scenario, args) -> tuple[dict, int]:
    if sc.protocol is None:
        raise ScenarioError("protocol", "section is missing")
    cfg = sc.protocol
    if args.seed is not None:
        cfg = protocol.ProtocolConfig(cfg.n_raw, cfg.p_allowed, args.seed)
    model = sc.error_model()
    tr = protocol.run_protocol(cfg, model)
    doc: dict[str, Any] = {"command": "simulate", "rng_seed": cfg.rng_seed, "n_raw": cfg.n_raw,
                           "p_allowed": cfg.p_allowed, "transcript": tr.to_dict()}
    if isinstance(model, attack_mod.AttackSpec):
        doc["error_rates"] = attack_mod.error_rates(model).to_dict()
    trials = args.trials if args.trials is not None else sc.monte_carlo.get("trials")
    status = EXIT_OK
    if trials:
        mc = sc.monte_carlo
        if "n_sifted" in mc:
            per_bit = [float(mc.get("p", 0.0))] * int(mc["n_sifted"])
        else:
            bases = np.asarray(tr.alice_bases)
            probs = protocol.matched_error_probs(cfg.n_raw, bases, model)
            per_bit = probs[tr.sifted_indices].tolist()
        delta = float(mc.get("delta", 0.05))
        res = protocol.hoeffding_monte_carlo(cfg, per_bit, delta, int(trials))
        doc["monte_carlo"] = res.to_dict()
        if not res.within_bound:
            status = EXIT_FAIL
    return doc, status


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bb84sec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("config", help="scenario JSON file")
        sp.add_argument("--out", help="write the report here instead of stdout")
        sp.add_argument("--seed", type=int, help="override the scenario's rng seed")

    common(sub.add_parser("validate", help="check attack and code invariants"))
    b = sub.add_parser("bounds", help="evaluate information bounds, optionally over a sweep")
    common(b)
    b.add_argument("--sweep", action="append", type=parse_sweep, metavar="PARAM=LO:HI:STEPS")
    b.add_argument("--mode", choices=["uniform", "per_coset"])
    b.add_argument("--find-witness", action="store_true",
                   help="search for parameters bounding Eve's information by 2^-100")
    b.add_argument("--witness-p-test", type=float, default=0.02)
    b.add_argument("--witness-r-frac", type=float, default=0.2)
    bc = sub.add_parser("brute-check", help="compare closed forms with explicit enumeration")
    common(bc)
    bc.add_argument("--povm-trials", type=int, default=100)
    s = sub.add_parser("simulate", help="run the sifting/testing simulator")
    common(s)
    s.add_argument("--trials", type=int, help="Monte-Carlo trials for the sampling bound")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = _Output(args.out)
    try:
        sc = load_scenario(args.config)
        if args.command == "validate":
            doc, status = cmd_validate(sc, args)
            out.emit(doc)
        elif args.command == "bounds":
            status = cmd_bounds(sc, args, out)
        elif args.command == "brute-check":
            doc, status = cmd_brute_check(sc, args)
            out.emit(doc)
        else:
            doc, status = cmd_simulate(sc, args)
            out.emit(doc)
    except ScenarioError as exc:
        print(f"bb84sec: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        print(f"bb84sec: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    out.close()
    return status


if __name__ == "__main__":
    sys.exit(main())
