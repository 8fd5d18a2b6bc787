"""Command-line runner: adversary, sweep, verify, dsdim, learner, secret, export-reg.

Exit codes: 0 ok, 1 a checked assertion failed, 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import random
import sys
from pathlib import Path

from . import adversary
from .adversary import ConfigurationError, run_experiment, verify_ladder, verify_uniformity
from .hypotheses import enumerate_class
from .regularization import (
    FAMILIES,
    injective_completion,
    resolve_regularizer,
    save_regularizer,
)
from .secretsharing import (
    OtpShares,
    ShamirShare,
    otp_reconstruct,
    otp_share,
    shamir_reconstruct,
    shamir_share,
    verify_secrecy,
)
from .shattering import ds_search
from .strings import BitString
from .transduction import format_fraction, sweep_baseline

EXIT_OK, EXIT_ASSERT, EXIT_CONFIG = 0, 1, 2
OUTPUT_ENV = "OTPLAB_OUTPUT_DIR"
ENUMERABLE_D = 4


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """'1..4' (inclusive), '1,3,4' or '2'."""
    out = []
    try:
        for part in text.split(","):
            lo, sep, hi = part.partition("..")
            out.extend(range(int(lo), int(hi) + 1) if sep else [int(lo)])
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if not out:
        raise UsageError(f"empty range {text!r}")
    return out


def _emit(args, payload: str, default_name: str) -> None:
    sys.stdout.write(payload)
    target = args.out
    if target is None and os.environ.get(OUTPUT_ENV):
        target = Path(os.environ[OUTPUT_ENV]) / default_name
    if target is not None:
        target = Path(target)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(payload)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


def _config(args) -> dict:
    skip = {"func", "out", "workers"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _regularizer(spec: str, d: int, complete: bool):
    c = enumerate_class(2 * d)
    try:
        psi = resolve_regularizer(spec, c, 2 * d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if complete:
        psi = injective_completion(psi)
    elif not psi.is_locally_injective:
        raise UsageError(f"regularizer {spec} is not locally injective; rerun with --complete")
    return psi


def _check_mode(mode: str, d: int) -> None:
    if d < 1:
        raise UsageError(f"d must be >= 1, got {d}")
    if mode == "exhaustive" and d > ENUMERABLE_D:
        raise UsageError(f"d = {d} is too large for exhaustive mode (max {ENUMERABLE_D}); use --mode monte-carlo")


def _report(args, d: int, spec: str):
    _check_mode(args.mode, d)
    psi = _regularizer(spec, d, args.complete)
    config = _config(args) | {"d": d, "reg": spec}
    return run_experiment(d, psi, mode=args.mode, trials=args.trials, rng=random.Random(args.seed),
                          workers=args.workers, config=config)


CSV_FIELDS = ["d", "regularizer", "mode", "draws", "mean", "mean_float", "T1", "T2", "T3", "T4", "cycle_failures"]


def _csv_row(rep) -> dict:
    row = {"d": rep.d, "regularizer": rep.regularizer, "mode": rep.mode, "draws": rep.draws,
           "mean": format_fraction(rep.mean), "mean_float": f"{float(rep.mean):.6f}",
           "cycle_failures": rep.cycle_failures}
    row.update({f"T{i + 1}": f"{float(q):.6f}" for i, q in enumerate(rep.family_means)})
    return row


def _csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def cmd_adversary(args) -> int:
    rep = _report(args, args.d, args.reg)
    if args.format == "csv":
        _emit(args, _csv([_csv_row(rep)]), f"adversary-d{args.d}.csv")
    else:
        _emit(args, _dump(rep.to_json()), f"adversary-d{args.d}.json")
    if args.assert_bound and args.mode == "exhaustive" and not rep.bound_holds:
        print(f"bound violated: mean {format_fraction(rep.mean)} < 1/4", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_sweep(args) -> int:
    specs = [s for s in args.reg.split(",") if s]
    rows, failed = [], False
    for d in parse_range(args.d):
        for spec in specs:
            rep = _report(args, d, spec)
            failed |= rep.mode == "exhaustive" and not rep.bound_holds
            rows.append(_csv_row(rep))
    _emit(args, _csv(rows), "sweep.csv")
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(rows, args.plot)
    return EXIT_ASSERT if args.assert_bound and failed else EXIT_OK


def cmd_verify(args) -> int:
    d = args.d
    if not 1 <= d <= ENUMERABLE_D:
        raise UsageError(f"verify needs 1 <= d <= {ENUMERABLE_D}")
    families = [1, 2, 3, 4] if args.families == "all" else parse_range(args.families)
    if any(f not in (1, 2, 3, 4) for f in families):
        raise UsageError("families must be drawn from 1..4")
    builder = adversary.build_instances
    results = [verify_uniformity(d, f, builder=builder).to_json() for f in families]
    ladder = verify_ladder(d, builder=builder)
    ok = all(r["uniform"] for r in results) and not ladder
    _emit(args, _dump({"d": d, "ok": ok, "uniformity": results, "ladder_failures": ladder,
                       "config": _config(args)}), f"verify-d{d}.json")
    return EXIT_OK if ok else EXIT_ASSERT


def cmd_dsdim(args) -> int:
    try:
        c = enumerate_class(args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    points = parse_range(args.points) if args.points else list(range(2 * args.d))
    res = ds_search(c, points, args.kmax)
    _emit(args, _dump({"d": args.d, "points": points, "kmax": args.kmax, **res.to_json()}), f"dsdim-d{args.d}.json")
    if args.assert_bound and res.k > 2:
        return EXIT_ASSERT
    return EXIT_OK


def cmd_learner(args) -> int:
    if not args.exhaustive:
        raise UsageError("only --exhaustive sweeps are supported")
    try:
        res = sweep_baseline(args.d)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, _dump(res.to_json() | {"config": _config(args)}), f"learner-d{args.d}.json")
    if args.assert_bound and res.max_scaled_error > 1:
        return EXIT_ASSERT
    return EXIT_OK


def cmd_secret(args) -> int:
    try:
        if args.action == "share":
            shares = shamir_share(args.k, args.t, args.n, args.q, random.Random(args.seed))
            payload = " ".join(map(str, shares)) + "\n"
        elif args.action == "reconstruct":
            payload = f"{shamir_reconstruct([ShamirShare.parse(s) for s in args.shares], args.t, args.q)}\n"
        elif args.action == "verify":
            rep = verify_secrecy(args.t, args.n, args.q)
            _emit(args, _dump(rep.to_json()), "secrecy.json")
            return EXIT_OK if rep.holds else EXIT_ASSERT
        elif args.action == "otp-share":
            s = otp_share(BitString.parse(args.secret), random.Random(args.seed))
            payload = f"{s.share1} {s.share2}\n"
        else:  # otp-reconstruct
            payload = f"{otp_reconstruct(OtpShares(*map(BitString.parse, args.shares)))}\n"
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(args, payload, f"secret-{args.action}.txt")
    return EXIT_OK


def cmd_export_reg(args) -> int:
    psi = _regularizer(args.reg, args.d, args.complete)
    if args.out is None:
        raise UsageError("export-reg needs --out")
    save_regularizer(psi, args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="otplab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--out", type=Path, default=None, help=f"output file (default: stdout; ${OUTPUT_ENV} adds a file)")

    def experiment(sp, d_type):
        sp.add_argument("--d", type=d_type, required=True)
        sp.add_argument("--reg", default="random:0",
                        help=f"'name:seed' with name in {', '.join(FAMILIES)}, or a regularizer JSON file")
        sp.add_argument("--complete", action="store_true", help="complete the regularizer to a strict per-point order")
        sp.add_argument("--mode", choices=("exhaustive", "monte-carlo"), default="exhaustive")
        sp.add_argument("--trials", type=int, default=10000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--workers", type=int, default=1)
        sp.add_argument("--assert-bound", action="store_true")
        common(sp)

    sp = sub.add_parser("adversary", help="run the four-instance coupling against one regularizer")
    experiment(sp, int)
    sp.add_argument("--format", choices=("json", "csv"), default="json")
    sp.set_defaults(func=cmd_adversary)

    sp = sub.add_parser("sweep", help="CSV over a d-range and several regularizers")
    experiment(sp, str)
    sp.add_argument("--plot", type=Path, default=None, help="also render a figure to this file")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("verify", help="exact conditional uniformity and consistency ladder")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--families", default="all")
    common(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("dsdim", help="DS dimension of a finite slice by exhaustive search")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--points", default=None, help="e.g. 0..3 (default 0..2d-1)")
    sp.add_argument("--kmax", type=int, default=3)
    sp.add_argument("--assert-bound", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_dsdim)

    sp = sub.add_parser("learner", help="baseline learner's leave-one-out error over all small instances")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--exhaustive", action="store_true")
    sp.add_argument("--assert-bound", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_learner)

    sp = sub.add_parser("secret", help="one-time pad and Shamir sharing")
    ssub = sp.add_subparsers(dest="action", required=True)
    a = ssub.add_parser("share")
    a.add_argument("--k", type=int, required=True)
    a.add_argument("--t", type=int, required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--q", type=int, required=True)
    a.add_argument("--seed", type=int, default=0)
    a = ssub.add_parser("reconstruct")
    a.add_argument("--t", type=int, required=True)
    a.add_argument("--q", type=int, required=True)
    a.add_argument("shares", nargs="+", help="j:value tokens")
    a = ssub.add_parser("verify")
    a.add_argument("--t", type=int, required=True)
    a.add_argument("--n", type=int, required=True)
    a.add_argument("--q", type=int, required=True)
    a = ssub.add_parser("otp-share")
    a.add_argument("--secret", required=True)
    a.add_argument("--seed", type=int, default=0)
    a = ssub.add_parser("otp-reconstruct")
    a.add_argument("shares", nargs=2)
    for a in ssub.choices.values():
        common(a)
    sp.set_defaults(func=cmd_secret)

    sp = sub.add_parser("export-reg", help="write a regularizer table in the JSON file format")
    sp.add_argument("--d", type=int, required=True, help="adversary d (strings have length 2d)")
    sp.add_argument("--reg", required=True)
    sp.add_argument("--complete", action="store_true")
    common(sp)
    sp.set_defaults(func=cmd_export_reg)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
