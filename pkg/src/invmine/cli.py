"""Command-line frontend: ``invmine mine|verify|reach|sample``."""

from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .executor import (
    DEFAULT_MAX_STATES,
    RuntimeDomainError,
    StateExplosionError,
    compile_predicate,
    domain_matrix,
    eval_predicate_array,
    random_state,
    reach_fixpoint,
    reach_k,
    sample_trace,
)
from .formulas import parse_templates
from .invgen import InvGenAborted, InvGenConfig, run_invgen
from .lang import ModelError, ProgramModel, parse, parse_formula, state_space_size
from .learner import LearnerConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LEARNER = 2
EXIT_EXPLOSION = 3

# Largest domain product enumerated exhaustively when measuring tightness.
DOMAIN_CEILING = 2_000_000
TIGHTNESS_SAMPLES = 100_000
MAX_COUNTEREXAMPLES = 10

log = logging.getLogger("invmine")


class UsageError(Exception):
    pass


def _load_model(path: str) -> ProgramModel:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    source = p.read_text()
    try:
        return parse(source)
    except ModelError as exc:
        raise UsageError(exc.format(path)) from None


def _csv(text: Optional[str]) -> Optional[tuple[str, ...]]:
    if text is None:
        return None
    names = tuple(n.strip() for n in text.split(",") if n.strip())
    if not names:
        raise UsageError("--alphabet needs at least one variable")
    return names


def _config(args: argparse.Namespace) -> InvGenConfig:
    templates = None
    if args.atoms:
        try:
            templates = tuple(parse_templates(Path(args.atoms).read_text()))
        except OSError as exc:
            raise UsageError(f"{args.atoms}: {exc.strerror}") from None
    try:
        learner = LearnerConfig(
            delta=args.delta,
            leaf_bound=args.leaf_bound,
            max_inv_length=args.max_inv_len,
            subsample_size=args.subsample_size,
            max_tree_depth=args.max_tree_depth,
        )
        return InvGenConfig(
            trace_len=args.trace_len,
            negatives_per_round=args.negatives,
            trace_budget=args.budget,
            alpha=args.alpha,
            learner=learner,
            alphabet=_csv(args.alphabet),
            templates=templates,
            seed=args.seed,
            certify=args.certify,
            lazy_revise=args.lazy_revise,
            max_rounds=args.max_rounds,
            dump_traces=args.dump_traces,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_json(obj, dest: Optional[str]) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True)
    if dest:
        Path(dest).write_text(text + "\n")
    else:
        print(text)


def cmd_mine(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    cfg = _config(args)
    reachable = None
    if not args.no_oracle:
        try:
            reachable = reach_fixpoint(model, max_states=args.max_states)
        except StateExplosionError:
            log.warning("reachable set exceeds %d states; visited ratio not reported", args.max_states)
    try:
        _, _, report = run_invgen(model, cfg, reachable=reachable, model_name=Path(args.model).name)
        code = EXIT_OK
    except InvGenAborted as exc:
        print(f"error: {exc}", file=sys.stderr)
        report = exc.report
        code = EXIT_LEARNER
    except (ValueError, RuntimeDomainError) as exc:
        raise UsageError(str(exc)) from None
    if args.learner_stats:
        with open(args.learner_stats, "w") as fh:
            for i, stats in enumerate(report.learner_stats):
                fh.write(json.dumps({"revision": i, **stats}) + "\n")
    _write_json(report.to_json(), args.report)
    if args.report:
        print(report.final_invariant)
    if code == EXIT_OK and not report.terminated:
        print(f"warning: stopped after {report.rounds} rounds without reaching the survival budget",
              file=sys.stderr)
    return code


def _tightness(model: ProgramModel, expr, reach: set, rng: random.Random) -> dict:
    """Formula-satisfying states outside the reachable set."""
    size = state_space_size(model)
    if size <= DOMAIN_CEILING:
        X = domain_matrix(model, DOMAIN_CEILING)
        sat = int(np.count_nonzero(eval_predicate_array(expr, model, X)))
        pred = compile_predicate(expr, model)
        sat_reach = sum(1 for s in reach if pred(s.flat))
        return {"method": "exhaustive", "domain": size, "count": sat - sat_reach}
    pred = compile_predicate(expr, model)
    n = hits = 0
    while n < TIGHTNESS_SAMPLES:
        s = random_state(model, rng)
        if s in reach:
            continue
        n += 1
        hits += pred(s.flat)
    outside = size - len(reach)
    return {"method": "sampled", "domain": size, "samples": n, "fraction": hits / n,
            "estimated_count": round(hits / n * outside)}


def cmd_verify(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    text = Path(args.invariant[1:]).read_text().strip() if args.invariant.startswith("@") else args.invariant
    try:
        expr = parse_formula(text, model)
    except ModelError as exc:
        raise UsageError(exc.format("<invariant>")) from None
    pred = compile_predicate(expr, model)
    explosion = None
    try:
        reach = reach_fixpoint(model, max_states=args.max_states)
    except StateExplosionError as exc:
        explosion = exc
        reach = exc.partial or set()
    bad = sorted(s for s in reach if not pred(s.flat))
    if bad:
        verdict = "UNSOUND"
    else:
        verdict = "SOUND" if explosion is None else "UNKNOWN"
    result = {
        "invariant": text,
        "verdict": verdict,
        "reachable_states": len(reach),
        "complete": explosion is None,
        "counterexamples": [_state_dict(model, s) for s in bad[:MAX_COUNTEREXAMPLES]],
    }
    if explosion is None:
        result["tightness"] = _tightness(model, expr, reach, random.Random(args.seed))
    if args.json:
        _write_json(result, None)
    else:
        print(verdict)
        for cex in result["counterexamples"]:
            print("  " + ", ".join(f"{k}={v}" for k, v in cex.items()))
        if "tightness" in result:
            t = result["tightness"]
            if t["method"] == "exhaustive":
                print(f"tightness: {t['count']} non-reachable states satisfy the formula "
                      f"(domain {t['domain']}, reachable {len(reach)})")
            else:
                print(f"tightness: ~{t['fraction']:.4f} of non-reachable states satisfy the formula "
                      f"({t['samples']} samples)")
        if explosion is not None:
            print(f"partial result: {explosion}", file=sys.stderr)
    if explosion is not None:
        return EXIT_EXPLOSION
    return EXIT_OK


def _state_dict(model: ProgramModel, s) -> dict:
    return {slot.name: slot.render(v) for slot, v in zip(model.slots, s.flat)}


def cmd_reach(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    try:
        if args.k is not None:
            states = reach_k(model, args.k, max_states=args.max_states)
        else:
            states = reach_fixpoint(model, max_states=args.max_states)
    except StateExplosionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EXPLOSION
    print(len(states))
    if args.dump:
        Path(args.dump).write_text("".join(s.format() + "\n" for s in sorted(states)))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    model = _load_model(args.model)
    try:
        trace = sample_trace(model, args.trace_len, seed=args.seed)
    except RuntimeDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print("\t".join(slot.name for slot in model.slots))
    for s in trace.states:
        print(s.format())
    return EXIT_OK


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="invmine", description="Mine candidate invariants from sampled traces.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    mine = sub.add_parser("mine", help="learn a candidate invariant")
    mine.add_argument("model")
    mine.add_argument("--seed", type=int, default=0)
    mine.add_argument("--trace-len", type=_nonneg, default=16)
    mine.add_argument("--budget", type=_positive, default=72, help="rounds the candidate must survive")
    mine.add_argument("--negatives", type=_nonneg, default=4, help="speculated negatives per round")
    mine.add_argument("--delta", type=float, default=0.95, help="precision threshold in (0, 1]")
    mine.add_argument("--max-inv-len", type=_positive, default=9)
    mine.add_argument("--leaf-bound", type=_positive, default=200)
    mine.add_argument("--subsample-size", type=_positive, default=50)
    mine.add_argument("--max-tree-depth", type=_positive, default=12)
    mine.add_argument("--alpha", type=float, default=0.05)
    mine.add_argument("--certify", action="store_true", help="raise the budget to the Clopper-Pearson trial count")
    mine.add_argument("--alphabet", help="comma-separated variables to learn over (default: all non-pc)")
    mine.add_argument("--atoms", help="atom template file")
    mine.add_argument("--report", help="write the JSON report here instead of stdout")
    mine.add_argument("--dump-traces", metavar="DIR")
    mine.add_argument("--lazy-revise", action="store_true",
                      help="only re-learn on new negatives the candidate fails to exclude")
    mine.add_argument("--max-rounds", type=_positive, default=5_000)
    mine.add_argument("--learner-stats", metavar="FILE", help="per-revision learner statistics as JSON lines")
    mine.add_argument("--no-oracle", action="store_true", help="skip exhaustive reachability for the report")
    mine.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    mine.set_defaults(func=cmd_mine)

    verify = sub.add_parser("verify", help="check a formula against the exact reachable set")
    verify.add_argument("model")
    verify.add_argument("invariant", help="formula text, or @FILE")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--json", action="store_true")
    verify.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    verify.set_defaults(func=cmd_verify)

    reach = sub.add_parser("reach", help="count reachable states")
    reach.add_argument("model")
    group = reach.add_mutually_exclusive_group()
    group.add_argument("--k", type=_nonneg)
    group.add_argument("--fixpoint", action="store_true")
    reach.add_argument("--dump", metavar="FILE")
    reach.add_argument("--max-states", type=_positive, default=DEFAULT_MAX_STATES)
    reach.set_defaults(func=cmd_reach)

    sample = sub.add_parser("sample", help="print one random trace")
    sample.add_argument("model")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--trace-len", type=_nonneg, default=12)
    sample.set_defaults(func=cmd_sample)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
