"""
Command-line boundary.
No business logic lives here; every subcommand is delegated to the controller.
"""
from __future__ import annotations
import argparse
from typing import Callable, Optional, Sequence

from fuzzyopt import __version__
from fuzzyopt.config import get_settings
from fuzzyopt.controllers import command_controller as cc
from fuzzyopt.models.optimizer import BenchSpec

ALGORITHMS = ("deepening1", "tabu", "random_hill", "genetic")


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="random seed (default: settings)")
    common.add_argument("--kb", default=None, help="knowledge base JSON (default: built-in reference KB)")
    common.add_argument("--plan", default=None, help="operation plan JSON (default: built-in reference plan)")
    common.add_argument("--out", default=None, help="output file or directory")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="fuzzyopt",
        description="Fuzzy-constraint evaluation and repair-based optimization of shift schedules.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("evaluate", parents=[common], help="score a schedule CSV")
    p.add_argument("schedule")
    p.add_argument("--top-k", type=int, default=None)
    p.set_defaults(handler=lambda a: cc.cmd_evaluate(a.schedule, a.plan, a.kb, a.top_k))

    p = sub.add_parser("optimize", parents=[common], help="improve a schedule with one algorithm")
    p.add_argument("--algo", "--algorithm", dest="algorithm", choices=ALGORITHMS, default="deepening1")
    p.add_argument("--initial", "--schedule", dest="schedule", default=None, help="initial schedule CSV (default: generated)")
    p.add_argument("--max-evals", "--max-evaluations", dest="max_evaluations", type=int, default=None)
    p.add_argument("--tries", dest="tries_per_step", type=int, default=None, help="repair tries per step")
    p.add_argument("--worst-k", type=int, default=None, help="pick among the k worst violations")
    p.add_argument("--trace", default=None, help="write eval_index,current,best CSV here")
    p.set_defaults(handler=lambda a: cc.cmd_optimize(
        a.algorithm, a.seed, a.plan, a.kb, a.schedule, a.max_evaluations, a.out, a.trace,
        a.tries_per_step, a.worst_k,
    ))

    p = sub.add_parser("initial", parents=[common], help="generate a hard-valid initial schedule")
    p.set_defaults(handler=lambda a: cc.cmd_initial(a.plan, a.seed, a.out))

    p = sub.add_parser("bench", parents=[common], help="run batches from one initial schedule, write curves")
    p.add_argument("--algo", "--algorithm", dest="algorithm", choices=ALGORITHMS, action="append", default=None)
    p.add_argument("--batches", type=int, default=4)
    p.add_argument("--same-seed", action="store_true", help="every batch uses --seed")
    p.add_argument("--initial-seed", type=int, default=None)
    p.add_argument("--max-evals", "--max-evaluations", dest="max_evaluations", type=int, default=2000)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(handler=_bench)

    p = sub.add_parser("check-config", parents=[common], help="check a configuration against reference pairs")
    p.add_argument("--kb-new", required=True)
    p.add_argument("--kb-old", default=None)
    p.add_argument("--db", default="default")
    p.add_argument("--store", default=None, help="pair store JSON (default: settings)")
    p.add_argument("--adopt", nargs=2, metavar=("BEFORE", "AFTER"), default=None)
    p.add_argument("--what-if", default=None, metavar="DELTA")
    p.add_argument("--candidates", nargs="*", default=())
    p.set_defaults(handler=lambda a: cc.cmd_check_config(
        a.kb_new, a.db, a.kb_old, a.plan, a.store, a.adopt, a.what_if, a.candidates,
    ))

    p = sub.add_parser("remove-pair", parents=[common], help="delete a reference pair")
    p.add_argument("pair_id")
    p.add_argument("--db", default="default")
    p.add_argument("--store", default=None)
    p.set_defaults(handler=lambda a: cc.cmd_remove_pair(a.pair_id, a.db, a.store))

    kb = sub.add_parser("kb", help="knowledge base tools")
    kb_sub = kb.add_subparsers(dest="kb_command", required=True)
    p = kb_sub.add_parser("validate", parents=[common])
    p.set_defaults(handler=lambda a: cc.cmd_kb_validate(a.kb, a.plan))
    p = kb_sub.add_parser("export", parents=[common])
    p.set_defaults(handler=lambda a: cc.cmd_kb_export(a.plan, a.out))

    p = sub.add_parser("queens", parents=[common], help="n-queens with the same optimizer")
    p.add_argument("n", type=int)
    p.add_argument("--algo", "--algorithm", dest="algorithm", choices=ALGORITHMS, default="random_hill")
    p.add_argument("--max-evals", "--max-evaluations", dest="max_evaluations", type=int, default=None)
    p.set_defaults(handler=lambda a: cc.cmd_queens(a.n, a.algorithm, a.seed, a.max_evaluations, a.out))

    return parser


def _bench(a: argparse.Namespace) -> int:
    base = 1 if a.seed is None else a.seed
    spec = BenchSpec(
        algorithms=tuple(a.algorithm or ("deepening1",)),
        batches=a.batches,
        seeds=(base,) * a.batches if a.same_seed else (),
        base_seed=base,
        initial_seed=get_settings().default_seed if a.initial_seed is None else a.initial_seed,
        max_evaluations=a.max_evaluations,
        out=a.out or "bench",
    )
    return cc.cmd_bench(spec, a.plan, a.kb, a.workers)


def parse(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    return build_parser().parse_args(argv)


def dispatch(args: argparse.Namespace) -> int:
    handler: Callable[[argparse.Namespace], int] = args.handler
    return handler(args)
