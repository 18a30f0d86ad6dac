"""
Entry point for `python -m fuzzyopt`.

Architecture
────────────
  main.py              Entry point · logging setup · dispatch
  config.py            Centralised settings (pydantic-settings)
  errors.py            FuzzyOptError hierarchy

  models/
    fuzzy.py           Membership functions · linguistic variables · rules · operator sets
    constraint.py      Compare / concat constraints · evaluated results
    dynamic.py         Templates · generation rules · knowledge base · violation records
    schedule.py        Operation plan · schedule grid · shift assignments
    queens.py          N-queens board
    optimizer.py       Run configuration · traces · bench spec
    consistency.py     Configurations · snapshots · reference pair databases
    report.py          Command payloads

  routes/
    cli_routes.py      argparse subcommands, thin boundary only

  controllers/
    command_controller.py   Loads files · runs services · exit codes

  services/
    fuzzy_service.py        Fuzzification · inference · aggregation · defuzzification
    constraint_service.py   Constraint scoring · soften/harden
    evaluation_service.py   Constraint generation · incremental evaluation tree
    shift_service.py        Reference plan · hard checks · initial solution · shift KB
    repair_service.py       Shift repair operators
    queens_service.py       Queens conflicts · min-conflicts repair · evaluator
    domain_service.py       Domain adapters seen by the optimizer
    optimizer_service.py    deepening1 · tabu · random_hill · genetic
    consistency_service.py  Reference pair checks · adoption · what-if

  utils/
    io_utils.py        JSON and CSV formats
"""
from __future__ import annotations
import logging
import sys
from typing import Optional, Sequence

from dotenv import load_dotenv
load_dotenv()  # must run before any module reads Settings

from pydantic import ValidationError

from fuzzyopt.config import get_settings
from fuzzyopt.routes.cli_routes import dispatch, parse

log = logging.getLogger(__name__)


def _configure_logging(verbose: bool) -> None:
    level = logging.DEBUG if verbose else getattr(logging, get_settings().log_level.upper(), logging.INFO)
    logging.basicConfig(
        level=level,
        format="%(asctime)s | %(levelname)-8s | %(name)s | %(message)s",
        stream=sys.stderr,
    )


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse(argv)
    _configure_logging(getattr(args, "verbose", False))
    try:
        return dispatch(args)
    except ValidationError as exc:
        log.error("Invalid arguments: %s", exc)
        return 1


if __name__ == "__main__":
    sys.exit(main())
