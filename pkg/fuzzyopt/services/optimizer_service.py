"""
Repair-based optimizer. Conflict-guided repair selection with a random
fallback, and four search strategies built on it.

Every strategy draws from a single random.Random(seed) stream, counts each
scored instantiation as one evaluation and records it in the trace. The
initial instantiation is evaluation 1.
"""
from __future__ import annotations
import logging
import random
from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Optional, Sequence

from fuzzyopt.errors import InfeasibleOffspring, InvalidInitial
from fuzzyopt.models.dynamic import ViolationRecord
from fuzzyopt.models.optimizer import OptimizerConfig, RepairResult, RunResult, TracePoint
from fuzzyopt.services.domain_service import Domain, Evaluator
from fuzzyopt.services.evaluation_service import worst_conflicts

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Candidate:
    op:       str
    position: Hashable
    result:   RepairResult


# ── Selection ─────────────────────────────────────────────────────────────────

def pick_violation(
    violations: Sequence[ViolationRecord],
    repairable: Sequence[str],
    k: int,
    rng: random.Random,
) -> Optional[ViolationRecord]:
    """Uniform choice among the k worst violations some repair can address."""
    worst = worst_conflicts(violations, k, repairable)
    return rng.choice(worst) if worst else None


def random_repair(domain: Domain, inst: Any, cfg: OptimizerConfig, rng: random.Random) -> Optional[Candidate]:
    """Uniformly random (repair, position), retried a bounded number of times."""
    ops = sorted(domain.repairs)
    for _ in range(cfg.max_attempts):
        op = rng.choice(ops)
        pos = domain.random_position(inst, rng)
        res = domain.apply_repair(op, inst, pos, rng)
        if res is not None:
            return Candidate(op, pos, res)
    return None


def select_conflict_and_repair(
    domain: Domain,
    inst: Any,
    violations: Sequence[ViolationRecord],
    cfg: OptimizerConfig,
    rng: random.Random,
) -> Optional[Candidate]:
    """Repair one of the worst conflicts; fall back to a random repair when that does nothing."""
    repairable = [t for t, ops in domain.repairs_for.items() if ops]
    record = pick_violation(violations, repairable, cfg.worst_k, rng)
    if record is not None:
        op = rng.choice(list(domain.repairs_for[record.constraint]))
        positions = domain.positions_for(record)
        rng.shuffle(positions)
        for pos in positions:
            res = domain.apply_repair(op, inst, pos, rng)
            if res is not None:
                return Candidate(op, pos, res)
    return random_repair(domain, inst, cfg, rng)


# ── Run bookkeeping ───────────────────────────────────────────────────────────

class _Run:
    """Current and best instantiation plus the trace of one optimizer run."""

    def __init__(self, algorithm: str, domain: Domain, initial: Any, cfg: OptimizerConfig) -> None:
        if not domain.is_feasible(initial):
            raise InvalidInitial("initial instantiation violates hard requirements")
        self.cfg = cfg
        self.domain = domain
        self.rng = random.Random(cfg.seed)
        self.current = initial
        self.evaluator: Evaluator = domain.build_evaluator(initial)
        self.score = self.evaluator.root_score
        self.best, self.best_score = initial, self.score
        self.result = RunResult(algorithm=algorithm, best=initial, best_score=self.score, evaluations=1)
        self.result.trace.append(TracePoint(1, self.score, self.score))
        log.info("%s on %s: initial score %.6f", algorithm, domain.name, self.score)

    @property
    def done(self) -> bool:
        return self.result.evaluations >= self.cfg.max_evaluations or self.best_score >= 1.0

    def lookahead(self, cand: Candidate, base: Optional[Evaluator] = None) -> tuple[float, Evaluator]:
        """Score a candidate incrementally without counting it as an evaluation."""
        ev = (self.evaluator if base is None else base).fork()
        score, _ = ev.invalidate_and_reevaluate(cand.result.instance, cand.result.changed)
        return score, ev

    def evaluate(self, cand: Candidate, base: Optional[Evaluator] = None) -> tuple[float, Evaluator]:
        """Score a candidate incrementally from `base` (the current evaluator by default)."""
        score, ev = self.lookahead(cand, base)
        self.count(cand.result.instance, score)
        return score, ev

    def evaluate_full(self, inst: Any) -> tuple[float, Evaluator]:
        ev = self.domain.build_evaluator(inst)
        self.count(inst, ev.root_score)
        return ev.root_score, ev

    def count(self, inst: Any, score: float) -> None:
        self.result.evaluations += 1
        if score > self.best_score:
            self.best, self.best_score = inst, score
        self.result.trace.append(TracePoint(self.result.evaluations, self.score, self.best_score))

    def adopt(self, inst: Any, score: float, ev: Evaluator) -> None:
        self.current, self.score, self.evaluator = inst, score, ev
        last = self.result.trace[-1]
        self.result.trace[-1] = TracePoint(last.eval_index, score, last.best)

    def finish(self) -> RunResult:
        self.result.best, self.result.best_score = self.best, self.best_score
        log.info(
            "%s finished: best %.6f after %d evaluations (%d no-ops)",
            self.result.algorithm, self.best_score, self.result.evaluations, self.result.no_ops,
        )
        return self.result


def _candidates(run: _Run) -> list[tuple[float, Evaluator, Candidate]]:
    """Up to tries_per_step evaluated neighbours of the current instantiation."""
    out: list[tuple[float, Evaluator, Candidate]] = []
    violations = run.evaluator.violations()
    for _ in range(run.cfg.tries_per_step):
        if run.done:
            break
        cand = select_conflict_and_repair(run.domain, run.current, violations, run.cfg, run.rng)
        if cand is None:
            run.result.no_ops += 1
            continue
        score, ev = run.evaluate(cand)
        out.append((score, ev, cand))
    return out


def _tabu_candidates(run: _Run, tabu: deque) -> list[tuple[float, Evaluator, Candidate]]:
    """
    Like _candidates, but a draw whose move key is tabu is redrawn (up to
    max_attempts times) instead of evaluated. A tabu draw survives only if
    its lookahead score beats the global best; only then is it counted.
    """
    out: list[tuple[float, Evaluator, Candidate]] = []
    violations = run.evaluator.violations()
    for _ in range(run.cfg.tries_per_step):
        if run.done:
            break
        for _ in range(run.cfg.max_attempts):
            cand = select_conflict_and_repair(run.domain, run.current, violations, run.cfg, run.rng)
            if cand is None:
                run.result.no_ops += 1
                break
            if cand.result.key not in tabu:
                score, ev = run.evaluate(cand)
                out.append((score, ev, cand))
                break
            score, ev = run.lookahead(cand)
            if score > run.best_score:
                run.count(cand.result.instance, score)
                out.append((score, ev, cand))
                break
            run.result.tabu_rejections += 1
    return out


# ── Strategies ────────────────────────────────────────────────────────────────

def run_deepening1(domain: Domain, initial: Any, cfg: OptimizerConfig) -> RunResult:
    """Depth-1 search: the best of each batch of tries replaces current, even when worse."""
    run = _Run("deepening1", domain, initial, cfg)
    while not run.done:
        cands = _candidates(run)
        if not cands:
            log.warning("deepening1: no repair applies any more, stopping")
            break
        score, ev, cand = max(cands, key=lambda c: c[0])
        run.adopt(cand.result.instance, score, ev)
    return run.finish()


def run_tabu(domain: Domain, initial: Any, cfg: OptimizerConfig) -> RunResult:
    """Greedy best admissible neighbour; recent move keys are tabu unless they beat the best."""
    run = _Run("tabu", domain, initial, cfg)
    tabu: deque[Optional[tuple]] = deque(maxlen=cfg.tabu_tenure)
    while not run.done:
        rejected_before = run.result.tabu_rejections
        cands = _tabu_candidates(run, tabu)
        if not cands:
            if run.result.tabu_rejections == rejected_before:
                log.warning("tabu: no repair applies any more, stopping")
                break
            # every draw was tabu: let the list age by one step
            log.debug("tabu: step without admissible candidate")
            tabu.append(None)
            continue
        score, ev, cand = max(cands, key=lambda c: c[0])
        run.adopt(cand.result.instance, score, ev)
        tabu.append(cand.result.key)
    return run.finish()


def run_random_hill(domain: Domain, initial: Any, cfg: OptimizerConfig) -> RunResult:
    """Accept strictly better neighbours; after tries_per_step rejections take a random repair."""
    run = _Run("random_hill", domain, initial, cfg)
    rejections = idle = 0
    while not run.done:
        cand = select_conflict_and_repair(domain, run.current, run.evaluator.violations(), cfg, run.rng)
        if cand is None:
            run.result.no_ops += 1
            idle += 1
            if idle >= cfg.max_attempts:
                log.warning("random_hill: no repair applies any more, stopping")
                break
            continue
        idle = 0
        score, ev = run.evaluate(cand)
        if score > run.score:
            run.adopt(cand.result.instance, score, ev)
            rejections = 0
            continue
        rejections += 1
        if rejections >= cfg.tries_per_step and not run.done:
            kick = random_repair(domain, run.current, cfg, run.rng)
            rejections = 0
            if kick is not None:
                score, ev = run.evaluate(kick)
                run.adopt(kick.result.instance, score, ev)
                run.result.perturbations.append(run.result.evaluations)
    return run.finish()


@dataclass
class _Member:
    inst:      Any
    score:     float
    evaluator: Evaluator


def _tournament(pop: list[_Member], rng: random.Random) -> _Member:
    a, b = rng.choice(pop), rng.choice(pop)
    return a if a.score >= b.score else b


def run_genetic(domain: Domain, initial: Any, cfg: OptimizerConfig) -> RunResult:
    """Steady elitist GA: tournament of two, splice crossover, one-repair mutation."""
    run = _Run("genetic", domain, initial, cfg)
    rng = run.rng
    pop = [_Member(initial, run.score, run.evaluator)]
    while len(pop) < cfg.population_size and not run.done:
        cand = random_repair(domain, initial, cfg, rng)
        if cand is None:
            pop.append(pop[0])
            continue
        score, ev = run.evaluate(cand)
        pop.append(_Member(cand.result.instance, score, ev))

    for _ in range(cfg.max_evaluations):
        if run.done:
            break
        elite = max(pop, key=lambda m: m.score)
        children: list[_Member] = []
        for _ in range(max(cfg.population_size - 1, 1)):
            if run.done:
                break
            child = _tournament(pop, rng)
            crossed = False
            if rng.random() < cfg.crossover_rate:
                other = _tournament(pop, rng)
                try:
                    inst = domain.crossover(child.inst, other.inst, rng)
                    score, ev = run.evaluate_full(inst)
                    child, crossed = _Member(inst, score, ev), True
                except InfeasibleOffspring as exc:
                    run.result.infeasible_offspring += 1
                    log.warning("genetic: offspring replaced by parent clone (%s)", exc)
            # an uncrossed clone is always mutated, otherwise the slot repeats its parent
            if (not crossed or rng.random() < cfg.mutation_rate) and not run.done:
                cand = random_repair(domain, child.inst, cfg, rng)
                if cand is not None:
                    score, ev = run.evaluate(cand, child.evaluator)
                    child = _Member(cand.result.instance, score, ev)
                else:
                    run.result.no_ops += 1
            children.append(child)
        if not children:
            break
        if cfg.population_size == 1:
            # ties go to the child so the walk keeps moving
            pop = [children[0] if children[0].score >= elite.score else elite]
        else:
            pop = [elite, *children]
        top = max(pop, key=lambda m: m.score)
        run.adopt(top.inst, top.score, top.evaluator)
    return run.finish()


ALGORITHMS: dict[str, Callable[[Domain, Any, OptimizerConfig], RunResult]] = {
    "deepening1":  run_deepening1,
    "tabu":        run_tabu,
    "random_hill": run_random_hill,
    "genetic":     run_genetic,
}


def optimize(domain: Domain, initial: Any, cfg: OptimizerConfig) -> RunResult:
    return ALGORITHMS[cfg.algorithm](domain, initial, cfg)
