"""Double-swap repair operators: neighbourhoods, hard validity, tolerance rejection."""
from __future__ import annotations

import random
from collections import Counter
from itertools import combinations, permutations

import pytest

from fuzzyopt.errors import NoFeasibleSwap
from fuzzyopt.models.schedule import Position, Schedule
from fuzzyopt.services.repair_service import (
    MOVES,
    REPAIRS,
    mon_wed_moves,
    mon_wed_to_thu_fri_moves,
    weekend_sw_moves,
    weekend_td_moves,
)
from fuzzyopt.services.shift_service import MAINTENANCE_DAY, days_of, initial_solution, validate_hard


def _codes_per_day(s: Schedule) -> list[Counter]:
    return [Counter(c.code for c in row if c is not None) for row in s.cells]


def _brute_force_neighbours(s: Schedule, days: list[int], code: str) -> set[Schedule]:
    """Exchange two subgroups' columns on two days; keep real double swaps."""
    out: set[Schedule] = set()
    for x, y in combinations(days, 2):
        for a, b in permutations(range(6), 2):
            ax, ay, bx, by = s.cells[x][a], s.cells[y][a], s.cells[x][b], s.cells[y][b]
            a_moves = ax is not None and ax.code == code and ay is None
            b_moves = by is not None and by.code == code and bx is None
            if a_moves and b_moves:
                out.add(s.with_changes({
                    Position(x, a): bx, Position(x, b): ax,
                    Position(y, a): by, Position(y, b): ay,
                }))
    return out


def _double_swap(s: Schedule, x: int, y: int, a: int, b: int, code: str) -> Schedule | None:
    """a hands its `code` shift on day x to b, b hands its day-y shift to a; None unless both really move."""
    ax, ay, bx, by = s.cells[x][a], s.cells[y][a], s.cells[x][b], s.cells[y][b]
    if not (ax is not None and ax.code == code and ay is None and by is not None and by.code == code and bx is None):
        return None
    return s.with_changes({Position(x, a): bx, Position(x, b): ax, Position(y, a): by, Position(y, b): ay})


def _brute_force_takeovers(s: Schedule, plan) -> set[Schedule]:
    """Every hard-valid result of two TD double swaps sharing a Thu/Fri day, over four distinct subgroups."""
    out: set[Schedule] = set()
    mon_wed = days_of(plan, "mon_wed")
    for y in days_of(plan, "thu_fri"):
        for a, b, c, d in permutations(range(6), 4):
            for x in mon_wed:
                first = _double_swap(s, x, y, a, b, "TD")
                if first is None:
                    continue
                for z in mon_wed:
                    second = _double_swap(first, z, y, c, d, "TD")
                    if second is not None and second != s and not validate_hard(second, plan):
                        out.add(second)
    return out


def _reached(s: Schedule, plan, op: str) -> set[Schedule]:
    """Every neighbour an operator produces over all positions and start offsets."""
    moves = MOVES[op](s, plan)
    out: set[Schedule] = set()
    rng = random.Random(0)
    for pos in s.positions():
        for start in range(len(moves)):
            try:
                out.add(REPAIRS[op](s, plan, pos, rng, start=start, moves=moves).instance)
            except NoFeasibleSwap:
                break
    return out


class TestNeighbourhoods:
    @pytest.mark.parametrize("seed", range(4))
    def test_mon_wed_matches_brute_force(self, mon_wed_toy, seed):
        s = initial_solution(mon_wed_toy, seed=seed)
        expected = _brute_force_neighbours(s, days_of(mon_wed_toy, "mon_wed"), "TD")
        assert _reached(s, mon_wed_toy, "mon_wed") == expected

    @pytest.mark.parametrize("seed", range(4))
    def test_weekend_td_matches_brute_force(self, weekend_toy, seed):
        s = initial_solution(weekend_toy, seed=seed)
        expected = _brute_force_neighbours(s, days_of(weekend_toy, "weekend"), "TDWE")
        assert _reached(s, weekend_toy, "weekend_td") == expected

    @pytest.mark.parametrize("seed", range(4))
    def test_weekend_sw_matches_brute_force(self, weekend_toy, seed):
        s = initial_solution(weekend_toy, seed=seed)
        saturdays = [d for d in days_of(weekend_toy, "weekend") if weekend_toy.days[d].weekday == 5]
        expected = _brute_force_neighbours(s, saturdays, "SWWE")
        assert _reached(s, weekend_toy, "weekend_sw") == expected

    def test_moves_change_four_cells(self, reference_plan, reference_initial):
        for enumerate_moves in (mon_wed_moves, weekend_td_moves, weekend_sw_moves):
            for move in enumerate_moves(reference_initial, reference_plan):
                assert len(move.changes) == 4
                assert all(reference_initial.get(p) != c for p, c in move.changes.items())

    def test_maintenance_saturday_has_no_sw_moves(self, reference_plan, reference_initial):
        for move in weekend_sw_moves(reference_initial, reference_plan):
            assert all(p.day != MAINTENANCE_DAY for p in move.changes)


class TestThuFriExchange:
    def test_matches_brute_force(self, thu_fri_toy):
        total = 0
        for seed in range(20):
            s = initial_solution(thu_fri_toy, seed=seed)
            expected = _brute_force_takeovers(s, thu_fri_toy)
            assert _reached(s, thu_fri_toy, "mon_wed_to_thu_fri") == expected
            total += len(expected)
        assert total > 0

    def test_group_takes_over_day(self, thu_fri_toy):
        found = 0
        for seed in range(20):
            s = initial_solution(thu_fri_toy, seed=seed)
            for move in mon_wed_to_thu_fri_moves(s, thu_fri_toy):
                found += 1
                after = s.with_changes(move.changes)
                assert len(move.changes) == 8
                assert _codes_per_day(after) == _codes_per_day(s)
                assert validate_hard(after, thu_fri_toy) == []
                assert move.op == "mon_wed_to_thu_fri"
        assert found > 0


class TestRepairOperators:
    def test_reference_repairs_stay_hard_valid(self, reference_plan, reference_initial):
        rng = random.Random(3)
        s = reference_initial
        before = _codes_per_day(s)
        applied = 0
        for _ in range(400):
            op = rng.choice(sorted(REPAIRS))
            pos = Position(rng.randrange(21), rng.randrange(6))
            try:
                result = REPAIRS[op](s, reference_plan, pos, rng)
            except NoFeasibleSwap:
                continue
            assert pos in result.changed
            s = result.instance
            applied += 1
            assert validate_hard(s, reference_plan) == []
        assert applied > 0
        assert _codes_per_day(s) == before

    def test_input_untouched(self, reference_plan, reference_initial):
        cells = reference_initial.cells
        pos = next(iter(mon_wed_moves(reference_initial, reference_plan)[0].changes))
        REPAIRS["mon_wed"](reference_initial, reference_plan, pos, random.Random(0))
        assert reference_initial.cells == cells

    def test_position_without_moves(self, reference_plan, reference_initial):
        # Sundays carry no TD, so nothing in the Mon–Wed neighbourhood touches them
        with pytest.raises(NoFeasibleSwap):
            REPAIRS["mon_wed"](reference_initial, reference_plan, Position(6, 0), random.Random(0))

    def test_rejected_on_hours(self, mon_wed_toy):
        s = initial_solution(mon_wed_toy, seed=0)
        moves = mon_wed_moves(s, mon_wed_toy)
        assert moves
        tight = mon_wed_toy.model_copy(update={"hour_tolerance": 0.0})
        pos = next(iter(moves[0].changes))
        with pytest.raises(NoFeasibleSwap):
            REPAIRS["mon_wed"](s, tight, pos, random.Random(0))

    def test_ten_thousand_random_repairs(self, reference_plan):
        applied = no_ops = 0
        for seed in range(10):
            rng = random.Random(seed)
            s = initial_solution(reference_plan, seed=seed)
            for _ in range(1000):
                op = rng.choice(sorted(REPAIRS))
                pos = Position(rng.randrange(21), rng.randrange(6))
                try:
                    s = REPAIRS[op](s, reference_plan, pos, rng).instance
                except NoFeasibleSwap:
                    no_ops += 1
                    continue
                applied += 1
                assert validate_hard(s, reference_plan) == []
        assert applied + no_ops == 10000
        assert applied > 0
