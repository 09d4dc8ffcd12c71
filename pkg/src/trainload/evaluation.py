"""Plan feasibility, rehandle counting, and objective evaluation.

A *solution* assigns containers to (wagon, slot) pairs and picks one weight
configuration per wagon.  Two independent rehandle counters live here:

``count_rehandles_compact``
    A closed-form count.  A container at tier ``l`` of a stack of height
    ``h`` has ``h - 1 - l`` containers above it; every one of those that is
    *not* itself loaded onto the same or an earlier wagon must be craned
    aside once.  Summing that shortfall over all loaded containers gives the
    total rehandle count without simulating anything.

``simulate_loading``
    A step-by-step crane replay that produces an event log.  Wagons are
    served in train order; within a wagon, stacks are visited left to right
    and targets retrieved top-down.  Blockers are lifted to a buffer and
    restacked in place after the target leaves.

The two agree exactly on every feasible solution (the test suite enforces
this exhaustively on small instances); the simulator exists so the compact
count is never trusted on its own word.

Objective sign conventions: ``objective`` is the non-negative form
(rehandle cost plus total value forfeited), while ``objective_shifted`` is
``rehandle_cost - value_loaded``.  They differ by the constant total yard
value, so minimising either picks the same plans; solver output uses the
shifted form, where "more negative is better".
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Iterable, Mapping, NamedTuple

from .instance import Instance


class DanglingReferenceError(ValueError):
    """Solution names a container/wagon/slot/config the instance lacks."""


class InfeasibleSolutionError(ValueError):
    """Operation requires a feasible solution but violations were found."""

    def __init__(self, violations: list["Violation"]):
        self.violations = violations
        summary = "; ".join(v.describe() for v in violations[:4])
        if len(violations) > 4:
            summary += f"; ... ({len(violations)} total)"
        super().__init__(f"infeasible solution: {summary}")


class Assignment(NamedTuple):
    container: str
    wagon: str
    slot: int


class ConfigChoice(NamedTuple):
    wagon: str
    config: int


@dataclass(frozen=True)
class Solution:
    """A (possibly partial) load plan.

    ``assignments`` mirrors the solution file: an ordered tuple of entries,
    so even ill-formed plans (a container listed twice) are representable
    and can be *diagnosed* rather than rejected at parse time.
    """

    assignments: tuple[Assignment, ...]
    configs: tuple[ConfigChoice, ...]

    @classmethod
    def from_maps(
        cls,
        assignments: Mapping[str, tuple[str, int]],
        configs: Mapping[str, int],
    ) -> "Solution":
        """Build a canonically ordered solution from mapping views."""
        return cls(
            assignments=tuple(
                Assignment(c, w, s) for c, (w, s) in sorted(assignments.items())
            ),
            configs=tuple(ConfigChoice(w, b) for w, b in sorted(configs.items())),
        )

    @cached_property
    def assignment_map(self) -> dict[str, tuple[str, int]]:
        """Container id -> (wagon, slot); raises if a container repeats."""
        out: dict[str, tuple[str, int]] = {}
        for a in self.assignments:
            if a.container in out:
                raise ValueError(f"container '{a.container}' assigned more than once")
            out[a.container] = (a.wagon, a.slot)
        return out

    @cached_property
    def config_map(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for c in self.configs:
            if c.wagon in out:
                raise ValueError(f"wagon '{c.wagon}' configured more than once")
            out[c.wagon] = c.config
        return out

    def canonical(self) -> "Solution":
        """Entries sorted (containers by id, configs by wagon id)."""
        return Solution(tuple(sorted(self.assignments)), tuple(sorted(self.configs)))


class ViolationKind(Enum):
    MULTIPLE_ASSIGNMENT = "MultipleAssignment"
    SLOT_OCCUPIED_TWICE = "SlotOccupiedTwice"
    NO_CONFIG = "NoConfig"
    SLOT_OVERWEIGHT = "SlotOverweight"
    WAGON_OVERWEIGHT = "WagonOverweight"
    TRAIN_OVERWEIGHT = "TrainOverweight"
    LENGTH_MISMATCH = "LengthMismatch"


_OVERWEIGHT = frozenset(
    {
        ViolationKind.SLOT_OVERWEIGHT,
        ViolationKind.WAGON_OVERWEIGHT,
        ViolationKind.TRAIN_OVERWEIGHT,
    }
)


@dataclass(frozen=True)
class Violation:
    """One broken feasibility rule.

    ``subject`` names the offending entity (container id, wagon id, or
    wagon id plus slot index); ``amount`` is the excess in kg and is present
    exactly for the overweight kinds.
    """

    kind: ViolationKind
    subject: tuple[Any, ...]
    amount: int | None = None

    def describe(self) -> str:
        where = ",".join(str(part) for part in self.subject)
        if self.amount is not None:
            return f"{self.kind.value}[{where}] over by {self.amount} kg"
        return f"{self.kind.value}[{where}]"

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"kind": self.kind.value, "subject": list(self.subject)}
        if self.amount is not None:
            out["amount"] = self.amount
        return out


def _resolve_references(instance: Instance, solution: Solution) -> None:
    cmap = instance.container_map
    wmap = instance.wagon_map
    for a in solution.assignments:
        if a.container not in cmap:
            raise DanglingReferenceError(f"unknown container '{a.container}'")
        if a.wagon not in wmap:
            raise DanglingReferenceError(f"unknown wagon '{a.wagon}'")
        if not 0 <= a.slot < len(wmap[a.wagon].slots):
            raise DanglingReferenceError(
                f"wagon '{a.wagon}' has no slot {a.slot}"
            )
    for c in solution.configs:
        if c.wagon not in wmap:
            raise DanglingReferenceError(f"unknown wagon '{c.wagon}'")
        if not 0 <= c.config < len(wmap[c.wagon].configs):
            raise DanglingReferenceError(
                f"wagon '{c.wagon}' has no config {c.config}"
            )


def _chosen_configs(instance: Instance, solution: Solution) -> dict[str, int]:
    """Wagon id -> config index, for wagons configured exactly once."""
    counts: dict[str, list[int]] = {}
    for c in solution.configs:
        counts.setdefault(c.wagon, []).append(c.config)
    return {w: picks[0] for w, picks in counts.items() if len(picks) == 1}


def check_feasibility(instance: Instance, solution: Solution) -> list[Violation]:
    """All feasibility violations, in deterministic order; empty iff feasible.

    Raises :class:`DanglingReferenceError` when the solution mentions ids or
    indices the instance does not define — that is an input error, not a
    feasibility verdict.

    Per-slot weight limits can only be judged against a wagon's chosen
    config, so wagons flagged ``NoConfig`` (zero or several choices) skip
    the slot-weight check; the ``NoConfig`` violation already marks them.
    """
    _resolve_references(instance, solution)
    cmap = instance.container_map
    violations: list[Violation] = []

    per_container: dict[str, int] = {}
    per_slot: dict[tuple[str, int], list[str]] = {}
    for a in solution.assignments:
        per_container[a.container] = per_container.get(a.container, 0) + 1
        per_slot.setdefault((a.wagon, a.slot), []).append(a.container)

    for cid in sorted(c for c, n in per_container.items() if n > 1):
        violations.append(Violation(ViolationKind.MULTIPLE_ASSIGNMENT, (cid,)))

    for w in instance.wagons:
        for si in range(len(w.slots)):
            occupants = per_slot.get((w.id, si), [])
            if len(occupants) > 1:
                violations.append(
                    Violation(ViolationKind.SLOT_OCCUPIED_TWICE, (w.id, si))
                )

    chosen = _chosen_configs(instance, solution)
    for w in instance.wagons:
        if w.id not in chosen:
            violations.append(Violation(ViolationKind.NO_CONFIG, (w.id,)))

    for a in solution.assignments:
        slot_length = instance.wagon_map[a.wagon].slots[a.slot].length
        if cmap[a.container].length != slot_length:
            violations.append(
                Violation(
                    ViolationKind.LENGTH_MISMATCH, (a.container, a.wagon, a.slot)
                )
            )

    for w in instance.wagons:
        if w.id not in chosen:
            continue
        limits = w.configs[chosen[w.id]].per_slot_max
        for si in range(len(w.slots)):
            load = sum(cmap[c].weight for c in per_slot.get((w.id, si), ()))
            if load > limits[si]:
                violations.append(
                    Violation(
                        ViolationKind.SLOT_OVERWEIGHT,
                        (w.id, si),
                        amount=load - limits[si],
                    )
                )

    train_load = 0
    for w in instance.wagons:
        wagon_load = sum(
            cmap[c].weight
            for si in range(len(w.slots))
            for c in per_slot.get((w.id, si), ())
        )
        train_load += wagon_load
        if wagon_load > w.max_weight:
            violations.append(
                Violation(
                    ViolationKind.WAGON_OVERWEIGHT,
                    (w.id,),
                    amount=wagon_load - w.max_weight,
                )
            )
    if train_load > instance.train_max_weight:
        violations.append(
            Violation(
                ViolationKind.TRAIN_OVERWEIGHT,
                (),
                amount=train_load - instance.train_max_weight,
            )
        )
    return violations


# ---------------------------------------------------------------------------
# Rehandle counting
# ---------------------------------------------------------------------------


def _count_rehandles(instance: Instance, solution: Solution) -> int:
    """Closed-form count; assumes a feasible solution."""
    wagon_pos = instance.wagon_position
    loaded_at = {a.container: wagon_pos[a.wagon] for a in solution.assignments}
    total = 0
    for cid, w in loaded_at.items():
        k, l = instance.stack_position[cid]
        stack = instance.yard.stacks[k]
        blockers_cleared = sum(
            1 for above in stack[l + 1 :] if loaded_at.get(above, len(wagon_pos)) <= w
        )
        total += (len(stack) - 1 - l) - blockers_cleared
    return total


def count_rehandles_compact(instance: Instance, solution: Solution) -> int:
    """Total crane rehandles implied by the plan, without simulation.

    Rejects infeasible solutions: with a container assigned twice the
    notion of "the wagon it is loaded at" is ill-defined.
    """
    violations = check_feasibility(instance, solution)
    if violations:
        raise InfeasibleSolutionError(violations)
    return _count_rehandles(instance, solution)


class CraneMove(NamedTuple):
    """One crane action.  ``tier`` is the source tier for lift/load and the
    destination tier for restack; buffer loads use stack=-1, tier=-1."""

    op: str  # "lift" | "load" | "restack"
    container: str
    stack: int
    tier: int
    wagon: str | None = None
    slot: int | None = None

    def to_dict(self) -> dict:
        return {
            "op": self.op,
            "container": self.container,
            "stack": self.stack,
            "tier": self.tier,
            "wagon": self.wagon,
            "slot": self.slot,
        }


@dataclass(frozen=True)
class SimulationResult:
    rehandles: int
    events: tuple[CraneMove, ...]


def simulate_loading(
    instance: Instance, solution: Solution, *, restack_in_place: bool = True
) -> SimulationResult:
    """Replay the crane and count rehandles from first principles.

    Default semantics restack lifted blockers onto their own stack after
    the target is extracted, preserving order.  With
    ``restack_in_place=False`` blockers stay in the buffer for good — a
    strictly cheaper regime kept as a non-default mode for comparison; only
    the default mode matches :func:`count_rehandles_compact`.
    """
    violations = check_feasibility(instance, solution)
    if violations:
        raise InfeasibleSolutionError(violations)

    state = [list(stack) for stack in instance.yard.stacks]
    buffered: set[str] = set()
    targets_by_wagon: dict[int, dict[int, list[str]]] = {}
    for a in solution.assignments:
        w = instance.wagon_position[a.wagon]
        k, l = instance.stack_position[a.container]
        targets_by_wagon.setdefault(w, {}).setdefault(k, []).append(a.container)

    slot_of = {a.container: (a.wagon, a.slot) for a in solution.assignments}
    tier_of = instance.stack_position
    events: list[CraneMove] = []
    rehandles = 0

    for w in range(len(instance.wagons)):
        for k in sorted(targets_by_wagon.get(w, ())):
            targets = sorted(
                targets_by_wagon[w][k], key=lambda c: tier_of[c][1], reverse=True
            )
            for target in targets:
                wagon_id, slot_idx = slot_of[target]
                if target in buffered:
                    buffered.discard(target)
                    events.append(CraneMove("load", target, -1, -1, wagon_id, slot_idx))
                    continue
                pos = state[k].index(target)
                lifted: list[str] = []
                while len(state[k]) - 1 > pos:
                    blocker = state[k].pop()
                    events.append(CraneMove("lift", blocker, k, len(state[k])))
                    lifted.append(blocker)
                    rehandles += 1
                state[k].pop()
                events.append(CraneMove("load", target, k, pos, wagon_id, slot_idx))
                if restack_in_place:
                    for blocker in reversed(lifted):
                        events.append(CraneMove("restack", blocker, k, len(state[k])))
                        state[k].append(blocker)
                else:
                    buffered.update(lifted)

    return SimulationResult(rehandles=rehandles, events=tuple(events))


def event_log_jsonl(events: Iterable[CraneMove]) -> str:
    """Crane moves as JSON lines, one move per line, replay order."""
    return "".join(json.dumps(e.to_dict()) + "\n" for e in events)


# ---------------------------------------------------------------------------
# Objective and report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EvaluationReport:
    """Feasibility verdict plus objective and utilisation metrics.

    The two objectives satisfy ``objective - objective_shifted ==
    total yard value`` for every solution.  Utilisations: ``slot`` is
    occupied train slots over total train slots, ``teu`` is loaded TEUs
    over total *yard* TEUs, ``value`` is loaded value over total yard
    value.  Degenerate zero denominators score 100 by convention (an empty
    target is vacuously fully used).
    """

    violations: tuple[Violation, ...]
    rehandles: int
    rehandle_cost: int
    value_loaded: int
    objective: int
    objective_shifted: int
    slot_utilization_pct: float
    teu_utilization_pct: float
    value_pct: float

    @property
    def feasible(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "violations": [v.to_dict() for v in self.violations],
            "rehandles": self.rehandles,
            "rehandle_cost": self.rehandle_cost,
            "value_loaded": self.value_loaded,
            "objective": self.objective,
            "objective_shifted": self.objective_shifted,
            "slot_utilization_pct": self.slot_utilization_pct,
            "teu_utilization_pct": self.teu_utilization_pct,
            "value_pct": self.value_pct,
        }


def _pct(numerator: int, denominator: int) -> float:
    if denominator == 0:
        return 100.0
    return 100.0 * numerator / denominator


def shifted_objective(instance: Instance, solution: Solution) -> int:
    """``rehandle_cost - value_loaded``; assumes the solution is feasible.

    This is the solver's hot path: no feasibility re-check is performed.
    """
    loaded = dict.fromkeys(a.container for a in solution.assignments)
    value = sum(instance.container_map[c].value for c in loaded)
    return instance.rehandle_unit_cost * _count_rehandles(instance, solution) - value


def evaluate(instance: Instance, solution: Solution) -> EvaluationReport:
    """Full report for any solution; never raises on infeasibility.

    Rehandles are only well-defined for feasible plans, so infeasible ones
    report ``rehandles=0`` alongside their violation list; both objective
    forms are still computed from that convention so the sign identity
    holds for every solution.
    """
    violations = check_feasibility(instance, solution)
    loaded_ids = list(dict.fromkeys(a.container for a in solution.assignments))
    occupied = len(dict.fromkeys((a.wagon, a.slot) for a in solution.assignments))

    value_loaded = sum(instance.container_map[c].value for c in loaded_ids)
    loaded_teu = sum(instance.container_map[c].length.teu for c in loaded_ids)
    rehandles = 0 if violations else _count_rehandles(instance, solution)
    rehandle_cost = instance.rehandle_unit_cost * rehandles

    return EvaluationReport(
        violations=tuple(violations),
        rehandles=rehandles,
        rehandle_cost=rehandle_cost,
        value_loaded=value_loaded,
        objective=rehandle_cost + instance.total_value - value_loaded,
        objective_shifted=rehandle_cost - value_loaded,
        slot_utilization_pct=_pct(occupied, instance.total_slots),
        teu_utilization_pct=_pct(loaded_teu, instance.total_container_teu),
        value_pct=_pct(value_loaded, instance.total_value),
    )


# ---------------------------------------------------------------------------
# Solution files
# ---------------------------------------------------------------------------

_SOLUTION_KEYS = ("assignments", "configs")
_ASSIGNMENT_KEYS = ("container", "wagon", "slot")
_CONFIG_KEYS = ("wagon", "config")


class SolutionFormatError(ValueError):
    """Malformed solution file."""


def load_solution(content: bytes | str) -> Solution:
    """Parse solution JSON.  Reference validity is *not* checked here;
    pair with an instance via :func:`check_feasibility` or :func:`evaluate`."""
    if isinstance(content, bytes):
        try:
            content = content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise SolutionFormatError(f"not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as exc:
        raise SolutionFormatError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    if not isinstance(doc, dict):
        raise SolutionFormatError("top level: expected an object")
    for key in doc:
        if key not in _SOLUTION_KEYS:
            raise SolutionFormatError(f"top level: unknown key '{key}'")
    for key in _SOLUTION_KEYS:
        if key not in doc:
            raise SolutionFormatError(f"top level: missing key '{key}'")

    def _field(obj: dict, key: str, where: str) -> Any:
        if key not in obj:
            raise SolutionFormatError(f"{where}: missing key '{key}'")
        return obj[key]

    assignments = []
    if not isinstance(doc["assignments"], list):
        raise SolutionFormatError("assignments: expected an array")
    for i, raw in enumerate(doc["assignments"]):
        where = f"assignments[{i}]"
        if not isinstance(raw, dict):
            raise SolutionFormatError(f"{where}: expected an object")
        for key in raw:
            if key not in _ASSIGNMENT_KEYS:
                raise SolutionFormatError(f"{where}: unknown key '{key}'")
        container = _field(raw, "container", where)
        wagon = _field(raw, "wagon", where)
        slot = _field(raw, "slot", where)
        if not isinstance(container, str) or not isinstance(wagon, str):
            raise SolutionFormatError(f"{where}: container and wagon must be strings")
        if not isinstance(slot, int) or isinstance(slot, bool):
            raise SolutionFormatError(f"{where}: slot must be an integer")
        assignments.append(Assignment(container, wagon, slot))

    configs = []
    if not isinstance(doc["configs"], list):
        raise SolutionFormatError("configs: expected an array")
    for i, raw in enumerate(doc["configs"]):
        where = f"configs[{i}]"
        if not isinstance(raw, dict):
            raise SolutionFormatError(f"{where}: expected an object")
        for key in raw:
            if key not in _CONFIG_KEYS:
                raise SolutionFormatError(f"{where}: unknown key '{key}'")
        wagon = _field(raw, "wagon", where)
        config = _field(raw, "config", where)
        if not isinstance(wagon, str):
            raise SolutionFormatError(f"{where}: wagon must be a string")
        if not isinstance(config, int) or isinstance(config, bool):
            raise SolutionFormatError(f"{where}: config must be an integer")
        configs.append(ConfigChoice(wagon, config))

    return Solution(tuple(assignments), tuple(configs))


def serialize_solution(solution: Solution) -> str:
    """Canonical JSON: assignments sorted by container id, configs by wagon."""
    sol = solution.canonical()
    doc = {
        "assignments": [
            {"container": a.container, "wagon": a.wagon, "slot": a.slot}
            for a in sol.assignments
        ],
        "configs": [{"wagon": c.wagon, "config": c.config} for c in sol.configs],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_solution_file(path: Any) -> Solution:
    with open(path, "rb") as fh:
        return load_solution(fh.read())
