"""Quadratic binary (QUBO) export of the load-planning problem.

Binary variables are the length-compatible assignment triples and the
per-wagon config selectors; every hard constraint becomes a squared penalty
term, inequalities gaining a slack register (binary expansion of the
residual range, bounded encoding so no slack state exceeds the range).
The objective keeps exact integer coefficients: values and the rehandle
unit cost are integers, and the rehandle term is the same shortfall count
used by the evaluator, written with the plain per-wagon load indicator
``sum_s x[c,s,w]`` — under the one-slot-per-container penalty that
indicator is 0/1, so the quadratic model scores feasible states exactly.

Masses are discretized to ``weight_unit`` kilograms before entering
penalty terms: container weights round *up*, capacities round *down*.
The rounding is conservative — an encoding can become infeasible for a
plan that is feasible in exact kilograms (an :class:`EncodingError` points
at the unit), but never the other way around.

Energy contract: for every feasible solution ``s``,
``energy_of(encode_solution(s)) == objective_shifted(s) + C0`` with the
single constant ``C0 = total yard value``.  The default penalty weight —
rehandle cost of clearing every blocking pair, plus total value, plus one —
exceeds any objective spread available to a feasible state, so constraint
violations cost more than the worst feasible plan; the weight and the
per-family overrides stay exposed because extreme instances may want a
bigger hammer.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Mapping, Sequence

from .evaluation import (
    Assignment,
    ConfigChoice,
    Solution,
    check_feasibility,
    InfeasibleSolutionError,
)
from .instance import Instance, derive_blocking_pairs

PENALTY_FAMILIES = (
    "assign_once",
    "slot_once",
    "one_config",
    "slot_weight",
    "wagon_weight",
    "train_weight",
)


class SlackWidthError(ValueError):
    """A slack register would need more than 32 bits at this weight_unit."""


class EmptyModelError(ValueError):
    """Instance yields no binary variables at all."""


class EncodingError(ValueError):
    """Solution cannot be encoded (typically: weight_unit too coarse)."""


@dataclass(frozen=True)
class QuboVariable:
    """One binary variable: an assignment triple, a config selector, or one
    bit of a slack register (``coefficient`` is its weight in the register)."""

    index: int
    kind: str  # "assignment" | "config" | "slack"
    container: str | None = None
    wagon: str | None = None
    slot: int | None = None
    config: int | None = None
    constraint: str | None = None
    bit: int | None = None
    coefficient: int | None = None

    def to_dict(self) -> dict:
        out: dict[str, Any] = {"index": self.index, "kind": self.kind}
        for key in ("container", "wagon", "slot", "config", "constraint", "bit", "coefficient"):
            value = getattr(self, key)
            if value is not None:
                out[key] = value
        return out


@dataclass(frozen=True)
class VariableMap:
    """Dense index space for one built model; ``weight_unit`` is recorded so
    slack residuals can be reconstructed when encoding solutions."""

    entries: tuple[QuboVariable, ...]
    weight_unit: int

    @cached_property
    def assignment_index(self) -> dict[tuple[str, str, int], int]:
        return {
            (e.container, e.wagon, e.slot): e.index
            for e in self.entries
            if e.kind == "assignment"
        }

    @cached_property
    def config_index(self) -> dict[tuple[str, int], int]:
        return {
            (e.wagon, e.config): e.index for e in self.entries if e.kind == "config"
        }

    @cached_property
    def slack_registers(self) -> dict[str, tuple[tuple[int, int], ...]]:
        """Constraint id -> ((variable index, coefficient), ...) in bit order."""
        regs: dict[str, list[tuple[int, int]]] = {}
        for e in self.entries:
            if e.kind == "slack":
                regs.setdefault(e.constraint, []).append((e.index, e.coefficient))
        return {cid: tuple(bits) for cid, bits in regs.items()}


@dataclass(frozen=True)
class QuboModel:
    """Upper-triangular coefficient table plus constant offset.

    ``energy = sum(coefficients[i, j] * bits[i] * bits[j]) + offset`` with
    ``i <= j``; diagonal entries are the linear terms.  All coefficients are
    integers and zero-valued entries are never stored.
    """

    n: int
    coefficients: dict[tuple[int, int], int]
    offset: int
    penalties: dict[str, int]
    weight_unit: int


def default_penalty(instance: Instance) -> int:
    """One more than the largest objective spread a feasible state can see."""
    return (
        instance.rehandle_unit_cost * len(derive_blocking_pairs(instance))
        + instance.total_value
        + 1
    )


def _register_coefficients(max_residual: int) -> list[int]:
    """Bounded binary expansion: bit weights covering exactly [0, max_residual]."""
    if max_residual <= 0:
        return []
    m = max_residual.bit_length()
    coefficients = [1 << j for j in range(m - 1)]
    coefficients.append(max_residual - ((1 << (m - 1)) - 1))
    return coefficients


class _Accumulator:
    def __init__(self) -> None:
        self.coefficients: dict[tuple[int, int], int] = {}
        self.offset = 0

    def add(self, i: int, j: int, value: int) -> None:
        if value == 0:
            return
        key = (i, j) if i <= j else (j, i)
        self.coefficients[key] = self.coefficients.get(key, 0) + value

    def add_square(
        self, terms: Sequence[tuple[int, int]], constant: int, weight: int
    ) -> None:
        """Accumulate ``weight * (sum(c_k * z_k) + constant)**2``."""
        self.offset += weight * constant * constant
        for k, (ik, ck) in enumerate(terms):
            self.add(ik, ik, weight * (ck * ck + 2 * constant * ck))
            for il, cl in terms[k + 1 :]:
                self.add(ik, il, weight * 2 * ck * cl)

    def finish(self) -> dict[tuple[int, int], int]:
        return {key: v for key, v in sorted(self.coefficients.items()) if v != 0}


def _resolve_penalties(
    instance: Instance, penalty: int | Mapping[str, int] | None
) -> dict[str, int]:
    base = default_penalty(instance)
    weights = {family: base for family in PENALTY_FAMILIES}
    if penalty is None:
        return weights
    if isinstance(penalty, int):
        if penalty < 1:
            raise ValueError("penalty must be positive")
        return {family: penalty for family in PENALTY_FAMILIES}
    for family, value in penalty.items():
        if family not in PENALTY_FAMILIES:
            raise ValueError(f"unknown penalty family '{family}'")
        if value < 1:
            raise ValueError(f"penalty for '{family}' must be positive")
        weights[family] = value
    return weights


def build_qubo(
    instance: Instance,
    *,
    penalty: int | Mapping[str, int] | None = None,
    weight_unit: int = 100,
) -> tuple[QuboModel, VariableMap]:
    """Assemble the QUBO for an instance.

    Per-container and per-slot constraints materialise only when at least
    one compatible assignment variable exists (they are vacuous otherwise);
    wagon and train weight constraints always materialise, so even a
    containerless instance keeps its config selectors and capacity slacks.
    """
    if weight_unit < 1:
        raise ValueError("weight_unit must be a positive integer")
    weights = _resolve_penalties(instance, penalty)
    unit = weight_unit

    w_up = {c.id: (c.weight + unit - 1) // unit for c in instance.containers}
    entries: list[QuboVariable] = []

    def new_var(**kwargs) -> int:
        index = len(entries)
        entries.append(QuboVariable(index=index, **kwargs))
        return index

    x_index: dict[tuple[str, str, int], int] = {}
    for c in instance.containers:
        for w in instance.wagons:
            for si, slot in enumerate(w.slots):
                if slot.length == c.length:
                    x_index[(c.id, w.id, si)] = new_var(
                        kind="assignment", container=c.id, wagon=w.id, slot=si
                    )

    t_index: dict[tuple[str, int], int] = {}
    for w in instance.wagons:
        for b in range(len(w.configs)):
            t_index[(w.id, b)] = new_var(kind="config", wagon=w.id, config=b)

    compat_by_container: dict[str, list[int]] = {}
    compat_by_slot: dict[tuple[str, int], list[str]] = {}
    for (cid, wid, si), idx in x_index.items():
        compat_by_container.setdefault(cid, []).append(idx)
        compat_by_slot.setdefault((wid, si), []).append(cid)

    registers: dict[str, tuple[tuple[int, int], ...]] = {}

    def new_register(constraint_id: str, max_residual: int) -> tuple[tuple[int, int], ...]:
        coefficients = _register_coefficients(max_residual)
        if len(coefficients) > 32:
            raise SlackWidthError(
                f"constraint '{constraint_id}' needs {len(coefficients)} slack bits "
                f"(limit 32); increase weight_unit"
            )
        bits = tuple(
            (
                new_var(
                    kind="slack",
                    constraint=constraint_id,
                    bit=position,
                    coefficient=coefficient,
                ),
                coefficient,
            )
            for position, coefficient in enumerate(coefficients)
        )
        registers[constraint_id] = bits
        return bits

    # Registers are created family by family so the index layout is stable.
    for c in instance.containers:
        if c.id in compat_by_container:
            new_register(f"assign_once[{c.id}]", 1)
    for w in instance.wagons:
        for si in range(len(w.slots)):
            if (w.id, si) in compat_by_slot:
                new_register(f"slot_once[{w.id},{si}]", 1)
    for w in instance.wagons:
        for si in range(len(w.slots)):
            if (w.id, si) in compat_by_slot:
                cap = max(cfg.per_slot_max[si] // unit for cfg in w.configs)
                new_register(f"slot_weight[{w.id},{si}]", cap)
    for w in instance.wagons:
        new_register(f"wagon_weight[{w.id}]", w.max_weight // unit)
    if instance.wagons:
        new_register("train_weight", instance.train_max_weight // unit)

    if not entries:
        raise EmptyModelError("instance yields no binary variables")

    acc = _Accumulator()

    # Objective: forfeited value plus rehandle shortfall.
    acc.offset += instance.total_value
    for (cid, _, _), idx in x_index.items():
        acc.add(idx, idx, -instance.container_map[cid].value)

    alpha = instance.rehandle_unit_cost
    for stack in instance.yard.stacks:
        height = len(stack)
        for tier, cid in enumerate(stack):
            blockers = stack[tier + 1 :]
            for wi, w in enumerate(instance.wagons):
                for si, slot in enumerate(w.slots):
                    xi = x_index.get((cid, w.id, si))
                    if xi is None:
                        continue
                    acc.add(xi, xi, alpha * (height - 1 - tier))
                    for above in blockers:
                        for earlier in instance.wagons[: wi + 1]:
                            for sj in range(len(earlier.slots)):
                                xj = x_index.get((above, earlier.id, sj))
                                if xj is not None:
                                    acc.add(xi, xj, -alpha)

    # Penalties: weight * (expression + slack - bound)^2 per constraint.
    for c in instance.containers:
        cid = f"assign_once[{c.id}]"
        if cid not in registers:
            continue
        terms = [(idx, 1) for idx in compat_by_container[c.id]]
        terms += list(registers[cid])
        acc.add_square(terms, -1, weights["assign_once"])

    for w in instance.wagons:
        for si in range(len(w.slots)):
            cid = f"slot_once[{w.id},{si}]"
            if cid not in registers:
                continue
            terms = [
                (x_index[(occupant, w.id, si)], 1)
                for occupant in compat_by_slot[(w.id, si)]
            ]
            terms += list(registers[cid])
            acc.add_square(terms, -1, weights["slot_once"])

    for w in instance.wagons:
        terms = [(t_index[(w.id, b)], 1) for b in range(len(w.configs))]
        acc.add_square(terms, -1, weights["one_config"])

    for w in instance.wagons:
        for si in range(len(w.slots)):
            cid = f"slot_weight[{w.id},{si}]"
            if cid not in registers:
                continue
            terms = [
                (x_index[(occupant, w.id, si)], w_up[occupant])
                for occupant in compat_by_slot[(w.id, si)]
            ]
            terms += [
                (t_index[(w.id, b)], -(cfg.per_slot_max[si] // unit))
                for b, cfg in enumerate(w.configs)
            ]
            terms += list(registers[cid])
            acc.add_square(terms, 0, weights["slot_weight"])

    for w in instance.wagons:
        cid = f"wagon_weight[{w.id}]"
        terms = [
            (x_index[(occupant, w.id, si)], w_up[occupant])
            for si in range(len(w.slots))
            for occupant in compat_by_slot.get((w.id, si), ())
        ]
        terms += list(registers[cid])
        acc.add_square(terms, -(w.max_weight // unit), weights["wagon_weight"])

    if instance.wagons:
        terms = [(idx, w_up[cid]) for (cid, _, _), idx in x_index.items()]
        terms += list(registers["train_weight"])
        acc.add_square(terms, -(instance.train_max_weight // unit), weights["train_weight"])

    model = QuboModel(
        n=len(entries),
        coefficients=acc.finish(),
        offset=acc.offset,
        penalties=weights,
        weight_unit=unit,
    )
    return model, VariableMap(entries=tuple(entries), weight_unit=unit)


def energy_of(model: QuboModel, bits: Sequence[int]) -> int:
    """Evaluate the model on a 0/1 vector of length ``model.n``."""
    if len(bits) != model.n:
        raise ValueError(f"expected {model.n} bits, got {len(bits)}")
    total = model.offset
    for (i, j), value in model.coefficients.items():
        if bits[i] and bits[j]:
            total += value
    return total


def _encode_register_value(
    register: tuple[tuple[int, int], ...], value: int, constraint_id: str
) -> dict[int, int]:
    capacity = sum(coefficient for _, coefficient in register)
    if value < 0 or value > capacity:
        raise EncodingError(
            f"residual {value} for '{constraint_id}' not representable "
            f"(range [0, {capacity}]); weight_unit may be too coarse"
        )
    bits: dict[int, int] = {}
    remaining = value
    if register:
        closing_index, closing = register[-1]
        if remaining >= closing:
            bits[closing_index] = 1
            remaining -= closing
        for index, coefficient in reversed(register[:-1]):
            if remaining >= coefficient:
                bits[index] = 1
                remaining -= coefficient
    if remaining:
        raise EncodingError(
            f"residual {value} for '{constraint_id}' not representable exactly"
        )
    return bits


def encode_solution(
    varmap: VariableMap, instance: Instance, solution: Solution
) -> list[int]:
    """Bit vector whose energy equals the solution's objective plus C0.

    Requires a feasible solution; slack registers are set to the exact
    residual of their constraint in ``weight_unit`` steps.
    """
    violations = check_feasibility(instance, solution)
    if violations:
        raise InfeasibleSolutionError(violations)

    unit = varmap.weight_unit
    bits = [0] * len(varmap.entries)
    amap = solution.assignment_map
    cmap = solution.config_map

    for container, (wagon, slot) in amap.items():
        bits[varmap.assignment_index[(container, wagon, slot)]] = 1
    for wagon, config in cmap.items():
        bits[varmap.config_index[(wagon, config)]] = 1

    w_up = {c.id: (c.weight + unit - 1) // unit for c in instance.containers}
    occupant: dict[tuple[str, int], str] = {ws: c for c, ws in amap.items()}

    def set_register(constraint_id: str, value: int) -> None:
        register = varmap.slack_registers.get(constraint_id)
        if register is None:
            if value != 0:
                raise EncodingError(
                    f"no slack register for '{constraint_id}' but residual {value}"
                )
            return
        for index, bit in _encode_register_value(register, value, constraint_id).items():
            bits[index] = bit

    for c in instance.containers:
        if f"assign_once[{c.id}]" in varmap.slack_registers:
            set_register(f"assign_once[{c.id}]", 0 if c.id in amap else 1)

    train_load = 0
    for w in instance.wagons:
        wagon_load = 0
        limits = w.configs[cmap[w.id]].per_slot_max
        for si in range(len(w.slots)):
            cid_here = occupant.get((w.id, si))
            load = w_up[cid_here] if cid_here is not None else 0
            wagon_load += load
            key = f"slot_once[{w.id},{si}]"
            if key in varmap.slack_registers:
                set_register(key, 0 if cid_here is not None else 1)
            key = f"slot_weight[{w.id},{si}]"
            if key in varmap.slack_registers:
                set_register(key, limits[si] // unit - load)
        set_register(f"wagon_weight[{w.id}]", w.max_weight // unit - wagon_load)
        train_load += wagon_load
    if instance.wagons:
        set_register("train_weight", instance.train_max_weight // unit - train_load)

    return bits


def decode_solution(varmap: VariableMap, bits: Sequence[int]) -> Solution:
    """Read assignment and config bits back into a solution (slack bits are
    ignored).  The result may be infeasible; judge it with the evaluator."""
    assignments = []
    configs = []
    for e in varmap.entries:
        if not bits[e.index]:
            continue
        if e.kind == "assignment":
            assignments.append(Assignment(e.container, e.wagon, e.slot))
        elif e.kind == "config":
            configs.append(ConfigChoice(e.wagon, e.config))
    return Solution(tuple(sorted(assignments)), tuple(sorted(configs)))


# ---------------------------------------------------------------------------
# Export / import
# ---------------------------------------------------------------------------


def export_qubo(model: QuboModel, varmap: VariableMap, fmt: str = "text") -> str:
    """Serialize the model.

    ``text`` is the coordinate format: a ``# qubo n=<n> offset=<offset>``
    header, then one ``i j value`` line per stored coefficient, sorted.
    ``json`` additionally carries the variable map and penalty weights.
    Both are byte-deterministic for a fixed instance and options.
    """
    if fmt == "text":
        lines = [f"# qubo n={model.n} offset={model.offset}"]
        for (i, j), value in sorted(model.coefficients.items()):
            lines.append(f"{i} {j} {value}")
        return "\n".join(lines) + "\n"
    if fmt == "json":
        doc = {
            "n": model.n,
            "offset": model.offset,
            "terms": [[i, j, value] for (i, j), value in sorted(model.coefficients.items())],
            "variables": [e.to_dict() for e in varmap.entries],
            "penalties": dict(model.penalties),
            "weight_unit": model.weight_unit,
        }
        return json.dumps(doc, indent=2) + "\n"
    raise ValueError(f"unknown export format '{fmt}'")


_HEADER_RE = re.compile(r"^# qubo n=(\d+) offset=(-?\d+)$")


def parse_qubo_text(content: str) -> QuboModel:
    """Parse the coordinate format.  Only coefficients travel in this
    format, so penalties come back empty and weight_unit defaults to 1."""
    lines = [line for line in content.splitlines() if line.strip()]
    if not lines:
        raise ValueError("empty QUBO text")
    header = _HEADER_RE.match(lines[0])
    if not header:
        raise ValueError(f"bad QUBO header: {lines[0]!r}")
    n, offset = int(header.group(1)), int(header.group(2))
    coefficients: dict[tuple[int, int], int] = {}
    for line in lines[1:]:
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"bad QUBO term line: {line!r}")
        i, j, value = int(parts[0]), int(parts[1]), int(parts[2])
        if not 0 <= i <= j < n:
            raise ValueError(f"term indices out of range: {line!r}")
        coefficients[(i, j)] = value
    return QuboModel(n=n, coefficients=coefficients, offset=offset, penalties={}, weight_unit=1)


def parse_qubo_json(content: str) -> tuple[QuboModel, VariableMap]:
    doc = json.loads(content)
    entries = tuple(
        QuboVariable(
            index=e["index"],
            kind=e["kind"],
            container=e.get("container"),
            wagon=e.get("wagon"),
            slot=e.get("slot"),
            config=e.get("config"),
            constraint=e.get("constraint"),
            bit=e.get("bit"),
            coefficient=e.get("coefficient"),
        )
        for e in doc["variables"]
    )
    model = QuboModel(
        n=doc["n"],
        coefficients={(i, j): value for i, j, value in doc["terms"]},
        offset=doc["offset"],
        penalties=dict(doc["penalties"]),
        weight_unit=doc["weight_unit"],
    )
    return model, VariableMap(entries=entries, weight_unit=doc["weight_unit"])
