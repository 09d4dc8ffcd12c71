"""Problem data model: containers, yard stacks, train layout, instance files.

A problem instance couples a container *yard* with a *train*.  The yard is a
row of vertical stacks; each stack lists container ids bottom tier first, and
only the topmost container of a stack can be lifted directly — reaching a
buried container means temporarily moving everything above it (a
"rehandle").  The train is an ordered list of wagons served strictly in list
order, so wagon position doubles as the loading timeline.  Each wagon offers
slots (one container each, twenty- or forty-foot) and a choice of weight
configurations: alternative per-slot mass limits of which exactly one must
be selected for the wagon.

All masses are integer kilograms and values are integers, which keeps
objective arithmetic exact.  Instance files are canonical JSON (fixed key
order, two-space indent), so serialisation is byte-reproducible: loading a
file and re-serialising it yields the identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import Any, NamedTuple

from .rng import stream


class InstanceFormatError(ValueError):
    """Malformed instance file: bad JSON, wrong types, unknown or missing keys."""


class InstanceInvariantError(ValueError):
    """Structurally valid file whose data breaks an instance invariant."""


class GenSpecError(ValueError):
    """Generator spec that cannot produce a valid instance."""


class ContainerLength(IntEnum):
    """Container footprint, measured in twenty-foot equivalent units (TEU)."""

    TWENTY_FOOT = 1
    FORTY_FOOT = 2

    @property
    def teu(self) -> int:
        return int(self)


@dataclass(frozen=True)
class Container:
    """One container: identity, footprint, mass in kg, and loading value.

    ``value`` is the reward collected when the container makes it onto the
    train; leaving it in the yard forfeits the reward.
    """

    id: str
    length: ContainerLength
    weight: int
    value: int

    def __post_init__(self) -> None:
        if not self.id:
            raise InstanceInvariantError("container id must be non-empty")
        if self.weight < 0:
            raise InstanceInvariantError(f"container '{self.id}': negative weight")
        if self.value < 0:
            raise InstanceInvariantError(f"container '{self.id}': negative value")


@dataclass(frozen=True)
class Yard:
    """Container stacks, each a tuple of container ids bottom tier first."""

    stacks: tuple[tuple[str, ...], ...]
    max_tiers: int

    def __post_init__(self) -> None:
        if self.max_tiers < 1:
            raise InstanceInvariantError("max_tiers must be at least 1")
        for k, stack in enumerate(self.stacks):
            if len(stack) > self.max_tiers:
                raise InstanceInvariantError(
                    f"stack {k} has {len(stack)} tiers, exceeding max_tiers={self.max_tiers}"
                )


@dataclass(frozen=True)
class Slot:
    """One wagon slot.  A slot's identity is its position in the wagon's
    slot list; only a container of exactly matching length may occupy it."""

    length: ContainerLength


@dataclass(frozen=True)
class WeightConfig:
    """One selectable weight configuration: a mass limit per slot, in kg."""

    per_slot_max: tuple[int, ...]

    def __post_init__(self) -> None:
        for limit in self.per_slot_max:
            if limit < 0:
                raise InstanceInvariantError("per-slot weight limit must be non-negative")


@dataclass(frozen=True)
class Wagon:
    id: str
    slots: tuple[Slot, ...]
    configs: tuple[WeightConfig, ...]
    max_weight: int

    def __post_init__(self) -> None:
        if not self.id:
            raise InstanceInvariantError("wagon id must be non-empty")
        if not self.configs:
            raise InstanceInvariantError(f"wagon '{self.id}': needs at least one weight config")
        for b, cfg in enumerate(self.configs):
            if len(cfg.per_slot_max) != len(self.slots):
                raise InstanceInvariantError(
                    f"wagon '{self.id}': config {b} has {len(cfg.per_slot_max)} limits "
                    f"for {len(self.slots)} slots"
                )
        if self.max_weight < 0:
            raise InstanceInvariantError(f"wagon '{self.id}': negative max_weight")


class BlockingPair(NamedTuple):
    """Two containers in one stack: ``above`` must move before ``below``."""

    below: str
    above: str


@dataclass(frozen=True)
class Instance:
    """A complete problem instance.

    ``rehandle_unit_cost`` prices one crane rehandle in the same units as
    container values, so the objective can trade load value against crane
    effort directly.
    """

    containers: tuple[Container, ...]
    yard: Yard
    wagons: tuple[Wagon, ...]
    train_max_weight: int
    rehandle_unit_cost: int

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for c in self.containers:
            if c.id in seen:
                raise InstanceInvariantError(f"duplicate container id '{c.id}'")
            seen.add(c.id)
        wseen: set[str] = set()
        for w in self.wagons:
            if w.id in wseen:
                raise InstanceInvariantError(f"duplicate wagon id '{w.id}'")
            wseen.add(w.id)
        placed: set[str] = set()
        for k, stack in enumerate(self.yard.stacks):
            for cid in stack:
                if cid not in seen:
                    raise InstanceInvariantError(f"unknown container id '{cid}' in stack {k}")
                if cid in placed:
                    raise InstanceInvariantError(f"duplicate yard placement for '{cid}'")
                placed.add(cid)
        missing = seen - placed
        if missing:
            cid = sorted(missing)[0]
            raise InstanceInvariantError(f"container '{cid}' missing from yard")
        if self.train_max_weight < 0:
            raise InstanceInvariantError("negative train_max_weight")
        if self.rehandle_unit_cost < 0:
            raise InstanceInvariantError("negative rehandle_unit_cost")

    # -- derived lookups (cached; the dataclass is immutable) -----------------

    @cached_property
    def container_map(self) -> dict[str, Container]:
        return {c.id: c for c in self.containers}

    @cached_property
    def wagon_map(self) -> dict[str, Wagon]:
        return {w.id: w for w in self.wagons}

    @cached_property
    def wagon_position(self) -> dict[str, int]:
        """Wagon id -> position in the loading order."""
        return {w.id: i for i, w in enumerate(self.wagons)}

    @cached_property
    def stack_position(self) -> dict[str, tuple[int, int]]:
        """Container id -> (stack index, tier index)."""
        return {
            cid: (k, l)
            for k, stack in enumerate(self.yard.stacks)
            for l, cid in enumerate(stack)
        }

    @cached_property
    def all_slots(self) -> tuple[tuple[str, int, ContainerLength], ...]:
        """Every (wagon id, slot index, slot length) triple in train order."""
        return tuple(
            (w.id, si, slot.length)
            for w in self.wagons
            for si, slot in enumerate(w.slots)
        )

    @property
    def total_slots(self) -> int:
        return len(self.all_slots)

    @cached_property
    def total_container_teu(self) -> int:
        return sum(c.length.teu for c in self.containers)

    @cached_property
    def total_slot_teu(self) -> int:
        return sum(length.teu for _, _, length in self.all_slots)

    @cached_property
    def total_value(self) -> int:
        return sum(c.value for c in self.containers)


def derive_blocking_pairs(instance: Instance) -> list[BlockingPair]:
    """All (below, above) pairs sharing a stack, ordered by stack, then
    below tier, then above tier."""
    pairs: list[BlockingPair] = []
    for stack in instance.yard.stacks:
        for lb in range(len(stack)):
            for la in range(lb + 1, len(stack)):
                pairs.append(BlockingPair(stack[lb], stack[la]))
    return pairs


def linear_index(instance: Instance, stack: int, tier: int) -> int:
    """Flatten an occupied yard position to ``max_tiers * stack + tier``."""
    stacks = instance.yard.stacks
    if not 0 <= stack < len(stacks):
        raise IndexError(f"no stack {stack}")
    if not 0 <= tier < len(stacks[stack]):
        raise IndexError(f"stack {stack} has no occupied tier {tier}")
    return instance.yard.max_tiers * stack + tier


def from_linear_index(instance: Instance, index: int) -> tuple[int, int]:
    """Inverse of :func:`linear_index`; only occupied positions are valid."""
    tiers = instance.yard.max_tiers
    if index < 0:
        raise IndexError(f"negative linear index {index}")
    stack, tier = divmod(index, tiers)
    stacks = instance.yard.stacks
    if stack >= len(stacks) or tier >= len(stacks[stack]):
        raise IndexError(f"linear index {index} does not name an occupied position")
    return stack, tier


# ---------------------------------------------------------------------------
# Instance files
# ---------------------------------------------------------------------------

_TOP_KEYS = ("alpha", "train_max_weight", "max_tiers", "containers", "stacks", "wagons")
_CONTAINER_KEYS = ("id", "teu", "weight", "value")
_WAGON_KEYS = ("id", "max_weight", "slots", "configs")


def _check_keys(obj: dict, allowed: tuple[str, ...], where: str) -> None:
    for key in obj:
        if key not in allowed:
            raise InstanceFormatError(f"{where}: unknown key '{key}'")
    for key in allowed:
        if key not in obj:
            raise InstanceFormatError(f"{where}: missing key '{key}'")


def _as_object(value: Any, where: str) -> dict:
    if not isinstance(value, dict):
        raise InstanceFormatError(f"{where}: expected an object")
    return value


def _as_array(value: Any, where: str) -> list:
    if not isinstance(value, list):
        raise InstanceFormatError(f"{where}: expected an array")
    return value


def _as_int(value: Any, where: str) -> int:
    if not isinstance(value, int) or isinstance(value, bool):
        raise InstanceFormatError(f"{where}: expected an integer")
    return value


def _as_str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise InstanceFormatError(f"{where}: expected a string")
    return value


def _as_length(value: Any, where: str) -> ContainerLength:
    teu = _as_int(value, where)
    if teu not in (1, 2):
        raise InstanceFormatError(f"{where}: teu must be 1 or 2, got {teu}")
    return ContainerLength(teu)


def load_instance(content: bytes | str) -> Instance:
    """Parse instance JSON.

    Raises :class:`InstanceFormatError` for syntax/schema problems (with
    line/field diagnostics) and :class:`InstanceInvariantError` when the
    data is well-formed but inconsistent (duplicate ids, over-tall stacks,
    containers missing from the yard, ...).
    """
    if isinstance(content, bytes):
        try:
            content = content.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise InstanceFormatError(f"not valid UTF-8: {exc}") from exc
    try:
        doc = json.loads(content)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(
            f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc

    top = _as_object(doc, "top level")
    _check_keys(top, _TOP_KEYS, "top level")

    containers = []
    for i, raw in enumerate(_as_array(top["containers"], "containers")):
        where = f"containers[{i}]"
        obj = _as_object(raw, where)
        _check_keys(obj, _CONTAINER_KEYS, where)
        containers.append(
            Container(
                id=_as_str(obj["id"], f"{where}.id"),
                length=_as_length(obj["teu"], f"{where}.teu"),
                weight=_as_int(obj["weight"], f"{where}.weight"),
                value=_as_int(obj["value"], f"{where}.value"),
            )
        )

    stacks = []
    for k, raw in enumerate(_as_array(top["stacks"], "stacks")):
        arr = _as_array(raw, f"stacks[{k}]")
        stacks.append(tuple(_as_str(cid, f"stacks[{k}][{j}]") for j, cid in enumerate(arr)))

    wagons = []
    for i, raw in enumerate(_as_array(top["wagons"], "wagons")):
        where = f"wagons[{i}]"
        obj = _as_object(raw, where)
        _check_keys(obj, _WAGON_KEYS, where)
        slots = []
        for si, sraw in enumerate(_as_array(obj["slots"], f"{where}.slots")):
            sobj = _as_object(sraw, f"{where}.slots[{si}]")
            _check_keys(sobj, ("teu",), f"{where}.slots[{si}]")
            slots.append(Slot(_as_length(sobj["teu"], f"{where}.slots[{si}].teu")))
        configs = []
        for b, craw in enumerate(_as_array(obj["configs"], f"{where}.configs")):
            arr = _as_array(craw, f"{where}.configs[{b}]")
            configs.append(
                WeightConfig(
                    tuple(
                        _as_int(limit, f"{where}.configs[{b}][{j}]")
                        for j, limit in enumerate(arr)
                    )
                )
            )
        wagons.append(
            Wagon(
                id=_as_str(obj["id"], f"{where}.id"),
                slots=tuple(slots),
                configs=tuple(configs),
                max_weight=_as_int(obj["max_weight"], f"{where}.max_weight"),
            )
        )

    return Instance(
        containers=tuple(containers),
        yard=Yard(stacks=tuple(stacks), max_tiers=_as_int(top["max_tiers"], "max_tiers")),
        wagons=tuple(wagons),
        train_max_weight=_as_int(top["train_max_weight"], "train_max_weight"),
        rehandle_unit_cost=_as_int(top["alpha"], "alpha"),
    )


def serialize_instance(instance: Instance) -> str:
    """Canonical JSON for an instance; byte-identical across round trips."""
    doc = {
        "alpha": instance.rehandle_unit_cost,
        "train_max_weight": instance.train_max_weight,
        "max_tiers": instance.yard.max_tiers,
        "containers": [
            {"id": c.id, "teu": c.length.teu, "weight": c.weight, "value": c.value}
            for c in instance.containers
        ],
        "stacks": [list(stack) for stack in instance.yard.stacks],
        "wagons": [
            {
                "id": w.id,
                "max_weight": w.max_weight,
                "slots": [{"teu": s.length.teu} for s in w.slots],
                "configs": [list(cfg.per_slot_max) for cfg in w.configs],
            }
            for w in instance.wagons
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def load_instance_file(path: Any) -> Instance:
    with open(path, "rb") as fh:
        return load_instance(fh.read())


# ---------------------------------------------------------------------------
# Seeded generator
# ---------------------------------------------------------------------------

WEIGHT_RANGE = (2000, 30000)
VALUE_RANGE = (1, 20)
SLOT_LIMIT_RANGE = (10000, 36000)
CONFIGS_PER_WAGON = 2


@dataclass(frozen=True)
class GenSpec:
    """Shape parameters for a generated instance.

    ``total_teu`` fixes the container mix: ``total_teu - containers``
    forty-footers and ``2*containers - total_teu`` twenty-footers.
    ``train_teu`` fixes the train's slot capacity, filled with forty-foot
    slots first plus one twenty-foot slot when the TEU count is odd.
    """

    containers: int
    wagons: int
    tiers: int
    train_teu: int
    total_teu: int
    seed: int = 0


def _validate_spec(spec: GenSpec) -> None:
    if spec.containers < 0:
        raise GenSpecError("containers must be non-negative")
    if spec.wagons < 1:
        raise GenSpecError("at least one wagon is required")
    if spec.tiers < 1:
        raise GenSpecError("tiers must be at least 1")
    if spec.train_teu < 0:
        raise GenSpecError("train_teu must be non-negative")
    if not spec.containers <= spec.total_teu <= 2 * spec.containers:
        raise GenSpecError(
            f"total_teu={spec.total_teu} impossible for {spec.containers} containers "
            f"(must lie in [{spec.containers}, {2 * spec.containers}])"
        )


def generate_instance(spec: GenSpec) -> Instance:
    """Build a random instance; a pure function of ``spec``, seed included.

    Draw order is part of the file-format contract (golden instances are
    byte-frozen): container lengths are shuffled first, then weight and
    value per container in id order, then per-slot limits per wagon, config
    by config.  Wagon capacity is the best per-slot limit sum less 10%, and
    the train cap is the wagon-cap sum less 10%, both rounded down.
    """
    _validate_spec(spec)
    rng = stream(spec.seed, "generate")

    n_forty = spec.total_teu - spec.containers
    n_twenty = 2 * spec.containers - spec.total_teu
    cw = max(1, len(str(max(spec.containers - 1, 0))))
    ids = [f"c{i:0{cw}d}" for i in range(spec.containers)]

    lengths = [ContainerLength.FORTY_FOOT] * n_forty + [ContainerLength.TWENTY_FOOT] * n_twenty
    rng.shuffle(lengths)
    containers = tuple(
        Container(
            id=cid,
            length=lengths[i],
            weight=rng.randint(*WEIGHT_RANGE),
            value=rng.randint(*VALUE_RANGE),
        )
        for i, cid in enumerate(ids)
    )

    stacks = tuple(
        tuple(ids[i : i + spec.tiers]) for i in range(0, spec.containers, spec.tiers)
    )

    slot_lengths = [ContainerLength.FORTY_FOOT] * (spec.train_teu // 2)
    if spec.train_teu % 2:
        slot_lengths.append(ContainerLength.TWENTY_FOOT)
    per_wagon: list[list[ContainerLength]] = [[] for _ in range(spec.wagons)]
    for j, length in enumerate(slot_lengths):
        per_wagon[j % spec.wagons].append(length)

    ww = max(1, len(str(max(spec.wagons - 1, 0))))
    wagons = []
    for wi in range(spec.wagons):
        slots = tuple(Slot(length) for length in per_wagon[wi])
        configs = tuple(
            WeightConfig(tuple(rng.randint(*SLOT_LIMIT_RANGE) for _ in slots))
            for _ in range(CONFIGS_PER_WAGON)
        )
        best = sum(
            max(cfg.per_slot_max[si] for cfg in configs) for si in range(len(slots))
        )
        wagons.append(
            Wagon(
                id=f"w{wi:0{ww}d}",
                slots=slots,
                configs=configs,
                max_weight=9 * best // 10,
            )
        )

    train_max = 9 * sum(w.max_weight for w in wagons) // 10
    return Instance(
        containers=containers,
        yard=Yard(stacks=stacks, max_tiers=spec.tiers),
        wagons=tuple(wagons),
        train_max_weight=train_max,
        rehandle_unit_cost=1,
    )
