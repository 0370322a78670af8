"""Checking equational proofs given as chains of single rewrite steps."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import ParseError, ProofError
from .terms import (
    Direction,
    Identity,
    Position,
    Term,
    Var,
    format_identity,
    format_position,
    format_term,
    is_valid_position,
    match,
    mirror_identity,
    mirror_position,
    mirror_term,
    parse_identity,
    parse_position,
    parse_term,
    positions,
    replace_at,
    subterm_at,
)

# Mirror partners of the named identities used by the shipped proofs.
MIRROR_PAIRS = {
    "Q1": "Q2",
    "Q3": "Q4",
    "Q5": "Q6",
    "K5": "K10",
    "K6": "K12",
    "K7": "K11",
    "K8": "K9",
    "K14": "K15",
    "L": "L",
    "K13": "K13",
    "E1": "E1~mirror",
    "K5q": "K5q~mirror",
    "tmp1": "tmp1~mirror",
    "tmp2": "tmp2~mirror",
    "tmp3": "tmp3~mirror",
}
DEFAULT_PAIRING = {**MIRROR_PAIRS, **{b: a for a, b in MIRROR_PAIRS.items()}}

# Identities whose mirror image is their partner with the two sides exchanged;
# steps using them change direction when mirrored.
SIDE_SWAPPING = frozenset({"L", "K13"})

_HOLE = Var("")


@dataclass(frozen=True)
class ProofStep:
    result: Term
    by: str
    direction: Direction = Direction.L2R
    at: Optional[Position] = None


@dataclass(frozen=True)
class ProofScript:
    goal: Identity
    start: Term
    steps: tuple
    uses: tuple
    note: str = ""

    @property
    def name(self) -> str:
        return self.goal.name


@dataclass(frozen=True)
class StepTrace:
    position: Position
    binding: dict


class Registry:
    """Named identities available to proofs, in insertion order."""

    def __init__(self, identities: Iterable[Identity] = ()):
        self._items: dict[str, Identity] = {}
        for ident in identities:
            self.add(ident)

    def add(self, ident: Identity):
        if ident.name in self._items:
            raise ProofError(f"identity {ident.name!r} is already registered", "duplicate")
        self._items[ident.name] = ident

    def resolve(self, name: str) -> Identity:
        try:
            return self._items[name]
        except KeyError:
            raise ProofError(f"identity {name!r} is not available", "unresolved") from None

    def __contains__(self, name) -> bool:
        return name in self._items

    def __getitem__(self, name: str) -> Identity:
        return self._items[name]

    def __iter__(self):
        return iter(self._items.values())

    def __len__(self):
        return len(self._items)

    @property
    def names(self) -> list[str]:
        return list(self._items)


def _same_context(a: Term, b: Term, p: Position) -> bool:
    return replace_at(a, p, _HOLE) == replace_at(b, p, _HOLE)


def _step_at(current: Term, result: Term, source: Term, target: Term, p: Position):
    if not is_valid_position(result, p) or not _same_context(current, result, p):
        return None
    binding = match(source, subterm_at(current, p))
    if binding is None:
        return None
    # target-only variables are instantiated from the expected result
    return match(target, subterm_at(result, p), binding)


def trace_step(current: Term, step: ProofStep, reg: Registry) -> StepTrace:
    """Locate the redex justifying ``step``; raise ProofError if there is none."""
    ident = reg.resolve(step.by)
    source, target = ident.sides(step.direction)
    if step.at is not None:
        if not is_valid_position(current, step.at):
            raise ProofError(
                f"position {format_position(step.at)!r} is not valid in {format_term(current)}",
                "no-match",
            )
        binding = _step_at(current, step.result, source, target, tuple(step.at))
        if binding is None:
            raise ProofError(
                f"{step.by} ({step.direction.value}) at {format_position(step.at) or 'root'} "
                f"does not turn {format_term(current)} into {format_term(step.result)}",
                "no-match",
            )
        return StepTrace(tuple(step.at), binding)
    hits = []
    for p in positions(current):
        binding = _step_at(current, step.result, source, target, p)
        if binding is not None:
            hits.append(StepTrace(p, binding))
    if not hits:
        raise ProofError(
            f"{step.by} ({step.direction.value}) does not turn {format_term(current)} "
            f"into {format_term(step.result)} at any position",
            "no-match",
        )
    if len(hits) > 1:
        where = ", ".join(format_position(h.position) or "root" for h in hits)
        raise ProofError(f"step is ambiguous: it applies at {where}", "ambiguous")
    return hits[0]


def check_step(current: Term, step: ProofStep, reg: Registry) -> Term:
    trace_step(current, step, reg)
    return step.result


def _precheck(s: ProofScript):
    if s.start != s.goal.lhs:
        raise ProofError("start term differs from the goal's left side", "malformed", script=s.name)
    final = s.steps[-1].result if s.steps else s.start
    if final != s.goal.rhs:
        raise ProofError("final term differs from the goal's right side", "malformed", script=s.name)
    for k, step in enumerate(s.steps, 1):
        if step.by not in s.uses:
            raise ProofError(f"{step.by!r} is not declared in uses", "malformed", k, s.name)


def check_script(s: ProofScript, reg: Registry) -> Identity:
    """Verify every step of ``s`` against ``reg`` and return its goal.

    Step numbers in errors are 1-based.
    """
    _precheck(s)
    for name in s.uses:
        if name not in reg:
            raise ProofError(f"uses {name!r}, which is not available", "unresolved", script=s.name)
    current = s.start
    for k, step in enumerate(s.steps, 1):
        try:
            current = check_step(current, step, reg)
        except ProofError as exc:
            raise ProofError(str(exc), exc.kind, k, s.name) from None
    return s.goal


def check_collection(scripts: Iterable[ProofScript], axioms: Iterable[Identity]) -> Registry:
    """Verify scripts in order, registering each goal once it checks."""
    reg = Registry(axioms)
    for s in scripts:
        goal = check_script(s, reg)
        try:
            reg.add(goal)
        except ProofError as exc:
            raise ProofError(str(exc), exc.kind, script=s.name) from None
    return reg


# ------------------------------------------------------------------ mirror


def mirror_script(s: ProofScript, pairing: Mapping[str, str] = DEFAULT_PAIRING,
                  side_swapping: Iterable[str] = SIDE_SWAPPING) -> ProofScript:
    """The mirror-image proof of the mirrored goal, using partner identities."""
    side_swapping = frozenset(side_swapping)

    def partner(name):
        try:
            return pairing[name]
        except KeyError:
            raise ProofError(f"no mirror partner for {name!r}", "unresolved", script=s.name) from None

    steps = []
    for step in s.steps:
        direction = step.direction.reverse if step.by in side_swapping else step.direction
        at = mirror_position(step.at) if step.at is not None else None
        steps.append(ProofStep(mirror_term(step.result), partner(step.by), direction, at))
    return ProofScript(
        goal=mirror_identity(s.goal, name=partner(s.goal.name)),
        start=mirror_term(s.start),
        steps=tuple(steps),
        uses=tuple(partner(n) for n in s.uses),
        note=s.note,
    )


# --------------------------------------------------------------------- I/O


def script_from_dict(data: Mapping) -> ProofScript:
    try:
        goal = parse_identity(data["goal"])
        start = parse_term(data["start"])
        steps = []
        for raw in data["steps"]:
            at = raw.get("at")
            steps.append(
                ProofStep(
                    result=parse_term(raw["term"]),
                    by=raw["by"],
                    direction=Direction.parse(raw.get("dir", "lr")),
                    at=parse_position(at) if at is not None else None,
                )
            )
        uses = tuple(data.get("uses", ()))
    except KeyError as exc:
        raise ProofError(f"proof script is missing field {exc.args[0]!r}", "malformed") from None
    except (ValueError, TypeError, AttributeError, ParseError) as exc:
        raise ProofError(f"bad proof script: {exc}", "malformed") from None
    return ProofScript(goal, start, tuple(steps), uses, data.get("note", ""))


def script_to_dict(s: ProofScript) -> dict:
    out = {"goal": format_identity(s.goal), "uses": list(s.uses), "start": format_term(s.start)}
    steps = []
    for step in s.steps:
        item = {"term": format_term(step.result), "by": step.by, "dir": step.direction.value}
        if step.at is not None:
            item["at"] = format_position(step.at)
        steps.append(item)
    out["steps"] = steps
    if s.note:
        out["note"] = s.note
    return out


def loads_scripts(text: str) -> list[ProofScript]:
    """Parse a proof file holding one script object or an array of them."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProofError(f"proof file is not valid JSON: {exc}", "malformed") from None
    if isinstance(data, Mapping):
        data = [data]
    if not isinstance(data, list):
        raise ProofError("proof file must hold an object or an array", "malformed")
    return [script_from_dict(item) for item in data]


def dumps_scripts(scripts: Sequence[ProofScript]) -> str:
    return json.dumps([script_to_dict(s) for s in scripts], indent=2, ensure_ascii=False) + "\n"
