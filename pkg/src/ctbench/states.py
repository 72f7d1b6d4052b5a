"""Symbolic domain model: the 17 cache-block step states and three-step patterns.

A step state says who touches the tracked cache block and how: an actor
(attacker or victim) either accesses an address or invalidates it, the
address being the probe address a, its set-alias a^alias, a non-sensitive
same-set address d, the victim's secret u, or the whole cache; the extra
star state means "anything may have happened to the block".
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass


class Actor(enum.Enum):
    ATTACKER = "A"
    VICTIM = "V"


class Tag(enum.Enum):
    """What address a step touches."""

    A = "a"            # known sensitive address mapping to the tracked set
    ALIAS = "a_alias"  # different sensitive address, same set
    D = "d"            # known non-sensitive address, same set
    U = "u"            # the victim's secret address
    WHOLE = "whole"    # whole-cache invalidation (no specific address)


class Kind(enum.Enum):
    ACCESS = "access"
    INVALIDATE = "inv"


@dataclass(frozen=True)
class StepState:
    """One of the 17 block states; the star state has actor=None."""

    actor: Actor | None
    tag: Tag | None
    kind: Kind | None

    @property
    def is_star(self) -> bool:
        return self.actor is None

    def __str__(self) -> str:
        return format_state(self)


def _mk(actor, tag, kind):
    return StepState(actor, tag, kind)


STAR = StepState(None, None, None)

# Fixed state ordering; all deterministic outputs (enumeration order,
# manifests) derive from it.
ALL_STATES: tuple[StepState, ...] = (
    _mk(Actor.VICTIM, Tag.U, Kind.ACCESS),        # V_u
    _mk(Actor.VICTIM, Tag.U, Kind.INVALIDATE),    # V_u^inv
    _mk(Actor.ATTACKER, Tag.A, Kind.ACCESS),      # A_a
    _mk(Actor.VICTIM, Tag.A, Kind.ACCESS),        # V_a
    _mk(Actor.ATTACKER, Tag.ALIAS, Kind.ACCESS),  # A_a^alias
    _mk(Actor.VICTIM, Tag.ALIAS, Kind.ACCESS),    # V_a^alias
    _mk(Actor.ATTACKER, Tag.D, Kind.ACCESS),      # A_d
    _mk(Actor.VICTIM, Tag.D, Kind.ACCESS),        # V_d
    _mk(Actor.ATTACKER, Tag.WHOLE, Kind.INVALIDATE),  # A^inv
    _mk(Actor.VICTIM, Tag.WHOLE, Kind.INVALIDATE),    # V^inv
    _mk(Actor.ATTACKER, Tag.A, Kind.INVALIDATE),      # A_a^inv
    _mk(Actor.VICTIM, Tag.A, Kind.INVALIDATE),        # V_a^inv
    _mk(Actor.ATTACKER, Tag.ALIAS, Kind.INVALIDATE),  # A_a^alias^inv
    _mk(Actor.VICTIM, Tag.ALIAS, Kind.INVALIDATE),    # V_a^alias^inv
    _mk(Actor.ATTACKER, Tag.D, Kind.INVALIDATE),      # A_d^inv
    _mk(Actor.VICTIM, Tag.D, Kind.INVALIDATE),        # V_d^inv
    STAR,
)

assert len(ALL_STATES) == 17

_TAG_TEXT = {
    Tag.A: "a",
    Tag.ALIAS: "a_alias",
    Tag.D: "d",
    Tag.U: "u",
}


def format_state(s: StepState) -> str:
    if s.is_star:
        return "star"
    if s.tag is Tag.WHOLE:
        return f"{s.actor.value}^inv"
    base = f"{s.actor.value}_{_TAG_TEXT[s.tag]}"
    if s.kind is Kind.INVALIDATE:
        base += "^inv"
    return base


_STATE_BY_TEXT = {format_state(s): s for s in ALL_STATES}
# Accept the caret-alias spelling and the bare asterisk too.
_STATE_BY_TEXT.update(
    {format_state(s).replace("a_alias", "a^alias"): s for s in ALL_STATES}
)
_STATE_BY_TEXT["*"] = STAR


class PatternParseError(ValueError):
    pass


def parse_state(text: str) -> StepState:
    s = _STATE_BY_TEXT.get(text.strip())
    if s is None:
        raise PatternParseError(f"unknown state token: {text.strip()!r}")
    return s


Pattern = tuple[StepState, StepState, StepState]


def format_pattern(p: Pattern) -> str:
    return " ~> ".join(format_state(s) for s in p)


def parse_pattern(text: str) -> Pattern:
    parts = text.split("~>")
    if len(parts) != 3:
        raise PatternParseError(
            f"expected three '~>'-separated steps, got {len(parts)}"
        )
    s1, s2, s3 = (parse_state(t) for t in parts)
    return (s1, s2, s3)


def enumerate_patterns() -> list[Pattern]:
    """All 4913 ordered triples, lexicographic in the fixed state order."""
    return list(itertools.product(ALL_STATES, repeat=3))


class Candidate(enum.Enum):
    """The three values the secret u is tested against."""

    A = "A"
    ALIAS = "ALIAS"
    NIB = "NIB"


# Concrete per-candidate tag used when substituting u.  NIB gets its own
# marker tag handled by the simulator as "a different, non-conflicting set".
class ConcreteTag(enum.Enum):
    A = "a"
    ALIAS = "a_alias"
    D = "d"
    NIB = "nib"
    WHOLE = "whole"


_CAND_TAG = {
    Candidate.A: ConcreteTag.A,
    Candidate.ALIAS: ConcreteTag.ALIAS,
    Candidate.NIB: ConcreteTag.NIB,
}

_PLAIN_TAG = {
    Tag.A: ConcreteTag.A,
    Tag.ALIAS: ConcreteTag.ALIAS,
    Tag.D: ConcreteTag.D,
    Tag.WHOLE: ConcreteTag.WHOLE,
}


@dataclass(frozen=True)
class ConcreteStep:
    """A step with u resolved; what the simulator executes."""

    actor: Actor | None
    tag: ConcreteTag | None
    kind: Kind | None
    from_u: bool = False   # step came from a u substitution

    @property
    def is_star(self) -> bool:
        return self.actor is None


def substitute_candidate(p: Pattern, c: Candidate) -> tuple[ConcreteStep, ...]:
    """Replace every u step by the candidate's concrete address.

    Patterns without u return unchanged (flagged by has_secret()).
    """
    out = []
    for s in p:
        if s.is_star:
            out.append(ConcreteStep(None, None, None))
        elif s.tag is Tag.U:
            out.append(ConcreteStep(s.actor, _CAND_TAG[c], s.kind, from_u=True))
        else:
            out.append(ConcreteStep(s.actor, _PLAIN_TAG[s.tag], s.kind))
    return tuple(out)


def has_secret(p: Pattern) -> bool:
    return any((not s.is_star) and s.tag is Tag.U for s in p)


def actors_of(p: Pattern) -> frozenset[Actor]:
    return frozenset(s.actor for s in p if not s.is_star)
