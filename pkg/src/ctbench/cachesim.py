"""Deterministic one-set cache simulator over two cores and three levels.

Tracks a single cache set (plus a mirror set for non-conflicting NIB
addresses) as five frames: local/remote L1, local/remote L2, one shared L3.
Lines carry a dirty bit; the L3 entry also records which cores the line is
cached for, which realizes the local-L3 / remote-L3 / shared-L3 distinction
without modeling slices.

Transition rules (write-back, invalidate-on-write coherence):
  - read: L1 hit is silent; an L2/L3 hit promotes (local promotion keeps the
    dirty bit); reading another core's dirty line writes it back and demotes
    it to clean-in-both (the remote copy stays at its level); a miss cold
    fills L1 and any free lower frames of the acting core.
  - write: invalidates every other copy (other core and L3), then installs
    the line dirty in the acting core's L1.
  - flush line: removes the address from all frames.
  - flush all: empties every frame of both sets.
Displaced occupants spill L1 -> L2 -> L3 -> memory with dirtiness preserved,
and a spilled line wins the frame over a stale lower-level copy of the
incoming line (the copies merge).
"""

from __future__ import annotations

import enum
from typing import NamedTuple, Optional

from .states import ConcreteTag


class Core(enum.Enum):
    LOCAL = "local"
    REMOTE = "remote"

    def other(self) -> "Core":
        return Core.REMOTE if self is Core.LOCAL else Core.LOCAL


class Op(enum.Enum):
    READ = "read"
    WRITE = "write"
    FLUSH_LINE = "flush"
    FLUSH_ALL = "flush_all"


class Entry(NamedTuple):
    addr: ConcreteTag
    dirty: bool


class L3Entry(NamedTuple):
    addr: ConcreteTag
    dirty: bool
    sides: frozenset  # cores this line counts as cached for


class SetFrames(NamedTuple):
    l1_local: Optional[Entry]
    l1_remote: Optional[Entry]
    l2_local: Optional[Entry]
    l2_remote: Optional[Entry]
    l3: Optional[L3Entry]

    def l1(self, core: Core) -> Optional[Entry]:
        return self.l1_local if core is Core.LOCAL else self.l1_remote

    def l2(self, core: Core) -> Optional[Entry]:
        return self.l2_local if core is Core.LOCAL else self.l2_remote

    def with_l1(self, core: Core, e: Optional[Entry]) -> "SetFrames":
        if core is Core.LOCAL:
            return self._replace(l1_local=e)
        return self._replace(l1_remote=e)

    def with_l2(self, core: Core, e: Optional[Entry]) -> "SetFrames":
        if core is Core.LOCAL:
            return self._replace(l2_local=e)
        return self._replace(l2_remote=e)


EMPTY_SET = SetFrames(None, None, None, None, None)


class World(NamedTuple):
    target: SetFrames
    mirror: SetFrames  # the set NIB addresses map to


EMPTY_WORLD = World(EMPTY_SET, EMPTY_SET)


def _is_nib(addr: ConcreteTag) -> bool:
    return addr is ConcreteTag.NIB


def _spill_l2(s: SetFrames, core: Core, entry: Entry) -> SetFrames:
    """Place a line displaced from L1 into L2, spilling onward as needed."""
    cur = s.l2(core)
    if cur is not None and cur.addr is entry.addr:
        # merge with a stale copy of the same line
        return s.with_l2(core, Entry(entry.addr, entry.dirty or cur.dirty))
    if cur is not None:
        s = _spill_l3(s, core, cur)
    return s.with_l2(core, entry)


def _spill_l3(s: SetFrames, core: Core, entry: Entry) -> SetFrames:
    cur = s.l3
    if cur is not None and cur.addr is entry.addr:
        if entry.dirty:
            return s._replace(l3=L3Entry(entry.addr, True, frozenset((core,))))
        return s._replace(l3=cur._replace(sides=cur.sides | {core}))
    # displaced L3 occupant goes to memory (write-back is implicit)
    return s._replace(l3=L3Entry(entry.addr, entry.dirty, frozenset((core,))))


def _install_l1(s: SetFrames, core: Core, entry: Entry) -> SetFrames:
    cur = s.l1(core)
    if cur is not None and cur.addr is not entry.addr:
        s = _spill_l2(s, core, cur)
    return s.with_l1(core, entry)


def _read_set(s: SetFrames, addr: ConcreteTag, core: Core) -> SetFrames:
    other = core.other()
    e1 = s.l1(core)
    if e1 is not None and e1.addr is addr:
        return s
    e2 = s.l2(core)
    if e2 is not None and e2.addr is addr:
        s = s.with_l2(core, None)
        return _install_l1(s, core, e2)
    e3 = s.l3
    if e3 is not None and e3.addr is addr:
        if e3.dirty and core not in e3.sides:
            # remote dirty L3: write back, share clean
            s = s._replace(l3=L3Entry(addr, False, e3.sides | {core}))
            return _install_l1(s, core, Entry(addr, False))
        if e3.dirty:
            # local dirty L3 promotes wholesale
            s = s._replace(l3=None)
            return _install_l1(s, core, Entry(addr, True))
        s = s._replace(l3=e3._replace(sides=e3.sides | {core}))
        return _install_l1(s, core, Entry(addr, False))
    r1 = s.l1(other)
    if r1 is not None and r1.addr is addr:
        if r1.dirty:
            s = s.with_l1(other, Entry(addr, False))  # write back, demote
        return _install_l1(s, core, Entry(addr, False))
    r2 = s.l2(other)
    if r2 is not None and r2.addr is addr:
        if r2.dirty:
            s = s.with_l2(other, Entry(addr, False))
        return _install_l1(s, core, Entry(addr, False))
    # miss to memory: cold fill into L1 and any free lower frames
    s = _install_l1(s, core, Entry(addr, False))
    if s.l2(core) is None:
        s = s.with_l2(core, Entry(addr, False))
    if s.l3 is None:
        s = s._replace(l3=L3Entry(addr, False, frozenset((core,))))
    return s


def _write_set(s: SetFrames, addr: ConcreteTag, core: Core) -> SetFrames:
    other = core.other()
    # coherence: invalidate every copy outside the acting core's L1/L2
    r1 = s.l1(other)
    if r1 is not None and r1.addr is addr:
        s = s.with_l1(other, None)
    r2 = s.l2(other)
    if r2 is not None and r2.addr is addr:
        s = s.with_l2(other, None)
    if s.l3 is not None and s.l3.addr is addr:
        s = s._replace(l3=None)
    e1 = s.l1(core)
    if e1 is not None and e1.addr is addr:
        return s.with_l1(core, Entry(addr, True))
    e2 = s.l2(core)
    if e2 is not None and e2.addr is addr:
        s = s.with_l2(core, None)
        return _install_l1(s, core, Entry(addr, True))
    return _install_l1(s, core, Entry(addr, True))


def _flush_set(s: SetFrames, addr: ConcreteTag) -> SetFrames:
    for core in Core:
        e1 = s.l1(core)
        if e1 is not None and e1.addr is addr:
            s = s.with_l1(core, None)
        e2 = s.l2(core)
        if e2 is not None and e2.addr is addr:
            s = s.with_l2(core, None)
    if s.l3 is not None and s.l3.addr is addr:
        s = s._replace(l3=None)
    return s


def apply_op(w: World, op: Op, addr: Optional[ConcreteTag], core: Core) -> World:
    """Total transition function; FlushAll ignores addr."""
    if op is Op.FLUSH_ALL:
        return EMPTY_WORLD
    if _is_nib(addr):
        s = w.mirror
        if op is Op.READ:
            s = _read_set(s, addr, core)
        elif op is Op.WRITE:
            s = _write_set(s, addr, core)
        else:
            s = _flush_set(s, addr)
        return w._replace(mirror=s)
    s = w.target
    if op is Op.READ:
        s = _read_set(s, addr, core)
    elif op is Op.WRITE:
        s = _write_set(s, addr, core)
    else:
        s = _flush_set(s, addr)
    return w._replace(target=s)


# ---------------------------------------------------------------------------
# observation: movement types 1..22 and timing classes 1..66

_OP_INDEX = {Op.READ: 0, Op.WRITE: 1, Op.FLUSH_LINE: 2}


def _side_level(s: SetFrames, addr: ConcreteTag, core: Core) -> Optional[int]:
    e1 = s.l1(core)
    if e1 is not None and e1.addr is addr:
        return 1
    e2 = s.l2(core)
    if e2 is not None and e2.addr is addr:
        return 2
    if s.l3 is not None and s.l3.addr is addr and core in s.l3.sides:
        return 3
    return None


def _line_dirty(s: SetFrames, addr: ConcreteTag) -> bool:
    for e in (s.l1_local, s.l1_remote, s.l2_local, s.l2_remote):
        if e is not None and e.addr is addr and e.dirty:
            return True
    return s.l3 is not None and s.l3.addr is addr and s.l3.dirty


def movement_type(w: World, addr: ConcreteTag, observer: Core) -> int:
    """Where the data comes from, as the Fig.-2-style 1..22 numbering."""
    s = w.mirror if _is_nib(addr) else w.target
    near = _side_level(s, addr, observer)
    far = _side_level(s, addr, observer.other())
    dirty = _line_dirty(s, addr)
    if near is not None and far is not None:
        assert not dirty, "a dirty line cannot be cached by both cores"
        return 13 + (near - 1) * 3 + far
    if near is not None:
        return near + 6 if dirty else near
    if far is not None:
        return far + 9 if dirty else far + 3
    return 13


def observe(w: World, op: Op, addr: ConcreteTag, observer: Core = Core.LOCAL) -> int:
    """Timing class (1..66) of performing op on addr in world w."""
    if op is Op.FLUSH_ALL:
        raise ValueError("whole-cache invalidation is not a timed observation")
    return 22 * _OP_INDEX[op] + movement_type(w, addr, observer)


# ---------------------------------------------------------------------------
# star-state initial worlds

def _single(l1_entry: Entry) -> World:
    return World(EMPTY_SET._replace(l1_local=l1_entry), EMPTY_SET)


def initial_worlds(star_context: bool) -> tuple[World, ...]:
    """Start worlds; the star context covers "anything may be cached"."""
    if not star_context:
        return (EMPTY_WORLD,)
    return (
        EMPTY_WORLD,
        _single(Entry(ConcreteTag.A, False)),
        _single(Entry(ConcreteTag.A, True)),
        _single(Entry(ConcreteTag.D, False)),
    )


# transitions a star step may stand for, applied on the observer core
STAR_TRANSITIONS: tuple[tuple[Op, Optional[ConcreteTag]], ...] = (
    (None, None),  # nothing happens
    (Op.READ, ConcreteTag.A),
    (Op.WRITE, ConcreteTag.A),
    (Op.READ, ConcreteTag.D),
    (Op.FLUSH_LINE, ConcreteTag.A),
)


def star_successors(w: World) -> tuple[World, ...]:
    out = []
    for op, addr in STAR_TRANSITIONS:
        if op is None:
            out.append(w)
        else:
            out.append(apply_op(w, op, addr, Core.LOCAL))
    return tuple(out)
