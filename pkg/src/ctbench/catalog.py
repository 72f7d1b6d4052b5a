"""Embedded golden catalog of the 88 Strong vulnerability types.

This is reference data the derivation is verified against, not an input to
it: derive_catalog() recomputes everything from the simulator and diffs the
result against this table.  Each row: number, the three steps, interference
(I/E), basis (A/S/SA), strategy-group name, and whether the type was first
reported alongside the coherence-invalidation extension of the model.
"""

from __future__ import annotations

from dataclasses import dataclass

from .states import Pattern, format_pattern, parse_pattern

CATALOG_VERSION = 1

# number, steps, I/E, basis, strategy, new-with-coherence-extension
_ROWS = [
    (1, "A^inv ~> V_u ~> V_a", "I", "A", "Cache Collision", False),
    (2, "V^inv ~> V_u ~> V_a", "I", "A", "Cache Collision", False),
    (3, "A_a^inv ~> V_u ~> V_a", "I", "A", "Cache Collision", False),
    (4, "V_a^inv ~> V_u ~> V_a", "I", "A", "Cache Collision", False),
    (5, "A_a^inv ~> V_u ~> A_a", "E", "A", "Flush + Reload", False),
    (6, "V_a^inv ~> V_u ~> A_a", "E", "A", "Flush + Reload", False),
    (7, "A^inv ~> V_u ~> A_a", "E", "A", "Flush + Reload", False),
    (8, "V^inv ~> V_u ~> A_a", "E", "A", "Flush + Reload", False),
    (9, "V_u^inv ~> A_a ~> V_u", "E", "A", "Reload + Time", False),
    (10, "V_u^inv ~> V_a ~> V_u", "I", "A", "Reload + Time", False),
    (11, "A_a ~> V_u^inv ~> A_a", "E", "A", "Flush + Probe", False),
    (12, "A_a ~> V_u^inv ~> V_a", "I", "A", "Flush + Probe", False),
    (13, "V_a ~> V_u^inv ~> A_a", "E", "A", "Flush + Probe", False),
    (14, "V_a ~> V_u^inv ~> V_a", "I", "A", "Flush + Probe", False),
    (15, "V_u ~> A_a^inv ~> V_u", "E", "A", "Flush + Time", False),
    (16, "V_u ~> V_a^inv ~> V_u", "I", "A", "Flush + Time", False),
    (17, "A^inv ~> V_u^inv ~> A_a", "E", "A", "Cache Coherence Flush + Reload", True),
    (18, "A^inv ~> V_u^inv ~> V_a", "I", "A", "Cache Coherence Flush + Reload", True),
    (19, "V^inv ~> V_u^inv ~> A_a", "E", "A", "Cache Coherence Flush + Reload", True),
    (20, "V^inv ~> V_u^inv ~> V_a", "I", "A", "Cache Coherence Flush + Reload", True),
    (21, "A_a^inv ~> V_u^inv ~> A_a", "E", "SA", "Cache Coherence Prime + Probe", True),
    (22, "A_a^inv ~> V_u^inv ~> V_a", "I", "SA", "Cache Coherence Prime + Probe", True),
    (23, "V_a^inv ~> V_u^inv ~> A_a", "E", "SA", "Cache Coherence Prime + Probe", True),
    (24, "V_a^inv ~> V_u^inv ~> V_a", "I", "SA", "Cache Coherence Prime + Probe", True),
    (25, "A_d^inv ~> V_u^inv ~> A_d", "E", "S", "Cache Coherence Prime + Probe", True),
    (26, "A_d^inv ~> V_u^inv ~> V_d", "I", "S", "Cache Coherence Prime + Probe", True),
    (27, "V_d^inv ~> V_u^inv ~> A_d", "E", "S", "Cache Coherence Prime + Probe", True),
    (28, "V_d^inv ~> V_u^inv ~> V_d", "I", "S", "Cache Coherence Prime + Probe", True),
    (29, "V_u^inv ~> A_a^inv ~> V_u", "E", "SA", "Cache Coherence Evict + Time", True),
    (30, "V_u^inv ~> V_a^inv ~> V_u", "I", "SA", "Cache Coherence Evict + Time", True),
    (31, "V_u^inv ~> A_d^inv ~> V_u", "E", "S", "Cache Coherence Evict + Time", True),
    (32, "V_u^inv ~> V_d^inv ~> V_u", "I", "S", "Cache Coherence Evict + Time", True),
    (33, "V_u ~> V_a ~> V_u", "I", "SA", "Bernstein's Attack", False),
    (34, "V_u ~> V_d ~> V_u", "I", "S", "Bernstein's Attack", False),
    (35, "V_d ~> V_u ~> V_d", "I", "S", "Bernstein's Attack", False),
    (36, "V_a ~> V_u ~> V_a", "I", "SA", "Bernstein's Attack", False),
    (37, "V_d ~> V_u ~> A_d", "E", "S", "Evict + Probe", False),
    (38, "V_a ~> V_u ~> A_a", "E", "SA", "Evict + Probe", False),
    (39, "A_d ~> V_u ~> V_d", "I", "S", "Prime + Time", False),
    (40, "A_a ~> V_u ~> V_a", "I", "SA", "Prime + Time", False),
    (41, "V_u ~> A_d ~> V_u", "E", "S", "Evict + Time", False),
    (42, "V_u ~> A_a ~> V_u", "E", "SA", "Evict + Time", False),
    (43, "A_d ~> V_u ~> A_d", "E", "S", "Prime + Probe", False),
    (44, "A_a ~> V_u ~> A_a", "E", "SA", "Prime + Probe", False),
    (45, "A^inv ~> V_u ~> V_a^inv", "I", "A", "Cache Collision Inv.", False),
    (46, "V^inv ~> V_u ~> V_a^inv", "I", "A", "Cache Collision Inv.", False),
    (47, "A_a^inv ~> V_u ~> V_a^inv", "I", "A", "Flush + Flush", False),
    (48, "V_a^inv ~> V_u ~> V_a^inv", "I", "A", "Flush + Flush", False),
    (49, "A_a^inv ~> V_u ~> A_a^inv", "E", "A", "Flush + Flush", False),
    (50, "V_a^inv ~> V_u ~> A_a^inv", "E", "A", "Flush + Flush", False),
    (51, "A^inv ~> V_u ~> A_a^inv", "E", "A", "Flush + Reload Inv.", False),
    (52, "V^inv ~> V_u ~> A_a^inv", "E", "A", "Flush + Reload Inv.", False),
    (53, "V_u^inv ~> A_a ~> V_u^inv", "E", "A", "Reload + Time Inv.", False),
    (54, "V_u^inv ~> V_a ~> V_u^inv", "I", "A", "Reload + Time Inv.", False),
    (55, "A_a ~> V_u^inv ~> A_a^inv", "E", "A", "Flush + Probe Inv.", False),
    (56, "A_a ~> V_u^inv ~> V_a^inv", "I", "A", "Flush + Probe Inv.", False),
    (57, "V_a ~> V_u^inv ~> A_a^inv", "E", "A", "Flush + Probe Inv.", False),
    (58, "V_a ~> V_u^inv ~> V_a^inv", "I", "A", "Flush + Probe Inv.", False),
    (59, "V_u ~> A_a^inv ~> V_u^inv", "E", "A", "Flush + Time Inv.", False),
    (60, "V_u ~> V_a^inv ~> V_u^inv", "I", "A", "Flush + Time Inv.", False),
    (61, "A^inv ~> V_u^inv ~> A_a^inv", "E", "A", "Cache Coherence Flush + Reload Inv.", True),
    (62, "A^inv ~> V_u^inv ~> V_a^inv", "I", "A", "Cache Coherence Flush + Reload Inv.", True),
    (63, "V^inv ~> V_u^inv ~> A_a^inv", "E", "A", "Cache Coherence Flush + Reload Inv.", True),
    (64, "V^inv ~> V_u^inv ~> V_a^inv", "I", "A", "Cache Coherence Flush + Reload Inv.", True),
    (65, "A_a^inv ~> V_u^inv ~> A_a^inv", "E", "SA", "Cache Coherence Prime + Probe Inv.", True),
    (66, "A_a^inv ~> V_u^inv ~> V_a^inv", "I", "SA", "Cache Coherence Prime + Probe Inv.", True),
    (67, "V_a^inv ~> V_u^inv ~> A_a^inv", "E", "SA", "Cache Coherence Prime + Probe Inv.", True),
    (68, "V_a^inv ~> V_u^inv ~> V_a^inv", "I", "SA", "Cache Coherence Prime + Probe Inv.", True),
    (69, "A_d^inv ~> V_u^inv ~> A_d^inv", "E", "S", "Cache Coherence Prime + Probe Inv.", True),
    (70, "A_d^inv ~> V_u^inv ~> V_d^inv", "I", "S", "Cache Coherence Prime + Probe Inv.", True),
    (71, "V_d^inv ~> V_u^inv ~> A_d^inv", "E", "S", "Cache Coherence Prime + Probe Inv.", True),
    (72, "V_d^inv ~> V_u^inv ~> V_d^inv", "I", "S", "Cache Coherence Prime + Probe Inv.", True),
    (73, "V_u^inv ~> A_a^inv ~> V_u^inv", "E", "SA", "Cache Coherence Evict + Time Inv.", True),
    (74, "V_u^inv ~> V_a^inv ~> V_u^inv", "I", "SA", "Cache Coherence Evict + Time Inv.", True),
    (75, "V_u^inv ~> A_d^inv ~> V_u^inv", "E", "S", "Cache Coherence Evict + Time Inv.", True),
    (76, "V_u^inv ~> V_d^inv ~> V_u^inv", "I", "S", "Cache Coherence Evict + Time Inv.", True),
    (77, "V_u ~> V_a ~> V_u^inv", "I", "SA", "Bernstein's Inv. Attack", False),
    (78, "V_u ~> V_d ~> V_u^inv", "I", "S", "Bernstein's Inv. Attack", False),
    (79, "V_d ~> V_u ~> V_d^inv", "I", "S", "Bernstein's Inv. Attack", False),
    (80, "V_a ~> V_u ~> V_a^inv", "I", "SA", "Bernstein's Inv. Attack", False),
    (81, "V_d ~> V_u ~> A_d^inv", "E", "S", "Evict + Probe Inv.", False),
    (82, "V_a ~> V_u ~> A_a^inv", "E", "SA", "Evict + Probe Inv.", False),
    (83, "A_d ~> V_u ~> V_d^inv", "I", "S", "Prime + Time Inv.", False),
    (84, "A_a ~> V_u ~> V_a^inv", "I", "SA", "Prime + Time Inv.", False),
    (85, "V_u ~> A_d ~> V_u^inv", "E", "S", "Evict + Time Inv.", False),
    (86, "V_u ~> A_a ~> V_u^inv", "E", "SA", "Evict + Time Inv.", False),
    (87, "A_d ~> V_u ~> A_d^inv", "E", "S", "Prime + Probe Inv.", False),
    (88, "A_a ~> V_u ~> A_a^inv", "E", "SA", "Prime + Probe Inv.", False),
]


@dataclass(frozen=True)
class VulnerabilityRecord:
    number: int
    pattern: Pattern
    interference: str  # "I" or "E"
    basis: str         # "A", "S" or "SA"
    strategy: str
    new_type: bool

    @property
    def category(self) -> str:
        return f"{self.interference}-{self.basis}"

    def line(self) -> str:
        return (
            f"{self.number}\t{format_pattern(self.pattern)}\t"
            f"{self.category}\t{self.strategy}"
        )


GOLDEN: tuple[VulnerabilityRecord, ...] = tuple(
    VulnerabilityRecord(n, parse_pattern(steps), i, b, strat, new)
    for n, steps, i, b, strat, new in _ROWS
)

CATEGORY_DENOMINATORS = {
    "I-A": 20,
    "I-S": 12,
    "I-SA": 12,
    "E-A": 20,
    "E-S": 12,
    "E-SA": 12,
}


def golden_by_pattern() -> dict[Pattern, VulnerabilityRecord]:
    return {r.pattern: r for r in GOLDEN}


def export_text() -> str:
    """Versioned plain-text catalog, one record per line."""
    lines = [f"# strong vulnerability catalog v{CATALOG_VERSION}"]
    lines += [r.line() for r in GOLDEN]
    return "\n".join(lines) + "\n"
