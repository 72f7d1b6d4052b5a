"""Parsing, formatting, and enumeration of three-step pattern states."""

import pytest
from hypothesis import given, strategies as st

from ctbench.states import (
    ALL_STATES,
    Actor,
    Candidate,
    Kind,
    PatternParseError,
    Tag,
    enumerate_patterns,
    format_pattern,
    format_state,
    has_secret,
    parse_pattern,
    parse_state,
    substitute_candidate,
)


def test_state_count():
    assert len(ALL_STATES) == 17
    assert len(set(ALL_STATES)) == 17


def test_pattern_space_size():
    assert sum(1 for _ in enumerate_patterns()) == 17 ** 3


def test_parse_known_spellings():
    s = parse_state("A_a^inv")
    assert s.actor is Actor.ATTACKER
    assert s.tag is Tag.A
    assert s.kind is Kind.INVALIDATE

    assert parse_state("V_u").tag is Tag.U
    assert parse_state("star").is_star
    assert parse_state("*").is_star
    # both the caret and underscore alias spellings are accepted
    assert parse_state("A_a^alias") == parse_state("A_a_alias")


def test_whole_cache_states():
    s = parse_state("A^inv")
    assert s.tag is Tag.WHOLE
    assert s.kind is Kind.INVALIDATE
    assert format_state(s) == "A^inv"


def test_secret_never_attacker():
    with pytest.raises(PatternParseError):
        parse_state("A_u")
    with pytest.raises(PatternParseError):
        parse_state("A_u^inv")


def test_parse_pattern_arity():
    with pytest.raises(PatternParseError):
        parse_pattern("A_a ~> V_u")
    with pytest.raises(PatternParseError):
        parse_pattern("A_a ~> V_u ~> A_a ~> V_a")
    with pytest.raises(PatternParseError):
        parse_pattern("A_a ~> V_q ~> A_a")


@given(st.tuples(*(st.sampled_from(ALL_STATES),) * 3))
def test_format_parse_round_trip(p):
    assert parse_pattern(format_pattern(p)) == p


@given(st.sampled_from(ALL_STATES))
def test_state_round_trip(s):
    assert parse_state(format_state(s)) == s


def test_substitute_candidates():
    p = parse_pattern("A_a ~> V_u ~> A_a")
    for cand in Candidate:
        q = substitute_candidate(p, cand)
        assert q[1].from_u
        assert not q[0].from_u and not q[2].from_u
    nib = substitute_candidate(p, Candidate.NIB)
    assert nib[1].tag.name == "NIB"


def test_has_secret():
    assert has_secret(parse_pattern("A_a ~> V_u ~> A_a"))
    assert has_secret(parse_pattern("V_u^inv ~> A_a ~> V_a"))
    assert not has_secret(parse_pattern("A_a ~> V_a ~> A_d"))
