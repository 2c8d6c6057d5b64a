import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sonify.score import (
    ChordSequence,
    Note,
    ScoreSpec,
    assign_notes,
    chord_at,
    chord_index_series,
    format_note,
    parse_chord,
    parse_note,
    shifted_frequency,
)


def brute_bins(x, n):
    """Reference binner: numpy's linear percentiles, ties to the lower bin."""
    x = np.asarray(x, dtype=float)
    edges = [np.percentile(x, 100 * k / n) for k in range(1, n)]
    out = []
    for v in x:
        if v == x.max():
            out.append(n - 1)
            continue
        out.append(sum(1 for e in edges if v > e))
    return np.array(out)


@pytest.mark.parametrize("name,hz", [("A4", 440.0), ("A2", 110.0), ("A0", 27.5), ("A-1", 13.75)])
def test_a_notes_are_exact(name, hz):
    assert parse_note(name).frequency == hz


def test_middle_c():
    assert parse_note("C4").midi == 60
    assert parse_note("C4").frequency == pytest.approx(261.6255653005986, rel=1e-12)


@pytest.mark.parametrize("a,b", [("C#4", "Db4"), ("D♭3", "Db3"), ("F♯2", "F#2"), ("Cb4", "B3"),
                                 ("B#3", "C4"), ("E#4", "F4"), ("db3", "Db3")])
def test_enharmonic_spellings(a, b):
    assert parse_note(a) == parse_note(b)


def test_canonical_spelling_uses_flats():
    assert format_note(parse_note("C#4")) == "Db4"
    assert [parse_note(f"{x}3").name for x in ("C#", "D#", "F#", "G#", "A#")] == \
        ["Db3", "Eb3", "Gb3", "Ab3", "Bb3"]


@pytest.mark.parametrize("bad", ["H4", "A", "A10", "A-2", "Abb4", "4A", "", "A4.5", "A 4"])
def test_malformed_names(bad):
    with pytest.raises(ValueError):
        parse_note(bad)


@given(st.integers(min_value=0, max_value=131))
def test_format_parse_roundtrip(midi):
    n = Note(midi)
    assert parse_note(n.name) == n


@given(st.integers(min_value=1, max_value=130))
def test_semitone_ratio(midi):
    lo, hi = Note(midi - 1), Note(midi)
    assert hi.frequency / lo.frequency == pytest.approx(2 ** (1 / 12), rel=1e-12)


def test_chord_parsing_sorts_by_pitch():
    chord = parse_chord("F4, Db3,Eb4,Gb3,Ab3")
    assert [n.name for n in chord] == ["Db3", "Gb3", "Ab3", "Eb4", "F4"]
    assert parse_chord(["A4", "C4"]) == (parse_note("C4"), parse_note("A4"))
    with pytest.raises(ValueError):
        parse_chord(" , ")


def test_chord_sequence_and_score():
    seq = ChordSequence.parse([["C3", "E3", "G3"], "F3,A3"])
    assert len(seq) == 2 and seq.max_size == 3
    assert ChordSequence.parse("A4").chords == ((parse_note("A4"),),)
    with pytest.raises(ValueError):
        ScoreSpec(seq, 0.0)
    with pytest.raises(ValueError):
        ScoreSpec(seq, math.inf)


def test_chord_timeline_equal_segments():
    score = ScoreSpec.from_chords(["C3", "D3", "E3", "F3"], 8.0)
    assert [chord_at(score, t) for t in (0, 0.24, 0.25, 0.5, 0.99, 1.0, 1.5, -0.1)] == \
        [0, 0, 1, 2, 3, 3, 3, 0]
    t = np.linspace(0, 1, 101)
    assert np.array_equal(chord_index_series(score, t), [chord_at(score, v) for v in t])


def test_assign_notes_uniform_occupancy():
    x = np.random.default_rng(1).uniform(size=2500)
    counts = np.bincount(assign_notes(x, 5), minlength=5)
    assert np.all(np.abs(counts - 500) <= 1)


def test_assign_notes_monotone_and_edges():
    x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    # edges at 1.333 and 2.667
    assert list(assign_notes(x, 3)) == [0, 0, 1, 2, 2]
    # value equal to an edge goes to the lower bin: edge at percentile 50 of 0..4 is 2
    assert list(assign_notes(x, 2)) == [0, 0, 0, 1, 1]


def test_assign_notes_constant_input_goes_to_top():
    assert list(assign_notes([3.0, 3.0, 3.0], 4)) == [3, 3, 3]


def test_assign_notes_single_note_and_errors():
    assert list(assign_notes([5, 1, 2], 1)) == [0, 0, 0]
    with pytest.raises(ValueError):
        assign_notes([], 3)
    with pytest.raises(ValueError):
        assign_notes([1.0], 0)


def test_assign_notes_exhaustive_small():
    # every array of length <= 6 over a 3-level alphabet, n <= 4
    for length in range(1, 7):
        for vals in itertools.product((0.0, 0.5, 2.0), repeat=length):
            for n in range(1, 5):
                assert np.array_equal(assign_notes(vals, n), brute_bins(vals, n)), (vals, n)


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=40),
       st.integers(1, 8))
def test_assign_notes_is_monotone(values, n):
    x = np.array(values)
    idx = assign_notes(x, n)
    order = np.argsort(x, kind="stable")
    assert np.all(np.diff(idx[order]) >= 0)
    assert idx.min() >= 0 and idx.max() <= n - 1
    assert idx[np.argmax(x)] == n - 1


def test_shifted_frequency():
    assert shifted_frequency(440.0, 12) == 880.0
    assert shifted_frequency(440.0, -12) == 220.0
    np.testing.assert_allclose(shifted_frequency(100.0, [0, 7, 24]),
                               [100.0, 100 * 2 ** (7 / 12), 400.0], rtol=1e-14)
    with pytest.raises(ValueError):
        shifted_frequency(0.0, 1)
