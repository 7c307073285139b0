import io

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from twostep.data_io import (
    BINARY,
    MULTILABEL,
    SparseDataset,
    SplitSpec,
    parse_libsvm,
    read_labels,
    serialize_libsvm,
    split,
    split_indices,
    write_results,
)
from twostep.errors import (
    EmptyPartition,
    InvalidParam,
    MalformedLine,
    NonFiniteValue,
    NonMonotoneIndex,
    ParseError,
    SchemaMismatch,
)


def parse(text, mode=BINARY):
    return parse_libsvm(io.StringIO(text), mode)


class TestParse:
    def test_binary_line(self):
        ds = parse("+1 1:0.5 3:2.0\n")
        np.testing.assert_array_equal(ds.indices[0], [1, 3])
        np.testing.assert_array_equal(ds.values[0], [0.5, 2.0])
        assert ds.labels == (1,)
        assert ds.dimension == 3

    def test_multilabel_line(self):
        assert parse("2,5 1:1.0\n", MULTILABEL).labels == (frozenset({2, 5}),)

    def test_empty_multilabel_field(self):
        ds = parse(" 1:1.0\n0 2:3\n \n", MULTILABEL)
        assert ds.labels == (frozenset(), frozenset({0}), frozenset())

    def test_nonmonotone(self):
        with pytest.raises(NonMonotoneIndex) as exc:
            parse("1 3:1 2:1\n")
        assert exc.value.lineno == 1

    def test_zero_label_maps_to_negative(self):
        assert parse("0 1:1\n1 1:2\n-1 1:3\n").labels == (-1, 1, -1)

    def test_blank_lines_and_crlf(self):
        ds = parse("+1 1:1\r\n\n   \n-1 2:2\r\n")
        assert len(ds) == 2

    def test_no_features(self):
        ds = parse("-1\n")
        assert ds.indices[0].size == 0 and ds.dimension == 0

    MALFORMED = [
        ("abc 1:2", MalformedLine),
        ("2 1:1", MalformedLine),
        ("1.5 1:1", MalformedLine),
        ("+1 1:x", MalformedLine),
        ("+1 0:1", MalformedLine),
        ("+1 -1:1", MalformedLine),
        ("+1 1", MalformedLine),
        ("+1 :1", MalformedLine),
        ("+1 a:1", MalformedLine),
        ("+1 1:nan", NonFiniteValue),
        ("+1 1:inf", NonFiniteValue),
        ("+1 2:1 2:3", NonMonotoneIndex),
        ("+1 5:1 1:3", NonMonotoneIndex),
        (" 1:1", MalformedLine),
    ]

    @pytest.mark.parametrize("line,error", MALFORMED)
    def test_malformed_corpus(self, line, error):
        with pytest.raises(error) as exc:
            parse(f"+1 1:1\n-1 2:1\n{line}\n")
        assert isinstance(exc.value, ParseError)
        assert exc.value.lineno == 3
        assert "line 3" in str(exc.value)

    @pytest.mark.parametrize("field", ["a", "1,,2", "1,-2", "1;2"])
    def test_malformed_multilabel(self, field):
        with pytest.raises(MalformedLine):
            parse(f"{field} 1:1\n", MULTILABEL)

    def test_bad_mode(self):
        with pytest.raises(InvalidParam):
            parse("+1 1:1\n", "ranking")


class TestMatrices:
    def test_to_csr(self):
        ds = parse("+1 1:0.5 3:2.0\n-1 2:1\n")
        np.testing.assert_array_equal(ds.to_csr().toarray(), [[0.5, 0, 2.0], [0, 1.0, 0]])
        np.testing.assert_array_equal(ds.to_csr(2).toarray(), [[0.5, 0], [0, 1.0]])
        assert ds.to_csr(5).shape == (2, 5)

    def test_label_matrix(self):
        ds = parse("0,2 1:1\n 1:1\n1 1:1\n", MULTILABEL)
        np.testing.assert_array_equal(ds.label_matrix(), [[1, -1, 1], [-1, -1, -1], [-1, 1, -1]])


rows = st.lists(
    st.tuples(
        st.sets(st.integers(1, 60), max_size=6),
        st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=6, max_size=6),
    ),
    max_size=15,
)


def _build(rows_, labels, mode):
    idx = tuple(np.array(sorted(s), dtype=np.int64) for s, _ in rows_)
    vals = tuple(np.array(v[: len(s)], dtype=float) for s, v in rows_)
    return SparseDataset(idx, vals, tuple(labels), mode)


def _same(a, b):
    assert a.labels == b.labels and a.mode == b.mode
    for x, y in zip(a.indices + a.values, b.indices + b.values):
        np.testing.assert_array_equal(x, y)


@settings(max_examples=100, deadline=None)
@given(rows=rows, data=st.data())
def test_round_trip_binary(rows, data):
    labels = data.draw(st.lists(st.sampled_from([-1, 1]), min_size=len(rows), max_size=len(rows)))
    ds = _build(rows, labels, BINARY)
    once = parse(serialize_libsvm(ds))
    _same(once, ds)
    _same(parse(serialize_libsvm(once)), once)


@settings(max_examples=100, deadline=None)
@given(rows=rows, data=st.data())
def test_round_trip_multilabel(rows, data):
    labels = data.draw(
        st.lists(st.frozensets(st.integers(0, 20), max_size=4), min_size=len(rows), max_size=len(rows))
    )
    ds = _build(rows, labels, MULTILABEL)
    _same(parse(serialize_libsvm(ds), MULTILABEL), ds)


class TestSplit:
    def test_two_thirds(self):
        assert SplitSpec(2 / 3, 1 / 3).sizes(6) == (4, 2, 0)

    def test_three_way(self):
        assert SplitSpec(0.5, 0.25).sizes(8) == (4, 2, 2)

    def test_deterministic(self):
        a = split_indices(50, SplitSpec(0.6, 0.2, seed=4))
        b = split_indices(50, SplitSpec(0.6, 0.2, seed=4))
        for x, y in zip(a, b):
            np.testing.assert_array_equal(x, y)

    @settings(max_examples=100, deadline=None)
    @given(n=st.integers(4, 300), t=st.floats(0.2, 0.6), v=st.floats(0.1, 0.35), seed=st.integers(0, 1000))
    def test_disjoint_and_covering(self, n, t, v, seed):
        spec = SplitSpec(t, v, seed)
        try:
            spec.sizes(n)
        except EmptyPartition:
            assume(False)
        parts = split_indices(n, spec)
        merged = np.concatenate(parts)
        np.testing.assert_array_equal(np.sort(merged), np.arange(n))

    def test_empty_partition(self):
        with pytest.raises(EmptyPartition):
            SplitSpec(0.5, 0.1).sizes(3)

    def test_bad_fractions(self):
        with pytest.raises(InvalidParam):
            SplitSpec(0.8, 0.3)
        with pytest.raises(InvalidParam):
            SplitSpec(-0.1, 0.3)

    def test_split_dataset(self):
        ds = parse("".join(f"{1 if i % 2 else -1} {i + 1}:1\n" for i in range(6)))
        tr, va, te = split(ds, SplitSpec(2 / 3, 1 / 3, seed=1))
        assert (len(tr), len(va), len(te)) == (4, 2, 0)
        seen = sorted(int(ix[0]) for part in (tr, va) for ix in part.indices)
        assert seen == [1, 2, 3, 4, 5, 6]


class TestWriteResults:
    def test_single_row(self):
        assert write_results([{"n": 100, "regret": 0.25}], ["n", "regret"]) == "n,regret\n100,0.25"

    def test_header_only(self):
        assert write_results([], ["n", "regret"]) == "n,regret"

    def test_seventeen_digits_round_trip(self):
        text = write_results([{"x": 1 / 3}], ["x"])
        assert float(text.splitlines()[1]) == 1 / 3

    def test_schema_mismatch(self):
        with pytest.raises(SchemaMismatch):
            write_results([{"n": 1}], ["n", "regret"])

    def test_quoting_and_bools(self):
        text = write_results([{"a": "x,y", "b": True, "c": None}], ["a", "b", "c"])
        assert text.splitlines()[1] == '"x,y",true,'

    @settings(max_examples=200, deadline=None)
    @given(x=st.floats(allow_nan=False, allow_infinity=False))
    def test_reals_round_trip(self, x):
        assert float(write_results([{"v": x}], ["v"]).splitlines()[1]) == x


def test_read_labels_maps_zero():
    np.testing.assert_array_equal(read_labels(io.StringIO("0\n1\n-1\n")), [[-1], [1], [-1]])
    with pytest.raises(InvalidParam):
        read_labels(io.StringIO("2\n"))
