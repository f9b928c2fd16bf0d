import io
import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairrank.data import (
    Dataset,
    DataFormatError,
    QueryInstance,
    SyntheticSpec,
    generate_synthetic,
    normalize_features,
    parse_letor,
    quantile_grades,
    write_letor,
)
from pairrank.evaluation import kendall_regret

FIXTURE = """\
2 qid:7 1:0.5 3:1.0 # first
0 qid:7 2:0.25
1 qid:9 1:1 2:2 3:3
"""

MSLR_ROWS = "\n".join(
    f"{g} qid:{q} " + " ".join(f"{k}:{v}" for k, v in enumerate(vals, start=1))
    for g, q, vals in [
        (0, 1, [3.0, 120.0, 0.0, 7.5]),
        (1, 1, [1.0, 80.0, 0.5, 2.0]),
        (4, 1, [9.0, 10.0, 1.0, 0.0]),
        (2, 1, [4.0, 55.0, 0.25, 1.5]),
        (3, 2, [0.0, 200.0, 0.75, 9.0]),
        (0, 2, [2.0, 35.0, 0.0, 4.0]),
        (1, 2, [7.0, 90.0, 0.5, 6.5]),
        (2, 3, [5.0, 0.0, 1.0, 3.0]),
        (1, 3, [6.0, 150.0, 0.25, 8.0]),
        (0, 3, [8.0, 60.0, 0.0, 0.5]),
    ]
)


def test_single_line():
    ds = parse_letor(b"2 qid:7 1:0.5 3:1.0")
    assert ds.dim == 3 and len(ds) == 1
    q = ds[0]
    assert q.query_id == "7" and q.grades.tolist() == [2]
    assert q.docs.tolist() == [[0.5, 0.0, 1.0]]


def test_empty_input():
    ds = parse_letor(b"")
    assert len(ds) == 0 and ds.dim == 0


def test_fixture_grouping(tmp_path):
    path = tmp_path / "f.txt"
    path.write_text(FIXTURE)
    for src in (path, str(path), io.StringIO(FIXTURE), FIXTURE.encode()):
        ds = parse_letor(src)
        assert [q.query_id for q in ds.queries] == ["7", "9"]
        assert [q.n_docs for q in ds.queries] == [2, 1]
        assert ds[0].docs[1].tolist() == [0.0, 0.25, 0.0]
        assert ds[1].docs[0].tolist() == [1.0, 2.0, 3.0]


def test_interleaved_qids_group_by_first_appearance():
    ds = parse_letor(b"1 qid:b 1:1\n0 qid:a 1:2\n2 qid:b 1:3\n")
    assert [q.query_id for q in ds.queries] == ["b", "a"]
    assert ds[0].grades.tolist() == [1, 2]


@pytest.mark.parametrize(
    "text,line",
    [
        ("x qid:1 1:1", 1),
        ("1 1:1", 1),
        ("1 qid:1 1:1\n1 qid:1 0:2", 2),
        ("1 qid:1 1:1\n\n1 qid:1 3:abc", 3),
        ("1 qid:1 7", 1),
        ("1.5 qid:1 1:1", 1),
    ],
)
def test_malformed_lines_report_line_number(text, line):
    with pytest.raises(DataFormatError, match=f"line {line}"):
        parse_letor(text.encode())


def test_roundtrip():
    ds = parse_letor(MSLR_ROWS.encode())
    buf = io.StringIO()
    write_letor(ds, buf)
    back = parse_letor(buf.getvalue().encode())
    assert [q.query_id for q in back.queries] == [q.query_id for q in ds.queries]
    for a, b in zip(ds.queries, back.queries):
        assert a.grades.tolist() == b.grades.tolist()
        assert np.allclose(a.docs, b.docs, atol=1e-12, rtol=0)


@settings(max_examples=50)
@given(
    st.lists(
        st.tuples(st.integers(0, 4), st.sampled_from(["1", "2", "q3"]), st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=1, max_size=5)),
        min_size=1,
        max_size=12,
    )
)
def test_roundtrip_property(rows):
    dim = max(len(v) for _, _, v in rows)
    text = "\n".join(f"{g} qid:{q} " + " ".join(f"{k + 1}:{x!r}" for k, x in enumerate(v)) for g, q, v in rows)
    ds = parse_letor(text.encode())
    buf = io.StringIO()
    write_letor(ds, buf)
    back = parse_letor(buf.getvalue().encode())
    assert back.dim == ds.dim == dim
    for a, b in zip(ds.queries, back.queries):
        assert np.array_equal(a.docs, b.docs) and np.array_equal(a.grades, b.grades)


def test_normalize_single_doc_and_two_docs():
    single = Dataset([QueryInstance("1", np.array([[3.0, -2.0]]), np.array([1]))], 2)
    assert normalize_features(single, 1.0)[0].docs.tolist() == [[0.0, 0.0]]
    two = Dataset([QueryInstance("1", np.array([[0.0], [2.0]]), np.array([0, 1]))], 1)
    assert normalize_features(two, 1.0)[0].docs.ravel().tolist() == [0.0, 1.0]


def test_normalize_mslr_fixture_norm_bound():
    ds = parse_letor(MSLR_ROWS.encode())
    for u in (1.0, 0.5, 3.0):
        out = normalize_features(ds, u)
        norms = np.concatenate([np.linalg.norm(q.docs, axis=1) for q in out.queries])
        assert norms.max() <= u + 1e-12
        assert len(norms) == 10


def test_normalize_uses_reference_statistics():
    train = Dataset([QueryInstance("a", np.array([[0.0, 0.0], [1.0, 4.0]]), np.array([0, 1]))], 2)
    test = Dataset([QueryInstance("b", np.array([[0.5, 2.0], [3.0, 8.0]]), np.array([0, 1]))], 2, "test")
    out = normalize_features(test, 1.0, reference=train)
    s = 1 / np.sqrt(2)  # train max norm after min-max is sqrt(2)
    assert np.allclose(out[0].docs[0], [0.5 * s, 0.5 * s])
    assert np.linalg.norm(out[0].docs[1]) <= 1.0 + 1e-12  # clipped and capped


@given(st.lists(st.lists(st.floats(-1e3, 1e3), min_size=3, max_size=3), min_size=1, max_size=20), st.floats(0.1, 5.0))
def test_normalize_bound_property(rows, u):
    ds = Dataset([QueryInstance("q", np.array(rows), np.zeros(len(rows), dtype=int))], 3)
    out = normalize_features(ds, u)
    assert np.linalg.norm(out[0].docs, axis=1).max() <= u + 1e-12


def test_quantile_grades():
    assert quantile_grades(np.array([0.3, 0.1, 0.9, 0.5, 0.2]), 5).tolist() == [2, 0, 4, 3, 1]
    assert quantile_grades(np.array([1.0, 1.0, 1.0]), 5).tolist() == [0, 1, 3]
    g = quantile_grades(np.arange(10.0), 5)
    assert np.bincount(g).tolist() == [2, 2, 2, 2, 2]


def test_synthetic_five_docs_grades_are_permutation():
    ds, theta = generate_synthetic(SyntheticSpec(dim=4, n_queries=30, docs_per_query=5, seed=1), np.random.default_rng(1))
    for q in ds.queries:
        assert sorted(q.grades.tolist()) == [0, 1, 2, 3, 4]
        assert np.argsort(-q.grades).tolist() == np.argsort(-(q.docs @ theta)).tolist()


def test_synthetic_axis_scorer():
    world = SyntheticSpec(dim=3, n_queries=20, docs_per_query=8, theta_star=np.array([1.0, 0.0, 0.0]))
    ds, theta = generate_synthetic(world, np.random.default_rng(2))
    assert theta.tolist() == [1.0, 0.0, 0.0]
    for q in ds.queries:
        x = q.docs[:, 0]
        for i, j in itertools.combinations(range(8), 2):
            if q.grades[i] > q.grades[j]:
                assert x[i] > x[j]


def test_synthetic_grades_agree_with_true_scores():
    world = SyntheticSpec(dim=6, n_queries=1000, docs_per_query=10, theta_norm=2.0)
    ds, theta = generate_synthetic(world, np.random.default_rng(3))
    assert np.linalg.norm(theta) == pytest.approx(2.0)
    for q in ds.queries:
        ideal = np.argsort(-(q.docs @ theta), kind="stable")
        assert kendall_regret(ideal, q.grades) == 0
        norms = np.linalg.norm(q.docs, axis=1)
        assert norms.min() >= 0.5 - 1e-12 and norms.max() <= 1.0 + 1e-12


def test_synthetic_spec_validation():
    with pytest.raises(ValueError):
        SyntheticSpec(dim=3, docs_per_query=1)
    with pytest.raises(ValueError):
        SyntheticSpec(dim=3, theta_star=[1.0, 0.0])
    ds, _ = generate_synthetic(SyntheticSpec(dim=2, n_queries=3, docs_per_query=3), np.random.default_rng(0))
    assert all(len(set(q.grades.tolist())) == 3 for q in ds.queries)  # fewer levels than 5 is fine
