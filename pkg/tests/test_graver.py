import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wbpart.graver import (
    GraverBasis,
    GraverBasisTooLarge,
    GraverConfig,
    conformal_le,
    graver_basis,
    graver_oracle,
    is_conformally_minimal,
    kernel_lattice_basis,
)

P1_TWO_ITEMS = [[1, 0, 1, 0], [0, 1, 0, 1], [1, 1, 0, 0], [0, 0, 1, 1]]


def pm(*vs):
    return {tuple(v) for v in vs} | {tuple(-a for a in v) for v in vs}


def test_identity_has_empty_basis():
    assert graver_basis([[1, 0], [0, 1]]).vectors == ()


@pytest.mark.parametrize(
    "A, expected",
    [
        ([[1, 1]], pm((1, -1))),
        ([[1, 2]], pm((2, -1))),
        ([[2, 3]], pm((3, -2))),
        ([[1, 1, 1]], pm((1, -1, 0), (1, 0, -1), (0, 1, -1))),
        (P1_TWO_ITEMS, pm((1, -1, -1, 1))),
    ],
)
@pytest.mark.parametrize("method", ["lift", "pottier"])
def test_known_bases(A, expected, method):
    basis = graver_basis(A, method=method)
    assert basis.as_set() == expected
    assert list(basis.vectors) == sorted(basis.vectors)


def test_oracle_examples():
    assert graver_oracle([[1, 1]], 1) == pm((1, -1))
    assert graver_oracle([[2, 3]], 3) == pm((3, -2))
    assert graver_oracle([[1, 1, 1]], 1) == pm((1, -1, 0), (1, 0, -1), (0, 1, -1))


def test_conformal_minimality_examples():
    assert not is_conformally_minimal((2, -2), [(1, -1)])
    assert is_conformally_minimal((1, -1), [])
    assert is_conformally_minimal((1, 1, -2), [(1, -1, 0)])
    assert conformal_le((1, 0, -1), (2, 0, -3))
    assert not conformal_le((1, -1), (1, 1))


def test_primitive_partition_identity():
    # [1 2 3 4] has 30 Graver elements; both completions and the oracle agree
    A = [[1, 2, 3, 4]]
    lift = graver_basis(A).as_set()
    assert len(lift) == 30
    assert lift == graver_basis(A, method="pottier").as_set() == graver_oracle(A, 4)


def test_truncation_is_intersection_with_box():
    A = [[1, 2, 3, 4]]
    full = graver_basis(A)
    bounds = (2, 1, 1, 1)
    cut = graver_basis(A, bounds=bounds)
    assert cut.as_set() == {v for v in full if all(abs(a) <= b for a, b in zip(v, bounds))}


def test_kernel_lattice_basis_spans_kernel():
    A = [[1, 2, 3], [0, 1, 1]]
    K = kernel_lattice_basis(A)
    assert len(K) == 1
    assert np.all(np.array(A) @ np.array(K).T == 0)


def test_text_roundtrip():
    basis = graver_basis([[1, 1, 1]])
    assert GraverBasis.parse_text(basis.to_text()) == list(basis.vectors)


def test_size_cap_is_an_error():
    with pytest.raises(GraverBasisTooLarge):
        graver_basis([[1, 2, 3, 4, 5]], config=GraverConfig(max_size=5))


def test_empty_matrix_rejected():
    with pytest.raises(ValueError):
        graver_basis([[]])


def sign_compatible_decomposes(v, basis):
    """Greedy conformal reduction of v by the basis reaches zero."""
    v = list(v)
    changed = True
    while any(v) and changed:
        changed = False
        for g in basis:
            if conformal_le(g, v):
                v = [a - b for a, b in zip(v, g)]
                changed = True
                break
    return not any(v)


@st.composite
def small_matrices(draw):
    rows = draw(st.integers(1, 2))
    cols = draw(st.integers(2, 4))
    return [[draw(st.integers(-2, 3)) for _ in range(cols)] for _ in range(rows)]


@settings(max_examples=40, deadline=None)
@given(small_matrices())
def test_invariants_on_random_matrices(A):
    basis = graver_basis(A)
    vecs = basis.as_set()
    M = np.array(A)
    for v in vecs:
        assert any(v)
        assert tuple(-a for a in v) in vecs
        assert not (M @ np.array(v)).any()
    for u, v in itertools.permutations(vecs, 2):
        assert not conformal_le(u, v)
    assert basis.as_set() == graver_basis(A, method="pottier").as_set()
    # every kernel vector in a small box decomposes conformally
    cols = len(A[0])
    for w in itertools.product(range(-2, 3), repeat=cols):
        if any(w) and not (M @ np.array(w)).any():
            assert sign_compatible_decomposes(w, basis.vectors)


@settings(max_examples=40, deadline=None)
@given(small_matrices())
def test_oracle_agreement_on_enclosing_box(A):
    # every conformally smaller vector of a boxed element lies in the same box,
    # so the oracle on the enclosing box must return the basis exactly
    basis = graver_basis(A).as_set()
    box = max((abs(a) for v in basis for a in v), default=1)
    if box ** len(A[0]) <= 20_000:
        assert graver_oracle(A, box) == basis


def test_completion_fixpoint():
    basis = graver_basis([[1, 2, 3]]).vectors
    for u, v in itertools.product(basis, repeat=2):
        w = tuple(a + b for a, b in zip(u, v))
        if any(w):
            assert sign_compatible_decomposes(w, basis)
