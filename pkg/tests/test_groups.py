import random

import pytest

from chainlearn.groups import get_backend

BACKENDS = ["exponent", "pairing"]


@pytest.fixture(params=BACKENDS)
def backend(request):
    return get_backend(request.param)


def test_generator_order(backend):
    assert backend.g1_mul(backend.g1, backend.order) == backend.g1_identity
    assert backend.g2_mul(backend.g2, backend.order) == backend.g2_identity


def test_scalar_mul_matches_repeated_add(backend):
    acc = backend.g1_identity
    for k in range(8):
        assert backend.g1_mul(backend.g1, k) == acc
        acc = backend.g1_add(acc, backend.g1)


def test_pairing_bilinear(backend):
    rng = random.Random(11)
    e_gh = backend.pair(backend.g1, backend.g2)
    assert not backend.gt_eq(e_gh, backend.gt_one), "pairing must be non-degenerate"
    for _ in range(3):
        a = rng.randrange(1, backend.order)
        b = rng.randrange(1, backend.order)
        lhs = backend.pair(backend.g1_mul(backend.g1, a), backend.g2_mul(backend.g2, b))
        assert backend.gt_eq(lhs, backend.gt_pow(e_gh, a * b))


def test_pairing_additive_in_first_argument(backend):
    P1 = backend.g1_mul(backend.g1, 111)
    P2 = backend.g1_mul(backend.g1, 222)
    lhs = backend.pair(backend.g1_add(P1, P2), backend.g2)
    rhs = backend.gt_mul(backend.pair(P1, backend.g2), backend.pair(P2, backend.g2))
    assert backend.gt_eq(lhs, rhs)


def test_pair_with_identity_is_one(backend):
    assert backend.gt_eq(backend.pair(backend.g1_identity, backend.g2), backend.gt_one)
    assert backend.gt_eq(backend.pair(backend.g1, backend.g2_identity), backend.gt_one)


def test_element_roundtrip(backend):
    for k in [0, 1, 2, 12345, backend.order - 1]:
        P = backend.g1_mul(backend.g1, k)
        data = backend.g1_to_bytes(P)
        assert len(data) == backend.element_size
        assert backend.g1_from_bytes(data) == P


def test_neg_cancels(backend):
    P = backend.g1_mul(backend.g1, 777)
    assert backend.g1_add(P, backend.g1_neg(P)) == backend.g1_identity


def test_from_bytes_rejects_garbage(backend):
    with pytest.raises(ValueError):
        backend.g1_from_bytes(b"\xff" * (backend.element_size + 3))
