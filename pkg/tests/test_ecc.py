import itertools
import random

import pytest
from hypothesis import given, strategies as st

from authlab.ecc import (
    P256,
    TOY17,
    CurveParams,
    load_curve_file,
    point_add,
    point_neg,
    resolve_curve,
    scalar_inv,
    scalar_mul,
    validate_point,
)
from authlab.errors import CurveError, InvalidPoint, ScalarDegenerate
from oracles import TOY_G, TOY_N, egcd_inverse, repeated_add, toy_add, toy_points

POINTS = toy_points()


def test_toy_constants_match_enumeration():
    assert len(POINTS) == TOY_N == TOY17.n
    assert TOY17.G == TOY_G
    assert TOY17.coord_width == 1
    TOY17.check()


def test_p256_constants_validate():
    P256.check()
    assert P256.coord_width == 32


def test_p256_known_multiples():
    # published secp256r1 vectors for 2G and 3G
    assert scalar_mul(P256, 2, P256.G) == (
        0x7CF27B188D034F7E8A52380304B51AC3C08969E277F21B35A60B48FC47669978,
        0x07775510DB8ED040293D9AC69F7430DBBA7DADE63CE982299E04B79D227873D1,
    )
    assert scalar_mul(P256, 3, P256.G) == (
        0x5ECBE4D1A6330A44C8F7EF951D4BF165E6C6B721EFADA985FB41661BC6E7FD6C,
        0x8734640C4998FF7E374B06CE1A64A2ECD82AB036384FB83D9A79B127A27D5032,
    )
    assert scalar_mul(P256, P256.n, P256.G) is None
    assert scalar_mul(P256, P256.n - 1, P256.G) == point_neg(P256, P256.G)


def test_point_add_examples():
    Q = (6, 3)
    assert point_add(TOY17, None, Q) == Q
    assert point_add(TOY17, (5, 1), (5, 17 - 1)) is None
    assert point_add(TOY17, (5, 1), (5, 1)) == (6, 3)


def test_point_add_matches_oracle_on_all_pairs():
    for P, Q in itertools.product(POINTS, repeat=2):
        assert point_add(TOY17, P, Q) == toy_add(P, Q)


def test_point_add_rejects_off_curve():
    with pytest.raises(InvalidPoint):
        point_add(TOY17, (5, 2), (5, 1))
    with pytest.raises(InvalidPoint):
        scalar_mul(TOY17, 3, (5, 2))


def test_scalar_mul_examples():
    assert scalar_mul(TOY17, 0, TOY17.G) is None
    assert scalar_mul(TOY17, 19, TOY17.G) is None
    assert scalar_mul(TOY17, 18, (5, 1)) == (5, 16)
    with pytest.raises(ValueError):
        scalar_mul(TOY17, -1, TOY17.G)


@pytest.mark.parametrize("P", POINTS)
def test_scalar_mul_matches_repeated_addition(P):
    for k in range(2 * TOY_N):
        assert scalar_mul(TOY17, k, P) == repeated_add(toy_add, k, P)


def test_scalar_inv_examples():
    assert scalar_inv(TOY17, 1) == 1
    assert scalar_inv(TOY17, 18) == 18
    assert scalar_inv(TOY17, 2) == 10 == egcd_inverse(2, 19)
    with pytest.raises(ScalarDegenerate):
        scalar_inv(TOY17, 0)
    with pytest.raises(ScalarDegenerate):
        scalar_inv(TOY17, 19)


def test_validate_point_examples():
    assert validate_point(TOY17, (5, 1))
    assert not validate_point(TOY17, (5, 2))
    assert validate_point(TOY17, None)
    assert not validate_point(TOY17, (5, 18))
    assert not validate_point(TOY17, (-12, 1))
    assert not validate_point(TOY17, "nope")


@given(st.integers(1, P256.n - 1), st.integers(1, P256.n - 1))
def test_p256_scalar_mul_is_linear(j, k):
    jG = scalar_mul(P256, j, P256.G)
    kG = scalar_mul(P256, k, P256.G)
    assert point_add(P256, jG, kG) == scalar_mul(P256, j + k, P256.G)
    assert validate_point(P256, jG)


@given(st.integers(1, P256.n - 1), st.integers(1, P256.n - 1))
def test_inverse_cancels_hpw_factor(hpw, r1):
    # HPW^-1 * ((HPW * r1) * G) == r1 * G
    R1 = scalar_mul(P256, hpw * r1 % P256.n, P256.G)
    assert scalar_mul(P256, scalar_inv(P256, hpw), R1) == scalar_mul(P256, r1, P256.G)


@given(st.integers(1, P256.n - 1))
def test_p256_inverse(k):
    assert k * scalar_inv(P256, k) % P256.n == 1


def test_scalar_mul_reduces_mod_n():
    rng = random.Random(5)
    for _ in range(5):
        k = rng.randrange(1, P256.n)
        assert scalar_mul(P256, k + P256.n, P256.G) == scalar_mul(P256, k, P256.G)


def test_load_curve_file_accepts_toy_params(tmp_path):
    path = tmp_path / "tiny.curve"
    path.write_text("# toy curve\np = 17\na = 0x2\nb = 2\nGx = 5\nGy = 1\nn = 19\n")
    curve = load_curve_file(path)
    assert (curve.name, curve.p, curve.a, curve.n, curve.G) == ("tiny", 17, 2, 19, (5, 1))
    assert resolve_curve(str(path)) == curve


@pytest.mark.parametrize(
    "body, message",
    [
        ("p = 17\na = 2\nb = 2\nGx = 5\nGy = 2\nn = 19\n", "not on the curve"),
        ("p = 17\na = 2\nb = 2\nGx = 5\nGy = 1\nn = 18\n", "not prime"),
        ("p = 17\na = 2\nb = 2\nGx = 5\nGy = 1\nn = 17\n", "infinity"),
        ("p = 17\na = 0\nb = 0\nGx = 5\nGy = 1\nn = 19\n", "singular"),
        ("p = 17\na = 2\nb = 2\nGx = 5\nGy = 1\n", "missing n"),
        ("p = 17\nq = 3\n", "unknown key"),
        ("p = seventeen\n", "bad integer"),
    ],
)
def test_load_curve_file_revalidates(tmp_path, body, message):
    path = tmp_path / "bad.curve"
    path.write_text(body)
    with pytest.raises(CurveError, match=message):
        load_curve_file(path)


def test_resolve_unknown_curve():
    with pytest.raises(CurveError):
        resolve_curve("secp999")
    assert resolve_curve("toy17") is TOY17


def test_curve_params_are_immutable():
    with pytest.raises(AttributeError):
        TOY17.p = 19
    assert isinstance(TOY17, CurveParams)
