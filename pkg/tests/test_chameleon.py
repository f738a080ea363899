import pytest
from hypothesis import given, settings, strategies as st

from vctp.exceptions import InvalidParams, InvalidRandomness, MissingTrapdoor
from vctp.models.crypto_models import GroupParams, Randomness, group_profile
from vctp.services.chameleon import ChameleonHash
from vctp.services.rng import RandomSource

TEST_GROUP = group_profile("test")


@settings(max_examples=1000, deadline=None)
@given(
    message=st.binary(max_size=64),
    new_message=st.binary(max_size=64),
    r=st.integers(min_value=0, max_value=TEST_GROUP.q - 1),
    td=st.integers(min_value=1, max_value=TEST_GROUP.q - 1),
)
def test_collision_keeps_digest(message, new_message, r, td):
    ch = ChameleonHash(TEST_GROUP)
    kp = ch.gen(RandomSource(0), td=td)
    digest = ch.hash(kp.hk, message, Randomness(r))

    r_new = ch.find_collision(kp, message, Randomness(r), new_message)

    assert 0 <= r_new.r < TEST_GROUP.q
    assert ch.hash(kp.hk, new_message, r_new) == digest
    assert ch.verify(kp.hk, new_message, r_new, digest)


def test_collision_in_small_group():
    ch = ChameleonHash(group_profile("small"))
    rng = RandomSource(7)
    kp = ch.gen(rng)
    r = ch.random(rng)
    digest = ch.hash(kp.hk, b'{"TrustProxy":"UNASSIGNED"}', r)

    r_new = ch.find_collision(kp, b'{"TrustProxy":"UNASSIGNED"}', r, b'{"TrustProxy":"did:example_doctor:1"}')

    assert r_new != r
    assert ch.hash(kp.hk, b'{"TrustProxy":"did:example_doctor:1"}', r_new) == digest


def test_hk_is_generator_power(test_params):
    ch = ChameleonHash(test_params)
    kp = ch.gen(RandomSource(3), td=5)
    assert kp.hk == pow(test_params.g, 5, test_params.p)


def test_randomness_out_of_range(test_params):
    ch = ChameleonHash(test_params)
    kp = ch.gen(RandomSource(1))
    with pytest.raises(InvalidRandomness):
        ch.hash(kp.hk, b"m", Randomness(test_params.q))
    assert not ch.verify(kp.hk, b"m", Randomness(-1), ch.hash(kp.hk, b"m", Randomness(0)))


def test_collision_needs_trapdoor(test_params):
    ch = ChameleonHash(test_params)
    public = ch.gen(RandomSource(1)).public()
    assert public.td is None
    with pytest.raises(MissingTrapdoor):
        ch.find_collision(public, b"a", Randomness(1), b"b")


def test_trapdoor_hidden_in_repr(test_params):
    kp = ChameleonHash(test_params).gen(RandomSource(1), td=4)
    assert "td=4" not in repr(kp)


@pytest.mark.parametrize("p, q, g", [
    (23, 7, 4),   # q не делит p-1
    (23, 11, 1),  # g = 1
    (23, 11, 5),  # g не порождает подгруппу порядка q
    (23, 22, 4),  # q = p-1 не простое
    (21, 10, 4),  # p не простое
])
def test_invalid_params(p, q, g):
    with pytest.raises(InvalidParams):
        ChameleonHash(GroupParams(p, q, g))


def test_params_from_decimal_strings():
    params = GroupParams.from_dict({"p": "23", "q": "11", "g": "4"})
    assert params == group_profile("test")


def test_seeded_gen_is_reproducible(small_params):
    ch = ChameleonHash(small_params)
    assert ch.gen(RandomSource(99)).hk == ch.gen(RandomSource(99)).hk
