from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from vctp.exceptions import (
    CorruptCiphertext,
    DuplicateAttribute,
    EmptyUniverse,
    PolicyNotSatisfied,
    UnknownAttribute,
)
from vctp.models.crypto_models import AbeCiphertext, AccessPolicy, AttributeSecretKey, group_profile
from vctp.services import abe
from vctp.services.rng import RandomSource

UNIVERSE = ["doctor", "nurse", "patient", "receptionist", "HospitalA"]
DOCTOR_POLICY = AccessPolicy.of(["doctor", "HospitalA"])


@pytest.fixture
def universe(small_params):
    return abe.setup(UNIVERSE, RandomSource(11), small_params)


def all_subsets(names):
    for size in range(len(names) + 1):
        yield from combinations(names, size)


def test_exhaustive_subsets_doctor_policy(universe):
    ct = abe.encrypt(universe, DOCTOR_POLICY, b"trapdoor", RandomSource(5))
    opened = []
    for subset in all_subsets(UNIVERSE):
        key = abe.keygen(universe, "did:example_x:1", subset)
        try:
            assert abe.decrypt(key, ct) == b"trapdoor"
            opened.append(set(subset))
        except PolicyNotSatisfied as e:
            assert set(e.missing) == set(DOCTOR_POLICY.required_attributes) - set(subset)

    assert len(opened) == 8
    assert all({"doctor", "HospitalA"} <= subset for subset in opened)


@settings(max_examples=50, deadline=None)
@given(
    policy=st.sets(st.sampled_from(UNIVERSE), min_size=1),
    held=st.sets(st.sampled_from(UNIVERSE)),
)
def test_decrypt_iff_policy_covered(policy, held):
    universe = abe.setup(UNIVERSE, RandomSource(2), group_profile("small"))
    ct = abe.encrypt(universe, AccessPolicy.of(sorted(policy)), b"secret", RandomSource(3))
    key = abe.keygen(universe, "did:example_x:2", held)
    if policy <= held:
        assert abe.decrypt(key, ct) == b"secret"
    else:
        with pytest.raises(PolicyNotSatisfied):
            abe.decrypt(key, ct)


def test_keys_from_other_universe_fail_integrity(universe, small_params):
    other = abe.setup(UNIVERSE, RandomSource(12), small_params)
    ct = abe.encrypt(universe, DOCTOR_POLICY, b"trapdoor", RandomSource(5))
    with pytest.raises(CorruptCiphertext):
        abe.decrypt(abe.keygen(other, "did:example_x:3", ["doctor", "HospitalA"]), ct)


def test_tampered_payload_rejected(universe):
    ct = abe.encrypt(universe, DOCTOR_POLICY, b"trapdoor", RandomSource(5))
    flipped = bytearray(ct.payload)
    flipped[-1] ^= 0x01
    tampered = AbeCiphertext(ct.policy, bytes(flipped), ct.encapsulation)
    with pytest.raises(CorruptCiphertext):
        abe.decrypt(abe.keygen(universe, "did:example_x:4", ["doctor", "HospitalA"]), tampered)


def test_ciphertext_binary_envelope(universe):
    ct = abe.encrypt(universe, DOCTOR_POLICY, b"trapdoor", RandomSource(5))
    restored = AbeCiphertext.from_bytes(ct.to_bytes())
    assert restored.payload == ct.payload
    assert set(restored.policy.required_attributes) == set(ct.policy.required_attributes)
    with pytest.raises(CorruptCiphertext):
        AbeCiphertext.from_bytes(b"XXXX" + ct.to_bytes()[4:])
    with pytest.raises(CorruptCiphertext):
        AbeCiphertext.from_bytes(ct.to_bytes()[:-3])


def test_setup_validation(small_params):
    with pytest.raises(EmptyUniverse):
        abe.setup([], RandomSource(1), small_params)
    with pytest.raises(DuplicateAttribute):
        abe.setup(["doctor", "doctor"], RandomSource(1), small_params)


def test_unknown_attributes(universe):
    with pytest.raises(UnknownAttribute):
        abe.keygen(universe, "did:example_x:5", ["surgeon"])
    with pytest.raises(UnknownAttribute):
        abe.encrypt(universe, AccessPolicy.of(["surgeon"]), b"x", RandomSource(1))


def test_public_dict_hides_master_secrets(universe):
    public = universe.public_dict()
    assert set(public["attributes"]) == set(UNIVERSE)
    for name, secret in universe.master_secrets.items():
        assert format(secret, "x") not in public["attributes"].values()


def test_secret_key_dict_form(universe):
    key = abe.keygen(universe, "did:example_x:6", ["nurse", "HospitalA"])
    restored = AttributeSecretKey.from_dict(key.to_dict())
    assert restored.attributes == key.attributes
    assert restored.key_material == key.key_material


def test_empty_policy_rejected():
    with pytest.raises(ValueError):
        AccessPolicy.of([])
    with pytest.raises(ValueError):
        AccessPolicy.of(["doctor", "doctor"])


def test_keys_carry_attribute_secrets_not_holder_binding(universe):
    doctor = abe.keygen(universe, "did:example_doctor:1", ["doctor", "HospitalA"])
    other = abe.keygen(universe, "did:example_doctor:2", ["doctor", "HospitalA"])
    assert doctor.key_material == other.key_material

    relabelled = AttributeSecretKey(
        holder_did="did:example_x:anyone",
        attributes=doctor.attributes,
        key_material=dict(doctor.key_material),
        group=doctor.group,
    )
    ct = abe.encrypt(universe, DOCTOR_POLICY, b"trapdoor", RandomSource(5))
    assert abe.decrypt(relabelled, ct) == b"trapdoor"
