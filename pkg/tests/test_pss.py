import json
from dataclasses import replace

import pytest

from vctp.core.pss import PolicySanitizableSignature, combined_digest
from vctp.core.template_codec import credential_section, trust_proxy_section
from vctp.exceptions import PolicyNotSatisfied, SectionNotUpdatable, StaleSignature, TrapdoorMismatch
from vctp.models.crypto_models import int_to_bytes
from vctp.models.signature_models import SanitizableSignature
from vctp.models.template_models import CREDENTIAL, TRUST_PROXY, UPDATE_POLICY
from vctp.services import abe
from vctp.services.chameleon import ChameleonHash
from vctp.services.keys import SigningIdentity

from .conftest import DOCTOR_DID, HOLDER_DID, PATIENT_DID

ATTRIBUTES = ["doctor", "nurse", "patient", "HospitalA"]

PROXY_UPDATE = json.dumps({
    "TrustProxy": DOCTOR_DID,
    "nextLevelIssuerDetails": {"id": PATIENT_DID, "permissions": ["delegate-medical-decision"]},
}).encode()

CREDENTIAL_UPDATE = json.dumps({
    "Title": "Letter of Authority",
    "IssueDate": "2021-07-10",
    "Text": "this letter is to authorise the person named in the document to act on my behalf.",
    "signedBy": PATIENT_DID,
    "credentialSubject": {"id": HOLDER_DID, "permissions": ["delegate-medical-decision"]},
}).encode()


@pytest.fixture
def pss(small_params):
    return PolicySanitizableSignature(ChameleonHash(small_params))


@pytest.fixture
def universe(small_params, rng):
    return abe.setup(ATTRIBUTES, rng.fork("universe"), small_params)


@pytest.fixture
def signed(pss, template, universe, hospital_identity, rng):
    return pss.hash_pch(template, universe, hospital_identity, rng.fork("hash"))


def _flip(data: bytes, index: int = 0) -> bytes:
    out = bytearray(data)
    out[index] ^= 0x01
    return bytes(out)


def _with_section(t, section_id, content):
    sections = tuple(replace(s, content=content) if s.section_id == section_id else s for s in t.sections)
    return replace(t, sections=sections)


def test_fresh_signature_verifies(pss, template, signed, hospital_identity):
    decision = pss.verify_pch(template, signed, hospital_identity.public_key_hex)
    assert decision
    assert decision.decision == 1
    assert signed.signer_did == hospital_identity.did
    assert [r.updatable for r in signed.section_records] == [False, True, True]


def test_wrong_signer_key_rejected(pss, template, signed, doctor_identity):
    decision = pss.verify_pch(template, signed, doctor_identity.public_key_hex)
    assert not decision
    assert "signature sigma invalid" in decision.reasons


@pytest.mark.parametrize("section_id", [UPDATE_POLICY, TRUST_PROXY, CREDENTIAL])
@pytest.mark.parametrize("index", [0, 17, -2])
def test_single_byte_content_tamper_rejected(pss, template, signed, hospital_identity, section_id, index):
    original = template.find_section(section_id).content
    tampered = _with_section(template, section_id, _flip(original, index))
    decision = pss.verify_pch(tampered, signed, hospital_identity.public_key_hex)
    assert decision.decision == 0
    assert f"section {section_id} digest mismatch" in decision.reasons


@pytest.mark.parametrize("section_id", [UPDATE_POLICY, TRUST_PROXY, CREDENTIAL])
def test_record_digest_tamper_rejected(pss, template, signed, hospital_identity, section_id):
    records = tuple(
        replace(r, digest=_flip(r.digest)) if r.section_id == section_id else r for r in signed.section_records
    )
    decision = pss.verify_pch(template, replace(signed, section_records=records), hospital_identity.public_key_hex)
    assert decision.decision == 0


def test_sigma_and_combined_digest_tamper_rejected(pss, template, signed, hospital_identity):
    key = hospital_identity.public_key_hex
    assert pss.verify_pch(template, replace(signed, sigma=_flip(signed.sigma, 5)), key).decision == 0
    assert pss.verify_pch(template, replace(signed, combined_digest=_flip(signed.combined_digest)), key).decision == 0


def test_hk_swap_breaks_combined_digest(pss, template, signed, hospital_identity, small_params, rng):
    other_hk = ChameleonHash(small_params).gen(rng.fork("other")).hk
    records = tuple(
        replace(r, hk=other_hk) if r.section_id == TRUST_PROXY else r for r in signed.section_records
    )
    assert combined_digest(records) != signed.combined_digest
    decision = pss.verify_pch(template, replace(signed, section_records=records), hospital_identity.public_key_hex)
    assert not decision


def test_update_keeps_sigma(pss, template, signed, universe, hospital_identity, doctor_identity):
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    updated, new_sig = pss.update_pch(
        template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key, doctor_identity, hospital_identity.public_key_hex
    )
    assert updated.version == 1
    assert new_sig.sigma == signed.sigma
    assert new_sig.combined_digest == signed.combined_digest
    assert new_sig.record(TRUST_PROXY).digest == signed.record(TRUST_PROXY).digest
    assert new_sig.record(TRUST_PROXY).randomness != signed.record(TRUST_PROXY).randomness
    assert pss.verify_pch(updated, new_sig, hospital_identity.public_key_hex)
    assert trust_proxy_section(updated).trust_proxy == DOCTOR_DID
    assert [e.updater_did for e in new_sig.updater_endorsements] == [DOCTOR_DID]


def test_two_level_chain(pss, template, signed, universe, hospital_identity, doctor_identity, rng):
    patient = SigningIdentity.generate(PATIENT_DID, rng.fork("patient"))
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    patient_key = abe.keygen(universe, PATIENT_DID, ["patient", "HospitalA"])
    signer = hospital_identity.public_key_hex

    t1, s1 = pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key, doctor_identity, signer)
    t2, s2 = pss.update_pch(t1, s1, CREDENTIAL, CREDENTIAL_UPDATE, patient_key, patient, signer)

    assert t2.version == 2
    assert s2.sigma == signed.sigma
    assert pss.verify_pch(t2, s2, signer)
    assert credential_section(t2).credential_subject.id == HOLDER_DID
    assert len(s2.updater_endorsements) == 2


def test_policy_not_satisfied_for_nurse(pss, template, signed, universe, hospital_identity, rng):
    nurse = SigningIdentity.generate("did:example_nurse:1", rng.fork("nurse"))
    nurse_key = abe.keygen(universe, nurse.did, ["nurse", "HospitalA"])
    with pytest.raises(PolicyNotSatisfied) as e:
        pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, nurse_key, nurse,
                       hospital_identity.public_key_hex)
    assert e.value.missing == ["doctor"]


def test_stale_signature_rejected(pss, template, signed, universe, hospital_identity, doctor_identity):
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    signer = hospital_identity.public_key_hex
    _, new_sig = pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key, doctor_identity, signer)
    with pytest.raises(StaleSignature) as e:
        pss.update_pch(template, new_sig, TRUST_PROXY, PROXY_UPDATE, doctor_key, doctor_identity, signer)
    assert any(TRUST_PROXY in reason for reason in e.value.reasons)


def test_foreign_trapdoor_rejected(pss, template, signed, universe, hospital_identity, doctor_identity,
                                   small_params, rng):
    chameleon = ChameleonHash(small_params)
    foreign = chameleon.gen(rng.fork("foreign"))
    etd = abe.encrypt(universe, template.find_section(TRUST_PROXY).update_policy_attrs,
                      int_to_bytes(foreign.td, small_params.scalar_length), rng)
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    with pytest.raises(TrapdoorMismatch):
        pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key, doctor_identity,
                       hospital_identity.public_key_hex, etd=etd)


def test_fixed_section_not_updatable(pss, template, signed, universe, hospital_identity, doctor_identity):
    key = abe.keygen(universe, DOCTOR_DID, ATTRIBUTES)
    with pytest.raises(SectionNotUpdatable):
        pss.update_pch(template, signed, UPDATE_POLICY, b"{}", key, doctor_identity,
                       hospital_identity.public_key_hex)


def test_forged_endorsement_rejected(pss, template, signed, universe, hospital_identity, doctor_identity):
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    signer = hospital_identity.public_key_hex
    updated, new_sig = pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key,
                                      doctor_identity, signer)
    forged = replace(new_sig.updater_endorsements[0], signature=_flip(new_sig.updater_endorsements[0].signature))
    decision = pss.verify_pch(updated, replace(new_sig, updater_endorsements=(forged,)), signer)
    assert not decision


def test_sidecar_dict_form(pss, template, signed, hospital_identity):
    restored = SanitizableSignature.from_dict(json.loads(json.dumps(signed.to_dict())))
    assert restored.sigma == signed.sigma
    assert pss.verify_pch(template, restored, hospital_identity.public_key_hex)


def test_every_single_byte_tamper_detected(pss, template, signed, hospital_identity):
    key = hospital_identity.public_key_hex
    missed = []
    for section in template.sections:
        for index in range(len(section.content)):
            tampered = _with_section(template, section.section_id, _flip(section.content, index))
            if pss.verify_pch(tampered, signed, key):
                missed.append((section.section_id, index))
    for record in signed.section_records:
        for index in range(len(record.digest)):
            records = tuple(
                replace(r, digest=_flip(r.digest, index)) if r is record else r for r in signed.section_records
            )
            if pss.verify_pch(template, replace(signed, section_records=records), key):
                missed.append((record.section_id, "digest", index))
    assert missed == []


def test_endorsement_key_must_match_did(pss, template, signed, universe, hospital_identity, doctor_identity, rng):
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    impostor = SigningIdentity.generate(DOCTOR_DID, rng.fork("impostor"))
    signer = hospital_identity.public_key_hex
    updated, new_sig = pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key, impostor, signer)
    registry = {DOCTOR_DID: doctor_identity.public_key_hex}

    assert pss.verify_pch(updated, new_sig, signer)
    decision = pss.verify_pch(updated, new_sig, signer, registry.get)
    assert not decision
    assert decision.reasons == (f"endorsement 0 key not registered for {DOCTOR_DID}",)

    with pytest.raises(StaleSignature):
        pss.update_pch(updated, new_sig, CREDENTIAL, CREDENTIAL_UPDATE, doctor_key, doctor_identity, signer,
                       resolve_key=registry.get)


def test_registered_endorsement_key_accepted(pss, template, signed, universe, hospital_identity, doctor_identity):
    doctor_key = abe.keygen(universe, DOCTOR_DID, ["doctor", "HospitalA"])
    signer = hospital_identity.public_key_hex
    updated, new_sig = pss.update_pch(template, signed, TRUST_PROXY, PROXY_UPDATE, doctor_key,
                                      doctor_identity, signer)
    assert pss.verify_pch(updated, new_sig, signer, {DOCTOR_DID: doctor_identity.public_key_hex}.get)


def test_record_without_etd_reported_not_raised(pss, template, signed, hospital_identity):
    records = tuple(replace(r, etd=None) if r.section_id == TRUST_PROXY else r for r in signed.section_records)
    decision = pss.verify_pch(template, replace(signed, section_records=records), hospital_identity.public_key_hex)
    assert not decision
    assert f"section {TRUST_PROXY} record malformed" in decision.reasons
    assert any(reason.startswith("combined digest malformed") for reason in decision.reasons)
    with pytest.raises(ValueError):
        combined_digest(records)
