import json
from datetime import date, datetime, timedelta, timezone

import pytest

from vctp.core.template_codec import (
    apply_update,
    credential_section,
    is_instantiated,
    parse,
    section_bytes,
    serialize_canonical,
    trust_proxy_section,
)
from vctp.exceptions import MalformedDocument, MissingTypeTag, SectionNotUpdatable, UnknownSection
from vctp.models.template_models import CREDENTIAL, TRUST_PROXY, UNASSIGNED, UPDATE_POLICY
from vctp.utils.canonical import format_timestamp, parse_timestamp

from .conftest import DOCTOR_DID, HOSPITAL_DID, PATIENT_DID

PROXY_UPDATE = json.dumps({
    "TrustProxy": DOCTOR_DID,
    "nextLevelIssuerDetails": {"id": PATIENT_DID, "permissions": ["delegate-medical-decision"]},
}).encode()


def test_bundled_template_sections(template):
    assert template.version == 0
    assert template.section_ids == (UPDATE_POLICY, TRUST_PROXY, CREDENTIAL)
    assert template.template_id == "http://example.edu/credentials/1872"

    policy = template.update_policy
    assert policy.official_issuer == HOSPITAL_DID
    assert policy.num_votes_required == 5
    assert policy.approval_policy == ("doctor", "nurse")
    assert set(policy.policy.proxy_attributes.required_attributes) == {"doctor", "HospitalA"}
    assert policy.policy.permissions == ("propagate-trust",)

    assert not template.find_section(UPDATE_POLICY).updatable
    assert template.find_section(TRUST_PROXY).update_policy_attrs == policy.policy.proxy_attributes
    assert template.find_section(CREDENTIAL).update_policy_attrs == policy.policy.next_level_issuer_attrs
    assert not is_instantiated(template)


def test_split_credential_objects_are_merged(template):
    credential = credential_section(template)
    assert credential.title == "Letter of Authority"
    assert credential.issue_date == date(2021, 7, 10)
    assert credential.signed_by == UNASSIGNED
    assert credential.credential_subject.id == UNASSIGNED
    assert not credential.issued


def test_missing_trust_propagation_tag(template_bytes):
    document = json.loads(template_bytes)
    document[0]["type"] = ["VerifiableCredential"]
    with pytest.raises(MissingTypeTag):
        parse(json.dumps(document))


def test_diagnostics_name_each_bad_field(template_bytes):
    document = json.loads(template_bytes)
    document[0]["numVotesRequired"] = -1
    document[0]["officialIssuer"] = "hospital"
    document[0]["expirationDate"] = "2021-07-01T00:00:00Z"
    with pytest.raises(MalformedDocument) as e:
        parse(json.dumps(document))
    fields = " ".join(e.value.diagnostics)
    assert "numVotesRequired" in fields
    assert "officialIssuer" in fields
    assert "expirationDate" in fields


@pytest.mark.parametrize("raw", [b"", b"   ", b"{not json", b'{"sections": 1}', b"\xff\xfe", b"[]"])
def test_malformed_documents(raw):
    with pytest.raises(MalformedDocument):
        parse(raw)


def test_missing_section_reported(template_bytes):
    document = json.loads(template_bytes)
    del document[1]
    with pytest.raises(MalformedDocument) as e:
        parse(json.dumps(document))
    assert any(TRUST_PROXY in d for d in e.value.diagnostics)


def test_apply_update_bumps_version(template):
    updated = apply_update(template, TRUST_PROXY, PROXY_UPDATE)
    assert updated.version == template.version + 1
    proxy = trust_proxy_section(updated)
    assert proxy.trust_proxy == DOCTOR_DID
    assert proxy.next_level_issuer.id == PATIENT_DID
    assert proxy.instantiated
    assert section_bytes(updated, UPDATE_POLICY) == section_bytes(template, UPDATE_POLICY)
    assert section_bytes(updated, CREDENTIAL) == section_bytes(template, CREDENTIAL)
    assert trust_proxy_section(template).trust_proxy == UNASSIGNED


def test_apply_update_rejections(template):
    with pytest.raises(SectionNotUpdatable):
        apply_update(template, UPDATE_POLICY, b"{}")
    with pytest.raises(UnknownSection):
        apply_update(template, "signature", b"{}")
    with pytest.raises(UnknownSection):
        section_bytes(template, "signature")
    with pytest.raises(MalformedDocument):
        apply_update(template, TRUST_PROXY, b"[1, 2]")
    with pytest.raises(MalformedDocument):
        apply_update(template, TRUST_PROXY, b'{"TrustProxy": "not-a-did", "nextLevelIssuerDetails": {}}')


def test_canonical_form_keeps_version(template):
    updated = apply_update(template, TRUST_PROXY, PROXY_UPDATE)
    restored = parse(serialize_canonical(updated))
    assert restored.version == 1
    assert restored == updated
    assert serialize_canonical(restored) == serialize_canonical(updated)


def test_canonical_form_ignores_key_order(template_bytes):
    document = json.loads(template_bytes)
    reordered = [dict(reversed(list(obj.items()))) for obj in document]
    assert serialize_canonical(parse(json.dumps(reordered))) == serialize_canonical(parse(template_bytes))


@pytest.mark.parametrize("moment", [
    datetime(2021, 7, 12, 9, 0, 0, tzinfo=timezone.utc),
    datetime(2021, 7, 12, 9, 0, 0, 250000, tzinfo=timezone.utc),
    datetime(2021, 7, 12, 9, 0, 0, 1, tzinfo=timezone.utc),
    datetime(2021, 7, 12, 12, 0, 0, 500, tzinfo=timezone(timedelta(hours=3))),
])
def test_timestamps_keep_fractional_seconds(moment):
    text = format_timestamp(moment)
    assert text.endswith("Z")
    assert parse_timestamp(text) == moment


def test_whole_second_timestamp_form():
    assert format_timestamp(datetime(2021, 7, 10, 4, 20)) == "2021-07-10T04:20:00Z"
    assert format_timestamp(datetime(2021, 7, 10, 4, 20, 0, 1500)) == "2021-07-10T04:20:00.001500Z"
