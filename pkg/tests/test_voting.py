from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from datetime import timedelta

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from vctp.config.settings import Settings
from vctp.core import voting
from vctp.core.ledger import Ledger
from vctp.core.template_codec import parse
from vctp.exceptions import (
    MalformedBallot,
    RequestClosed,
    UnknownAdmin,
    VoteGateFailed,
    VotingNotRequired,
)
from vctp.models.ledger_models import IssuerGrant
from vctp.models.template_models import TRUST_PROXY
from vctp.models.voting_models import PendingUpdate, RejectionReason, VoteOption, VoteStatus, VoteSubmission
from vctp.services.keys import SigningIdentity
from vctp.services.rng import RandomSource

from .conftest import PATIENT_DID
from .test_ledger import ADMIN_DID, CONTENT_DIGEST, VoteHarness, _record

THRESHOLD = 5


@pytest.fixture
def harness(template, rng):
    return VoteHarness(template, rng)


vote_scripts = st.lists(
    st.tuples(st.integers(min_value=0, max_value=9), st.sampled_from(list(VoteOption))),
    max_size=20,
)


@settings(max_examples=500, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(script=vote_scripts)
def test_issuer_granted_iff_threshold_reached(script):
    template = parse((Settings.DATA_DIR / "letter_of_authority.json").read_bytes())
    h = VoteHarness(template, RandomSource(99))
    req = h.open()

    approvers = set()
    voted = set()
    for index, option in script:
        if len(approvers) >= THRESHOLD:
            with pytest.raises(RequestClosed):
                h.vote(req, index, option)
            continue
        _, record = h.vote(req, index, option)
        voter_did = h.voters[index][0].did
        if voter_did in voted:
            assert record.rejection_reason is RejectionReason.DUPLICATE_DID
            continue
        assert record.accepted
        voted.add(voter_did)
        if option is VoteOption.APPROVE:
            approvers.add(voter_did)

    current = h.ledger.voting_request(req.request_id)
    assert current.accepted_approvals == len(approvers)
    assert len(set(current.accepted_voters)) == len(current.accepted_voters)

    grant = IssuerGrant(PATIENT_DID, 2)
    if len(approvers) >= THRESHOLD:
        h.ledger.commit_credential(_record(gate=req.request_id), issuer_grant=grant)
    else:
        with pytest.raises(VoteGateFailed):
            h.ledger.commit_credential(_record(gate=req.request_id), issuer_grant=grant)
    assert (h.ledger.lookup_issuer(PATIENT_DID) is not None) == (len(approvers) >= THRESHOLD)


def test_reject_votes_do_not_count(harness):
    req = harness.open()
    for i in range(6):
        req, record = harness.vote(req, i, VoteOption.REJECT)
        assert record.accepted
    assert req.status is VoteStatus.OPEN
    report = voting.tally_report(req)
    assert report["approvals"] == 0
    assert report["rejects"] == 6


def test_duplicate_voter_rejected(harness):
    req = harness.open()
    req, first = harness.vote(req, 0)
    req, second = harness.vote(req, 0)
    assert first.accepted
    assert not second.accepted
    assert second.rejection_reason is RejectionReason.DUPLICATE_DID
    assert req.accepted_approvals == 1


def test_wrong_role_rejected(harness):
    receptionist = SigningIdentity.generate("did:example_reception:1", harness.rng.fork("reception"))
    harness.ledger.register_did(receptionist.did, receptionist.ddo())
    credential = harness.contract.issue_role_credential(harness.admin, receptionist.did, "receptionist", "HospitalA")
    req = harness.open()
    submission = voting.seal_ballot(req, credential, VoteOption.APPROVE, receptionist, harness.rng)
    _, record = harness.ledger.submit_vote(harness.contract, submission)
    assert record.rejection_reason is RejectionReason.BAD_ROLE


def test_forged_credential_is_bad_signature(harness):
    forger = SigningIdentity.generate(ADMIN_DID, harness.rng.fork("forger"))
    voter, _ = harness.voters[0]
    with pytest.raises(UnknownAdmin):
        harness.contract.issue_role_credential(forger, voter.did, "doctor", "HospitalA")

    _, credential = harness.voters[0]
    req = harness.open()
    stolen = voting.seal_ballot(req, credential, VoteOption.APPROVE, harness.voters[1][0], harness.rng)
    _, record = harness.ledger.submit_vote(harness.contract, stolen)
    assert record.rejection_reason is RejectionReason.BAD_SIGNATURE


def test_bad_signature_checked_before_role(harness):
    outsider = SigningIdentity.generate("did:example_x:unregistered", harness.rng.fork("outsider"))
    credential = harness.contract.issue_role_credential(harness.admin, outsider.did, "receptionist", "HospitalA")
    req = harness.open()
    submission = voting.seal_ballot(req, credential, VoteOption.APPROVE, outsider, harness.rng)
    _, record = harness.ledger.submit_vote(harness.contract, submission)
    assert record.rejection_reason is RejectionReason.BAD_SIGNATURE


def test_garbled_ballot_rejected(harness):
    req = harness.open()
    submission = voting.seal_ballot(req, harness.voters[0][1], VoteOption.APPROVE, harness.voters[0][0], harness.rng)
    flipped = submission.ciphertext[:-1] + bytes([submission.ciphertext[-1] ^ 0x01])
    garbled = VoteSubmission(req.request_id, submission.voter_did, flipped)
    with pytest.raises(MalformedBallot):
        harness.contract.receive_vote(req, garbled)


def test_admin_close(harness):
    req = harness.open()
    for i in range(3):
        req, _ = harness.vote(req, i)
    with pytest.raises(UnknownAdmin):
        harness.contract.close_request(req, "did:example_x:nobody")
    closed = harness.contract.close_request(req, ADMIN_DID)
    assert closed.status is VoteStatus.FAILED
    with pytest.raises(RequestClosed):
        voting.close_request(closed)
    with pytest.raises(RequestClosed):
        harness.contract.receive_vote(
            closed, voting.seal_ballot(closed, harness.voters[4][1], VoteOption.APPROVE,
                                       harness.voters[4][0], harness.rng)
        )

    harness.ledger.close_vote(req.request_id, ADMIN_DID)
    assert harness.ledger.voting_request(req.request_id).status is VoteStatus.FAILED


def test_expiry(harness):
    req = harness.open()
    later = harness.policy.expiration_date + timedelta(minutes=1)
    assert voting.tally(req, harness.policy.issuance_date) is VoteStatus.OPEN
    assert voting.tally(req, later) is VoteStatus.EXPIRED
    assert voting.tally_report(req, later)["status"] == "Expired"

    harness.contract.clock = lambda: later
    with pytest.raises(RequestClosed):
        harness.contract.cast_vote(req, harness.voters[0][1], VoteOption.APPROVE, harness.voters[0][0], harness.rng)


def test_no_request_when_votes_not_required(harness):
    policy = replace(harness.policy, num_votes_required=0)
    with pytest.raises(VotingNotRequired):
        voting.open_request(PendingUpdate(TRUST_PROXY, CONTENT_DIGEST, PATIENT_DID), policy, "00" * 32)


def test_request_id_is_content_addressed(harness):
    a = PendingUpdate(TRUST_PROXY, CONTENT_DIGEST, PATIENT_DID)
    b = PendingUpdate(TRUST_PROXY, "cd" * 32, PATIENT_DID)
    template_id = harness.policy.id
    assert voting.request_id_for(template_id, a) == voting.request_id_for(template_id, a)
    assert voting.request_id_for(template_id, a) != voting.request_id_for(template_id, b)
    newer = PendingUpdate(TRUST_PROXY, CONTENT_DIGEST, PATIENT_DID, version=2)
    assert voting.request_id_for(template_id, a) != voting.request_id_for(template_id, newer)


def test_concurrent_votes_counted_once(template):
    h = VoteHarness(template, RandomSource(5), Ledger())
    req = h.open()
    submissions = [
        voting.seal_ballot(req, credential, VoteOption.APPROVE, voter, h.rng)
        for voter, credential in h.voters[:4]
        for _ in range(3)
    ]
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda s: h.ledger.submit_vote(h.contract, s), submissions))
    current = h.ledger.voting_request(req.request_id)
    assert current.accepted_approvals == 4
    assert current.status is VoteStatus.OPEN
