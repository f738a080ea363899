from dataclasses import replace
from datetime import timedelta

import pytest

from vctp.core import ledger as ledger_fold
from vctp.core.template_codec import credential_section, trust_proxy_section
from vctp.exceptions import ConfigError, IssuerNotOnboarded, ProtocolError, UnknownAdmin
from vctp.models.crypto_models import group_profile
from vctp.models.scenario_models import ScenarioStep
from vctp.scenario.runner import ScenarioRunner
from vctp.services.rng import RandomSource

from .conftest import DOCTOR_DID, HOLDER_DID, HOSPITAL_DID, PATIENT_DID

TEMPLATE_ID = "http://example.edu/credentials/1872"


def _run(script, profile="small", seed=7, stop_after=None):
    runner = ScenarioRunner(script, group_profile(profile), RandomSource(seed))
    return runner, runner.run(stop_after=stop_after)


def _without_vote(script, voter):
    ward = [intent for intent in script.voter_scripts["ward"] if intent.voter != voter]
    return replace(script, voter_scripts={**script.voter_scripts, "ward": ward})


def _replace_steps(script, **changes):
    steps = [changes.get(step.name, step) for step in script.steps]
    return replace(script, steps=steps)


def test_hospital_scenario_end_to_end(hospital_script):
    runner, result = _run(hospital_script)
    assert result.passed, result.transcript()
    assert [o.name for o in result.outcomes][-1] == "verify"

    ledger = runner.ledger
    assert ledger.lookup_issuer(HOSPITAL_DID).level == 1
    patient = ledger.lookup_issuer(PATIENT_DID)
    assert patient.level == 2
    assert patient.onboarded_by == DOCTOR_DID

    template = result.sealed.template
    assert template.version == 2
    assert trust_proxy_section(template).trust_proxy == DOCTOR_DID
    credential = credential_section(template)
    assert credential.signed_by == PATIENT_DID
    assert credential.credential_subject.id == HOLDER_DID

    assert result.report.holder_did == HOLDER_DID
    assert result.report.failed_checks == ()


def test_sigma_stable_across_chain(hospital_script):
    runner, result = _run(hospital_script)
    signed = runner.ledger.find_credential(TEMPLATE_ID, 0)
    onboarded = runner.ledger.find_credential(TEMPLATE_ID, 1)
    issued = runner.ledger.find_credential(TEMPLATE_ID, 2)
    assert signed.sigma == onboarded.sigma == issued.sigma == result.sealed.signature.sigma.hex()
    assert onboarded.gate is not None and issued.gate is not None
    assert onboarded.gate != issued.gate


def test_same_seed_same_transcript(hospital_script):
    _, first = _run(hospital_script, profile="test", seed=3)
    _, second = _run(hospital_script, profile="test", seed=3)
    _, other = _run(hospital_script, profile="test", seed=4)
    assert first.passed
    assert first.transcript() == second.transcript()
    assert first.state_hash == second.state_hash
    assert first.state_hash != other.state_hash


def test_missing_vote_fails_onboarding(hospital_script):
    runner, result = _run(_without_vote(hospital_script, "doctor"))
    assert not result.passed
    failing = result.failing_step
    assert (failing.error, failing.name) == ("VoteGateFailed", "onboard")
    assert runner.ledger.lookup_issuer(PATIENT_DID) is None
    assert runner.ledger.find_credential(TEMPLATE_ID, 1) is None


def test_nurse_cannot_onboard(hospital_script):
    script = _replace_steps(
        hospital_script,
        **{
            "attest-doctor": ScenarioStep("attest-doctor", "nurse1", "attest",
                                          {"attributes": ["nurse", "HospitalA"]}),
            "kit": ScenarioStep("kit", "hospital", "send_update_kit",
                                {"recipient": "nurse1", "section": "trust_proxy"}),
            "onboard": ScenarioStep("onboard", "nurse1", "onboard",
                                    {"new_issuer": "patient", "permissions": [], "voters": "ward"}),
        },
    )
    _, result = _run(script)
    assert (result.failing_step.error, result.failing_step.name) == ("PolicyNotSatisfied", "onboard")


def test_attestation_needs_role_credential(hospital_script):
    script = _replace_steps(hospital_script, **{
        "attest-doctor": ScenarioStep("attest-doctor", "relative", "attest", {"attributes": ["doctor", "HospitalA"]}),
    })
    _, result = _run(script)
    assert (result.failing_step.error, result.failing_step.name) == ("AttestationFailed", "attest-doctor")


def test_only_hospital_can_sign(hospital_script):
    script = _replace_steps(hospital_script, setup=ScenarioStep("setup", "doctor", "l1_setup"))
    _, result = _run(script)
    assert result.failing_step.error == "NotL1Issuer"


def test_second_onboarding_rejected(hospital_script):
    runner, _ = _run(hospital_script, stop_after="onboard")
    doctor = runner.actor("doctor")
    envelope = runner.protocol.send_update_kit(runner.actor("hospital"), doctor.did, runner.sealed, "trust_proxy")
    with pytest.raises(ProtocolError):
        runner.protocol.onboard_personal_issuer(doctor, envelope, runner.actor("relative").did, [],
                                                runner.vote_collector("ward"))
    assert runner.ledger.lookup_issuer(runner.actor("relative").did) is None


def test_issue_requires_onboarded_issuer(hospital_script):
    runner, _ = _run(hospital_script, stop_after="kit")
    relative = runner.actor("relative")
    with pytest.raises(IssuerNotOnboarded):
        runner.protocol.issue_credential(relative, runner.sealed, HOLDER_DID, [], runner.vote_collector("ward"))


def test_l1_issuer_cannot_fill_credential(hospital_script):
    runner, _ = _run(hospital_script, stop_after="onboard")
    hospital = runner.actor("hospital")
    height = runner.ledger.height
    with pytest.raises(IssuerNotOnboarded):
        runner.protocol.issue_credential(hospital, runner.sealed, HOLDER_DID, [], runner.vote_collector("ward"))
    assert runner.ledger.height == height


def test_issue_needs_instantiated_trust_proxy(hospital_script):
    runner, _ = _run(hospital_script, stop_after="kit")
    assert not trust_proxy_section(runner.sealed.template).instantiated
    with pytest.raises(IssuerNotOnboarded) as e:
        runner.protocol.issue_credential(runner.actor("hospital"), runner.sealed, HOLDER_DID, [])
    assert "trust_proxy" in str(e.value)


def test_contract_deployed_by_genesis_admin_only(hospital_script):
    runner, _ = _run(hospital_script, stop_after="contract")
    with pytest.raises(UnknownAdmin):
        runner.protocol.deploy_voting_contract(runner.actor("doctor"))
    assert runner.ledger.snapshot().voting_admin == runner.actor("admin").did


def test_verification_after_expiry(hospital_script):
    runner, result = _run(hospital_script)
    later = result.sealed.template.update_policy.expiration_date + timedelta(days=1)
    report = runner.protocol.verify_presentation(None, result.sealed.template, result.sealed.signature, now=later)
    assert report.failed_checks == ("expiry",)


def test_verification_of_unissued_template(hospital_script):
    runner, _ = _run(hospital_script, stop_after="setup")
    report = runner.protocol.verify_presentation(None, runner.sealed.template, runner.sealed.signature)
    assert "issuer_registry" in report.failed_checks
    assert "signature" not in report.failed_checks
    assert "credential_record" not in report.failed_checks


def test_runner_needs_empty_ledger(hospital_script):
    runner, _ = _run(hospital_script, stop_after="contract")
    with pytest.raises(ConfigError):
        ScenarioRunner(hospital_script, group_profile("test"), RandomSource(1), ledger=runner.ledger)


def test_replay_matches_live_state_after_scenario(hospital_script):
    runner, result = _run(hospital_script)
    replayed = ledger_fold.replay(runner.ledger.transactions())
    assert ledger_fold.state_hash(replayed) == result.state_hash
