import json

import pytest

from vctp.main import EXIT_FAILURE, EXIT_NOT_FOUND, EXIT_OK, main
from vctp.models.scenario_models import ScenarioScript
from vctp.config.settings import Settings


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def _scenario(workdir, *extra):
    return main([
        "scenario", "--profile", "test", "--seed", "3",
        "--output-dir", str(workdir / "out"), "--ledger", str(workdir / "ledger.jsonl"), *extra,
    ])


def test_scenario_writes_artifacts(workdir):
    assert _scenario(workdir) == EXIT_OK
    out = workdir / "out"
    for name in ("hospital.html", "hospital_transcript.json", "hospital_transcript.txt",
                 "hospital_template.json", "hospital_template.sig.json", "hospital_verification.json",
                 "hospital_keystore.json", "hospital_summary.json"):
        assert (out / name).exists(), name
    transcript = json.loads((out / "hospital_transcript.json").read_text(encoding="utf-8"))
    assert transcript["passed"]
    assert "did:example_patient" in (out / "hospital.html").read_text(encoding="utf-8")


def test_registry_reads_scenario_ledger(workdir, capsys):
    assert _scenario(workdir) == EXIT_OK
    transcript = json.loads((workdir / "out" / "hospital_transcript.json").read_text(encoding="utf-8"))
    capsys.readouterr()

    ledger = ["--ledger", str(workdir / "ledger.jsonl")]
    assert main(["registry", "state-hash", *ledger]) == EXIT_OK
    assert capsys.readouterr().out.strip() == transcript["state_hash"]

    assert main(["registry", "issuer-list", *ledger]) == EXIT_OK

    assert main(["registry", "credential-show", "00" * 32, *ledger]) == EXIT_NOT_FOUND


def test_failing_scenario_names_step(workdir, capsys):
    script = json.loads(Settings.DEFAULT_SCENARIO.read_text(encoding="utf-8"))
    script["voter_scripts"]["ward"] = [v for v in script["voter_scripts"]["ward"] if v["voter"] != "doctor"]
    script["template"] = str(Settings.DATA_DIR / "letter_of_authority.json")
    script["genesis"] = str(Settings.DATA_DIR / "genesis.json")
    path = workdir / "four_votes.scenario"
    path.write_text(json.dumps(script), encoding="utf-8")
    assert ScenarioScript.load(path).name == "hospital"

    capsys.readouterr()
    assert main(["scenario", str(path), "--profile", "test", "--seed", "3",
                 "--output-dir", str(workdir / "out")]) == EXIT_FAILURE
    assert "VoteGateFailed at step onboard" in capsys.readouterr().out


def test_did_register(workdir):
    ledger = ["--ledger", str(workdir / "reg.jsonl"), "--output-dir", str(workdir / "keys")]
    assert main(["registry", "did-register", "did:example_nurse:42", "--seed", "1", *ledger]) == EXIT_OK
    assert (workdir / "keys" / "did_example_nurse_42.key.json").exists()
    assert main(["registry", "did-register", "did:example_nurse:42", *ledger]) == EXIT_FAILURE


def test_registry_needs_existing_ledger(workdir):
    assert main(["registry", "issuer-list", "--ledger", str(workdir / "missing.jsonl")]) == EXIT_FAILURE


@pytest.mark.parametrize("scenario", ["1", "3"])
def test_attack_command(workdir, scenario):
    assert main(["attack", scenario, "--profile", "test", "--seed", "5",
                 "--output-dir", str(workdir / "out")]) == EXIT_OK
    assert (workdir / "out" / f"attack_{scenario}.json").exists()


def test_bad_config_file(workdir):
    config = workdir / "config.json"
    config.write_text(json.dumps({"crypto": {"profile": "huge"}}), encoding="utf-8")
    assert main(["attack", "1", "--config", str(config)]) == EXIT_FAILURE


def _verify(workdir, *extra):
    out = workdir / "out"
    return main([
        "verify", str(out / "hospital_template.json"), str(out / "hospital_template.sig.json"),
        "--profile", "test", "--ledger", str(workdir / "ledger.jsonl"),
        "--output-dir", str(workdir / "checks"), *extra,
    ])


def test_verify_saved_presentation(workdir, capsys):
    assert _scenario(workdir) == EXIT_OK
    capsys.readouterr()
    keystore = str(workdir / "out" / "hospital_keystore.json")
    assert _verify(workdir, "--at", "2021-07-13T00:00:00Z", "--keystore", keystore,
                   "--verifier", "did:example_physio:fcgfc2g823fcdd387") == EXIT_OK
    assert "пройдена" in capsys.readouterr().out
    report = json.loads((workdir / "checks" / "hospital_template_verification.json").read_text(encoding="utf-8"))
    assert report["passed"]
    assert report["holder_did"] == "did:example_holder:fcgfc2g823fcdd387"


def test_verify_reports_expiry_and_tamper(workdir):
    assert _scenario(workdir) == EXIT_OK
    assert _verify(workdir, "--at", "2021-08-01T00:00:00Z") == EXIT_FAILURE
    expired = json.loads((workdir / "checks" / "hospital_template_verification.json").read_text(encoding="utf-8"))
    assert [c["name"] for c in expired["checks"] if not c["passed"]] == ["expiry"]

    path = workdir / "out" / "hospital_template.json"
    path.write_text(path.read_text(encoding="utf-8").replace("OutPatient", "InPatient"), encoding="utf-8")
    assert _verify(workdir, "--at", "2021-07-13T00:00:00Z") == EXIT_FAILURE
    tampered = json.loads((workdir / "checks" / "hospital_template_verification.json").read_text(encoding="utf-8"))
    assert "signature" in [c["name"] for c in tampered["checks"] if not c["passed"]]


def test_verify_rejects_bad_inputs(workdir):
    assert _scenario(workdir) == EXIT_OK
    assert _verify(workdir, "--at", "yesterday") == EXIT_FAILURE
    assert _verify(workdir, "--verifier", "did:example_physio:fcgfc2g823fcdd387") == EXIT_FAILURE
    assert main(["verify", str(workdir / "missing.json"), str(workdir / "missing.sig.json"),
                 "--ledger", str(workdir / "ledger.jsonl")]) == EXIT_FAILURE
