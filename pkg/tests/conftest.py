"""
Общие фикстуры тестов.
"""

import pytest

from vctp.config.settings import Settings
from vctp.core.template_codec import parse
from vctp.models.crypto_models import group_profile
from vctp.models.scenario_models import ScenarioScript
from vctp.services.keys import SigningIdentity
from vctp.services.rng import RandomSource

HOSPITAL_DID = "did:example_hos:fcgfc2g823fcdd387"
DOCTOR_DID = "did:example_doctor:fcgfc2g823fcdd387"
PATIENT_DID = "did:example_patient:fcgfc2g823fcdd387"
HOLDER_DID = "did:example_holder:fcgfc2g823fcdd387"


@pytest.fixture
def test_params():
    return group_profile("test")


@pytest.fixture
def small_params():
    return group_profile("small")


@pytest.fixture
def rng():
    return RandomSource(1234)


@pytest.fixture
def template_bytes():
    return (Settings.DATA_DIR / "letter_of_authority.json").read_bytes()


@pytest.fixture
def template(template_bytes):
    return parse(template_bytes)


@pytest.fixture
def hospital_script():
    return ScenarioScript.load(Settings.DEFAULT_SCENARIO)


@pytest.fixture
def hospital_identity(rng):
    return SigningIdentity.generate(HOSPITAL_DID, rng.fork("hospital"))


@pytest.fixture
def doctor_identity(rng):
    return SigningIdentity.generate(DOCTOR_DID, rng.fork("doctor"))
