import json

from vctp.core.pss import PolicySanitizableSignature
from vctp.models.protocol_models import Actor, ActorKind
from vctp.services import abe
from vctp.services.chameleon import ChameleonHash
from vctp.utils.data_manager import DataManager

from .conftest import DOCTOR_DID


def test_template_and_sidecar_reload(tmp_path, template, hospital_identity, rng, small_params):
    pss = PolicySanitizableSignature(ChameleonHash(small_params))
    universe = abe.setup(["doctor", "patient", "HospitalA"], rng.fork("universe"), small_params)
    signature = pss.hash_pch(template, universe, hospital_identity, rng.fork("hash"))

    manager = DataManager(str(tmp_path / "out"))
    template_path = manager.save_template(template, "t.json")
    sidecar_path = manager.save_sidecar(signature, "t.sig.json")

    loaded = manager.load_template(template_path)
    restored = manager.load_sidecar(sidecar_path)
    assert loaded == template
    assert restored.sigma == signature.sigma
    assert pss.verify_pch(loaded, restored, hospital_identity.public_key_hex)


def test_broken_files_load_as_none(tmp_path):
    manager = DataManager(str(tmp_path))
    (tmp_path / "bad.json").write_text("[1, 2", encoding="utf-8")
    (tmp_path / "sig.json").write_text(json.dumps({"sigma": "zz"}), encoding="utf-8")
    assert manager.load_template(str(tmp_path / "bad.json")) is None
    assert manager.load_template(str(tmp_path / "missing.json")) is None
    assert manager.load_sidecar(str(tmp_path / "sig.json")) is None
    assert manager.load_keystore(str(tmp_path / "missing.json")) == []


def test_keystore_reload(tmp_path, doctor_identity):
    manager = DataManager(str(tmp_path))
    actor = Actor(identity=doctor_identity, kind=ActorKind.TRUST_PROXY, name="doctor")
    path = manager.save_keystore([actor])
    (restored,) = manager.load_keystore(path)
    assert restored.did == DOCTOR_DID
    assert restored.identity.public_key_hex == doctor_identity.public_key_hex
    assert manager.get_output_files("keystore") == [path]
