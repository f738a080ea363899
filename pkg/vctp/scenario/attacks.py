"""
Набор атак: перехват набора обновления, подмена роли обновителя, сговор.

Каждая атака разворачивает больничный сценарий до нужного шага и проверяет,
что защита сработала.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Union

from ..config.settings import Settings
from ..core.protocol import VctpProtocol
from ..exceptions import (
    ConfigError,
    EnvelopeDecryptionFailed,
    PolicyNotSatisfied,
    VctpError,
    VoteGateFailed,
)
from ..models.crypto_models import GroupParams
from ..models.ledger_models import CredentialRecord, IssuerGrant
from ..models.protocol_models import Actor, ActorKind, SecureEnvelope
from ..models.scenario_models import ScenarioScript, VoteIntent
from ..models.template_models import CREDENTIAL, TRUST_PROXY, NextLevelIssuer, TrustProxySection
from ..services.keys import SigningIdentity
from ..services.rng import RandomSource
from ..utils.canonical import canonical_json
from .runner import ScenarioRunner

logger = logging.getLogger(__name__)

ATTACKER_DID = "did:example_attacker:9f1e4b7c2d8a6053"


@dataclass(frozen=True)
class DefenseCheck:
    name: str
    held: bool
    detail: str = ""


@dataclass
class AttackReport:
    """Результат одной атаки."""
    scenario: int
    title: str
    checks: List[DefenseCheck] = field(default_factory=list)

    @property
    def held(self) -> bool:
        return bool(self.checks) and all(check.held for check in self.checks)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scenario": self.scenario,
            "title": self.title,
            "held": self.held,
            "checks": [{"name": c.name, "held": c.held, "detail": c.detail} for c in self.checks],
        }


def expect_failure(name: str, action: Callable[[], Any], expected: type) -> DefenseCheck:
    """Защита держится, если действие атакующего падает с ожидаемой ошибкой."""
    try:
        action()
    except expected as e:
        return DefenseCheck(name, True, f"{type(e).__name__}: {e}")
    except VctpError as e:
        return DefenseCheck(name, False, f"unexpected {type(e).__name__}: {e}")
    return DefenseCheck(name, False, "attacker action succeeded")


class AttackSuite:
    """Атаки поверх встроенного больничного сценария."""

    TITLES = {
        1: "Secret information intercepts",
        2: "Impersonation",
        3: "Collusion",
    }

    def __init__(self,
                 params: GroupParams,
                 seed: Optional[int] = None,
                 script_path: Union[str, Path, None] = None):
        """
        Инициализация набора атак.

        Args:
            params: Параметры группы
            seed: Сид (None: энтропия ОС)
            script_path: Сценарий, на котором разворачиваются атаки
        """
        self.params = params
        self.seed = seed
        self.script_path = Path(script_path) if script_path else Settings.DEFAULT_SCENARIO

    def run(self, scenario: int) -> AttackReport:
        attacks = {1: self.intercept, 2: self.impersonate, 3: self.collude}
        if scenario not in attacks:
            raise ConfigError(f"Неизвестный сценарий атаки: {scenario}")
        logger.info("=" * 60)
        logger.info(f"🥷 АТАКА {scenario}: {self.TITLES[scenario]}")
        logger.info("=" * 60)
        report = attacks[scenario]()
        for check in report.checks:
            logger.info(f"{'🛡️' if check.held else '💥'} {check.name}: {check.detail}")
        return report

    def _world(self, stop_after: str) -> ScenarioRunner:
        runner = ScenarioRunner(ScenarioScript.load(self.script_path), self.params, RandomSource(self.seed))
        result = runner.run(stop_after=stop_after)
        failing = result.failing_step
        if failing is not None:
            raise ConfigError(f"Подготовка атаки остановилась на шаге {failing.name}: {failing.error}")
        return runner

    def _attacker(self, runner: ScenarioRunner, name: str = "eve", did: str = ATTACKER_DID) -> Actor:
        identity = SigningIdentity.generate(did, runner.rng.fork(f"attacker:{name}"))
        attacker = Actor(identity=identity, kind=ActorKind.VOTER, name=name)
        runner.protocol.register_actor(attacker)
        runner.actors[name] = attacker
        return attacker

    def intercept(self) -> AttackReport:
        """Перехваченный конверт не открывается чужим ключом."""
        runner = self._world(stop_after="kit")
        protocol: VctpProtocol = runner.protocol
        eve = self._attacker(runner)
        doctor = runner.actor("doctor")
        envelope = runner.envelopes["doctor"]

        report = AttackReport(1, self.TITLES[1])
        report.checks.append(expect_failure(
            "interceptor cannot decrypt envelope",
            lambda: protocol.open_update_kit(eve, envelope), EnvelopeDecryptionFailed,
        ))
        readdressed = SecureEnvelope(eve.did, envelope.sender_did, envelope.ciphertext, envelope.sender_signature)
        report.checks.append(expect_failure(
            "re-addressed envelope rejected",
            lambda: protocol.open_update_kit(eve, readdressed), EnvelopeDecryptionFailed,
        ))
        forged = SecureEnvelope(eve.did, eve.did, envelope.ciphertext)
        forged = SecureEnvelope(eve.did, eve.did, envelope.ciphertext, eve.identity.sign(forged.signed_message()))
        report.checks.append(expect_failure(
            "self-signed replay rejected",
            lambda: protocol.open_update_kit(eve, forged), EnvelopeDecryptionFailed,
        ))
        try:
            kit = protocol.open_update_kit(doctor, envelope)
            report.checks.append(DefenseCheck("intended recipient decrypts", kit.section_id == TRUST_PROXY,
                                              f"section {kit.section_id}"))
        except VctpError as e:
            report.checks.append(DefenseCheck("intended recipient decrypts", False, f"{type(e).__name__}: {e}"))
        return report

    def impersonate(self) -> AttackReport:
        """Ключи одних атрибутов не открывают trapdoor чужой секции."""
        runner = self._world(stop_after="attest-patient")
        protocol: VctpProtocol = runner.protocol
        sealed = runner.sealed
        signer_key = protocol.ledger.signing_key(sealed.signature.signer_did)
        patient = runner.actor("patient")
        doctor = runner.actor("doctor")
        nurse = runner.actor("nurse1")
        protocol.attest_attributes(nurse, ["nurse", "HospitalA"])
        eve = self._attacker(runner)

        hijack = canonical_json(TrustProxySection(
            patient.did, NextLevelIssuer(eve.did, ("delegate-medical-decision",))
        ).to_document())

        def update(actor: Actor, section_id: str, content: bytes) -> Callable[[], Any]:
            return lambda: protocol.pss.update_pch(
                sealed.template, sealed.signature, section_id, content,
                actor.attribute_key(), actor.identity, signer_key,
            )

        forged_credential = canonical_json({
            "Title": "Letter of Authority",
            "IssueDate": "2021-07-12",
            "Text": "forged",
            "signedBy": doctor.did,
            "credentialSubject": {"id": eve.did, "permissions": ["routine-medical-care"]},
        })

        report = AttackReport(2, self.TITLES[2])
        report.checks.append(expect_failure(
            "patient keys rejected on trust_proxy section",
            update(patient, TRUST_PROXY, hijack), PolicyNotSatisfied,
        ))
        report.checks.append(expect_failure(
            "nurse keys rejected on trust_proxy section",
            update(nurse, TRUST_PROXY, hijack), PolicyNotSatisfied,
        ))
        report.checks.append(expect_failure(
            "doctor keys rejected on credential section",
            update(doctor, CREDENTIAL, forged_credential), PolicyNotSatisfied,
        ))
        return report

    def collude(self) -> AttackReport:
        """Сговор прокси с частью персонала не проходит голосование."""
        runner = self._world(stop_after="kit")
        protocol: VctpProtocol = runner.protocol
        doctor = runner.actor("doctor")
        accomplice = self._attacker(runner, "mallory", "did:example_patient:3c7a9e1f5b2d8046")
        runner.script.voter_scripts["collusion"] = [
            VoteIntent("receptionist", "approve"),
            VoteIntent("doctor2", "approve"),
            VoteIntent("doctor2", "approve"),
            VoteIntent("doctor", "approve"),
            VoteIntent("nurse1", "reject"),
            VoteIntent("nurse2", "reject"),
            VoteIntent("nurse3", "reject"),
        ]
        issuers_before = {r.did for r in protocol.ledger.list_issuers()}

        report = AttackReport(3, self.TITLES[3])
        report.checks.append(expect_failure(
            "colluding onboarding blocked at vote gate",
            lambda: protocol.onboard_personal_issuer(
                doctor, runner.envelopes["doctor"], accomplice.did,
                ["delegate-medical-decision"], runner.vote_collector("collusion"),
            ),
            VoteGateFailed,
        ))

        sealed = runner.sealed
        bypass = CredentialRecord.build(
            combined_digest=sealed.signature.combined_digest.hex(),
            sigma=sealed.signature.sigma.hex(),
            template_id=sealed.template_id,
            version=sealed.version + 1,
            committed_by=doctor.did,
            section_id=TRUST_PROXY,
            content_digest="00" * 32,
        )
        report.checks.append(expect_failure(
            "ungated commit rejected",
            lambda: protocol.ledger.commit_credential(bypass, IssuerGrant(accomplice.did, 2)),
            VoteGateFailed,
        ))
        report.checks.append(expect_failure(
            "caller-supplied threshold rejected",
            lambda: protocol.ledger.commit_credential(bypass, IssuerGrant(accomplice.did, 2), votes_required=0),
            VoteGateFailed,
        ))

        issuers_after = {r.did for r in protocol.ledger.list_issuers()}
        report.checks.append(DefenseCheck(
            "issuer registry unchanged",
            issuers_after == issuers_before and accomplice.did not in issuers_after,
            f"{len(issuers_after)} issuers",
        ))
        return report
