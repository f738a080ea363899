"""
Исполнитель сценариев: акторы, генезис и шаги протокола по скрипту.
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterator, List, Optional

from ..core import voting
from ..core.ledger import Ledger
from ..core.protocol import VctpProtocol
from ..core.template_codec import serialize_canonical
from ..exceptions import ConfigError, VctpError
from ..models.crypto_models import GroupParams
from ..models.protocol_models import Actor, SealedTemplate, SecureEnvelope, VerificationReport
from ..models.scenario_models import ScenarioScript, ScenarioStep
from ..models.voting_models import VoteOption, VoteSubmission, VotingRequest
from ..services.keys import SigningIdentity
from ..services.rng import RandomSource

logger = logging.getLogger(__name__)


@dataclass
class StepOutcome:
    name: str
    actor: str
    action: str
    ok: bool
    detail: str = ""
    error: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "actor": self.actor,
            "action": self.action,
            "ok": self.ok,
            "detail": self.detail,
            "error": self.error,
        }


@dataclass
class ScenarioResult:
    """Итог прогона сценария."""
    name: str
    outcomes: List[StepOutcome] = field(default_factory=list)
    report: Optional[VerificationReport] = None
    sealed: Optional[SealedTemplate] = None
    state_hash: str = ""

    @property
    def passed(self) -> bool:
        return (all(o.ok for o in self.outcomes)
                and self.report is not None and self.report.passed)

    @property
    def failing_step(self) -> Optional[StepOutcome]:
        for outcome in self.outcomes:
            if not outcome.ok:
                return outcome
        return None

    def transcript(self) -> Dict[str, Any]:
        return {
            "scenario": self.name,
            "passed": self.passed,
            "steps": [o.to_dict() for o in self.outcomes],
            "verification": self.report.to_dict() if self.report else None,
            "state_hash": self.state_hash,
        }


class ScenarioRunner:
    """Прогон сценария на свежем реестре."""

    def __init__(self,
                 script: ScenarioScript,
                 params: GroupParams,
                 rng: RandomSource,
                 ledger: Optional[Ledger] = None):
        """
        Инициализация исполнителя.

        Args:
            script: Сценарий
            params: Параметры группы
            rng: Единый источник случайности
            ledger: Реестр (по умолчанию в памяти)
        """
        self.script = script
        self.rng = rng
        self.ledger = ledger or Ledger()
        if self.ledger.height:
            raise ConfigError("Сценарий выполняется только на пустом реестре")
        self.clock = script.make_clock()
        self.protocol = VctpProtocol(self.ledger, params, rng, self.clock)

        self.actors: Dict[str, Actor] = {}
        self.genesis: Dict[str, Any] = {}
        self.template_document: bytes = b""
        self.sealed: Optional[SealedTemplate] = None
        self.envelopes: Dict[str, SecureEnvelope] = {}
        self.report: Optional[VerificationReport] = None

        self._actions: Dict[str, Callable[[Actor, ScenarioStep], str]] = {
            "deploy_contract": self._deploy_contract,
            "issue_roles": self._issue_roles,
            "l1_setup": self._l1_setup,
            "attest": self._attest,
            "send_update_kit": self._send_update_kit,
            "onboard": self._onboard,
            "issue": self._issue,
            "verify": self._verify,
        }

    def prepare(self) -> None:
        """Генерация ключей акторов, регистрация DID и генезис."""
        try:
            self.genesis = json.loads(self.script.genesis_path.read_text(encoding="utf-8"))
            self.template_document = self.script.template_path.read_bytes()
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Не удалось загрузить генезис или шаблон: {e}")

        for spec in self.script.actors:
            identity = SigningIdentity.generate(spec.did, self.rng.fork(f"actor:{spec.name}"))
            actor = Actor(identity=identity, kind=spec.kind, name=spec.name)
            self.actors[spec.name] = actor
            self.protocol.register_actor(actor)
        self.ledger.apply_genesis(self.genesis, {})

    def actor(self, name: str) -> Actor:
        if name not in self.actors:
            raise ConfigError(f"Актор не объявлен: {name}")
        return self.actors[name]

    def run_step(self, step: ScenarioStep) -> StepOutcome:
        """Выполнение одного шага; ошибки протокола становятся исходом шага."""
        self.clock.advance(step.at)
        action = self._actions.get(step.action)
        if action is None:
            return StepOutcome(step.name, step.actor, step.action, False,
                               f"unknown action {step.action}", "ConfigError")
        try:
            detail = action(self.actor(step.actor), step)
            ok = step.action != "verify" or (self.report is not None and self.report.passed)
            return StepOutcome(step.name, step.actor, step.action, ok, detail,
                               None if ok else "VerificationFailed")
        except VctpError as e:
            logger.error(f"❌ Шаг {step.name}: {type(e).__name__}: {e}")
            return StepOutcome(step.name, step.actor, step.action, False, str(e), type(e).__name__)
        except KeyError as e:
            return StepOutcome(step.name, step.actor, step.action, False, f"missing parameter {e}", "ConfigError")

    def run(self, stop_after: Optional[str] = None) -> ScenarioResult:
        """
        Прогон всех шагов до первой ошибки.

        Args:
            stop_after: Имя шага, после которого остановиться

        Returns:
            Итог со стенограммой и хешем состояния
        """
        logger.info("=" * 60)
        logger.info(f"🎬 СЦЕНАРИЙ: {self.script.name}")
        logger.info("=" * 60)
        self.prepare()
        result = ScenarioResult(self.script.name)
        for step in self.script.steps:
            outcome = self.run_step(step)
            result.outcomes.append(outcome)
            status = "✅" if outcome.ok else "❌"
            logger.info(f"{status} {step.name} ({step.actor}: {step.action}) {outcome.detail}")
            if not outcome.ok or step.name == stop_after:
                break
        result.report = self.report
        result.sealed = self.sealed
        result.state_hash = self.ledger.state_hash()
        return result

    # --- голосующие -----------------------------------------------------------

    def vote_collector(self, script_name: Optional[str]) -> Callable[[VotingRequest], Iterator[VoteSubmission]]:
        if script_name and script_name not in self.script.voter_scripts:
            raise ConfigError(f"Сценарий голосования не объявлен: {script_name}")
        intents = self.script.voter_scripts.get(script_name, []) if script_name else []

        def collect(req: VotingRequest) -> Iterator[VoteSubmission]:
            for intent in intents:
                voter = self.actor(intent.voter)
                credential = voter.role_credential()
                if credential is None:
                    logger.warning(f"⚠️ У {voter.name} нет ролевого креденшала, голос пропущен")
                    continue
                yield voting.seal_ballot(req, credential, VoteOption(intent.option), voter.identity, self.rng)

        return collect

    # --- действия -------------------------------------------------------------

    def _deploy_contract(self, actor: Actor, step: ScenarioStep) -> str:
        self.protocol.deploy_voting_contract(actor)
        return "voting contract deployed"

    def _issue_roles(self, actor: Actor, step: ScenarioStep) -> str:
        if self.protocol.admin is None or self.protocol.admin.did != actor.did:
            raise ConfigError(f"{actor.name} не системный администратор")
        grants = step.parameters.get("grants", [])
        for grant in grants:
            self.protocol.issue_role(self.actor(grant["subject"]), grant["role"], grant["organization"])
        return f"{len(grants)} role credentials"

    def _l1_setup(self, actor: Actor, step: ScenarioStep) -> str:
        attributes = step.parameters.get("attributes", self.genesis.get("attributes", []))
        self.sealed = self.protocol.l1_setup(actor, attributes, self.template_document)
        return f"record {self.sealed.record_id[:16]}"

    def _attest(self, actor: Actor, step: ScenarioStep) -> str:
        attributes = step.parameters["attributes"]
        self.protocol.attest_attributes(actor, attributes)
        return f"attributes {sorted(attributes)}"

    def _send_update_kit(self, actor: Actor, step: ScenarioStep) -> str:
        if self.sealed is None:
            raise ConfigError("Шаблон еще не подписан")
        recipient = self.actor(step.parameters["recipient"])
        section = step.parameters.get("section", "trust_proxy")
        self.envelopes[recipient.name] = self.protocol.send_update_kit(actor, recipient.did, self.sealed, section)
        return f"kit for {section} to {recipient.name}"

    def _onboard(self, actor: Actor, step: ScenarioStep) -> str:
        envelope = self.envelopes.get(actor.name)
        if envelope is None:
            raise ConfigError(f"{actor.name} не получал набор обновления")
        new_issuer = self.actor(step.parameters["new_issuer"])
        outcome = self.protocol.onboard_personal_issuer(
            actor, envelope, new_issuer.did, step.parameters.get("permissions", []),
            self.vote_collector(step.parameters.get("voters")),
        )
        self.sealed = outcome.sealed
        return f"{new_issuer.name} onboarded, version {outcome.sealed.version}"

    def _issue(self, actor: Actor, step: ScenarioStep) -> str:
        if self.sealed is None:
            raise ConfigError("Шаблон еще не подписан")
        holder = self.actor(step.parameters["holder"])
        outcome = self.protocol.issue_credential(
            actor, self.sealed, holder.did, step.parameters.get("permissions", []),
            self.vote_collector(step.parameters.get("voters")),
        )
        self.sealed = outcome.sealed
        return f"issued to {holder.name}, version {outcome.sealed.version}"

    def _verify(self, actor: Actor, step: ScenarioStep) -> str:
        if self.sealed is None:
            raise ConfigError("Шаблон еще не подписан")
        self.report = self.protocol.verify_presentation(actor, self.sealed.template, self.sealed.signature)
        if self.report.passed:
            return "all checks passed"
        return "failed: " + ", ".join(self.report.failed_checks)

    def final_template(self) -> bytes:
        return serialize_canonical(self.sealed.template) if self.sealed else b""
