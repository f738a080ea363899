"""
Оркестратор протокола распространения доверия.

Фазы: настройка эмитента L1, онбординг персонального эмитента прокси
доверия, выпуск креденшала персональным эмитентом, проверка верификатором.
"""

import hashlib
import json
import logging
from datetime import datetime, timezone
from typing import Any, Callable, Dict, Iterable, List, Optional, Union

from ..exceptions import (
    AttestationFailed,
    EnvelopeDecryptionFailed,
    IssuerNotOnboarded,
    NotL1Issuer,
    PermissionDenied,
    PolicyNotSatisfied,
    ProtocolError,
    SectionNotUpdatable,
    UnknownAdmin,
    UnknownDid,
    UnknownSection,
)
from ..models.crypto_models import AttributeUniverse, GroupParams
from ..models.ledger_models import CredentialRecord, IssuerGrant
from ..models.protocol_models import (
    Actor,
    SealedTemplate,
    SecureEnvelope,
    UpdateKit,
    UpdateOutcome,
    VerificationCheck,
    VerificationReport,
)
from ..models.signature_models import SanitizableSignature
from ..models.template_models import (
    CREDENTIAL,
    TRUST_PROXY,
    CredentialSection,
    CredentialSubject,
    NextLevelIssuer,
    TrustPropagationTemplate,
    TrustProxySection,
)
from ..models.voting_models import PendingUpdate, VoteStatus, VoteSubmission, VotingRequest
from ..services import abe
from ..services.chameleon import ChameleonHash
from ..services.keys import (
    SealedBoxError,
    ddo_agreement_key,
    open_sealed,
    seal,
    verify_signature,
)
from ..services.rng import RandomSource
from ..utils.canonical import canonical_json
from .ledger import Ledger
from .pss import PolicySanitizableSignature
from .template_codec import (
    credential_section,
    parse,
    section_bytes,
    serialize_canonical,
    trust_proxy_section,
)
from .voting import VotingContract

logger = logging.getLogger(__name__)

PROPAGATE_TRUST = "propagate-trust"

VoteCollector = Callable[[VotingRequest], Iterable[VoteSubmission]]


def template_digest(t: TrustPropagationTemplate) -> str:
    return hashlib.sha256(serialize_canonical(t)).hexdigest()


class VctpProtocol:
    """Протокол поверх общего реестра и контракта голосования."""

    def __init__(self,
                 ledger: Ledger,
                 params: GroupParams,
                 rng: RandomSource,
                 clock: Optional[Callable[[], datetime]] = None):
        """
        Инициализация протокола.

        Args:
            ledger: Реестр
            params: Параметры группы
            rng: Единый источник случайности
            clock: Часы (для детерминированных сценариев)
        """
        self.ledger = ledger
        self.params = params
        self.rng = rng
        self.clock = clock or (lambda: datetime.now(timezone.utc))

        self.chameleon = ChameleonHash(params)
        self.pss = PolicySanitizableSignature(self.chameleon)
        self.contract: Optional[VotingContract] = None
        self.admin: Optional[Actor] = None
        self.authority: Optional[Actor] = None
        self.universe: Optional[AttributeUniverse] = None
        self.actors: Dict[str, Actor] = {}

        self.stats = {
            "hash_pch": 0,
            "update_pch": 0,
            "verify_pch": 0,
            "votes_submitted": 0,
            "commits": 0,
            "errors": [],
        }

    # --- акторы и голосование -------------------------------------------------

    def register_actor(self, actor: Actor) -> int:
        """Регистрация DID актора; возвращает индекс транзакции."""
        tx = self.ledger.register_did(actor.did, actor.identity.ddo())
        self.actors[actor.did] = actor
        logger.info(f"👤 {actor.name or actor.kind.value} зарегистрирован: {actor.did}")
        return tx.index

    def deploy_voting_contract(self, admin: Actor) -> VotingContract:
        """
        Системный администратор разворачивает контракт голосования.

        Администратор из генезиса обязателен; если его нет, реестр
        закрепляет первого развернувшего.
        """
        if admin.did not in self.ledger.snapshot().did_registry:
            raise UnknownDid(f"DID администратора не зарегистрирован: {admin.did}")
        bound = self.ledger.snapshot().voting_admin
        if bound is None:
            self.ledger.assign_voting_admin(admin.did)
        elif bound != admin.did:
            raise UnknownAdmin(f"Администратор голосования в реестре: {bound}, а не {admin.did}")
        self.admin = admin
        self.contract = VotingContract.create(
            admin.identity, self.ledger.signing_key, self.rng.fork("voting-contract"), self.clock
        )
        return self.contract

    def issue_role(self, subject: Actor, role: str, organization: str) -> None:
        """Ролевой креденшал от администратора."""
        credential = self._contract().issue_role_credential(self.admin.identity, subject.did, role, organization)
        subject.role_credentials.append(credential)

    def _contract(self) -> VotingContract:
        if self.contract is None or self.admin is None:
            raise ProtocolError("Контракт голосования не развернут")
        return self.contract

    # --- фаза 1: эмитент L1 -------------------------------------------------------

    def _require_l1(self, actor: Actor) -> None:
        record = self.ledger.lookup_issuer(actor.did)
        if record is None or record.level != 1:
            raise NotL1Issuer(f"{actor.did} не является эмитентом L1")

    def l1_setup(self,
                 actor: Actor,
                 attribute_names: List[str],
                 template_source: Union[bytes, str, TrustPropagationTemplate]) -> SealedTemplate:
        """
        Эмитент L1 создает универсум атрибутов и подписывает шаблон.

        Args:
            actor: Эмитент L1
            attribute_names: Универсум атрибутов
            template_source: Документ шаблона или разобранный шаблон

        Returns:
            Подписанный шаблон, записанный в реестр креденшалов

        Raises:
            NotL1Issuer: актор не эмитент L1 или не officialIssuer шаблона
        """
        logger.info("=" * 60)
        logger.info(f"🏥 НАСТРОЙКА ЭМИТЕНТА L1: {actor.did}")
        logger.info("=" * 60)
        self._require_l1(actor)

        template = template_source if isinstance(template_source, TrustPropagationTemplate) else parse(template_source)
        if template.update_policy.official_issuer != actor.did:
            raise NotL1Issuer(f"officialIssuer шаблона {template.update_policy.official_issuer}, а не {actor.did}")

        if self.universe is None:
            self.universe = abe.setup(attribute_names, self.rng, self.params)
            self.authority = actor
            self.ledger.publish_attributes(actor.did, self.universe.public_dict())

        signature = self.pss.hash_pch(template, self.universe, actor.identity, self.rng)
        self.stats["hash_pch"] += 1
        record = CredentialRecord.build(
            combined_digest=signature.combined_digest.hex(),
            sigma=signature.sigma.hex(),
            template_id=template.template_id,
            version=template.version,
            committed_by=actor.did,
        )
        self.ledger.commit_credential(record, votes_required=template.update_policy.num_votes_required)
        self.stats["commits"] += 1
        logger.info(f"✅ Шаблон {template.template_id} подписан, запись {record.record_id[:12]}")
        return SealedTemplate(template, signature, record.record_id)

    def attest_attributes(self, actor: Actor, requested: Iterable[str]) -> None:
        """
        Аттестация атрибутов у генератора ключей L1 по ролевым креденшалам.

        Raises:
            AttestationFailed: креденшалы не подтверждают запрошенные атрибуты
        """
        if self.universe is None or self.contract is None:
            raise AttestationFailed("Генератор ключей атрибутов не настроен")
        requested = sorted(set(requested))
        attested = set()
        for credential in actor.role_credentials:
            if credential.subject_did == actor.did and self.contract.verify_role_credential(credential):
                attested |= {credential.role, credential.organization}
        missing = [name for name in requested if name not in attested]
        if missing:
            raise AttestationFailed(f"{actor.did}: атрибуты не подтверждены: {', '.join(missing)}")
        actor.attribute_keys.append(abe.keygen(self.universe, actor.did, requested))
        logger.info(f"🔐 {actor.did} получил ключ атрибутов {requested}")

    # --- защищенный канал -----------------------------------------------------

    def send_update_kit(self,
                        sender: Actor,
                        recipient_did: str,
                        sealed: SealedTemplate,
                        section_id: str) -> SecureEnvelope:
        """
        Отправка набора обновителя по защищенному каналу.

        Args:
            sender: Эмитент L1
            recipient_did: DID получателя
            sealed: Подписанный шаблон
            section_id: Изменяемая секция

        Returns:
            Конверт, зашифрованный ключом согласования получателя
        """
        self._require_l1(sender)
        section = sealed.template.find_section(section_id)
        if section is None:
            raise UnknownSection(section_id)
        if not section.updatable:
            raise SectionNotUpdatable(section_id)
        record = sealed.signature.record(section_id)
        kit = UpdateKit(
            template_id=sealed.template_id,
            version=sealed.version,
            record_id=sealed.record_id,
            template_digest=template_digest(sealed.template),
            section_id=section_id,
            hk=record.hk,
            etd=record.etd,
            template_document=serialize_canonical(sealed.template),
            signature=sealed.signature,
        )
        recipient_key = ddo_agreement_key(self.ledger.resolve_did(recipient_did))
        ciphertext = seal(recipient_key, canonical_json(kit.to_dict()), self.rng, aad=recipient_did.encode("utf-8"))
        envelope = SecureEnvelope(recipient_did, sender.did, ciphertext)
        envelope = SecureEnvelope(recipient_did, sender.did, ciphertext, sender.identity.sign(envelope.signed_message()))
        logger.info(f"📦 Набор обновления {section_id} отправлен {recipient_did}")
        return envelope

    def open_update_kit(self, recipient: Actor, envelope: SecureEnvelope) -> UpdateKit:
        """
        Расшифровка конверта получателем.

        Raises:
            EnvelopeDecryptionFailed: конверт не для этого ключа, поврежден
                или подпись отправителя не сходится
        """
        sender_key = self.ledger.signing_key(envelope.sender_did)
        if not sender_key or not verify_signature(sender_key, envelope.signed_message(), envelope.sender_signature):
            raise EnvelopeDecryptionFailed(f"Подпись отправителя {envelope.sender_did} не сходится")
        try:
            plain = open_sealed(recipient.identity.agreement_key, envelope.ciphertext,
                                aad=envelope.recipient_did.encode("utf-8"))
            kit = UpdateKit.from_dict(json.loads(plain.decode("utf-8")))
        except (SealedBoxError, ValueError, KeyError) as e:
            raise EnvelopeDecryptionFailed(f"{recipient.did} не может открыть конверт: {e}")
        if kit.template_digest != hashlib.sha256(kit.template_document).hexdigest():
            raise EnvelopeDecryptionFailed("Дайджест шаблона в наборе не совпадает")
        return kit

    # --- обновления с голосованием ----------------------------------------------

    def _collect_votes(self, req: VotingRequest, voters: Optional[VoteCollector]) -> VotingRequest:
        contract = self._contract()
        self.ledger.open_vote(req, at=self.clock())
        for submission in (voters(req) if voters else ()):
            current, _ = self.ledger.submit_vote(contract, submission)
            self.stats["votes_submitted"] += 1
            if current.status is not VoteStatus.OPEN:
                break
        current = self.ledger.voting_request(req.request_id)
        if current.status is VoteStatus.OPEN and voting_open_at(current, self.clock()):
            self.ledger.close_vote(req.request_id, self.admin.did)
            current = self.ledger.voting_request(req.request_id)
        logger.info(f"🗳️ Голосование {req.request_id[:12]}: {current.status.value} "
                    f"({current.accepted_approvals}/{current.threshold})")
        return current

    def _commit_update(self,
                       updater: Actor,
                       template: TrustPropagationTemplate,
                       signature: SanitizableSignature,
                       section_id: str,
                       voters: Optional[VoteCollector],
                       issuer_grant: Optional[IssuerGrant] = None) -> UpdateOutcome:
        policy = template.update_policy
        content_digest = hashlib.sha256(section_bytes(template, section_id)).hexdigest()
        start = self.ledger.height

        request = None
        if policy.num_votes_required > 0:
            pending = PendingUpdate(section_id, content_digest, updater.did, template.version)
            request = self._collect_votes(self._contract().open_request(pending, policy), voters)

        record = CredentialRecord.build(
            combined_digest=signature.combined_digest.hex(),
            sigma=signature.sigma.hex(),
            template_id=template.template_id,
            version=template.version,
            committed_by=updater.did,
            gate=request.request_id if request else None,
            section_id=section_id,
            content_digest=content_digest,
        )
        self.ledger.commit_credential(record, issuer_grant, at=self.clock())
        self.stats["commits"] += 1
        return UpdateOutcome(
            sealed=SealedTemplate(template, signature, record.record_id),
            record=record,
            request=request,
            transactions=tuple(range(start, self.ledger.height)),
        )

    def _update(self, updater: Actor, sealed: SealedTemplate, section_id: str, content: Dict[str, Any],
                etd=None):
        key = updater.attribute_key()
        section = sealed.template.find_section(section_id)
        if key is None:
            missing = section.update_policy_attrs.required_attributes if section else ()
            raise PolicyNotSatisfied(missing)
        signer_key = self.ledger.signing_key(sealed.signature.signer_did) or ""
        updated, signature = self.pss.update_pch(
            sealed.template, sealed.signature, section_id, canonical_json(content),
            key, updater.identity, signer_key, etd=etd, resolve_key=self.ledger.signing_key,
        )
        self.stats["update_pch"] += 1
        return updated, signature

    # --- фаза 2: онбординг ----------------------------------------------------

    def onboard_personal_issuer(self,
                                proxy: Actor,
                                envelope: SecureEnvelope,
                                new_issuer_did: str,
                                permissions: List[str],
                                voters: Optional[VoteCollector] = None) -> UpdateOutcome:
        """
        Прокси доверия вписывает следующего эмитента в секцию trust_proxy.

        Args:
            proxy: Прокси доверия с ключом атрибутов
            envelope: Конверт с набором обновления
            new_issuer_did: DID персонального эмитента
            permissions: Разрешения нового эмитента
            voters: Сбор голосов по запросу

        Returns:
            Обновленный шаблон и записи реестра

        Raises:
            PolicyNotSatisfied, VoteGateFailed, StaleSignature, PermissionDenied
        """
        logger.info("=" * 60)
        logger.info(f"🤝 ОНБОРДИНГ: {proxy.did} -> {new_issuer_did}")
        logger.info("=" * 60)
        kit = self.open_update_kit(proxy, envelope)
        if kit.section_id != TRUST_PROXY:
            raise SectionNotUpdatable(f"Набор для секции {kit.section_id}, нужен {TRUST_PROXY}")
        template = parse(kit.template_document)
        if PROPAGATE_TRUST not in template.update_policy.policy.permissions:
            raise PermissionDenied(f"Политика {template.template_id} не разрешает {PROPAGATE_TRUST}")
        if new_issuer_did not in self.ledger.snapshot().did_registry:
            raise UnknownDid(f"DID нового эмитента не зарегистрирован: {new_issuer_did}")
        if trust_proxy_section(template).instantiated:
            raise ProtocolError(f"Экземпляр {template.template_id} уже содержит онбординг")

        sealed = SealedTemplate(template, kit.signature, kit.record_id)
        content = TrustProxySection(proxy.did, NextLevelIssuer(new_issuer_did, tuple(permissions))).to_document()
        updated, signature = self._update(proxy, sealed, TRUST_PROXY, content, etd=kit.etd)

        official = self.ledger.lookup_issuer(template.update_policy.official_issuer)
        grant = IssuerGrant(new_issuer_did, (official.level if official else 1) + 1)
        outcome = self._commit_update(proxy, updated, signature, TRUST_PROXY, voters, grant)
        logger.info(f"✅ {new_issuer_did} стал эмитентом уровня {grant.level}")
        return outcome

    # --- фаза 3: выпуск -------------------------------------------------------

    def _require_onboarded(self, issuer: Actor, template: TrustPropagationTemplate) -> None:
        record = self.ledger.lookup_issuer(issuer.did)
        if record is None:
            raise IssuerNotOnboarded(f"{issuer.did} отсутствует в реестре эмитентов")
        proxy = trust_proxy_section(template)
        if not proxy.instantiated:
            raise IssuerNotOnboarded(f"В {template.template_id} нет онбординга, trust_proxy не заполнен")
        if proxy.next_level_issuer.id != issuer.did:
            raise IssuerNotOnboarded(
                f"Экземпляр {template.template_id} выдан {proxy.next_level_issuer.id}, а не {issuer.did}"
            )
        onboarding = self.ledger.lookup_credential(record.template_ref) if record.template_ref else None
        if onboarding is None or onboarding.template_id != template.template_id:
            raise IssuerNotOnboarded(f"Онбординг {issuer.did} не относится к {template.template_id}")

    def issue_credential(self,
                         personal_issuer: Actor,
                         sealed: SealedTemplate,
                         holder_did: str,
                         permissions: List[str],
                         voters: Optional[VoteCollector] = None) -> UpdateOutcome:
        """
        Персональный эмитент выпускает креденшал держателю.

        Raises:
            IssuerNotOnboarded: эмитент не вписан в trust_proxy этого
                экземпляра или его онбординг относится к другому шаблону
            PolicyNotSatisfied: ключ не покрывает nextLevelIssuerAttrs
        """
        logger.info("=" * 60)
        logger.info(f"📜 ВЫПУСК: {personal_issuer.did} -> {holder_did}")
        logger.info("=" * 60)
        self._require_onboarded(personal_issuer, sealed.template)
        current = credential_section(sealed.template)
        content = CredentialSection(
            title=current.title,
            issue_date=self.clock().date(),
            text=current.text,
            signed_by=personal_issuer.did,
            credential_subject=CredentialSubject(holder_did, tuple(permissions)),
        ).to_document()
        updated, signature = self._update(personal_issuer, sealed, CREDENTIAL, content)
        outcome = self._commit_update(personal_issuer, updated, signature, CREDENTIAL, voters)
        logger.info(f"✅ Креденшал выпущен {holder_did}")
        return outcome

    # --- фаза 4: проверка -----------------------------------------------------

    def verify_presentation(self,
                            verifier: Optional[Actor],
                            template: TrustPropagationTemplate,
                            signature: SanitizableSignature,
                            now: Optional[datetime] = None) -> VerificationReport:
        """
        Проверка предъявленного креденшала.

        Число обращений к реестрам не зависит от глубины цепочки эмитентов.

        Args:
            verifier: Верификатор
            template: Шаблон
            signature: Санитизируемая подпись
            now: Момент проверки

        Returns:
            Отчет со списком проверок
        """
        now = now or self.clock()
        checks: List[VerificationCheck] = []
        state = self.ledger.snapshot()

        signer_record = state.did_registry.get(signature.signer_did)
        signer_key = self.ledger.signing_key(signature.signer_did) or ""
        decision = self.pss.verify_pch(template, signature, signer_key, self.ledger.signing_key)
        self.stats["verify_pch"] += 1
        checks.append(VerificationCheck("signature", bool(decision) and signer_record is not None,
                                        "; ".join(decision.reasons) or "verify_pch = 1"))

        official = state.issuer_registry.get(signature.signer_did)
        checks.append(VerificationCheck(
            "official_issuer",
            official is not None and official.level == 1
            and template.update_policy.official_issuer == signature.signer_did,
            f"{signature.signer_did} level {official.level if official else 'absent'}",
        ))

        record = self.ledger.find_credential(template.template_id, template.version)
        matches = (record is not None
                   and record.combined_digest == signature.combined_digest.hex()
                   and record.sigma == signature.sigma.hex())
        checks.append(VerificationCheck(
            "credential_record", matches,
            record.record_id if record else f"no record for {template.template_id} v{template.version}",
        ))

        credential = credential_section(template)
        issuer = state.issuer_registry.get(credential.signed_by)
        checks.append(VerificationCheck(
            "issuer_registry", credential.issued and issuer is not None,
            f"{credential.signed_by} level {issuer.level}" if issuer else f"{credential.signed_by} not an issuer",
        ))

        unresolved = [did for did in (credential.signed_by, credential.credential_subject.id)
                      if did not in state.did_registry]
        bad_keys = [e.updater_did for e in signature.updater_endorsements
                    if self.ledger.signing_key(e.updater_did) != e.public_key_hex]
        detail = []
        if unresolved:
            detail.append("unresolved: " + ", ".join(unresolved))
        if bad_keys:
            detail.append("endorsement key mismatch: " + ", ".join(sorted(set(bad_keys))))
        checks.append(VerificationCheck("did_resolution", not unresolved and not bad_keys,
                                        "; ".join(detail) or "holder and issuer resolved"))

        policy = template.update_policy
        valid = policy.issuance_date <= now < policy.expiration_date
        checks.append(VerificationCheck(
            "expiry", valid, f"valid until {policy.expiration_date.isoformat()}",
        ))

        report = VerificationReport(
            template_id=template.template_id,
            version=template.version,
            holder_did=credential.credential_subject.id,
            issuer_did=credential.signed_by,
            checks=tuple(checks),
        )
        who = verifier.did if verifier else "anonymous"
        if report.passed:
            logger.info(f"✅ Проверка {who}: креденшал действителен")
        else:
            logger.warning(f"❌ Проверка {who}: не пройдены {list(report.failed_checks)}")
        return report


def voting_open_at(req: VotingRequest, now: datetime) -> bool:
    """Запрос еще не истек к моменту now."""
    return req.expires_at is None or now < req.expires_at
