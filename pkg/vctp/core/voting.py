"""
Контракт голосования: ролевые креденшалы, зашифрованные бюллетени, подсчет.
"""

import base64
import hashlib
import json
import logging
from dataclasses import replace
from datetime import datetime
from typing import Any, Callable, Dict, Optional, Tuple

from cryptography.hazmat.primitives.asymmetric.x25519 import X25519PrivateKey

from ..exceptions import (
    MalformedBallot,
    MalformedCredential,
    RequestClosed,
    UnknownAdmin,
    VotingNotRequired,
)
from ..models.template_models import UpdatePolicySection
from ..models.voting_models import (
    PendingUpdate,
    RejectionReason,
    RoleCredential,
    VoteOption,
    VoteRecord,
    VoteStatus,
    VoteSubmission,
    VotingRequest,
)
from ..services.keys import (
    SealedBoxError,
    SigningIdentity,
    agreement_public_hex,
    open_sealed,
    seal,
    verify_signature,
)
from ..services.rng import RandomSource
from ..utils.canonical import canonical_json

logger = logging.getLogger(__name__)

KeyResolver = Callable[[str], Optional[str]]


def request_id_for(template_id: str, update: PendingUpdate) -> str:
    """Адрес запроса по содержимому ожидающего обновления."""
    return hashlib.sha256(canonical_json({"template_id": template_id, **update.to_dict()})).hexdigest()


def ballot_message(request_id: str, voter_did: str, option: VoteOption) -> bytes:
    """Сообщение, которое подписывает голосующий."""
    return canonical_json({"request_id": request_id, "voter": voter_did, "option": option.value})


def verify_role_credential(credential: RoleCredential, admin_public_key_hex: str) -> bool:
    return verify_signature(admin_public_key_hex, credential.canonical_fields(), credential.signature)


def open_request(update: PendingUpdate,
                 policy: UpdatePolicySection,
                 contract_public_key: str) -> VotingRequest:
    """
    Создание запроса на голосование для ожидающего обновления.

    Args:
        update: Ожидающее обновление
        policy: Секция политики шаблона
        contract_public_key: Ключ X25519 контракта для бюллетеней

    Returns:
        Открытый запрос с порогом numVotesRequired

    Raises:
        VotingNotRequired: numVotesRequired = 0
    """
    if policy.num_votes_required <= 0:
        raise VotingNotRequired(f"Для {policy.id} голосование не требуется")
    return VotingRequest(
        request_id=request_id_for(policy.id, update),
        template_id=policy.id,
        pending_update=update,
        approval_policy=tuple(policy.approval_policy),
        threshold=policy.num_votes_required,
        contract_public_key=contract_public_key,
        expires_at=policy.expiration_date,
    )


def seal_ballot(req: VotingRequest,
                voter_credential: RoleCredential,
                option: VoteOption,
                voter: SigningIdentity,
                rng: RandomSource) -> VoteSubmission:
    """
    Сторона голосующего: подпись и шифрование бюллетеня ключом контракта.

    Args:
        req: Запрос
        voter_credential: Ролевой креденшал голосующего
        option: Вариант голоса
        voter: Ключ подписи голосующего
        rng: Источник случайности

    Returns:
        Бюллетень для контракта
    """
    signature = voter.sign(ballot_message(req.request_id, voter.did, option))
    ballot = canonical_json({
        "request_id": req.request_id,
        "voter_did": voter.did,
        "option": option.value,
        "credential": voter_credential.to_dict(),
        "signature": base64.b64encode(signature).decode("ascii"),
    })
    ciphertext = seal(req.contract_public_key, ballot, rng, aad=req.request_id.encode("ascii"))
    return VoteSubmission(request_id=req.request_id, voter_did=voter.did, ciphertext=ciphertext)


def evaluate_status(req: VotingRequest) -> VoteStatus:
    """Статус после очередного голоса: Passed при достижении порога."""
    if req.status is not VoteStatus.OPEN:
        return req.status
    return VoteStatus.PASSED if req.accepted_approvals >= req.threshold else VoteStatus.OPEN


def tally(req: VotingRequest, now: Optional[datetime] = None) -> VoteStatus:
    """
    Итог голосования.

    Args:
        req: Запрос
        now: Текущее время; открытый запрос истекает на expirationDate

    Returns:
        Passed, Failed, Expired или Open
    """
    status = evaluate_status(req)
    if status is VoteStatus.OPEN and now is not None and req.expires_at is not None and now >= req.expires_at:
        return VoteStatus.EXPIRED
    return status


def close_request(req: VotingRequest) -> VotingRequest:
    """Закрытие администратором: Passed при достигнутом пороге, иначе Failed."""
    if req.status is not VoteStatus.OPEN:
        raise RequestClosed(f"Запрос {req.request_id} уже закрыт ({req.status.value})")
    status = VoteStatus.PASSED if req.accepted_approvals >= req.threshold else VoteStatus.FAILED
    return replace(req, status=status)


def tally_report(req: VotingRequest, now: Optional[datetime] = None) -> Dict[str, Any]:
    """Сводка по запросу."""
    rejected: Dict[str, int] = {}
    for vote in req.votes:
        if not vote.accepted and vote.rejection_reason:
            key = vote.rejection_reason.value
            rejected[key] = rejected.get(key, 0) + 1
    return {
        "request_id": req.request_id,
        "template_id": req.template_id,
        "section_id": req.pending_update.section_id,
        "threshold": req.threshold,
        "approvals": req.accepted_approvals,
        "rejects": sum(1 for v in req.votes if v.accepted and v.option is VoteOption.REJECT),
        "rejected": rejected,
        "votes_cast": len(req.votes),
        "status": tally(req, now).value,
    }


class VotingContract:
    """Контракт голосования, созданный системным администратором."""

    def __init__(self,
                 admin_did: str,
                 admin_public_key: str,
                 contract_key: X25519PrivateKey,
                 resolve_key: KeyResolver,
                 clock: Optional[Callable[[], datetime]] = None):
        """
        Инициализация контракта.

        Args:
            admin_did: DID системного администратора
            admin_public_key: Ключ Ed25519 администратора
            contract_key: Ключ X25519 контракта для бюллетеней
            resolve_key: DID -> ключ Ed25519 из реестра DID
            clock: Часы для проверки истечения
        """
        self.admin_did = admin_did
        self.admin_public_key = admin_public_key
        self._contract_key = contract_key
        self.resolve_key = resolve_key
        self.clock = clock

    @classmethod
    def create(cls, admin: SigningIdentity, resolve_key: KeyResolver, rng: RandomSource,
               clock: Optional[Callable[[], datetime]] = None) -> "VotingContract":
        """Развертывание контракта с новой парой ключей."""
        contract_key = X25519PrivateKey.from_private_bytes(rng.token_bytes(32))
        logger.info(f"🗳️ Контракт голосования развернут администратором {admin.did}")
        return cls(admin.did, admin.public_key_hex, contract_key, resolve_key, clock)

    @property
    def public_key(self) -> str:
        return agreement_public_hex(self._contract_key)

    def issue_role_credential(self,
                              admin: SigningIdentity,
                              subject_did: str,
                              role: str,
                              organization: str) -> RoleCredential:
        """
        Выпуск ролевого креденшала.

        Raises:
            UnknownAdmin: ключ не принадлежит администратору контракта
        """
        if admin.did != self.admin_did or admin.public_key_hex != self.admin_public_key:
            raise UnknownAdmin(f"{admin.did} не является системным администратором")
        unsigned = RoleCredential(subject_did, role, organization, admin.did)
        credential = replace(unsigned, signature=admin.sign(unsigned.canonical_fields()))
        logger.info(f"🎫 Ролевой креденшал: {subject_did}: {role} ({organization})")
        return credential

    def verify_role_credential(self, credential: RoleCredential) -> bool:
        return credential.issuer_did == self.admin_did and verify_role_credential(credential, self.admin_public_key)

    def open_request(self, update: PendingUpdate, policy: UpdatePolicySection) -> VotingRequest:
        req = open_request(update, policy, self.public_key)
        logger.info(f"📨 Запрос на голосование {req.request_id[:12]}: порог {req.threshold}, "
                    f"роли {list(req.approval_policy)}")
        return req

    def _decrypt(self, req: VotingRequest, submission: VoteSubmission) -> Tuple[RoleCredential, VoteOption, bytes, str]:
        try:
            plain = open_sealed(self._contract_key, submission.ciphertext, aad=req.request_id.encode("ascii"))
            ballot = json.loads(plain.decode("utf-8"))
            option = VoteOption(ballot["option"])
            signature = base64.b64decode(ballot["signature"])
            voter_did = ballot["voter_did"]
            if ballot["request_id"] != req.request_id:
                raise ValueError("request_id бюллетеня не совпадает")
        except (SealedBoxError, ValueError, KeyError, TypeError) as e:
            raise MalformedBallot(f"Бюллетень {submission.voter_did} поврежден: {e}")
        try:
            credential = RoleCredential.from_dict(ballot["credential"])
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedCredential(f"Ролевой креденшал {submission.voter_did} некорректен: {e}")
        return credential, option, signature, voter_did

    def receive_vote(self, req: VotingRequest, submission: VoteSubmission) -> Tuple[VotingRequest, VoteRecord]:
        """
        Сторона контракта: расшифровка, проверки и учет голоса.

        Args:
            req: Запрос
            submission: Зашифрованный бюллетень

        Returns:
            Обновленный запрос и запись голоса (принятого или отклоненного)

        Raises:
            RequestClosed, MalformedBallot, MalformedCredential
        """
        now = self.clock() if self.clock else None
        status = tally(req, now)
        if req.status is not VoteStatus.OPEN or status is VoteStatus.EXPIRED:
            raise RequestClosed(f"Запрос {req.request_id} закрыт ({status.value})")

        credential, option, signature, voter_did = self._decrypt(req, submission)

        reason: Optional[RejectionReason] = None
        voter_key = self.resolve_key(voter_did)
        if (voter_did != submission.voter_did
                or credential.subject_did != voter_did
                or not self.verify_role_credential(credential)
                or not voter_key
                or not verify_signature(voter_key, ballot_message(req.request_id, voter_did, option), signature)):
            reason = RejectionReason.BAD_SIGNATURE
        elif credential.role not in req.approval_policy:
            reason = RejectionReason.BAD_ROLE
        elif voter_did in req.accepted_voters:
            reason = RejectionReason.DUPLICATE_DID

        record = VoteRecord(
            voter_did=submission.voter_did,
            ciphertext=submission.ciphertext,
            accepted=reason is None,
            option=option,
            rejection_reason=reason,
        )
        updated = apply_vote(req, record)
        if reason:
            logger.warning(f"⛔ Голос {submission.voter_did} отклонен: {reason.value}")
        else:
            logger.info(f"✅ Голос {voter_did} ({option.value}) принят, "
                        f"одобрений {updated.accepted_approvals}/{updated.threshold}")
        return updated, record

    def cast_vote(self,
                  req: VotingRequest,
                  voter_credential: RoleCredential,
                  option: VoteOption,
                  voter: SigningIdentity,
                  rng: RandomSource) -> VotingRequest:
        """Голос целиком: бюллетень голосующего плюс прием контрактом."""
        submission = seal_ballot(req, voter_credential, option, voter, rng)
        updated, _ = self.receive_vote(req, submission)
        return updated

    def close_request(self, req: VotingRequest, admin_did: str) -> VotingRequest:
        if admin_did != self.admin_did:
            raise UnknownAdmin(f"{admin_did} не может закрыть голосование")
        closed = close_request(req)
        logger.info(f"🔒 Голосование {req.request_id[:12]} закрыто: {closed.status.value}")
        return closed


def apply_vote(req: VotingRequest, record: VoteRecord) -> VotingRequest:
    """Добавление записи голоса с пересчетом статуса."""
    if record.accepted and record.voter_did in req.accepted_voters:
        raise ValueError(f"Повторный принятый голос {record.voter_did}")
    updated = replace(req, votes=req.votes + (record,))
    return replace(updated, status=evaluate_status(updated))
