"""
Модели голосования: ролевые креденшалы, запросы, голоса.
"""

import base64
from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Any, Dict, Optional, Tuple

from ..utils.canonical import canonical_json, format_timestamp, parse_timestamp


class VoteOption(Enum):
    """Вариант голоса."""
    APPROVE = "approve"
    REJECT = "reject"


class VoteStatus(Enum):
    """Статус запроса на голосование."""
    OPEN = "Open"
    PASSED = "Passed"
    FAILED = "Failed"
    EXPIRED = "Expired"


class RejectionReason(Enum):
    """Причина отклонения голоса."""
    BAD_ROLE = "BadRole"
    DUPLICATE_DID = "DuplicateDid"
    BAD_SIGNATURE = "BadSignature"


@dataclass(frozen=True)
class RoleCredential:
    """Ролевой креденшал, подписанный системным администратором."""
    subject_did: str
    role: str
    organization: str
    issuer_did: str
    signature: bytes = b""

    def canonical_fields(self) -> bytes:
        return canonical_json({
            "subject": self.subject_did,
            "role": self.role,
            "organization": self.organization,
            "issuer": self.issuer_did,
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            "subject_did": self.subject_did,
            "role": self.role,
            "organization": self.organization,
            "issuer_did": self.issuer_did,
            "signature": base64.b64encode(self.signature).decode("ascii"),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RoleCredential":
        return cls(
            subject_did=data["subject_did"],
            role=data["role"],
            organization=data["organization"],
            issuer_did=data["issuer_did"],
            signature=base64.b64decode(data["signature"]),
        )


@dataclass(frozen=True)
class PendingUpdate:
    """Обновление, ожидающее голосования."""
    section_id: str
    new_content_digest: str
    updater_did: str
    # версия шаблона после обновления
    version: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "section_id": self.section_id,
            "new_content_digest": self.new_content_digest,
            "updater_did": self.updater_did,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "PendingUpdate":
        return cls(**data)


@dataclass(frozen=True)
class VoteSubmission:
    """Зашифрованный бюллетень, отправляемый контракту."""
    request_id: str
    voter_did: str
    ciphertext: bytes

    def to_dict(self) -> Dict[str, Any]:
        return {
            "request_id": self.request_id,
            "voter_did": self.voter_did,
            "ciphertext": base64.b64encode(self.ciphertext).decode("ascii"),
        }


@dataclass(frozen=True)
class VoteRecord:
    """Учтенный или отклоненный голос."""
    voter_did: str
    ciphertext: bytes
    accepted: bool
    option: Optional[VoteOption] = None
    rejection_reason: Optional[RejectionReason] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "voter_did": self.voter_did,
            "ciphertext": base64.b64encode(self.ciphertext).decode("ascii"),
            "accepted": self.accepted,
            "option": self.option.value if self.option else None,
            "rejection_reason": self.rejection_reason.value if self.rejection_reason else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VoteRecord":
        return cls(
            voter_did=data["voter_did"],
            ciphertext=base64.b64decode(data["ciphertext"]),
            accepted=bool(data["accepted"]),
            option=VoteOption(data["option"]) if data.get("option") else None,
            rejection_reason=RejectionReason(data["rejection_reason"]) if data.get("rejection_reason") else None,
        )


@dataclass(frozen=True)
class VotingRequest:
    """Запись в реестре голосований."""
    request_id: str
    template_id: str
    pending_update: PendingUpdate
    approval_policy: Tuple[str, ...]
    threshold: int
    contract_public_key: str
    votes: Tuple[VoteRecord, ...] = ()
    status: VoteStatus = VoteStatus.OPEN
    expires_at: Optional[datetime] = None

    @property
    def accepted_approvals(self) -> int:
        return sum(1 for v in self.votes if v.accepted and v.option is VoteOption.APPROVE)

    @property
    def accepted_voters(self) -> Tuple[str, ...]:
        return tuple(v.voter_did for v in self.votes if v.accepted)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "request_id": self.request_id,
            "template_id": self.template_id,
            "pending_update": self.pending_update.to_dict(),
            "approval_policy": list(self.approval_policy),
            "threshold": self.threshold,
            "contract_public_key": self.contract_public_key,
            "votes": [v.to_dict() for v in self.votes],
            "status": self.status.value,
            "expires_at": format_timestamp(self.expires_at) if self.expires_at else None,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "VotingRequest":
        return cls(
            request_id=data["request_id"],
            template_id=data["template_id"],
            pending_update=PendingUpdate.from_dict(data["pending_update"]),
            approval_policy=tuple(data["approval_policy"]),
            threshold=int(data["threshold"]),
            contract_public_key=data["contract_public_key"],
            votes=tuple(VoteRecord.from_dict(v) for v in data.get("votes", [])),
            status=VoteStatus(data.get("status", VoteStatus.OPEN.value)),
            expires_at=parse_timestamp(data["expires_at"]) if data.get("expires_at") else None,
        )
