"""
Модели акторов и артефактов протокола.
"""

import base64
import hashlib
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from .crypto_models import AbeCiphertext, AttributeSecretKey
from .ledger_models import CredentialRecord
from .signature_models import SanitizableSignature
from .template_models import TrustPropagationTemplate
from .voting_models import RoleCredential, VotingRequest
from ..services.keys import SigningIdentity
from ..utils.canonical import canonical_json


class ActorKind(Enum):
    """Роль актора в сценарии."""
    L1_ISSUER = "L1Issuer"
    TRUST_PROXY = "TrustProxy"
    PERSONAL_ISSUER = "PersonalIssuer"
    HOLDER = "Holder"
    VERIFIER = "Verifier"
    ADMIN = "Admin"
    VOTER = "Voter"


@dataclass
class Actor:
    """Участник протокола со своими ключами и креденшалами."""
    identity: SigningIdentity
    kind: ActorKind
    name: str = ""
    role_credentials: List[RoleCredential] = field(default_factory=list)
    attribute_keys: List[AttributeSecretKey] = field(default_factory=list)

    @property
    def did(self) -> str:
        return self.identity.did

    @property
    def attributes(self) -> frozenset:
        names = set()
        for key in self.attribute_keys:
            names |= key.attributes
        return frozenset(names)

    def attribute_key(self) -> Optional[AttributeSecretKey]:
        """Объединенный ключ атрибутов актора."""
        if not self.attribute_keys:
            return None
        if len(self.attribute_keys) == 1:
            return self.attribute_keys[0]
        material: Dict[str, int] = {}
        for key in self.attribute_keys:
            material.update(key.key_material)
        first = self.attribute_keys[0]
        return AttributeSecretKey(self.did, frozenset(material), material, first.group)

    def role_credential(self, role: Optional[str] = None) -> Optional[RoleCredential]:
        for credential in self.role_credentials:
            if role is None or credential.role == role:
                return credential
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Форма для хранилища ключей (содержит секреты)."""
        return {
            "name": self.name,
            "kind": self.kind.value,
            "identity": self.identity.to_dict(),
            "role_credentials": [c.to_dict() for c in self.role_credentials],
            "attribute_keys": [k.to_dict() for k in self.attribute_keys],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Actor":
        return cls(
            identity=SigningIdentity.from_dict(data["identity"]),
            kind=ActorKind(data["kind"]),
            name=data.get("name", ""),
            role_credentials=[RoleCredential.from_dict(c) for c in data.get("role_credentials", [])],
            attribute_keys=[AttributeSecretKey.from_dict(k) for k in data.get("attribute_keys", [])],
        )


@dataclass(frozen=True)
class SealedTemplate:
    """Экземпляр шаблона с подписью и ссылкой на запись в реестре."""
    template: TrustPropagationTemplate
    signature: SanitizableSignature
    record_id: str

    @property
    def template_id(self) -> str:
        return self.template.template_id

    @property
    def version(self) -> int:
        return self.template.version


@dataclass(frozen=True)
class UpdateKit:
    """Набор обновителя: ссылка на хешированный шаблон, hk и etd секции."""
    template_id: str
    version: int
    record_id: str
    template_digest: str
    section_id: str
    hk: int
    etd: AbeCiphertext
    template_document: bytes
    signature: SanitizableSignature

    def to_dict(self) -> Dict[str, Any]:
        return {
            "template_id": self.template_id,
            "version": self.version,
            "record_id": self.record_id,
            "template_digest": self.template_digest,
            "section_id": self.section_id,
            "hk": format(self.hk, "x"),
            "etd": self.etd.to_dict(),
            "template": base64.b64encode(self.template_document).decode("ascii"),
            "signature": self.signature.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UpdateKit":
        return cls(
            template_id=data["template_id"],
            version=int(data["version"]),
            record_id=data["record_id"],
            template_digest=data["template_digest"],
            section_id=data["section_id"],
            hk=int(data["hk"], 16),
            etd=AbeCiphertext.from_dict(data["etd"]),
            template_document=base64.b64decode(data["template"]),
            signature=SanitizableSignature.from_dict(data["signature"]),
        )


@dataclass(frozen=True)
class SecureEnvelope:
    """Набор обновителя, зашифрованный для получателя."""
    recipient_did: str
    sender_did: str
    ciphertext: bytes
    sender_signature: bytes = b""

    def signed_message(self) -> bytes:
        return canonical_json({
            "recipient": self.recipient_did,
            "sender": self.sender_did,
            "ciphertext": hashlib.sha256(self.ciphertext).hexdigest(),
        })

    def to_dict(self) -> Dict[str, Any]:
        return {
            "recipient_did": self.recipient_did,
            "sender_did": self.sender_did,
            "ciphertext": base64.b64encode(self.ciphertext).decode("ascii"),
            "sender_signature": base64.b64encode(self.sender_signature).decode("ascii"),
        }


@dataclass(frozen=True)
class UpdateOutcome:
    """Результат обновления с коммитом в реестр."""
    sealed: SealedTemplate
    record: CredentialRecord
    request: Optional[VotingRequest] = None
    transactions: Tuple[int, ...] = ()


@dataclass(frozen=True)
class VerificationCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class VerificationReport:
    """Отчет верификатора; проходит, если пройдены все проверки."""
    template_id: str
    version: int
    holder_did: str
    issuer_did: str
    checks: Tuple[VerificationCheck, ...]

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failed_checks(self) -> Tuple[str, ...]:
        return tuple(check.name for check in self.checks if not check.passed)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "template_id": self.template_id,
            "version": self.version,
            "holder_did": self.holder_did,
            "issuer_did": self.issuer_did,
            "passed": self.passed,
            "checks": [
                {"name": c.name, "passed": c.passed, "detail": c.detail} for c in self.checks
            ],
        }
