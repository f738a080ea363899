"""
Модели реестров: DID, эмитенты, креденшалы, журнал транзакций.
"""

import hashlib
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Optional, Tuple

from .voting_models import VotingRequest
from ..utils.canonical import canonical_json


@dataclass(frozen=True)
class DidRecord:
    did: str
    ddo: Dict[str, Any]
    registered_at: int

    def to_dict(self) -> Dict[str, Any]:
        return {"did": self.did, "ddo": self.ddo, "registered_at": self.registered_at}


@dataclass(frozen=True)
class IssuerRecord:
    """Уровень 1: официальный эмитент, выше: распространенное доверие."""
    did: str
    level: int
    onboarded_by: Optional[str] = None
    template_ref: Optional[str] = None
    tx_index: int = 0

    def __post_init__(self):
        if self.level < 1:
            raise ValueError("Уровень эмитента не меньше 1")
        if self.level == 1 and self.onboarded_by is not None:
            raise ValueError("У эмитента L1 нет onboarded_by")
        if self.level > 1 and self.onboarded_by is None:
            raise ValueError("Эмитент уровня > 1 должен ссылаться на онбординг")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "did": self.did,
            "level": self.level,
            "onboarded_by": self.onboarded_by,
            "template_ref": self.template_ref,
            "tx_index": self.tx_index,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "IssuerRecord":
        return cls(**data)


def compute_record_id(combined_digest: str, sigma: str, template_id: str, version: int) -> str:
    """record_id = hash(combined_digest || sigma || template_id || version)."""
    material = canonical_json([combined_digest, sigma, template_id, version])
    return hashlib.sha256(material).hexdigest()


@dataclass(frozen=True)
class CredentialRecord:
    """Запись о выпуске: дайджест и σ, сам шаблон остается вне реестра."""
    record_id: str
    combined_digest: str
    sigma: str
    template_id: str
    version: int
    committed_by: str
    gate: Optional[str] = None
    section_id: Optional[str] = None
    content_digest: Optional[str] = None

    @classmethod
    def build(cls, combined_digest: str, sigma: str, template_id: str, version: int,
              committed_by: str, gate: Optional[str] = None, section_id: Optional[str] = None,
              content_digest: Optional[str] = None) -> "CredentialRecord":
        return cls(
            record_id=compute_record_id(combined_digest, sigma, template_id, version),
            combined_digest=combined_digest,
            sigma=sigma,
            template_id=template_id,
            version=version,
            committed_by=committed_by,
            gate=gate,
            section_id=section_id,
            content_digest=content_digest,
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "record_id": self.record_id,
            "combined_digest": self.combined_digest,
            "sigma": self.sigma,
            "template_id": self.template_id,
            "version": self.version,
            "committed_by": self.committed_by,
            "gate": self.gate,
            "section_id": self.section_id,
            "content_digest": self.content_digest,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "CredentialRecord":
        return cls(**data)


@dataclass(frozen=True)
class IssuerGrant:
    """Эмитент следующего уровня, добавляемый в той же транзакции."""
    did: str
    level: int

    def to_dict(self) -> Dict[str, Any]:
        return {"did": self.did, "level": self.level}


@dataclass(frozen=True)
class Transaction:
    index: int
    kind: str
    payload: Dict[str, Any]

    def to_dict(self) -> Dict[str, Any]:
        return {"index": self.index, "kind": self.kind, "payload": self.payload}

    def to_line(self) -> bytes:
        return canonical_json(self.to_dict())

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Transaction":
        return cls(index=int(data["index"]), kind=str(data["kind"]), payload=dict(data["payload"]))


@dataclass(frozen=True)
class LedgerState:
    """Состояние как свертка журнала; значения не изменяются на месте."""
    did_registry: Dict[str, DidRecord] = field(default_factory=dict)
    issuer_registry: Dict[str, IssuerRecord] = field(default_factory=dict)
    credential_registry: Dict[str, CredentialRecord] = field(default_factory=dict)
    voting_store: Dict[str, VotingRequest] = field(default_factory=dict)
    attribute_registry: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    template_thresholds: Dict[str, int] = field(default_factory=dict)
    voting_admin: Optional[str] = None
    consumed_gates: FrozenSet[str] = frozenset()
    height: int = 0
    # (template_id, version) -> record_id последнего коммита
    credential_index: Dict[Tuple[str, int], str] = field(default_factory=dict, compare=False)
    last_tx: Optional[Transaction] = field(default=None, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "height": self.height,
            "did_registry": {k: v.to_dict() for k, v in sorted(self.did_registry.items())},
            "issuer_registry": {k: v.to_dict() for k, v in sorted(self.issuer_registry.items())},
            "credential_registry": {k: v.to_dict() for k, v in sorted(self.credential_registry.items())},
            "voting_store": {k: v.to_dict() for k, v in sorted(self.voting_store.items())},
            "attribute_registry": dict(sorted(self.attribute_registry.items())),
            "template_thresholds": dict(sorted(self.template_thresholds.items())),
            "voting_admin": self.voting_admin,
            "consumed_gates": sorted(self.consumed_gates),
        }
