"""
Модели санитизируемой подписи.
"""

import base64
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

from .crypto_models import AbeCiphertext, Randomness


@dataclass(frozen=True)
class SectionHashRecord:
    """Дайджест одной секции; у фиксированных секций нет hk, r и etd."""
    section_id: str
    digest: bytes
    randomness: Optional[Randomness] = None
    hk: Optional[int] = None
    etd: Optional[AbeCiphertext] = field(default=None, repr=False)

    @property
    def updatable(self) -> bool:
        return self.hk is not None

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"section_id": self.section_id, "digest": self.digest.hex()}
        if self.updatable:
            data.update({
                "randomness": self.randomness.hex(),
                "hk": format(self.hk, "x"),
                "policy": self.etd.policy.to_list(),
                "etd": self.etd.to_dict(),
            })
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SectionHashRecord":
        if "hk" not in data:
            return cls(section_id=data["section_id"], digest=bytes.fromhex(data["digest"]))
        return cls(
            section_id=data["section_id"],
            digest=bytes.fromhex(data["digest"]),
            randomness=Randomness(int(data["randomness"], 16)),
            hk=int(data["hk"], 16),
            etd=AbeCiphertext.from_dict(data["etd"]),
        )


@dataclass(frozen=True)
class UpdaterEndorsement:
    """Подпись обновителя над новым содержимым секции."""
    section_id: str
    updater_did: str
    public_key_hex: str
    content_digest: bytes
    version: int
    signature: bytes

    def to_dict(self) -> Dict[str, Any]:
        return {
            "section_id": self.section_id,
            "updater_did": self.updater_did,
            "public_key": self.public_key_hex,
            "content_digest": self.content_digest.hex(),
            "version": self.version,
            "signature": base64.b64encode(self.signature).decode("ascii"),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "UpdaterEndorsement":
        return cls(
            section_id=data["section_id"],
            updater_did=data["updater_did"],
            public_key_hex=data["public_key"],
            content_digest=bytes.fromhex(data["content_digest"]),
            version=int(data["version"]),
            signature=base64.b64decode(data["signature"]),
        )


@dataclass(frozen=True)
class SanitizableSignature:
    """σ над комбинированным дайджестом плюс записи секций и подписи обновителей."""
    section_records: Tuple[SectionHashRecord, ...]
    combined_digest: bytes
    sigma: bytes
    signer_did: str
    updater_endorsements: Tuple[UpdaterEndorsement, ...] = ()

    def record(self, section_id: str) -> Optional[SectionHashRecord]:
        for record in self.section_records:
            if record.section_id == section_id:
                return record
        return None

    def to_dict(self) -> Dict[str, Any]:
        """Сопроводительная запись: hex-дайджесты, base64 σ."""
        return {
            "section_records": [r.to_dict() for r in self.section_records],
            "combined_digest": self.combined_digest.hex(),
            "sigma": base64.b64encode(self.sigma).decode("ascii"),
            "signer_did": self.signer_did,
            "updater_endorsements": [e.to_dict() for e in self.updater_endorsements],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SanitizableSignature":
        return cls(
            section_records=tuple(SectionHashRecord.from_dict(r) for r in data["section_records"]),
            combined_digest=bytes.fromhex(data["combined_digest"]),
            sigma=base64.b64decode(data["sigma"]),
            signer_did=data["signer_did"],
            updater_endorsements=tuple(
                UpdaterEndorsement.from_dict(e) for e in data.get("updater_endorsements", [])
            ),
        )


@dataclass(frozen=True)
class VerificationDecision:
    """Решение d ∈ {0, 1} с машиночитаемыми причинами."""
    decision: int
    reasons: Tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.decision == 1
