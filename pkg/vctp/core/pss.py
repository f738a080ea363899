"""
Санитизируемая подпись на основе политик: Hash_PCH, Update_PCH, Verify_PCH.
"""

import hashlib
import logging
import struct
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpz, powmod

from ..exceptions import (
    SectionNotUpdatable,
    SigningFailure,
    StaleSignature,
    TrapdoorMismatch,
    UnknownSection,
)
from ..models.crypto_models import AbeCiphertext, AttributeSecretKey, AttributeUniverse, ChameleonKeyPair, int_to_bytes
from ..models.signature_models import (
    SanitizableSignature,
    SectionHashRecord,
    UpdaterEndorsement,
    VerificationDecision,
)
from ..models.template_models import TrustPropagationTemplate
from ..services import abe
from ..services.chameleon import ChameleonHash
from ..services.keys import SigningIdentity, verify_signature
from ..services.rng import RandomSource
from .template_codec import apply_update, section_bytes

logger = logging.getLogger(__name__)

_FIXED, _CHAMELEON = 0, 1

KeyResolver = Callable[[str], Optional[str]]


def _chunk(data: bytes) -> bytes:
    return struct.pack(">I", len(data)) + data


def combined_digest(records: Sequence[SectionHashRecord],
                    fixed_bytes: Optional[Dict[str, bytes]] = None) -> bytes:
    """
    Комбинированный дайджест всех секций в порядке шаблона.

    Для изменяемой секции в дайджест входят хамелеон-дайджест, hk и
    список атрибутов политики; для фиксированной: хеш ее содержимого.

    Args:
        records: Записи секций
        fixed_bytes: Содержимое фиксированных секций; если задано, хеш
            пересчитывается из байтов вместо записанного

    Returns:
        SHA-256 от конкатенации с префиксами длины

    Raises:
        ValueError: у изменяемой записи нет etd
    """
    payload = bytearray()
    for record in records:
        payload += _chunk(record.section_id.encode("utf-8"))
        if record.updatable:
            if record.etd is None:
                raise ValueError(f"section {record.section_id} record has no etd")
            payload += bytes([_CHAMELEON])
            payload += _chunk(record.digest)
            payload += _chunk(int_to_bytes(record.hk))
            payload += _chunk(record.etd.policy.canonical_bytes())
        else:
            digest = record.digest
            if fixed_bytes is not None and record.section_id in fixed_bytes:
                digest = hashlib.sha256(fixed_bytes[record.section_id]).digest()
            payload += bytes([_FIXED])
            payload += _chunk(digest)
    return hashlib.sha256(bytes(payload)).digest()


def endorsement_message(section_id: str, version: int, content_digest: bytes) -> bytes:
    """Сообщение, которое подписывает обновитель."""
    return b"vctp-endorsement-v1|" + _chunk(section_id.encode("utf-8")) + struct.pack(">Q", version) + content_digest


class PolicySanitizableSignature:
    """Схема подписи над секционированным шаблоном."""

    def __init__(self, chameleon: ChameleonHash):
        """
        Инициализация.

        Args:
            chameleon: Хамелеон-хеш над общей группой
        """
        self.chameleon = chameleon
        self.params = chameleon.params

    def hash_pch(self,
                 t: TrustPropagationTemplate,
                 universe: AttributeUniverse,
                 signer: SigningIdentity,
                 rng: RandomSource) -> SanitizableSignature:
        """
        Хеширование и подпись шаблона.

        Args:
            t: Шаблон
            universe: Универсум атрибутов
            signer: Эмитент L1
            rng: Источник случайности

        Returns:
            Подпись с записями по всем секциям
        """
        records: List[SectionHashRecord] = []
        for section in t.sections:
            if not section.updatable:
                records.append(SectionHashRecord(section.section_id, hashlib.sha256(section.content).digest()))
                continue
            kp = self.chameleon.gen(rng)
            r = self.chameleon.random(rng)
            digest = self.chameleon.hash(kp.hk, section.content, r)
            etd = abe.encrypt(universe, section.update_policy_attrs,
                              int_to_bytes(kp.td, self.params.scalar_length), rng)
            records.append(SectionHashRecord(
                section_id=section.section_id,
                digest=digest.to_bytes(self.params.element_length),
                randomness=r,
                hk=kp.hk,
                etd=etd,
            ))

        combined = combined_digest(records)
        try:
            sigma = signer.sign(combined)
        except Exception as e:
            raise SigningFailure(f"Не удалось подписать шаблон: {e}")

        logger.info(f"✍️ Hash_PCH: {t.template_id}, секций {len(records)}, "
                    f"изменяемых {sum(r.updatable for r in records)}")
        return SanitizableSignature(
            section_records=tuple(records),
            combined_digest=combined,
            sigma=sigma,
            signer_did=signer.did,
        )

    def verify_pch(self,
                   t: TrustPropagationTemplate,
                   sig: SanitizableSignature,
                   signer_public_key_hex: str,
                   resolve_key: Optional[KeyResolver] = None) -> VerificationDecision:
        """
        Проверка шаблона против подписи.

        Без resolve_key подпись обновителя проверяется ключом, который
        записан в ней самой: это целостность, но не подотчетность DID.

        Args:
            t: Шаблон
            sig: Санитизируемая подпись
            signer_public_key_hex: Ключ Ed25519 подписанта
            resolve_key: DID -> ключ Ed25519 из реестра DID

        Returns:
            Решение 1, если совпали все дайджесты, σ и подписи обновителей
        """
        reasons: List[str] = []
        record_ids = tuple(r.section_id for r in sig.section_records)
        if record_ids != t.section_ids:
            reasons.append("section order mismatch")

        for section in t.sections:
            record = sig.record(section.section_id)
            if record is None:
                reasons.append(f"section {section.section_id} missing record")
                continue
            if record.updatable != section.updatable:
                reasons.append(f"section {section.section_id} updatability mismatch")
                continue
            if record.updatable and (record.etd is None or record.randomness is None):
                reasons.append(f"section {section.section_id} record malformed")
                continue
            if not record.updatable:
                matches = hashlib.sha256(section.content).digest() == record.digest
            else:
                try:
                    digest = self.chameleon.hash(record.hk, section.content, record.randomness)
                    matches = digest.to_bytes(self.params.element_length) == record.digest
                except Exception:
                    matches = False
            if not matches:
                reasons.append(f"section {section.section_id} digest mismatch")

        try:
            if combined_digest(sig.section_records) != sig.combined_digest:
                reasons.append("combined digest mismatch")
        except (AttributeError, TypeError, ValueError) as e:
            reasons.append(f"combined digest malformed: {e}")
        if not verify_signature(signer_public_key_hex, sig.combined_digest, sig.sigma):
            reasons.append("signature sigma invalid")

        latest: Dict[str, UpdaterEndorsement] = {}
        for index, endorsement in enumerate(sig.updater_endorsements):
            message = endorsement_message(endorsement.section_id, endorsement.version, endorsement.content_digest)
            if not verify_signature(endorsement.public_key_hex, message, endorsement.signature):
                reasons.append(f"endorsement {index} by {endorsement.updater_did} invalid")
            elif resolve_key is not None and resolve_key(endorsement.updater_did) != endorsement.public_key_hex:
                reasons.append(f"endorsement {index} key not registered for {endorsement.updater_did}")
            latest[endorsement.section_id] = endorsement
        for section_id, endorsement in latest.items():
            section = t.find_section(section_id)
            if section is None or hashlib.sha256(section.content).digest() != endorsement.content_digest:
                reasons.append(f"endorsement for section {section_id} does not cover current content")

        return VerificationDecision(decision=0 if reasons else 1, reasons=tuple(reasons))

    def update_pch(self,
                   t: TrustPropagationTemplate,
                   sig: SanitizableSignature,
                   section_id: str,
                   new_content: bytes,
                   updater_key: AttributeSecretKey,
                   updater: SigningIdentity,
                   signer_public_key_hex: str,
                   etd: Optional[AbeCiphertext] = None,
                   resolve_key: Optional[KeyResolver] = None) -> Tuple[TrustPropagationTemplate, SanitizableSignature]:
        """
        Обновление секции через коллизию хамелеон-хеша.

        Args:
            t: Шаблон
            sig: Текущая подпись
            section_id: Обновляемая секция
            new_content: Новое содержимое секции
            updater_key: Ключ атрибутов обновителя
            updater: Ключ подписи обновителя
            signer_public_key_hex: Ключ эмитента L1 для проверки σ
            etd: Зашифрованный trapdoor, полученный по защищенному каналу
                (по умолчанию берется из записи подписи)
            resolve_key: DID -> ключ для проверки предыдущих обновителей

        Returns:
            Обновленный шаблон и подпись с новой случайностью; σ не меняется
        """
        section = t.find_section(section_id)
        if section is None:
            raise UnknownSection(section_id)
        if not section.updatable:
            raise SectionNotUpdatable(section_id)

        decision = self.verify_pch(t, sig, signer_public_key_hex, resolve_key)
        if not decision:
            raise StaleSignature(list(decision.reasons))

        record = sig.record(section_id)
        td = int.from_bytes(abe.decrypt(updater_key, etd or record.etd), "big")
        if not 1 <= td < self.params.q or int(powmod(mpz(self.params.g), td, mpz(self.params.p))) != record.hk:
            raise TrapdoorMismatch(f"Trapdoor не соответствует hk секции {section_id}")
        kp = ChameleonKeyPair(hk=record.hk, td=td, params=self.params)

        updated = apply_update(t, section_id, new_content)
        new_bytes = section_bytes(updated, section_id)
        r_new = self.chameleon.find_collision(kp, section.content, record.randomness, new_bytes)
        if self.chameleon.hash(kp.hk, new_bytes, r_new).to_bytes(self.params.element_length) != record.digest:
            raise TrapdoorMismatch(f"Коллизия для секции {section_id} не сошлась")

        content_digest = hashlib.sha256(new_bytes).digest()
        endorsement = UpdaterEndorsement(
            section_id=section_id,
            updater_did=updater.did,
            public_key_hex=updater.public_key_hex,
            content_digest=content_digest,
            version=updated.version,
            signature=updater.sign(endorsement_message(section_id, updated.version, content_digest)),
        )
        records = tuple(
            replace(r, randomness=r_new) if r.section_id == section_id else r for r in sig.section_records
        )
        logger.info(f"🔁 Update_PCH: {section_id} обновлена {updater.did}, версия {updated.version}")
        return updated, replace(
            sig,
            section_records=records,
            updater_endorsements=sig.updater_endorsements + (endorsement,),
        )
