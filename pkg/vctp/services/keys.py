"""
Ключи акторов: подпись Ed25519, согласование ключей X25519 и гибридное
шифрование для получателя (бюллетени и конверты с набором обновления).
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict

from cryptography.exceptions import InvalidSignature, InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.asymmetric.ed25519 import (
    Ed25519PrivateKey,
    Ed25519PublicKey,
)
from cryptography.hazmat.primitives.asymmetric.x25519 import (
    X25519PrivateKey,
    X25519PublicKey,
)
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from cryptography.hazmat.primitives.serialization import (
    Encoding,
    NoEncryption,
    PrivateFormat,
    PublicFormat,
)

from ..exceptions import SealedBoxError
from .rng import RandomSource

logger = logging.getLogger(__name__)

_SEAL_INFO = b"vctp-seal-v1"
_NONCE_SIZE = 12
_KEY_SIZE = 32


def _raw_public(key) -> bytes:
    return key.public_bytes(Encoding.Raw, PublicFormat.Raw)


def _raw_private(key) -> bytes:
    return key.private_bytes(Encoding.Raw, PrivateFormat.Raw, NoEncryption())


@dataclass
class SigningIdentity:
    """DID с ключом подписи и ключом согласования."""
    did: str
    signing_key: Ed25519PrivateKey = field(repr=False)
    agreement_key: X25519PrivateKey = field(repr=False)

    @classmethod
    def generate(cls, did: str, rng: RandomSource) -> "SigningIdentity":
        """
        Генерация ключей из источника случайности.

        Args:
            did: DID актора
            rng: Источник случайности

        Returns:
            Новая идентичность
        """
        return cls(
            did=did,
            signing_key=Ed25519PrivateKey.from_private_bytes(rng.token_bytes(_KEY_SIZE)),
            agreement_key=X25519PrivateKey.from_private_bytes(rng.token_bytes(_KEY_SIZE)),
        )

    @property
    def public_key_hex(self) -> str:
        return _raw_public(self.signing_key.public_key()).hex()

    @property
    def agreement_public_hex(self) -> str:
        return _raw_public(self.agreement_key.public_key()).hex()

    def sign(self, message: bytes) -> bytes:
        return self.signing_key.sign(message)

    def ddo(self) -> Dict[str, Any]:
        """DID-документ с ключом проверки подписи и ключом согласования."""
        return {
            "id": self.did,
            "verificationMethod": [{
                "id": f"{self.did}#sign-1",
                "type": "Ed25519VerificationKey2020",
                "controller": self.did,
                "publicKeyHex": self.public_key_hex,
            }],
            "keyAgreement": [{
                "id": f"{self.did}#agree-1",
                "type": "X25519KeyAgreementKey2020",
                "controller": self.did,
                "publicKeyHex": self.agreement_public_hex,
            }],
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "did": self.did,
            "signing_key": _raw_private(self.signing_key).hex(),
            "agreement_key": _raw_private(self.agreement_key).hex(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SigningIdentity":
        return cls(
            did=data["did"],
            signing_key=Ed25519PrivateKey.from_private_bytes(bytes.fromhex(data["signing_key"])),
            agreement_key=X25519PrivateKey.from_private_bytes(bytes.fromhex(data["agreement_key"])),
        )


def agreement_public_hex(key: X25519PrivateKey) -> str:
    """Hex публичного ключа X25519."""
    return _raw_public(key.public_key()).hex()


def ddo_signing_key(ddo: Dict[str, Any]) -> str:
    """Hex ключа Ed25519 из DID-документа (пустая строка, если нет)."""
    for method in ddo.get("verificationMethod", []):
        if method.get("type") == "Ed25519VerificationKey2020":
            return method.get("publicKeyHex", "")
    return ""


def ddo_agreement_key(ddo: Dict[str, Any]) -> str:
    """Hex ключа X25519 из DID-документа (пустая строка, если нет)."""
    for method in ddo.get("keyAgreement", []):
        if method.get("type") == "X25519KeyAgreementKey2020":
            return method.get("publicKeyHex", "")
    return ""


def verify_signature(public_key_hex: str, message: bytes, signature: bytes) -> bool:
    """
    Проверка подписи Ed25519.

    Args:
        public_key_hex: Публичный ключ в hex
        message: Подписанное сообщение
        signature: Подпись

    Returns:
        True если подпись верна
    """
    try:
        Ed25519PublicKey.from_public_bytes(bytes.fromhex(public_key_hex)).verify(signature, message)
        return True
    except (InvalidSignature, ValueError):
        return False


def _box_key(shared: bytes, ephemeral_public: bytes, recipient_public: bytes) -> bytes:
    return HKDF(
        algorithm=hashes.SHA256(),
        length=32,
        salt=ephemeral_public + recipient_public,
        info=_SEAL_INFO,
    ).derive(shared)


def seal(recipient_public_hex: str, plaintext: bytes, rng: RandomSource, aad: bytes = b"") -> bytes:
    """
    Шифрование для владельца ключа X25519.

    Args:
        recipient_public_hex: Публичный ключ согласования получателя
        plaintext: Открытый текст
        rng: Источник случайности
        aad: Связанные данные

    Returns:
        ephemeral_public || nonce || ciphertext
    """
    recipient_public = bytes.fromhex(recipient_public_hex)
    ephemeral = X25519PrivateKey.from_private_bytes(rng.token_bytes(_KEY_SIZE))
    ephemeral_public = _raw_public(ephemeral.public_key())
    shared = ephemeral.exchange(X25519PublicKey.from_public_bytes(recipient_public))
    nonce = rng.token_bytes(_NONCE_SIZE)
    key = _box_key(shared, ephemeral_public, recipient_public)
    return ephemeral_public + nonce + AESGCM(key).encrypt(nonce, plaintext, aad)


def open_sealed(agreement_key: X25519PrivateKey, sealed: bytes, aad: bytes = b"") -> bytes:
    """
    Расшифровка конверта ключом получателя.

    Raises:
        SealedBoxError: конверт не для этого ключа или поврежден
    """
    if len(sealed) < _KEY_SIZE + _NONCE_SIZE + 16:
        raise SealedBoxError("Конверт слишком короткий")
    ephemeral_public = sealed[:_KEY_SIZE]
    nonce = sealed[_KEY_SIZE:_KEY_SIZE + _NONCE_SIZE]
    body = sealed[_KEY_SIZE + _NONCE_SIZE:]
    recipient_public = _raw_public(agreement_key.public_key())
    try:
        shared = agreement_key.exchange(X25519PublicKey.from_public_bytes(ephemeral_public))
        key = _box_key(shared, ephemeral_public, recipient_public)
        return AESGCM(key).decrypt(nonce, body, aad)
    except (InvalidTag, ValueError) as e:
        raise SealedBoxError(f"Не удалось открыть конверт: {e}")
