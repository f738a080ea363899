"""
Шифрование на атрибутах (ciphertext-policy) для обертки trapdoor-ключей.

Каждый атрибут политики инкапсулирует свой общий секрет по схеме
ElGamal: C_a = g^s_a, K_a = PK_a^s_a. Ключ AEAD выводится HKDF из всех
K_a, поэтому расшифровка требует секретов всех атрибутов политики.
Схема не устойчива к сговору держателей разных ключей: объединение
ключей дает объединение атрибутов.

Ключ держателя содержит сами мастер-секреты атрибутов, а не секрет,
выведенный для его DID. Ключи двух держателей одного атрибута
взаимозаменяемы, и любой держатель может выдавать ключи на свои
атрибуты в обход эмитента L1. holder_did ключа служит только меткой.
"""

import logging
from typing import Iterable, List, Set

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.hkdf import HKDF
from gmpy2 import mpz, powmod

from ..exceptions import (
    AbeError,
    CorruptCiphertext,
    DuplicateAttribute,
    EmptyUniverse,
    PolicyNotSatisfied,
    UnknownAttribute,
)
from ..models.crypto_models import (
    AbeCiphertext,
    AccessPolicy,
    AttributeSecretKey,
    AttributeUniverse,
    GroupParams,
    int_to_bytes,
)
from .rng import RandomSource

logger = logging.getLogger(__name__)

_KDF_INFO = b"vctp-abe-v1|"
_NONCE_SIZE = 12


def setup(attribute_names: List[str], rng: RandomSource, group: GroupParams) -> AttributeUniverse:
    """
    Генерация мастер-секрета и публичного элемента для каждого атрибута.

    Args:
        attribute_names: Имена атрибутов
        rng: Источник случайности
        group: Параметры группы

    Returns:
        Универсум атрибутов
    """
    if not attribute_names:
        raise EmptyUniverse("Список атрибутов пуст")
    seen: Set[str] = set()
    for name in attribute_names:
        if not name:
            raise AbeError("Имя атрибута не может быть пустым")
        if name in seen:
            raise DuplicateAttribute(f"Повторяющийся атрибут: {name}")
        seen.add(name)

    p, g = mpz(group.p), mpz(group.g)
    master_secrets = {}
    public_params = {}
    for name in attribute_names:
        secret = rng.scalar(group.q)
        master_secrets[name] = secret
        public_params[name] = int(powmod(g, secret, p))

    logger.info(f"🔑 Универсум атрибутов создан: {len(attribute_names)} атрибутов")
    return AttributeUniverse(master_secrets=master_secrets, public_params=public_params, group=group)


def keygen(universe: AttributeUniverse, holder_did: str, attributes: Iterable[str]) -> AttributeSecretKey:
    """
    Выдача секретного ключа держателю.

    Args:
        universe: Универсум атрибутов
        holder_did: DID держателя
        attributes: Запрошенные атрибуты

    Returns:
        Ключ ровно для запрошенных атрибутов
    """
    requested = set(attributes)
    unknown = requested - set(universe.public_params)
    if unknown:
        raise UnknownAttribute(unknown)
    key = AttributeSecretKey(
        holder_did=holder_did,
        attributes=frozenset(requested),
        key_material={name: universe.master_secrets[name] for name in requested},
        group=universe.group,
    )
    logger.debug(f"Ключ атрибутов выдан {holder_did}: {sorted(requested)}")
    return key


def _derive_key(policy: AccessPolicy, shared: dict, group: GroupParams) -> bytes:
    material = b"".join(
        int_to_bytes(shared[name], group.element_length) for name in sorted(policy.required_attributes)
    )
    return HKDF(
        algorithm=hashes.SHA256(),
        length=32,
        salt=None,
        info=_KDF_INFO + policy.canonical_bytes(),
    ).derive(material)


def encrypt(universe: AttributeUniverse,
            policy: AccessPolicy,
            plaintext: bytes,
            rng: RandomSource) -> AbeCiphertext:
    """
    Шифрование под политикой.

    Args:
        universe: Универсум (используются только публичные элементы)
        policy: Политика доступа
        plaintext: Открытый текст
        rng: Источник случайности

    Returns:
        Шифротекст, расшифровываемый только ключом, покрывающим политику
    """
    unknown = set(policy.required_attributes) - set(universe.public_params)
    if unknown:
        raise UnknownAttribute(unknown)

    group = universe.group
    p, g = mpz(group.p), mpz(group.g)
    encapsulation = {}
    shared = {}
    for name in sorted(policy.required_attributes):
        s = mpz(rng.scalar(group.q))
        encapsulation[name] = int(powmod(g, s, p))
        shared[name] = int(powmod(mpz(universe.public_params[name]), s, p))

    nonce = rng.token_bytes(_NONCE_SIZE)
    key = _derive_key(policy, shared, group)
    payload = nonce + AESGCM(key).encrypt(nonce, plaintext, policy.canonical_bytes())
    return AbeCiphertext(policy=policy, payload=payload, encapsulation=encapsulation)


def decrypt(key: AttributeSecretKey, ct: AbeCiphertext) -> bytes:
    """
    Расшифровка.

    Args:
        key: Секретный ключ атрибутов
        ct: Шифротекст

    Returns:
        Открытый текст

    Raises:
        PolicyNotSatisfied: набор атрибутов ключа не покрывает политику
        CorruptCiphertext: нарушена целостность
    """
    missing = ct.policy.missing(key.attributes)
    if missing:
        raise PolicyNotSatisfied(missing)
    if set(ct.encapsulation) != set(ct.policy.required_attributes):
        raise CorruptCiphertext("Инкапсуляции не соответствуют политике")
    if len(ct.payload) < _NONCE_SIZE + 16:
        raise CorruptCiphertext("Слишком короткая полезная нагрузка")

    group = key.group
    p = mpz(group.p)
    shared = {}
    for name in ct.policy.required_attributes:
        element = ct.encapsulation[name]
        if not 1 < element < group.p:
            raise CorruptCiphertext(f"Инкапсуляция {name} вне группы")
        shared[name] = int(powmod(mpz(element), key.key_material[name], p))

    nonce, body = ct.payload[:_NONCE_SIZE], ct.payload[_NONCE_SIZE:]
    try:
        return AESGCM(_derive_key(ct.policy, shared, group)).decrypt(nonce, body, ct.policy.canonical_bytes())
    except InvalidTag:
        raise CorruptCiphertext("Проверка целостности шифротекста не пройдена")
