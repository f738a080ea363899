"""
Модели данных криптографических примитивов: группа, хамелеон-хеш, ABE.
"""

import struct
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Any, Optional, Tuple

from gmpy2 import is_prime

from ..exceptions import CorruptCiphertext, InvalidParams

# RFC 3526, 2048-bit MODP Group (группа 14), безопасное простое p = 2q + 1
_RFC3526_2048 = int("""
    FFFFFFFF FFFFFFFF C90FDAA2 2168C234 C4C6628B 80DC1CD1
    29024E08 8A67CC74 020BBEA6 3B139B22 514A0879 8E3404DD
    EF9519B3 CD3A431B 302B0A6D F25F1437 4FE1356D 6D51C245
    E485B576 625E7EC6 F44C42E9 A637ED6B 0BFF5CB6 F406B7ED
    EE386BFB 5A899FA5 AE9F2411 7C4B1FE6 49286651 ECE45B3D
    C2007CB8 A163BF05 98DA4836 1C55D39A 69163FA8 FD24CF5F
    83655D23 DCA3AD96 1C62F356 208552BB 9ED52907 7096966D
    670C354E 4ABC9804 F1746C08 CA18217C 32905E46 2E36CE3B
    E39E772C 180E8603 9B2783A2 EC07A28F B5C55DF0 6F4C52C9
    DE2BCBF6 95581718 3995497C EA956AE5 15D22618 98FA0510
    15728E5A 8AACAA68 FFFFFFFF FFFFFFFF
""".replace(" ", "").replace("\n", ""), 16)

# 128-битное безопасное простое для быстрых тестов свойств
_SMALL_SAFE_PRIME = 268667631919620580209347031372109465463


def int_to_bytes(value: int, length: Optional[int] = None) -> bytes:
    """Big-endian представление неотрицательного целого."""
    if length is None:
        length = max(1, (value.bit_length() + 7) // 8)
    return int(value).to_bytes(length, "big")


@dataclass(frozen=True)
class GroupParams:
    """Подгруппа порядка q в Z_p*."""
    p: int
    q: int
    g: int

    def validate(self) -> "GroupParams":
        """
        Проверка инвариантов группы.

        Returns:
            Сами параметры

        Raises:
            InvalidParams: если p или q не простые, q не делит p-1
                или g не порождает подгруппу порядка q
        """
        if self.p < 3 or self.q < 2:
            raise InvalidParams(f"Слишком малые параметры: p={self.p}, q={self.q}")
        if not is_prime(self.p) or not is_prime(self.q):
            raise InvalidParams("p и q должны быть простыми")
        if (self.p - 1) % self.q != 0:
            raise InvalidParams("q не делит p-1")
        if not 2 <= self.g <= self.p - 1:
            raise InvalidParams("g вне диапазона [2, p-1]")
        if pow(self.g, self.q, self.p) != 1 or self.g == 1:
            raise InvalidParams("g не порождает подгруппу порядка q")
        return self

    @property
    def element_length(self) -> int:
        return (self.p.bit_length() + 7) // 8

    @property
    def scalar_length(self) -> int:
        return (self.q.bit_length() + 7) // 8

    def to_dict(self) -> Dict[str, str]:
        """Десятичные строки для файла конфигурации."""
        return {"p": str(self.p), "q": str(self.q), "g": str(self.g)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GroupParams":
        try:
            params = cls(p=int(data["p"]), q=int(data["q"]), g=int(data["g"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidParams(f"Не удалось прочитать параметры группы: {e}")
        return params.validate()


GROUP_PROFILES: Dict[str, GroupParams] = {
    "test": GroupParams(p=23, q=11, g=4),
    "small": GroupParams(p=_SMALL_SAFE_PRIME, q=(_SMALL_SAFE_PRIME - 1) // 2, g=4),
    "default": GroupParams(p=_RFC3526_2048, q=(_RFC3526_2048 - 1) // 2, g=4),
}


def group_profile(name: str) -> GroupParams:
    """
    Параметры группы по имени профиля.

    Args:
        name: test | small | default

    Returns:
        GroupParams
    """
    try:
        return GROUP_PROFILES[name]
    except KeyError:
        raise InvalidParams(f"Неизвестный профиль группы: {name}")


@dataclass(frozen=True)
class Randomness:
    """Случайность хамелеон-хеша."""
    r: int

    def hex(self) -> str:
        return format(self.r, "x")


@dataclass(frozen=True)
class ChameleonDigest:
    """Значение хамелеон-хеша, элемент группы."""
    value: int

    def hex(self) -> str:
        return format(self.value, "x")

    def to_bytes(self, length: int) -> bytes:
        return int_to_bytes(self.value, length)


@dataclass(frozen=True)
class ChameleonKeyPair:
    """Пара (hk, td); td отсутствует у публичной половины."""
    hk: int
    td: Optional[int]
    params: GroupParams = field(repr=False)

    def public(self) -> "ChameleonKeyPair":
        return ChameleonKeyPair(hk=self.hk, td=None, params=self.params)

    def __repr__(self) -> str:
        return f"ChameleonKeyPair(hk={self.hk:x}, td={'<hidden>' if self.td is not None else None})"


@dataclass(frozen=True)
class AccessPolicy:
    """Конъюнкция атрибутов (AND всех перечисленных)."""
    required_attributes: Tuple[str, ...]

    def __post_init__(self):
        attrs = tuple(self.required_attributes)
        object.__setattr__(self, "required_attributes", attrs)
        if not attrs:
            raise ValueError("Политика доступа не может быть пустой")
        if len(set(attrs)) != len(attrs):
            raise ValueError(f"Повторяющиеся атрибуты в политике: {list(attrs)}")
        if any(not a for a in attrs):
            raise ValueError("Пустое имя атрибута в политике")

    @classmethod
    def of(cls, attributes: Iterable[str]) -> "AccessPolicy":
        return cls(tuple(attributes))

    def satisfied_by(self, attributes: Iterable[str]) -> bool:
        return set(self.required_attributes) <= set(attributes)

    def missing(self, attributes: Iterable[str]) -> FrozenSet[str]:
        return frozenset(self.required_attributes) - frozenset(attributes)

    def canonical_bytes(self) -> bytes:
        """Отсортированный список атрибутов с префиксами длины."""
        out = bytearray()
        for name in sorted(self.required_attributes):
            encoded = name.encode("utf-8")
            out += struct.pack(">H", len(encoded)) + encoded
        return bytes(out)

    def to_list(self):
        return list(self.required_attributes)


@dataclass(frozen=True)
class AttributeUniverse:
    """Мастер-секреты и публичные элементы всех атрибутов."""
    master_secrets: Dict[str, int] = field(repr=False)
    public_params: Dict[str, int]
    group: GroupParams

    def __post_init__(self):
        if set(self.master_secrets) != set(self.public_params):
            raise ValueError("Каждому публичному элементу нужен мастер-секрет")

    @property
    def attribute_names(self) -> Tuple[str, ...]:
        return tuple(self.public_params)

    def public_dict(self) -> Dict[str, Any]:
        """Только публичная часть, для публикации в реестре."""
        return {
            "group": self.group.to_dict(),
            "attributes": {name: format(v, "x") for name, v in self.public_params.items()},
        }


@dataclass(frozen=True)
class AttributeSecretKey:
    """Секретный ключ держателя для набора атрибутов."""
    holder_did: str
    attributes: FrozenSet[str]
    key_material: Dict[str, int] = field(repr=False)
    group: GroupParams = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "attributes", frozenset(self.attributes))
        if set(self.key_material) != set(self.attributes):
            raise ValueError("key_material должен покрывать ровно набор attributes")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "holder_did": self.holder_did,
            "attributes": sorted(self.attributes),
            "key_material": {a: format(v, "x") for a, v in sorted(self.key_material.items())},
            "group": self.group.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AttributeSecretKey":
        return cls(
            holder_did=data["holder_did"],
            attributes=frozenset(data["attributes"]),
            key_material={a: int(v, 16) for a, v in data["key_material"].items()},
            group=GroupParams.from_dict(data["group"]),
        )


_ABE_MAGIC = b"VABE\x01"


@dataclass(frozen=True)
class AbeCiphertext:
    """Шифротекст: политика, инкапсуляции по атрибутам, AEAD-полезная нагрузка."""
    policy: AccessPolicy
    payload: bytes
    encapsulation: Dict[str, int]

    def to_bytes(self) -> bytes:
        """Тегированный бинарный конверт."""
        names = sorted(self.policy.required_attributes)
        out = bytearray(_ABE_MAGIC)
        out += struct.pack(">H", len(names))
        for name in names:
            encoded = name.encode("utf-8")
            element = int_to_bytes(self.encapsulation[name])
            out += struct.pack(">H", len(encoded)) + encoded
            out += struct.pack(">H", len(element)) + element
        out += struct.pack(">I", len(self.payload)) + self.payload
        return bytes(out)

    @classmethod
    def from_bytes(cls, blob: bytes) -> "AbeCiphertext":
        try:
            if not blob.startswith(_ABE_MAGIC):
                raise ValueError("неверный тег")
            offset = len(_ABE_MAGIC)
            (count,) = struct.unpack_from(">H", blob, offset)
            offset += 2
            names = []
            encapsulation = {}
            for _ in range(count):
                (name_len,) = struct.unpack_from(">H", blob, offset)
                offset += 2
                name = blob[offset:offset + name_len].decode("utf-8")
                offset += name_len
                (elem_len,) = struct.unpack_from(">H", blob, offset)
                offset += 2
                encapsulation[name] = int.from_bytes(blob[offset:offset + elem_len], "big")
                offset += elem_len
                names.append(name)
            (payload_len,) = struct.unpack_from(">I", blob, offset)
            offset += 4
            payload = blob[offset:offset + payload_len]
            if len(payload) != payload_len or offset + payload_len != len(blob):
                raise ValueError("неверная длина полезной нагрузки")
            return cls(policy=AccessPolicy.of(names), payload=payload, encapsulation=encapsulation)
        except (struct.error, UnicodeDecodeError, ValueError) as e:
            raise CorruptCiphertext(f"Не удалось разобрать шифротекст ABE: {e}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "policy": self.policy.to_list(),
            "payload": self.payload.hex(),
            "encapsulation": {a: format(v, "x") for a, v in sorted(self.encapsulation.items())},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AbeCiphertext":
        return cls(
            policy=AccessPolicy.of(data["policy"]),
            payload=bytes.fromhex(data["payload"]),
            encapsulation={a: int(v, 16) for a, v in data["encapsulation"].items()},
        )
