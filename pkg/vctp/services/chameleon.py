"""
Хамелеон-хеш на дискретном логарифме: CH(m, r) = g^H(m) * hk^r mod p.
"""

import hashlib
import logging
from typing import Optional

from gmpy2 import mpz, powmod, invert

from ..exceptions import InvalidParams, InvalidRandomness, MissingTrapdoor
from ..models.crypto_models import (
    ChameleonDigest,
    ChameleonKeyPair,
    GroupParams,
    Randomness,
)
from .rng import RandomSource

logger = logging.getLogger(__name__)


class ChameleonHash:
    """Тройка (Gen, CH, CH^-1) над подгруппой порядка q."""

    def __init__(self, params: GroupParams):
        """
        Инициализация.

        Args:
            params: Параметры группы

        Raises:
            InvalidParams: если параметры не проходят проверку
        """
        self.params = params.validate()
        self._p = mpz(params.p)
        self._q = mpz(params.q)
        self._g = mpz(params.g)

    def message_scalar(self, message: bytes) -> int:
        """H(message): SHA-256, приведенный по модулю q."""
        return int.from_bytes(hashlib.sha256(message).digest(), "big") % self.params.q

    def gen(self, rng: RandomSource, td: Optional[int] = None) -> ChameleonKeyPair:
        """
        Генерация пары (hk, td).

        Args:
            rng: Источник случайности
            td: Принудительный trapdoor (для тестов)

        Returns:
            Пара ключей с hk = g^td mod p
        """
        if td is None:
            td = rng.scalar(self.params.q)
        if not 1 <= td <= self.params.q - 1:
            raise InvalidParams("td вне диапазона [1, q-1]")
        hk = int(powmod(self._g, td, self._p))
        return ChameleonKeyPair(hk=hk, td=td, params=self.params)

    def random(self, rng: RandomSource) -> Randomness:
        return Randomness(rng.randbelow(self.params.q))

    def _check_randomness(self, r: Randomness) -> None:
        if not 0 <= r.r < self.params.q:
            raise InvalidRandomness(f"r должно быть в [0, q-1], получено {r.r}")

    def hash(self, hk: int, message: bytes, r: Randomness) -> ChameleonDigest:
        """
        Вычисление CH(message, r).

        Args:
            hk: Публичный ключ хеширования
            message: Сообщение
            r: Случайность

        Returns:
            Дайджест g^H(m) * hk^r mod p
        """
        self._check_randomness(r)
        if not 1 <= hk < self.params.p:
            raise InvalidParams("hk вне группы")
        h = self.message_scalar(message)
        value = (powmod(self._g, h, self._p) * powmod(mpz(hk), r.r, self._p)) % self._p
        return ChameleonDigest(int(value))

    def verify(self, hk: int, message: bytes, r: Randomness, digest: ChameleonDigest) -> bool:
        """Проверка, что digest = CH(message, r)."""
        try:
            return self.hash(hk, message, r) == digest
        except (InvalidRandomness, InvalidParams):
            return False

    def find_collision(self,
                       kp: ChameleonKeyPair,
                       message: bytes,
                       r: Randomness,
                       new_message: bytes) -> Randomness:
        """
        Поиск r' такого, что CH(new_message, r') = CH(message, r).

        Args:
            kp: Пара ключей с trapdoor
            message: Исходное сообщение
            r: Исходная случайность
            new_message: Новое сообщение

        Returns:
            Новая случайность r'
        """
        if kp.td is None:
            raise MissingTrapdoor("Для поиска коллизии нужен trapdoor")
        self._check_randomness(r)
        q = self._q
        td = mpz(kp.td)
        numerator = (self.message_scalar(message) + td * r.r - self.message_scalar(new_message)) % q
        r_new = (numerator * invert(td, q)) % q
        return Randomness(int(r_new))
