"""
Единый источник случайности.

С сидом источник воспроизводим (сценарии, тесты, бенчмарк), без сида
берет энтропию ОС.
"""

import hashlib
import random
import secrets
import threading
from typing import Optional


class RandomSource:
    """Источник случайных скаляров и байтов."""

    def __init__(self, seed: Optional[int] = None):
        """
        Инициализация источника.

        Args:
            seed: Сид; None означает системную энтропию
        """
        self.seed = seed
        self._rng = random.Random(seed) if seed is not None else secrets.SystemRandom()
        self._lock = threading.Lock()

    @property
    def deterministic(self) -> bool:
        return self.seed is not None

    def randbelow(self, n: int) -> int:
        """Равномерное целое из [0, n-1]."""
        if n <= 0:
            raise ValueError("n должно быть положительным")
        with self._lock:
            return self._rng.randrange(n)

    def scalar(self, q: int) -> int:
        """Равномерный скаляр из [1, q-1]."""
        if q < 2:
            raise ValueError("q должно быть не меньше 2")
        return self.randbelow(q - 1) + 1

    def token_bytes(self, n: int) -> bytes:
        with self._lock:
            return bytes(self._rng.getrandbits(8) for _ in range(n))

    def fork(self, label: str) -> "RandomSource":
        """
        Дочерний поток случайности.

        Args:
            label: Метка потока

        Returns:
            Независимый источник, детерминированный при наличии сида
        """
        if self.seed is None:
            return RandomSource()
        material = hashlib.sha256(f"{self.seed}|{label}".encode("utf-8")).digest()
        return RandomSource(int.from_bytes(material[:8], "big"))
