"""
Настройки и конфигурация протокола VCTP.
"""

import os
from pathlib import Path
from typing import Dict, Any, Optional

from dotenv import load_dotenv

load_dotenv()

PACKAGE_DIR = Path(__file__).resolve().parent.parent


def _optional_int(value: Optional[str]) -> Optional[int]:
    if value is None or value.strip() == "":
        return None
    return int(value)


class Settings:
    """Класс для управления настройками приложения."""

    # Криптография
    PROFILE = os.getenv("VCTP_PROFILE", "default")
    SEED = _optional_int(os.getenv("VCTP_SEED"))

    # Реестр
    LEDGER_PATH = os.getenv("VCTP_LEDGER_PATH", "")
    GENESIS_PATH = os.getenv("VCTP_GENESIS_PATH", "")

    # Вывод
    OUTPUT_DIR = os.getenv("VCTP_OUTPUT_DIR", "outputs")

    # Бенчмарк
    BENCH_RUNS = int(os.getenv("VCTP_BENCH_RUNS", "100"))
    BENCH_ATTRIBUTE_COUNTS = [8, 16, 24, 32]
    BENCH_VOTER_COUNTS = list(range(5, 55, 5))
    BENCH_CONCURRENCY = list(range(50, 550, 50))

    # Настройки логирования
    LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
    LOG_FILE = os.getenv("LOG_FILE", "vctp.log")
    LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"

    PROFILES = ("test", "small", "default")

    # Встроенные данные и шаблоны отчетов
    DATA_DIR = PACKAGE_DIR / "data"
    TEMPLATES_DIR = PACKAGE_DIR / "templates"
    DEFAULT_SCENARIO = DATA_DIR / "hospital.scenario"
    DEFAULT_GENESIS = DATA_DIR / "genesis.json"

    @classmethod
    def get_config(cls) -> Dict[str, Any]:
        """
        Получение полной конфигурации.

        Returns:
            Словарь с настройками
        """
        return {
            "crypto": {
                "profile": cls.PROFILE,
                "seed": cls.SEED,
            },
            "ledger": {
                "path": cls.LEDGER_PATH,
                "genesis": cls.GENESIS_PATH,
            },
            "output_dir": cls.OUTPUT_DIR,
            "bench": {
                "runs_per_point": cls.BENCH_RUNS,
                "attribute_counts": list(cls.BENCH_ATTRIBUTE_COUNTS),
                "voter_counts": list(cls.BENCH_VOTER_COUNTS),
                "concurrency_levels": list(cls.BENCH_CONCURRENCY),
            },
            "logging": {
                "level": cls.LOG_LEVEL,
                "file": cls.LOG_FILE,
                "format": cls.LOG_FORMAT,
            },
        }

    @classmethod
    def validate_config(cls, config: Optional[Dict[str, Any]] = None) -> Dict[str, bool]:
        """
        Валидация конфигурации.

        Args:
            config: Проверяемая конфигурация (по умолчанию текущая)

        Returns:
            Словарь с результатами валидации
        """
        config = config or cls.get_config()
        results = {
            "crypto_config": True,
            "bench_config": True,
            "output_config": True,
        }

        try:
            if config["crypto"]["profile"] not in cls.PROFILES:
                results["crypto_config"] = False

            bench = config["bench"]
            if bench["runs_per_point"] < 1:
                results["bench_config"] = False
            for key in ("attribute_counts", "voter_counts", "concurrency_levels"):
                if not bench[key] or any(n < 1 for n in bench[key]):
                    results["bench_config"] = False

            try:
                os.makedirs(config["output_dir"], exist_ok=True)
            except OSError:
                results["output_config"] = False

        except (KeyError, TypeError):
            results = {k: False for k in results}

        return results


def merge_config(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """
    Рекурсивное слияние пользовательской конфигурации с базовой.

    Args:
        base: Базовая конфигурация
        override: Значения, которые нужно наложить

    Returns:
        Новый словарь
    """
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_config(merged[key], value)
        else:
            merged[key] = value
    return merged


# Глобальная конфигурация
DEFAULT_CONFIG = Settings.get_config()
