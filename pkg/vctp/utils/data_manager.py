"""
Менеджер для сохранения и загрузки артефактов протокола.
"""

import csv
import json
import os
import logging
from datetime import datetime
from typing import List, Dict, Any, Optional, Sequence

from ..core.template_codec import load_template_file, serialize_canonical
from ..exceptions import TemplateError
from ..models.protocol_models import Actor
from ..models.signature_models import SanitizableSignature
from ..models.template_models import TrustPropagationTemplate

logger = logging.getLogger(__name__)


class DataManager:
    """Менеджер для работы с файлами прогонов: стенограммы, шаблоны, подписи, CSV."""

    def __init__(self, output_dir: str = "outputs"):
        """
        Инициализация менеджера данных.

        Args:
            output_dir: Директория для сохранения файлов
        """
        self.output_dir = output_dir
        self._ensure_output_dir()

    def _ensure_output_dir(self):
        """Создание директории для выходных файлов."""
        if not os.path.exists(self.output_dir):
            os.makedirs(self.output_dir)
            logger.info(f"Создана директория: {self.output_dir}")

    def _path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def save_json(self, data: Dict[str, Any], filename: str) -> str:
        """
        Сохранение словаря в JSON.

        Args:
            data: Данные
            filename: Имя файла в выходной директории

        Returns:
            Путь к сохраненному файлу или "" при ошибке
        """
        try:
            path = self._path(filename)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(data, f, ensure_ascii=False, indent=2)
            logger.info(f"💾 Сохранено: {path}")
            return path
        except (OSError, TypeError) as e:
            logger.error(f"Ошибка сохранения {filename}: {e}")
            return ""

    @staticmethod
    def load_json(path: str) -> Optional[Dict[str, Any]]:
        if not os.path.exists(path):
            logger.error(f"Файл не найден: {path}")
            return None
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.error(f"Ошибка загрузки {path}: {e}")
            return None

    def save_keystore(self, actors: Sequence[Actor], filename: str = "keystore.json") -> str:
        """
        Сохранение ключей акторов.

        Файл содержит закрытые ключи и ключи атрибутов.
        """
        path = self.save_json({"actors": [actor.to_dict() for actor in actors]}, filename)
        if path:
            try:
                os.chmod(path, 0o600)
            except OSError as e:
                logger.warning(f"Не удалось ограничить права на {path}: {e}")
        return path

    def load_keystore(self, path: str) -> List[Actor]:
        data = self.load_json(path)
        if data is None:
            return []
        try:
            actors = [Actor.from_dict(item) for item in data.get("actors", [])]
        except (KeyError, TypeError, ValueError) as e:
            logger.error(f"Хранилище ключей повреждено: {e}")
            return []
        logger.info(f"🔑 Загружено ключей акторов: {len(actors)}")
        return actors

    def save_template(self, template: TrustPropagationTemplate, filename: str) -> str:
        """Каноническая форма шаблона."""
        try:
            path = self._path(filename)
            with open(path, "wb") as f:
                f.write(serialize_canonical(template))
            logger.info(f"📄 Шаблон сохранен: {path}")
            return path
        except OSError as e:
            logger.error(f"Ошибка сохранения шаблона: {e}")
            return ""

    def load_template(self, path: str) -> Optional[TrustPropagationTemplate]:
        try:
            return load_template_file(path)
        except (OSError, TemplateError) as e:
            logger.error(f"Ошибка загрузки шаблона {path}: {e}")
            return None

    def save_sidecar(self, signature: SanitizableSignature, filename: str) -> str:
        """Сопроводительный файл подписи рядом с шаблоном."""
        return self.save_json(signature.to_dict(), filename)

    def load_sidecar(self, path: str) -> Optional[SanitizableSignature]:
        data = self.load_json(path)
        if data is None:
            return None
        try:
            return SanitizableSignature.from_dict(data)
        except (KeyError, TypeError, ValueError) as e:
            logger.error(f"Сопроводительный файл подписи поврежден: {e}")
            return None

    def write_csv(self, rows: List[Dict[str, Any]], header: Sequence[str], filename: str) -> str:
        """
        Запись CSV с фиксированными колонками.

        Args:
            rows: Строки-словари
            header: Порядок колонок
            filename: Имя файла

        Returns:
            Путь к файлу или "" при ошибке
        """
        try:
            path = self._path(filename)
            with open(path, "w", encoding="utf-8", newline="") as f:
                writer = csv.DictWriter(f, fieldnames=list(header), extrasaction="ignore")
                writer.writeheader()
                writer.writerows(rows)
            logger.info(f"📈 CSV записан: {path} ({len(rows)} строк)")
            return path
        except OSError as e:
            logger.error(f"Ошибка записи CSV {filename}: {e}")
            return ""

    def create_run_summary(self,
                           command: str,
                           output_name: str,
                           files: List[str],
                           stats: Dict[str, Any] = None) -> str:
        """
        Создание сводки по прогону.

        Args:
            command: Команда CLI
            output_name: Базовое имя файлов
            files: Созданные файлы
            stats: Статистика прогона

        Returns:
            Путь к файлу сводки
        """
        summary = {
            "command": command,
            "created_at": datetime.now().isoformat(),
            "stats": stats or {},
            "files_created": [f for f in files if f],
        }
        return self.save_json(summary, f"{output_name}_summary.json")

    def get_output_files(self, output_name: str) -> List[str]:
        """Список файлов прогона с данным базовым именем."""
        if not os.path.isdir(self.output_dir):
            return []
        return sorted(
            os.path.join(self.output_dir, name)
            for name in os.listdir(self.output_dir)
            if name.startswith(output_name)
        )
