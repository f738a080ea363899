"""
Рендеринг отчетов прогонов через шаблоны jinja2.
"""

import os
import logging
from typing import Any, Dict, Optional

from jinja2 import Environment, FileSystemLoader, StrictUndefined, TemplateError, select_autoescape

from ..config.settings import Settings

logger = logging.getLogger(__name__)


class ReportRenderer:
    """Генератор текстовых и HTML отчетов."""

    def __init__(self, templates_dir: Optional[str] = None):
        """
        Инициализация окружения шаблонов.

        Args:
            templates_dir: Каталог шаблонов (по умолчанию встроенный)
        """
        self.env = Environment(
            loader=FileSystemLoader(str(templates_dir or Settings.TEMPLATES_DIR)),
            autoescape=select_autoescape(["html"]),
            undefined=StrictUndefined,
            trim_blocks=True,
            lstrip_blocks=True,
        )
        self.env.filters["mark"] = lambda ok: "✅" if ok else "❌"
        self.env.filters["short"] = lambda value, n=16: (value[:n] + "…") if value and len(value) > n else value

    def render(self, template_name: str, **context: Any) -> str:
        return self.env.get_template(template_name).render(**context)

    def render_transcript(self, transcript: Dict[str, Any]) -> str:
        """Текстовая стенограмма сценария."""
        return self.render("transcript.txt.j2", run=transcript)

    def render_verification(self, report: Dict[str, Any]) -> str:
        return self.render("verification_report.txt.j2", report=report)

    def render_attack(self, report: Dict[str, Any]) -> str:
        return self.render("attack_report.txt.j2", report=report)

    def write_scenario_html(self, transcript: Dict[str, Any], issuers: list, output_path: str) -> str:
        """
        HTML-страница прогона сценария.

        Args:
            transcript: Стенограмма (ScenarioResult.transcript())
            issuers: Реестр эмитентов после прогона
            output_path: Путь к файлу

        Returns:
            Путь к созданному файлу или "" при ошибке
        """
        try:
            html = self.render("scenario_report.html.j2", run=transcript, issuers=issuers)
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(html)
            logger.info(f"HTML отчет создан: {output_path}")
            return output_path
        except (OSError, TemplateError) as e:
            logger.error(f"Ошибка создания HTML отчета: {e}")
            return ""

    def write_text(self, text: str, output_path: str) -> str:
        try:
            os.makedirs(os.path.dirname(output_path) or ".", exist_ok=True)
            with open(output_path, "w", encoding="utf-8") as f:
                f.write(text)
            return output_path
        except OSError as e:
            logger.error(f"Ошибка записи отчета {output_path}: {e}")
            return ""
