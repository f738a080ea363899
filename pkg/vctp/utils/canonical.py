"""
Каноническая JSON-форма: отсортированные ключи, без пробелов, UTF-8.
"""

import json
from datetime import date, datetime, timezone
from typing import Any

RFC3339_FORMAT = "%Y-%m-%dT%H:%M:%SZ"
RFC3339_FRACTION_FORMAT = "%Y-%m-%dT%H:%M:%S.%fZ"


def canonical_json(obj: Any) -> bytes:
    """Детерминированные байты структуры."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False).encode("utf-8")


def format_timestamp(moment: datetime) -> str:
    """RFC 3339 в форме Zulu; доли секунды сохраняются, если они есть."""
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    moment = moment.astimezone(timezone.utc)
    return moment.strftime(RFC3339_FRACTION_FORMAT if moment.microsecond else RFC3339_FORMAT)


def parse_timestamp(value: str) -> datetime:
    """
    Разбор метки времени RFC 3339.

    Args:
        value: Строка вида 2021-07-10T04:20:00Z

    Returns:
        datetime в UTC
    """
    text = value.strip()
    if text.endswith("Z") or text.endswith("z"):
        text = text[:-1] + "+00:00"
    moment = datetime.fromisoformat(text)
    if moment.tzinfo is None:
        moment = moment.replace(tzinfo=timezone.utc)
    return moment.astimezone(timezone.utc)


def parse_date(value: str) -> date:
    """Дата в ISO-форме или D/M/YYYY."""
    text = value.strip()
    if "/" in text:
        day, month, year = (int(part) for part in text.split("/"))
        return date(year, month, day)
    return date.fromisoformat(text)
