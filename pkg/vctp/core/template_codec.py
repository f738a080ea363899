"""
Разбор и каноническая сериализация шаблона распространения доверия.
"""

import json
import logging
from dataclasses import replace
from pathlib import Path
from typing import Any, Dict, List, Union

from ..exceptions import (
    MalformedDocument,
    MissingTypeTag,
    SectionNotUpdatable,
    UnknownSection,
)
from ..models.template_models import (
    CREDENTIAL,
    REQUIRED_TYPES,
    TRUST_PROXY,
    UNASSIGNED,
    UPDATE_POLICY,
    CredentialSection,
    Section,
    TrustPropagationTemplate,
    TrustProxySection,
    UpdatePolicySection,
)
from ..utils.canonical import canonical_json

logger = logging.getLogger(__name__)

_CREDENTIAL_KEYS = {"Title", "IssueDate", "Text", "signedBy", "credentialSubject"}


def _classify(objects: List[Any], diagnostics: List[str]) -> Dict[str, Dict[str, Any]]:
    """Раскладка объектов массива по секциям; кредешнал может быть разбит на два объекта."""
    found: Dict[str, Dict[str, Any]] = {}
    for index, obj in enumerate(objects):
        if not isinstance(obj, dict):
            diagnostics.append(f"[{index}]: ожидается объект секции")
            continue
        if "officialIssuer" in obj or "type" in obj:
            key = UPDATE_POLICY
        elif "TrustProxy" in obj or "nextLevelIssuerDetails" in obj:
            key = TRUST_PROXY
        elif set(obj) & _CREDENTIAL_KEYS:
            key = CREDENTIAL
        else:
            diagnostics.append(f"[{index}]: не удалось определить секцию по полям {sorted(obj)}")
            continue
        if key in found and key != CREDENTIAL:
            diagnostics.append(f"[{index}]: повторная секция {key}")
            continue
        found.setdefault(key, {}).update(obj)
    for key in (UPDATE_POLICY, TRUST_PROXY, CREDENTIAL):
        if key not in found:
            diagnostics.append(f"{key}: секция отсутствует")
    return found


def parse(document: Union[bytes, str]) -> TrustPropagationTemplate:
    """
    Разбор документа шаблона.

    Args:
        document: Массив секций или обертка {"sections": [...], "version": n}

    Returns:
        Структурированный шаблон

    Raises:
        MalformedDocument: с диагностикой по полям
        MissingTypeTag: в type нет TrustPropagation
    """
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8")
        except UnicodeDecodeError:
            raise MalformedDocument(["document: ожидается UTF-8"])
    if not document or not document.strip():
        raise MalformedDocument(["document: пустой документ"])
    try:
        data = json.loads(document)
    except json.JSONDecodeError as e:
        raise MalformedDocument([f"document: некорректный JSON ({e.msg}, строка {e.lineno})"])

    version = 0
    if isinstance(data, dict):
        version = data.get("version", 0)
        if not isinstance(version, int) or isinstance(version, bool) or version < 0:
            raise MalformedDocument(["version: ожидается неотрицательное целое"])
        data = data.get("sections")
    if not isinstance(data, list):
        raise MalformedDocument(["document: ожидается массив секций"])

    diagnostics: List[str] = []
    found = _classify(data, diagnostics)

    policy_doc = found.get(UPDATE_POLICY, {})
    types = policy_doc.get("type")
    if isinstance(types, list) and "TrustPropagation" not in types:
        raise MissingTypeTag("В поле type нет тега TrustPropagation")
    if isinstance(types, list):
        for tag in REQUIRED_TYPES:
            if tag not in types:
                diagnostics.append(f"{UPDATE_POLICY}.type: нет тега {tag}")

    update_policy = UpdatePolicySection.from_document(policy_doc, diagnostics) if policy_doc else None
    proxy = TrustProxySection.from_document(found[TRUST_PROXY], diagnostics) if TRUST_PROXY in found else None
    credential = CredentialSection.from_document(found[CREDENTIAL], diagnostics) if CREDENTIAL in found else None

    if diagnostics:
        raise MalformedDocument(diagnostics)

    return TrustPropagationTemplate(
        update_policy=update_policy,
        sections=(
            Section(UPDATE_POLICY, canonical_json(update_policy.to_document()), False, None),
            Section(TRUST_PROXY, canonical_json(proxy.to_document()), True,
                    update_policy.policy.proxy_attributes),
            Section(CREDENTIAL, canonical_json(credential.to_document()), True,
                    update_policy.policy.next_level_issuer_attrs),
        ),
        version=version,
    )


def load_template_file(path: Union[str, Path]) -> TrustPropagationTemplate:
    """Загрузка шаблона из файла."""
    template = parse(Path(path).read_bytes())
    logger.info(f"📄 Шаблон загружен: {path} ({template.template_id})")
    return template


def serialize_canonical(t: TrustPropagationTemplate) -> bytes:
    """
    Каноническая сериализация шаблона.

    Args:
        t: Шаблон

    Returns:
        Детерминированные байты; parse(serialize_canonical(t)) == t
    """
    return canonical_json({
        "sections": [json.loads(section.content.decode("utf-8")) for section in t.sections],
        "version": t.version,
    })


def section_bytes(t: TrustPropagationTemplate, section_id: str) -> bytes:
    """Канонические байты содержимого секции."""
    section = t.find_section(section_id)
    if section is None:
        raise UnknownSection(section_id)
    return section.content


def _canonical_content(section_id: str, new_content: bytes) -> bytes:
    try:
        data = json.loads(new_content.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise MalformedDocument([f"{section_id}: некорректный JSON ({e})"])
    if not isinstance(data, dict):
        raise MalformedDocument([f"{section_id}: ожидается объект"])
    diagnostics: List[str] = []
    model = TrustProxySection if section_id == TRUST_PROXY else CredentialSection
    parsed = model.from_document(data, diagnostics)
    if diagnostics:
        raise MalformedDocument(diagnostics)
    return canonical_json(parsed.to_document())


def apply_update(t: TrustPropagationTemplate, section_id: str, new_content: bytes) -> TrustPropagationTemplate:
    """
    Замена содержимого изменяемой секции.

    Args:
        t: Шаблон
        section_id: Идентификатор секции
        new_content: Новое содержимое (JSON-объект секции)

    Returns:
        Новый шаблон с version + 1; остальные секции не меняются

    Raises:
        UnknownSection, SectionNotUpdatable, MalformedDocument
    """
    section = t.find_section(section_id)
    if section is None:
        raise UnknownSection(section_id)
    if not section.updatable:
        raise SectionNotUpdatable(section_id)
    content = _canonical_content(section_id, new_content)
    sections = tuple(
        replace(s, content=content) if s.section_id == section_id else s for s in t.sections
    )
    return replace(t, sections=sections, version=t.version + 1)


def trust_proxy_section(t: TrustPropagationTemplate) -> TrustProxySection:
    diagnostics: List[str] = []
    parsed = TrustProxySection.from_document(json.loads(section_bytes(t, TRUST_PROXY)), diagnostics)
    if diagnostics:
        raise MalformedDocument(diagnostics)
    return parsed


def credential_section(t: TrustPropagationTemplate) -> CredentialSection:
    diagnostics: List[str] = []
    parsed = CredentialSection.from_document(json.loads(section_bytes(t, CREDENTIAL)), diagnostics)
    if diagnostics:
        raise MalformedDocument(diagnostics)
    return parsed


def is_instantiated(t: TrustPropagationTemplate) -> bool:
    """В изменяемых секциях не осталось UNASSIGNED."""
    return all(
        UNASSIGNED.encode("utf-8") not in s.content for s in t.sections if s.updatable
    )
