"""
Модели шаблона распространения доверия.
"""

import re
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Any, Dict, List, Optional, Tuple

from .crypto_models import AccessPolicy
from ..utils.canonical import format_timestamp, parse_date, parse_timestamp

UPDATE_POLICY = "update_policy"
TRUST_PROXY = "trust_proxy"
CREDENTIAL = "credential"
SECTION_ORDER = (UPDATE_POLICY, TRUST_PROXY, CREDENTIAL)

UNASSIGNED = "UNASSIGNED"
REQUIRED_TYPES = ("VerifiableCredential", "TrustPropagation")

_DID_PATTERN = re.compile(r"^did:[a-z0-9_]+:[A-Za-z0-9._:%-]+$")


def is_did(value: str) -> bool:
    return bool(_DID_PATTERN.match(value or ""))


def is_did_or_placeholder(value: str) -> bool:
    return value == UNASSIGNED or is_did(value)


def _string_list(data: Dict[str, Any], key: str, where: str, diagnostics: List[str]) -> List[str]:
    value = data.get(key)
    if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
        diagnostics.append(f"{where}.{key}: ожидается список строк")
        return []
    return list(value)


def _string(data: Dict[str, Any], key: str, where: str, diagnostics: List[str]) -> str:
    value = data.get(key)
    if not isinstance(value, str) or not value:
        diagnostics.append(f"{where}.{key}: ожидается непустая строка")
        return ""
    return value


def _policy(data: Dict[str, Any], key: str, where: str, diagnostics: List[str]) -> Optional[AccessPolicy]:
    names = _string_list(data, key, where, diagnostics)
    try:
        return AccessPolicy.of(names)
    except ValueError as e:
        diagnostics.append(f"{where}.{key}: {e}")
        return None


@dataclass(frozen=True)
class PolicyBlock:
    """Политика: атрибуты прокси, разрешения, атрибуты следующего эмитента."""
    proxy_attributes: AccessPolicy
    permissions: Tuple[str, ...]
    next_level_issuer_attrs: AccessPolicy

    def to_document(self) -> Dict[str, Any]:
        return {
            "proxyAttribute": self.proxy_attributes.to_list(),
            "permissions": list(self.permissions),
            "nextLevelIssuerAttrs": self.next_level_issuer_attrs.to_list(),
        }


@dataclass(frozen=True)
class UpdatePolicySection:
    """Фиксированная секция политики обновления."""
    context: str
    id: str
    jurisdiction: str
    type: Tuple[str, ...]
    official_issuer: str
    issuance_date: datetime
    expiration_date: datetime
    scenario: str
    approval_policy: Tuple[str, ...]
    num_votes_required: int
    policy: PolicyBlock

    def to_document(self) -> Dict[str, Any]:
        """Объект с именами полей как в шаблоне-образце."""
        return {
            "@context": self.context,
            "id": self.id,
            "jurisdiction": self.jurisdiction,
            "type": list(self.type),
            "officialIssuer": self.official_issuer,
            "issuanceDate": format_timestamp(self.issuance_date),
            "expirationDate": format_timestamp(self.expiration_date),
            "scenario": self.scenario,
            "approvalPolicy": list(self.approval_policy),
            "numVotesRequired": self.num_votes_required,
            "policy": self.policy.to_document(),
        }

    @classmethod
    def from_document(cls, data: Dict[str, Any], diagnostics: List[str]) -> Optional["UpdatePolicySection"]:
        """
        Разбор секции политики с накоплением диагностики.

        Args:
            data: JSON-объект секции
            diagnostics: Список, куда дописываются ошибки полей

        Returns:
            Секция или None, если есть ошибки
        """
        where = UPDATE_POLICY
        start = len(diagnostics)
        context = _string(data, "@context", where, diagnostics)
        cred_id = _string(data, "id", where, diagnostics)
        jurisdiction = _string(data, "jurisdiction", where, diagnostics)
        types = _string_list(data, "type", where, diagnostics)
        issuer = _string(data, "officialIssuer", where, diagnostics)
        if issuer and not is_did(issuer):
            diagnostics.append(f"{where}.officialIssuer: некорректный DID {issuer}")
        scenario = _string(data, "scenario", where, diagnostics)
        approval = _string_list(data, "approvalPolicy", where, diagnostics)

        votes = data.get("numVotesRequired")
        if not isinstance(votes, int) or isinstance(votes, bool) or votes < 0:
            diagnostics.append(f"{where}.numVotesRequired: ожидается неотрицательное целое")
            votes = 0

        issued = expires = None
        for key in ("issuanceDate", "expirationDate"):
            raw = data.get(key)
            try:
                moment = parse_timestamp(raw)
            except (TypeError, ValueError, AttributeError):
                diagnostics.append(f"{where}.{key}: ожидается метка времени RFC 3339")
                continue
            if key == "issuanceDate":
                issued = moment
            else:
                expires = moment
        if issued and expires and expires <= issued:
            diagnostics.append(f"{where}.expirationDate: должна быть позже issuanceDate")

        policy_data = data.get("policy")
        policy = None
        if not isinstance(policy_data, dict):
            diagnostics.append(f"{where}.policy: ожидается объект")
        else:
            proxy = _policy(policy_data, "proxyAttribute", f"{where}.policy", diagnostics)
            permissions = _string_list(policy_data, "permissions", f"{where}.policy", diagnostics)
            next_attrs = _policy(policy_data, "nextLevelIssuerAttrs", f"{where}.policy", diagnostics)
            if proxy and next_attrs:
                policy = PolicyBlock(proxy, tuple(permissions), next_attrs)

        if len(diagnostics) > start:
            return None
        return cls(
            context=context,
            id=cred_id,
            jurisdiction=jurisdiction,
            type=tuple(types),
            official_issuer=issuer,
            issuance_date=issued,
            expiration_date=expires,
            scenario=scenario,
            approval_policy=tuple(approval),
            num_votes_required=votes,
            policy=policy,
        )


@dataclass(frozen=True)
class NextLevelIssuer:
    id: str
    permissions: Tuple[str, ...]


@dataclass(frozen=True)
class TrustProxySection:
    """Секция прокси доверия."""
    trust_proxy: str
    next_level_issuer: NextLevelIssuer

    @classmethod
    def blank(cls) -> "TrustProxySection":
        return cls(UNASSIGNED, NextLevelIssuer(UNASSIGNED, ()))

    @property
    def instantiated(self) -> bool:
        return is_did(self.trust_proxy) and is_did(self.next_level_issuer.id)

    def to_document(self) -> Dict[str, Any]:
        return {
            "TrustProxy": self.trust_proxy,
            "nextLevelIssuerDetails": {
                "id": self.next_level_issuer.id,
                "permissions": list(self.next_level_issuer.permissions),
            },
        }

    @classmethod
    def from_document(cls, data: Dict[str, Any], diagnostics: List[str]) -> Optional["TrustProxySection"]:
        where = TRUST_PROXY
        start = len(diagnostics)
        proxy = _string(data, "TrustProxy", where, diagnostics)
        details = data.get("nextLevelIssuerDetails")
        issuer_id, permissions = "", []
        if not isinstance(details, dict):
            diagnostics.append(f"{where}.nextLevelIssuerDetails: ожидается объект")
        else:
            issuer_id = _string(details, "id", f"{where}.nextLevelIssuerDetails", diagnostics)
            permissions = _string_list(details, "permissions", f"{where}.nextLevelIssuerDetails", diagnostics)
        for key, value in (("TrustProxy", proxy), ("nextLevelIssuerDetails.id", issuer_id)):
            if value and not is_did_or_placeholder(value):
                diagnostics.append(f"{where}.{key}: некорректный DID {value}")
        if len(diagnostics) > start:
            return None
        return cls(proxy, NextLevelIssuer(issuer_id, tuple(permissions)))


@dataclass(frozen=True)
class CredentialSubject:
    id: str
    permissions: Tuple[str, ...]


@dataclass(frozen=True)
class CredentialSection:
    """Сам креденшал: заголовок, текст, подписант, держатель."""
    title: str
    issue_date: date
    text: str
    signed_by: str
    credential_subject: CredentialSubject

    @property
    def issued(self) -> bool:
        return is_did(self.signed_by) and is_did(self.credential_subject.id)

    def to_document(self) -> Dict[str, Any]:
        return {
            "Title": self.title,
            "IssueDate": self.issue_date.isoformat(),
            "Text": self.text,
            "signedBy": self.signed_by,
            "credentialSubject": {
                "id": self.credential_subject.id,
                "permissions": list(self.credential_subject.permissions),
            },
        }

    @classmethod
    def from_document(cls, data: Dict[str, Any], diagnostics: List[str]) -> Optional["CredentialSection"]:
        where = CREDENTIAL
        start = len(diagnostics)
        title = _string(data, "Title", where, diagnostics)
        text = _string(data, "Text", where, diagnostics)
        issue_date = None
        try:
            issue_date = parse_date(str(data.get("IssueDate", "")))
        except ValueError:
            diagnostics.append(f"{where}.IssueDate: ожидается дата YYYY-MM-DD или D/M/YYYY")
        signed_by = _string(data, "signedBy", where, diagnostics)
        if signed_by and not is_did_or_placeholder(signed_by):
            diagnostics.append(f"{where}.signedBy: некорректный DID {signed_by}")
        subject = data.get("credentialSubject")
        subject_id, permissions = "", []
        if not isinstance(subject, dict):
            diagnostics.append(f"{where}.credentialSubject: ожидается объект")
        else:
            subject_id = _string(subject, "id", f"{where}.credentialSubject", diagnostics)
            permissions = _string_list(subject, "permissions", f"{where}.credentialSubject", diagnostics)
            if subject_id and not is_did_or_placeholder(subject_id):
                diagnostics.append(f"{where}.credentialSubject.id: некорректный DID {subject_id}")
        if len(diagnostics) > start:
            return None
        return cls(title, issue_date, text, signed_by, CredentialSubject(subject_id, tuple(permissions)))


@dataclass(frozen=True)
class Section:
    """Секция шаблона в канонических байтах."""
    section_id: str
    content: bytes = field(repr=False)
    updatable: bool
    update_policy_attrs: Optional[AccessPolicy] = None

    def __post_init__(self):
        if self.updatable != (self.update_policy_attrs is not None):
            raise ValueError(f"Секция {self.section_id}: политика есть ровно у изменяемых секций")
        if self.section_id == UPDATE_POLICY and self.updatable:
            raise ValueError("Секция update_policy не может быть изменяемой")


@dataclass(frozen=True)
class TrustPropagationTemplate:
    """Шаблон: фиксированная политика плюс упорядоченные секции."""
    update_policy: UpdatePolicySection
    sections: Tuple[Section, ...]
    version: int = 0

    @property
    def template_id(self) -> str:
        return self.update_policy.id

    @property
    def section_ids(self) -> Tuple[str, ...]:
        return tuple(s.section_id for s in self.sections)

    def find_section(self, section_id: str) -> Optional[Section]:
        for section in self.sections:
            if section.section_id == section_id:
                return section
        return None
