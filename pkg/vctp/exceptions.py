"""
Иерархия исключений протокола VCTP.
"""

from typing import Iterable, List, Optional


class VctpError(Exception):
    """Базовое исключение протокола."""


class ConfigError(VctpError):
    """Ошибка конфигурации."""


# --- keys ------------------------------------------------------------------

class SealedBoxError(VctpError):
    """Конверт не расшифровывается."""


# --- chameleon -------------------------------------------------------------

class ChameleonError(VctpError):
    """Базовая ошибка хамелеон-хеша."""


class InvalidParams(ChameleonError):
    """Параметры группы не удовлетворяют инвариантам."""


class InvalidRandomness(ChameleonError):
    """Случайность r вне диапазона [0, q-1]."""


class MissingTrapdoor(ChameleonError):
    """Для поиска коллизии нужен секретный ключ td."""


# --- abe -------------------------------------------------------------------

class AbeError(VctpError):
    """Базовая ошибка ABE."""


class EmptyUniverse(AbeError):
    """Пустой список атрибутов."""


class DuplicateAttribute(AbeError):
    """Повторяющееся имя атрибута."""


class UnknownAttribute(AbeError):
    """Атрибут отсутствует в универсуме."""

    def __init__(self, attributes: Iterable[str]):
        self.attributes = sorted(attributes)
        super().__init__(f"Неизвестные атрибуты: {', '.join(self.attributes)}")


class PolicyNotSatisfied(AbeError):
    """Набор атрибутов ключа не покрывает политику."""

    def __init__(self, missing: Iterable[str]):
        self.missing = sorted(missing)
        super().__init__(f"Политика не выполнена, не хватает: {', '.join(self.missing)}")


class CorruptCiphertext(AbeError):
    """Проверка целостности шифротекста не пройдена."""


# --- template --------------------------------------------------------------

class TemplateError(VctpError):
    """Базовая ошибка шаблона."""


class MalformedDocument(TemplateError):
    """Документ шаблона не разобран."""

    def __init__(self, diagnostics: List[str]):
        self.diagnostics = list(diagnostics)
        super().__init__("Некорректный документ: " + "; ".join(self.diagnostics))


class MissingTypeTag(TemplateError):
    """В поле type нет тега TrustPropagation."""


class UnknownSection(TemplateError):
    """Секция с таким идентификатором отсутствует."""

    def __init__(self, section_id: str):
        self.section_id = section_id
        super().__init__(f"Неизвестная секция: {section_id}")


class SectionNotUpdatable(TemplateError):
    """Попытка изменить фиксированную секцию."""

    def __init__(self, section_id: str):
        self.section_id = section_id
        super().__init__(f"Секция не изменяемая: {section_id}")


# --- pss -------------------------------------------------------------------

class PssError(VctpError):
    """Базовая ошибка санитизируемой подписи."""


class SigningFailure(PssError):
    """Не удалось подписать комбинированный дайджест."""


class StaleSignature(PssError):
    """Подпись не соответствует шаблону."""

    def __init__(self, reasons: List[str]):
        self.reasons = list(reasons)
        super().__init__("Подпись не соответствует шаблону: " + "; ".join(self.reasons))


class TrapdoorMismatch(PssError):
    """Расшифрованный trapdoor не соответствует hk секции."""


# --- ledger ----------------------------------------------------------------

class LedgerError(VctpError):
    """Базовая ошибка реестра."""


class DuplicateDid(LedgerError):
    """DID уже зарегистрирован."""


class DuplicateRecord(LedgerError):
    """Запись с таким record_id уже есть."""


class VoteGateFailed(LedgerError):
    """Коммит отклонен: голосование не пройдено."""

    def __init__(self, reason: str, request_id: Optional[str] = None):
        self.reason = reason
        self.request_id = request_id
        super().__init__(f"VoteGateFailed: {reason}")


class CorruptLog(LedgerError):
    """Журнал транзакций поврежден."""


class UnknownDid(LedgerError):
    """DID не найден в реестре."""


# --- voting ----------------------------------------------------------------

class VotingError(VctpError):
    """Базовая ошибка голосования."""


class RequestClosed(VotingError):
    """Запрос на голосование уже закрыт."""


class UnknownRequest(VotingError):
    """Запрос на голосование не найден."""


class MalformedCredential(VotingError):
    """Ролевой креденшал некорректен."""


class MalformedBallot(VotingError):
    """Бюллетень не расшифровывается или поврежден."""


class UnknownAdmin(VotingError):
    """Ключ не принадлежит системному администратору."""


class VotingNotRequired(VotingError):
    """numVotesRequired = 0, голосование пропускается."""


# --- protocol --------------------------------------------------------------

class ProtocolError(VctpError):
    """Базовая ошибка протокола."""


class NotL1Issuer(ProtocolError):
    """Актор не является эмитентом L1."""


class IssuerNotOnboarded(ProtocolError):
    """Персональный эмитент не найден в реестре эмитентов."""


class EnvelopeDecryptionFailed(ProtocolError):
    """Конверт не расшифровывается ключом получателя."""


class AttestationFailed(ProtocolError):
    """Аттестация атрибутов не пройдена."""


class PermissionDenied(ProtocolError):
    """Политика шаблона не дает нужного разрешения."""
