"""
Симулированный реестр: DID, эмитенты, креденшалы и хранилище голосований.

Состояние: чистая свертка журнала транзакций. Все изменения идут через
одну точку записи; читатели получают неизменяемые снимки.
"""

import hashlib
import json
import logging
import os
import threading
from dataclasses import replace
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple, Union

from ..exceptions import (
    CorruptLog,
    DuplicateDid,
    DuplicateRecord,
    LedgerError,
    UnknownAdmin,
    UnknownDid,
    UnknownRequest,
    VctpError,
    VoteGateFailed,
)
from ..models.ledger_models import (
    CredentialRecord,
    DidRecord,
    IssuerGrant,
    IssuerRecord,
    LedgerState,
    Transaction,
)
from ..models.voting_models import VoteRecord, VoteStatus, VoteSubmission, VotingRequest
from ..services.keys import ddo_signing_key
from ..utils.canonical import canonical_json, format_timestamp, parse_timestamp
from . import voting

logger = logging.getLogger(__name__)

GENESIS_ISSUER = "genesis_issuer"
GENESIS_ADMIN = "genesis_admin"
REGISTER_DID = "register_did"
PUBLISH_ATTRIBUTES = "publish_attributes"
OPEN_VOTE = "open_vote"
RECORD_VOTE = "record_vote"
CLOSE_VOTE = "close_vote"
COMMIT_CREDENTIAL = "commit_credential"


# --- свертка ----------------------------------------------------------------

def _apply_register_did(state: LedgerState, tx: Transaction) -> LedgerState:
    did = tx.payload["did"]
    if did in state.did_registry:
        raise DuplicateDid(f"DID уже зарегистрирован: {did}")
    record = DidRecord(did=did, ddo=tx.payload["ddo"], registered_at=tx.index)
    return replace(state, did_registry={**state.did_registry, did: record})


def _apply_genesis_issuer(state: LedgerState, tx: Transaction) -> LedgerState:
    did = tx.payload["did"]
    if did in state.issuer_registry:
        raise DuplicateRecord(f"Эмитент уже в реестре: {did}")
    record = IssuerRecord(did=did, level=1, tx_index=tx.index)
    return replace(state, issuer_registry={**state.issuer_registry, did: record})


def _apply_genesis_admin(state: LedgerState, tx: Transaction) -> LedgerState:
    did = tx.payload["did"]
    if state.voting_admin is not None:
        raise DuplicateRecord(f"Администратор голосования уже назначен: {state.voting_admin}")
    return replace(state, voting_admin=did)


def _apply_publish_attributes(state: LedgerState, tx: Transaction) -> LedgerState:
    owner = tx.payload["owner"]
    return replace(state, attribute_registry={**state.attribute_registry, owner: tx.payload["public"]})


def _reopenable(state: LedgerState, req: VotingRequest, at: Optional[datetime]) -> bool:
    if req.request_id in state.consumed_gates:
        return False
    return voting.tally(req, at) in (VoteStatus.FAILED, VoteStatus.EXPIRED)


def _apply_open_vote(state: LedgerState, tx: Transaction) -> LedgerState:
    req = VotingRequest.from_dict(tx.payload["request"])
    at = parse_timestamp(tx.payload["at"]) if tx.payload.get("at") else None
    existing = state.voting_store.get(req.request_id)
    if existing is not None:
        if not _reopenable(state, existing, at):
            raise DuplicateRecord(f"Запрос на голосование уже открыт: {req.request_id}")
        logger.info(f"🔄 Повторное голосование {req.request_id[:12]} после {voting.tally(existing, at).value}")
    return replace(state, voting_store={**state.voting_store, req.request_id: req})


def _request(state: LedgerState, request_id: str) -> VotingRequest:
    req = state.voting_store.get(request_id)
    if req is None:
        raise UnknownRequest(f"Запрос на голосование не найден: {request_id}")
    return req


def _apply_record_vote(state: LedgerState, tx: Transaction) -> LedgerState:
    req = _request(state, tx.payload["request_id"])
    if req.status is not VoteStatus.OPEN:
        raise LedgerError(f"Голос в закрытый запрос {req.request_id}")
    try:
        updated = voting.apply_vote(req, VoteRecord.from_dict(tx.payload["vote"]))
    except ValueError as e:
        raise LedgerError(str(e))
    return replace(state, voting_store={**state.voting_store, req.request_id: updated})


def _apply_close_vote(state: LedgerState, tx: Transaction) -> LedgerState:
    admin = tx.payload.get("admin")
    if state.voting_admin is None or admin != state.voting_admin:
        raise UnknownAdmin(f"{admin} не может закрыть голосование")
    req = _request(state, tx.payload["request_id"])
    closed = voting.close_request(req)
    return replace(state, voting_store={**state.voting_store, req.request_id: closed})


def _check_gate(state: LedgerState, record: CredentialRecord, votes_required: int,
                at: Optional[datetime]) -> None:
    if record.gate is None:
        if votes_required > 0:
            raise VoteGateFailed(f"update requires {votes_required} votes, no voting request")
        return
    req = state.voting_store.get(record.gate)
    if req is None:
        raise VoteGateFailed("voting request not found", record.gate)
    if record.gate in state.consumed_gates:
        raise VoteGateFailed("voting request already consumed", record.gate)
    status = voting.tally(req, at)
    if status is not VoteStatus.PASSED:
        raise VoteGateFailed(
            f"voting request {status.value} ({req.accepted_approvals}/{req.threshold})", record.gate
        )
    if req.threshold < votes_required:
        raise VoteGateFailed(f"threshold {req.threshold} below required {votes_required}", record.gate)
    update = req.pending_update
    if (req.template_id != record.template_id
            or update.section_id != record.section_id
            or update.new_content_digest != record.content_digest
            or update.updater_did != record.committed_by
            or update.version != record.version):
        raise VoteGateFailed("voting request does not match committed update", record.gate)


def _register_template(state: LedgerState, record: CredentialRecord, tx: Transaction) -> Dict[str, int]:
    committer = state.issuer_registry.get(record.committed_by)
    if committer is None or committer.level != 1:
        raise VoteGateFailed(f"template {record.template_id} is not registered by an L1 issuer")
    if record.version != 0 or record.gate is not None or tx.payload.get("issuer_grant") is not None:
        raise VoteGateFailed(f"template {record.template_id} must be registered before updates")
    votes_required = tx.payload.get("votes_required")
    if votes_required is None or int(votes_required) < 0:
        raise LedgerError(f"numVotesRequired не указан для шаблона {record.template_id}")
    return {**state.template_thresholds, record.template_id: int(votes_required)}


def _apply_commit_credential(state: LedgerState, tx: Transaction) -> LedgerState:
    record = CredentialRecord.from_dict(tx.payload["record"])
    at = parse_timestamp(tx.payload["at"]) if tx.payload.get("at") else None
    if record.record_id in state.credential_registry:
        raise DuplicateRecord(f"Запись уже в реестре: {record.record_id}")

    thresholds = state.template_thresholds
    registered = thresholds.get(record.template_id)
    if registered is None:
        thresholds = _register_template(state, record, tx)
    else:
        supplied = tx.payload.get("votes_required")
        if supplied is not None and int(supplied) != registered:
            raise VoteGateFailed(
                f"numVotesRequired {supplied} differs from registered {registered} for {record.template_id}"
            )
        _check_gate(state, record, registered, at)

    issuers = state.issuer_registry
    grant = tx.payload.get("issuer_grant")
    if grant is not None:
        if grant["did"] in issuers:
            raise DuplicateRecord(f"Эмитент уже в реестре: {grant['did']}")
        if int(grant["level"]) != 2:
            raise LedgerError(f"Шаблон L1 дает уровень 2, а не {grant['level']}")
        issuers = {**issuers, grant["did"]: IssuerRecord(
            did=grant["did"],
            level=int(grant["level"]),
            onboarded_by=record.committed_by,
            template_ref=record.record_id,
            tx_index=tx.index,
        )}
    gates = state.consumed_gates | {record.gate} if record.gate else state.consumed_gates
    return replace(
        state,
        credential_registry={**state.credential_registry, record.record_id: record},
        credential_index={**state.credential_index, (record.template_id, record.version): record.record_id},
        issuer_registry=issuers,
        template_thresholds=thresholds,
        consumed_gates=gates,
    )


_APPLIERS: Dict[str, Callable[[LedgerState, Transaction], LedgerState]] = {
    GENESIS_ISSUER: _apply_genesis_issuer,
    GENESIS_ADMIN: _apply_genesis_admin,
    REGISTER_DID: _apply_register_did,
    PUBLISH_ATTRIBUTES: _apply_publish_attributes,
    OPEN_VOTE: _apply_open_vote,
    RECORD_VOTE: _apply_record_vote,
    CLOSE_VOTE: _apply_close_vote,
    COMMIT_CREDENTIAL: _apply_commit_credential,
}


def apply(state: LedgerState, tx: Transaction) -> LedgerState:
    """
    Применение одной транзакции.

    Args:
        state: Текущее состояние
        tx: Транзакция с index == state.height

    Returns:
        Новое состояние; исходное не меняется
    """
    if tx.index != state.height:
        raise CorruptLog(f"Транзакция {tx.index} на высоте {state.height}")
    applier = _APPLIERS.get(tx.kind)
    if applier is None:
        raise CorruptLog(f"Неизвестный тип транзакции: {tx.kind}")
    updated = applier(state, tx)
    return replace(updated, height=state.height + 1, last_tx=tx)


def _next(state: LedgerState, kind: str, payload: Dict[str, Any]) -> LedgerState:
    return apply(state, Transaction(index=state.height, kind=kind, payload=payload))


def empty_state() -> LedgerState:
    return LedgerState()


def register_did(state: LedgerState, did: str, ddo: Dict[str, Any]) -> LedgerState:
    """Регистрация DID; DuplicateDid при повторе."""
    return _next(state, REGISTER_DID, {"did": did, "ddo": ddo})


def seed_issuer(state: LedgerState, did: str) -> LedgerState:
    """Эмитент L1 из генезиса."""
    return _next(state, GENESIS_ISSUER, {"did": did})


def assign_voting_admin(state: LedgerState, did: str) -> LedgerState:
    """Администратор голосования; назначается один раз."""
    return _next(state, GENESIS_ADMIN, {"did": did})


def publish_attributes(state: LedgerState, owner_did: str, public: Dict[str, Any]) -> LedgerState:
    return _next(state, PUBLISH_ATTRIBUTES, {"owner": owner_did, "public": public})


def open_vote(state: LedgerState, req: VotingRequest, at: Optional[datetime] = None) -> LedgerState:
    """Открытие запроса; Failed или Expired запрос с тем же адресом открывается заново."""
    return _next(state, OPEN_VOTE, {"request": req.to_dict(), "at": format_timestamp(at) if at else None})


def record_vote(state: LedgerState, request_id: str, vote: VoteRecord) -> LedgerState:
    return _next(state, RECORD_VOTE, {"request_id": request_id, "vote": vote.to_dict()})


def close_vote(state: LedgerState, request_id: str, admin_did: str) -> LedgerState:
    """Закрытие администратором; UnknownAdmin для любого другого DID."""
    return _next(state, CLOSE_VOTE, {"request_id": request_id, "admin": admin_did})


def commit_credential(state: LedgerState,
                      record: CredentialRecord,
                      issuer_grant: Optional[IssuerGrant] = None,
                      at: Optional[datetime] = None,
                      votes_required: Optional[int] = None) -> LedgerState:
    """
    Запись о выпуске креденшала.

    Первый коммит шаблона делает эмитент L1 с версией 0: он регистрирует
    numVotesRequired. Все следующие коммиты проверяются по
    зарегистрированному порогу.

    Args:
        state: Текущее состояние
        record: Запись (с gate, если обновление шло через голосование)
        issuer_grant: Эмитент следующего уровня, добавляемый атомарно
        at: Момент коммита для проверки истечения голосования
        votes_required: numVotesRequired при регистрации шаблона

    Returns:
        Новое состояние

    Raises:
        VoteGateFailed, DuplicateRecord, LedgerError
    """
    return _next(state, COMMIT_CREDENTIAL, {
        "record": record.to_dict(),
        "votes_required": votes_required,
        "issuer_grant": issuer_grant.to_dict() if issuer_grant else None,
        "at": format_timestamp(at) if at else None,
    })


def lookup_issuer(state: LedgerState, did: str) -> Optional[IssuerRecord]:
    return state.issuer_registry.get(did)


def replay(tx_log: Iterable[Transaction]) -> LedgerState:
    """
    Восстановление состояния из журнала.

    Raises:
        CorruptLog: журнал не применяется по порядку
    """
    state = empty_state()
    for tx in tx_log:
        try:
            state = apply(state, tx)
        except CorruptLog:
            raise
        except (VctpError, KeyError, TypeError, ValueError) as e:
            raise CorruptLog(f"Транзакция {tx.index} ({tx.kind}) не применяется: {e}")
    return state


def state_hash(state: LedgerState) -> str:
    """Детерминированный дайджест состояния."""
    return hashlib.sha256(canonical_json(state.to_dict())).hexdigest()


# --- сервис -----------------------------------------------------------------

class Ledger:
    """Единая точка записи реестра с журналом JSON-lines."""

    def __init__(self, path: Optional[Union[str, Path]] = None, fsync: bool = False):
        """
        Инициализация реестра.

        Args:
            path: Файл журнала; если существует, состояние восстанавливается
            fsync: Сбрасывать каждую транзакцию на диск
        """
        self.path = Path(path) if path else None
        self.fsync = fsync
        self._lock = threading.Lock()
        self._state = empty_state()
        self._log: List[Transaction] = []
        self.bytes_committed = 0

        if self.path and self.path.exists():
            logger.info(f"📂 Восстановление реестра из {self.path}")
            self._log = self.read_log(self.path)
            self._state = replay(self._log)
            logger.info(f"✅ Реестр восстановлен: {self._state.height} транзакций")
        elif self.path:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            self.path.touch()

    @staticmethod
    def read_log(path: Union[str, Path]) -> List[Transaction]:
        """Чтение журнала; недописанная последняя строка отбрасывается."""
        transactions: List[Transaction] = []
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        for number, line in enumerate(lines, 1):
            if not line.strip():
                continue
            try:
                transactions.append(Transaction.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
                if number == len(lines):
                    logger.warning(f"⚠️ Недописанная транзакция в конце журнала отброшена: {e}")
                    break
                raise CorruptLog(f"Строка {number} журнала повреждена: {e}")
        return transactions

    def snapshot(self) -> LedgerState:
        return self._state

    def transactions(self) -> Tuple[Transaction, ...]:
        """Копия журнала для повторной свертки."""
        with self._lock:
            return tuple(self._log)

    @property
    def height(self) -> int:
        return self._state.height

    def submit(self, step: Callable[[LedgerState], LedgerState]) -> Transaction:
        """
        Применение шага свертки под блокировкой и запись в журнал.

        Args:
            step: Функция состояние -> состояние, добавляющая одну транзакцию

        Returns:
            Записанная транзакция
        """
        with self._lock:
            updated = step(self._state)
            tx = updated.last_tx
            line = tx.to_line() + b"\n"
            if self.path:
                with open(self.path, "ab") as f:
                    f.write(line)
                    f.flush()
                    if self.fsync:
                        os.fsync(f.fileno())
            self._state = updated
            self._log.append(tx)
            self.bytes_committed += len(line)
        logger.debug(f"⛓️ tx {tx.index}: {tx.kind}")
        return tx

    def apply_genesis(self, config: Dict[str, Any], ddos: Dict[str, Dict[str, Any]]) -> None:
        """
        Генезис: регистрация DID и эмитентов L1.

        Args:
            config: {"l1_issuers": [...], "admin": DID, ...}
            ddos: DID -> DID-документ для регистрируемых акторов
        """
        for did, ddo in ddos.items():
            if did not in self._state.did_registry:
                self.register_did(did, ddo)
        for did in config.get("l1_issuers", []):
            if did not in self._state.issuer_registry:
                self.submit(lambda s, d=did: seed_issuer(s, d))
        admin = config.get("admin")
        if admin and self._state.voting_admin is None:
            self.assign_voting_admin(admin)
        logger.info(f"🌱 Генезис применен: {len(config.get('l1_issuers', []))} эмитентов L1")

    def register_did(self, did: str, ddo: Dict[str, Any]) -> Transaction:
        return self.submit(lambda s: register_did(s, did, ddo))

    def publish_attributes(self, owner_did: str, public: Dict[str, Any]) -> Transaction:
        return self.submit(lambda s: publish_attributes(s, owner_did, public))

    def assign_voting_admin(self, did: str) -> Transaction:
        tx = self.submit(lambda s: assign_voting_admin(s, did))
        logger.info(f"🛡️ Администратор голосования: {did}")
        return tx

    def open_vote(self, req: VotingRequest, at: Optional[datetime] = None) -> Transaction:
        return self.submit(lambda s: open_vote(s, req, at))

    def submit_vote(self, contract: "voting.VotingContract", submission: VoteSubmission) -> Tuple[VotingRequest, VoteRecord]:
        """
        Голос через точку записи: контракт оценивает бюллетень против
        текущего состояния, результат фиксируется транзакцией.
        """
        outcome: Dict[str, Any] = {}

        def step(state: LedgerState) -> LedgerState:
            req = _request(state, submission.request_id)
            updated, record = contract.receive_vote(req, submission)
            outcome["request"], outcome["record"] = updated, record
            return record_vote(state, req.request_id, record)

        self.submit(step)
        return outcome["request"], outcome["record"]

    def close_vote(self, request_id: str, admin_did: str) -> Transaction:
        return self.submit(lambda s: close_vote(s, request_id, admin_did))

    def commit_credential(self,
                          record: CredentialRecord,
                          issuer_grant: Optional[IssuerGrant] = None,
                          at: Optional[datetime] = None,
                          votes_required: Optional[int] = None) -> Transaction:
        tx = self.submit(lambda s: commit_credential(s, record, issuer_grant, at, votes_required))
        logger.info(f"📝 Креденшал {record.template_id} v{record.version} записан ({record.record_id[:12]})")
        if issuer_grant:
            logger.info(f"🏅 Эмитент уровня {issuer_grant.level}: {issuer_grant.did}")
        return tx

    def resolve_did(self, did: str) -> Dict[str, Any]:
        record = self._state.did_registry.get(did)
        if record is None:
            raise UnknownDid(f"DID не найден: {did}")
        return record.ddo

    def signing_key(self, did: str) -> Optional[str]:
        """Ключ Ed25519 из DID-документа или None."""
        record = self._state.did_registry.get(did)
        return ddo_signing_key(record.ddo) or None if record else None

    def lookup_issuer(self, did: str) -> Optional[IssuerRecord]:
        return lookup_issuer(self._state, did)

    def list_issuers(self) -> List[IssuerRecord]:
        return sorted(self._state.issuer_registry.values(), key=lambda r: (r.level, r.did))

    def lookup_credential(self, record_id: str) -> Optional[CredentialRecord]:
        return self._state.credential_registry.get(record_id)

    def find_credential(self, template_id: str, version: int) -> Optional[CredentialRecord]:
        """Последняя запись для версии шаблона."""
        record_id = self._state.credential_index.get((template_id, version))
        return self._state.credential_registry.get(record_id) if record_id else None

    def voting_request(self, request_id: str) -> VotingRequest:
        return _request(self._state, request_id)

    def state_hash(self) -> str:
        return state_hash(self._state)
