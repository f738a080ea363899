"""
Бенчмарк: время Hash/Update/Verify по числу атрибутов, стоимость
голосования по числу голосующих, нагрузка на точку записи реестра.
"""

import json
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Tuple

from ..config.settings import Settings
from ..core import voting
from ..core.ledger import Ledger
from ..core.pss import PolicySanitizableSignature
from ..core.template_codec import parse
from ..models.crypto_models import GroupParams
from ..models.ledger_models import CredentialRecord
from ..models.scenario_models import BenchmarkConfig
from ..models.template_models import TRUST_PROXY, NextLevelIssuer, TrustProxySection
from ..models.voting_models import PendingUpdate, VoteOption
from ..services import abe
from ..services.chameleon import ChameleonHash
from ..services.keys import SigningIdentity
from ..services.rng import RandomSource
from ..utils.canonical import canonical_json

logger = logging.getLogger(__name__)

OPERATIONS_HEADER = ["n_attributes", "op", "mean_s", "stddev_s", "runs"]
VOTING_HEADER = ["n_voters", "admin_s", "per_voter_s"]
LOAD_HEADER = ["concurrency", "mean_response_s", "commits_per_s", "ledger_bytes_per_s"]

L1_DID = "did:example_hos:fcgfc2g823fcdd387"
PROXY_DID = "did:example_doctor:fcgfc2g823fcdd387"
PATIENT_DID = "did:example_patient:fcgfc2g823fcdd387"


def _mean_stddev(samples: List[float]) -> Tuple[float, float]:
    if len(samples) < 2:
        return (samples[0] if samples else 0.0), 0.0
    return statistics.mean(samples), statistics.stdev(samples)


def sized_template(n_attributes: int) -> Tuple[bytes, List[str]]:
    """Встроенный шаблон с политикой прокси из n атрибутов."""
    names = [f"attr{i:02d}" for i in range(n_attributes - 1)] + ["HospitalA"]
    document = json.loads((Settings.DATA_DIR / "letter_of_authority.json").read_text(encoding="utf-8"))
    document[0]["numVotesRequired"] = 0
    document[0]["policy"]["proxyAttribute"] = names
    document[0]["policy"]["nextLevelIssuerAttrs"] = names
    return canonical_json(document), names


@dataclass
class BenchmarkResult:
    operations: List[Dict[str, Any]] = field(default_factory=list)
    voting: List[Dict[str, Any]] = field(default_factory=list)
    load: List[Dict[str, Any]] = field(default_factory=list)


class BenchmarkHarness:
    """Прогон трех серий замеров."""

    def __init__(self, config: BenchmarkConfig, params: GroupParams, rng: RandomSource):
        """
        Инициализация.

        Args:
            config: Параметры серий
            params: Параметры группы
            rng: Источник случайности
        """
        self.config = config
        self.params = params
        self.rng = rng
        self.pss = PolicySanitizableSignature(ChameleonHash(params))

    def run(self) -> BenchmarkResult:
        logger.info("=" * 60)
        logger.info(f"⏱️ БЕНЧМАРК: профиль {self.config.profile}, {self.config.runs_per_point} прогонов")
        logger.info("=" * 60)
        return BenchmarkResult(
            operations=self.run_operations(),
            voting=self.run_voting(),
            load=self.run_load(),
        )

    def run_operations(self) -> List[Dict[str, Any]]:
        """Hash_PCH, Update_PCH и Verify_PCH по числу атрибутов политики."""
        rows: List[Dict[str, Any]] = []
        signer = SigningIdentity.generate(L1_DID, self.rng.fork("bench:signer"))
        proxy = SigningIdentity.generate(PROXY_DID, self.rng.fork("bench:proxy"))
        content = canonical_json(TrustProxySection(
            PROXY_DID, NextLevelIssuer(PATIENT_DID, ("delegate-medical-decision",))
        ).to_document())

        for n in self.config.attribute_counts:
            document, names = sized_template(n)
            template = parse(document)
            universe = abe.setup(names, self.rng, self.params)
            key = abe.keygen(universe, PROXY_DID, names)
            timings: Dict[str, List[float]] = {"hash_pch": [], "update_pch": [], "verify_pch": []}

            for _ in range(self.config.runs_per_point):
                start = time.perf_counter()
                signature = self.pss.hash_pch(template, universe, signer, self.rng)
                timings["hash_pch"].append(time.perf_counter() - start)

                start = time.perf_counter()
                updated, new_signature = self.pss.update_pch(
                    template, signature, TRUST_PROXY, content, key, proxy, signer.public_key_hex
                )
                timings["update_pch"].append(time.perf_counter() - start)

                start = time.perf_counter()
                self.pss.verify_pch(updated, new_signature, signer.public_key_hex)
                timings["verify_pch"].append(time.perf_counter() - start)

            for op, samples in timings.items():
                mean, stddev = _mean_stddev(samples)
                rows.append({"n_attributes": n, "op": op, "mean_s": mean, "stddev_s": stddev, "runs": len(samples)})
            logger.info(f"📊 {n} атрибутов: hash {statistics.mean(timings['hash_pch']):.4f} с, "
                        f"update {statistics.mean(timings['update_pch']):.4f} с, "
                        f"verify {statistics.mean(timings['verify_pch']):.4f} с")
        return rows

    def run_voting(self) -> List[Dict[str, Any]]:
        """Стоимость голосования: администратор (проверка и подсчет) и голосующий."""
        rows: List[Dict[str, Any]] = []
        rng = self.rng.fork("bench:voting")
        admin = SigningIdentity.generate("did:example_admin:bench", rng)
        template = parse((Settings.DATA_DIR / "letter_of_authority.json").read_bytes())
        policy = template.update_policy

        for n in self.config.voter_counts:
            voters = [SigningIdentity.generate(f"did:example_nurse:bench{i:03d}", rng) for i in range(n)]
            keys = {v.did: v.public_key_hex for v in voters}
            contract = voting.VotingContract.create(admin, keys.get, rng, clock=lambda: policy.issuance_date)
            credentials = [contract.issue_role_credential(admin, v.did, "nurse", "HospitalA") for v in voters]
            request = contract.open_request(
                PendingUpdate(TRUST_PROXY, "00" * 32, PROXY_DID),
                replace(policy, num_votes_required=n),
            )

            voter_times: List[float] = []
            submissions = []
            for voter, credential in zip(voters, credentials):
                start = time.perf_counter()
                submissions.append(voting.seal_ballot(request, credential, VoteOption.APPROVE, voter, rng))
                voter_times.append(time.perf_counter() - start)

            start = time.perf_counter()
            for submission in submissions:
                request, _ = contract.receive_vote(request, submission)
            voting.tally(request)
            admin_time = time.perf_counter() - start

            rows.append({"n_voters": n, "admin_s": admin_time, "per_voter_s": statistics.mean(voter_times)})
            logger.info(f"🗳️ {n} голосующих: администратор {admin_time:.4f} с, "
                        f"голосующий {statistics.mean(voter_times):.5f} с")
        return rows

    def run_load(self) -> List[Dict[str, Any]]:
        """Параллельные клиенты коммитят записи через одну точку записи."""
        rows: List[Dict[str, Any]] = []
        for level in self.config.concurrency_levels:
            ledger = Ledger()
            ledger.apply_genesis({"l1_issuers": [L1_DID]}, {})
            per_client = self.config.commits_per_client

            def client(index: int) -> List[float]:
                latencies = []
                for k in range(per_client):
                    record = CredentialRecord.build(
                        combined_digest=f"{index:08x}{k:08x}".ljust(64, "0"),
                        sigma="00" * 64,
                        template_id=f"http://example.edu/credentials/bench-{index}-{k}",
                        version=0,
                        committed_by=L1_DID,
                    )
                    start = time.perf_counter()
                    ledger.commit_credential(record, votes_required=0)
                    latencies.append(time.perf_counter() - start)
                return latencies

            start = time.perf_counter()
            with ThreadPoolExecutor(max_workers=level) as pool:
                latencies = [t for batch in pool.map(client, range(level)) for t in batch]
            elapsed = time.perf_counter() - start or 1e-9

            rows.append({
                "concurrency": level,
                "mean_response_s": statistics.mean(latencies),
                "commits_per_s": len(latencies) / elapsed,
                "ledger_bytes_per_s": ledger.bytes_committed / elapsed,
            })
            logger.info(f"⛓️ {level} клиентов: {len(latencies) / elapsed:.1f} коммитов/с")
        return rows
