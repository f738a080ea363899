import csv
import json

from vctp.main import EXIT_OK, main
from vctp.models.crypto_models import group_profile
from vctp.models.scenario_models import BenchmarkConfig
from vctp.scenario.benchmark import (
    LOAD_HEADER,
    OPERATIONS_HEADER,
    VOTING_HEADER,
    BenchmarkHarness,
    sized_template,
)
from vctp.core.template_codec import parse
from vctp.services.rng import RandomSource

TINY = {
    "profile": "test",
    "attribute_counts": [2, 4],
    "runs_per_point": 2,
    "voter_counts": [5],
    "concurrency_levels": [1, 4],
    "commits_per_client": 3,
}


def test_sized_template_policy():
    document, names = sized_template(4)
    template = parse(document)
    assert names[-1] == "HospitalA"
    assert len(template.update_policy.policy.proxy_attributes.required_attributes) == 4
    assert template.update_policy.num_votes_required == 0


def test_harness_rows():
    result = BenchmarkHarness(BenchmarkConfig.from_dict(TINY), group_profile("test"), RandomSource(1)).run()
    assert {(r["n_attributes"], r["op"]) for r in result.operations} == {
        (n, op) for n in (2, 4) for op in ("hash_pch", "update_pch", "verify_pch")
    }
    assert all(r["runs"] == 2 for r in result.operations)
    assert [r["n_voters"] for r in result.voting] == [5]
    assert [r["concurrency"] for r in result.load] == [1, 4]
    assert all(r["commits_per_s"] > 0 for r in result.load)


def test_bench_command_writes_csv(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    config = tmp_path / "bench.json"
    config.write_text(json.dumps(TINY), encoding="utf-8")
    assert main(["bench", str(config), "--seed", "1", "--output-dir", str(tmp_path / "bench")]) == EXIT_OK

    for name, header in (("operations.csv", OPERATIONS_HEADER), ("voting.csv", VOTING_HEADER),
                         ("load.csv", LOAD_HEADER)):
        with open(tmp_path / "bench" / name, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        assert rows[0] == header
        assert len(rows) > 1
