#!/usr/bin/env python3
"""
Главный модуль: сценарии, атаки, бенчмарк, проверка и администрирование реестра.
"""

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.table import Table

from .config.settings import Settings, DEFAULT_CONFIG, merge_config
from .core.ledger import Ledger
from .core.protocol import VctpProtocol
from .exceptions import ConfigError, VctpError
from .models.crypto_models import GroupParams, group_profile
from .models.scenario_models import BenchmarkConfig, ScenarioScript
from .scenario.attacks import AttackSuite
from .scenario.benchmark import LOAD_HEADER, OPERATIONS_HEADER, VOTING_HEADER, BenchmarkHarness
from .scenario.runner import ScenarioRunner
from .services.keys import SigningIdentity
from .services.rng import RandomSource
from .utils.canonical import parse_timestamp
from .utils.data_manager import DataManager
from .utils.report_renderer import ReportRenderer

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NOT_FOUND = 3

console = Console()
logger = logging.getLogger(__name__)


def setup_logging(log_level: str = "INFO", log_file: Optional[str] = None):
    """
    Настройка логирования.

    Args:
        log_level: Уровень логирования
        log_file: Файл журнала (по умолчанию Settings.LOG_FILE)
    """
    file_handler = logging.FileHandler(log_file or Settings.LOG_FILE, encoding="utf-8")
    file_handler.setFormatter(logging.Formatter(Settings.LOG_FORMAT))
    logging.basicConfig(
        level=getattr(logging, log_level.upper()),
        format="%(message)s",
        handlers=[
            RichHandler(console=Console(stderr=True), show_path=False, markup=False),
            file_handler,
        ],
        force=True,
    )


def print_banner():
    """Печать баннера приложения."""
    console.print("""
🔐 ================================= 🔐
    РАСПРОСТРАНЕНИЕ ДОВЕРИЯ ДЛЯ VC
🔐 ================================= 🔐

Персональные эмитенты через санитизируемые подписи,
шифрование по атрибутам и голосование в реестре
""")


def load_config(path: Optional[str]) -> Dict[str, Any]:
    """
    Загрузка конфигурации поверх DEFAULT_CONFIG.

    Raises:
        ConfigError: файл не читается или конфигурация невалидна
    """
    config = DEFAULT_CONFIG
    if path:
        try:
            with open(path, "r", encoding="utf-8") as f:
                config = merge_config(DEFAULT_CONFIG, json.load(f))
            console.print(f"✅ Загружена конфигурация из {path}")
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Ошибка загрузки конфигурации {path}: {e}")

    validation = Settings.validate_config(config)
    broken = [name for name, valid in validation.items() if not valid]
    if broken:
        raise ConfigError(f"Некорректная конфигурация: {', '.join(broken)}")
    return config


def resolve_params(config: Dict[str, Any], profile: Optional[str]) -> GroupParams:
    """Параметры группы: явные p, q, g из конфигурации или именованный профиль."""
    explicit = config["crypto"].get("params")
    if explicit and not profile:
        return GroupParams.from_dict(explicit)
    return group_profile(profile or config["crypto"]["profile"]).validate()


def _seed(args: argparse.Namespace, config: Dict[str, Any]) -> Optional[int]:
    return args.seed if args.seed is not None else config["crypto"]["seed"]


def _ledger(args: argparse.Namespace, config: Dict[str, Any]) -> Optional[str]:
    return args.ledger or config["ledger"]["path"] or None


def _genesis(args: argparse.Namespace, config: Dict[str, Any]) -> Optional[str]:
    return args.genesis or config["ledger"]["genesis"] or None


# --- команды ------------------------------------------------------------------

def cmd_scenario(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Прогон сценария на свежем реестре."""
    script = ScenarioScript.load(args.script)
    genesis = _genesis(args, config)
    if genesis:
        script = dataclasses.replace(script, genesis_path=Path(genesis))

    params = resolve_params(config, args.profile)
    ledger_path = _ledger(args, config)
    runner = ScenarioRunner(script, params, RandomSource(_seed(args, config)),
                            Ledger(ledger_path) if ledger_path else None)
    result = runner.run()

    renderer = ReportRenderer()
    transcript = result.transcript()
    console.print(renderer.render_transcript(transcript), markup=False)

    data_manager = DataManager(config["output_dir"])
    name = args.output or script.name
    files = [
        data_manager.save_json(transcript, f"{name}_transcript.json"),
        renderer.write_text(renderer.render_transcript(transcript),
                            os.path.join(data_manager.output_dir, f"{name}_transcript.txt")),
        renderer.write_scenario_html(transcript, [r.to_dict() for r in runner.ledger.list_issuers()],
                                     os.path.join(data_manager.output_dir, f"{name}.html")),
        data_manager.save_keystore(list(runner.actors.values()), f"{name}_keystore.json"),
    ]
    if result.sealed is not None:
        files.append(data_manager.save_template(result.sealed.template, f"{name}_template.json"))
        files.append(data_manager.save_sidecar(result.sealed.signature, f"{name}_template.sig.json"))
    if result.report is not None:
        files.append(data_manager.save_json(result.report.to_dict(), f"{name}_verification.json"))
    data_manager.create_run_summary("scenario", name, files, {
        **{k: v for k, v in runner.protocol.stats.items() if k != "errors"},
        "ledger_height": runner.ledger.height,
        "state_hash": result.state_hash,
    })
    for path in data_manager.get_output_files(name):
        console.print(f"  📁 {path}", markup=False)

    failing = result.failing_step
    if failing is not None:
        console.print(f"[bold red]❌ {failing.error} at step {failing.name}[/bold red]")
        return EXIT_FAILURE
    if not result.passed:
        console.print("[bold red]❌ Сценарий завершился без успешной проверки представления[/bold red]")
        return EXIT_FAILURE
    console.print("[bold green]🎉 Сценарий пройден[/bold green]")
    return EXIT_OK


def cmd_attack(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Сценарий атаки и отчет о защитах."""
    suite = AttackSuite(resolve_params(config, args.profile), _seed(args, config), args.script)
    report = suite.run(args.scenario)

    console.print(ReportRenderer().render_attack(report.to_dict()), markup=False)
    DataManager(config["output_dir"]).save_json(report.to_dict(), f"attack_{args.scenario}.json")
    return EXIT_OK if report.held else EXIT_FAILURE


def cmd_bench(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Три серии замеров в CSV."""
    try:
        with open(args.config_file, "r", encoding="utf-8") as f:
            bench_data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Не удалось прочитать конфигурацию бенчмарка {args.config_file}: {e}")

    bench_config = BenchmarkConfig.from_dict(bench_data, config["bench"])
    if args.profile:
        bench_config = dataclasses.replace(bench_config, profile=args.profile)
    params = resolve_params(config, bench_config.profile)

    result = BenchmarkHarness(bench_config, params, RandomSource(_seed(args, config))).run()

    output_dir = args.output_dir or os.path.join(config["output_dir"], bench_config.output_dir)
    data_manager = DataManager(output_dir)
    files = [
        data_manager.write_csv(result.operations, OPERATIONS_HEADER, "operations.csv"),
        data_manager.write_csv(result.voting, VOTING_HEADER, "voting.csv"),
        data_manager.write_csv(result.load, LOAD_HEADER, "load.csv"),
    ]
    data_manager.create_run_summary("bench", "bench", files, {"profile": bench_config.profile})
    if not all(files):
        return EXIT_FAILURE
    console.print(f"[bold green]📈 Результаты бенчмарка: {output_dir}[/bold green]")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Проверка предъявленного шаблона и подписи по журналу реестра."""
    ledger = _open_registry(args, config)
    data_manager = DataManager(config["output_dir"])

    template = data_manager.load_template(args.template)
    if template is None:
        raise ConfigError(f"Шаблон не загружен: {args.template}")
    signature = data_manager.load_sidecar(args.sidecar)
    if signature is None:
        raise ConfigError(f"Сопроводительная подпись не загружена: {args.sidecar}")

    verifier = None
    if args.verifier:
        if not args.keystore:
            raise ConfigError("--verifier требует --keystore")
        actors = {actor.did: actor for actor in data_manager.load_keystore(args.keystore)}
        verifier = actors.get(args.verifier)
        if verifier is None:
            raise ConfigError(f"Верификатор {args.verifier} отсутствует в {args.keystore}")

    try:
        now = parse_timestamp(args.at) if args.at else None
    except ValueError as e:
        raise ConfigError(f"Некорректный момент проверки {args.at}: {e}")

    protocol = VctpProtocol(ledger, resolve_params(config, args.profile), RandomSource(_seed(args, config)))
    report = protocol.verify_presentation(verifier, template, signature, now=now)

    console.print(ReportRenderer().render_verification(report.to_dict()), markup=False)
    name = args.output or Path(args.template).stem
    data_manager.save_json(report.to_dict(), f"{name}_verification.json")
    return EXIT_OK if report.passed else EXIT_FAILURE


def _open_registry(args: argparse.Namespace, config: Dict[str, Any], create: bool = False) -> Ledger:
    path = _ledger(args, config)
    if not path:
        raise ConfigError("Нужен путь к журналу реестра: --ledger или VCTP_LEDGER_PATH")
    if not create and not os.path.exists(path):
        raise ConfigError(f"Журнал реестра не найден: {path}")
    return Ledger(path)


def cmd_registry(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    """Чтение и администрирование реестра."""
    if args.registry_command == "did-register":
        ledger = _open_registry(args, config, create=True)
        genesis = _genesis(args, config)
        if genesis and ledger.height == 0:
            with open(genesis, "r", encoding="utf-8") as f:
                ledger.apply_genesis(json.load(f), {})

        if args.ddo:
            with open(args.ddo, "r", encoding="utf-8") as f:
                ddo = json.load(f)
        else:
            identity = SigningIdentity.generate(args.did, RandomSource(_seed(args, config)))
            ddo = identity.ddo()
            path = DataManager(config["output_dir"]).save_json(identity.to_dict(), f"{args.did.replace(':', '_')}.key.json")
            console.print(f"🔑 Ключи сохранены: {path}")
        tx = ledger.register_did(args.did, ddo)
        console.print(f"✅ {args.did} зарегистрирован, транзакция {tx.index}")
        return EXIT_OK

    ledger = _open_registry(args, config)

    if args.registry_command == "issuer-list":
        table = Table(title="Реестр эмитентов")
        for column in ("Уровень", "DID", "Онбординг", "Запись"):
            table.add_column(column)
        for record in ledger.list_issuers():
            table.add_row(f"L{record.level}", record.did, record.onboarded_by or "genesis", record.template_ref or "")
        console.print(table)
        return EXIT_OK

    if args.registry_command == "credential-show":
        record = ledger.lookup_credential(args.record_id)
        if record is None:
            console.print(f"[red]Запись не найдена: {args.record_id}[/red]")
            return EXIT_NOT_FOUND
        console.print_json(json.dumps(record.to_dict()))
        return EXIT_OK

    if args.registry_command == "state-hash":
        print(ledger.state_hash())
        return EXIT_OK

    raise ConfigError(f"Неизвестная команда реестра: {args.registry_command}")


# --- разбор аргументов ----------------------------------------------------------

def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ledger", help="Файл журнала реестра (JSON-lines)")
    common.add_argument("--genesis", help="Файл генезиса реестра")
    common.add_argument("--seed", type=int, help="Сид единого источника случайности")
    common.add_argument("--profile", choices=list(Settings.PROFILES),
                        help="Профиль параметров группы (по умолчанию: из конфигурации)")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        default=Settings.LOG_LEVEL, help="Уровень логирования")
    common.add_argument("--config", help="Путь к файлу конфигурации JSON")
    common.add_argument("--output-dir", help="Директория для выходных файлов")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_options()
    parser = argparse.ArgumentParser(
        prog="vctp",
        description="Протокол распространения доверия для верифицируемых креденшалов",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Примеры использования:
  vctp scenario vctp/data/hospital.scenario --seed 7
  vctp attack 3 --profile small
  vctp bench vctp/data/bench.json --output-dir bench
  vctp verify outputs/hospital_template.json outputs/hospital_template.sig.json --ledger ledger.jsonl --at 2021-07-13T00:00:00Z
  vctp registry issuer-list --ledger ledger.jsonl
        """
    )
    commands = parser.add_subparsers(dest="command", required=True)

    scenario = commands.add_parser("scenario", parents=[common], help="Прогон сценария")
    scenario.add_argument("script", nargs="?", default=str(Settings.DEFAULT_SCENARIO),
                          help="Файл сценария (по умолчанию встроенный больничный)")
    scenario.add_argument("--output", "-o", help="Базовое имя выходных файлов")
    scenario.set_defaults(handler=cmd_scenario)

    attack = commands.add_parser("attack", parents=[common], help="Сценарий атаки")
    attack.add_argument("scenario", type=int, choices=[1, 2, 3],
                        help="1: перехват, 2: подмена, 3: сговор")
    attack.add_argument("--script", help="Сценарий, на котором разворачивается атака")
    attack.set_defaults(handler=cmd_attack)

    bench = commands.add_parser("bench", parents=[common], help="Бенчмарк")
    bench.add_argument("config_file", metavar="config", help="Конфигурация бенчмарка JSON")
    bench.set_defaults(handler=cmd_bench)

    verify = commands.add_parser("verify", parents=[common], help="Проверка шаблона по реестру")
    verify.add_argument("template", help="Шаблон JSON")
    verify.add_argument("sidecar", help="Сопроводительная подпись (.sig.json)")
    verify.add_argument("--at", help="Момент проверки RFC 3339 (по умолчанию текущий)")
    verify.add_argument("--keystore", help="Хранилище ключей прогона")
    verify.add_argument("--verifier", help="DID верификатора из хранилища ключей")
    verify.add_argument("--output", "-o", help="Базовое имя отчета")
    verify.set_defaults(handler=cmd_verify)

    registry = commands.add_parser("registry", help="Администрирование реестра")
    registry_commands = registry.add_subparsers(dest="registry_command", required=True)
    did_register = registry_commands.add_parser("did-register", parents=[common], help="Регистрация DID")
    did_register.add_argument("did")
    did_register.add_argument("--ddo", help="DID-документ JSON (по умолчанию новые ключи)")
    registry_commands.add_parser("issuer-list", parents=[common], help="Список эмитентов")
    credential_show = registry_commands.add_parser("credential-show", parents=[common], help="Запись креденшала")
    credential_show.add_argument("record_id")
    registry_commands.add_parser("state-hash", parents=[common], help="Хеш состояния после воспроизведения")
    registry.set_defaults(handler=cmd_registry)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Основная функция."""
    parser = build_parser()
    args = parser.parse_args(argv)

    setup_logging(args.log_level)

    try:
        config = load_config(args.config)
        if args.output_dir and args.command != "bench":
            config = merge_config(config, {"output_dir": args.output_dir})
        if args.command != "registry":
            print_banner()
        return args.handler(args, config)
    except VctpError as e:
        console.print(f"[bold red]❌ {type(e).__name__}: {e}[/bold red]")
        return EXIT_FAILURE
    except OSError as e:
        console.print(f"[bold red]❌ Ошибка ввода-вывода: {e}[/bold red]")
        return EXIT_FAILURE
    except KeyboardInterrupt:
        console.print("\n⏹️ Прервано пользователем")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
