import argparse
import os
import sys
from typing import Dict, List, Optional

from dotenv import load_dotenv
from pydantic import ValidationError

from src.models.scenario_config import ScenarioConfig
from src.services.experiments import compare_sweep, drop_dump, focusing_dump, gap_sweep
from src.utils.db.file_store import FileStore
from src.utils.errors import ConfigError
from src.utils.logging import setup_logging

logger = setup_logging(__name__)

DEFAULT_OUT_DIR = "output"
UNIT_CONVENTION = "0 dBm = 1 power unit = noise power; totals in dB relative to that unit"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="python -m src.simulate",
        description="Two-tier HetNet simulator: TR femtocell, ZF macrocell, distributed power allocation",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default="tableI", help="設定檔路徑或預設名稱（tableI）")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--drops", type=int, default=None, help="drop 數，覆蓋 n_drops")
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--out", default=None, help="輸出目錄（預設 $HETNET_OUT_DIR 或 ./output）")
    common.add_argument("--format", choices=[f.value for f in FileStore.Format], default="csv")
    common.add_argument("--quiet", action="store_true", help="不顯示進度條")

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("focusing", parents=[common], help="TR 等效通道與聚焦比")
    commands.add_parser("gap", parents=[common], help="分散式 vs 集中式，掃描 γ_F × γ_M")
    commands.add_parser("compare", parents=[common], help="femtocell TR vs ZF，掃描 γ_F")
    drop = commands.add_parser("drop", parents=[common], help="單一 drop 的完整輸出")
    drop.add_argument("--index", type=int, default=0, help="drop 編號")
    return parser


def load_config(args: argparse.Namespace) -> ScenarioConfig:
    """設定檔加上命令列覆蓋值，覆蓋後重新驗證

    Raises:
        ConfigError: 設定檔或覆蓋值不合法
    """
    config = ScenarioConfig.from_file(args.config)
    updates = {
        key: value for key, value in (
            ('seed', args.seed),
            ('n_drops', args.drops),
            ('workers', args.workers),
        ) if value is not None
    }
    if not updates:
        return config
    try:
        return ScenarioConfig.model_validate({**config.model_dump(), **updates})
    except ValidationError as e:
        raise ConfigError(f"命令列參數不合法: {e}") from e


def run_command(args: argparse.Namespace, config: ScenarioConfig, store: FileStore) -> Dict:
    show_progress = not args.quiet and sys.stderr.isatty()
    stats: Dict = {}

    if args.command == "focusing":
        result = focusing_dump(config, show_progress=show_progress)
        store.save("focusing", result.summary)
        store.save("focusing_taps", result.allocations)
        stats = result.stats
    elif args.command == "gap":
        result = gap_sweep(config, show_progress=show_progress)
        store.save("gap", result.summary)
        store.save("gap_allocations", result.allocations)
        store.save("gap_drops", result.drops)
    elif args.command == "compare":
        result = compare_sweep(config, show_progress=show_progress)
        store.save("compare", result.summary)
        store.save("compare_allocations", result.allocations)
        store.save("compare_drops", result.drops)
        stats = result.stats
    elif args.command == "drop":
        for name, df in drop_dump(config, args.index).items():
            store.save(f"drop_{args.index}_{name}", df)
        stats = {'drop_index': args.index}
    return stats


def cli_main(argv: Optional[List[str]] = None) -> int:
    """Exit status: 0 success, 1 config error, 2 campaign failure"""
    load_dotenv()
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1

    out_dir = args.out or os.getenv("HETNET_OUT_DIR") or DEFAULT_OUT_DIR
    try:
        store = FileStore(out_dir, FileStore.Format(args.format))
        stats = run_command(args, config, store)
        store.save_run_info({
            'command': args.command,
            'seed': config.seed,
            'n_drops': config.n_drops,
            'units': UNIT_CONVENTION,
            'stats': stats,
            'config': config.model_dump(mode='json'),
        })
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 1
    except Exception as e:
        logger.error(f"{args.command} 失敗: {e}")
        print(f"campaign failure: {e}", file=sys.stderr)
        return 2

    logger.info(f"輸出完成: {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(cli_main())
