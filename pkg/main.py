"""FauForensics - command-line entry point"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Type, TypeVar

from fauforensics.config import Config, build_dataclass, to_key_value_text
from fauforensics.errors import ConfigError, FauForensicsError, UsageError
from fauforensics.models.clip import GenConfig, VideoMode
from fauforensics.models.manifest import RunManifest
from fauforensics.models.network import HeadMode, ModelConfig
from fauforensics.models.training import TrainConfig
from fauforensics.server import create_server
from fauforensics.services.checkpoint import CheckpointService
from fauforensics.services.corpus import CorpusService
from fauforensics.services.evaluation import EvaluationService
from fauforensics.services.gradcheck import GradientChecker
from fauforensics.services.trainer import Trainer
from fauforensics.tools import corpus, discovery, evaluation, training

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

T = TypeVar('T')


class ArgumentParser(argparse.ArgumentParser):
    """Parser whose errors become usage errors (exit 1) instead of exiting 2"""

    def error(self, message: str):
        raise UsageError(message)


def build_config(cls: Type[T], *layers: Optional[Mapping[str, Any]]) -> T:
    """Defaults <- config file <- flags; invalid values are usage errors"""
    try:
        return build_dataclass(cls, *layers)
    except ConfigError as e:
        raise UsageError(str(e))


def run_manifest_path(output: Path) -> Path:
    return Path(str(output) + '.run-manifest')


def write_manifest(manifest: RunManifest, started: float, path: Path) -> None:
    manifest.wall_time_s = time.perf_counter() - started
    manifest.write(path)
    logger.info(f"Wrote run manifest {path}")


def cmd_generate(args, config: Config) -> int:
    started = time.perf_counter()
    if args.count < 0:
        raise UsageError(f"--count must be >= 0, got {args.count}")
    gen = build_config(GenConfig, config.section(GenConfig), {'mode': args.mode, 'T': args.t})
    service = CorpusService(config.workers)
    corpus_data = service.generate(args.count, args.seed, gen)
    path = service.write_corpus(corpus_data, Path(args.out))
    write_manifest(RunManifest(
        command='generate',
        seed=args.seed,
        config_text=to_key_value_text(gen, 'gen.'),
        outputs={'corpus': str(path), 'corpus_manifest': str(service.manifest_path(path))},
    ), started, run_manifest_path(path))
    print(f"wrote {len(corpus_data)} clips to {path}")
    return 0


def cmd_train(args, config: Config) -> int:
    flags: Dict[str, Any] = {
        'L': args.latent,
        'head_mode': args.head_mode,
        'lambda_av': args.lambda_av,
        'lambda_a': args.lambda_a,
        'lambda_v': args.lambda_v,
        'seed': args.seed,
        'use_fau': args.use_fau,
        'use_alignment': args.use_alignment,
        'use_tap': args.use_tap,
        'use_video_encoder': args.use_video_encoder,
        'use_audio_encoder': args.use_audio_encoder,
        'temporal_context': args.context,
    }
    train_config = build_config(TrainConfig, config.section(TrainConfig), {
        'lr0': args.lr, 'batch': args.batch, 'epochs': args.epochs, 'seed': args.seed,
    })
    build_config(ModelConfig, config.section(ModelConfig), flags)

    corpus_data = CorpusService(config.workers).read_corpus(Path(args.corpus))
    model_config = build_config(ModelConfig, config.section(ModelConfig), flags,
                                {'T': corpus_data.T, 'video_mode': corpus_data.mode})
    result = Trainer(model_config, train_config, workers=config.workers).train(
        corpus_data, Path(args.out), inputs=str(args.corpus))
    last = result.records[-1]
    print(f"trained {len(result.records)} steps; final loss={last.total:.6f}; "
          f"best epoch={result.best_epoch}; checkpoint={result.best_checkpoint}")
    return 0


def cmd_eval(args, config: Config) -> int:
    started = time.perf_counter()
    model = CheckpointService().load(Path(args.checkpoint))
    corpus_data = CorpusService(config.workers).read_corpus(Path(args.corpus))
    service = EvaluationService(config.workers)
    report = service.run_eval(model, corpus_data, with_correlation=args.correlation)
    written = service.write_report(report, Path(args.report))
    write_manifest(RunManifest(
        command='eval',
        seed=model.config.seed,
        config_text=to_key_value_text(model.config, 'model.'),
        inputs={'checkpoint': str(args.checkpoint), 'corpus': str(args.corpus)},
        outputs={'report': str(written[0])},
    ), started, run_manifest_path(written[0]))
    print(f"n={report.n_samples} accuracy={report.accuracy:.6f} auc={report.auc:.6f}")
    return 0


def cmd_perturb_eval(args, config: Config) -> int:
    started = time.perf_counter()
    model = CheckpointService().load(Path(args.checkpoint))
    corpus_data = CorpusService(config.workers).read_corpus(Path(args.corpus))
    if corpus_data.mode is not VideoMode.RAW:
        raise UsageError("perturb-eval needs a raw-mode corpus")
    service = EvaluationService(config.workers)
    report = service.run_eval(model, corpus_data, with_perturbations=True)
    written = service.write_report(report, Path(args.report))
    write_manifest(RunManifest(
        command='perturb-eval',
        seed=model.config.seed,
        config_text=to_key_value_text(model.config, 'model.'),
        inputs={'checkpoint': str(args.checkpoint), 'corpus': str(args.corpus)},
        outputs={'report': str(written[0]), 'grid': str(written[-1])},
    ), started, run_manifest_path(written[0]))
    sys.stdout.write(report.grid_tsv())
    return 0


def cmd_gradcheck(args, config: Config) -> int:
    started = time.perf_counter()
    checker = GradientChecker()
    report = checker.check(T=args.t, L=args.l, batch=args.batch, seed=args.seed)
    print(report.summary())
    if args.report:
        path = Path(args.report)
        path.write_text(''.join(f"{name}\t{err!r}\n" for name, err in report.errors.items()), encoding='utf-8')
        write_manifest(RunManifest(
            command='gradcheck',
            seed=args.seed,
            config_text=f"T={args.t}\nL={args.l}\nbatch={args.batch}\nh={report.h!r}\n",
            outputs={'report': str(path)},
        ), started, run_manifest_path(path))
    checker.require_pass(report)
    return 0


def cmd_analyze_correlation(args, config: Config) -> int:
    started = time.perf_counter()
    corpus_data = CorpusService(config.workers).read_corpus(Path(args.corpus))
    service = EvaluationService(config.workers)
    summaries = service.analyze_correlation(corpus_data)
    path = service.write_correlation(summaries, Path(args.report))
    write_manifest(RunManifest(
        command='analyze-correlation',
        seed=0,
        inputs={'corpus': str(args.corpus)},
        outputs={'report': str(path)},
    ), started, run_manifest_path(path))
    for s in summaries:
        print(f"{s.statistic}\treal={s.real.mean!r}\tfake={s.fake.mean!r}\tseparation_se={s.separation!r}")
    return 0


def cmd_infer(args, config: Config) -> int:
    model = CheckpointService().load(Path(args.checkpoint))
    corpus_data = CorpusService(config.workers).read_corpus(Path(args.clip))
    if not 0 <= args.index < len(corpus_data):
        raise UsageError(f"--index {args.index} outside corpus of {len(corpus_data)} clips")
    result = model.infer(corpus_data.clips[args.index])
    probabilities = ' '.join(f"{p:.6f}" for p in result.probabilities)
    print(f"class={result.class_name()} fake_probability={result.fake_probability:.6f} "
          f"probabilities={probabilities}")
    return 0


def cmd_serve(args, config: Config) -> int:
    logger.info("Starting FauForensics MCP Server...")

    mcp = create_server(config)

    logger.info("Registering discovery tools...")
    discovery.register_discovery_tools(mcp)

    logger.info("Registering corpus tools...")
    corpus.register_corpus_tools(mcp)

    logger.info("Registering training tools...")
    training.register_training_tools(mcp)

    logger.info("Registering evaluation tools...")
    evaluation.register_evaluation_tools(mcp)

    logger.info("All tools registered successfully")
    logger.info("Running with STDIO transport...")
    mcp.run(transport='stdio')
    return 0


def build_parser() -> ArgumentParser:
    common = ArgumentParser(add_help=False)
    common.add_argument('--workers', type=int, default=None,
                        help='Parallel workers for generation/evaluation (default: FF_WORKERS or 1)')
    common.add_argument('--config', default=None, help='key=value file with GenConfig/ModelConfig/TrainConfig fields')
    common.add_argument('--debug', action='store_true', help='Enable debug logging')

    parser = ArgumentParser(
        prog='fauforensics',
        description='FAU-guided audio-visual deepfake detection on synthetic corpora',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  fauforensics generate --out train.ffc --count 2000 --seed 1
  fauforensics train --corpus train.ffc --out run1 --head-mode fourclass --latent 64 --epochs 20
  fauforensics eval --checkpoint run1/checkpoint_best.ffm --corpus test.ffc --report test.report
  fauforensics gradcheck --t 8 --l 16 --seed 0

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 check failure.
        """
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('generate', parents=[common], help='Generate a synthetic corpus')
    p.add_argument('--out', required=True)
    p.add_argument('--count', type=int, required=True)
    p.add_argument('--mode', choices=[m.value for m in VideoMode], default=None)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--t', type=int, default=None, help='Frames per clip (default 25)')
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser('train', parents=[common], help='Train a model on a corpus')
    p.add_argument('--corpus', required=True)
    p.add_argument('--out', required=True, help='Output directory')
    p.add_argument('--epochs', type=int, default=None, help='default 50')
    p.add_argument('--batch', type=int, default=None, help='default 32')
    p.add_argument('--lr', type=float, default=None, help='default 1e-4')
    p.add_argument('--lambda-av', type=float, default=None, help='default 0.8')
    p.add_argument('--lambda-a', type=float, default=None, help='default 0.1')
    p.add_argument('--lambda-v', type=float, default=None, help='default 0.1')
    p.add_argument('--head-mode', choices=[m.value for m in HeadMode], default=None)
    p.add_argument('--latent', type=int, default=None, help='Latent width L (default 512)')
    p.add_argument('--seed', type=int, default=None)
    p.add_argument('--no-fau', dest='use_fau', action='store_const', const=False, default=None)
    p.add_argument('--no-alignment', dest='use_alignment', action='store_const', const=False, default=None)
    p.add_argument('--no-tap', dest='use_tap', action='store_const', const=False, default=None)
    p.add_argument('--no-video-encoder', dest='use_video_encoder', action='store_const', const=False, default=None)
    p.add_argument('--no-audio-encoder', dest='use_audio_encoder', action='store_const', const=False, default=None)
    p.add_argument('--context', type=int, default=None, help='Neighbor frames each encoder row sees on either side (default 1)')
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser('eval', parents=[common], help='Evaluate a checkpoint on a corpus')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--corpus', required=True)
    p.add_argument('--report', required=True)
    p.add_argument('--correlation', action='store_true', help='Add FAU correlation statistics')
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser('perturb-eval', parents=[common], help='AUC under video perturbations (raw corpus)')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--corpus', required=True)
    p.add_argument('--report', required=True)
    p.set_defaults(handler=cmd_perturb_eval)

    p = sub.add_parser('gradcheck', parents=[common], help='Finite-difference gradient check')
    p.add_argument('--t', type=int, default=8)
    p.add_argument('--l', type=int, default=16)
    p.add_argument('--batch', type=int, default=2)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--report', default=None, help='Optional per-tensor error file')
    p.set_defaults(handler=cmd_gradcheck)

    p = sub.add_parser('analyze-correlation', parents=[common], help='FAU temporal correlation, real vs fake video')
    p.add_argument('--corpus', required=True)
    p.add_argument('--report', required=True)
    p.set_defaults(handler=cmd_analyze_correlation)

    p = sub.add_parser('infer', parents=[common], help='Score one clip')
    p.add_argument('--checkpoint', required=True)
    p.add_argument('--clip', required=True, help='Corpus file holding the clip')
    p.add_argument('--index', type=int, default=0)
    p.set_defaults(handler=cmd_infer)

    p = sub.add_parser('serve', parents=[common], help='Run the MCP server on stdio')
    p.set_defaults(handler=cmd_serve)

    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse argv, run one command and return its exit code"""
    try:
        args = build_parser().parse_args(argv)
        if args.debug:
            logging.getLogger().setLevel(logging.DEBUG)
            logger.debug("Debug logging enabled")
        try:
            config = Config.from_env(workers=args.workers, config_file=args.config)
            config.check_known_keys(GenConfig, ModelConfig, TrainConfig)
        except ConfigError as e:
            raise UsageError(str(e))
        return args.handler(args, config)

    except FauForensicsError as e:
        print(f"error: {e.kind}: {e}", file=sys.stderr)
        return e.exit_code

    except OSError as e:
        print(f"error: io: {e}", file=sys.stderr)
        return 2

    except KeyboardInterrupt:
        logger.info("Stopped by user")
        return 0

    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        print(f"error: internal: {e}", file=sys.stderr)
        return 2


def main():
    """Main entry point for FauForensics"""
    sys.exit(run())


if __name__ == "__main__":
    main()
