#!/usr/bin/env python3
"""
Bregman TDA - radius filtrations and persistence under Bregman divergences
Command-line entry point
"""
import argparse
import json
import logging
import math
import sys
import threading
import time
from dataclasses import dataclass, field
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

from cloud_io import ingest, input_dimension, synthesize, write_csv, write_json_document
from complexes import cech_radius_function, no_interleaving_table, rips_radius_function
from delaunay import delaunay_radius_function
from divergence import GeneratorKind, PointCloud, make_generator
from errors import BregmanTDAError
from models.filtration import BuildStats
from persistence import compute_persistence, order_filtration
from settings import Tolerances, load_tolerances
from utils.worker_utils import default_thread_count

LOG_PATH: Optional[Path] = None

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_INTERNAL = 3

COMPLEX_KINDS = ("cech", "rips", "delaunay")
DEFAULT_EPSILONS = [0.1, 0.03, 0.01, 0.003]

logger = logging.getLogger("bregman_tda")


def setup_logging(log_dir: Optional[Path] = None, verbose: bool = False) -> Path:
    """Configure application logging."""
    global LOG_PATH
    log_dir = Path(log_dir) if log_dir else Path.home() / ".bregman_tda" / "logs"
    log_dir.mkdir(parents=True, exist_ok=True)
    log_path = log_dir / "bregman_tda.log"
    LOG_PATH = log_path

    logger.setLevel(logging.DEBUG if verbose else logging.INFO)
    formatter = logging.Formatter("%(asctime)s [%(levelname)s] %(name)s: %(message)s")

    if not any(isinstance(h, RotatingFileHandler) for h in logger.handlers):
        file_handler = RotatingFileHandler(
            log_path, maxBytes=1_000_000, backupCount=5, encoding="utf-8"
        )
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    # stderr stays reserved for the single-line error report unless asked
    if verbose and not any(type(h) is logging.StreamHandler for h in logger.handlers):
        stream_handler = logging.StreamHandler()
        stream_handler.setFormatter(formatter)
        logger.addHandler(stream_handler)

    return log_path


def install_exception_hooks() -> None:
    """Install global exception hooks to log unexpected errors."""

    def handle_exception(exc_type, exc, tb):
        logger.error("Unhandled exception", exc_info=(exc_type, exc, tb))

    def handle_thread_exception(args):
        logger.error(
            "Unhandled exception in thread %s",
            args.thread.name if args.thread else "?",
            exc_info=(args.exc_type, args.exc_value, args.exc_traceback),
        )

    sys.excepthook = handle_exception
    threading.excepthook = handle_thread_exception


def parse_cutoff(text: str) -> float:
    value = float(text)
    if math.isnan(value):
        raise argparse.ArgumentTypeError("cutoff must be a number")
    return value


def parse_tolerance_override(text: str) -> Tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    return key.strip(), value.strip()


@dataclass
class RunConfig:
    """Validated options of one pipeline run"""
    divergence: str
    complex: str
    input: Path
    output: Path
    max_dim: int = 2
    max_hom_dim: int = 2
    cutoff: float = math.inf
    threads: int = 1
    seed: int = 0
    config: Optional[Path] = None
    tolerance_overrides: Dict[str, str] = field(default_factory=dict)

    def validate(self) -> None:
        names = [k.value for k in GeneratorKind]
        if self.divergence not in names:
            raise ValueError(f"unknown divergence {self.divergence!r}")
        if self.complex not in COMPLEX_KINDS:
            raise ValueError(f"unknown complex {self.complex!r}")
        if self.max_dim < 0:
            raise ValueError("--max-dim must be nonnegative")
        if self.max_hom_dim < 0:
            raise ValueError("--max-hom-dim must be nonnegative")
        if self.cutoff < 0:
            raise ValueError("--cutoff must be nonnegative")
        if self.threads < 1:
            raise ValueError("--threads must be positive")
        self.tolerances()

    @property
    def homology_dim(self) -> int:
        return min(self.max_hom_dim, self.max_dim)

    def tolerances(self) -> Tolerances:
        tol = load_tolerances(str(self.config) if self.config else None)
        try:
            return tol.with_overrides(self.tolerance_overrides)
        except KeyError as exc:
            raise ValueError(str(exc.args[0]))
        except ValueError as exc:
            raise ValueError(f"bad tolerance value: {exc}")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> 'RunConfig':
        return cls(
            divergence=args.divergence,
            complex=args.complex,
            input=Path(args.input),
            output=Path(args.output),
            max_dim=args.max_dim,
            max_hom_dim=args.max_hom_dim,
            cutoff=args.cutoff,
            threads=args.threads,
            seed=args.seed,
            config=Path(args.config) if args.config else None,
            tolerance_overrides=dict(args.tol or []),
        )


def build_filtration(config: RunConfig, cloud: PointCloud, gen, tol: Tolerances):
    """Radius filtration for the configured complex, with its build stats"""
    if config.complex == "cech":
        return cech_radius_function(gen, cloud, config.max_dim, config.cutoff, tol,
                                    config.threads)
    if config.complex == "rips":
        f = rips_radius_function(gen, cloud, config.max_dim, config.cutoff, tol,
                                 config.threads)
        return f, f.stats
    full = delaunay_radius_function(gen, cloud, tol, config.threads)
    f = full.truncated(config.max_dim, config.cutoff)
    return f, f.stats


def run(config: RunConfig, out: Optional[TextIO] = None) -> int:
    """Ingest, build, reduce; write the diagram document and print one stats line"""
    out = out or sys.stdout
    started = time.perf_counter()
    tol = config.tolerances()
    gen = make_generator(config.divergence, input_dimension(config.input),
                         margin=tol.domain_margin)
    cloud = ingest(config.input, gen)
    logger.info("run: %s %s on %d points in dimension %d, max_dim=%d cutoff=%s",
                config.complex, gen.name, len(cloud), cloud.n, config.max_dim, config.cutoff)

    filtration, stats = build_filtration(config, cloud, gen, tol)
    order = order_filtration(filtration, tol)
    diagram = compute_persistence(order, config.homology_dim, tol)

    document = {
        "schema": 1,
        "divergence": gen.name,
        "complex": config.complex,
        "max_dim": config.max_dim,
        "cutoff": "inf" if math.isinf(config.cutoff) else config.cutoff,
        "diagram": diagram.to_list(),
    }
    write_json_document(config.output, document)

    wall_ms = int(round((time.perf_counter() - started) * 1000))
    line = _stats_line(stats, diagram.num_zero_persistence, wall_ms)
    logger.info("calls/simplices ratio %.4f (%d / %d)", stats.calls_ratio,
                stats.num_circumball_calls, stats.num_simplices)
    out.write(json.dumps(line) + "\n")
    return EXIT_OK


def _stats_line(stats: BuildStats, zero: int, wall_ms: int) -> Dict[str, Any]:
    line: Dict[str, Any] = stats.to_dict()
    line["num_zero_persistence"] = zero
    line["wall_time_ms"] = wall_ms
    return line


def demo_no_interleaving(epsilons: Sequence[float], out: Optional[TextIO] = None,
                         tol: Optional[Tolerances] = None) -> List[Tuple[float, float, float, float]]:
    """Print epsilon, pairwise radius, triple radius and their ratio per row"""
    out = out or sys.stdout
    rows = no_interleaving_table(epsilons, tol or load_tolerances(None))
    out.write("epsilon,pairwise_radius,triple_radius,ratio\n")
    for eps, pairwise, triple, ratio in rows:
        out.write(f"{eps!r},{pairwise:.12g},{triple:.12g},{ratio:.12g}\n")
    return rows


def synth(args: argparse.Namespace) -> int:
    gen = make_generator(args.divergence, args.dim)
    points = synthesize(gen, args.num_points, args.seed)
    write_csv(args.output, points)
    logger.info("Wrote %d synthetic %s points to %s", len(points), gen.name, args.output)
    return EXIT_OK


class UsageErrorParser(argparse.ArgumentParser):
    """Reports usage errors as one JSON line on stderr, like every other failure"""

    def error(self, message: str) -> None:
        sys.stderr.write(json.dumps({"error": "UsageError", "message": message}) + "\n")
        sys.exit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--verbose", action="store_true", help="also log to stderr")
    common.add_argument("--log-dir", default=None, help="log directory")
    common.add_argument("--config", default=None, help="INI file with tolerances")
    common.add_argument("--tol", action="append", type=parse_tolerance_override,
                        metavar="KEY=VALUE", help="override one tolerance (repeatable)")

    divergences = [k.value for k in GeneratorKind]
    parser = UsageErrorParser(
        prog="bregman_tda",
        description="Čech, Rips and Delaunay radius filtrations under Bregman divergences")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", parents=[common], help="build a filtration and its diagram")
    run_p.add_argument("--divergence", required=True, choices=divergences)
    run_p.add_argument("--complex", default="cech", choices=COMPLEX_KINDS)
    run_p.add_argument("--max-dim", type=int, default=2)
    run_p.add_argument("--max-hom-dim", type=int, default=2)
    run_p.add_argument("--cutoff", type=parse_cutoff, default=math.inf)
    run_p.add_argument("--input", required=True)
    run_p.add_argument("--output", required=True)
    run_p.add_argument("--threads", type=int, default=default_thread_count())
    run_p.add_argument("--seed", type=int, default=0)

    demo_p = sub.add_parser("demo-no-interleaving", parents=[common],
                            help="dual KL balls near the edge midpoints of a triangle")
    demo_p.add_argument("--epsilons", type=float, nargs="*", default=DEFAULT_EPSILONS)

    synth_p = sub.add_parser("synth", parents=[common], help="write a seeded random cloud")
    synth_p.add_argument("--divergence", required=True, choices=divergences)
    synth_p.add_argument("--num-points", type=int, required=True)
    synth_p.add_argument("--dim", type=int, required=True)
    synth_p.add_argument("--seed", type=int, default=0)
    synth_p.add_argument("--output", required=True)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    setup_logging(args.log_dir, args.verbose)
    install_exception_hooks()

    try:
        if args.command == "run":
            config = RunConfig.from_args(args)
            try:
                config.validate()
            except ValueError as exc:
                parser.error(str(exc))
            return run(config)
        if args.command == "demo-no-interleaving":
            try:
                tol = load_tolerances(args.config).with_overrides(dict(args.tol or []))
            except (KeyError, ValueError) as exc:
                parser.error(f"bad tolerance override: {exc}")
            demo_no_interleaving(args.epsilons, tol=tol)
            return EXIT_OK
        return synth(args)
    except SystemExit as exc:
        return int(exc.code or 0)
    except BregmanTDAError as err:
        logger.error("%s: %s", type(err).__name__, err.message, exc_info=True)
        sys.stderr.write(json.dumps(err.to_dict()) + "\n")
        return EXIT_ERROR
    except ValueError as exc:
        logger.error("Invalid argument: %s", exc, exc_info=True)
        sys.stderr.write(json.dumps({"error": "InvalidArgument", "message": str(exc)}) + "\n")
        return EXIT_ERROR
    except Exception as exc:
        logger.exception("Internal error")
        sys.stderr.write(json.dumps({"error": "InternalError", "message": str(exc)}) + "\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
