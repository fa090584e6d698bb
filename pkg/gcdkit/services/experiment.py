"""
Monte Carlo experiment runner and result persistence
"""

import csv
import json
import sys
import time

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib
from collections import Counter
from contextlib import contextmanager
from pathlib import Path
from typing import (
    Any,
    Callable,
    Dict,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Tuple,
    Union,
)

import numpy as np
from pydantic import ValidationError

from gcdkit.core.config import settings
from gcdkit.core.constants import (
    SUMMARY_COLUMNS,
    ChannelKind,
    CodeKind,
    DecoderKind,
    LeafMode,
    OutputFormat,
)
from gcdkit.core.exceptions import ConfigError, ResultsWriteError, SearchExhausted
from gcdkit.models.channel import ChannelSpec
from gcdkit.models.experiment import CodeSource, ExperimentConfig, SummaryRecord
from gcdkit.models.polar import PolarTree
from gcdkit.services.channel import receive_llrs
from gcdkit.services.codes import Code, CrcSpec, hamming_code, load_code, random_code, rm_code
from gcdkit.services.decoders import esd_decode, gcd_decode, gnd_decode, parallel_gcd_decode
from gcdkit.services.polar import (
    PolarCode,
    construct_polar,
    load_reliability_sequence,
    reallocate_bits,
)
from gcdkit.services.polar_tree import build_full_tree, load_tree, prune_tree, time_steps
from gcdkit.services.scl_gcd import TreeDecoder
from gcdkit.utils.logger import get_structured_logger

logger = get_structured_logger(__name__)

PathLike = Union[str, Path]
AnyCode = Union[Code, PolarCode]


def validation_fields(error: ValidationError) -> List[str]:
    """One "field.path: message" line per pydantic error"""
    lines = []
    for err in error.errors():
        loc = ".".join(str(part) for part in err["loc"]) or "config"
        lines.append(f"{loc}: {err['msg']}")
    return lines


def parse_config(data: Dict[str, Any]) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError("invalid experiment config", validation_fields(e)) from e


def load_config(path: PathLike, overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Load an experiment config from TOML (.toml) or JSON (anything else).

    `overrides` replace top-level keys; None values are ignored.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    try:
        if path.suffix.lower() == ".toml":
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"cannot parse config {path}: {e}") from e
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a table/object at the top level")
    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value
    return parse_config(data)


def build_code(source: CodeSource) -> AnyCode:
    if source.kind == CodeKind.RM:
        return rm_code(source.m, source.r)
    if source.kind == CodeKind.HAMMING:
        return hamming_code(source.m)
    if source.kind == CodeKind.RANDOM:
        return random_code(source.n, source.k, source.seed)
    if source.kind == CodeKind.FILE:
        return load_code(source.path)
    crc = CrcSpec.parse(source.crc) if source.crc else None
    order = None
    if source.reliability_file:
        order = load_reliability_sequence(source.reliability_file, n=source.n)
    code = construct_polar(source.n, source.k, order, crc)
    return reallocate_bits(code, source.realloc)


def channel_at(kind: ChannelKind, point: float, rate: float) -> ChannelSpec:
    if kind == ChannelKind.BSC:
        return ChannelSpec.bsc(point).check()
    return ChannelSpec.at_snr(point, rate).check()


def _build_tree(cfg: ExperimentConfig, code: PolarCode) -> PolarTree:
    if cfg.decoder == DecoderKind.SCL:
        return build_full_tree(code, cfg.list_size)
    if cfg.tree_path:
        tree = load_tree(cfg.tree_path, code, cfg.list_size)
    else:
        snr = cfg.design_snr if cfg.design_snr is not None else cfg.points[0]
        ch = channel_at(cfg.channel, snr, code.rate)
        tree = prune_tree(code, cfg.list_size, ch, cfg.prune_trials, cfg.seed, design_snr=snr)
    if not cfg.truncation.is_default:
        for leaf in tree.leaves():
            if leaf.mode == LeafMode.GCD_LEAF and leaf.trunc.is_default:
                leaf.trunc = cfg.truncation
    return tree


class _FrameOutcome(NamedTuple):
    error: bool
    queries: int
    emissions: int
    stop: str
    true_missed: bool


def _block_decoder(
    cfg: ExperimentConfig, code: Code
) -> Callable[[np.ndarray, np.ndarray], _FrameOutcome]:
    L = cfg.list_size
    trunc = cfg.truncation

    def run(r: np.ndarray, sent: np.ndarray) -> _FrameOutcome:
        if cfg.decoder == DecoderKind.GND:
            try:
                result = gnd_decode(r, code, L, trunc.l_max)
            except SearchExhausted as e:
                result = e.result
        elif cfg.decoder == DecoderKind.ESD:
            result = esd_decode(r, code, L)
        elif cfg.decoder == DecoderKind.PARALLEL_GCD:
            result = parallel_gcd_decode(r, code, L, cfg.delta_bits, trunc, transmitted=sent)
        else:
            genie = cfg.decoder == DecoderKind.GENIE_GCD
            result = gcd_decode(r, code, L, trunc, transmitted=sent, genie_stop=genie)
        tracks_rank = cfg.decoder in (
            DecoderKind.GCD,
            DecoderKind.GENIE_GCD,
            DecoderKind.PARALLEL_GCD,
        )
        return _FrameOutcome(
            error=not result.contains(sent),
            queries=result.queries,
            emissions=result.emissions,
            stop=result.stop_reason.value,
            true_missed=tracks_rank and result.true_rank is None,
        )

    return run


def run_experiment(cfg: ExperimentConfig) -> Iterator[SummaryRecord]:
    """
    Yield one summary per operating point.

    Frame f draws its message and noise from default_rng((seed, f)), so each point sees
    the same messages and noise realizations and reruns are identical. Block decoders
    count a frame error when the sent codeword is not on the output list; polar decoders
    when the first ranked path (best CRC-passing path, if any) is not the sent codeword.
    Polar frames count GCD-leaf re-encodings as queries and every leaf candidate scored,
    exhaustive leaves included, as emissions.
    """
    code = build_code(cfg.code)
    polar = isinstance(code, PolarCode)
    rate = code.rate
    tree = None
    decoder: Optional[TreeDecoder] = None
    if cfg.decoder.is_polar:
        tree = _build_tree(cfg, code)
        decoder = TreeDecoder(tree, cfg.list_size)
        block_run = None
    else:
        block_run = _block_decoder(cfg, code.as_code() if polar else code)

    for point in cfg.points:
        ch = channel_at(cfg.channel, point, rate)
        logger.info(
            "point_started",
            code=code.name,
            decoder=cfg.decoder.value,
            point=point,
            channel=ch.label,
        )
        started = time.perf_counter()
        frames = errors = missed = 0
        queries: List[int] = []
        emissions: List[int] = []
        stops: Counter = Counter()
        leaf_queries: Dict[int, List[int]] = {}

        while True:
            if cfg.frames is not None:
                if frames >= cfg.frames:
                    break
            elif errors >= cfg.target_errors or frames >= cfg.max_frames:
                break
            rng = np.random.default_rng((cfg.seed, frames))
            message = rng.integers(0, 2, size=code.k, dtype=np.uint8)
            sent = code.encode(message)
            r = receive_llrs(sent, ch, rng)

            if decoder is not None:
                result = decoder.decode(r)
                error = not np.array_equal(result.best, sent)
                queries.append(result.queries)
                emissions.append(sum(s.queries for s in result.leaf_stats))
                for s in result.leaf_stats:
                    totals = leaf_queries.setdefault(s.leaf_start, [0, 0])
                    totals[0] += s.queries
                    totals[1] += s.paths_in
            else:
                outcome = block_run(r, sent)
                error = outcome.error
                queries.append(outcome.queries)
                emissions.append(outcome.emissions)
                stops[outcome.stop] += 1
                missed += outcome.true_missed

            frames += 1
            if error:
                errors += 1
                logger.debug("frame_error", point=point, frame=frames - 1, errors=errors)
            if frames % settings.PROGRESS_EVERY == 0:
                logger.info("progress", point=point, frames=frames, errors=errors)

        mean_steps = None
        if tree is not None:
            l_avg = {start: q / max(paths, 1) for start, (q, paths) in leaf_queries.items()}
            mean_steps = float(time_steps(tree, cfg.list_size, l_avg))
        q_arr = np.array(queries, dtype=np.float64)
        record = SummaryRecord(
            decoder=cfg.decoder,
            code=code.name,
            channel=cfg.channel,
            point=point,
            frames=frames,
            frame_errors=errors,
            fer=errors / frames if frames else 0.0,
            mean_queries=float(q_arr.mean()) if frames else 0.0,
            p50_queries=float(np.percentile(q_arr, 50)) if frames else 0.0,
            p99_queries=float(np.percentile(q_arr, 99)) if frames else 0.0,
            mean_emissions=float(np.mean(emissions)) if frames else 0.0,
            mean_time_steps=mean_steps,
            true_not_queried=missed,
            stop_reasons=dict(stops),
        )
        logger.info(
            "point_finished",
            point=point,
            frames=frames,
            errors=errors,
            fer=record.fer,
            mean_queries=record.mean_queries,
            seconds=time.perf_counter() - started,
        )
        yield record


@contextmanager
def _open_output(path: PathLike):
    if str(path) == "-":
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="", encoding="utf-8")
    except OSError as e:
        raise ResultsWriteError(f"cannot write {path}: {e}") from e
    with fh:
        yield fh


def emit_results(records: Iterable[SummaryRecord], fmt: OutputFormat, path: PathLike) -> int:
    """
    Write summary records as CSV (fixed SUMMARY_COLUMNS header, written even for no
    records) or JSON lines. `path` "-" writes to stdout. Returns the record count.
    """
    count = 0
    try:
        with _open_output(path) as fh:
            if OutputFormat(fmt) == OutputFormat.CSV:
                writer = csv.DictWriter(fh, fieldnames=list(SUMMARY_COLUMNS))
                writer.writeheader()
                for record in records:
                    writer.writerow(record.as_row())
                    count += 1
            else:
                for record in records:
                    fh.write(record.model_dump_json() + "\n")
                    count += 1
    except OSError as e:
        raise ResultsWriteError(f"cannot write {path}: {e}") from e
    return count


def summary_table_rows(records: Iterable[SummaryRecord]) -> Tuple[List[str], List[list]]:
    """Headers and rows for a console table"""
    headers = ["point", "frames", "errors", "FER", "mean q", "p99 q", "time steps", "stops"]
    rows = []
    for rec in records:
        rows.append(
            [
                rec.point,
                rec.frames,
                rec.frame_errors,
                f"{rec.fer:.3e}",
                f"{rec.mean_queries:.2f}",
                f"{rec.p99_queries:.0f}",
                "" if rec.mean_time_steps is None else f"{rec.mean_time_steps:.1f}",
                rec.as_row()["stop_reasons"],
            ]
        )
    return headers, rows
