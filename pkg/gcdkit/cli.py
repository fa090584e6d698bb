"""
gcdkit command line

Exit codes: 0 success, 1 configuration or usage error, 2 runtime error.
"""

import functools
import sys
from pathlib import Path
from typing import Optional, Tuple

import click
import numpy as np
from pydantic import ValidationError
from tabulate import tabulate

from gcdkit.core.config import settings
from gcdkit.core.constants import (
    CcdfKind,
    CcdfMethod,
    CodeKind,
    DecoderKind,
    LeafMode,
    OutputFormat,
)
from gcdkit.core.exceptions import ConfigError, GcdKitError, SearchExhausted
from gcdkit.models.channel import ChannelSpec
from gcdkit.models.decoding import TruncationConfig
from gcdkit.models.experiment import CodeSource
from gcdkit.services.analysis import ccdf, hamming_query_curves, write_ccdf_csv
from gcdkit.services.codes import Code, CrcSpec, save_code
from gcdkit.services.decoders import esd_decode, gcd_decode, gnd_decode, parallel_gcd_decode
from gcdkit.services.experiment import (
    build_code,
    emit_results,
    load_config,
    parse_config,
    run_experiment,
    summary_table_rows,
    validation_fields,
)
from gcdkit.services.polar import PolarCode, construct_polar
from gcdkit.services.polar_tree import (
    build_full_tree,
    latency_table,
    load_tree,
    prune_tree,
    save_tree,
)
from gcdkit.services.scl_gcd import scl_gcd_decode
from gcdkit.utils.logger import setup_logging

DECODERS = [d.value for d in DecoderKind]


class GcdKitGroup(click.Group):
    """Reports usage errors with the configuration exit code"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except click.UsageError as e:
            e.exit_code = 1
            raise


def handle_errors(func):
    """Map gcdkit errors to [ERROR] lines and exit codes"""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ConfigError as e:
            click.echo(f"[ERROR] {e}", err=True)
            sys.exit(1)
        except (GcdKitError, OSError, ValueError) as e:
            click.echo(f"[ERROR] {e}", err=True)
            sys.exit(2)

    return wrapper


def _ints(text: str, count: int, what: str) -> Tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.split(","))
    except ValueError:
        values = ()
    if len(values) != count:
        raise ConfigError(f"{what} expects {count} comma-separated integers, got {text!r}")
    return values


def code_options(func):
    """Shared options selecting exactly one code source"""
    options = [
        click.option(
            "--code-file",
            type=click.Path(exists=True, dir_okay=False),
            help="Code file (H, or G then H)",
        ),
        click.option("--rm", "rm", help="Reed-Muller code as m,r"),
        click.option("--hamming", type=int, help="Hamming code with m parity bits"),
        click.option("--random", "random_", help="Random code as n,k,seed"),
        click.option("--polar", help="Polar code as n,k"),
        click.option("--crc", help="CRC polynomial for polar codes, e.g. 0xE21"),
        click.option("--realloc", type=int, default=0, help="Bits moved by reallocation"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _code_source(code_file, rm, hamming, random_, polar, crc, realloc) -> CodeSource:
    given = {
        "code-file": code_file,
        "rm": rm,
        "hamming": hamming,
        "random": random_,
        "polar": polar,
    }
    chosen = [name for name, value in given.items() if value is not None]
    if len(chosen) != 1:
        raise ConfigError(f"select exactly one code source, got {chosen or 'none'}")
    data = {"crc": crc, "realloc": realloc}
    if code_file:
        data.update(kind=CodeKind.FILE, path=code_file)
    elif rm:
        m, r = _ints(rm, 2, "--rm")
        data.update(kind=CodeKind.RM, m=m, r=r)
    elif hamming is not None:
        data.update(kind=CodeKind.HAMMING, m=hamming)
    elif random_:
        n, k, seed = _ints(random_, 3, "--random")
        data.update(kind=CodeKind.RANDOM, n=n, k=k, seed=seed)
    else:
        n, k = _ints(polar, 2, "--polar")
        data.update(kind=CodeKind.POLAR, n=n, k=k)
    try:
        return CodeSource.model_validate(data)
    except ValidationError as e:
        raise ConfigError("invalid code selection", validation_fields(e)) from e


@click.group(cls=GcdKitGroup)
@click.option("--log-level", default=None, help="Console log level (default: LOG_LEVEL)")
def cli(log_level: Optional[str]):
    """Guessing codeword decoding toolkit"""
    setup_logging(log_level)


@cli.command()
@code_options
@click.option(
    "--llrs",
    "llr_file",
    type=click.Path(exists=True, dir_okay=False),
    required=True,
    help="Whitespace-separated channel LLRs",
)
@click.option("--decoder", type=click.Choice(DECODERS), default="gcd", show_default=True)
@click.option("--list-size", "-L", type=int, default=settings.DEFAULT_LIST_SIZE)
@click.option("--l-max", type=int, default=None)
@click.option("--tau-s", type=float, default=None)
@click.option("--tau-p", type=float, default=None)
@click.option("--delta-bits", type=int, default=0)
@click.option("--tree", "tree_path", type=click.Path(exists=True, dir_okay=False))
@handle_errors
def decode(
    code_file,
    rm,
    hamming,
    random_,
    polar,
    crc,
    realloc,
    llr_file,
    decoder,
    list_size,
    l_max,
    tau_s,
    tau_p,
    delta_bits,
    tree_path,
):
    """Decode one received word given as LLRs"""
    code = build_code(_code_source(code_file, rm, hamming, random_, polar, crc, realloc))
    r = np.array(Path(llr_file).read_text(encoding="utf-8").split(), dtype=np.float64)
    kind = DecoderKind(decoder)
    try:
        trunc = TruncationConfig(l_max=l_max, tau_s=tau_s, tau_p=tau_p)
    except ValidationError as e:
        raise ConfigError("invalid truncation", validation_fields(e)) from e

    if kind.is_polar:
        if not isinstance(code, PolarCode):
            raise ConfigError(f"decoder {kind.value} needs a polar code")
        if kind == DecoderKind.SCL:
            tree = build_full_tree(code, list_size)
        elif tree_path:
            tree = load_tree(tree_path, code, list_size)
        else:
            raise ConfigError("scl_gcd needs --tree (see `gcdkit prune`)")
        result = scl_gcd_decode(r, tree, list_size)
        rows = [
            [i + 1, f"{p.metric:.6g}", "yes" if p.crc_ok else "no", "".join(map(str, p.codeword))]
            for i, p in enumerate(result.paths)
        ]
        click.echo(tabulate(rows, headers=["rank", "metric", "crc", "codeword"], tablefmt="grid"))
        click.echo(f"[OK] {len(result.paths)} paths, {result.queries} GCD queries")
        return

    block: Code = code.as_code() if isinstance(code, PolarCode) else code
    if kind == DecoderKind.GND:
        try:
            res = gnd_decode(r, block, list_size, l_max)
        except SearchExhausted as e:
            click.echo(f"[ERROR] {e}", err=True)
            res = e.result
    elif kind == DecoderKind.ESD:
        res = esd_decode(r, block, list_size)
    elif kind == DecoderKind.PARALLEL_GCD:
        res = parallel_gcd_decode(r, block, list_size, delta_bits, trunc)
    else:
        res = gcd_decode(r, block, list_size, trunc)
    rows = [
        [i + 1, f"{w:.6g}", "".join(map(str, c))]
        for i, (w, c) in enumerate(zip(res.weights, res.codewords))
    ]
    click.echo(tabulate(rows, headers=["rank", "weight", "codeword"], tablefmt="grid"))
    click.echo(f"[OK] queries={res.queries} emissions={res.emissions} stop={res.stop_reason.value}")


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--output", "-o", type=click.Path(dir_okay=False), help="Write summaries here ('-' for stdout)"
)
@click.option(
    "--format",
    "fmt",
    type=click.Choice([f.value for f in OutputFormat]),
    default="csv",
    show_default=True,
)
@click.option("--frames", type=int, default=None, help="Override: fixed frames per point")
@click.option("--seed", type=int, default=None, help="Override: master seed")
@click.option("--decoder", type=click.Choice(DECODERS), default=None)
@click.option("--list-size", "-L", type=int, default=None)
@handle_errors
def fer(config, output, fmt, frames, seed, decoder, list_size):
    """Run a Monte Carlo FER / query experiment from a TOML or JSON config"""
    cfg = load_config(
        config, {"frames": frames, "seed": seed, "decoder": decoder, "list_size": list_size}
    )
    records = list(run_experiment(cfg))
    headers, rows = summary_table_rows(records)
    click.echo(tabulate(rows, headers=headers, tablefmt="grid"))
    if output:
        emit_results(records, OutputFormat(fmt), output)
        click.echo(f"[OK] {len(records)} records written to {output}")


@cli.command()
@click.option("--p", "crossovers", type=float, multiple=True, required=True)
@click.option("--simulate", "frames", type=int, default=0, help="Simulated frames per p")
@click.option("--seed", type=int, default=settings.DEFAULT_SEED)
@handle_errors
def queries(crossovers, frames, seed):
    """Mean queries of GND and GCD for Hamming [7,4] on a BSC"""
    rows = []
    for p in crossovers:
        gnd_mean, gcd_mean = hamming_query_curves(p)
        row = [p, f"{gnd_mean:.4f}", f"{gcd_mean:.4f}"]
        if frames:
            for kind in (DecoderKind.GND, DecoderKind.GCD):
                cfg = parse_config(
                    {
                        "code": {"kind": "hamming", "m": 3},
                        "channel": "bsc",
                        "points": [p],
                        "decoder": kind.value,
                        "frames": frames,
                        "seed": seed,
                    }
                )
                record = next(run_experiment(cfg))
                row.append(f"{record.mean_queries:.4f}")
        rows.append(row)
    headers = ["p", "GND closed form", "GCD closed form"]
    if frames:
        headers += ["GND simulated", "GCD simulated"]
    click.echo(tabulate(rows, headers=headers, tablefmt="grid"))


@cli.command(name="ccdf")
@click.option("--kind", type=click.Choice([k.value for k in CcdfKind]), default="D")
@click.option("--k", "k", type=int, required=True, help="Number of information positions")
@click.option("--snr", type=float, multiple=True, required=True, help="Eb/N0 in dB")
@click.option("--n", "n", type=int, help="Code length; the rate defaults to k/n")
@click.option("--rate", type=float, help="Code rate for the SNR convention")
@click.option("--threshold", "thresholds", type=float, multiple=True, help="CCDF grid")
@click.option("--trials", type=int, default=10_000)
@click.option("--seed", type=int, default=settings.DEFAULT_SEED)
@click.option(
    "--method", type=click.Choice([m.value for m in CcdfMethod]), default="saddlepoint"
)
@click.option("--output", "-o", type=click.Path(dir_okay=False), help="CSV output")
@handle_errors
def ccdf_command(kind, k, n, snr, rate, thresholds, trials, seed, method, output):
    """CCDF of the rank count D or the true-pattern weight Γ"""
    if rate is None:
        if n is None:
            raise ConfigError("ccdf needs the code length --n or an explicit --rate")
        if not 0 < k <= n:
            raise ConfigError(f"--k must lie in 1..{n}, got {k}")
        rate = k / n
    if not 0 < rate <= 1:
        raise ConfigError(f"--rate must lie in (0, 1], got {rate}")
    kind = CcdfKind(kind)
    if not thresholds:
        if kind == CcdfKind.D:
            thresholds = [10.0**e for e in range(0, 7)]
        else:
            thresholds = [float(t) for t in range(0, 21)]
    method = CcdfMethod(method)
    curves = [
        ccdf(kind, k, ChannelSpec.at_snr(s, rate), thresholds, trials, seed, method, snr=s)
        for s in snr
    ]
    headers = ["threshold"] + [f"{s} dB" for s in snr]
    rows = [
        [t] + [f"{curve.probabilities[i]:.4f}" for curve in curves]
        for i, t in enumerate(curves[0].thresholds)
    ]
    click.echo(f"K = {k}, rate {rate:.4f}")
    click.echo(tabulate(rows, headers=headers, tablefmt="grid"))
    if output:
        write_ccdf_csv(curves, output)
        click.echo(f"[OK] CCDF written to {output}")


@cli.command()
@code_options
@click.option("--list-size", "-L", type=int, default=8)
@click.option("--snr", type=float, required=True, help="Design Eb/N0 in dB")
@click.option("--trials", type=int, default=200)
@click.option("--seed", type=int, default=settings.DEFAULT_SEED)
@click.option("--output", "-o", type=click.Path(dir_okay=False), required=True)
@handle_errors
def prune(
    code_file, rm, hamming, random_, polar, crc, realloc, list_size, snr, trials, seed, output
):
    """Prune the polar decoding tree and save it"""
    code = build_code(_code_source(code_file, rm, hamming, random_, polar, crc, realloc))
    if not isinstance(code, PolarCode):
        raise ConfigError("pruning needs a polar code (--polar n,k)")
    ch = ChannelSpec.at_snr(snr, code.rate)
    tree = prune_tree(code, list_size, ch, trials, seed, design_snr=snr)
    save_tree(tree, output)
    rows = [
        [
            leaf.leaf_start,
            leaf.n_v,
            leaf.k_v,
            leaf.mode.value,
            "" if leaf.l_avg is None else f"{leaf.l_avg:.2f}",
        ]
        for leaf in tree.leaves()
        if leaf.mode == LeafMode.GCD_LEAF or leaf.n_v > 1
    ]
    click.echo(tabulate(rows, headers=["start", "n", "k", "mode", "l_avg"], tablefmt="grid"))
    click.echo(
        f"[OK] {tree.gcd_leaf_count()} GCD leaves, {len(tree.leaves())} leaves; saved to {output}"
    )


@cli.command()
@click.option("--crc", default="0xE21", show_default=True, help="CRC polynomial, or 'none'")
@click.option("--list-size", "-L", type=int, default=8)
@click.option("--length", "lengths", type=int, multiple=True, help="Code lengths")
@click.option("--tree", "trees", multiple=True, help="n,k=PATH of a pruned tree to time")
@handle_errors
def latency(crc, list_size, lengths, trees):
    """Decoding time steps of SCL and of pruned trees"""
    spec = None if crc.lower() == "none" else CrcSpec.parse(crc)
    loaded = {}
    for item in trees:
        key, _, path = item.partition("=")
        n, k = _ints(key, 2, "--tree")
        loaded[(n, k)] = load_tree(path, construct_polar(n, k, crc=spec), list_size)
    rows = latency_table(lengths or (128, 256, 1024), crc=spec, trees=loaded, L=list_size)
    headers = ["n", "k", "rate", "SCL"] + (["pruned"] if loaded else [])
    table = []
    for row in rows:
        line = [row["n"], row["k"], row["rate"], row["scl"]]
        if loaded:
            line.append(row.get("pruned", ""))
        table.append(line)
    click.echo(tabulate(table, headers=headers, tablefmt="grid"))


@cli.command()
@code_options
@click.option("--output", "-o", type=click.Path(dir_okay=False), required=True)
@handle_errors
def construct(code_file, rm, hamming, random_, polar, crc, realloc, output):
    """Construct a code and write its matrices (G then H)"""
    code = build_code(_code_source(code_file, rm, hamming, random_, polar, crc, realloc))
    block = code.as_code() if isinstance(code, PolarCode) else code
    save_code(block, output)
    click.echo(f"[OK] {code.name}: n={block.n}, k={block.k} written to {output}")


def main() -> None:
    cli(prog_name="gcdkit")


if __name__ == "__main__":
    main()
