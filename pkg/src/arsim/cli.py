"""Command-line experiment runner.

Every flag can also be set through ``ARSIM_<COMMAND>_<FLAG>`` environment
variables, e.g. ``ARSIM_VERIFY_TRIALS=10000``.  Exit codes: 0 pass or
informational, 1 bound violated, 2 usage or parameter error.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time

import click
import numpy as np

from arsim import __version__, mixing
from arsim.gaussian import RoundingParams, rounded_pmf
from arsim.generator import (ars_generate, gen_params, oracle_for, tdesign_generate,
                             tdesign_keygen)
from arsim.verify import (DISTANCE_IDS, LEMMA_IDS, STEPS, e2e_trace_distance, hybrid_step_check,
                          run_suite, to_csv, two_point_scenario, verify_distance_lemma,
                          verify_lemma)
from arsim.verify.reports import FAIL

CHECK_IDS = LEMMA_IDS + DISTANCE_IDS + STEPS


def _seed(value):
    try:
        return mixing.fresh_seed() if value is None else mixing.parse_seed(value)
    except (TypeError, ValueError) as exc:
        raise click.BadParameter(str(exc), param_hint="--seed") from exc


def _extra_params(items) -> dict:
    out = {}
    for item in items:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}", param_hint="--param")
        try:
            out[key] = json.loads(value)
        except json.JSONDecodeError:
            out[key] = value
    return out


def _envelope(command: str, params: dict, seed: int, start: float, **body) -> dict:
    return {"tool": "arsim", "version": __version__, "command": command, "params": params,
            "seed": mixing.seed_hex(seed), "wall_time_s": time.perf_counter() - start, **body}


def _emit(text: str, out):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _write_reports(command, params, seed, start, reports, fmt, out):
    if fmt == "csv":
        meta = _envelope(command, params, seed, start)
        header = "# " + " ".join(f"{k}={v}" for k, v in meta.items() if k != "params") + "\n"
        _emit(header + to_csv(reports), out)
    else:
        body = [r.to_dict() for r in reports]
        doc = _envelope(command, params, seed, start,
                        **({"report": body[0]} if len(body) == 1 else {"reports": body}))
        _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


def _exit_for(reports):
    sys.exit(1 if any(r.verdict == FAIL for r in reports) else 0)


def _usage(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, KeyError) as exc:
        raise click.UsageError(str(exc.args[0] if exc.args else exc)) from exc


common_out = [
    click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None,
                 help="Write the report here instead of stdout."),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default=None,
                 help="Report format (json by default; csv for --lemma all)."),
]


def with_options(options):
    def wrap(fn):
        for opt in reversed(options):
            fn = opt(fn)
        return fn
    return wrap


@click.group(context_settings={"auto_envvar_prefix": "ARSIM", "help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="arsim")
def main():
    """Simulate the generator and check its supporting bounds numerically."""


@main.command()
@click.option("--n", "n", type=int, required=True, help="Qubit count.")
@click.option("--lambda", "lam", type=int, required=True, help="Security parameter.")
@click.option("--seed", default=None, help="256-bit hex seed (fresh if omitted).")
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
def sample(n, lam, seed, out):
    """Run the generator once against a fresh random function."""
    start = time.perf_counter()
    seed = _seed(seed)
    params = _usage(gen_params, n, lam)
    spec = oracle_for(params, mixing.derive_seed(seed, "sample", "oracle"))
    outcome = ars_generate(params, spec, mixing.numpy_rng(seed, "sample", "bvs"))
    doc = _envelope("sample", params.as_dict(), seed, start, result=outcome.summary())
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if out:
        _emit(text, out)
    else:
        click.echo(f"branch {outcome.branch}  candidate {outcome.candidate_index}  "
                   f"bvs trials {outcome.bvs_trials}  failed {outcome.failed}", err=True)
        for i, z in enumerate(outcome.state):
            click.echo(f"|{i:0{n}b}>  {z.real:+.12f} {z.imag:+.12f}i  p={abs(z) ** 2:.12f}", err=True)
        _emit(text, None)


@main.command()
@click.option("--lemma", "lemma", required=True,
              help=f"One of {', '.join(CHECK_IDS)} or 'all'.")
@click.option("--n", "n", type=int, default=None)
@click.option("--lambda", "lam", type=int, default=None)
@click.option("--t", "t", type=int, default=1, show_default=True)
@click.option("--trials", type=int, default=1_000_000, show_default=True)
@click.option("--seed", default=None)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--param", "extra", multiple=True, help="Extra KEY=VALUE lemma parameter, e.g. eps=0.01.")
@with_options(common_out)
def verify(lemma, n, lam, t, trials, seed, threads, extra, out, fmt):
    """Check one lemma, distance statement or hybrid step, or the whole suite."""
    start = time.perf_counter()
    seed = _seed(seed)
    params = {k: v for k, v in (("n", n), ("lambda", lam)) if v is not None}
    params.update(_extra_params(extra))
    if lemma == "all":
        reports = _usage(run_suite, trials, seed, threads)
        fmt = fmt or "csv"
    elif lemma in LEMMA_IDS:
        reports = [_usage(verify_lemma, lemma, params, trials, seed, threads)]
    elif lemma in DISTANCE_IDS:
        scenario = _usage(two_point_scenario, lemma, params.get("n", 1), seed,
                          **{k: params[k] for k in ("eps", "m") if k in params})
        reports = [_usage(verify_distance_lemma, lemma, scenario, t, seed)]
    elif lemma in STEPS:
        reports = [_usage(hybrid_step_check, lemma, dict(params, t=t), trials, seed, threads)]
    else:
        raise click.BadParameter(f"unknown lemma id {lemma!r}", param_hint="--lemma")
    _write_reports("verify", dict(params, lemma=lemma, t=t, trials=trials), seed, start,
                   reports, fmt or "json", out)
    _exit_for(reports)


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--lambda", "lam", type=int, required=True)
@click.option("--t", "t", type=int, default=1, show_default=True)
@click.option("--runs", type=int, default=1_000_000, show_default=True)
@click.option("--seed", default=None)
@click.option("--threads", type=int, default=1, show_default=True)
@with_options(common_out)
def e2e(n, lam, t, runs, seed, threads, out, fmt):
    """Estimate the t-copy trace distance to Haar-random states."""
    start = time.perf_counter()
    seed = _seed(seed)
    report = _usage(e2e_trace_distance, n, lam, t, runs, seed, threads)
    click.echo(f"TD {report.estimate:.6g} +- {report.stderr:.3g}  bound {report.bound:.6g}  "
               f"{report.verdict}", err=True)
    _write_reports("e2e", {"n": n, "lambda": lam, "t": t, "runs": runs}, seed, start,
                   [report], fmt or "json", out)
    _exit_for([report])


@main.command()
@click.option("--n", "n", type=int, required=True)
@click.option("--lambda", "lam", type=int, required=True)
@click.option("--t", "t", type=int, default=1, show_default=True)
@click.option("--seed", default=None)
@click.option("--out", type=click.Path(dir_okay=False, writable=True), default=None)
def design(n, lam, t, seed, out):
    """Draw an m-wise independent key and run the generator against it."""
    start = time.perf_counter()
    seed = _seed(seed)
    params = _usage(gen_params, n, lam)
    key = tdesign_keygen(n, lam, t, mixing.numpy_rng(seed, "design", "key"))
    outcome = tdesign_generate(key, params, mixing.numpy_rng(seed, "design", "bvs"))
    doc = _envelope("design", dict(params.as_dict(), t=t), seed, start,
                    key={"independence": key.m, "lanes": key.lanes, "output_bits": key.output_bits},
                    result=outcome.summary())
    _emit(json.dumps(doc, indent=2, sort_keys=True) + "\n", out)


@main.command()
@click.option("--m", "m", type=int, required=True, help="Grid exponent: spacing 2^-m.")
@click.option("--B", "B", type=int, required=True, help="Tail cut.")
@with_options(common_out)
def pmf(m, B, out, fmt):
    """Tabulate the law of one rounded real component."""
    start = time.perf_counter()
    rp = _usage(RoundingParams, m, B)
    grid = rp.grid()
    probs = rounded_pmf(grid, rp)
    if (fmt or "csv") == "csv":
        buf = io.StringIO(f"# tool=arsim version={__version__} command=pmf m={m} B={B}\n")
        buf.seek(0, io.SEEK_END)
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["value", "probability"])
        writer.writerows((repr(float(y)), repr(float(p))) for y, p in zip(grid, probs))
        _emit(buf.getvalue(), out)
    else:
        doc = _envelope("pmf", {"m": m, "B": B}, 0, start,
                        table=[[float(y), float(p)] for y, p in zip(grid, probs)],
                        total=float(np.sum(probs)))
        doc.pop("seed")
        _emit(json.dumps(doc, indent=2) + "\n", out)


if __name__ == "__main__":
    main()
