"""Experiment harness: each subcommand regenerates one dataset as CSV.

Every output starts with a ``#``-prefixed JSON line holding the experiment
name, build id, seed, resolved session config and parameters.  Every data
row repeats the experiment name and build id.  Trials use seeds derived
from ``(seed, experiment, point, trial)`` so results do not depend on the
number of worker processes.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .codec import DecoderReport, SgeState, band_coefficients, reference_coefficients
from .complexity import predict, xors_per_megabit
from .degree import (
    DegreeDistribution,
    binomial,
    monte_carlo_evolution,
    omega_infinity,
    omega_iterates,
    rsd,
    tv_distance,
)
from .errors import BandCodesError, ParameterError
from .rng import ALGORITHM, derive_seed, make_rng
from .sim.config import SimConfig
from .sim.session import ci95, run_session

# first key of every derived trial seed
_EXP_KEYS = {
    "degree-evolution": 1,
    "e2e-tradeoff": 2,
    "mesh-tradeoff": 3,
    "complexity-check": 4,
    "degree-preservation": 5,
    "ci-study": 6,
}

DEFAULT_W_RATIOS = (0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)
CI_NOTE = "simulated continuity index from the event-driven model; not measured Internet values"


def build_id() -> str:
    """``git describe``-style identifier of the code that produced a dataset."""
    env = os.environ.get("BANDCODES_BUILD_ID")
    if env:
        return env
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=5,
        )
    except (OSError, subprocess.SubprocessError):
        out = None
    if out is not None and out.returncode == 0 and out.stdout.strip():
        return f"v{__version__}-g{out.stdout.strip()}"
    return f"v{__version__}"


@dataclass
class Dataset:
    experiment: str
    columns: list[str]
    rows: list[list[Any]]
    meta: dict[str, Any] = field(default_factory=dict)
    build: str = field(default_factory=build_id)

    def header(self) -> dict[str, Any]:
        return {"experiment": self.experiment, "build": self.build, "rng": ALGORITHM, **self.meta}

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("# " + json.dumps(self.header(), sort_keys=True, default=_json_default) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["experiment", "build", *self.columns])
        for row in self.rows:
            writer.writerow([self.experiment, self.build, *row])
        return buf.getvalue()

    def records(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]

    def column(self, name: str) -> list[Any]:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


def _json_default(obj: Any) -> Any:
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def read_csv(text: str) -> tuple[dict[str, Any], list[dict[str, str]]]:
    """Parse a dataset written by :meth:`Dataset.to_csv`."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("# "):
        raise ParameterError("missing JSON header line")
    header = json.loads(lines[0][2:])
    return header, list(csv.DictReader(lines[1:]))


def _pmap(fn: Callable[[Any], Any], items: Sequence[Any], jobs: int) -> list[Any]:
    if jobs <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def window_for(n: int, ratio: float) -> int:
    if not 0 < ratio <= 1:
        raise ParameterError(f"W/N ratio must lie in (0, 1], got {ratio}")
    return max(1, min(n, round(ratio * n)))


def _mean(x: Sequence[float]) -> float:
    return float(np.mean(x)) if len(x) else math.nan


# direct source-to-sink delivery


def direct_trial(
    n: int,
    w: int,
    rng,
    swap: bool = True,
    scheme: str = "band",
    degree_pmf: Optional[Sequence[float]] = None,
) -> DecoderReport:
    """Feed fresh source packets to one decoder until it decodes."""
    if scheme == "band":
        state = SgeState(n, w, swap=swap)
        while state.rank < n:
            state.receive_bits(band_coefficients(n, w, rng)[1], 0)
    else:
        state = SgeState(n, n, swap=swap)
        while state.rank < n:
            state.receive_bits(reference_coefficients(n, rng, degree_pmf), 0)
    state.diagonalize()
    return state.report()


def _direct_point(args: tuple) -> list[tuple[float, int]]:
    seed, key, n, w, trials, swap, scheme, pmf = args
    out = []
    for t in range(trials):
        rep = direct_trial(n, w, make_rng(seed, *key, t), swap, scheme, pmf)
        out.append((rep.overhead, rep.xor_total))
    return out


def e2e_tradeoff(
    n_list: Sequence[int] = (100, 200),
    w_ratios: Sequence[float] = DEFAULT_W_RATIOS,
    trials: int = 200,
    seed: int = 0,
    base: SimConfig = SimConfig(),
    jobs: int = 1,
) -> Dataset:
    """Overhead and decoding XORs of band codes without recombination."""
    if trials < 2:
        raise ParameterError("need at least 2 trials for a confidence interval")
    exp = _EXP_KEYS["e2e-tradeoff"]
    points = [(n, window_for(n, r)) for n in n_list for r in w_ratios]
    tasks = [(seed, (exp, i), n, w, trials, base.swap, "band", None) for i, (n, w) in enumerate(points)]
    rows = []
    for (n, w), res in zip(points, _pmap(_direct_point, tasks, jobs)):
        eps = [e for e, _ in res]
        xors = [x for _, x in res]
        rows.append([
            n, w, _mean(eps), ci95(eps), _mean(xors), ci95(xors),
            xors_per_megabit(n, w, base.symbol_size, _mean(xors)),
        ])
    return Dataset(
        "e2e-tradeoff",
        ["N", "W", "overhead_mean", "overhead_ci95", "xor_mean", "xor_ci95", "xor_per_mbit"],
        rows,
        {"seed": seed, "config": base.to_dict(),
         "params": {"n": list(n_list), "w_ratios": list(w_ratios), "trials": trials}},
    )


# degree evolution under recombination


def parse_rounds(text: str) -> list[int | str]:
    out: list[int | str] = []
    for item in text.split(","):
        item = item.strip().lower()
        if item in ("inf", "infinity", "∞"):
            out.append("inf")
        else:
            k = int(item)
            if k < 0:
                raise ParameterError(f"rounds must be non-negative, got {k}")
            out.append(k)
    return out


def source_distribution(n: int, name: str, base: SimConfig = SimConfig()) -> DegreeDistribution:
    if name == "rsd":
        return rsd(n, base.rsd_c, base.rsd_delta)
    if name == "binomial":
        return binomial(n)
    raise ParameterError(f"unknown source distribution {name!r}")


def degree_evolution(
    n: int = 100,
    source: str = "rsd",
    rounds: Sequence[int | str] = (0, 2, 4, "inf"),
    samples: int = 100_000,
    seed: int = 0,
    base: SimConfig = SimConfig(),
) -> Dataset:
    """Analytic degree iterates next to a Monte Carlo recombination pool."""
    omega0 = source_distribution(n, source, base)
    finite = sorted({r for r in rounds if r != "inf"})
    top = finite[-1] if finite else 0
    analytic = omega_iterates(omega0, top)
    empirical = monte_carlo_evolution(omega0, top, samples, make_rng(seed, _EXP_KEYS["degree-evolution"]))
    limit = omega_infinity(n)
    rows: list[list[Any]] = []
    tv_mc: dict[str, float] = {}
    tv_bin: dict[str, float] = {}
    for r in rounds:
        if r == "inf":
            a, e = limit.pmf, None
        else:
            a, e = analytic[r].pmf, empirical[r].pmf
            tv_mc[str(r)] = tv_distance(a, e)
        tv_bin[str(r)] = tv_distance(a, limit)
        for d in range(n + 1):
            rows.append([r, d, float(a[d]), "" if e is None else float(e[d])])
    return Dataset(
        "degree-evolution",
        ["j", "degree", "analytic_p", "empirical_p"],
        rows,
        {"seed": seed, "config": base.to_dict(),
         "params": {"n": n, "source": source, "rounds": list(rounds), "samples": samples},
         "tv_analytic_empirical": tv_mc, "tv_to_binomial": tv_bin},
    )


# mesh sessions


@dataclass
class ArmResult:
    overheads: list[float]
    xors: list[float]
    packets: int
    from_source: int
    continuity: list[float]
    histogram: np.ndarray

    @property
    def source_fraction(self) -> float:
        return self.from_source / self.packets if self.packets else 0.0


def _session_trials(args: tuple) -> ArmResult:
    cfg, seed, key, trials = args
    eps: list[float] = []
    xors: list[float] = []
    cis: list[float] = []
    packets = from_source = 0
    hist = np.zeros(cfg.n + 1, dtype=np.int64)
    for t in range(trials):
        m = run_session(cfg.with_overrides(seed=derive_seed(seed, *key, t)))
        eps.extend(m.overheads().tolist())
        xors.extend(m.xor_totals().tolist())
        cis.extend(m.continuity.values())
        packets += m.packets_received
        from_source += m.packets_from_source
        hist += m.degree_histogram
    return ArmResult(eps, xors, packets, from_source, cis, hist)


def mesh_tradeoff(
    n: int = 100,
    w_ratios: Sequence[float] = (0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0),
    reference_n: Sequence[int] = (100, 75, 50, 35, 25),
    peers: int = 100,
    trials: int = 20,
    generations: int = 10,
    seed: int = 0,
    base: SimConfig = SimConfig(),
    jobs: int = 1,
) -> Dataset:
    """Overhead against decoding cost for band codes and for reference NC with smaller generations.

    ``xor_ratio`` divides the XOR-per-Mbit cost of the band arm at W = N by
    the cost of each row; overhead and XOR statistics pool every decoded
    (peer, generation) pair over all trials.
    """
    if trials < 1:
        raise ParameterError("need at least one trial")
    exp = _EXP_KEYS["mesh-tradeoff"]
    common = dict(peer_count=peers, generations=generations)
    arms: list[tuple[str, int, int, SimConfig]] = []
    for r in w_ratios:
        w = window_for(n, r)
        arms.append(("band", n, w, base.with_overrides(scheme="band", n=n, w=w, **common)))
    for nr in reference_n:
        arms.append(("reference", nr, nr, base.with_overrides(scheme="reference", n=nr, w=None, **common)))
    tasks = [(cfg, seed, (exp, i), trials) for i, (_, _, _, cfg) in enumerate(arms)]
    results = _pmap(_session_trials, tasks, jobs)
    baseline = None
    for (scheme, an, w, cfg), res in zip(arms, results):
        if scheme == "band" and w == an == n:
            baseline = xors_per_megabit(an, w, cfg.symbol_size, _mean(res.xors))
    rows = []
    for (scheme, an, w, cfg), res in zip(arms, results):
        per_mbit = xors_per_megabit(an, w, cfg.symbol_size, _mean(res.xors)) if res.xors else math.nan
        rows.append([
            scheme, an, w, w / an, _mean(res.overheads), ci95(res.overheads), _mean(res.xors), ci95(res.xors),
            per_mbit, baseline / per_mbit if baseline and per_mbit else math.nan,
            res.source_fraction, _mean(res.continuity), len(res.overheads), res.packets,
        ])
    return Dataset(
        "mesh-tradeoff",
        ["arm", "N", "W", "w_ratio", "overhead_mean", "overhead_ci95", "xor_mean", "xor_ci95",
         "xor_per_mbit", "xor_ratio", "source_fraction", "mean_ci", "decoded", "packets"],
        rows,
        {"seed": seed, "config": base.to_dict(),
         "params": {"n": n, "w_ratios": list(w_ratios), "reference_n": list(reference_n), "peers": peers,
                    "trials": trials, "generations": generations}},
    )


def complexity_check(
    n_list: Sequence[int] = (50, 100, 200),
    w_ratios: Sequence[float] = (0.2, 0.4, 0.6, 0.8, 1.0),
    trials: int = 20,
    seed: int = 0,
    base: SimConfig = SimConfig(),
    mode: str = "direct",
    peers: int = 20,
    generations: int = 3,
    reference_sources: Sequence[str] = ("binomial", "rsd"),
    jobs: int = 1,
) -> Dataset:
    """Measured decoding XORs against the closed-form prediction.

    ``mode="direct"`` feeds source packets straight to a decoder;
    ``mode="mesh"`` measures peers of a small mesh session.  The reference
    arm always runs in a mesh because its claim concerns recombined traffic.
    """
    if mode not in ("direct", "mesh"):
        raise ParameterError(f"mode must be 'direct' or 'mesh', got {mode!r}")
    if trials < 2:
        raise ParameterError("need at least 2 trials for a confidence interval")
    exp = _EXP_KEYS["complexity-check"]
    arms: list[tuple[str, str, int, int]] = []
    for n in n_list:
        for r in w_ratios:
            arms.append(("band", "binomial", n, window_for(n, r)))
        for src in reference_sources:
            arms.append(("reference", src, n, n))
    direct_tasks = []
    mesh_tasks = []
    for i, (scheme, src, n, w) in enumerate(arms):
        if scheme == "band" and mode == "direct":
            direct_tasks.append((i, (seed, (exp, i), n, w, trials, base.swap, "band", None)))
        else:
            cfg = base.with_overrides(scheme=scheme, source_degree=src, n=n, w=w if scheme == "band" else None,
                                      peer_count=peers, generations=generations)
            mesh_tasks.append((i, (cfg, seed, (exp, i), trials)))
    measured: dict[int, list[float]] = {}
    for (i, _), res in zip(direct_tasks, _pmap(_direct_point, [t for _, t in direct_tasks], jobs)):
        measured[i] = [x for _, x in res]
    for (i, _), res in zip(mesh_tasks, _pmap(_session_trials, [t for _, t in mesh_tasks], jobs)):
        measured[i] = res.xors
    rows = []
    for i, (scheme, src, n, w) in enumerate(arms):
        pred = predict(n, w)
        xs = measured[i]
        mean = _mean(xs)
        rows.append([
            scheme, src, n, w, pred.cd_tri, pred.cd_tri_summed, pred.cd_diag, pred.cd_total,
            mean, ci95(xs), (mean - pred.cd_total) / pred.cd_total, len(xs),
        ])
    return Dataset(
        "complexity-check",
        ["arm", "source", "N", "W", "cd_tri", "cd_tri_summed", "cd_diag", "cd_total",
         "measured_mean", "measured_ci95", "rel_error", "samples"],
        rows,
        {"seed": seed, "config": base.to_dict(),
         "params": {"n": list(n_list), "w_ratios": list(w_ratios), "trials": trials, "mode": mode,
                    "peers": peers, "generations": generations, "reference_sources": list(reference_sources)}},
    )


def degree_preservation(
    n: int = 100,
    w_ratios: Sequence[float] = (0.2, 0.4, 0.6),
    peers: int = 100,
    generations: int = 10,
    trials: int = 1,
    seed: int = 0,
    base: SimConfig = SimConfig(),
    direct: bool = False,
    samples: int = 100_000,
    jobs: int = 1,
) -> Dataset:
    """Received-degree histograms of the band arm against Binomial(W, 1/2).

    With ``direct=True`` the histogram is taken straight from the source
    encoder (``samples`` draws) instead of from a mesh session.
    """
    exp = _EXP_KEYS["degree-preservation"]
    windows = [window_for(n, r) for r in w_ratios]
    hists: list[np.ndarray] = []
    if direct:
        for i, w in enumerate(windows):
            rng = make_rng(seed, exp, i)
            h = np.zeros(n + 1, dtype=np.int64)
            for _ in range(samples):
                h[band_coefficients(n, w, rng)[1].bit_count()] += 1
            hists.append(h)
    else:
        tasks = [
            (base.with_overrides(scheme="band", n=n, w=w, peer_count=peers, generations=generations),
             seed, (exp, i), trials)
            for i, w in enumerate(windows)
        ]
        hists = [res.histogram for res in _pmap(_session_trials, tasks, jobs)]
    rows = []
    tv: dict[str, float] = {}
    packets: dict[str, int] = {}
    for r, w, h in zip(w_ratios, windows, hists):
        if h[w + 1:].any():
            raise BandCodesError(f"received a packet of degree above W={w}")
        h = h[: w + 1]
        total = int(h.sum())
        ref = binomial(w).pmf
        tv[str(w)] = tv_distance(h / total, ref) if total else math.nan
        packets[str(w)] = total
        for d in range(w + 1):
            rows.append([r, w, d, int(h[d]), float(h[d] / total) if total else "", float(ref[d])])
    return Dataset(
        "degree-preservation",
        ["w_ratio", "W", "degree", "count", "empirical_p", "binomial_p"],
        rows,
        {"seed": seed, "config": base.to_dict(), "tv": tv, "packets": packets,
         "params": {"n": n, "w_ratios": list(w_ratios), "peers": peers, "generations": generations,
                    "trials": trials, "direct": direct, "samples": samples}},
    )


def ci_study(
    bs_rates: Sequence[float] = (4.0, 2.0, 1.5, 1.2, 1.1, 1.05, 1.0, 0.9),
    tb_values: Sequence[float] = (10.0, 5.0, 2.0, 1.0),
    loss_values: Sequence[float] = (0.0,),
    peers: int = 30,
    generations: int = 10,
    trials: int = 3,
    seed: int = 0,
    base: SimConfig = SimConfig(),
    jobs: int = 1,
) -> Dataset:
    """Continuity index while the source bandwidth, buffering time and loss vary.

    ``bs_rate`` is the source bandwidth in units of one generation's worth
    of packets per generation interval, so below 1 the source cannot even
    emit N packets per generation.  All points of one trial index share a
    seed, so the sweep is paired.
    """
    exp = _EXP_KEYS["ci-study"]
    common = base.with_overrides(peer_count=peers, generations=generations)
    unit = common.n * common.packet_bits / common.generation_duration
    points = [(b, tb, loss) for loss in loss_values for tb in tb_values for b in bs_rates]
    tasks = [
        (common.with_overrides(source_bandwidth=b * unit, buffering_time=tb, loss=loss), seed, (exp,), trials)
        for b, tb, loss in points
    ]
    rows = []
    for (b, tb, loss), res, (cfg, *_) in zip(points, _pmap(_session_trials, tasks, jobs), tasks):
        rows.append([b, cfg.source_bandwidth, tb, loss, _mean(res.continuity), ci95(res.continuity),
                     _mean(res.overheads), trials])
    return Dataset(
        "ci-study",
        ["bs_rate", "source_bandwidth", "buffering_time", "loss", "mean_ci", "ci_ci95", "overhead_mean", "trials"],
        rows,
        {"seed": seed, "config": base.to_dict(), "note": CI_NOTE,
         "params": {"bs_rates": list(bs_rates), "tb_values": list(tb_values), "loss_values": list(loss_values),
                    "peers": peers, "generations": generations, "trials": trials}},
    )


# command line


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        _fail("UsageError", message)


def _fail(kind: str, message: str, code: int = 2) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}) + "\n")
    raise SystemExit(code)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="root seed (default 0)")
    common.add_argument("--out", type=Path, help="CSV output path (default stdout)")
    common.add_argument("--trials", type=int, help="trials per point")
    common.add_argument("--config", type=Path, help="session config file (JSON or key = value lines)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (default 1)")
    common.add_argument("--summary", type=Path, help="also write the JSON header and metadata here")

    parser = _Parser(prog="bandcodes", description="Regenerate band-code datasets as CSV.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("degree-evolution", parents=[common], help="degree iterates vs Monte Carlo")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--source", choices=("rsd", "binomial"), default="rsd")
    p.add_argument("--rounds", default="0,2,4,inf", help="comma list; 'inf' for the limit")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("e2e-tradeoff", parents=[common], help="direct delivery overhead and XORs")
    p.add_argument("--n", type=_ints, default=[100, 200])
    p.add_argument("--w-ratios", type=_floats, default=list(DEFAULT_W_RATIOS))

    p = sub.add_parser("mesh-tradeoff", parents=[common], help="mesh overhead vs decoding cost")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--w-ratios", type=_floats, default=[0.2, 0.25, 0.3, 0.4, 0.5, 0.6, 0.8, 1.0])
    p.add_argument("--reference-n", type=_ints, default=[100, 75, 50, 35, 25])
    p.add_argument("--peers", type=int, default=100)
    p.add_argument("--generations", type=int, default=10)

    p = sub.add_parser("complexity-check", parents=[common], help="measured vs predicted XORs")
    p.add_argument("--n", type=_ints, default=[50, 100, 200])
    p.add_argument("--w-ratios", type=_floats, default=[0.2, 0.4, 0.6, 0.8, 1.0])
    p.add_argument("--mode", choices=("direct", "mesh"), default="direct")
    p.add_argument("--peers", type=int, default=20)
    p.add_argument("--generations", type=int, default=3)

    p = sub.add_parser("degree-preservation", parents=[common], help="received degrees vs Binomial(W, 1/2)")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--w-ratios", type=_floats, default=[0.2, 0.4, 0.6])
    p.add_argument("--peers", type=int, default=100)
    p.add_argument("--generations", type=int, default=10)
    p.add_argument("--direct", action="store_true", help="histogram the source encoder only")
    p.add_argument("--samples", type=int, default=100_000)

    p = sub.add_parser("ci-study", parents=[common], help="continuity index sensitivity sweep")
    p.add_argument("--bs-rates", type=_floats, default=[4.0, 2.0, 1.5, 1.2, 1.1, 1.05, 1.0, 0.9],
                   help="source bandwidth in generations per generation interval")
    p.add_argument("--tb-values", type=_floats, default=[10.0, 5.0, 2.0, 1.0])
    p.add_argument("--loss-values", type=_floats, default=[0.0])
    p.add_argument("--peers", type=int, default=30)
    p.add_argument("--generations", type=int, default=10)
    return parser


def run_command(args: argparse.Namespace) -> Dataset:
    base = SimConfig.from_file(args.config) if args.config else SimConfig()
    seed, jobs, trials = args.seed, args.jobs, args.trials
    cmd = args.command
    if cmd == "degree-evolution":
        return degree_evolution(args.n, args.source, parse_rounds(args.rounds), args.samples, seed, base)
    if cmd == "e2e-tradeoff":
        return e2e_tradeoff(args.n, args.w_ratios, trials or 200, seed, base, jobs)
    if cmd == "mesh-tradeoff":
        return mesh_tradeoff(args.n, args.w_ratios, args.reference_n, args.peers, trials or 20,
                             args.generations, seed, base, jobs)
    if cmd == "complexity-check":
        return complexity_check(args.n, args.w_ratios, trials or 20, seed, base, args.mode, args.peers,
                                args.generations, jobs=jobs)
    if cmd == "degree-preservation":
        return degree_preservation(args.n, args.w_ratios, args.peers, args.generations, trials or 1, seed,
                                   base, args.direct, args.samples, jobs)
    return ci_study(args.bs_rates, args.tb_values, args.loss_values, args.peers, args.generations,
                    trials or 3, seed, base, jobs)


def main(argv: Optional[Iterable[str]] = None) -> int:
    args = build_parser().parse_args(None if argv is None else list(argv))
    if args.trials is not None and args.trials < 1:
        _fail("ParameterError", "--trials must be >= 1")
    if args.jobs < 1:
        _fail("ParameterError", "--jobs must be >= 1")
    try:
        data = run_command(args)
    except (BandCodesError, ValueError, OSError) as exc:
        _fail(type(exc).__name__, str(exc))
    text = data.to_csv()
    if args.out:
        args.out.write_text(text)
    else:
        sys.stdout.write(text)
    if args.summary:
        args.summary.write_text(json.dumps(data.header(), indent=2, sort_keys=True, default=_json_default) + "\n")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
