"""Command-line surface.

Subcommands: compile (query + config -> filter descriptor), run (filter a
stream, accepted records to stdout, stats JSON to stderr), eval (confusion
matrix and FPR against the exact oracle), explore (design-space sweep to
CSVs), gen (synthetic datasets with exact labels), bench (throughput).

Exit codes: 2 parse/config error, 3 I/O error, 4 false negative detected
(soundness failure), 5 design-space cap exceeded.
"""

from __future__ import annotations

import argparse
import io
import json
import statistics
import sys
import time
from pathlib import Path

from .batch import (
    CorpusIndex,
    build_scan_index,
    evaluate_config_batch,
    iter_chunk_indexes,
    primitive_fire_counts,
)
from .datagen import generate_dataset, parse_gen_spec
from .errors import CapExceededError, ConfigError, FalseNegativeError, QueryError
from .explorer import (
    CostModel,
    DEFAULT_COST_MODEL,
    ExplorerOptions,
    config_cost,
    config_notation,
    evaluate_config,
    explore,
    reports_to_csv,
    shared_range_dfa,
    string_cost,
)
from .filter import FilterConfig, Mode, parse_config, serialize_config
from .oracle import label_dataset
from .query import parse_query
from .strings import build_substring_set, resolve_block_len


def _read_text(path: str) -> str:
    return Path(path).read_text()


def _read_dataset(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _load_query_and_config(args) -> tuple:
    query_text = " ".join(_read_text(args.query).split())
    ast = parse_query(query_text)
    cfg = parse_config(_read_text(args.config), ast)
    return query_text, ast, cfg


def _cost_model(args) -> CostModel:
    if getattr(args, "cost_weights", None):
        return CostModel.from_file(args.cost_weights)
    return DEFAULT_COST_MODEL


# --- descriptor format -------------------------------------------------------


def render_descriptor(query_text: str, ast, cfg: FilterConfig, model: CostModel) -> str:
    lines = ["# rawfilter descriptor", f"query: {query_text}"]
    for cfg_line in serialize_config(ast, cfg).splitlines():
        lines.append(f"config: {cfg_line}")
    lines.append(f"notation: {config_notation(ast, cfg)}")
    lines.append(f"cost: {config_cost(ast, cfg, model):g}")
    for leaf, pc in zip(ast.leaves(), cfg.predicates):
        if pc.mode is Mode.OMIT:
            continue
        dfa = shared_range_dfa(leaf.bound)
        lines.append(
            f"primitive: {leaf.bound.notation()} dfa_states={dfa.state_count} "
            f"input_classes={dfa.input_classes}"
        )
        if pc.mode is not Mode.VALUE_ONLY:
            b = resolve_block_len(leaf.attr, pc.block)
            grams = sorted(build_substring_set(leaf.attr, b))
            gram_text = ",".join(g.decode("latin-1") for g in grams)
            lines.append(
                f'primitive: s{b}("{leaf.attr}") N={len(leaf.attr)} B={b} '
                f"grams={len(grams)} [{gram_text}] cost={string_cost(leaf.attr, b, model):g}"
            )
    return "\n".join(lines) + "\n"


def parse_descriptor(text: str) -> tuple:
    query_text = None
    config_lines = []
    for raw in text.splitlines():
        line = raw.strip()
        if line.startswith("query: "):
            query_text = line[len("query: "):]
        elif line.startswith("config: "):
            config_lines.append(line[len("config: "):])
    if query_text is None or not config_lines:
        raise ConfigError("descriptor needs 'query:' and 'config:' lines")
    ast = parse_query(query_text)
    cfg = parse_config("\n".join(config_lines) + "\n", ast)
    return ast, cfg


# --- commands ------------------------------------------------------------------


def cmd_compile(args) -> int:
    query_text, ast, cfg = _load_query_and_config(args)
    descriptor = render_descriptor(query_text, ast, cfg, _cost_model(args))
    if args.out:
        Path(args.out).write_text(descriptor)
    else:
        sys.stdout.write(descriptor)
    return 0


def _run_stream(ast, cfg, source, out, workers: int = 1, chunk_bytes: int = 1 << 22) -> dict:
    records_in = records_out = bytes_in = malformed = 0
    fires: dict[str, int] = {}
    started = time.perf_counter()
    if workers > 1:
        results = _parallel_accept(source.read(), ast, cfg, workers)
    else:
        results = _serial_accept(source, ast, cfg, chunk_bytes)
    for buffer, starts, ends, n_malformed, accepts, chunk_fires in results:
        records_in += len(starts)
        bytes_in += len(buffer)
        malformed += n_malformed
        for key, count in chunk_fires.items():
            fires[key] = fires.get(key, 0) + count
        for start, end, ok in zip(starts, ends, accepts):
            if ok:
                records_out += 1
                out.write(buffer[int(start):int(end)])
                out.write(b"\n")
    elapsed = max(time.perf_counter() - started, 1e-9)
    return {
        "records_in": records_in,
        "records_out": records_out,
        "bytes_in": bytes_in,
        "malformed": malformed,
        "accept_ratio": records_out / records_in if records_in else 0.0,
        "throughput_mb_s": round(bytes_in / elapsed / 1e6, 3),
        "wall_s": round(elapsed, 6),
        "fires": fires,
    }


def _serial_accept(source, ast, cfg, chunk_bytes):
    for index, buffer in iter_chunk_indexes(source, chunk_bytes):
        corpus = CorpusIndex(buffer, index)
        accepts = evaluate_config_batch(corpus, ast, cfg)
        yield (
            buffer,
            index.rec_starts,
            index.rec_ends,
            int(index.rec_malformed.sum()),
            accepts,
            primitive_fire_counts(corpus, ast, cfg),
        )


def _accept_slice(payload):
    data, query_text, config_text = payload
    ast = parse_query(query_text)
    cfg = parse_config(config_text, ast)
    corpus = CorpusIndex(data)
    accepts = evaluate_config_batch(corpus, ast, cfg)
    index = corpus.index
    return (
        index.rec_starts,
        index.rec_ends,
        int(index.rec_malformed.sum()),
        accepts,
        primitive_fire_counts(corpus, ast, cfg),
    )


def _parallel_accept(data, ast, cfg, workers):
    import multiprocessing

    index = build_scan_index(data)
    n = index.n_records
    if n == 0:
        return
    per = max(1, (n + workers - 1) // workers)
    groups = [(i, min(i + per, n)) for i in range(0, n, per)]
    query_text = ast.notation()
    config_text = serialize_config(ast, cfg)
    payloads = []
    for lo, hi in groups:
        start = int(index.rec_starts[lo])
        end = int(index.rec_ends[hi - 1])
        payloads.append((data[start:end], query_text, config_text))
    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=min(workers, len(payloads))) as pool:
        for payload, (starts, ends, n_malformed, accepts, fires) in zip(
            payloads, pool.map(_accept_slice, payloads)
        ):
            yield payload[0], starts, ends, n_malformed, accepts, fires


def cmd_run(args) -> int:
    ast, cfg = parse_descriptor(_read_text(args.filter))
    source = sys.stdin.buffer if args.dataset == "-" else open(args.dataset, "rb")
    try:
        stats = _run_stream(ast, cfg, source, sys.stdout.buffer, workers=args.workers)
    finally:
        if source is not sys.stdin.buffer:
            source.close()
    sys.stdout.buffer.flush()
    print(json.dumps(stats, sort_keys=True), file=sys.stderr)
    return 0


def cmd_eval(args) -> int:
    _, ast, cfg = _load_query_and_config(args)
    corpus = CorpusIndex(_read_dataset(args.dataset))
    labels = label_dataset(ast, corpus.records())
    report = evaluate_config(ast, cfg, corpus, labels, _cost_model(args))
    payload = {
        "config": report.notation,
        "records": report.total,
        "tp": report.tp,
        "fp": report.fp,
        "tn": report.tn,
        "fn": report.fn,
        "fpr": round(report.fpr, 6),
        "selectivity": round(labels.selectivity, 6),
        "selectivity_undefined": labels.empty,
        "malformed": labels.malformed_count,
        "cost": report.cost,
        "wall_s": round(report.wall_time, 6),
    }
    text = json.dumps(payload, sort_keys=True)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_explore(args) -> int:
    query_text = " ".join(_read_text(args.query).split())
    ast = parse_query(query_text)
    corpus = CorpusIndex(_read_dataset(args.dataset))
    modes = tuple(Mode(m) for m in args.modes.split(","))
    blocks = tuple(int(b) if b != "N" else "N" for b in args.blocks.split(","))
    options = ExplorerOptions(
        modes=modes, blocks=blocks, cap=args.cap, sample=args.sample, seed=args.seed
    )
    reports, front = explore(ast, corpus, options, _cost_model(args))
    out = Path(args.out)
    out.write_text(reports_to_csv(reports, include_timings=args.timings))
    pareto_path = Path(args.pareto_out) if args.pareto_out else out.with_name(out.stem + "_pareto.csv")
    pareto_path.write_text(reports_to_csv(front, include_timings=args.timings))
    print(
        json.dumps(
            {
                "configs": len(reports),
                "pareto_points": len(front),
                "reports_csv": str(out),
                "pareto_csv": str(pareto_path),
            },
            sort_keys=True,
        )
    )
    return 0


def cmd_gen(args) -> int:
    spec = parse_gen_spec(_read_text(args.spec))
    corpus, labels = generate_dataset(spec, args.seed)
    Path(args.out).write_bytes(corpus)
    labels_path = args.labels or args.out + ".labels"
    Path(labels_path).write_bytes(labels)
    print(
        json.dumps(
            {"records": spec.records, "bytes": len(corpus), "out": args.out, "labels": labels_path},
            sort_keys=True,
        )
    )
    return 0


def _bench_once(data: bytes, ast, cfg) -> float:
    stats = _run_stream(ast, cfg, io.BytesIO(data), io.BytesIO())
    return stats["wall_s"]


def cmd_bench(args) -> int:
    ast, cfg = parse_descriptor(_read_text(args.filter))
    data = _read_dataset(args.dataset)
    times = [_bench_once(data, ast, cfg) for _ in range(args.repetitions)]
    wall = statistics.median(times)
    result = {
        "bytes": len(data),
        "repetitions": args.repetitions,
        "median_s": round(wall, 4),
        "throughput_mb_s": round(len(data) / wall / 1e6, 2),
    }
    if args.scale_check:
        doubled = data + data
        wall2 = statistics.median([_bench_once(doubled, ast, cfg) for _ in range(args.repetitions)])
        ratio = wall2 / wall
        result["doubled_median_s"] = round(wall2, 4)
        result["scaling_ratio"] = round(ratio, 3)
        if len(data) >= 64 * 1024 * 1024:
            result["linear_scaling"] = bool(1.6 <= ratio <= 2.6)
        else:
            result["linear_scaling"] = None  # input too small to assert
    if args.workers_sweep:
        sweeps = {}
        for w in (1, 2, 4):
            stats = _run_stream(ast, cfg, io.BytesIO(data), io.BytesIO(), workers=w)
            sweeps[str(w)] = stats["throughput_mb_s"]
        result["workers_mb_s"] = sweeps
        rates = [sweeps[k] for k in ("1", "2", "4")]
        if not all(b >= a * 0.8 for a, b in zip(rates, rates[1:])):
            print("warning: throughput not non-decreasing across workers", file=sys.stderr)
    print(json.dumps(result, sort_keys=True))
    if args.scale_check and result.get("linear_scaling") is False:
        print("warning: scaling ratio outside [1.6, 2.6]", file=sys.stderr)
    return 0


# --- argument parsing --------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rawfilter", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compile", help="compile query + config into a filter descriptor")
    p.add_argument("--query", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.add_argument("--cost-weights")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("run", help="filter a dataset; accepted records to stdout")
    p.add_argument("--filter", required=True, help="descriptor from 'compile'")
    p.add_argument("--dataset", required=True, help="path or - for stdin")
    p.add_argument("--format", choices=("ndjson", "concat"), default="ndjson")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("eval", help="confusion matrix and FPR against the oracle")
    p.add_argument("--query", required=True)
    p.add_argument("--config", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out")
    p.add_argument("--cost-weights")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("explore", help="sweep the design space, write report CSVs")
    p.add_argument("--query", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", default="reports.csv")
    p.add_argument("--pareto-out")
    p.add_argument("--modes", default="OMIT,VALUE_ONLY,FLAT,SCOPED")
    p.add_argument("--blocks", default="1,2,N")
    p.add_argument("--cap", type=int, default=10**6)
    p.add_argument("--sample", type=int, default=None, help="evaluate on a seeded record subset")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timings", action="store_true", help="real wall_ms column (non-reproducible)")
    p.add_argument("--cost-weights")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("gen", help="generate a synthetic dataset with exact labels")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--labels")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="measure end-to-end throughput")
    p.add_argument("--filter", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--repetitions", type=int, default=3)
    p.add_argument("--scale-check", action="store_true")
    p.add_argument("--workers-sweep", action="store_true")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (QueryError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3
    except FalseNegativeError as exc:
        print(f"correctness failure: {exc}", file=sys.stderr)
        return 4
    except CapExceededError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
