#!/usr/bin/env python3
"""Throughput and scaling measurement for the streaming filter pipeline.

Generates SenML corpora at doubling sizes, times the chunked scan+filter
pipeline on each, and reports MB/s plus the wall-time doubling ratio
(ideal: 2.0).
"""

import argparse
import statistics
from decimal import Decimal

from rawfilter import FilterConfig, Mode, PredicateConfig, parse_query
from rawfilter.cli import _bench_once
from rawfilter.datagen import AttrSpec, GenSpec, generate_dataset


def corpus_of(mib: int, seed: int = 5) -> bytes:
    attrs = (
        AttrSpec("temperature", "decimal", Decimal(-20), Decimal(60), Decimal("0.7"), Decimal("35.1"), 0.6),
        AttrSpec("humidity", "int", Decimal(0), Decimal(150), Decimal(20), Decimal(69), 0.7),
        AttrSpec("light", "int", Decimal(0), Decimal(30000), Decimal(0), Decimal(5153), 0.5),
    )
    probe, _ = generate_dataset(GenSpec("senml", 500, attrs, seed))
    per_record = len(probe) / 500
    records = int(mib * 1024 * 1024 / per_record)
    corpus, _ = generate_dataset(GenSpec("senml", records, attrs, seed))
    return corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", default="8,16,32", help="corpus sizes in MiB")
    parser.add_argument("--repetitions", type=int, default=3)
    args = parser.parse_args()

    query = parse_query('(0.7 <= "temperature" <= 35.1) AND (20 <= "humidity" <= 69)')
    cfg = FilterConfig((PredicateConfig(Mode.SCOPED, 1), PredicateConfig(Mode.SCOPED, 1)))

    previous = None
    for mib in (int(s) for s in args.sizes.split(",")):
        corpus = corpus_of(mib)
        wall = statistics.median(_bench_once(corpus, query, cfg) for _ in range(args.repetitions))
        rate = len(corpus) / wall / 1e6
        ratio = f"  ratio vs previous: {wall / previous:.2f}" if previous else ""
        print(f"{mib:4d} MiB: {wall:7.2f} s  {rate:7.1f} MB/s{ratio}")
        previous = wall


if __name__ == "__main__":
    main()
