#!/usr/bin/env python3
"""Walk through the structural-context demo on one SenML record.

The record's temperature (35.2) is just outside [0.7, 35.1], but sibling
measurements (12, 20) are inside it, so a flat string+value filter accepts
the record while the scope-aware one rejects it.
"""

from rawfilter import FilterConfig, Mode, PredicateConfig, accepts, compile_filter, parse_query
from rawfilter.oracle import eval_exact, parse_json

RECORD = (
    b'{"e":['
    b'{"v":"35.2","u":"far","n":"temperature"},'
    b'{"v":"12","u":"per","n":"humidity"},'
    b'{"v":"713","u":"per","n":"light"},'
    b'{"v":"305.01","u":"per","n":"dust"},'
    b'{"v":"20","u":"per","n":"airquality_raw"}'
    b'],"bt":1422748800000}'
)


def main() -> None:
    query = parse_query('(0.7 <= "temperature" <= 35.1)')
    flat = compile_filter(query, FilterConfig((PredicateConfig(Mode.FLAT, 1),)))
    scoped = compile_filter(query, FilterConfig((PredicateConfig(Mode.SCOPED, 1),)))

    print("record:", RECORD.decode())
    print("query: ", query.notation())
    print()
    print(f"exact match:     {eval_exact(query, parse_json(RECORD))}")
    print(f"flat   {flat.notation():<46} -> accept={accepts(flat, RECORD)}   (false positive)")
    print(f"scoped {scoped.notation():<46} -> accept={accepts(scoped, RECORD)}")
    print()

    true_match = RECORD.replace(b'"35.2"', b'"30.0"')
    print("with temperature 30.0 instead:")
    print(f"exact match:     {eval_exact(query, parse_json(true_match))}")
    print(f"flat   -> accept={accepts(flat, true_match)}")
    print(f"scoped -> accept={accepts(scoped, true_match)}")


if __name__ == "__main__":
    main()
