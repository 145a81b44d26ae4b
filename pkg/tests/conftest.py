import json
import random

import pytest
from hypothesis import settings

settings.register_profile("suite", deadline=None, max_examples=60)
settings.load_profile("suite")

# Running-example record (SenML measurement list with a out-of-range
# temperature that a flat string+value filter wrongly accepts).
LISTING_RECORD = (
    b'{"e":['
    b'{"v":"35.2","u":"far","n":"temperature"},'
    b'{"v":"12","u":"per","n":"humidity"},'
    b'{"v":"713","u":"per","n":"light"},'
    b'{"v":"305.01","u":"per","n":"dust"},'
    b'{"v":"20","u":"per","n":"airquality_raw"}'
    b'],"bt":1422748800000}'
)


@pytest.fixture
def listing_record():
    return LISTING_RECORD


_TRICKY_STRINGS = [
    "plain",
    'with"quote',
    "back\\slash",
    "brace{inside}",
    "bracket[in]side",
    "comma,colon:",
    'mix\\"of[every{thing,}]',
    "",
    "tab\tnew\nline",
]


def random_json_value(rng: random.Random, depth: int = 0):
    roll = rng.random()
    if depth >= 3 or roll < 0.35:
        return rng.choice(
            [
                rng.randint(-(10**6), 10**9),
                round(rng.uniform(-1000, 5000), rng.randint(0, 3)),
                rng.choice(_TRICKY_STRINGS),
                str(round(rng.uniform(0, 100), 1)),
                True,
                False,
                None,
                2.1e3,
            ]
        )
    if roll < 0.6:
        return [random_json_value(rng, depth + 1) for _ in range(rng.randint(0, 4))]
    keys = ["n", "v", "u", "e", "temperature", "humidity", "k" + str(rng.randint(0, 9))]
    return {rng.choice(keys): random_json_value(rng, depth + 1) for _ in range(rng.randint(0, 4))}


def random_json_record(rng: random.Random) -> bytes:
    return json.dumps(random_json_value(rng, 0), ensure_ascii=True).encode()


def senml_record(rng: random.Random, names, lo=-50.0, hi=6000.0) -> bytes:
    parts = []
    for name in names:
        value = round(rng.uniform(lo, hi), rng.choice((0, 1, 2)))
        parts.append(f'{{"v":"{value}","u":"per","n":"{name}"}}')
    return f'{{"e":[{",".join(parts)}],"bt":{rng.randint(10**12, 2 * 10**12)}}}'.encode()


def flat_record(rng: random.Random, names, lo=-50.0, hi=6000.0) -> bytes:
    parts = [f'"{name}":{round(rng.uniform(lo, hi), rng.choice((0, 1, 2)))}' for name in names]
    return f'{{{",".join(parts)},"ts":{rng.randint(10**12, 2 * 10**12)}}}'.encode()


def stdlib_in_string_mask(text: str) -> list[bool]:
    """Independent string mask: stdlib scanstring finds each literal's end."""
    from json.decoder import scanstring

    mask = [False] * len(text)
    i = 0
    while i < len(text):
        if text[i] == '"':
            _, end = scanstring(text, i + 1)
            for j in range(i + 1, end):
                mask[j] = True
            i = end
        else:
            i += 1
    return mask
