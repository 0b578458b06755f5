from __future__ import annotations

import random

from repotailor.javalex import token_texts
from repotailor.masking import (
    BLOCK,
    ISOLATED_LINE,
    SENTINEL,
    APACHE_MASK_DISTRIBUTION,
    MaskLengthDistribution,
    Provenance,
    generate_generic,
    mask,
    segment,
)

from conftest import method_of, random_method

RUNNING_EXAMPLE = """class C {
    void build(int a, int b) {
        int t = 0;
        t += a;
        t += b;

        t *= 2;
        t -= 1;
        int u = t;
        int v = u;
        int w = v;
        int x = w;
        int y = x;
        result = a + b;
    }
}"""


def test_running_example_segmentation():
    m = method_of(RUNNING_EXAMPLE)
    segments = segment([4, 5, 6, 7, 8, 14], m)
    assert [(s.kind, s.line_numbers) for s in segments] == [
        (BLOCK, (4, 5, 6, 7)),
        (BLOCK, (8,)),
        (ISOLATED_LINE, (14,)),
    ]
    assert segments[0].counted_line_count == 3


def test_single_line_is_isolated():
    m = method_of(RUNNING_EXAMPLE)
    segments = segment([10], m)
    assert [(s.kind, s.line_numbers) for s in segments] == [(ISOLATED_LINE, (10,))]


def test_six_contiguous_counted_lines_split_three_three():
    m = method_of(RUNNING_EXAMPLE)
    segments = segment([8, 9, 10, 11, 12, 13], m)
    assert [s.line_numbers for s in segments] == [(8, 9, 10), (11, 12, 13)]
    assert all(s.counted_line_count == 3 for s in segments)


def test_segments_partition_input_lines():
    rng = random.Random(3)
    for _ in range(200):
        m = random_method(rng)
        body_lines = list(range(m.start_line + 1, m.end_line))
        if not body_lines:
            continue
        added = sorted(rng.sample(body_lines, rng.randint(1, len(body_lines))))
        segments = segment(added, m)
        covered = [line for s in segments for line in s.line_numbers]
        assert sorted(covered) == added
        assert len(set(covered)) == len(covered)


class FixedLow(random.Random):
    """rng whose randint always returns the lower bound."""

    def randint(self, a, b):  # noqa: A003 - mirrors random.Random
        return a


class FixedHigh(random.Random):
    def randint(self, a, b):
        return b


def test_mask_interval_collapses_at_n4():
    src = "class C {\n    void f() {\n        int q = 1;\n        a = b;\n    }\n}"
    m = method_of(src)
    # line 4 "a = b;" has 4 tokens
    seg = segment([4], m)[0]
    for seed in range(200):
        inst = mask(seg, m, random.Random(seed))
        assert inst is not None
        assert inst.n == 3
        assert inst.N == 4


def test_mask_returns_none_when_too_small():
    src = "class C {\n    void f() {\n        int q = 1;\n        a);\n    }\n}"
    m = method_of(src)
    seg = segment([4], m)[0]  # 3 tokens -> no legal n
    assert mask(seg, m, random.Random(0)) is None


def test_mask_bounds_uniform_over_3_to_50():
    body = "        long total = " + " + ".join(f"f{i}" for i in range(29)) + ";"
    src = "class C {\n    void f() {\n" + body + "\n    }\n}"
    m = method_of(src)
    seg = segment([3], m)[0]
    toks = [t for t in m.tokens if t.line == 3]
    assert len(toks) == 61  # N-1 = 60 caps the draw at 50
    rng = random.Random(42)
    seen = set()
    for _ in range(10_000):
        inst = mask(seg, m, rng)
        seen.add(inst.n)
        assert 3 <= inst.n <= 50
    assert seen == set(range(3, 51))


def test_mask_listing_example():
    src = "class C {\n    void f() {\n        int p = 1;\n        result = a + b;\n    }\n}"
    m = method_of(src)
    seg = segment([4], m)[0]
    inst = mask(seg, m, FixedHigh())  # N=6 -> n=5 masks everything after 'result'
    assert inst.n == 5
    inst4 = None
    for seed in range(500):
        candidate = mask(seg, m, random.Random(seed))
        if candidate.n == 4:
            inst4 = candidate
            break
    assert inst4 is not None
    assert inst4.target == "a + b;"
    # method text starts at the declaration line; file line 4 is text line 3
    assert inst4.context.split("\n")[2] == f"        result = {SENTINEL}"


def test_context_reconstruction_token_exact():
    rng = random.Random(8)
    for _ in range(300):
        m = random_method(rng)
        body_lines = list(range(m.start_line + 1, m.end_line))
        added = sorted(rng.sample(body_lines, min(len(body_lines), rng.randint(1, 4))))
        for seg in segment(added, m):
            inst = mask(seg, m, rng)
            if inst is None:
                continue
            assert inst.context.count(SENTINEL) == 1
            rebuilt = inst.context.replace(SENTINEL, inst.target, 1)
            assert rebuilt == m.text
            assert token_texts(rebuilt) == [t.text for t in m.tokens]
            seg_lines = set(seg.line_numbers)
            seg_token_texts = [t.text for t in m.tokens if t.line in seg_lines]
            assert token_texts(inst.target) == seg_token_texts[-inst.n :]


def test_mask_determinism_and_provenance_in_id():
    m = method_of(RUNNING_EXAMPLE)
    seg = segment([14], m)[0]
    prov = Provenance("repo", "a" * 40, "dev", 123, "C.java")
    one = mask(seg, m, random.Random(5), prov)
    two = mask(seg, m, random.Random(5), prov)
    assert one == two
    other = mask(seg, m, random.Random(5), Provenance("repo2", "a" * 40, "dev", 123, "C.java"))
    assert other.instance_id != one.instance_id


def test_generic_single_maskable_line():
    src = "class C {\n    void f() {\n        int total = a + b + c;\n    }\n}"
    m = method_of(src)
    instances = generate_generic(m, APACHE_MASK_DISTRIBUTION, random.Random(5))
    assert len(instances) == 1


def test_generic_degenerate_distribution_pins_n():
    dist = MaskLengthDistribution(mean=3, median=3, min=3, max=3)
    rng = random.Random(1)
    for _ in range(50):
        m = random_method(rng, body_lines=8)
        for inst in generate_generic(m, dist, rng):
            assert inst.n == 3


def test_generic_respects_bounds_and_cap():
    rng = random.Random(2)
    for _ in range(200):
        m = random_method(rng, body_lines=10)
        instances = generate_generic(m, APACHE_MASK_DISTRIBUTION, rng)
        assert len(instances) <= 3
        for inst in instances:
            assert 3 <= inst.n <= min(50, inst.N - 1)
            assert inst.context.count(SENTINEL) == 1


def test_generic_determinism():
    rng_a, rng_b = random.Random(77), random.Random(77)
    m = method_of(RUNNING_EXAMPLE)
    a = generate_generic(m, APACHE_MASK_DISTRIBUTION, rng_a)
    b = generate_generic(m, APACHE_MASK_DISTRIBUTION, rng_b)
    assert a == b
