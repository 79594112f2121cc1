#!/usr/bin/env python3
"""Regenerate every seed task's testbench.toml from plain integer arithmetic.

The expected values here never come from a netlist: they are the intended
behaviour written directly, so a reference design that disagrees fails.
"""
import itertools
import os
import random

HERE = os.path.dirname(os.path.abspath(__file__))


def bits(n, w):
    return [(n >> i) & 1 for i in range(w)]


def inline(d):
    return "{ " + ", ".join(f"{k} = {v}" for k, v in d.items()) + " }"


def write(task, rows, cycles=0):
    out = ["schema_version = 1", f"cycles = {cycles}", ""]
    for i, (ins, exp) in enumerate(rows):
        out.append("[[vector]]")
        if cycles:
            out.append(f"cycle = {i}")
        out.append(f"inputs = {inline(ins)}")
        out.append(f"expect = {inline(exp)}")
        out.append("")
    with open(os.path.join(HERE, task, "testbench.toml"), "w") as f:
        f.write("\n".join(out))


def exhaustive(task, names, widths, fn):
    rows = []
    for values in itertools.product(*[range(1 << w) for w in widths]):
        ins = dict(zip(names, values))
        rows.append((ins, fn(**ins)))
    write(task, rows)


exhaustive("xnor2", ["a", "b"], [1, 1], lambda a, b: {"y": int(a == b)})
exhaustive("and3", ["a", "b", "c"], [1, 1, 1], lambda a, b, c: {"y": a * b * c})
exhaustive("inhibit_select", ["a", "inhibit"], [1, 1], lambda a, inhibit: {"y": a if not inhibit else 0})
exhaustive("mux2", ["a", "b", "sel"], [1, 1, 1], lambda a, b, sel: {"y": b if sel else a})
exhaustive(
    "full_adder",
    ["a", "b", "cin"],
    [1, 1, 1],
    lambda a, b, cin: {"sum": (a + b + cin) % 2, "cout": (a + b + cin) // 2},
)
exhaustive("decoder_2to4", ["a"], [2], lambda a: {"y": 1 << a})
exhaustive("mux4", ["d", "s"], [4, 2], lambda d, s: {"y": (d >> s) & 1})
exhaustive(
    "ripple_adder4",
    ["a", "b", "cin"],
    [4, 4, 1],
    lambda a, b, cin: {"s": (a + b + cin) % 16, "cout": (a + b + cin) // 16},
)

# Overlapping "101" detector: z is high in the cycle whose input completes
# the pattern.
rng = random.Random(101)
stream = [1, 0, 1, 0, 1, 1, 0, 1] + [rng.randrange(2) for _ in range(24)]
rows = []
for t, x in enumerate(stream):
    z = int(t >= 2 and stream[t - 2:t + 1] == [1, 0, 1])
    rows.append(({"x": x}, {"z": z}))
write("seq_detector_101", rows, cycles=len(stream))

# Three-bit up counter with enable; q is observed before each clock edge.
rng = random.Random(3)
enables = [1] * 10 + [rng.randrange(2) for _ in range(14)]
rows, count = [], 0
for en in enables:
    rows.append(({"en": en}, {"q": count}))
    count = (count + en) % 8
write("counter3", rows, cycles=len(enables))
