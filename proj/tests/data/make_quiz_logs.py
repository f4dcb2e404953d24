#!/usr/bin/env python3
"""Writes group_a.jsonl and group_b.jsonl: eight 8-item sessions per group.

The logs are synthetic. They are built so that the pooled accuracy and the
mean session time equal the published group averages (42/64 correct over
7848 s total for group A, 55/64 over 4344 s for group B), which makes them a
formatting fixture for the summary table.
Usage: make_quiz_logs.py [output_dir]
"""
import json
import os
import random
import sys

KEYS = [2, 0, 3, 1, 1, 3, 0, 2]


def split(total, parts, rng, low):
    cuts = sorted(rng.sample(range(1, total - parts * low), parts - 1))
    sizes = [b - a for a, b in zip([0] + cuts, cuts + [total - parts * low])]
    return [s + low for s in sizes]


def group(name, correct_total, time_total, seed):
    rng = random.Random(seed)
    correct = [True] * correct_total + [False] * (64 - correct_total)
    rng.shuffle(correct)
    session_times = split(time_total, 8, rng, 300 if name == "A" else 200)
    lines = []
    for v in range(8):
        lines.append(json.dumps({"format": "hopqg-quiz-session", "group": name, "items": 8, "complete": True},
                                separators=(",", ":")))
        item_times = split(session_times[v], 8, rng, 10)
        t = 0.0
        for i in range(8):
            ok = correct[v * 8 + i]
            choice = KEYS[i] if ok else (KEYS[i] + 1 + rng.randrange(3)) % 4
            shown = t
            t += item_times[i]
            lines.append(json.dumps({"id": f"q{i + 1}", "shown_at": shown, "answered_at": t, "choice": choice,
                                     "correct": ok}, separators=(",", ":")))
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    out = sys.argv[1] if len(sys.argv) > 1 else "."
    with open(os.path.join(out, "group_a.jsonl"), "w") as f:
        f.write(group("A", 42, 7848, 11))
    with open(os.path.join(out, "group_b.jsonl"), "w") as f:
        f.write(group("B", 55, 4344, 12))
