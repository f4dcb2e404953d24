#!/usr/bin/env python3
"""Writes metric_pairs.json: 50 handcrafted answer / supporting-fact pairs.

Each record holds a predicted and a gold answer plus predicted and gold
supporting-fact sets. "expect" pins the hand-derived scores where a case was
worked out on paper; the remaining records are checked against the oracle only.
Usage: make_metric_pairs.py [output_path]
"""
import json
import sys

A, B, C, D = ["Winner", 0], ["2014 S/S", 0], ["Winner", 1], ["Flinders University", 0]

ANSWERS = [
    ("YG Entertainment", "YG Entertainment"),
    ("Entertainment", "YG Entertainment"),
    ("Mumbai", "Chennai"),
    ("YG Entertainment.", "yg entertainment"),
    ("The Five Obstructions", "Five Obstructions"),
    ("yes", "yes"),
    ("yes", "no"),
    ("no", "No."),
    ("yes", "yes it is"),
    ("", ""),
    ("", "Mumbai"),
    ("Mumbai", ""),
    ("a a a", "a"),
    ("New York New York", "New York"),
    ("the the city", "city"),
    ("Tata Consultancy Services", "Tata Consultancy"),
    ("Flinders University in Adelaide", "Flinders University"),
    ("1966", "1966"),
    ("1966.", "in 1966"),
    ("Kristin Moore Gebbie", "Kristine Moore Gebbie"),
    ("South Korean boy group", "boy group"),
    ("an Estonian band", "Estonian band"),
    ("O'Brien", "OBrien"),
    ("rock-and-roll", "rock and roll"),
    ("noanswer", "noanswer"),
]

SUPPORT = [
    ([A, B], [A, B]),
    ([A, B, C], [A, B]),
    ([D], [A, B]),
    ([], []),
    ([A], [A, B]),
    ([A, B], []),
    ([], [A]),
    ([A, C, D], [A, B, C, D]),
]

# Worked by hand: (answer EM, F1), (sp EM, F1), (joint EM, F1).
HAND = [
    ("YG Entertainment", "YG Entertainment", [A, B], [A, B], {"answer": [1, 1.0], "sp": [1, 1.0], "joint": [1, 1.0]}),
    # answer P=1 R=1/2; sp P=2/3 R=1; joint P=2/3 R=1/2 -> 4/7
    ("Entertainment", "YG Entertainment", [A, B, C], [A, B],
     {"answer": [0, 2 / 3], "sp": [0, 0.8], "joint": [0, 4 / 7]}),
    ("Mumbai", "Chennai", [D], [A, B], {"answer": [0, 0.0], "sp": [0, 0.0], "joint": [0, 0.0]}),
    ("YG Entertainment", "YG Entertainment", [A, B, C], [A, B],
     {"answer": [1, 1.0], "sp": [0, 0.8], "joint": [0, 0.8]}),
    ("YG Entertainment.", "yg entertainment", [], [], {"answer": [1, 1.0], "sp": [1, 1.0], "joint": [1, 1.0]}),
]


def main():
    records = [{"pred": p, "gold": g, "pred_sp": ps, "gold_sp": gs, "expect": e} for p, g, ps, gs, e in HAND]
    i = 0
    while len(records) < 50:
        pred, gold = ANSWERS[i % len(ANSWERS)]
        psp, gsp = SUPPORT[(i + i // len(ANSWERS)) % len(SUPPORT)]
        records.append({"pred": pred, "gold": gold, "pred_sp": psp, "gold_sp": gsp})
        i += 1
    path = sys.argv[1] if len(sys.argv) > 1 else "metric_pairs.json"
    with open(path, "w", encoding="utf-8") as f:
        json.dump(records, f, indent=1)
        f.write("\n")


if __name__ == "__main__":
    main()
