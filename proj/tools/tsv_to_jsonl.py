#!/usr/bin/env python3
"""Convert a tab-separated file of pre-parsed LLF columns into corpus records.

Columns: id, premise LLF (several premises separated by " ||| "), hypothesis
LLF, gold label, and optionally the raw premise and hypothesis sentences.
SICK-style upper-case labels are accepted. A header row whose first cell is
"id" or "pair_ID" is skipped.
"""

import argparse
import csv
import json
import sys

LABELS = {"entailment", "contradiction", "neutral"}


def convert(rows):
    for n, row in enumerate(rows, 1):
        if not row or row[0].startswith("#"):
            continue
        if n == 1 and row[0] in ("id", "pair_ID"):
            continue
        if len(row) < 4:
            raise ValueError(f"line {n}: expected at least 4 columns, got {len(row)}")
        gold = row[3].strip().lower()
        if gold not in LABELS:
            raise ValueError(f"line {n}: unknown label {row[3]!r}")
        rec = {
            "id": row[0].strip(),
            "premises": [p.strip() for p in row[1].split("|||")],
            "hypothesis": row[2].strip(),
            "gold": gold,
        }
        if len(row) >= 6:
            rec["text"] = [row[4], row[5]]
        yield rec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("input", help="TSV file, or - for stdin")
    ap.add_argument("-o", "--output", help="output file (default stdout)")
    args = ap.parse_args()
    src = sys.stdin if args.input == "-" else open(args.input, encoding="utf-8", newline="")
    out = open(args.output, "w", encoding="utf-8") if args.output else sys.stdout
    try:
        for rec in convert(csv.reader(src, delimiter="\t")):
            out.write(json.dumps(rec, ensure_ascii=False) + "\n")
    except ValueError as e:
        print(json.dumps({"error": "corpus", "message": str(e)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
