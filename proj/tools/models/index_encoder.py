#!/usr/bin/env python3
"""HOSI/1 evaluator: returns k + x_1 for the k-th point of the session
(0-based), so a caller can check both order and count."""
import sys

sys.stdin.readline()
out = sys.stdout
for k, line in enumerate(sys.stdin):
    out.write(repr(k + float(line.split()[0])) + "\n")
    out.flush()
