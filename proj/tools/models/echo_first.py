#!/usr/bin/env python3
"""HOSI/1 evaluator: returns the first coordinate of each point."""
import sys

header = sys.stdin.readline()
if not header.startswith("HOSI/1"):
    sys.exit("expected HOSI/1 handshake")
for line in sys.stdin:
    print(line.split()[0], flush=True)
