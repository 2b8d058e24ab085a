#!/usr/bin/env python3
"""HOSI/1 evaluator: echoes x_1, but answers 'nan' on line N (argv[1], 1-based)."""
import sys

bad = int(sys.argv[1]) if len(sys.argv) > 1 else 1
sys.stdin.readline()
for k, line in enumerate(sys.stdin, start=1):
    print("nan" if k == bad else line.split()[0], flush=True)
