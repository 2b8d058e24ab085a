#!/usr/bin/env python3
"""HOSI/1 evaluator: Ishigami function on [0,1]^3 (inputs mapped to [-pi, pi])."""
import math
import sys

sys.stdin.readline()
for line in sys.stdin:
    x = [math.pi * (2.0 * float(t) - 1.0) for t in line.split()]
    y = math.sin(x[0]) + 7.0 * math.sin(x[1]) ** 2 + 0.1 * x[2] ** 4 * math.sin(x[0])
    print(repr(y), flush=True)
