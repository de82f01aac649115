#!/usr/bin/env python3
"""Exits immediately after the first request without answering."""

import sys

sys.stdin.readline()
sys.exit(3)
