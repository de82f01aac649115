#!/usr/bin/env python3
"""Protocol-conformant mock objective: score = -(m - 5)^2, clean shutdown."""

import json
import sys

for line in sys.stdin:
    line = line.strip()
    if not line:
        continue
    msg = json.loads(line)
    if msg.get("cmd") == "shutdown":
        sys.exit(0)
    m = msg["params"]["m"]
    print(json.dumps({"id": msg["id"], "score": float(-((m - 5) ** 2))}), flush=True)
