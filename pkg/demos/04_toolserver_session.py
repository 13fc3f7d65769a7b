"""
Driving memory over the JSON-lines tool server
==============================================

Agent frameworks talk to the controller through a subprocess: one JSON
request per line in, one JSON response per line out, in order.  Bad
input gets an error response rather than a crash.
"""

import json
import subprocess
import sys
import tempfile

root = tempfile.mkdtemp()
requests = [
    {"id": 1, "op": "init", "args": {"goal": "Build a CLI", "todo": ["scaffold"]}},
    {"id": 2, "op": "ota", "args": {"observation": "tests fail", "thought": "missing import", "action": "fix"}},
    {"id": 3, "op": "commit", "args": {"message": "fix import", "contribution": "Tests pass again."}},
    {"id": 4, "op": "merge", "args": {"target": "ghost", "synthesis": "?"}},
    {"id": 5, "op": "context", "args": {"branch": "main"}},
]
lines = [json.dumps(r) for r in requests]
lines.insert(3, "not json")

proc = subprocess.run(
    [sys.executable, "-m", "gcc_memory.toolserver", "--root", root],
    input="\n".join(lines) + "\n",
    capture_output=True,
    text=True,
    check=True,
)
for line in proc.stdout.splitlines():
    print(line)
