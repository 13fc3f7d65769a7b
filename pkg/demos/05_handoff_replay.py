"""
Handing work to a new session
=============================

Everything a session knows lives under ``.GCC/``.  The replay harness
proves it: a script runs once straight through, and once split in two
with a brand-new session for the second half.  Equal state digests mean
the second session lost nothing in the handoff.
"""

import random
import tempfile
from pathlib import Path

from gcc_memory import replay

script = replay.random_script(random.Random(2025), 30)
for i, step in enumerate(script.steps[:8]):
    print(i, step.op, step.args)
print("...")

work = Path(tempfile.mkdtemp())
full = replay.run_script(script, work / "single")
split = replay.run_split(script, 13, work / "resumed")
print("single run digest:", full.digest)
print("resumed digest:   ", split.digest)
print("identical:", full.digest == split.digest)

# scripts are plain JSON lines and can be saved next to a bug report
(work / "session.jsonl").write_text(script.dumps())
print(replay.load(work / "session.jsonl") == script)
