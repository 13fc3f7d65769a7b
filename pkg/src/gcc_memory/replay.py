"""Deterministic replay of scripted sessions, and the handoff check.

A script file is JSON lines: a header, then one step per line::

    {"version": 1, "fresh": true, "clock": ["2025-01-01T00:00:00Z", ...]}
    {"op": "init", "args": {"goal": "g"}}
    {"op": "ota", "args": {"observation": "o"}, "expect": {"ok": true}}
    {"op": "merge", "args": {"target": "ghost"}, "expect": {"ok": false, "error_code": "UnknownBranch"}}

Each mutating step consumes the next clock value.  The run ends with a digest
of every file under ``.GCC/``.  :func:`handoff_check` runs a script once
straight through and once split in two, with a brand-new session for the
second half, and compares the digests.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path
from typing import Any, Iterable, Iterator

from .commands import MUTATING, OPS, Session
from .errors import ScriptError
from .model import FixedClock, format_ts, parse_ts
from .store import GCC_DIR


@dataclass
class Step:
    op: str
    args: dict[str, Any] = field(default_factory=dict)
    expect: dict[str, Any] | None = None

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"op": self.op, "args": self.args}
        if self.expect is not None:
            out["expect"] = self.expect
        return out


@dataclass
class ReplayScript:
    steps: list[Step]
    clock: list[str]
    fresh: bool = True

    def mutations(self, steps: Iterable[Step] | None = None) -> int:
        return sum(s.op in MUTATING for s in (self.steps if steps is None else steps))

    def validate(self) -> None:
        if self.mutations() > len(self.clock):
            raise ScriptError(f"clock has {len(self.clock)} values for {self.mutations()} mutating steps")
        try:
            stamps = [parse_ts(t) for t in self.clock]
        except ValueError as exc:
            raise ScriptError(str(exc)) from None
        if any(b < a for a, b in zip(stamps, stamps[1:])):
            raise ScriptError("clock values must be nondecreasing")
        for i, step in enumerate(self.steps):
            if step.op not in OPS:
                raise ScriptError(f"step {i}: unknown op {step.op!r}")

    def dumps(self) -> str:
        lines = [{"version": 1, "fresh": self.fresh, "clock": self.clock}]
        lines += [s.to_json() for s in self.steps]
        return "".join(json.dumps(x, ensure_ascii=False) + "\n" for x in lines)


def _step(obj: Any, index: int) -> Step:
    if not isinstance(obj, dict) or not isinstance(obj.get("op"), str):
        raise ScriptError(f"step {index}: expected an object with an 'op'")
    extra = set(obj) - {"op", "args", "expect"}
    if extra:
        raise ScriptError(f"step {index}: unexpected field(s) {sorted(extra)}")
    args = obj.get("args", {})
    expect = obj.get("expect")
    if not isinstance(args, dict) or (expect is not None and not isinstance(expect, dict)):
        raise ScriptError(f"step {index}: args and expect must be objects")
    return Step(obj["op"], args, expect)


def loads(text: str) -> ReplayScript:
    lines = [line for line in text.split("\n") if line.strip()]
    if not lines:
        raise ScriptError("empty script file")
    try:
        objs = [json.loads(line) for line in lines]
    except ValueError as exc:
        raise ScriptError(f"bad JSON: {exc}") from None
    header = objs[0]
    if not isinstance(header, dict) or header.get("version") != 1:
        raise ScriptError("header must be {\"version\": 1, ...}")
    clock = header.get("clock", [])
    if not isinstance(clock, list) or not all(isinstance(t, str) for t in clock):
        raise ScriptError("clock must be a list of timestamps")
    script = ReplayScript([_step(o, i) for i, o in enumerate(objs[1:])], clock, bool(header.get("fresh", True)))
    script.validate()
    return script


def load(path: str | Path) -> ReplayScript:
    return loads(Path(path).read_text(encoding="utf-8"))


def state_digest(root: str | Path) -> str:
    """SHA-256 over the sorted (relative path, bytes) pairs under ``.GCC/``."""
    base = Path(root) / GCC_DIR
    h = hashlib.sha256()
    if not base.is_dir():
        return h.hexdigest()
    files = sorted((p.relative_to(base).as_posix(), p) for p in base.rglob("*") if p.is_file())
    for rel, path in files:
        data = path.read_bytes()
        h.update(rel.encode("utf-8") + b"\x00" + str(len(data)).encode("ascii") + b"\x00")
        h.update(data)
    return h.hexdigest()


@dataclass
class Failure:
    step: int
    reason: str


@dataclass
class ReplayResult:
    transcript: list[dict[str, Any]]
    digest: str
    failures: list[Failure] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _subset(expected: Any, actual: Any) -> bool:
    if isinstance(expected, dict):
        return isinstance(actual, dict) and all(k in actual and _subset(v, actual[k]) for k, v in expected.items())
    return expected == actual


def _check(expect: dict[str, Any], response: dict[str, Any]) -> str | None:
    if "ok" in expect and expect["ok"] != response["ok"]:
        return f"expected ok={expect['ok']}, got {response.get('error') or response['ok']}"
    if "error_code" in expect:
        code = response.get("error", {}).get("code")
        if code != expect["error_code"]:
            return f"expected error {expect['error_code']}, got {code}"
    if "data_subset" in expect and not _subset(expect["data_subset"], response.get("data")):
        return "data does not contain expected subset"
    return None


def _run_steps(
    steps: list[Step], clock_values: Iterator[str], root: Path, first_index: int = 0
) -> tuple[list[dict[str, Any]], list[Failure]]:
    clock = FixedClock("1970-01-01T00:00:00Z")
    session = Session(root, clock=clock)
    transcript, failures = [], []
    for offset, step in enumerate(steps):
        index = first_index + offset
        if step.op in MUTATING:
            clock.set(next(clock_values))
        response = session.respond(index, step.op, step.args)
        transcript.append(response)
        if step.expect is not None:
            reason = _check(step.expect, response)
            if reason:
                failures.append(Failure(index, reason))
    return transcript, failures


def _precheck(script: ReplayScript, root: Path, fresh: bool, steps: list[Step]) -> None:
    script.validate()
    if fresh:
        if (root / GCC_DIR).exists():
            raise ScriptError(f"{root} already holds a repository")
        if not steps or steps[0].op != "init":
            raise ScriptError("a fresh script must start with init")
    elif not (root / GCC_DIR).is_dir():
        raise ScriptError(f"{root} holds no repository to resume")


def run_script(script: ReplayScript, root: str | Path) -> ReplayResult:
    root = Path(root)
    _precheck(script, root, script.fresh, script.steps)
    transcript, failures = _run_steps(script.steps, iter(script.clock), root)
    return ReplayResult(transcript, state_digest(root), failures)


def run_split(script: ReplayScript, split: int, root: str | Path) -> ReplayResult:
    """Run ``steps[:split]``, then resume ``steps[split:]`` from disk alone."""
    if not 0 < split < len(script.steps):
        raise ScriptError(f"split must lie strictly inside the script (got {split})")
    root = Path(root)
    head, tail = script.steps[:split], script.steps[split:]
    _precheck(script, root, script.fresh, head)
    used = script.mutations(head)
    t1, f1 = _run_steps(head, iter(script.clock[:used]), root)
    # nothing crosses this line except the files under root/.GCC
    t2, f2 = _run_steps(tail, iter(script.clock[used:]), root, first_index=split)
    return ReplayResult(t1 + t2, state_digest(root), f1 + f2)


def handoff_check(script: ReplayScript, split: int, root_a: str | Path, root_b: str | Path) -> bool:
    full = run_script(script, root_a)
    resumed = run_split(script, split, root_b)
    return full.digest == resumed.digest


# -- random scripts ------------------------------------------------------------------

_WORDS = (
    "parse", "index", "cache", "retry", "schema", "io.py", "tests", "refactor", "bug",
    "memory", "roadmap", "summary", "vector", "RAG", "CLI", "timeout", "merge", "log",
)


def _phrase(rng: random.Random, lo: int = 1, hi: int = 6) -> str:
    words = [rng.choice(_WORDS) for _ in range(rng.randint(lo, hi))]
    text = " ".join(words)
    if rng.random() < 0.2:
        text += "\n" + " ".join(rng.choice(_WORDS) for _ in range(rng.randint(1, 4)))
    return text


def random_script(rng: random.Random, length: int, start: str = "2025-01-01T00:00:00Z") -> ReplayScript:
    """A plausible agent session of ``length`` steps (init included).

    Mixes valid and deliberately invalid requests; the generator tracks
    which branches exist but not what the controller will answer.
    """
    if length < 1:
        raise ValueError("length must be positive")
    branches = ["main"]
    todo = [_phrase(rng, 1, 3).replace("\n", " ") for _ in range(rng.randint(0, 3))]
    steps = [Step("init", {"goal": _phrase(rng), "todo": todo})]
    while len(steps) < length:
        roll = rng.random()
        if roll < 0.30:
            steps.append(Step("ota", {"observation": _phrase(rng), "thought": _phrase(rng), "action": _phrase(rng)}))
        elif roll < 0.50:
            args: dict[str, Any] = {"message": _phrase(rng).replace("\n", " "), "contribution": _phrase(rng, 3, 12)}
            if rng.random() < 0.15:
                args["metadata"] = {"env_config": {"python": rng.choice(["3.10", "3.11", "3.12"])}}
            steps.append(Step("commit", args))
        elif roll < 0.60:
            name = f"b{len(branches)}-{rng.choice(_WORDS).replace('.', '_')}"
            branches.append(name)
            steps.append(Step("branch", {"name": name, "purpose": _phrase(rng)}))
        elif roll < 0.68:
            steps.append(Step("checkout", {"name": rng.choice(branches)}))
        elif roll < 0.76:
            target = rng.choice(branches + ["ghost"])
            steps.append(Step("merge", {"target": target, "synthesis": _phrase(rng, 2, 8)}))
        elif roll < 0.90:
            kind = rng.choice(["status", "branch", "log", "metadata", "commit"])
            args = {
                "status": {},
                "branch": {"branch": rng.choice(branches)},
                "log": {"log": True},
                "metadata": {"metadata": rng.choice(["file_structure", "env_config", "merged", "nope"])},
                "commit": {"commit": "00000000"},
            }[kind]
            steps.append(Step("context", args))
        elif roll < 0.94:
            segment = rng.choice(["file_structure", "deps"])
            steps.append(Step("set_metadata", {"segment": segment, "tree": {"src": [rng.choice(_WORDS)]}}))
        elif roll < 0.97:
            roadmap = {"goal": _phrase(rng), "milestones": [{"text": "ship", "done": rng.random() < 0.5}]}
            steps.append(Step("update_roadmap", {"roadmap": roadmap}))
        else:
            steps.append(Step("checkpoints", {}))
    base = parse_ts(start)
    clock, t = [], base
    for _ in range(sum(s.op in MUTATING for s in steps)):
        t = t + timedelta(seconds=rng.choice([0, 1, 1, 2, 60]))
        clock.append(format_ts(t))
    return ReplayScript(steps, clock)
