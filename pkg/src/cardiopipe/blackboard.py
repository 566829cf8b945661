"""A write-once artifact store and a topological agent scheduler.

Agents never call each other. Each one declares the slots it reads and the
single slot it writes; the controller runs an agent once everything it
reads has been posted. Every posting is content-digested so a run can be
replayed and compared digest by digest.
"""
from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from functools import singledispatch
from typing import Any, Callable

from .errors import AgentFailure, CyclicDependency, DuplicateAgent, WriteOnceViolation

ARTIFACT_KINDS = ("Dataset", "FeatureSubset", "Ranking", "Model", "Report")


@singledispatch
def canonical_bytes(payload) -> bytes:
    """Stable byte form of a payload, used for digests. Extended per payload type."""
    return repr(payload).encode()


@canonical_bytes.register
def _(payload: str) -> bytes:
    return payload.encode()


@canonical_bytes.register
def _(payload: bytes) -> bytes:
    return payload


@canonical_bytes.register(list)
@canonical_bytes.register(tuple)
def _(payload) -> bytes:
    return b"[" + b",".join(canonical_bytes(p) for p in payload) + b"]"


def digest(payload) -> str:
    return hashlib.sha256(canonical_bytes(payload)).hexdigest()


@dataclass(frozen=True)
class Artifact:
    slot: str
    kind: str
    payload: Any = field(compare=False, repr=False)
    producer: str
    version: int
    content_digest: str


class Blackboard:
    """Slot -> versions of artifacts. A (slot, version) can be posted once."""

    def __init__(self, slot_kinds: dict[str, str] | None = None):
        self.slot_kinds = dict(slot_kinds or {})
        self._store: dict[tuple[str, int], Artifact] = {}
        self.log: list[Artifact] = []

    def post(self, slot: str, payload, producer: str, version: int = 1) -> Artifact:
        if (slot, version) in self._store:
            raise WriteOnceViolation(f"{slot} v{version} already posted")
        kind = self.slot_kinds.get(slot, slot)
        artifact = Artifact(slot, kind, payload, producer, version, digest(payload))
        self._store[(slot, version)] = artifact
        self.log.append(artifact)
        return artifact

    def has(self, slot: str) -> bool:
        return slot in self.slots()

    def slots(self) -> set[str]:
        return {s for s, _ in self._store}

    def get(self, slot: str, version: int | None = None) -> Artifact:
        if version is None:
            versions = [v for s, v in self._store if s == slot]
            if not versions:
                raise KeyError(slot)
            version = max(versions)
        return self._store[(slot, version)]


@dataclass(frozen=True)
class AgentSpec:
    id: str
    reads: tuple[str, ...]
    writes: str
    run: Callable = field(compare=False, repr=False)


@dataclass(frozen=True)
class ManifestEntry:
    agent: str
    inputs: tuple[tuple[str, str], ...]
    output: tuple[str, str]
    wall_time: float = field(default=0.0, compare=False)


@dataclass
class RunManifest:
    seed: int
    config: dict
    entries: list[ManifestEntry] = field(default_factory=list)

    def to_jsonl(self) -> str:
        """Deterministic log: no wall times, so identical runs give identical bytes."""
        lines = [json.dumps({"seed": self.seed, "config": self.config}, sort_keys=True)]
        for e in self.entries:
            lines.append(json.dumps({"agent": e.agent,
                                     "inputs": [list(i) for i in e.inputs],
                                     "output": list(e.output)}, sort_keys=True))
        return "\n".join(lines) + "\n"

    def timings_jsonl(self) -> str:
        return "".join(json.dumps({"agent": e.agent, "wall_time_s": round(e.wall_time, 6)}) + "\n"
                       for e in self.entries)

    def digests(self) -> list[tuple[str, str]]:
        return [e.output for e in self.entries]


class Controller:
    def __init__(self):
        self.agents: dict[str, AgentSpec] = {}

    def register_agent(self, spec: AgentSpec) -> None:
        if spec.id in self.agents:
            raise DuplicateAgent(f"agent {spec.id!r} already registered")
        if spec.writes in spec.reads:
            raise CyclicDependency(f"agent {spec.id!r} reads its own output {spec.writes!r}")
        writers = {a.writes: a.id for a in self.agents.values()}
        if spec.writes in writers:
            raise DuplicateAgent(
                f"slot {spec.writes!r} is already written by {writers[spec.writes]!r}")
        if self._reaches(spec.writes, set(spec.reads), extra=spec):
            raise CyclicDependency(f"registering {spec.id!r} would create a cycle")
        self.agents[spec.id] = spec

    def _reaches(self, start: str, targets: set[str], extra: AgentSpec) -> bool:
        """Does data flow from slot ``start`` back into any of ``targets``?"""
        agents = list(self.agents.values()) + [extra]
        seen, frontier = set(), [start]
        while frontier:
            slot = frontier.pop()
            if slot in targets:
                return True
            if slot in seen:
                continue
            seen.add(slot)
            frontier.extend(a.writes for a in agents if slot in a.reads)
        return False

    def schedule(self, available) -> list[AgentSpec]:
        """Topological order given the initially available slots (registration order breaks ties)."""
        posted = set(available)
        pending = list(self.agents.values())
        order = []
        while pending:
            ready = [a for a in pending if set(a.reads) <= posted]
            if not ready:
                missing = {s for a in pending for s in a.reads} - posted
                raise CyclicDependency(f"agents waiting on slots never posted: {sorted(missing)}")
            agent = ready[0]
            order.append(agent)
            posted.add(agent.writes)
            pending.remove(agent)
        return order

    def run(self, board: Blackboard, manifest: RunManifest) -> None:
        for agent in self.schedule(board.slots()):
            inputs = [board.get(slot) for slot in agent.reads]
            start = time.perf_counter()
            try:
                payload = agent.run(*(a.payload for a in inputs))
            except Exception as exc:
                raise AgentFailure(agent.id, exc) from exc
            artifact = board.post(agent.writes, payload, agent.id)
            manifest.entries.append(ManifestEntry(
                agent.id,
                tuple((a.slot, a.content_digest) for a in inputs),
                (artifact.slot, artifact.content_digest),
                time.perf_counter() - start,
            ))
