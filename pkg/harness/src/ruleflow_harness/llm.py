"""LLM transport abstraction.

The pipeline talks to any client exposing `send(prompt, schema) -> dict`.
The mock client replays recorded transcripts: one FIFO queue of JSON
responses per schema name, consumed in pipeline order, which makes the
whole pipeline deterministic end to end.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol


class MalformedResponse(ValueError):
    """A response missing the fields its schema requires."""


class LlmUnavailable(RuntimeError):
    """No response can be produced (transport down, transcript exhausted)."""


@dataclass(frozen=True)
class ResponseSchema:
    name: str
    required: tuple[str, ...]


class LlmClient(Protocol):
    def send(self, prompt: str, schema: ResponseSchema) -> dict: ...


def validate_response(response: object, schema: ResponseSchema) -> dict:
    if not isinstance(response, dict):
        raise MalformedResponse(f"{schema.name}: response is not an object")
    missing = [f for f in schema.required if f not in response]
    if missing:
        raise MalformedResponse(f"{schema.name}: missing fields {missing}")
    return response


@dataclass
class MockLlmClient:
    """Replays recorded responses, keyed by schema name, in FIFO order."""

    queues: dict[str, list[dict]] = field(default_factory=dict)
    sent: list[tuple[str, str]] = field(default_factory=list)  # (schema, prompt)

    @classmethod
    def from_file(cls, path: str | Path) -> MockLlmClient:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(queues={name: list(items) for name, items in data.items()})

    @classmethod
    def from_dir(cls, directory: str | Path) -> MockLlmClient:
        """Merge every *.json transcript in lexicographic filename order."""
        merged: dict[str, list[dict]] = {}
        for path in sorted(Path(directory).glob("*.json"), key=lambda p: p.name):
            data = json.loads(path.read_text(encoding="utf-8"))
            for name, items in data.items():
                merged.setdefault(name, []).extend(items)
        return cls(queues=merged)

    def send(self, prompt: str, schema: ResponseSchema) -> dict:
        self.sent.append((schema.name, prompt))
        queue = self.queues.get(schema.name)
        if not queue:
            raise LlmUnavailable(f"no recorded response for {schema.name!r}")
        return validate_response(queue.pop(0), schema)


@dataclass
class TranscriptRouter:
    """Per-cell mock clients: `<cell_id>.json` inside the directory.

    A missing transcript behaves like an unreachable LLM for that cell.
    """

    directory: Path

    def client_for(self, cell_id: str) -> MockLlmClient:
        path = Path(self.directory) / f"{cell_id}.json"
        if not path.exists():
            return MockLlmClient()
        return MockLlmClient.from_file(path)
