"""Backends used by the CLI: in-process, or a running HTTP service."""

from __future__ import annotations

from typing import Protocol

import httpx

from .. import ops
from ..kb import ServiceError


class Backend(Protocol):
    def validate(self, text: str) -> ops.ValidationReport: ...

    def run(self, text: str, max_ticks: int, seed: int) -> ops.RunOutcome: ...

    def query(
        self, text: str, query: str, args: list[str], overrides: dict[str, str], require: list[str]
    ) -> list[str]: ...

    def generate(self, n_actions: int, n_sa: int, n_pa: int) -> ops.GenerateOutcome: ...


class LocalBackend:
    def validate(self, text: str) -> ops.ValidationReport:
        return ops.validate_text(text)

    def run(self, text: str, max_ticks: int, seed: int) -> ops.RunOutcome:
        return ops.run_text(text, max_ticks, seed)

    def query(self, text, query, args, overrides, require) -> list[str]:
        return ops.query_text(text, query, args, overrides, require)

    def generate(self, n_actions: int, n_sa: int, n_pa: int) -> ops.GenerateOutcome:
        return ops.generate(n_actions, n_sa, n_pa)


class HttpBackend:
    """Thin client for :mod:`taca.service.app`."""

    def __init__(self, base_url: str, client: httpx.Client | None = None, timeout: float = 60.0):
        self.client = client or httpx.Client(base_url=base_url, timeout=timeout)

    def _post(self, path: str, body: dict) -> dict:
        r = self.client.post(path, json=body)
        if r.status_code == 422:
            raise ServiceError(r.json().get("detail", r.text))
        r.raise_for_status()
        return r.json()

    def validate(self, text: str) -> ops.ValidationReport:
        d = self._post("/validate", {"scenario": text})
        counts = ops.ElementCount(**d["counts"]) if d["counts"] else None
        return ops.ValidationReport(d["valid"], counts, d["error"], d["line"], d["column"])

    def run(self, text: str, max_ticks: int, seed: int) -> ops.RunOutcome:
        d = self._post("/run", {"scenario": text, "max_ticks": max_ticks, "seed": seed})
        return ops.RunOutcome(d["exit_code"], d["result"], d["metrics"], d["trace"], d["error"])

    def query(self, text, query, args, overrides, require) -> list[str]:
        body = {"scenario": text, "query": query, "args": args, "overrides": overrides, "require": require}
        return self._post("/query", body)["items"]

    def generate(self, n_actions: int, n_sa: int, n_pa: int) -> ops.GenerateOutcome:
        d = self._post("/generate", {"n_actions": n_actions, "n_sa": n_sa, "n_pa": n_pa})
        return ops.GenerateOutcome(d["scenario"], d["predicted"], d["counted"], d["per_action"])
