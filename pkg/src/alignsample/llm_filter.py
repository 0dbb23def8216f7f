"""Quality-filter baseline: ask a judge model whether each record is worth
keeping and collect records until k say yes.

The judge is any chat-completion endpoint speaking the usual JSON wire
format; tests use a scripted transport (a JSONL file mapping record id to
a canned reply) so the suite never touches a network. Verdict parsing is
bracket-tolerant: the first standalone yes/no token decides, however it is
quoted or bracketed, and replies with neither token are skipped and
counted rather than treated as a no.
"""

from __future__ import annotations

import json
import re
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import requests

from .dataset import DataRecord, EmbeddedDataset, Selection
from .errors import LlmFilterError, TransportError, VerdictParseError

SYSTEM_PROMPT = (
    "Please act as an expert data collator for alignment of Large Language Models "
    "towards human values. Evaluate the quality of the interaction provided between "
    "a user and an AI assistant along with a boolean label specifying whether the "
    "reposne by assistant is appropriate or not. Your evaluation should consider "
    "diversity, quality, and helpfullness. Your job is to evaluate whether the "
    "interaction contains informative signal for aligning a Large Language Model to "
    "make the outputs safe and helpful. Ensure to favour the interaction only if it "
    "adds valuable information for the model which is not common, redundant or "
    "obvious as we only want the most informative interactions. Please give more "
    "weightage to interactions with a False Label value. Do not allow the length of "
    "the responses to influence your evaluation. Do not favor certain names of the "
    "assistants. Be as objective as possible. Output your final verdict by strictly "
    'following this format without any other text: "Yes" if the interaction contains '
    'an informative signal for alignment and "No" otherwise.'
)

USER_TEMPLATE = (
    "[The start of Interaction]\n"
    "{interaction}\n"
    "[The end of Interaction]\n"
    "### Label: {label}"
)

_VERDICT_RE = re.compile(r"(?i)(?<![a-z])(yes|no)(?![a-z])")


@dataclass
class PromptPair:
    system: str
    user: str


def build_prompt(record: DataRecord) -> PromptPair:
    """Render the judge prompt: prompt and completion separated by one blank line."""
    interaction = f"{record.prompt}\n\n{record.completion}"
    user = USER_TEMPLATE.format(interaction=interaction, label="True" if record.label else "False")
    return PromptPair(system=SYSTEM_PROMPT, user=user)


def parse_verdict(text: str) -> bool:
    """True iff the first standalone yes/no token (case-insensitive) is yes."""
    match = _VERDICT_RE.search(text)
    if match is None:
        raise VerdictParseError(f"unparseable verdict: {text!r}")
    return match.group(1).lower() == "yes"


@dataclass
class ChatClientConfig:
    endpoint: str
    model_name: str
    timeout: float = 30.0
    max_retries: int = 3
    auth_token: str | None = None
    backoff_base: float = 0.5

    def validate(self) -> None:
        if not self.timeout > 0:
            raise LlmFilterError("timeout must be > 0")
        if self.max_retries < 0:
            raise LlmFilterError("max_retries must be >= 0")


class HttpChatClient:
    """Chat-completion client with retry and exponential backoff.

    Sends POST {endpoint}/chat/completions with temperature 0 and reads
    choices[0].message.content.
    """

    def __init__(self, config: ChatClientConfig):
        config.validate()
        self.config = config

    def _post(self, body: dict) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.config.auth_token:
            headers["Authorization"] = f"Bearer {self.config.auth_token}"
        url = self.config.endpoint.rstrip("/") + "/chat/completions"
        response = requests.post(url, json=body, headers=headers, timeout=self.config.timeout)
        response.raise_for_status()
        return response.json()

    def complete(self, record_id: str, prompt: PromptPair) -> str:
        body = {
            "model": self.config.model_name,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": 0,
        }
        last_error: Exception | None = None
        for attempt in range(self.config.max_retries + 1):
            if attempt > 0:
                time.sleep(self.config.backoff_base * 2 ** (attempt - 1))
            try:
                payload = self._post(body)
                return payload["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
        raise TransportError(
            f"endpoint unreachable after {self.config.max_retries + 1} attempts: {last_error}"
        )


class ScriptTransport:
    """Deterministic mock: record id -> scripted reply, read from JSONL."""

    def __init__(self, responses: dict[str, str]):
        self.responses = responses
        self.requests_made = 0

    @classmethod
    def from_jsonl(cls, path: str | Path) -> "ScriptTransport":
        responses: dict[str, str] = {}
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise LlmFilterError(f"{path}:{lineno}: invalid script JSON ({exc.msg})")
                if not isinstance(obj, dict) or "id" not in obj or "response" not in obj:
                    raise LlmFilterError(f"{path}:{lineno}: expected keys 'id' and 'response'")
                responses[obj["id"]] = obj["response"]
        return cls(responses)

    def complete(self, record_id: str, prompt: PromptPair) -> str:
        self.requests_made += 1
        try:
            return self.responses[record_id]
        except KeyError:
            raise TransportError(f"no scripted response for record {record_id!r}")


@dataclass
class LlmSelectionResult:
    selection: Selection
    visited: int
    skipped_ids: list[str] = field(default_factory=list)
    warning: str | None = None


def select_llm(
    dataset: EmbeddedDataset,
    k: int,
    client,
    order_seed: int = 0,
    scan_order: str = "shuffled",
) -> LlmSelectionResult:
    """Scan records, keep those the judge accepts, stop once k are collected.

    scan_order "shuffled" visits records in a PCG64(order_seed) permutation
    to avoid corpus-prefix bias; "natural" scans in file order. Unparseable
    replies are skipped and reported, never treated as rejections. A
    transport failure aborts with a diagnostic naming the record.
    """
    if k < 1:
        raise LlmFilterError(f"k must be >= 1, got {k}")
    n = len(dataset)
    if scan_order == "shuffled":
        order = np.random.default_rng(order_seed).permutation(n)
    elif scan_order == "natural":
        order = np.arange(n)
    else:
        raise LlmFilterError(f"unknown scan order {scan_order!r}")

    indices: list[int] = []
    skipped: list[str] = []
    visited = 0
    for idx in order:
        visited += 1
        record = dataset.records[int(idx)]
        prompt = build_prompt(record)
        try:
            reply = client.complete(record.id, prompt)
        except TransportError as exc:
            raise TransportError(f"record {record.id!r}: {exc}") from exc
        try:
            verdict = parse_verdict(reply)
        except VerdictParseError:
            skipped.append(record.id)
            continue
        if verdict:
            indices.append(int(idx))
            if len(indices) >= k:
                break

    warning = None
    if len(indices) < k:
        warning = f"exhausted corpus, {len(indices)} of {k} collected"
        warnings.warn(warning, RuntimeWarning, stacklevel=2)
    selection = Selection(
        strategy="llm", k=k, indices=indices, scores=[1.0] * len(indices), seed=order_seed
    )
    return LlmSelectionResult(
        selection=selection, visited=visited, skipped_ids=skipped, warning=warning
    )
