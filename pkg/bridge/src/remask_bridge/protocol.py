"""Line-delimited JSON request/response loop and batch scoring.

Request: {"id", "text", "source_domain"}. Response: {"id", "tokens",
"saliency", "proba", "domains", "layers"}; malformed requests produce an
error response that still carries the request id when one was parseable.
One in-flight request per process; responses follow request order.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path
from typing import IO

from .scorer import AttentionScorer


def handle_line(scorer: AttentionScorer, line: str) -> dict:
    request_id = None
    try:
        request = json.loads(line)
        if not isinstance(request, dict):
            raise ValueError("request is not an object")
        request_id = request.get("id")
        text = request["text"]
        if not isinstance(text, str):
            raise ValueError("text must be a string")
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        return {"id": request_id, "error": f"malformed request: {exc}"}
    tokens, saliency, proba = scorer.score(text)
    return {
        "id": request_id,
        "tokens": tokens,
        "saliency": saliency,
        "proba": proba,
        "domains": scorer.domains,
        "layers": list(scorer.layers),
    }


def serve(scorer: AttentionScorer, stdin: IO[str] = None, stdout: IO[str] = None) -> None:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout
    for line in stdin:
        if not line.strip():
            continue
        response = handle_line(scorer, line)
        stdout.write(json.dumps(response, ensure_ascii=False) + "\n")
        stdout.flush()


def score_batch(scorer: AttentionScorer, in_path: str | Path, out_path: str | Path) -> int:
    """Score a request file into the saliency interchange format consumed by
    the masking pipeline: doc_id, tokens, scores, provider per line."""
    count = 0
    with open(in_path, encoding="utf-8") as fin, open(out_path, "w", encoding="utf-8") as fout:
        for lineno, line in enumerate(fin, start=1):
            if not line.strip():
                continue
            request = json.loads(line)
            tokens, saliency, _ = scorer.score(request["text"])
            record = {
                "doc_id": request["id"],
                "tokens": tokens,
                "scores": saliency,
                "provider": scorer.provider,
            }
            fout.write(json.dumps(record, ensure_ascii=False) + "\n")
            count += 1
    return count
