"""Translation provider for the English channel.

Three modes: ``identity`` echoes the input, ``file-cache`` serves exact
matches from a TSV cache, and ``http`` POSTs ``{"q": text, "target":
"en"}`` to a configured endpoint and caches the ``translatedText``
answer. Network failure never aborts a run; it degrades to identity
with a warning. Cache writes are serialized (single writer).
"""

from __future__ import annotations

import json
import logging
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

MODES = ("identity", "file-cache", "http")

_ESCAPES = [("\\", "\\\\"), ("\t", "\\t"), ("\n", "\\n"), ("\r", "\\r")]


def _escape(text: str) -> str:
    for raw, esc in _ESCAPES:
        text = text.replace(raw, esc)
    return text


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def load_cache(path: str | Path) -> dict[str, str]:
    cache: dict[str, str] = {}
    path = Path(path)
    if not path.exists():
        return cache
    for line in path.read_text(encoding="utf-8").splitlines():
        if not line:
            continue
        source, _, english = line.partition("\t")
        cache[_unescape(source)] = _unescape(english)
    return cache


def save_cache(cache: dict[str, str], path: str | Path) -> None:
    lines = [f"{_escape(src)}\t{_escape(dst)}" for src, dst in sorted(cache.items())]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


@dataclass
class TranslationProvider:
    mode: str = "identity"
    cache: dict[str, str] = field(default_factory=dict)
    url: str | None = None
    cache_path: Path | None = None
    timeout: float = 10.0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"translation mode must be one of {MODES}, got {self.mode!r}")
        if self.mode == "http" and not self.url:
            raise ValueError("http translation mode requires a url")

    @classmethod
    def from_file(cls, path: str | Path) -> "TranslationProvider":
        return cls(mode="file-cache", cache=load_cache(path), cache_path=Path(path))


def _http_translate(provider: TranslationProvider, text: str) -> str:
    payload = json.dumps({"q": text, "target": "en"}).encode("utf-8")
    request = urllib.request.Request(
        provider.url, data=payload, headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(request, timeout=provider.timeout) as response:
        body = json.loads(response.read().decode("utf-8"))
    return body["translatedText"]


def translate(provider: TranslationProvider, text: str) -> tuple[str, bool]:
    """Return (english text, from_cache); identity fallback sets from_cache False."""
    if text in provider.cache:
        return provider.cache[text], True
    if provider.mode == "http":
        try:
            english = _http_translate(provider, text)
        except (urllib.error.URLError, OSError, KeyError, ValueError) as exc:
            logger.warning("translation request failed (%s); falling back to identity", exc)
            return text, False
        with provider._lock:
            provider.cache[text] = english
            if provider.cache_path is not None:
                with open(provider.cache_path, "a", encoding="utf-8") as fh:
                    fh.write(f"{_escape(text)}\t{_escape(english)}\n")
        return english, False
    return text, False
