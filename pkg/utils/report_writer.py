import json
import logging
import sys
from typing import Any, TextIO

from core.config import settings
from core.report import Report

logger = logging.getLogger(__name__)


def emit_report(report: Report, fmt: str = "text", stream: TextIO | None = None) -> str:
    """
    Render a report as text or JSON and write it to ``stream`` (stdout by default).

    JSON keeps the model's field order and never sorts, so identical runs give
    identical bytes.
    """
    if fmt == "json":
        out = json.dumps(report.to_dict(), indent=settings.json_indent, ensure_ascii=False) + "\n"
    elif fmt == "text":
        out = render_text(report)
    else:
        raise ValueError(f"Unknown report format '{fmt}'")
    stream = sys.stdout if stream is None else stream
    stream.write(out)
    stream.flush()
    logger.debug(f"Report written: {len(report.results)} results, format {fmt}")
    return out


def parse_report(text: str) -> Report:
    return Report.model_validate_json(text)


def render_text(report: Report) -> str:
    data = report.to_dict()
    lines = [f"schema {data['schema']}"]
    ring = data.get("ring") or {}
    if ring:
        ideal = ", ".join(ring.get("ideal", []))
        lines.append(f"ring: k[{', '.join(ring.get('vars', []))}]/({ideal}), char {ring.get('char')}")
    if data.get("command"):
        lines.append(f"command: {data['command']}")
    for result in data["results"]:
        title = result["command"] + (f" --module {result['module']}" if result.get("module") else "")
        lines.append("")
        lines.append(f"== {title} ==")
        _render(result["results"], lines, 1)
        if result["certificates"]:
            lines.append("  certificates:")
            _render(result["certificates"], lines, 2)
    if data.get("error"):
        lines.append("")
        lines.append(f"error: {data['error'].get('type')}: {data['error'].get('message')}")
    return "\n".join(lines) + "\n"


def _render(value: Any, lines: list[str], depth: int) -> None:
    pad = "  " * depth
    if isinstance(value, dict):
        for key, item in value.items():
            if isinstance(item, (dict, list)) and not _is_flat(item):
                lines.append(f"{pad}{key}:")
                _render(item, lines, depth + 1)
            else:
                lines.append(f"{pad}{key}: {_scalar(item)}")
    elif isinstance(value, list):
        for item in value:
            if isinstance(item, (dict, list)) and not _is_flat(item):
                lines.append(f"{pad}-")
                _render(item, lines, depth + 1)
            else:
                lines.append(f"{pad}{_scalar(item)}")
    else:
        lines.append(f"{pad}{_scalar(value)}")


def _is_flat(item) -> bool:
    if isinstance(item, dict):
        return False
    return all(not isinstance(x, (dict, list)) for x in item)


def _scalar(item) -> str:
    if isinstance(item, bool):
        return "true" if item else "false"
    if item is None:
        return "-"
    if isinstance(item, list):
        return "[" + ", ".join(_scalar(x) for x in item) + "]"
    return str(item)
