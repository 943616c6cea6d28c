"""Report envelopes, exact-number serialisation and CSV output."""

from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path

from . import __version__

TOOL = "cayleycontour"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_CAP = 3


def rational(value: Fraction | None) -> dict | None:
    """Exact value as a "p/q" string with a decimal rendering alongside."""
    if value is None:
        return None
    value = Fraction(value)
    return {"exact": f"{value.numerator}/{value.denominator}", "decimal": float(value)}


def jsonable(obj):
    if isinstance(obj, Fraction):
        return rational(obj)
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {str(key): jsonable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    return obj


def envelope(command: str, config: dict, result: dict, exit_code: int, messages=()) -> dict:
    return {
        "tool": TOOL,
        "version": __version__,
        "command": command,
        "config": jsonable(config),
        "result": jsonable(result),
        "status": {"exit_code": exit_code, "ok": exit_code == EXIT_OK, "messages": list(messages)},
    }


def dumps_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def dumps_csv(command: str, config: dict, header, rows) -> str:
    """CSV text preceded by two '#' lines carrying the tool version and run config."""
    buf = io.StringIO()
    buf.write(f"# {TOOL} {__version__} {command}\n")
    buf.write("# config " + json.dumps(jsonable(config), sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def emit(text: str, output) -> None:
    if output in (None, "-"):
        import sys

        sys.stdout.write(text)
    else:
        Path(output).write_text(text, encoding="utf-8", newline="\n")


def schema_path() -> Path:
    return Path(__file__).with_name("report.schema.json")


def load_schema() -> dict:
    return json.loads(schema_path().read_text(encoding="utf-8"))
