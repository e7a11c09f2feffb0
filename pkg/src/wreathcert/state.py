"""Session state: one JSON file per forced subset, replayed on load.

The file stores the session config, the append-only pin list in insertion
order, and the realization log.  Loading replays the pins and re-checks every
logged realization against them, so a state file is self-validating; saving
streams the potentially large pin list and is atomic (temp file + rename).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from typing import IO

from wreathcert.condense import CondensationCertificate, certificate_to_dict
from wreathcert.errors import UsageError
from wreathcert.forcing import (
    DEFAULT_BALL_CAP,
    DEFAULT_TRANSLATE_CAP,
    ForcedSubset,
    Pattern,
    Realization,
)
from wreathcert.groups import (
    Backend,
    FiniteGroupTable,
    format_table_text,
    make_backend,
    parse_table_text,
    preset_table,
)

STATE_FORMAT = "wreathcert-state"
STATE_VERSION = 1

ENV_BALL_CAP = "WREATHCERT_BALL_CAP"
ENV_TRANSLATE_CAP = "WREATHCERT_TRANSLATE_CAP"


@dataclass(frozen=True)
class SessionConfig:
    """Everything needed to rebuild the session's backend and table."""

    ambient: str
    table_source: str  # "preset:<name>" or "text:<table file contents>"
    gen_a: int | None = None
    gen_b: int | None = None
    ball_cap: int = DEFAULT_BALL_CAP
    translate_cap: int = DEFAULT_TRANSLATE_CAP

    def to_dict(self) -> dict:
        return {
            "ambient": self.ambient,
            "table": self.table_source,
            "a": self.gen_a,
            "b": self.gen_b,
            "ball_cap": self.ball_cap,
            "translate_cap": self.translate_cap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SessionConfig":
        try:
            return cls(
                ambient=data["ambient"],
                table_source=data["table"],
                gen_a=data["a"],
                gen_b=data["b"],
                ball_cap=int(data["ball_cap"]),
                translate_cap=int(data["translate_cap"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"malformed session config: {exc}") from exc

    def build_table(self) -> FiniteGroupTable:
        kind, _, arg = self.table_source.partition(":")
        if kind == "preset":
            table = preset_table(arg)
        elif kind == "text":
            table = parse_table_text(arg)
        else:
            raise UsageError(f"unknown table source {self.table_source!r}")
        if self.gen_a is not None or self.gen_b is not None:
            table = FiniteGroupTable(
                order=table.order,
                mul=table.mul,
                inv=table.inv,
                identity=table.identity,
                gen_a=self.gen_a if self.gen_a is not None else table.gen_a,
                gen_b=self.gen_b if self.gen_b is not None else table.gen_b,
                name=table.name,
            )
        return table


def default_caps() -> tuple[int, int]:
    """Ball and translate caps, overridable through the environment."""
    ball = int(os.environ.get(ENV_BALL_CAP, DEFAULT_BALL_CAP))
    translate = int(os.environ.get(ENV_TRANSLATE_CAP, DEFAULT_TRANSLATE_CAP))
    return ball, translate


def table_source_from_arg(arg: str) -> str:
    """Interpret a --table argument: preset name, or a path to a table file."""
    if os.path.sep in arg or os.path.exists(arg):
        with open(arg, encoding="utf-8") as fh:
            return "text:" + fh.read()
    return "preset:" + arg


@dataclass
class Session:
    config: SessionConfig
    backend: Backend
    table: FiniteGroupTable
    subset: ForcedSubset

    @classmethod
    def create(cls, config: SessionConfig) -> "Session":
        backend = make_backend(config.ambient)
        table = config.build_table()
        subset = ForcedSubset(
            backend,
            translate_cap=config.translate_cap,
            ball_cap=config.ball_cap,
        )
        return cls(config, backend, table, subset)


# ---------------------------------------------------------------------------
# Save / load
# ---------------------------------------------------------------------------


def _stream_array(fh: IO[str], items, render) -> None:
    """Write a JSON array one element per line (streamable back line by line)."""
    fh.write("[")
    first = True
    for item in items:
        fh.write("\n" if first else ",\n")
        first = False
        fh.write(render(item))
    fh.write("\n]" if not first else "]")


def save_session(path: str, session: Session) -> None:
    """Atomic write; the pin list and realization log stream entry by entry."""
    backend = session.backend
    fmt = backend.format
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wreathcert-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write('{"format": %s,\n' % json.dumps(STATE_FORMAT))
            fh.write('"version": %d,\n' % STATE_VERSION)
            fh.write('"config": %s,\n' % json.dumps(session.config.to_dict()))
            fh.write('"pins": ')
            _stream_array(
                fh,
                session.subset.pin_items(),
                lambda kv: json.dumps([fmt(kv[0]), kv[1]]),
            )
            fh.write(',\n"realizations": ')

            def render_realization(rec: Realization) -> str:
                return json.dumps(
                    {
                        "side": rec.side,
                        "E": [fmt(x) for x in rec.pattern.members],
                        "F": [fmt(x) for x in rec.pattern.window],
                        "witness": fmt(rec.witness),
                    }
                )

            _stream_array(fh, session.subset.realizations, render_realization)
            fh.write("}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_session(path: str) -> Session:
    """Rebuild a session, replaying pins and re-checking the realization log.

    Files written by save_session stream back line by line, so large pin
    lists never sit in memory as a parse tree; any other structurally valid
    JSON falls back to a whole-file parse.
    """
    try:
        try:
            with open(path, encoding="utf-8") as fh:
                return _build_session(_iter_stream_sections(fh))
        except _NotStreamable:
            with open(path, encoding="utf-8") as fh:
                try:
                    data = json.load(fh)
                except json.JSONDecodeError as exc:
                    raise UsageError(
                        f"state file {path} is not valid JSON: {exc}"
                    ) from exc
            header = {"format": data.get("format"), "config": data.get("config", {})}
            return _build_session(
                (header, iter(data.get("pins", [])), iter(data.get("realizations", [])))
            )
    except FileNotFoundError:
        raise UsageError(f"state file {path} does not exist (run init first)") from None


def _build_session(sections) -> Session:
    header, pins, realizations = sections
    if header.get("format") != STATE_FORMAT:
        raise UsageError("not a wreathcert state file")
    session = Session.create(SessionConfig.from_dict(header["config"]))
    backend = session.backend
    subset = session.subset
    for text, value in pins:
        h = backend.parse(text)
        if subset.peek(h) is not None:
            raise UsageError(f"state file pins {text!r} twice")
        subset.pin(h, bool(value))
    for entry in realizations:
        pattern = Pattern.of(
            backend,
            [backend.parse(t) for t in entry["E"]],
            [backend.parse(t) for t in entry["F"]],
        )
        rec = Realization(entry["side"], pattern, backend.parse(entry["witness"]))
        if rec.side not in ("L", "R"):
            raise UsageError(f"state file has a bad realization side {rec.side!r}")
        if not _realization_pinned(subset, rec):
            raise UsageError(
                f"state file fails replay: realization with witness "
                f"{entry['witness']!r} does not match the pinned map"
            )
        subset.restore_realization(rec)
    return session


class _NotStreamable(Exception):
    pass


def _iter_stream_sections(fh: IO[str]) -> tuple:
    """Header dict plus lazy row iterators for the save_session layout."""
    head = [fh.readline() for _ in range(3)]
    if (
        head[0] != '{"format": %s,\n' % json.dumps(STATE_FORMAT)
        or head[1] != '"version": %d,\n' % STATE_VERSION
        or not head[2].startswith('"config": {')
        or not head[2].endswith("},\n")
    ):
        raise _NotStreamable
    header = {
        "format": STATE_FORMAT,
        "config": json.loads(head[2][len('"config": ') : -2]),
    }

    def rows(label: str):
        opener = fh.readline().rstrip("\n")
        if opener in (label + "[],", label + "[]}"):
            return
        if opener != label + "[":
            raise _NotStreamable
        for line in fh:
            line = line.rstrip("\n")
            if line in ("],", "]}"):
                return
            try:
                yield json.loads(line.rstrip(","))
            except json.JSONDecodeError:
                raise _NotStreamable from None
        raise _NotStreamable

    return header, rows('"pins": '), rows('"realizations": ')


def _realization_pinned(subset: ForcedSubset, rec: Realization) -> bool:
    backend = subset.backend
    wi = backend.inv(rec.witness)
    members = set(rec.pattern.members)
    for f in rec.pattern.window:
        x = backend.mul(wi, f) if rec.side == "L" else backend.mul(f, wi)
        if subset.peek(x) != (f in members):
            return False
    return True


# ---------------------------------------------------------------------------
# Certificate and pattern files
# ---------------------------------------------------------------------------


def save_certificate(path: str, backend: Backend, cert: CondensationCertificate) -> None:
    data = certificate_to_dict(backend, cert)
    agreement = data.pop("agreement")
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wreathcert-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write("{")
            first = True
            for key, value in data.items():
                if not first:
                    fh.write(",\n")
                first = False
                fh.write("%s: %s" % (json.dumps(key), json.dumps(value)))
            fh.write(',\n"agreement": ')
            _stream_array(fh, agreement, json.dumps)
            fh.write("}\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_certificate_dict(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"certificate file {path} does not exist") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"certificate file {path} is not valid JSON: {exc}") from exc


def load_pattern(path: str, backend: Backend) -> Pattern:
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        members = [backend.parse(t) for t in data["members"]]
        window = [backend.parse(t) for t in data["window"]]
    except FileNotFoundError:
        raise UsageError(f"pattern file {path} does not exist") from None
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise UsageError(f"malformed pattern file {path}: {exc}") from exc
    return Pattern.of(backend, members, window)


def save_pattern(path: str, backend: Backend, pattern: Pattern) -> None:
    data = {
        "members": [backend.format(x) for x in pattern.members],
        "window": [backend.format(x) for x in pattern.window],
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(data, fh)
        fh.write("\n")
