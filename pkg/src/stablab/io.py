"""Scenario files (JSON, ``"schema": 1``) and report serialization."""
from __future__ import annotations

import csv
import io as _io
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from .cones import ChernData, IntersectionTensor, library
from .exact import parse_scalar
from .sheaf import FamilySpec, SheafClass

SCHEMA_VERSION = 1


class ScenarioError(ValueError):
    """Malformed scenario; the message names the offending JSON path."""


def _where(path: str, msg: str) -> ScenarioError:
    return ScenarioError(f"{path}: {msg}")


def scalar(value, path: str):
    if isinstance(value, bool) or isinstance(value, float):
        raise _where(path, f"expected an exact scalar string or integer, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return parse_scalar(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise _where(path, f"cannot parse scalar {value!r}: {exc}") from None
    raise _where(path, f"expected an exact scalar, got {type(value).__name__}")


def scalars(values, path: str) -> tuple:
    if not isinstance(values, list):
        raise _where(path, "expected a list")
    return tuple(scalar(v, f"{path}[{k}]") for k, v in enumerate(values))


def _reject_floats(obj, path: str = "$") -> None:
    if isinstance(obj, float):
        raise _where(path, f"floating-point value {obj!r} is not allowed; use an exact string such as \"1/3\"")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _reject_floats(v, f"{path}.{k}")
    elif isinstance(obj, list):
        for k, v in enumerate(obj):
            _reject_floats(v, f"{path}[{k}]")


@dataclass
class Scenario:
    data: dict
    source: str = "<scenario>"

    @classmethod
    def load(cls, path: str | Path) -> Scenario:
        text = Path(path).read_text(encoding="utf-8")
        return cls.parse(text, str(path))

    @classmethod
    def parse(cls, text: str, source: str = "<scenario>") -> Scenario:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"{source}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ScenarioError(f"{source}: $: top level must be an object")
        if data.get("schema") != SCHEMA_VERSION:
            raise ScenarioError(f"{source}: $.schema: expected {SCHEMA_VERSION}, got {data.get('schema')!r}")
        _reject_floats(data)
        return cls(data, source)

    # -- generic access ----------------------------------------------
    def get(self, key: str, default=None):
        return self.data.get(key, default)

    def require(self, key: str):
        if key not in self.data:
            raise _where(f"$.{key}", "missing required key")
        return self.data[key]

    # -- typed access ------------------------------------------------
    def sheaves(self) -> dict[str, SheafClass]:
        out = {}
        for k, obj in enumerate(self.require("sheaves")):
            path = f"$.sheaves[{k}]"
            try:
                S = SheafClass.from_json(obj)
            except (KeyError, TypeError, ValueError) as exc:
                raise _where(path, str(exc)) from None
            if not S.label:
                raise _where(path, "sheaf needs a label")
            if S.label in out:
                raise _where(path, f"duplicate label {S.label!r}")
            out[S.label] = S
        j0 = self.get("j0")
        if j0 is not None:
            for label, S in out.items():
                if S.j0 != j0:
                    raise _where("$.sheaves", f"{label!r} has j0={S.j0}, scenario declares {j0}")
        return out

    def target_and_family(self) -> tuple[SheafClass, FamilySpec]:
        sh = self.sheaves()
        t = self.require("target")
        if t not in sh:
            raise _where("$.target", f"unknown sheaf label {t!r}")
        labels = self.get("family", [x for x in sh if x != t])
        fam = []
        for k, lab in enumerate(labels):
            if lab not in sh:
                raise _where(f"$.family[{k}]", f"unknown sheaf label {lab!r}")
            fam.append(sh[lab])
        return sh[t], FamilySpec(tuple(fam))

    def sigma(self, key: str = "sigma") -> tuple:
        return scalars(self.require(key), f"$.{key}")

    def representations(self) -> dict:
        from .quiver import Representation

        out = {}
        for k, obj in enumerate(self.require("representations")):
            path = f"$.representations[{k}]"
            try:
                R = Representation.from_json(obj)
            except (KeyError, TypeError, ValueError, IndexError) as exc:
                raise _where(path, str(exc)) from None
            if not R.label:
                raise _where(path, "representation needs a label")
            out[R.label] = R
        return out

    def representation(self, key: str = "rep"):
        reps = self.representations()
        lab = self.get(key)
        if lab is None:
            if len(reps) == 1 and key == "rep":
                return next(iter(reps.values()))
            raise _where(f"$.{key}", "missing representation label")
        if lab not in reps:
            raise _where(f"$.{key}", f"unknown representation {lab!r}")
        return reps[lab]

    def tensor(self) -> IntersectionTensor:
        t = self.require("tensor")
        try:
            if isinstance(t, str):
                return library(t)
            return IntersectionTensor.from_json(t)
        except (KeyError, TypeError, ValueError) as exc:
            raise _where("$.tensor", str(exc)) from None

    def vector(self, key: str) -> tuple:
        return scalars(self.require(key), f"$.{key}")

    def chern(self, key: str) -> ChernData:
        try:
            return ChernData.from_json(self.require(key))
        except (KeyError, TypeError, ValueError) as exc:
            raise _where(f"$.{key}", str(exc)) from None


# ----------------------------------------------------------------------
# caps


def parse_caps(text: str | None) -> dict[str, int]:
    """``'{"subspace": 1000000}'`` or the relaxed ``'{subspace:1000000}'``."""
    caps = {"subspace": 1_000_000}
    if not text:
        return caps
    try:
        obj = json.loads(text)
    except json.JSONDecodeError:
        pairs = re.findall(r"([A-Za-z_]+)\s*[:=]\s*(\d+)", text)
        if not pairs:
            raise ScenarioError(f"--caps: cannot parse {text!r}")
        obj = {k: int(v) for k, v in pairs}
    if not isinstance(obj, dict):
        raise ScenarioError("--caps: expected an object")
    for k, v in obj.items():
        if k not in caps:
            raise ScenarioError(f"--caps: unknown cap {k!r}")
        if not isinstance(v, int) or isinstance(v, bool) or v <= 0:
            raise ScenarioError(f"--caps: {k} must be a positive integer")
        caps[k] = v
    return caps


# ----------------------------------------------------------------------
# reports


def dump_json(report: Mapping) -> str:
    _assert_no_floats(report)
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _assert_no_floats(obj) -> None:
    if isinstance(obj, float):
        raise TypeError(f"float {obj!r} in report")
    if isinstance(obj, Mapping):
        for v in obj.values():
            _assert_no_floats(v)
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _assert_no_floats(v)


def _cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if v is None:
        return ""
    if isinstance(v, (list, tuple, dict)):
        return json.dumps(v, ensure_ascii=False, separators=(",", ":"))
    return str(v)


def dump_csv(rows: Sequence[Mapping]) -> str:
    buf = _io.StringIO()
    if not rows:
        return ""
    cols: list[str] = []
    for r in rows:
        for k in r:
            if k not in cols:
                cols.append(k)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for r in rows:
        _assert_no_floats(r)
        w.writerow([_cell(r.get(c)) for c in cols])
    return buf.getvalue()
