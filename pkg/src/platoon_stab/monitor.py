"""Offline monitoring of logged platoon-controller executions.

An execution is a finite sequence of events; each event carries the full
parameter tuple of the platoon plus the angular frequency ``w`` observed
at that instant.  The stability contract is "globally P1 and P2":

* P1 - the parameters form a valid platoon;
* P2 - ``w > 0`` and ``Q(w^2) > 0`` for the event's controller model
  (for the unidirectional constant-spacing controller this is literally
  ``0 < w  and  2k/m < w^2``).

:func:`run_monitor` checks every event, reports the earliest violation
(P1 before P2 when both fail on one event) and counts all failures of
each predicate across the whole trace.

Traces are stored column-wise (one numpy array per field) so the scan is
a handful of vectorised passes; :class:`Event` objects are materialised
only on demand.  The per-event predicates :func:`check_p1` and
:func:`check_p2` use the same formulas, operation for operation, so the
vectorised scan and a naive per-event fold always agree.

Trace file format: line-delimited JSON, UTF-8, LF, one event per line:

    {"i":0,"ct":"autonomous","cf":"unidirectional","st":"constant_spacing",
     "n":10,"m":1000.0,"k":2000.0,"c":400.0,"h":1.0,"ch":1.0,"vd":25.0,
     "h0":1.0,"ca":50.0,"cd":50.0,"w":3.0}

Malformed lines abort parsing with the offending line number; the monitor
refuses such traces rather than skipping lines.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .model import (
    Configuration,
    ControllerSpec,
    ControllerType,
    PlatoonParams,
    Strategy,
    UnsupportedControllerError,
    _raw_error_model,
    error_model,
    failed_conjunct,
    is_valid_platoon,
)
from .frequency import stability_constraint

_CT_VALUES = tuple(ControllerType)
_CF_VALUES = tuple(Configuration)
_ST_VALUES = tuple(Strategy)
_CT_CODE = {e.value: i for i, e in enumerate(_CT_VALUES)}
_CF_CODE = {e.value: i for i, e in enumerate(_CF_VALUES)}
_ST_CODE = {e.value: i for i, e in enumerate(_ST_VALUES)}

_EVENT_KEYS = ("i", "ct", "cf", "st", "n", "m", "k", "c", "h", "ch", "vd", "h0", "ca", "cd", "w")
_PARAM_KEYS = ("m", "k", "c", "h", "ch", "vd", "h0", "ca", "cd")


class TraceParseError(ValueError):
    """A trace file line failed to parse; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass(frozen=True)
class Event:
    """One monitoring sample: position in the trace, controller, frequency."""

    index: int
    spec: ControllerSpec
    omega: float


@dataclass(frozen=True)
class Violation:
    index: int
    predicate: str  # "P1" | "P2"
    reason: str


@dataclass(frozen=True)
class Verdict:
    """Monitor outcome: pass iff both failure counters are zero."""

    passed: bool
    first_violation: Violation | None
    events: int
    p1_failures: int
    p2_failures: int
    seconds: float

    @property
    def outcome(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self) -> dict:
        fv = None
        if self.first_violation is not None:
            fv = {
                "index": self.first_violation.index,
                "predicate": self.first_violation.predicate,
                "reason": self.first_violation.reason,
            }
        return {
            "outcome": self.outcome,
            "first_violation": fv,
            "events": self.events,
            "p1_failures": self.p1_failures,
            "p2_failures": self.p2_failures,
            "seconds": self.seconds,
        }


class Trace:
    """Ordered finite sequence of events, stored column-wise.

    Indexing and iteration yield :class:`Event` objects; the bulk arrays
    stay private to this module.  Event indices are the positions
    0..len-1.
    """

    __slots__ = ("source", "ct", "cf", "st", "n", "m", "k", "c", "h",
                 "ch", "vd", "h0", "ca", "cd", "w")

    def __init__(self, source, ct, cf, st, n, m, k, c, h, ch, vd, h0, ca, cd, w):
        self.source = source
        self.ct = ct
        self.cf = cf
        self.st = st
        self.n = n
        self.m = m
        self.k = k
        self.c = c
        self.h = h
        self.ch = ch
        self.vd = vd
        self.h0 = h0
        self.ca = ca
        self.cd = cd
        self.w = w

    def __len__(self) -> int:
        return len(self.w)

    def __getitem__(self, i: int) -> Event:
        if not isinstance(i, int):
            raise TypeError("trace indices must be integers")
        size = len(self.w)
        if i < 0:
            i += size
        if not 0 <= i < size:
            raise IndexError("trace index out of range")
        params = PlatoonParams(
            n=int(self.n[i]),
            m=float(self.m[i]), k=float(self.k[i]), c=float(self.c[i]),
            h=float(self.h[i]), ch=float(self.ch[i]), vd=float(self.vd[i]),
            h0=float(self.h0[i]), ca=float(self.ca[i]), cd=float(self.cd[i]),
        )
        spec = ControllerSpec(
            _CT_VALUES[self.ct[i]], _CF_VALUES[self.cf[i]], _ST_VALUES[self.st[i]], params
        )
        return Event(index=i, spec=spec, omega=float(self.w[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    @classmethod
    def from_events(cls, events, source: str = "memory") -> "Trace":
        """Build a trace from Event objects; indices must be 0..len-1."""
        events = list(events)
        size = len(events)
        cols = {name: np.empty(size) for name in (*_PARAM_KEYS, "w")}
        ct = np.empty(size, dtype=np.int8)
        cf = np.empty(size, dtype=np.int8)
        st = np.empty(size, dtype=np.int8)
        n = np.empty(size, dtype=np.int64)
        for pos, e in enumerate(events):
            if e.index != pos:
                raise ValueError(f"event index {e.index} at position {pos}; indices must be contiguous")
            ct[pos] = _CT_CODE[e.spec.controller_type.value]
            cf[pos] = _CF_CODE[e.spec.configuration.value]
            st[pos] = _ST_CODE[e.spec.strategy.value]
            n[pos] = e.spec.params.n
            for name in _PARAM_KEYS:
                cols[name][pos] = getattr(e.spec.params, name)
            cols["w"][pos] = e.omega
        return cls(source, ct, cf, st, n,
                   cols["m"], cols["k"], cols["c"], cols["h"], cols["ch"],
                   cols["vd"], cols["h0"], cols["ca"], cols["cd"], cols["w"])


def check_p1(event: Event) -> bool:
    """Predicate P1: the event's parameters form a valid platoon."""
    return is_valid_platoon(event.spec.params)


def check_p2(event: Event) -> bool:
    """Predicate P2: ``w > 0`` and ``Q(w^2) > 0`` for the event's model.

    Coefficients are evaluated without a validity gate (an invalid platoon
    already fails P1); when they are undefined (zero mass, or a controller
    combination with no model) P2 is false.
    """
    try:
        model = _raw_error_model(event.spec)
    except (ZeroDivisionError, UnsupportedControllerError):
        return False
    if not event.omega > 0.0:
        return False
    con = stability_constraint(model)
    u = event.omega * event.omega
    return u * u + con.alpha * u + con.beta > 0.0


def _vector_coefficients(trace: Trace):
    """Per-event model coefficients, formula-for-formula the same as the
    scalar path; undefined cases come out as inf/nan."""
    ct, cf, st = trace.ct, trace.cf, trace.st
    m, k, c = trace.m, trace.k, trace.c
    aut = ct == 0
    uni = cf == 0
    cs = st == 0
    vs = st == 1
    vth = st == 2
    uni_const = aut & uni & cs
    uni_var = aut & uni & vs
    uni_headway = aut & uni & vth
    bi_const = aut & ~uni & cs
    bi_var = aut & ~uni & vs
    non_auto = ~aut
    supported = non_auto | uni_const | uni_var | uni_headway | bi_const | bi_var
    with np.errstate(divide="ignore", invalid="ignore"):
        k_m = k / m
        c_m = c / m
        a0 = np.select([bi_const | bi_var, supported], [(2.0 * k) / m, k_m], default=np.nan)
        a1 = np.select(
            [uni_const, uni_var, uni_headway, bi_const, bi_var, non_auto],
            [c_m, (c + k * trace.h) / m, (c + k * trace.h0 + k * trace.ch * trace.vd) / m,
             (2.0 * c) / m, (2.0 * c + k * trace.h) / m, (c + trace.ca) / m],
            default=np.nan,
        )
        b0 = np.where(supported, k_m, np.nan)
        b1 = np.select([uni_headway, supported], [(c + k * trace.ch * trace.vd) / m, c_m], default=np.nan)
    return a0, a1, b0, b1


def _vector_masks(trace: Trace):
    p1 = (
        (trace.m > 0.0) & (trace.k > 0.0) & (trace.c > 0.0) & (trace.h > 0.0)
        & (trace.ch > 0.0) & (trace.vd > 0.0) & (trace.h0 > 0.0)
        & (trace.ca > 0.0) & (trace.cd > 0.0) & (trace.n > 1)
    )
    a0, a1, b0, b1 = _vector_coefficients(trace)
    with np.errstate(invalid="ignore", over="ignore"):
        alpha = a1 * a1 - b1 * b1 - 2.0 * a0
        beta = a0 * a0 - b0 * b0
        u = trace.w * trace.w
        q = u * u + alpha * u + beta
        p2 = (trace.w > 0.0) & (q > 0.0)
    return p1, p2


def run_monitor(trace: Trace) -> Verdict:
    """Evaluate "globally P1 and P2" over the whole trace.

    Always scans every event so the failure counters are complete; the
    reported violation is the earliest failing index, attributing P1
    before P2 when both fail there.  Wall-clock duration of the scan is
    recorded in ``seconds``.
    """
    start = time.perf_counter()
    size = len(trace)
    if size == 0:
        return Verdict(True, None, 0, 0, 0, time.perf_counter() - start)
    p1, p2 = _vector_masks(trace)
    p1_failures = int(np.count_nonzero(~p1))
    p2_failures = int(np.count_nonzero(~p2))
    first = None
    if p1_failures or p2_failures:
        bad = ~(p1 & p2)
        idx = int(np.argmax(bad))
        event = trace[idx]
        if not p1[idx]:
            reason = f"{failed_conjunct(event.spec.params)} violated"
            first = Violation(idx, "P1", reason)
        else:
            if not event.omega > 0.0:
                reason = "0 < omega violated"
            else:
                reason = (
                    f"omega = {event.omega!r} lies in a non-attenuating band "
                    "(Q(omega^2) <= 0)"
                )
            first = Violation(idx, "P2", reason)
    return Verdict(
        passed=first is None,
        first_violation=first,
        events=size,
        p1_failures=p1_failures,
        p2_failures=p2_failures,
        seconds=time.perf_counter() - start,
    )


def generate_trace(seed: int, length: int, template: ControllerSpec, violations=()) -> Trace:
    """Deterministic pseudo-random execution around a template controller.

    Parameters are jittered multiplicatively within valid ranges; each
    event's frequency is drawn from its own stable region (above the
    largest root of Q).  ``violations`` lists ``(index, kind)`` pairs with
    kind "P1" or "P2"; at those indices the named predicate is made false
    (P1 by zeroing one positivity conjunct or dropping n to 1, P2 by a
    frequency inside the non-attenuating band, or a non-positive one when
    the model attenuates everywhere).  Identical arguments produce an
    identical trace.
    """
    if length < 0:
        raise ValueError("length must be >= 0")
    error_model(template)  # reject invalid or unsupported templates up front
    plan = [(int(i), str(kind)) for i, kind in violations]
    for i, kind in plan:
        if not 0 <= i < length:
            raise ValueError(f"violation index {i} outside trace of length {length}")
        if kind not in ("P1", "P2"):
            raise ValueError(f"violation kind must be P1 or P2, got {kind!r}")

    rng = np.random.default_rng(seed)
    p = template.params
    base = np.array([p.m, p.k, p.c, p.h, p.ch, p.vd, p.h0, p.ca, p.cd])
    factors = rng.uniform(0.85, 1.15, size=(length, 9))
    cols = {name: factors[:, j] * base[j] for j, name in enumerate(_PARAM_KEYS)}
    n = rng.integers(max(2, p.n - 2), p.n + 3, size=length)

    trace = Trace(
        f"seed:{seed}",
        np.full(length, _CT_CODE[template.controller_type.value], dtype=np.int8),
        np.full(length, _CF_CODE[template.configuration.value], dtype=np.int8),
        np.full(length, _ST_CODE[template.strategy.value], dtype=np.int8),
        n.astype(np.int64),
        cols["m"], cols["k"], cols["c"], cols["h"], cols["ch"],
        cols["vd"], cols["h0"], cols["ca"], cols["cd"],
        np.zeros(length),
    )
    if length == 0:
        return trace

    a0, a1, b0, b1 = _vector_coefficients(trace)
    alpha = a1 * a1 - b1 * b1 - 2.0 * a0
    beta = a0 * a0 - b0 * b0
    disc = alpha * alpha - 4.0 * beta
    sq = np.sqrt(np.maximum(disc, 0.0))
    u_hi = 0.5 * (-alpha + sq)
    u_lo = np.maximum(0.5 * (-alpha - sq), 0.0)
    has_band = (disc >= 0.0) & (u_hi > 0.0)
    # Stable draw: above the largest root when one exists, otherwise any
    # frequency near the natural one works.
    u = np.where(
        has_band,
        u_hi * rng.uniform(1.2, 4.0, size=length),
        a0 * rng.uniform(0.25, 4.0, size=length),
    )
    trace.w[:] = np.sqrt(u)

    for i, kind in plan:
        if kind == "P1":
            conjunct = int(rng.integers(0, 10))
            if conjunct == 9:
                trace.n[i] = 1
            else:
                getattr(trace, _PARAM_KEYS[conjunct])[i] = 0.0
        else:
            if has_band[i]:
                u_bad = u_lo[i] + (u_hi[i] - u_lo[i]) * rng.uniform(0.25, 0.75)
                trace.w[i] = math.sqrt(u_bad)
            else:
                trace.w[i] = 0.0
    return trace


def _reject_constant(name):
    raise ValueError(f"non-finite constant {name} not allowed")


def parse_trace(path) -> Trace:
    """Read a line-delimited JSON trace file (UTF-8, one event per line)."""
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trace_lines(fh, source=str(path))


def parse_trace_lines(lines, source: str = "<stream>") -> Trace:
    """Parse trace lines; any malformed line raises :class:`TraceParseError`."""
    ct, cf, st = [], [], []
    n = []
    cols = {name: [] for name in (*_PARAM_KEYS, "w")}
    count = 0
    for lineno, line in enumerate(lines, 1):
        line = line.rstrip("\n")
        if not line.strip():
            raise TraceParseError(lineno, "empty line")
        try:
            obj = json.loads(line, parse_constant=_reject_constant)
        except ValueError as exc:
            raise TraceParseError(lineno, f"invalid JSON ({exc})") from None
        if not isinstance(obj, dict):
            raise TraceParseError(lineno, "event must be a JSON object")
        if len(obj) != len(_EVENT_KEYS) or any(key not in obj for key in _EVENT_KEYS):
            unknown = [key for key in obj if key not in _EVENT_KEYS]
            if unknown:
                raise TraceParseError(lineno, f"unknown key {unknown[0]!r}")
            missing = [key for key in _EVENT_KEYS if key not in obj]
            raise TraceParseError(lineno, f"missing key {missing[0]!r}")
        idx = obj["i"]
        if type(idx) is not int:
            raise TraceParseError(lineno, "'i' must be an integer")
        if idx != count:
            raise TraceParseError(lineno, f"event index {idx} does not match position {count}")
        for code_map, key, dest in ((_CT_CODE, "ct", ct), (_CF_CODE, "cf", cf), (_ST_CODE, "st", st)):
            value = obj[key]
            if not isinstance(value, str) or value not in code_map:
                allowed = "|".join(code_map)
                raise TraceParseError(lineno, f"'{key}' must be one of {allowed}")
            dest.append(code_map[value])
        nv = obj["n"]
        if type(nv) is not int:
            raise TraceParseError(lineno, "'n' must be an integer")
        if nv < 0:
            raise TraceParseError(lineno, "'n' must be >= 0")
        n.append(nv)
        for key in (*_PARAM_KEYS, "w"):
            value = obj[key]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TraceParseError(lineno, f"'{key}' must be a number")
            value = float(value)
            if not math.isfinite(value):
                raise TraceParseError(lineno, f"'{key}' must be finite")
            cols[key].append(value)
        count += 1
    return Trace(
        source,
        np.asarray(ct, dtype=np.int8),
        np.asarray(cf, dtype=np.int8),
        np.asarray(st, dtype=np.int8),
        np.asarray(n, dtype=np.int64),
        *(np.asarray(cols[name]) for name in (*_PARAM_KEYS, "w")),
    )


def write_trace(trace: Trace, fh) -> None:
    """Write the line-delimited JSON form; identical traces give identical
    bytes."""
    ct, cf, st = trace.ct, trace.cf, trace.st
    for i in range(len(trace)):
        obj = {
            "i": i,
            "ct": _CT_VALUES[ct[i]].value,
            "cf": _CF_VALUES[cf[i]].value,
            "st": _ST_VALUES[st[i]].value,
            "n": int(trace.n[i]),
            "m": float(trace.m[i]),
            "k": float(trace.k[i]),
            "c": float(trace.c[i]),
            "h": float(trace.h[i]),
            "ch": float(trace.ch[i]),
            "vd": float(trace.vd[i]),
            "h0": float(trace.h0[i]),
            "ca": float(trace.ca[i]),
            "cd": float(trace.cd[i]),
            "w": float(trace.w[i]),
        }
        fh.write(json.dumps(obj, separators=(",", ":")) + "\n")


def write_trace_file(trace: Trace, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        write_trace(trace, fh)
