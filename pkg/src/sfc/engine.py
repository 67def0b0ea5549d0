"""WIP tracking engine: routes build tickets through their work-center
sequences from deduplicated reader events.

Presence semantics: a reader only sees its input-buffer circle, so the
engine infers operation progress from appearance and disappearance.
A ticket read at the work center of its next pending step is Queued
there; once a later event forces the frontier forward, the step is
marked Started and Completed in one stroke (the lot left the buffer and
the work happened before it surfaced downstream). Advancement is
forward-only: steps bypassed by a read further down the route are marked
Skipped rather than blocking the ticket.

All mutations are serialized by one internal lock, use caller-provided
event time (never the wall clock), and append to the journal so a
restart replays to the identical state.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass, field

from . import tag_codec
from .dispatch import DispatchList, OrderPlan, Route, numeric_id
from .eventlog import EventLog, iter_records
from .llrp import ReadEvent
from .tag_codec import BuildTicketData, OrderKind, ProductTagData

DEFAULT_PRESENCE_TIMEOUT_S = 10.0
DEFAULT_DELAY_GRACE_S = 300.0


class EngineError(Exception):
    pass


class UnknownOrder(EngineError):
    pass


class UnknownTicket(EngineError):
    pass


class UnknownDataPoint(EngineError):
    pass


class NotOnRoute(EngineError):
    pass


class EmptyReason(EngineError):
    pass


class NotProductTag(EngineError):
    pass


class InFlightConflict(EngineError):
    def __init__(self, tickets: list[str]):
        super().__init__(f"in-flight tickets changed: {', '.join(tickets)}")
        self.tickets = tickets


class TransitionKind(enum.Enum):
    ARRIVED = "Arrived"
    STARTED_OP = "StartedOp"
    COMPLETED_OP = "CompletedOp"
    SKIPPED = "Skipped"
    OUT_OF_ROUTE = "OutOfRoute"
    STALE_READ = "StaleRead"
    MANUAL_OVERRIDE = "ManualOverride"
    EXITED = "Exited"


class StepStatus(enum.Enum):
    PENDING = "Pending"
    QUEUED = "Queued"
    STARTED = "Started"
    DONE = "Done"


@dataclass(frozen=True)
class WipTransition:
    kind: TransitionKind
    at_us: int
    ticket_code: str | None = None
    ticket_id: int | None = None
    seq: int | None = None
    data_point_id: str | None = None
    detail: str = ""

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "at_us": self.at_us,
                "ticket": self.ticket_code, "ticket_id": self.ticket_id,
                "seq": self.seq, "data_point": self.data_point_id,
                "detail": self.detail}

    @classmethod
    def from_dict(cls, data: dict) -> "WipTransition":
        return cls(TransitionKind(data["kind"]), data["at_us"],
                   data["ticket"], data["ticket_id"], data["seq"],
                   data["data_point"], data.get("detail", ""))


@dataclass(frozen=True)
class DelayAlert:
    ticket_code: str
    seq: int
    kind: str  # "LateStart" | "LateFinish"
    planned_us: int
    observed_or_now_us: int
    raised_at_us: int

    def to_dict(self) -> dict:
        return {"ticket": self.ticket_code, "seq": self.seq, "kind": self.kind,
                "planned_us": self.planned_us,
                "observed_or_now_us": self.observed_or_now_us,
                "raised_at_us": self.raised_at_us}

    @classmethod
    def from_dict(cls, data: dict) -> "DelayAlert":
        return cls(data["ticket"], data["seq"], data["kind"],
                   data["planned_us"], data["observed_or_now_us"],
                   data["raised_at_us"])


@dataclass(frozen=True)
class FinishedGoodsRecord:
    order_code: str
    product_code: str
    serial: int
    exited_at_us: int

    def to_dict(self) -> dict:
        return {"order": self.order_code, "product": self.product_code,
                "serial": self.serial, "exited_at_us": self.exited_at_us}

    @classmethod
    def from_dict(cls, data: dict) -> "FinishedGoodsRecord":
        return cls(data["order"], data["product"], data["serial"],
                   data["exited_at_us"])


@dataclass(frozen=True)
class ImportSummary:
    orders: int
    tickets: int
    routes: int


@dataclass
class _StepState:
    seq: int
    work_center_id: str
    planned_start_us: int
    planned_end_us: int
    status: StepStatus = StepStatus.PENDING
    skipped: bool = False
    last_seen_us: int | None = None
    arrived_us: int | None = None
    started_us: int | None = None
    completed_us: int | None = None


@dataclass
class _TicketState:
    ticket_code: str
    ticket_id: int
    order_code: str
    route_code: str
    steps: list[_StepState]
    exited_us: int | None = None

    def frontier_index(self) -> int | None:
        for idx, st in enumerate(self.steps):
            if st.status in (StepStatus.QUEUED, StepStatus.STARTED):
                return idx
        return None

    def current_seq(self) -> int:
        last = 0
        for st in self.steps:
            if st.status is not StepStatus.PENDING or st.skipped:
                last = st.seq
        return last

    def all_done(self) -> bool:
        return all(st.status is StepStatus.DONE or st.skipped
                   for st in self.steps)

    def has_activity(self) -> bool:
        return self.exited_us is not None or any(
            st.status is not StepStatus.PENDING or st.skipped
            for st in self.steps)

    def plan_key(self, order: OrderPlan, route: Route):
        return (order.order_code, order.order_type, order.product_code,
                order.quantity, route)


def _fresh_ticket(code: str, order: OrderPlan, route: Route) -> _TicketState:
    steps = [_StepState(s.seq, s.work_center_id, s.planned_start_us,
                        s.planned_end_us) for s in route.steps]
    return _TicketState(code, numeric_id(code), order.order_code,
                        route.route_code, steps)


class SfcEngine:
    """Single plant-wide tracker; see module docstring for semantics."""

    def __init__(self, data_points: dict[str, str], *,
                 presence_timeout_s: float = DEFAULT_PRESENCE_TIMEOUT_S,
                 delay_grace_s: float = DEFAULT_DELAY_GRACE_S,
                 exit_data_point_id: str | None = None,
                 log_path=None) -> None:
        self._lock = threading.RLock()
        self._dp_to_wc = dict(data_points)
        self.presence_timeout_us = int(presence_timeout_s * 1_000_000)
        self.delay_grace_us = int(delay_grace_s * 1_000_000)
        self.exit_data_point_id = exit_data_point_id
        if exit_data_point_id is not None and \
                exit_data_point_id not in self._dp_to_wc:
            raise UnknownDataPoint(exit_data_point_id)

        self._dispatch: DispatchList | None = None
        self._orders: dict[str, OrderPlan] = {}
        self._routes: dict[str, Route] = {}
        self._order_by_ref: dict[tuple[str, int], str] = {}
        self._tickets: dict[str, _TicketState] = {}
        self._ticket_by_id: dict[int, str] = {}
        self.history: list[WipTransition] = []
        self.alerts: list[DelayAlert] = []
        self._alert_keys: set[tuple[str, int, str]] = set()
        self.finished: list[FinishedGoodsRecord] = []
        self._exit_keys: dict[tuple[str, int, int], FinishedGoodsRecord] = {}
        self.quarantine: list[tuple[str, str]] = []
        self._watermark_us = 0

        self._log: EventLog | None = None
        if log_path is not None:
            self._replaying = True
            try:
                for kind, payload in iter_records(log_path):
                    self._fold_record(kind, payload)
            finally:
                self._replaying = False
            self._log = EventLog(log_path)
        else:
            self._replaying = False

    # --- journal ---------------------------------------------------------

    def _record(self, kind: str, payload: dict) -> None:
        if self._log is not None and not self._replaying:
            self._log.append(kind, payload)

    def _fold_record(self, kind: str, payload: dict) -> None:
        if kind == "dispatch":
            self._register_dispatch(_dispatch_from_dict(payload))
        elif kind == "transition":
            self._fold_transition(WipTransition.from_dict(payload))
        elif kind == "alert":
            alert = DelayAlert.from_dict(payload)
            self.alerts.append(alert)
            self._alert_keys.add((alert.ticket_code, alert.seq, alert.kind))
        elif kind == "finished":
            record = FinishedGoodsRecord.from_dict(payload)
            self.finished.append(record)
            self._exit_keys[(record.order_code, numeric_id(record.product_code),
                             record.serial)] = record

    def _fold_transition(self, t: WipTransition) -> None:
        self.history.append(t)
        self._watermark_us = max(self._watermark_us, t.at_us)
        state = self._tickets.get(t.ticket_code) if t.ticket_code else None
        if state is None:
            return
        if t.kind is TransitionKind.EXITED:
            state.exited_us = t.at_us
            return
        if t.seq is None:
            return
        st = state.steps[t.seq - 1]
        if t.kind in (TransitionKind.ARRIVED, TransitionKind.MANUAL_OVERRIDE):
            st.status = StepStatus.QUEUED
            st.arrived_us = st.last_seen_us = t.at_us
        elif t.kind is TransitionKind.STARTED_OP:
            st.status = StepStatus.STARTED
            st.started_us = t.at_us
        elif t.kind is TransitionKind.COMPLETED_OP:
            st.status = StepStatus.DONE
            st.completed_us = t.at_us
        elif t.kind is TransitionKind.SKIPPED:
            st.skipped = True

    def _emit(self, transitions: list[WipTransition]) -> list[WipTransition]:
        for t in transitions:
            self.history.append(t)
            self._watermark_us = max(self._watermark_us, t.at_us)
            self._record("transition", t.to_dict())
        return transitions

    # --- dispatch import ---------------------------------------------------

    def _register_dispatch(self, dispatch: DispatchList) -> ImportSummary:
        dispatch.validate()
        keep: dict[str, _TicketState] = {}
        conflicts: list[str] = []
        new_plans: dict[str, tuple] = {}
        for order in dispatch.orders:
            route = dispatch.route(order.route_code)
            for code in order.ticket_codes:
                new_plans[code] = (order, route)
        for code, state in self._tickets.items():
            if not state.has_activity():
                continue
            plan = new_plans.get(code)
            if plan is None:
                conflicts.append(code)
                continue
            order, route = plan
            old_order = self._orders.get(state.order_code)
            old_route = self._routes.get(state.route_code)
            if (old_order is None or old_route is None or
                    state.plan_key(order, route) !=
                    state.plan_key(old_order, old_route)):
                conflicts.append(code)
            else:
                keep[code] = state
        if conflicts:
            raise InFlightConflict(sorted(conflicts))

        self._dispatch = dispatch
        self._routes = {r.route_code: r for r in dispatch.routes}
        self._orders = {o.order_code: o for o in dispatch.orders}
        self._order_by_ref = {}
        self._tickets = {}
        self._ticket_by_id = {}
        ticket_count = 0
        for order in dispatch.orders:
            ref = (order.order_type.value, numeric_id(order.order_code))
            self._order_by_ref[ref] = order.order_code
            route = self._routes[order.route_code]
            for code in order.ticket_codes:
                state = keep.get(code) or _fresh_ticket(code, order, route)
                self._tickets[code] = state
                self._ticket_by_id[state.ticket_id] = code
                ticket_count += 1
        return ImportSummary(len(dispatch.orders), ticket_count,
                             len(dispatch.routes))

    def import_dispatch(self, dispatch: DispatchList) -> ImportSummary:
        """Register the daily plan; see DispatchList invariants.

        Re-import keeps in-flight tickets whose plan is unchanged and
        rejects the import outright if any in-flight ticket's plan
        changed or disappeared.
        """
        with self._lock:
            summary = self._register_dispatch(dispatch)
            self._record("dispatch", _dispatch_to_dict(dispatch))
            return summary

    # --- event intake --------------------------------------------------------

    def _decode(self, ev: ReadEvent):
        try:
            return tag_codec.decode_tag(ev.epc)
        except tag_codec.TagCodecError as exc:
            self.quarantine.append((ev.epc.hex(), f"{type(exc).__name__}: {exc}"))
            return None

    def apply_read(self, ev: ReadEvent, now_us: int) -> list[WipTransition]:
        """Advance a ticket's state machine from one reader observation."""
        with self._lock:
            wc = self._dp_to_wc.get(ev.data_point_id)
            if wc is None:
                raise UnknownDataPoint(str(ev.data_point_id))
            decoded = self._decode(ev)
            if decoded is None:
                return []
            at = ev.first_seen_utc_us
            self._watermark_us = max(self._watermark_us, now_us)
            if isinstance(decoded, ProductTagData):
                return self._emit([WipTransition(
                    TransitionKind.OUT_OF_ROUTE, at,
                    data_point_id=ev.data_point_id,
                    detail=f"product tag serial {decoded.serial} away from "
                           f"exit gate")])
            code = self._ticket_by_id.get(decoded.ticket_id)
            if code is None:
                return self._emit([WipTransition(
                    TransitionKind.OUT_OF_ROUTE, at,
                    ticket_id=decoded.ticket_id,
                    data_point_id=ev.data_point_id,
                    detail="unregistered ticket")])
            state = self._tickets[code]
            route = self._routes[state.route_code]
            step = route.step_for_work_center(wc)
            if step is None:
                return self._emit([WipTransition(
                    TransitionKind.OUT_OF_ROUTE, at, code, state.ticket_id,
                    data_point_id=ev.data_point_id,
                    detail=f"work center {wc} not on route "
                           f"{state.route_code}")])
            idx = step.seq - 1
            st = state.steps[idx]
            if st.status is StepStatus.DONE or st.skipped:
                return self._emit([WipTransition(
                    TransitionKind.STALE_READ, at, code, state.ticket_id,
                    seq=step.seq, data_point_id=ev.data_point_id,
                    detail="step already left behind")])
            if st.status in (StepStatus.QUEUED, StepStatus.STARTED):
                st.last_seen_us = at  # repeat read: refresh presence only
                return []
            return self._emit(self._advance(
                state, idx, at, ev.data_point_id, TransitionKind.ARRIVED, ""))

    def _advance(self, state: _TicketState, target: int, at: int,
                 dp_id: str | None, final_kind: TransitionKind,
                 detail: str) -> list[WipTransition]:
        out: list[WipTransition] = []
        frontier = state.frontier_index()
        if frontier is not None and frontier < target:
            fs = state.steps[frontier]
            if fs.status is StepStatus.QUEUED:
                fs.status = StepStatus.STARTED
                fs.started_us = at
                out.append(WipTransition(
                    TransitionKind.STARTED_OP, at, state.ticket_code,
                    state.ticket_id, fs.seq, dp_id,
                    "left the input buffer"))
            fs.status = StepStatus.DONE
            fs.completed_us = at
            out.append(WipTransition(
                TransitionKind.COMPLETED_OP, at, state.ticket_code,
                state.ticket_id, fs.seq, dp_id,
                "completed before next arrival"))
        for st in state.steps[:target]:
            if st.status is StepStatus.PENDING and not st.skipped:
                st.skipped = True
                out.append(WipTransition(
                    TransitionKind.SKIPPED, at, state.ticket_code,
                    state.ticket_id, st.seq, dp_id, "no read seen"))
        target_state = state.steps[target]
        target_state.status = StepStatus.QUEUED
        target_state.arrived_us = target_state.last_seen_us = at
        out.append(WipTransition(final_kind, at, state.ticket_code,
                                 state.ticket_id, target_state.seq, dp_id,
                                 detail))
        return out

    def record_exit(self, ev: ReadEvent, now_us: int) -> FinishedGoodsRecord:
        """Book a finished product read at the exit gate."""
        with self._lock:
            if self.exit_data_point_id is None or \
                    ev.data_point_id != self.exit_data_point_id:
                raise UnknownDataPoint(
                    f"{ev.data_point_id} is not the exit gate")
            decoded = self._decode(ev)
            if decoded is None:
                raise NotProductTag("undecodable tag at exit gate")
            at = ev.first_seen_utc_us
            self._watermark_us = max(self._watermark_us, now_us)
            if isinstance(decoded, BuildTicketData):
                code = self._ticket_by_id.get(decoded.ticket_id)
                self._emit([WipTransition(
                    TransitionKind.OUT_OF_ROUTE, at, code, decoded.ticket_id,
                    data_point_id=ev.data_point_id,
                    detail="build ticket at exit gate")])
                raise NotProductTag(f"build ticket {decoded.ticket_id} "
                                    f"read at exit gate")
            ref = (decoded.order.kind.value, decoded.order.order_id)
            order_code = self._order_by_ref.get(ref)
            order = self._orders.get(order_code) if order_code else None
            if order is None or order.product_id != decoded.product_id:
                self._emit([WipTransition(
                    TransitionKind.OUT_OF_ROUTE, at,
                    data_point_id=ev.data_point_id,
                    detail=f"unregistered product tag serial "
                           f"{decoded.serial}")])
                raise UnknownOrder(f"no order for {ref} product "
                                   f"{decoded.product_id}")
            key = (order_code, decoded.product_id, decoded.serial)
            existing = self._exit_keys.get(key)
            if existing is not None:
                return existing
            transitions: list[WipTransition] = []
            for code in order.ticket_codes:
                state = self._tickets[code]
                frontier = state.frontier_index()
                if frontier is not None and frontier == len(state.steps) - 1:
                    fs = state.steps[frontier]
                    if fs.status is StepStatus.QUEUED:
                        fs.status = StepStatus.STARTED
                        fs.started_us = at
                        transitions.append(WipTransition(
                            TransitionKind.STARTED_OP, at, code,
                            state.ticket_id, fs.seq, ev.data_point_id,
                            "left the input buffer"))
                    fs.status = StepStatus.DONE
                    fs.completed_us = at
                    transitions.append(WipTransition(
                        TransitionKind.COMPLETED_OP, at, code,
                        state.ticket_id, fs.seq, ev.data_point_id,
                        "completed at product exit"))
                if state.all_done() and state.exited_us is None:
                    state.exited_us = at
                    transitions.append(WipTransition(
                        TransitionKind.EXITED, at, code, state.ticket_id,
                        data_point_id=ev.data_point_id,
                        detail=f"product serial {decoded.serial}"))
            self._emit(transitions)
            record = FinishedGoodsRecord(order_code, order.product_code,
                                         decoded.serial, at)
            self.finished.append(record)
            self._exit_keys[key] = record
            self._record("finished", record.to_dict())
            return record

    def ingest(self, ev: ReadEvent, now_us: int) -> list[WipTransition]:
        """Route one read to the exit-gate or WIP path; anomalies become
        OutOfRoute/quarantine entries instead of raising."""
        with self._lock:
            mark = len(self.history)
            if ev.data_point_id is not None and \
                    ev.data_point_id == self.exit_data_point_id:
                try:
                    self.record_exit(ev, now_us)
                except (NotProductTag, UnknownOrder):
                    pass
                return self.history[mark:]
            return self.apply_read(ev, now_us)

    # --- operator actions ------------------------------------------------

    def manual_override(self, ticket_code: str, work_center_id: str,
                        operator: str, reason: str,
                        now_us: int) -> WipTransition:
        """Advance a ticket by hand; always leaves an audit transition."""
        with self._lock:
            if not reason or not reason.strip():
                raise EmptyReason("override reason must not be empty")
            if not operator or not operator.strip():
                raise EmptyReason("operator name must not be empty")
            state = self._tickets.get(ticket_code)
            if state is None:
                raise UnknownTicket(ticket_code)
            route = self._routes[state.route_code]
            step = route.step_for_work_center(work_center_id)
            if step is None:
                raise NotOnRoute(f"{work_center_id} not on route "
                                 f"{state.route_code}")
            self._watermark_us = max(self._watermark_us, now_us)
            detail = f"operator={operator.strip()}; reason={reason.strip()}"
            idx = step.seq - 1
            st = state.steps[idx]
            if st.status is not StepStatus.PENDING or st.skipped:
                audit = WipTransition(
                    TransitionKind.MANUAL_OVERRIDE, now_us, ticket_code,
                    state.ticket_id, step.seq, None,
                    detail + "; no state change (step already reached)")
                self._emit([audit])
                return audit
            out = self._advance(state, idx, now_us, None,
                                TransitionKind.MANUAL_OVERRIDE, detail)
            self._emit(out)
            return out[-1]

    # --- queries -----------------------------------------------------------

    @property
    def watermark_us(self) -> int:
        return self._watermark_us

    @property
    def plant_id(self) -> str | None:
        return self._dispatch.plant_id if self._dispatch else None

    @property
    def current_dispatch(self) -> DispatchList | None:
        return self._dispatch

    def buffer_contents(self, data_point_id: str, now_us: int) -> list[dict]:
        """Tickets currently queued in a data point's input buffer."""
        with self._lock:
            wc = self._dp_to_wc.get(data_point_id)
            if wc is None:
                raise UnknownDataPoint(str(data_point_id))
            rows = []
            for state in self._tickets.values():
                frontier = state.frontier_index()
                if frontier is None:
                    continue
                st = state.steps[frontier]
                if st.work_center_id != wc or \
                        st.status is not StepStatus.QUEUED:
                    continue
                if st.last_seen_us is None or \
                        now_us - st.last_seen_us > self.presence_timeout_us:
                    continue
                order = self._orders[state.order_code]
                rows.append({
                    "ticket": state.ticket_code,
                    "order": state.order_code,
                    "product": order.product_code,
                    "seq": st.seq,
                    "workCenter": wc,
                    "queued_since_us": st.arrived_us,
                    "delayed": now_us > st.planned_start_us,
                })
            rows.sort(key=lambda r: (r["queued_since_us"], r["ticket"]))
            return rows

    def order_status(self, order_code: str) -> dict:
        with self._lock:
            order = self._orders.get(order_code)
            if order is None:
                raise UnknownOrder(order_code)
            tickets = []
            for code in order.ticket_codes:
                state = self._tickets[code]
                if state.exited_us is not None:
                    phase = "exited"
                elif state.all_done():
                    phase = "completed"
                elif state.current_seq() == 0:
                    phase = "not-started"
                else:
                    phase = "in-progress"
                tickets.append({
                    "ticket": code,
                    "ticket_id": state.ticket_id,
                    "current_seq": state.current_seq(),
                    "state": phase,
                    "exited_at_us": state.exited_us,
                    "steps": [{
                        "seq": st.seq,
                        "workCenter": st.work_center_id,
                        "plannedStart_us": st.planned_start_us,
                        "plannedEnd_us": st.planned_end_us,
                        "status": st.status.value,
                        "skipped": st.skipped,
                        "arrived_us": st.arrived_us,
                        "started_us": st.started_us,
                        "completed_us": st.completed_us,
                    } for st in state.steps],
                    "alerts": [a.to_dict() for a in self.alerts
                               if a.ticket_code == code],
                })
            return {
                "order": order.order_code,
                "type": order.order_type.value,
                "product": order.product_code,
                "quantity": order.quantity,
                "route": order.route_code,
                "tickets": tickets,
            }

    def orders_summary(self) -> list[dict]:
        with self._lock:
            out = []
            for order in self._orders.values():
                states = [self._tickets[c] for c in order.ticket_codes]
                out.append({
                    "order": order.order_code,
                    "type": order.order_type.value,
                    "product": order.product_code,
                    "quantity": order.quantity,
                    "route": order.route_code,
                    "tickets": len(states),
                    "completed": sum(1 for s in states if s.all_done()),
                    "exited": sum(1 for s in states
                                  if s.exited_us is not None),
                    "alerts": sum(1 for a in self.alerts
                                  if a.ticket_code in order.ticket_codes),
                })
            out.sort(key=lambda o: o["order"])
            return out

    def data_points(self) -> dict[str, str]:
        return dict(self._dp_to_wc)

    # --- delay detection ---------------------------------------------------

    def detect_delays(self, now_us: int) -> list[DelayAlert]:
        """Raise LateStart/LateFinish alerts, each at most once ever.

        A Queued step whose last read is older than the presence timeout
        has left the buffer and is treated as started, so it can only be
        late to finish.
        """
        with self._lock:
            self._watermark_us = max(self._watermark_us, now_us)
            new: list[DelayAlert] = []
            for state in self._tickets.values():
                for st in state.steps:
                    waiting = st.status is StepStatus.PENDING or (
                        st.status is StepStatus.QUEUED and
                        st.last_seen_us is not None and
                        now_us - st.last_seen_us <= self.presence_timeout_us)
                    if waiting and not st.skipped and \
                            now_us > st.planned_start_us + self.delay_grace_us:
                        new.extend(self._raise_alert(
                            state, st, "LateStart", st.planned_start_us,
                            now_us))
                    if st.status is not StepStatus.DONE and \
                            now_us > st.planned_end_us + self.delay_grace_us:
                        new.extend(self._raise_alert(
                            state, st, "LateFinish", st.planned_end_us,
                            now_us))
            return new

    def _raise_alert(self, state: _TicketState, st: _StepState, kind: str,
                     planned_us: int, now_us: int) -> list[DelayAlert]:
        key = (state.ticket_code, st.seq, kind)
        if key in self._alert_keys:
            return []
        self._alert_keys.add(key)
        alert = DelayAlert(state.ticket_code, st.seq, kind, planned_us,
                           now_us, now_us)
        self.alerts.append(alert)
        self._record("alert", alert.to_dict())
        return [alert]


# --- dispatch (de)serialization for the journal -------------------------------

def _dispatch_to_dict(d: DispatchList) -> dict:
    return {
        "date": d.dispatch_date,
        "plant": d.plant_id,
        "routes": [{
            "route": r.route_code,
            "steps": [{"seq": s.seq, "workCenter": s.work_center_id,
                       "plannedStart_us": s.planned_start_us,
                       "plannedEnd_us": s.planned_end_us}
                      for s in r.steps],
        } for r in d.routes],
        "orders": [{
            "order": o.order_code,
            "type": o.order_type.value,
            "product": o.product_code,
            "quantity": o.quantity,
            "route": o.route_code,
            "tickets": list(o.ticket_codes),
        } for o in d.orders],
    }


def _dispatch_from_dict(data: dict) -> DispatchList:
    from .dispatch import RouteStep
    routes = tuple(
        Route(r["route"], tuple(
            RouteStep(s["seq"], s["workCenter"], s["plannedStart_us"],
                      s["plannedEnd_us"]) for s in r["steps"]))
        for r in data["routes"])
    orders = tuple(
        OrderPlan(o["order"], OrderKind(o["type"]), o["product"],
                  o["quantity"], o["route"], tuple(o["tickets"]))
        for o in data["orders"])
    return DispatchList(data["date"], data["plant"], routes, orders)
