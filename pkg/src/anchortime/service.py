"""Live session service: timed trials over a JSON API.

Sessions walk a forward-only state machine (training, testing, survey,
done).  The server owns all timing: a trial's clock starts when it is
first fetched, answers are accepted once and stored immediately, and
advancing is granted only after the allocated seconds have elapsed on
the server's clock.  Every answer appends one line to the session log;
summaries are recomputed from those records with the same aggregator
the simulation harness uses.
"""

from __future__ import annotations

import argparse
import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .errors import ConfigError
from .harness import ExperimentPlan, SessionPlan, TrialSpec, experiment2_session_plan
from .metrics import GROUPS, TrialRecord, aggregate_records
from .schema import SCHEMA_VERSION, dump_json, load_json
from .workflows import build_model_bundle, resolve_data_paths, training_trials_for_service
from .classifier import TrainingConfig

SURVEY_QUESTION = "How often did you use the entire time available to you in the trials?"
SURVEY_OPTIONS = ("Frequently", "Occasionally", "Rarely", "Never")

DECISION_LABELS = {"pass": 1, "fail": 0}


@dataclass
class ServiceConfig:
    plan: ExperimentPlan
    training: tuple
    groups: tuple = GROUPS
    t_low: float = 25.0
    t_high: float = 10.0
    session_seed: int = 0
    log_dir: Path = Path("out/sessions")
    static_dir: Optional[Path] = None
    idle_expiry_seconds: float = 7200.0
    trial_limit: Optional[int] = None
    allocated_override: Optional[float] = None
    training_count: Optional[int] = None


@dataclass
class _TrialState:
    spec: TrialSpec
    allocated: float
    dispatched_at: Optional[float] = None
    answered_at: Optional[float] = None
    answer: Optional[dict] = None
    advanced: bool = False


@dataclass
class Session:
    session_id: str
    group: str
    plan: SessionPlan
    training: list
    testing: list
    phase: str = "training"
    cursor: int = 0
    survey_response: Optional[str] = None
    created_at: float = 0.0
    updated_at: float = 0.0
    lock: threading.Lock = field(default_factory=threading.Lock)

    def current(self) -> Optional[_TrialState]:
        trials = self.training if self.phase == "training" else self.testing
        if self.phase in ("training", "testing") and self.cursor < len(trials):
            return trials[self.cursor]
        return None


class SessionLog:
    """Append-only line-delimited JSON, one event per line."""

    def __init__(self, path: Path):
        self.path = path
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def append(self, event: dict) -> None:
        line = json.dumps(event, sort_keys=True)
        with self._lock:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(line + "\n")

    def records_for(self, session_id: str) -> list[TrialRecord]:
        records = []
        if not self.path.exists():
            return records
        with open(self.path, "r", encoding="utf-8") as fh:
            for line in fh:
                event = json.loads(line)
                if event.get("event") == "answer" and event["record"]["session_id"] == session_id:
                    records.append(TrialRecord.from_payload(event["record"]))
        return records


class ServiceState:
    SNAPSHOT_INTERVAL = 1.0  # seconds between unforced snapshots

    def __init__(self, config: ServiceConfig, clock=None):
        self.config = config
        self.clock = clock or time.monotonic
        self.sessions: dict[str, Session] = {}
        self._store_lock = threading.Lock()
        self._counter = 0
        self._last_snapshot = None
        self.log = SessionLog(Path(config.log_dir) / "trial-log.jsonl")
        self.snapshot_path = Path(config.log_dir) / "sessions-state.json"

    # -- session construction -------------------------------------------------

    def _derived_seeds(self, explicit_seed: Optional[int]) -> tuple:
        if explicit_seed is not None:
            rng = np.random.default_rng(explicit_seed)
            return rng, int(explicit_seed)
        with self._store_lock:
            counter = self._counter
            self._counter += 1
        seq = np.random.SeedSequence(entropy=self.config.session_seed, spawn_key=(counter,))
        rng = np.random.default_rng(seq)
        return rng, int(seq.generate_state(1)[0])

    def create_session(self, force_group: Optional[str], seed: Optional[int]) -> Session:
        rng, perm_seed = self._derived_seeds(seed)
        groups = self.config.groups
        if force_group is not None:
            if force_group not in groups:
                raise ConfigError(f"unknown group {force_group!r}")
            group = force_group
        else:
            group = groups[int(rng.integers(len(groups)))]
        plan = experiment2_session_plan(
            self.config.plan, group, perm_seed,
            t_low=self.config.t_low, t_high=self.config.t_high,
        )
        order = list(plan.trial_order)
        allocated = list(plan.allocated_seconds)
        if self.config.trial_limit is not None:
            order = order[: self.config.trial_limit]
            allocated = allocated[: self.config.trial_limit]
        if self.config.allocated_override is not None:
            allocated = [self.config.allocated_override] * len(order)
        testing = [
            _TrialState(spec=self.config.plan.trials[i], allocated=a)
            for i, a in zip(order, allocated)
        ]
        training_specs = self.config.training
        if self.config.training_count is not None:
            training_specs = training_specs[: self.config.training_count]
        training = [
            _TrialState(spec=t, allocated=self.config.allocated_override or 25.0)
            for t in training_specs
        ]
        now = self.clock()
        session = Session(
            session_id=secrets.token_urlsafe(16),
            group=group,
            plan=plan,
            training=training,
            testing=testing,
            phase="training" if training else "testing",
            created_at=now,
            updated_at=now,
        )
        with self._store_lock:
            self.sessions[session.session_id] = session
        self.log.append({
            "event": "session_created",
            "schema_version": SCHEMA_VERSION,
            "session_id": session.session_id,
            "group": group,
            "permutation_seed": perm_seed,
            "n_testing": len(testing),
            "n_training": len(training),
        })
        self.snapshot()
        return session

    def snapshot(self, force: bool = False) -> None:
        now = self.clock()
        if not force and self._last_snapshot is not None \
                and now - self._last_snapshot < self.SNAPSHOT_INTERVAL:
            return
        self._last_snapshot = now
        with self._store_lock:
            state = {
                "schema_version": SCHEMA_VERSION,
                "kind": "session_snapshot",
                "sessions": {
                    sid: {
                        "group": s.group,
                        "phase": s.phase,
                        "cursor": s.cursor,
                        "created_at": s.created_at,
                        "updated_at": s.updated_at,
                    }
                    for sid, s in self.sessions.items()
                },
            }
        self.snapshot_path.parent.mkdir(parents=True, exist_ok=True)
        dump_json(state, self.snapshot_path)

    def get_session(self, session_id: str) -> Optional[Session]:
        return self.sessions.get(session_id)

    def expired(self, session: Session) -> bool:
        return (self.clock() - session.updated_at) > self.config.idle_expiry_seconds


def _error(status: int, message: str, **extra) -> JSONResponse:
    body = {"schema_version": SCHEMA_VERSION, "error": message}
    body.update(extra)
    return JSONResponse(body, status_code=status)


def _trial_payload(state: ServiceState, session: Session, trial: _TrialState) -> dict:
    spec = trial.spec
    total = len(session.training) if session.phase == "training" else len(session.testing)
    elapsed = state.clock() - trial.dispatched_at
    payload = {
        "schema_version": SCHEMA_VERSION,
        "phase": session.phase,
        "index": session.cursor,
        "total": total,
        "allocated_seconds": trial.allocated,
        "remaining_seconds": max(trial.allocated - elapsed, 0.0),
        "features": {k: _jsonable(v) for k, v in spec.display_features.items()},
        "answered": trial.answer is not None,
    }
    show_ai = session.phase == "training" or session.group != "human_only"
    if session.phase == "testing" and show_ai:
        payload["ai"] = {"prediction": "pass" if spec.shown_prediction == 1 else "fail"}
        if session.group == "confidence_explained":
            payload["ai"]["confidence_label"] = "high" if spec.confidence_bin == "C_H" else "low"
    if session.phase == "training" and trial.answer is not None:
        payload["feedback"] = {
            "correct_answer": "pass" if spec.true_label == 1 else "fail",
            "ai_prediction": "pass" if spec.shown_prediction == 1 else "fail",
        }
    return payload


def _jsonable(value):
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def create_app(state: ServiceState) -> FastAPI:
    app = FastAPI(title="anchortime session service", version=str(SCHEMA_VERSION))
    # the trial UI may be served from a different origin during development
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )

    def _resolve(session_id: str):
        session = state.get_session(session_id)
        if session is None:
            return None, _error(404, "unknown session")
        if state.expired(session):
            return None, _error(410, "session expired after inactivity")
        return session, None

    @app.get("/healthz")
    def healthz():
        return {"schema_version": SCHEMA_VERSION, "status": "ok",
                "sessions": len(state.sessions)}

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        try:
            body = await request.json()
        except Exception:
            body = {}
        force_group = body.get("group")
        seed = body.get("seed")
        try:
            session = state.create_session(force_group, seed)
        except ConfigError as exc:
            return _error(422, str(exc))
        return {
            "schema_version": SCHEMA_VERSION,
            "session_id": session.session_id,
            "group": session.group,
            "phase": session.phase,
            "training_trials": len(session.training),
            "testing_trials": len(session.testing),
        }

    @app.get("/sessions/{session_id}/trial")
    def next_trial(session_id: str):
        session, err = _resolve(session_id)
        if err:
            return err
        with session.lock:
            session.updated_at = state.clock()
            if session.phase == "survey":
                return {
                    "schema_version": SCHEMA_VERSION,
                    "phase": "survey",
                    "question": SURVEY_QUESTION,
                    "options": list(SURVEY_OPTIONS),
                    "answered": session.survey_response is not None,
                }
            if session.phase == "done":
                return {"schema_version": SCHEMA_VERSION, "phase": "done"}
            trial = session.current()
            if trial is None:
                return _error(409, "no current trial")
            if trial.dispatched_at is None:
                trial.dispatched_at = state.clock()
            return _trial_payload(state, session, trial)

    @app.post("/sessions/{session_id}/answer")
    async def submit_answer(session_id: str, request: Request):
        session, err = _resolve(session_id)
        if err:
            return err
        try:
            body = await request.json()
        except Exception:
            return _error(422, "malformed JSON body")
        with session.lock:
            session.updated_at = state.clock()
            if session.phase == "survey":
                if session.survey_response is not None:
                    return _error(409, "survey already answered")
                response = body.get("survey_response")
                if response not in SURVEY_OPTIONS:
                    return _error(422, f"survey_response must be one of {list(SURVEY_OPTIONS)}")
                session.survey_response = response
                session.phase = "done"
                state.log.append({
                    "event": "survey",
                    "session_id": session.session_id,
                    "response": response,
                })
                state.snapshot(force=True)
                return {"schema_version": SCHEMA_VERSION, "accepted": True, "phase": "done"}
            if session.phase == "done":
                return _error(409, "session is complete")
            trial = session.current()
            if trial is None or trial.dispatched_at is None:
                return _error(409, "no dispatched trial to answer")
            if trial.answer is not None:
                return _error(409, "answer already accepted for this trial")
            decision = body.get("decision")
            if decision not in DECISION_LABELS:
                return _error(422, "decision must be 'pass' or 'fail'")
            confidence = body.get("confidence")
            if session.phase == "testing" and confidence not in ("low", "medium", "high"):
                return _error(422, "testing answers need confidence low/medium/high")
            elapsed = state.clock() - trial.dispatched_at
            trial.answer = {
                "decision": decision,
                "confidence": confidence or "none",
                "client_elapsed_ms": body.get("client_elapsed_ms"),
            }
            trial.answered_at = state.clock()
            payload = {"schema_version": SCHEMA_VERSION, "accepted": True,
                       "elapsed_seconds": elapsed}
            spec = trial.spec
            if session.phase == "testing":
                label = DECISION_LABELS[decision]
                record = TrialRecord(
                    session_id=session.session_id,
                    trial_id=spec.trial_id,
                    group=session.group,
                    allocated_seconds=trial.allocated,
                    decision=label,
                    correct=label == spec.true_label,
                    agree=None if session.group == "human_only"
                    else label == spec.shown_prediction,
                    elapsed_seconds=elapsed,
                    self_confidence=confidence,
                    confidence_bin=spec.confidence_bin,
                    shown_correct=spec.shown_correct,
                    probe=spec.probe,
                )
                state.log.append({
                    "event": "answer",
                    "record": record.to_payload(),
                    "client_elapsed_ms": body.get("client_elapsed_ms"),
                })
            else:
                payload["feedback"] = {
                    "correct_answer": "pass" if spec.true_label == 1 else "fail",
                    "ai_prediction": "pass" if spec.shown_prediction == 1 else "fail",
                }
            return payload

    @app.post("/sessions/{session_id}/advance")
    def advance(session_id: str):
        session, err = _resolve(session_id)
        if err:
            return err
        with session.lock:
            session.updated_at = state.clock()
            if session.phase == "survey":
                if session.survey_response is None:
                    return _error(409, "survey not answered yet")
                return {"schema_version": SCHEMA_VERSION, "advanced": True, "phase": "done"}
            if session.phase == "done":
                return {"schema_version": SCHEMA_VERSION, "advanced": False, "phase": "done"}
            trial = session.current()
            if trial is None or trial.dispatched_at is None:
                return _error(409, "no dispatched trial to advance")
            if trial.answer is None:
                return _error(409, "trial not answered yet")
            elapsed = state.clock() - trial.dispatched_at
            if elapsed < trial.allocated:
                return _error(
                    425, "allocated time has not elapsed",
                    remaining_seconds=trial.allocated - elapsed,
                )
            trial.advanced = True
            state.log.append({
                "event": "advance",
                "session_id": session.session_id,
                "trial_id": trial.spec.trial_id,
                "phase": session.phase,
                "allocated_seconds": trial.allocated,
                "elapsed_seconds": elapsed,
            })
            session.cursor += 1
            trials = session.training if session.phase == "training" else session.testing
            if session.cursor >= len(trials):
                if session.phase == "training":
                    session.phase = "testing"
                else:
                    session.phase = "survey"
                session.cursor = 0
                state.snapshot(force=True)
            return {
                "schema_version": SCHEMA_VERSION,
                "advanced": True,
                "phase": session.phase,
                "index": session.cursor,
            }

    @app.get("/sessions/{session_id}/summary")
    def session_summary(session_id: str):
        session, err = _resolve(session_id)
        if err:
            return err
        if session.phase != "done":
            return _error(409, f"session is in phase {session.phase!r}, not done")
        records = state.log.records_for(session.session_id)
        summary = aggregate_records(records)
        return {
            "schema_version": SCHEMA_VERSION,
            "kind": "session_summary",
            "session_id": session.session_id,
            "group": session.group,
            "survey_response": session.survey_response,
            "metrics": summary,
        }

    static_dir = state.config.static_dir
    if static_dir is not None and Path(static_dir).exists():
        app.mount("/app", StaticFiles(directory=str(static_dir), html=True), name="app")
    return app


def build_service_state(config: dict, clock=None) -> ServiceState:
    """Assemble plans and models from a run config's service section."""
    from .harness import build_experiment2_plan

    service_cfg = config.get("service", {})
    data_cfg = config.get("data", {})
    model_cfg = config.get("model", {})
    paths = resolve_data_paths(
        data_cfg.get("directory", "data"),
        generate=data_cfg.get("generate", True),
        generator_seed=data_cfg.get("generator_seed", 20210607),
    )
    bundle = build_model_bundle(
        paths,
        split_seed=model_cfg.get("split_seed", 1),
        train_seed=model_cfg.get("train_seed", 0),
        pass_threshold=model_cfg.get("pass_threshold", 10),
        training=TrainingConfig(
            learning_rate=model_cfg.get("learning_rate", 0.5),
            l2=model_cfg.get("l2", 1e-3),
            epochs=model_cfg.get("epochs", 5000),
            tolerance=model_cfg.get("tolerance", 1e-6),
        ),
    )
    exp2 = config.get("experiment2", {})
    plan = build_experiment2_plan(
        bundle.model7, bundle.dataset7.test_records(), list(bundle.dataset7.y_test),
        bundle.selected_features, seed=exp2.get("plan_seed", 11),
    )
    training = training_trials_for_service(
        bundle, service_cfg.get("assistant", "model7"), service_cfg.get("training_seed", 17)
    )
    static = service_cfg.get("static_dir")
    service = ServiceConfig(
        plan=plan,
        training=training,
        groups=tuple(service_cfg.get("groups", GROUPS)),
        t_low=exp2.get("t_low", 25.0),
        t_high=exp2.get("t_high", 10.0),
        session_seed=service_cfg.get("session_seed", config.get("seed", 0)),
        log_dir=Path(service_cfg.get("log_dir", "out/sessions")),
        static_dir=Path(static) if static else None,
        idle_expiry_seconds=service_cfg.get("idle_expiry_seconds", 7200.0),
        trial_limit=service_cfg.get("trial_limit"),
        allocated_override=service_cfg.get("allocated_override"),
        training_count=service_cfg.get("training_count"),
    )
    return ServiceState(service, clock=clock)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="anchortime-service",
        description="Serve live timed sessions over HTTP.",
    )
    parser.add_argument("--config", required=True, help="run config JSON with a service section")
    parser.add_argument("--port", type=int, default=8000)
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args(argv)
    config = load_json(args.config)
    state = build_service_state(config)
    app = create_app(state)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
