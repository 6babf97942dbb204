"""Drive the live session service end to end with a scripted client.

Starts the HTTP service in-process, creates a session in the explained
group, answers every trial (waiting out each allocation), completes the
survey, and prints the server-computed summary.  The time allocations
are overridden to one second so the walkthrough stays quick.
"""

import threading
import time

import httpx
import uvicorn

from anchortime.schema import load_json
from anchortime.service import build_service_state, create_app

CONFIG = {
    "schema_version": 1, "kind": "run_config", "seed": 2024,
    "data": {"directory": "out/demo-data", "generate": True},
    "model": {"split_seed": 1, "train_seed": 0},
    "experiment2": {"plan_seed": 11},
    "service": {
        "session_seed": 2024,
        "log_dir": "out/demo-sessions",
        "training_count": 1,
        "trial_limit": 4,
        "allocated_override": 1.0,
    },
}

state = build_service_state(CONFIG)
app = create_app(state)
server = uvicorn.Server(uvicorn.Config(app, host="127.0.0.1", port=8731, log_level="error"))
thread = threading.Thread(target=server.run, daemon=True)
thread.start()
while not server.started:
    time.sleep(0.05)

base = "http://127.0.0.1:8731"
with httpx.Client(base_url=base, timeout=10) as client:
    session = client.post("/sessions", json={"group": "confidence_explained"}).json()
    sid = session["session_id"]
    print(f"session {sid[:8]}... group={session['group']} "
          f"training={session['training_trials']} testing={session['testing_trials']}")

    while True:
        trial = client.get(f"/sessions/{sid}/trial").json()
        phase = trial["phase"]
        if phase == "done":
            break
        if phase == "survey":
            client.post(f"/sessions/{sid}/answer", json={"survey_response": "Frequently"})
            client.post(f"/sessions/{sid}/advance")
            continue
        banner = trial.get("ai")
        shown = f"AI says {banner['prediction']}" if banner else "no AI shown"
        if banner and "confidence_label" in banner:
            shown += f" ({banner['confidence_label']} confidence)"
        print(f"  {phase} trial {trial['index'] + 1}/{trial['total']}: "
              f"{trial['allocated_seconds']}s, {shown}")
        answer = {"decision": "pass", "confidence": "medium", "client_elapsed_ms": 700}
        if phase == "training":
            answer.pop("confidence")
        ack = client.post(f"/sessions/{sid}/answer", json=answer).json()
        if "feedback" in ack:
            print(f"    feedback: correct={ack['feedback']['correct_answer']} "
                  f"ai={ack['feedback']['ai_prediction']}")
        while True:
            advanced = client.post(f"/sessions/{sid}/advance")
            if advanced.status_code == 200:
                break
            remaining = advanced.json()["remaining_seconds"]
            time.sleep(min(remaining + 0.02, 1.2))

    summary = client.get(f"/sessions/{sid}/summary").json()
    print("\nsummary:")
    print(f"  trials: {summary['metrics']['n_trials']}")
    print(f"  accuracy: {summary['metrics']['accuracy']['value']:.3f}")
    agreement = summary["metrics"]["agreement"]
    print(f"  agreement: {agreement['value']:.3f}" if agreement else "  agreement: n/a")
    print(f"  survey: {summary['survey_response']}")

server.should_exit = True
thread.join(timeout=5)
print("\nserver stopped; log at out/demo-sessions/trial-log.jsonl")
