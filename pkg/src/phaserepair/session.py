"""Listening-test sessions: blinded manifests, response records, aggregation.

The operator writes a session file that names audio files per condition
(e.g. "repaired" vs "baseline"). Everything sent to a participant is
blinded: stimuli are addressed by opaque tokens, and per-participant
randomization (A/B slot swapping, MOS stimulus order) is derived from a
stable hash so offline aggregation can reconstruct the assignment
without any server state.

Responses are stored as one JSON object per line, append-only.
Re-submission of the same (participant, trial[, stimulus]) key
overwrites the earlier answer at aggregation time; practice trials are
excluded from aggregates.
"""

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Stimulus:
    condition: str
    path: str


@dataclass(frozen=True)
class AbTrial:
    id: str
    a: Stimulus
    b: Stimulus
    is_practice: bool = False


@dataclass(frozen=True)
class MosTrial:
    id: str
    reference: str
    stimuli: tuple
    is_practice: bool = False


@dataclass(frozen=True)
class SessionConfig:
    """Server-side session description, including condition labels."""

    id: str
    protocol: str  # "AB" | "MOS"
    trials: tuple
    randomize: bool = True
    participant_fields: tuple = ("name",)
    root: Path = Path(".")

    def __post_init__(self):
        if self.protocol not in ("AB", "MOS"):
            raise ValueError(f"protocol must be AB or MOS, got {self.protocol!r}")
        if not self.trials:
            raise ValueError("session has no trials")
        if self.protocol == "AB":
            flags = [t.is_practice for t in self.trials]
            if not any(flags):
                raise ValueError("AB sessions need at least one practice trial")
            if not all(flags[i] >= flags[i + 1] for i in range(len(flags) - 1)):
                raise ValueError("practice trials must precede evaluation trials")
            if all(flags):
                raise ValueError("AB sessions need at least one evaluation trial")


def load_session(path) -> SessionConfig:
    """Parse a session JSON file (audio paths resolved against its dir)."""
    path = Path(path)
    raw = json.loads(path.read_text())
    protocol = raw.get("protocol", "AB")
    trials = []
    for t in raw.get("trials", []):
        if protocol == "AB":
            trials.append(
                AbTrial(
                    id=str(t["id"]),
                    a=Stimulus(t["a"]["condition"], t["a"]["path"]),
                    b=Stimulus(t["b"]["condition"], t["b"]["path"]),
                    is_practice=bool(t.get("is_practice", False)),
                )
            )
        else:
            trials.append(
                MosTrial(
                    id=str(t["id"]),
                    reference=t["reference"],
                    stimuli=tuple(Stimulus(s["condition"], s["path"]) for s in t["stimuli"]),
                    is_practice=bool(t.get("is_practice", False)),
                )
            )
    return SessionConfig(
        id=str(raw["id"]),
        protocol=protocol,
        trials=tuple(trials),
        randomize=bool(raw.get("randomize", True)),
        participant_fields=tuple(raw.get("participant_fields", ("name",))),
        root=path.parent,
    )


def _digest(*parts) -> int:
    h = hashlib.sha256("|".join(str(p) for p in parts).encode()).digest()
    return int.from_bytes(h[:8], "big")


def audio_token(cfg: SessionConfig, path: str) -> str:
    """Opaque, condition-free handle for one audio file."""
    return hashlib.sha256(f"{cfg.id}|audio|{path}".encode()).hexdigest()[:24]


def audio_map(cfg: SessionConfig) -> dict:
    """token -> resolved filesystem path for every stimulus in the session."""
    paths = []
    for t in cfg.trials:
        if isinstance(t, AbTrial):
            paths += [t.a.path, t.b.path]
        else:
            paths += [t.reference] + [s.path for s in t.stimuli]
    return {audio_token(cfg, p): cfg.root / p for p in paths}


def ab_swapped(cfg: SessionConfig, participant: str, trial_id: str) -> bool:
    """Whether the A/B slots are swapped for this participant and trial."""
    if not cfg.randomize:
        return False
    return bool(_digest(cfg.id, "swap", participant, trial_id) & 1)


def stimulus_order(cfg: SessionConfig, participant: str, trial: MosTrial) -> list:
    """Per-participant presentation order of a MOS trial's stimuli."""
    idx = list(range(len(trial.stimuli)))
    if not cfg.randomize:
        return idx
    return sorted(idx, key=lambda i: _digest(cfg.id, "order", participant, trial.id, i))


def blinded_id(cfg: SessionConfig, trial_id: str, condition: str) -> str:
    """Stable opaque identifier for one (trial, condition) stimulus."""
    return hashlib.sha256(f"{cfg.id}|stim|{trial_id}|{condition}".encode()).hexdigest()[:12]


def build_manifest(cfg: SessionConfig, participant: str = "") -> dict:
    """Client-facing session manifest; no condition labels anywhere."""
    items = []
    for t in cfg.trials:
        if isinstance(t, AbTrial):
            a, b = t.a, t.b
            if participant and ab_swapped(cfg, participant, t.id):
                a, b = b, a
            items.append(
                {
                    "id": t.id,
                    "is_practice": t.is_practice,
                    "sample_a": f"/api/audio/{audio_token(cfg, a.path)}",
                    "sample_b": f"/api/audio/{audio_token(cfg, b.path)}",
                }
            )
        else:
            order = stimulus_order(cfg, participant, t) if participant else range(len(t.stimuli))
            items.append(
                {
                    "id": t.id,
                    "is_practice": t.is_practice,
                    "reference": f"/api/audio/{audio_token(cfg, t.reference)}",
                    "stimuli": [
                        {
                            "id": blinded_id(cfg, t.id, t.stimuli[i].condition),
                            "url": f"/api/audio/{audio_token(cfg, t.stimuli[i].path)}",
                        }
                        for i in order
                    ],
                }
            )
    return {
        "id": cfg.id,
        "protocol": cfg.protocol,
        "randomize": cfg.randomize,
        "participant_fields": list(cfg.participant_fields),
        "items": items,
    }


def validate_response(cfg: SessionConfig, record: dict) -> dict:
    """Check one submitted response; returns the normalized record."""
    trial = next((t for t in cfg.trials if t.id == record.get("trial")), None)
    if record.get("session") != cfg.id:
        raise ValueError(f"unknown session {record.get('session')!r}")
    if trial is None:
        raise ValueError(f"unknown trial {record.get('trial')!r}")
    if not str(record.get("participant", "")).strip():
        raise ValueError("missing participant")
    if record.get("protocol") != cfg.protocol:
        raise ValueError(f"protocol mismatch: expected {cfg.protocol}")

    played = record.get("playback_complete") or {}
    choice = record.get("choice")
    if cfg.protocol == "AB":
        if choice not in ("A", "B"):
            raise ValueError(f"AB choice must be 'A' or 'B', got {choice!r}")
        if not (played.get("a") and played.get("b")):
            raise ValueError("both samples must be played to completion before answering")
    else:
        if not (isinstance(choice, int) and 1 <= choice <= 5):
            raise ValueError(f"MOS rating must be an integer in 1..5, got {choice!r}")
        stim_ids = {blinded_id(cfg, trial.id, s.condition) for s in trial.stimuli}
        if record.get("stimulus") not in stim_ids:
            raise ValueError(f"unknown stimulus {record.get('stimulus')!r}")
        needed = {"reference", *stim_ids}
        if not all(played.get(k) for k in needed):
            raise ValueError("reference and all stimuli must be played to completion")
    return record


def append_response(path, record: dict) -> None:
    with open(path, "a") as f:
        f.write(json.dumps(record, sort_keys=True) + "\n")


def load_responses(path) -> list:
    lines = Path(path).read_text().splitlines()
    return [json.loads(line) for line in lines if line.strip()]


def aggregate(records: list, cfg: SessionConfig) -> dict:
    """Per-condition summaries over evaluation (non-practice) trials.

    AB: preference percentage per condition. MOS: mean and quartiles
    per condition. The last submission per response key wins.
    """
    practice = {t.id for t in cfg.trials if t.is_practice}
    trials = {t.id: t for t in cfg.trials}

    latest = {}
    for r in records:
        if r.get("session") != cfg.id or r.get("trial") in practice or r.get("trial") not in trials:
            continue
        key = (r["participant"], r["trial"], r.get("stimulus"))
        latest[key] = r

    if cfg.protocol == "AB":
        votes = {}
        for (participant, trial_id, _), r in latest.items():
            t = trials[trial_id]
            a, b = t.a, t.b
            if ab_swapped(cfg, participant, trial_id):
                a, b = b, a
            chosen = a.condition if r["choice"] == "A" else b.condition
            votes[chosen] = votes.get(chosen, 0) + 1
        total = sum(votes.values())
        conditions = sorted({t.a.condition for t in cfg.trials} | {t.b.condition for t in cfg.trials})
        return {
            "protocol": "AB",
            "n_responses": total,
            "n_participants": len({k[0] for k in latest}),
            "votes": {c: votes.get(c, 0) for c in conditions},
            "preference_pct": {
                c: (100.0 * votes.get(c, 0) / total if total else 0.0) for c in conditions
            },
        }

    by_condition = {}
    for (_, trial_id, stim_id), r in latest.items():
        t = trials[trial_id]
        cond = next(
            (s.condition for s in t.stimuli if blinded_id(cfg, t.id, s.condition) == stim_id), None
        )
        if cond is not None:
            by_condition.setdefault(cond, []).append(r["choice"])
    out = {"protocol": "MOS", "n_participants": len({k[0] for k in latest}), "conditions": {}}
    for cond in sorted(by_condition):
        vals = sorted(by_condition[cond])
        out["conditions"][cond] = {
            "n": len(vals),
            "mean": sum(vals) / len(vals),
            "min": vals[0],
            "q1": _percentile(vals, 0.25),
            "median": _percentile(vals, 0.5),
            "q3": _percentile(vals, 0.75),
            "max": vals[-1],
        }
    return out


def _percentile(sorted_vals: list, f: float) -> float:
    h = f * (len(sorted_vals) - 1)
    lo = int(h)
    hi = min(lo + 1, len(sorted_vals) - 1)
    return sorted_vals[lo] + (sorted_vals[hi] - sorted_vals[lo]) * (h - lo)
