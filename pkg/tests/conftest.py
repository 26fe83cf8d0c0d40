from __future__ import annotations

import functools

import numpy as np
import pytest

from autoevent.possession import (
    DUEL, NONE, POSSESSION, PossessionConfig, compute_ball_kinematics, detect_control_changes,
    detect_control_frames, validate_gains,
)
from autoevent.pipeline import detect
from autoevent.reference import reference_changes, reference_control_frames, reference_validate
from autoevent.synth import MatchScript, NoiseModel, bundled_script_names, generate_match, load_bundled_script

# lines collected by the acceptance tests, printed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@functools.lru_cache(maxsize=None)
def run_script(name: str, seed: int = 0, sigma: float = 0.0, dropout: float = 0.0):
    script = load_bundled_script(name)
    noise = NoiseModel(sigma, dropout) if sigma or dropout else None
    frames, truth = generate_match(script, seed, noise)
    return script, frames, truth, detect(frames, script.pitch())


def script_from(actions, periods=None, **kw) -> MatchScript:
    d = {"name": kw.pop("name", "t"), "teams": {"A": {"attack": "+x"}, "B": {"attack": "-x"}},
         "periods": periods or [{"actions": actions}], **kw}
    return MatchScript.from_dict(d)


def simulate(actions, **kw):
    script = script_from(actions, **kw)
    frames, truth = generate_match(script)
    return script, frames, truth, detect(frames, script.pitch())


def labels(rows):
    return [(r.player_id, r.event_name, r.dead_ball_event, r.from_set_piece) for r in rows]


@pytest.fixture(scope="session")
def suite_names():
    return bundled_script_names()


def _control_tuples(ctrl, n):
    out = []
    for i in range(n):
        k = int(ctrl.kind[i])
        if k == POSSESSION:
            out.append(("possession", int(ctrl.holder[i]), ()))
        elif k == DUEL:
            out.append(("duel", None, tuple(np.flatnonzero(ctrl.duel_members[i]).tolist())))
        else:
            assert k == NONE
            out.append(("none", None, ()))
    return out


def brute_force_mismatches(frames, cfg=PossessionConfig()) -> list[str]:
    kin = compute_ball_kinematics(frames)
    raw = detect_control_frames(frames, kin, cfg)
    ctrl = validate_gains(raw, kin, cfg)
    changes = detect_control_changes(frames, ctrl, kin, cfg)
    ref_raw = reference_control_frames(frames, cfg)
    ref_val = reference_validate(frames, ref_raw, cfg)
    bad = []
    if _control_tuples(raw, len(frames)) != ref_raw:
        bad.append("control frames")
    if _control_tuples(ctrl, len(frames)) != ref_val:
        bad.append("validated control frames")
    fast = [(c.kind, c.index, c.player, c.released) for c in changes]
    if fast != reference_changes(frames, ref_val, cfg):
        bad.append("gains/losses")
    return bad
