import json
from collections import Counter

import pytest

from autoevent.cli import main
from autoevent.config import ConfigError, PROFILES, RunConfig, config_to_dict, load_config
from autoevent.events import events_from_csv


def test_defaults_and_profiles():
    cfg = load_config()
    assert cfg == RunConfig()
    assert load_config(profile="A").possession.r_pz == PROFILES["A"]["possession.r_pz"]
    with pytest.raises(ConfigError, match="profile"):
        load_config(profile="Z")


def test_file_then_overrides(tmp_path):
    p = tmp_path / "run.yaml"
    p.write_text("profile: A\npossession:\n  r_dz: 2.5\npitch:\n  attack: {A: +x, B: -x}\ndebounce: 3\n")
    cfg = load_config(p, overrides=["possession.r_dz=3", "matching.strict_player=yes"])
    assert cfg.possession.r_pz == 0.5 and cfg.possession.r_dz == 3.0
    assert cfg.pitch.attack == {"A": "+x", "B": "-x"} and cfg.debounce == 3
    assert cfg.matching.strict_player is True
    d = config_to_dict(cfg)
    assert d["possession"]["r_dz"] == 3.0 and d["profile"] == "A"


@pytest.mark.parametrize("overrides,msg", [
    (["possession.radius=1"], "unknown config key"),
    (["tracking.x=1"], "unknown config section"),
    (["possession.r_pz=big"], "number"),
    (["possession.r_pz=5"], None),
    (["debounce"], "key=value"),
    (["pitch.attack=[1, 2]"], "mapping"),
])
def test_bad_overrides(overrides, msg):
    with pytest.raises(ConfigError, match=msg):
        load_config(overrides=overrides)


def test_missing_or_bad_config_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.yaml")
    p = tmp_path / "list.yaml"
    p.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError, match="mapping"):
        load_config(p)


# --------------------------------------------------------------------------- CLI


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--script", "shot_keeper_corner", "--out", str(out)]) == 0
    return out


def test_synth_writes_bundle(synth_dir):
    names = sorted(p.name for p in synth_dir.iterdir())
    assert names == ["script.json", "tracking.jsonl", "truth_events.csv"]
    assert json.loads((synth_dir / "script.json").read_text())["name"] == "shot_keeper_corner"


def test_detect_report_matches_truth(synth_dir, tmp_path, capsys):
    assert main(["detect", "--input", str(synth_dir / "tracking.jsonl"), "--out", str(tmp_path)]) == 0
    assert "rows" in capsys.readouterr().out
    report = json.loads((tmp_path / "report.json").read_text())
    truth = events_from_csv((synth_dir / "truth_events.csv").read_text())
    want = Counter(v for r in truth for v in (r.event_name, r.dead_ball_event, r.from_set_piece) if v)
    assert report["category_counts"] == dict(want)
    assert report["attack_source"] == "metadata"
    assert report["periods"]["1"]["kickoff"] == 1
    for name in ("events.csv", "events.jsonl", "timeline.csv"):
        assert (tmp_path / name).stat().st_size > 0


def test_benchmark_against_truth(synth_dir, tmp_path, capsys):
    det = tmp_path / "det"
    main(["detect", "--input", str(synth_dir / "tracking.jsonl"), "--out", str(det)])
    out = tmp_path / "bench"
    assert main(["benchmark", "--input", str(det / "events.csv"), "--truth", str(synth_dir / "truth_events.csv"),
                 "--out", str(out), "--set", "matching.window=0.5"]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["misses"] == rep["spurious"] == 0
    assert (out / "confusion.csv").exists()
    assert "corner kick" in capsys.readouterr().out


def test_benchmark_annotations(synth_dir, tmp_path, capsys):
    ann = tmp_path / "ann.csv"
    ann.write_text("match,half,minute,second,player,category,outcome\nm,1,0,1,A10,pass,\nm,1,0,3,A7,tackle,\n")
    args = ["benchmark", "--input", str(synth_dir / "truth_events.csv"), "--truth", str(ann), "--out", str(tmp_path)]
    assert main(args) == 2
    err = error_of(capsys)
    assert err["error"] == "annotations" and "tackle" in err["message"]
    assert main(args + ["--lenient"]) == 0


def test_analyze_outputs(synth_dir, tmp_path):
    src = str(synth_dir / "tracking.jsonl")
    assert main(["analyze", "--input", src, "--player", "A11", "--out", str(tmp_path), "--grid", "10x5"]) == 0
    heat = json.loads((tmp_path / "heatmap_A11.json").read_text())
    assert (heat["nx"], heat["ny"]) == (10, 5) and heat["frames"] > 0
    assert main(["analyze", "--input", src, "--player", "A9", "--kind", "angles", "--out", str(tmp_path)]) == 0
    ang = json.loads((tmp_path / "angles_A9.json").read_text())
    assert [r["event_name"] for r in ang["records"]] == ["cross"]


def test_missing_input_names_path(tmp_path, capsys):
    missing = tmp_path / "nope.jsonl"
    assert main(["detect", "--input", str(missing), "--out", str(tmp_path)]) == 3
    err = error_of(capsys)
    assert err["error"] == "input" and err["path"] == str(missing)


def test_parse_error_names_frame(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("frame,period,timestamp,ball_x,ball_y,player_id,team,role,x,y\n0,1,0.0,1,,a,A,outfield,0,0\n")
    assert main(["detect", "--input", str(bad), "--out", str(tmp_path)]) == 3
    err = error_of(capsys)
    assert err["error"] == "parse" and err["frame"] == 0 and err["column"] == "ball_y"


@pytest.mark.parametrize("argv,kind", [
    (["detect", "--input", "x", "--set", "possession.bogus=1"], "config"),
    (["detect"], "usage"),
    (["synth"], "usage"),
    (["synth", "--script", "penalty", "--dropout", "1.5"], "usage"),
    (["detect", "--input", "x", "--jobs", "0"], "usage"),
])
def test_usage_and_config_errors(argv, kind, tmp_path, capsys):
    assert main(argv + ["--out", str(tmp_path)]) == 2
    assert error_of(capsys)["error"] == kind


def test_bad_script_file(tmp_path, capsys):
    s = tmp_path / "s.json"
    s.write_text(json.dumps({"teams": {"A": {}, "B": {"attack": "-x"}},
                             "periods": [{"actions": [{"type": "pass", "to": "A7"}]}]}))
    assert main(["synth", "--script", str(s), "--out", str(tmp_path)]) == 2
    assert error_of(capsys)["error"] == "script"


def test_batch_detect_parallel(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    main(["synth", "--script", "penalty", "--out", str(a), "--format", "generic-csv"])
    main(["synth", "--script", "interception", "--out", str(b)])
    out = tmp_path / "out"
    rc = main(["detect", "--input", str(a / "tracking.csv"), "--input", str(b / "tracking.jsonl"),
               "--jobs", "2", "--out", str(out)])
    assert rc == 0
    # both inputs share the stem "tracking", so directories get an index prefix
    assert sorted(p.name for p in out.iterdir()) == ["000_tracking", "001_tracking"]
    reports = sorted(json.loads(p.read_text())["input"] for p in out.glob("*/report.json"))
    assert reports == sorted([str(a / "tracking.csv"), str(b / "tracking.jsonl")])


def test_batch_reports_failures(tmp_path, capsys):
    a = tmp_path / "a"
    main(["synth", "--script", "penalty", "--out", str(a)])
    rc = main(["detect", "--input", str(a / "tracking.jsonl"), "--input", str(tmp_path / "gone.jsonl"),
               "--out", str(tmp_path / "out")])
    assert rc == 3
    assert error_of(capsys)["path"].endswith("gone.jsonl")


def test_version(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0 and capsys.readouterr().out.strip()
