import json

import numpy as np
import pytest

from revdmp import ClassicalDMP, OrientationDMP, ReversibleDMP, io
from revdmp import rotations as rot
from revdmp.errors import DegenerateDemoError, ValidationError
from revdmp.orientation import spline_demo
from revdmp.sim import QuaternionTrajectory, Trajectory


@pytest.fixture(scope="module")
def models():
    from revdmp.sim import min_jerk_demo, sigmoid_arcs_demo

    d = min_jerk_demo(0.0, 1.0, 2.0, 0.002)
    p = sigmoid_arcs_demo(2.0, 0.002)
    t, Q = spline_demo([0.5, -0.3, 0.8])
    return {"reversible": ReversibleDMP.train(p.t, p.y), "classical": ClassicalDMP.train(d),
            "orientation": OrientationDMP.train(t, Q)}


@pytest.mark.parametrize("kind", ["reversible", "classical", "orientation"])
def test_model_round_trip_is_byte_identical(models, kind, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    io.save_model(models[kind], a, {"training_sha256": "0" * 64})
    io.save_model(io.load_model(a), b, {"training_sha256": "0" * 64})
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["kind"] == kind
    # wall-clock time lives only in the sidecar
    assert "created" in json.loads((tmp_path / "a.json.meta.json").read_text())
    assert "created" not in a.read_text()


@pytest.mark.parametrize("kind", ["reversible", "classical", "orientation"])
def test_loaded_model_rolls_out_identically(models, kind, tmp_path):
    io.save_model(models[kind], tmp_path / "m.json")
    m2 = io.load_model(tmp_path / "m.json")
    a = models[kind].rollout("forward", dt=0.004)
    b = m2.rollout("forward", dt=0.004)
    ya = a.Q if isinstance(a, QuaternionTrajectory) else a.y
    yb = b.Q if isinstance(b, QuaternionTrajectory) else b.y
    assert np.array_equal(ya, yb)


def test_loading_validates_invariants(models, tmp_path):
    d = io.model_to_dict(models["reversible"])
    d["kernels"]["centers"] = d["kernels"]["centers"][::-1]
    (tmp_path / "bad.json").write_text(json.dumps(d))
    with pytest.raises(ValidationError):
        io.load_model(tmp_path / "bad.json")
    d = io.model_to_dict(models["classical"])
    d["anchors"]["g"] = d["anchors"]["y0"]
    (tmp_path / "deg.json").write_text(json.dumps(d))
    with pytest.raises((ValidationError, DegenerateDemoError)):
        io.load_model(tmp_path / "deg.json")
    (tmp_path / "junk.json").write_text("{not json")
    with pytest.raises(ValidationError):
        io.load_model(tmp_path / "junk.json")


def test_unknown_format_version_rejected(models, tmp_path):
    d = io.model_to_dict(models["reversible"])
    d["format_version"] = 99
    (tmp_path / "v.json").write_text(json.dumps(d))
    with pytest.raises(ValidationError):
        io.load_model(tmp_path / "v.json")


def test_trajectory_csv_round_trip(models, tmp_path):
    tr = models["reversible"].rollout("forward", dt=0.004)
    io.write_trajectory(tr, tmp_path / "t.csv", {"scenario": "x"})
    back = io.read_trajectory(tmp_path / "t.csv")
    assert isinstance(back, Trajectory)
    for a in ("t", "y", "yd", "ydd"):
        assert np.array_equal(getattr(back, a), getattr(tr, a))
    header = (tmp_path / "t.csv").read_text().splitlines()[0]
    assert header == "t,phase,y0,y1,dy0,dy1,ddy0,ddy1"
    assert json.loads((tmp_path / "t.csv.meta.json").read_text())["scenario"] == "x"


def test_quaternion_trajectory_round_trip(models, tmp_path):
    tr = models["orientation"].rollout("forward", dt=0.004)
    io.write_trajectory(tr, tmp_path / "q.csv")
    back = io.read_trajectory(tmp_path / "q.csv")
    assert isinstance(back, QuaternionTrajectory)
    assert np.array_equal(back.Q, tr.Q) and np.array_equal(back.eta, tr.eta)


def test_demo_readers(tmp_path):
    (tmp_path / "d.csv").write_text("t,a,b,da\n0,0,1,0\n0.5,0.5,1.5,1\n1,1,2,0\n")
    d = io.read_demo(tmp_path / "d.csv")
    assert d.y.shape == (3, 2) and np.array_equal(d.yd[:, 0], [0, 1, 0])
    t = np.linspace(0, 1, 11)
    Q = rot.qexp(np.outer(t, [0.1, 0.2, 0.3]))
    io.write_quaternion_demo(t, Q, tmp_path / "q.csv")
    tq, Qb = io.read_demo(tmp_path / "q.csv")
    assert np.array_equal(Qb, Q) and np.array_equal(tq, t)


@pytest.mark.parametrize("text,reason", [
    ("", "no samples"),
    ("t,y\n", "no samples"),
    ("t,y\n0,1\n0.5,abc\n", "numeric"),
    ("y,z\n0,1\n1,2\n", "t"),
    ("t,y\n0,1\n0,2\n", "increasing"),
])
def test_demo_parse_errors(tmp_path, text, reason):
    (tmp_path / "bad.csv").write_text(text)
    with pytest.raises(ValidationError, match=reason):
        io.read_demo(tmp_path / "bad.csv")
