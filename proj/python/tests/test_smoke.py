import json

import numpy as np
import pytest

import mmsie

F = 3e8


def test_generators_and_mesh_arrays():
    box = mmsie.box([0, 0, 0], [0.3, 0.2, 0.1], 0.1)
    assert box.closed
    assert box.vertices.shape[1] == 3
    assert box.triangles.max() < box.vertices.shape[0]
    again = mmsie.Mesh(box.vertices, box.triangles)
    assert again.num_edges == box.num_edges
    assert again.total_area() == pytest.approx(2 * (0.06 + 0.03 + 0.02))
    plate = mmsie.plate([0, 0, 0], 0.2, 0.1, 4, 2)
    assert not plate.closed
    assert plate.num_interior_edges < plate.num_edges


def test_assemble_L_is_symmetric():
    s = mmsie.sphere([0, 0, 0], 0.1, 1)
    z = mmsie.assemble_L(s, s, F)
    assert z.shape[0] == z.shape[1] == s.num_interior_edges
    assert np.linalg.norm(z - z.T) <= 1e-6 * np.linalg.norm(z)


def test_macromodel_round_trip(tmp_path):
    s = mmsie.plate([0, 0, 0], 0.2, 0.1, 4, 2)
    e = mmsie.box([0, 0, 0], [0.3, 0.2, 0.1], 0.1)
    m = mmsie.build_macromodel(s, e, F)
    assert m.t.shape == (m.n_hat, m.n)
    path = tmp_path / "plate.mm"
    m.save(str(path))
    r = mmsie.load_macromodel(str(path))
    e_hat = np.arange(m.n_hat) * (1 + 0.5j)
    assert np.array_equal(m.recover_current(e_hat), r.recover_current(e_hat))


def test_gmres_identity():
    b = np.array([1.0, 2.0j, -3.0])
    x, its, ok, hist = mmsie.gmres(np.eye(3, dtype=complex), b)
    assert ok and its == 1
    assert np.allclose(x, b)
    assert hist[0] == 1.0


def test_run_config_and_errors():
    cfg = {
        "frequency_hz": F,
        "elements": {"p": {"scatterer": {"generator": "plate", "size_x_m": 0.2, "size_y_m": 0.1, "nx": 6, "ny": 3}}},
        "array": {"nx": 2, "ny": 1, "spacing_x_m": 0.7, "spacing_y_m": 0.7, "element": "p"},
        "excitation": {"type": "plane_wave", "direction": [0, 0, -1], "polarization": [1, 0, 0]},
        "output": {"cuts_phi_deg": [0], "step_deg": 10},
    }
    r = mmsie.run_config(json.dumps(cfg))
    assert r["converged"]
    assert r["report"]["macromodel_builds"] == "1"
    assert len(r["cuts"]) == 1 and len(r["cuts"][0]["theta"]) == 37
    assert r["currents"].shape == (r["scatterer_unknowns"],)
    with pytest.raises(mmsie.ParseError):
        mmsie.run_config(json.dumps({**cfg, "bogus": 1}))
    cfg["array"]["spacing_x_m"] = 0.1
    with pytest.raises(mmsie.GeometryError):
        mmsie.run_config(json.dumps(cfg))
    assert "excitation" in mmsie.schema()
