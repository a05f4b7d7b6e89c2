import numpy as np
import pytest

import swarman


def t_pose():
    # Camera coordinates: x right, y down.
    return np.array([
        [0.5, 0.2, 0.0],
        [0.5, 0.3, 0.0],
        [0.5, 0.6, 0.0],
        [0.61, 0.32, 0.0],
        [0.39, 0.32, 0.0],
        [0.76, 0.32, 0.0],
        [0.24, 0.32, 0.0],
        [0.9, 0.32, 0.0],
        [0.1, 0.32, 0.0],
    ])


def test_formation_segment_lengths():
    f = swarman.build_formation(t_pose())
    assert f.shape == (9, 3)
    np.testing.assert_allclose(f[0], [0.0, 0.0, 2.0])
    assert np.linalg.norm(f[1] - f[0]) == pytest.approx(0.25, rel=1e-12)
    f2 = swarman.build_formation(t_pose(), {"head_anchor": [1, 1, 1], "lengths": {"neck": 0.5}})
    assert np.linalg.norm(f2[1] - f2[0]) == pytest.approx(0.5, rel=1e-12)


def test_degenerate_frame_raises():
    frame = t_pose()
    frame[5] = frame[3]
    with pytest.raises(swarman.ValidationError):
        swarman.build_formation(frame)


def test_assignment():
    targets = [[0, 0, 0], [1, 0, 0], [2, 0, 0]]
    drones = [[0, 0, 0.1], [2, 0, 0.1], [1, 0, 0.1]]
    g = swarman.greedy_assign(targets, drones)
    assert g["pairs"] == [(0, 0), (1, 2), (2, 1)]
    assert g["total_cost"] == pytest.approx(0.3)
    assert swarman.optimal_assign(targets, drones)["total_cost"] <= g["total_cost"]
    with pytest.raises(swarman.ValidationError):
        swarman.greedy_assign(targets, drones[:2])


def test_force_is_negative_gradient():
    pos = np.array([[0.0, 0.0, 2.0], [0.05, 0.03, 2.1], [1.0, 1.0, 1.0]])
    target = np.array([0.3, -0.2, 2.2])
    f = swarman.total_force(0, pos, target)
    h = 1e-7
    g = np.zeros(3)
    for k in range(3):
        up, dn = pos.copy(), pos.copy()
        up[0, k] += h
        dn[0, k] -= h
        g[k] = (swarman.total_potential(0, up, target) - swarman.total_potential(0, dn, target)) / (2 * h)
    np.testing.assert_allclose(f, -g, rtol=1e-5)


def test_run_scenario_converges():
    formation = swarman.build_formation(t_pose())
    grid = swarman.random_takeoff_grid(formation, 0)
    out = swarman.run_scenario([0.0], [t_pose()], grid)
    assert out["positions"].shape == (501, 9, 3)
    assert out["metrics"]["collision_count"] == 0
    assert out["metrics"]["time_to_converge"] is not None
    assert np.linalg.norm(out["velocities"], axis=2).max() <= 1.0 + 1e-9
    with pytest.raises(swarman.ValidationError):
        swarman.run_scenario([0.0], [t_pose()], grid, sim={"dt": 0.5})


def test_colors():
    assert swarman.emotion_color("happy") == (0, 255, 0)
    assert swarman.emotion_color("neutral") == (255, 255, 255)
    with pytest.raises(swarman.ValidationError):
        swarman.emotion_color("bored")


def test_train_and_classify():
    x, y = swarman.generate_synthetic_dataset(6, seed=1)
    assert x.shape == (30, 30, 27)
    assert list(y[:5]) == [0, 1, 2, 3, 4]
    model = swarman.LstmModel.initialized(hidden_sizes=[8], seed=1)
    trained, history = swarman.train(model, x, y, {"epochs": 3, "batch_size": 8})
    assert len(history) == 3
    again, _ = swarman.train(model, x, y, {"epochs": 3, "batch_size": 8})
    np.testing.assert_array_equal(trained.predict_proba(x), again.predict_proba(x))
    p = trained.predict_proba(x)
    np.testing.assert_allclose(p.sum(axis=1), 1.0, atol=1e-9)
    labels, conf = swarman.classify(trained, x[:2])
    assert all(lbl in swarman.EMOTIONS for lbl in labels)
    assert np.all((conf > 0) & (conf <= 1))
