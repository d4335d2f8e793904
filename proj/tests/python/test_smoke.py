"""Smoke tests for the Python bindings."""

import math

import pytest

import csiloc


def open_room():
    scene = csiloc.Scene()
    scene.origin_x = -1.0
    scene.origin_y = -1.0
    scene.width = 10.0
    scene.depth = 10.0
    scene.height = 3.0
    return scene


def test_los_delay():
    paths = csiloc.trace_paths(open_room(), csiloc.Vec3(0, 0, 2.8),
                               csiloc.Vec3(3, 4, 2.8), 0, 0)
    assert len(paths) == 1
    assert paths[0].kind == csiloc.PathKind.LoS
    assert paths[0].delay == pytest.approx(5.0 / csiloc.SPEED_OF_LIGHT, rel=1e-12)


def test_csi_shape_and_determinism():
    paths = csiloc.trace_paths(open_room(), csiloc.Vec3(1, 1, 1.5),
                               csiloc.Vec3(5, 6, 2.8), 2, 0)
    cfg = csiloc.CsiConfig()
    cfg.n_subcarriers = 16
    cfg.array_rows = 2
    cfg.array_cols = 2
    cfg.snr_db = 20.0
    cfg.n_snapshots = 2
    a = csiloc.synthesize_csi(paths, cfg, 42)
    b = csiloc.synthesize_csi(paths, cfg, 42)
    assert len(a) == 2
    assert a[0].h.shape == (16, 4)
    assert (a[0].h == b[0].h).all()


def test_music_single_source():
    cfg = csiloc.CsiConfig()
    cfg.n_subcarriers = 32
    cfg.snr_db = 30.0
    cfg.n_snapshots = 4
    p = csiloc.PathComponent()
    p.gain = 1.0
    p.delay = 5e-9
    p.aaoa = 40.0
    p.eaoa = -25.0
    snaps = csiloc.synthesize_csi([p], cfg, 7)
    cov = csiloc.fb_smooth(snaps, csiloc.SubarrayDims(3, 3, 16))
    grid = csiloc.default_grid(cfg)
    grid.el_max = 0.0
    est = csiloc.music_estimate(cov, cfg, n_sources=1, grid=grid)
    assert len(est) == 1
    assert est[0].aaoa == pytest.approx(40.0, abs=0.5)
    assert est[0].toa == pytest.approx(5e-9, abs=0.2e-9)


def test_end_to_end_positioning(tmp_path):
    cfg = csiloc.scenario_2()
    cfg.grid_interval = 1.0
    cfg.tp_count = 8
    cfg.n_trees = 20
    cfg.seeds = [1]
    cfg.timing_reps = 1

    db = csiloc.build_database(cfg)
    assert db.n_rps == 63
    assert db.n_aps == 2

    db_path = str(tmp_path / "db.json")
    csiloc.save_db(db, db_path)
    back = csiloc.load_db(db_path)
    assert (back.fingerprint == db.fingerprint).all()

    params = csiloc.ForestParams()
    params.n_trees = 20
    mx, my = csiloc.train(db, params, 1)
    features = db.fingerprint[5, :]
    est = csiloc.estimate_position(mx, my, features, k=3)
    err = math.hypot(est.x - db.coordinate[5, 0], est.y - db.coordinate[5, 1])
    assert err <= 2.0

    wknn_cfg = csiloc.WknnConfig()
    wknn_cfg.k = 1
    w = csiloc.wknn_estimate(db, features, wknn_cfg)
    assert w.x == db.coordinate[5, 0]
    assert w.y == db.coordinate[5, 1]

    results = csiloc.run_experiment(cfg)
    assert len(results.entries) == 3  # WRF, RF, WKNN x 1 seed
    for entry in results.entries:
        assert len(entry.errors) == cfg.tp_count

    files = csiloc.emit_outputs(results, str(tmp_path / "out"))
    assert len(files) == 4

    cdf = csiloc.error_cdf(list(results.entries[0].errors))
    assert cdf[-1][1] == 1.0


def test_outage_error():
    with pytest.raises(csiloc.OutageError):
        csiloc.oracle_features([])
