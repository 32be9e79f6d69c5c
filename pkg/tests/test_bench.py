import io

import pytest

from wheelsieve import bench


def test_matrix_shape_and_counts():
    pts = bench.run_matrix([10**4, 2 * 10**4], [1, 2], [1200, 2400], ["bit", "word4"])
    assert len(pts) == 2 * 2 * 2 * 2
    for limit, want in ((10**4, 1229), (2 * 10**4, 2262)):
        assert {p.prime_count for p in pts if p.limit == limit} == {want}


def test_repeats_keep_minimum(monkeypatch):
    walls = iter([0.5, 0.2, 0.3])
    real_run = bench.run

    def fake_run(cfg):
        rep = real_run(cfg)
        rep.wall_time = next(walls)
        return rep

    monkeypatch.setattr(bench, "run", fake_run)
    pt = bench.run_point(1000, 1, 600, "bit", repeats=3)
    assert pt.wall_ms == 200.0


def test_mismatch_aborts(monkeypatch):
    real_run = bench.run

    def bad_run(cfg):
        rep = real_run(cfg)
        if cfg.threads == 2:
            rep.prime_count -= 1
        return rep

    monkeypatch.setattr(bench, "run", bad_run)
    with pytest.raises(bench.BenchMismatch):
        bench.run_matrix([1000], [1, 2], [600])


def test_peak_bytes_reported():
    (pt,) = bench.run_matrix([10**5], [4], [6 * 10**4], ["word4"])
    assert pt.peak_flag_bytes == 2 * 4 * 10**4


def test_write_csv():
    pts = [bench.BenchPoint(1, 100, 60, "bit", 1.5, 2, 4, 25)]
    buf = io.StringIO()
    bench.write_csv(pts, buf)
    assert buf.getvalue() == (
        "threads,limit,segment_span,flag_width,wall_ms,iterations,peak_flag_bytes,prime_count\n"
        "1,100,60,bit,1.5,2,4,25\n"
    )


def test_compare_backends_script(tmp_path):
    import importlib.util
    import pathlib

    from wheelsieve import kernel

    if "compiled" not in kernel.BACKENDS:
        pytest.skip("compiled kernel not built")
    path = pathlib.Path(__file__).parents[1] / "benchmarks" / "compare_backends.py"
    spec = importlib.util.spec_from_file_location("compare_backends", path)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    out = tmp_path / "cmp.csv"
    assert mod.main(["--limits", "100000", "--segments", "6000", "--flag-widths", "bit",
                     "--repeats", "1", "--csv", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("backend,threads,limit")
    assert {ln.split(",")[0] for ln in lines[1:]} == {"compiled", "python"}
    assert {ln.split(",")[6] for ln in lines[1:]} == {"9592"}
