import numpy as np
import pytest

from sparsect.cli import main, run_experiment
from sparsect.rawio import read_raw

CONFIG = """
[geometry]
beam = parallel
image_size = 32
pixel_size = 0.625
num_views = 24

[noise]
gaussian_sigma = 0.05

[solver]
p = 0.7
lambda = 0.12
gamma = 60.0
alpha = 0.5
beta = 0.6
epsilon = 1e-3
max_iter = 15
cg_tol = 1e-8
cg_max_iter = 30

[sweep]
views = 24
methods = fbp

[output]
seed = 7
peak = 1.0
"""


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "exp.ini"
    path.write_text(CONFIG)
    return path


def test_single_case_cardinality(config_file, tmp_path):
    out = tmp_path / "res"
    assert run_experiment(config_file, out_dir=out) == 0
    lines = (out / "metrics.csv").read_text().strip().splitlines()
    assert lines[0].startswith("method,views,noise,p,alpha,beta,psnr,ssim,mae,rmse,iters")
    assert len(lines) == 2
    assert lines[1].startswith("fbp,24,sigma0.05,")
    assert (out / "fbp_v24.raw").exists()
    assert (out / "fbp_v24.pgm").exists()
    assert (out / "manifest.json").exists()


def test_same_seed_reruns_byte_identical(config_file, tmp_path):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    run_experiment(config_file, out_dir=out1)
    run_experiment(config_file, out_dir=out2)
    assert (out1 / "metrics.csv").read_bytes() == (out2 / "metrics.csv").read_bytes()
    assert (out1 / "fbp_v24.raw").read_bytes() == (out2 / "fbp_v24.raw").read_bytes()
    assert (out1 / "manifest.json").read_bytes() == (out2 / "manifest.json").read_bytes()


def test_pipeline_matches_experiment_bit_for_bit(config_file, tmp_path):
    out = tmp_path / "exp"
    run_experiment(config_file, out_dir=out)

    # the same steps by hand: phantom -> project -> addnoise -> fbp
    ph = tmp_path / "ph.raw"
    sino = tmp_path / "sino.raw"
    noisy = tmp_path / "noisy.raw"
    rec = tmp_path / "rec.raw"
    cfg = str(config_file)
    assert main(["phantom", "--size", "32", "--pixel-size", "0.625", "--out", str(ph)]) == 0
    assert main(["project", "--config", cfg, "--image", str(ph), "--out", str(sino)]) == 0
    assert main(["addnoise", "--config", cfg, "--in", str(sino), "--out", str(noisy), "--seed", "7"]) == 0
    assert main(["fbp", "--config", cfg, "--sino", str(noisy), "--out", str(rec)]) == 0
    assert rec.read_bytes() == (out / "fbp_v24.raw").read_bytes()


def test_reconstruct_subcommand_and_trace(config_file, tmp_path):
    ph = tmp_path / "ph.raw"
    sino = tmp_path / "sino.raw"
    rec = tmp_path / "rec.raw"
    trace = tmp_path / "trace.csv"
    cfg = str(config_file)
    main(["phantom", "--size", "32", "--pixel-size", "0.625", "--out", str(ph)])
    main(["project", "--config", cfg, "--image", str(ph), "--out", str(sino)])
    code = main(
        [
            "reconstruct", "--config", cfg, "--sino", str(sino), "--out", str(rec),
            "--method", "hqs", "--trace", str(trace), "--gt", str(ph),
        ]
    )
    assert code == 0
    assert read_raw(rec).shape == (32, 32)
    lines = trace.read_text().strip().splitlines()
    assert lines[0] == "iter,rel_change,objective,cg_iters,psnr"
    assert len(lines) >= 2


def test_project_zero_phantom_gives_zero_sinogram(config_file, tmp_path):
    from sparsect.rawio import write_raw

    zero = tmp_path / "zero.raw"
    out = tmp_path / "out.raw"
    write_raw(zero, np.zeros((32, 32)))
    main(["project", "--config", str(config_file), "--image", str(zero), "--out", str(out)])
    assert np.all(read_raw(out) == 0.0)


def test_metrics_sentinel_on_identical(config_file, tmp_path, capsys):
    from sparsect.rawio import write_raw

    a = tmp_path / "a.raw"
    write_raw(a, np.linspace(0, 1, 64).reshape(8, 8).repeat(4, 0).repeat(4, 1))
    assert main(["metrics", "--image", str(a), "--ref", str(a)]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "psnr,ssim,mae,rmse"
    assert out[1].split(",")[0] == "inf"


def test_invalid_config_field_named(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(CONFIG.replace("beta = 0.6", "beta = 0.99"))
    code = main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "solver" in capsys.readouterr().err


def test_unparseable_value_names_field(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text(CONFIG.replace("image_size = 32", "image_size = many"))
    code = main(["sweep", "--config", str(bad), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "geometry.image_size" in capsys.readouterr().err


def test_missing_config_file_is_config_error(tmp_path):
    assert main(["sweep", "--config", str(tmp_path / "nope.ini")]) == 1


def test_usage_error_exits_one():
    assert main(["frobnicate"]) == 1


def test_jobs_parallel_matches_serial(tmp_path):
    cfg_text = CONFIG.replace("\nviews = 24", "\nviews = 12, 24").replace(
        "methods = fbp", "methods = fbp, hqs"
    )
    path = tmp_path / "exp.ini"
    path.write_text(cfg_text)
    serial, parallel = tmp_path / "s", tmp_path / "p"
    run_experiment(path, out_dir=serial, jobs=1)
    run_experiment(path, out_dir=parallel, jobs=2)
    assert (serial / "metrics.csv").read_bytes() == (parallel / "metrics.csv").read_bytes()
    assert (serial / "hqs_v12_p0.7.raw").read_bytes() == (parallel / "hqs_v12_p0.7.raw").read_bytes()


def test_timing_flag_fills_wall_seconds(config_file, tmp_path):
    out = tmp_path / "timed"
    run_experiment(config_file, out_dir=out, timing=True)
    row = (out / "metrics.csv").read_text().strip().splitlines()[1]
    assert row.split(",")[-1] != ""
    out2 = tmp_path / "untimed"
    run_experiment(config_file, out_dir=out2)
    assert (out2 / "metrics.csv").read_text().strip().splitlines()[1].split(",")[-1] == ""
