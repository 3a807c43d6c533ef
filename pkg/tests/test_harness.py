import json

import numpy as np
import pytest

from swclt import harness
from swclt.config import BootstrapConfig, config_from_dict, config_echo, load_config
from swclt.errors import ConfigError, NumericalError
from swclt.harness import run_bootstrap_sim, run_clt_sim, write_report
from swclt.inference import msw_limit_variance
from swclt.samplers import ModelSpec, sample
from swclt.seeding import mix64
from swclt.sliced import max_sliced


def sphere_raw(**over):
    raw = dict(
        model_P={"kind": "unit_sphere", "dim": 3},
        model_Q={"kind": "shifted_sphere", "dim": 3, "center": [1, 1, 1]},
        functional={"kind": "sliced", "n_dirs": 50},
        p=2,
        n_list=[20, 40],
        replications=6,
        master_seed=3,
        theoretical_variance=0.832,
    )
    raw.update(over)
    return raw


class TestSeeding:
    def test_known_vector(self):
        # SplitMix64 with seed 0: first output is 0xE220A8397B1DCDAF
        assert mix64(0, 0) == 0xE220A8397B1DCDAF

    def test_distinct_over_many_indices(self):
        seeds = {mix64(12345, i) for i in range(1_000_000)}
        assert len(seeds) == 1_000_000


class TestConfig:
    def test_round_trip_yaml(self, tmp_path):
        p = tmp_path / "c.yaml"
        p.write_text(
            "model_P: {kind: unit_sphere, dim: 3}\n"
            "model_Q: {kind: shifted_sphere, dim: 3, center: [1, 1, 1]}\n"
            "functional: {kind: max_sliced, restarts: 2}\n"
            "n_list: [10]\nreplications: 2\n"
            "bootstrap: {l_exponents: [1, 0.5], B: 3}\n"
        )
        cfg = load_config(p)
        assert cfg.functional.kind == "max_sliced" and cfg.functional.options.restarts == 2
        assert cfg.bootstrap.resample_sizes(1000) == [1000, 32]
        assert "output_dir" not in config_echo(cfg)

    def test_resample_sizes(self):
        b = BootstrapConfig()
        assert b.resample_sizes(1000) == [1000, 422, 252, 32]
        assert BootstrapConfig((0.5,)).resample_sizes(16) == [4]

    @pytest.mark.parametrize(
        "bad",
        [
            {"replications": 0},
            {"n_list": []},
            {"bootstrap": {"l_exponents": [1.5]}},
            {"bogus_key": 1},
            {"functional": {"kind": "nope"}},
            {"model_Q": {"kind": "unit_sphere", "dim": 2}},
            {"reference": "guess"},
        ],
    )
    def test_validation(self, bad):
        with pytest.raises(ConfigError):
            config_from_dict(sphere_raw(**bad))

    def test_functional_variants(self):
        cfg = config_from_dict(sphere_raw(functional={"kind": "amplitude", "n_grid": 30}))
        assert cfg.functional.dirs.shape == (30, 3)
        fam = {"kind": "distributional", "family": [{"dirs": [[1, 0, 0], [0, 1, 0]]}, {"dirs": [[0, 0, 2]]}]}
        cfg = config_from_dict(sphere_raw(functional=fam))
        assert len(cfg.functional.family) == 2
        np.testing.assert_allclose(cfg.functional.family[1][0], [[0, 0, 1]])


class TestCltSim:
    def test_rows_and_reference(self):
        rep = run_clt_sim(config_from_dict(sphere_raw()))
        assert rep.reference_method == "analytic"
        assert [r.statistic.size for r in rep.rows] == [6, 6]
        assert [len(r.excluded) for r in rep.rows] == [0, 0]

    def test_row_recomputable_from_seed(self):
        cfg = config_from_dict(sphere_raw())
        rep = run_clt_sim(cfg)
        F = cfg.functional.bind(3, mix64(cfg.master_seed, harness.DIRS_STREAM))
        row = rep.rows[1]
        child = int(row.child_seed[2])
        assert child == mix64(3, 1 * 6 + 2)
        P = sample(cfg.model_P.with_n(40, mix64(child, 0)))
        Q = sample(cfg.model_Q.with_n(40, mix64(child, 1)))
        stat = np.sqrt(40) * (F.evaluate(P, Q) - rep.reference)
        assert row.statistic[2] == stat

    def test_null_model_concentrates(self):
        raw = sphere_raw(model_Q={"kind": "unit_sphere", "dim": 3}, n_list=[200], replications=20, theoretical_variance=None)
        rep = run_clt_sim(config_from_dict(raw))
        assert rep.reference == 0.0
        stats = rep.rows[0].statistic
        # W_n is O(1/n) under the null, so sqrt(n) W_n is small
        assert np.median(np.abs(stats)) <= 3 * stats.std() / np.sqrt(200) + 0.2

    def test_plugin_reference_is_flagged(self):
        raw = sphere_raw(model_Q={"kind": "uniform_interval_product", "dim": 3, "low": -1, "high": 1}, n_list=[10], replications=2)
        rep = run_clt_sim(config_from_dict(raw))
        assert rep.reference_method == "plugin(n_ref=200)"

    def test_failures_are_recorded(self, monkeypatch):
        real = harness._replicate

        def flaky(args):
            if args[3] == mix64(3, 1):
                raise NumericalError("boom")
            return real(args)

        monkeypatch.setattr(harness, "_replicate", flaky)
        rep = run_clt_sim(config_from_dict(sphere_raw()))
        assert rep.rows[0].statistic.size == 5
        assert rep.rows[0].excluded[0]["replication"] == 1
        assert rep.summary()["per_n"][0]["excluded_count"] == 1

    @pytest.mark.slow
    def test_ellipsoid_max_sliced_variance(self):
        raw = dict(
            model_P={"kind": "unit_sphere", "dim": 3},
            model_Q={"kind": "ellipsoid_surface", "dim": 3, "semi_axes": [8.5, 1, 1]},
            functional={"kind": "max_sliced"},
            n_list=[500],
            replications=300,
            master_seed=11,
        )
        rep = run_clt_sim(config_from_dict(raw))
        assert rep.reference == pytest.approx(7.5**2 / 3)
        P = sample(ModelSpec("unit_sphere", n=20000, seed=1))
        Q = sample(ModelSpec("ellipsoid_surface", semi_axes=(8.5, 1, 1), n=20000, seed=2))
        v = max_sliced(P, Q, 2, seed=3).argmax
        limit = msw_limit_variance(P, Q, 2, v)
        assert rep.rows[0].statistic.var(ddof=1) == pytest.approx(limit, rel=0.25)


class TestBootstrapSim:
    def test_tables(self):
        raw = sphere_raw(n_list=[30], bootstrap={"l_exponents": [1, 0.5], "B": 7})
        rep = run_bootstrap_sim(config_from_dict(raw))
        assert [b.l for b in rep.bootstrap] == [30, 6]
        assert all(b.statistic.size == 7 for b in rep.bootstrap)
        assert all(b.ks_vs_mc is not None and b.ks_vs_gaussian is not None for b in rep.bootstrap)

    def test_requires_bootstrap_section(self):
        with pytest.raises(ConfigError):
            run_bootstrap_sim(config_from_dict(sphere_raw()))


class TestReport:
    def test_files_and_headers(self, tmp_path):
        raw = sphere_raw(n_list=[30], bootstrap={"l_exponents": [1], "B": 5})
        rep = run_bootstrap_sim(config_from_dict(raw))
        files = write_report(rep, tmp_path)
        names = sorted(f.name for f in files)
        for expected in ("clt_n30.csv", "kde_clt_n30.csv", "qq_clt_n30.csv", "bootstrap_n30_l30.csv", "directions.csv", "summary.json"):
            assert expected in names
        for f in files:
            if f.suffix == ".csv":
                head = f.read_text().splitlines()[0]
                assert head.startswith("# swclt") and "master_seed=3" in head
        lines = (tmp_path / "clt_n30.csv").read_text().splitlines()
        assert lines[1] == "replication,child_seed,statistic"
        assert len(lines) == 2 + 6
        # full round-trip precision
        vals = [float(l.split(",")[2]) for l in lines[2:]]
        assert vals == rep.rows[0].statistic.tolist()
        boot = (tmp_path / "bootstrap_n30_l30.csv").read_text().splitlines()
        assert len(boot) == 2 + 5
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary["reference"]["method"] == "analytic"
        assert summary["per_n"][0]["count"] == 6
        assert summary["bootstrap"][0]["B"] == 5

    def test_json_format(self, tmp_path):
        rep = run_clt_sim(config_from_dict(sphere_raw(n_list=[20])))
        write_report(rep, tmp_path, fmt="json")
        data = json.loads((tmp_path / "clt_n20.json").read_text())
        assert data["statistic"] == rep.rows[0].statistic.tolist()

    def test_rerun_byte_identical(self, tmp_path):
        raw = sphere_raw(bootstrap={"l_exponents": [1, 0.875], "B": 4})
        for sub in ("a", "b"):
            write_report(run_bootstrap_sim(config_from_dict(raw)), tmp_path / sub)
        a = {f.name: f.read_bytes() for f in (tmp_path / "a").iterdir()}
        b = {f.name: f.read_bytes() for f in (tmp_path / "b").iterdir()}
        assert a == b

    def test_worker_count_does_not_matter(self, tmp_path):
        raw = sphere_raw(functional={"kind": "max_sliced", "restarts": 2}, n_list=[25], replications=4)
        write_report(run_clt_sim(config_from_dict(raw), workers=1), tmp_path / "one")
        write_report(run_clt_sim(config_from_dict(raw), workers=3), tmp_path / "three")
        for f in (tmp_path / "one").iterdir():
            assert f.read_bytes() == (tmp_path / "three" / f.name).read_bytes()
