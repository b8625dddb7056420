import pytest

from sharksim import engine
from sharksim.model import ConfigError, NO_DELAY, ON_STABILITY, SimConfig, stability_plus
from sharksim.sweep import (
    SweepSpec,
    aggregate,
    derive_seed,
    expand_grid,
    parse_sweep_spec,
    run_sweep,
)

SMALL_SPEC = SweepSpec(
    populations=(4, 6),
    adversaries=(2,),
    deltas=(16.0,),
    epsilons=(4.0,),
    dc_ratios=((0.5, 0.5),),
    delays=(NO_DELAY, ON_STABILITY),
    replications=2,
    base_seed=3,
    max_rounds=120,
)


class TestExpandGrid:
    def test_default_grid_is_full_study(self):
        spec = SweepSpec()
        configs = expand_grid(spec)
        assert len(configs) == 3024
        assert spec.grid_size() == 3024
        assert spec.grid_size() * spec.replications == 9072

    def test_single_point_grid(self):
        spec = SweepSpec(
            populations=(8,), adversaries=(2,), deltas=(16.0,), epsilons=(4.0,),
            dc_ratios=((0.5, 0.5),), delays=(NO_DELAY,),
        )
        assert len(expand_grid(spec)) == 1

    def test_lexicographic_order(self):
        configs = expand_grid(SweepSpec())
        assert configs[0].population == 8
        assert configs[0].num_adversaries == 2
        assert configs[0].params.delta == 8.0
        assert configs[0].params.epsilon == 4.0
        assert (configs[0].params.d, configs[0].params.c) == (0.5, 0.5)
        assert configs[0].delay == NO_DELAY
        # innermost dimension (delay) varies first
        assert configs[1].delay == ON_STABILITY
        assert configs[2].delay == stability_plus(20)
        assert configs[3].delay == NO_DELAY
        assert (configs[3].params.d, configs[3].params.c) == (0.5, 1.0)

    def test_degenerate_band_runs_with_flag(self):
        spec = SweepSpec(populations=(4,), adversaries=(2,), deltas=(8.0,), epsilons=(8.0,),
                         dc_ratios=((0.5, 0.5),), delays=(NO_DELAY,), replications=1, max_rounds=60)
        rows = run_sweep(spec).rows
        assert len(rows) == 1
        assert rows[0]["status"] == "ok"
        assert rows[0]["degenerate_band"] is True

    def test_empty_dimension_rejected(self):
        with pytest.raises(ConfigError, match="populations"):
            SweepSpec(populations=()).validate()


class TestSeeds:
    def test_derive_seed_is_stable(self):
        a = derive_seed(1, "abc123", 0)
        assert a == derive_seed(1, "abc123", 0)
        assert 0 <= a < 2**64

    def test_derive_seed_separates_rows(self):
        seeds = {
            derive_seed(base, digest, rep)
            for base in (1, 2)
            for digest in ("aaa", "bbb")
            for rep in (0, 1, 2)
        }
        assert len(seeds) == 12


class TestRunSweep:
    def test_row_count_and_ranges(self):
        result = run_sweep(SMALL_SPEC)
        assert len(result.rows) == 2 * 2 * 2  # grid 4 x 2 replications
        for row in result.rows:
            assert row["status"] == "ok"
            assert 0.0 <= row["percent_access"] <= 1.0

    def test_parallelism_does_not_change_output(self):
        serial = run_sweep(SMALL_SPEC, parallelism=1)
        parallel = run_sweep(SMALL_SPEC, parallelism=2)
        assert serial.rows == parallel.rows

    def test_rows_sorted_by_digest_then_replication(self):
        rows = run_sweep(SMALL_SPEC).rows
        keys = [(r["digest"], r["replication"]) for r in rows]
        assert keys == sorted(keys)

    def test_single_row_reproducible_in_isolation(self):
        result = run_sweep(SMALL_SPEC)
        row = result.rows[3]
        cfg = None
        for config in expand_grid(SMALL_SPEC):
            if config.digest() == row["digest"]:
                cfg = config
                break
        rerun = engine.run(SimConfig(
            population=cfg.population, num_adversaries=cfg.num_adversaries, params=cfg.params,
            world=cfg.world, delay=cfg.delay, max_rounds=cfg.max_rounds, seed=row["seed"],
            stability=cfg.stability, adversary_entry_angle=cfg.adversary_entry_angle,
            allow_degenerate_band=True,
        ))
        assert rerun.result.percent_access == row["percent_access"]

    def test_invalid_rows_marked_rejected_without_aborting(self):
        spec = SweepSpec(populations=(1, 4), adversaries=(2,), deltas=(16.0,), epsilons=(4.0,),
                         dc_ratios=((0.5, 0.5),), delays=(NO_DELAY,), replications=1, max_rounds=50)
        result = run_sweep(spec)
        statuses = sorted(r["status"] for r in result.rows)
        assert statuses == ["ok", "rejected"]
        rejected = [r for r in result.rows if r["status"] == "rejected"][0]
        assert "population" in rejected["error"]
        assert rejected["percent_access"] is None


class TestAggregate:
    @staticmethod
    def fake_rows():
        rows = []
        k = 0
        for pop in (8, 16):
            for adv in (2, 3):
                for rep in range(3):
                    k += 1
                    rows.append({
                        "status": "ok",
                        "population": pop,
                        "num_adversaries": adv,
                        "delta": 16.0,
                        "epsilon": 4.0,
                        "d": 0.5,
                        "c": 0.5,
                        "delay": "stability",
                        "congestion": 10.0 * k,
                        "percent_access": 0.01 * k,
                    })
        return rows

    def test_mean_matches_one_pass_oracle(self):
        rows = self.fake_rows()
        entries = aggregate(rows, ["population", "num_adversaries"])
        for entry in entries:
            total = 0.0
            count = 0
            for row in rows:
                if row["population"] == entry["population"] and row["num_adversaries"] == entry["num_adversaries"]:
                    total += row["percent_access"] * 100.0
                    count += 1
            assert entry["runs"] == count
            assert entry["mean_percent_access"] == pytest.approx(total / count, rel=1e-12)

    def test_zero_rows_aggregate_to_zero(self):
        rows = [dict(r, percent_access=0.0) for r in self.fake_rows()]
        for entry in aggregate(rows, ["delta", "epsilon"]):
            assert entry["mean_percent_access"] == 0.0
            assert entry["min_percent_access"] == 0.0
            assert entry["max_percent_access"] == 0.0

    def test_unknown_dimension_rejected(self):
        with pytest.raises(ConfigError, match="unknown grouping dimension"):
            aggregate(self.fake_rows(), ["flavor"])

    def test_congestion_buckets(self):
        rows = self.fake_rows()
        entries = aggregate(rows, ["congestion_bucket"], bucket_width=40.0)
        assert all("bucket_low" in e and "bucket_high" in e for e in entries)
        assert sum(e["runs"] for e in entries) == len(rows)
        lows = [e["bucket_low"] for e in entries]
        assert lows == sorted(lows)

    def test_failed_rows_excluded(self):
        rows = self.fake_rows()
        rows.append({"status": "error", "population": 8, "num_adversaries": 2, "delta": 16.0,
                     "epsilon": 4.0, "d": 0.5, "c": 0.5, "delay": "stability",
                     "congestion": 1.0, "percent_access": None})
        entries = aggregate(rows, ["delay"])
        assert sum(e["runs"] for e in entries) == len(rows) - 1


class TestSpecFiles:
    def test_parse_full_spec(self):
        text = """
        # full study grid, shortened horizon
        populations = 8, 16
        adversaries = 2, 3
        deltas = 16
        epsilons = 4
        dc_ratios = 0.5:0.5, 1:0.5
        delays = none, stability, stability+20
        replications = 2
        base_seed = 9
        r = 20
        max_rounds = 500
        """
        spec = parse_sweep_spec(text)
        assert spec.populations == (8, 16)
        assert spec.dc_ratios == ((0.5, 0.5), (1.0, 0.5))
        assert spec.delays == (NO_DELAY, ON_STABILITY, stability_plus(20))
        assert spec.replications == 2
        assert spec.max_rounds == 500

    def test_defaults_fill_missing_keys(self):
        spec = parse_sweep_spec("populations = 8\n")
        assert spec.populations == (8,)
        assert spec.adversaries == (2, 3, 4, 5, 6, 7, 8)
        assert spec.replications == 3

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_sweep_spec("velocity = 3\n")

    def test_bad_ratio_rejected(self):
        with pytest.raises(ConfigError, match="dc_ratios"):
            parse_sweep_spec("dc_ratios = 0.5\n")

    def test_bad_line_rejected(self):
        with pytest.raises(ConfigError, match="expected"):
            parse_sweep_spec("populations: 8\n")
