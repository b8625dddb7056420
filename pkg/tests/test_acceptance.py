"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

These are end-to-end checks of the shipped defaults; tolerances are pinned
here and nowhere else. Trend criteria run the real simulator at full
10,000-round horizons.
"""

import math

import numpy as np

from sharksim.engine import initialize, run, step_round
from sharksim.geometry import Vec2, WorldConfig, distance, rotate_clockwise
from sharksim.metrics import circular_gaps, max_gap_fraction
from sharksim.model import NO_DELAY, ON_STABILITY, SimConfig, SwarmParams
from sharksim.records import write_raw_csv
from sharksim.sweep import SweepSpec, derive_seed, expand_grid, run_sweep

from helpers import make_config, regular

WORLD = WorldConfig()


def check(number, name, ok, detail):
    print(f"ACCEPTANCE {number} ({name}): {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"criterion {number} ({name}): {detail}"


def sample_grid_rows(n_rows, sample_seed):
    """Random (config, replication, seed) rows from the full default grid."""
    spec = SweepSpec()
    configs = expand_grid(spec)
    rng = np.random.default_rng(sample_seed)
    picks = rng.choice(len(configs) * spec.replications, size=n_rows, replace=False)
    rows = []
    for pick in sorted(int(p) for p in picks):
        config = configs[pick // spec.replications]
        rep = pick % spec.replications
        seed = derive_seed(spec.base_seed, config.digest(), rep)
        rows.append(
            SimConfig(
                population=config.population,
                num_adversaries=config.num_adversaries,
                params=config.params,
                world=config.world,
                delay=config.delay,
                max_rounds=config.max_rounds,
                seed=seed,
                stability=config.stability,
                adversary_entry_angle=config.adversary_entry_angle,
                allow_degenerate_band=True,
            )
        )
    return rows


class TestCriterion1Properties:
    """Protocol correctness properties, >= 1000 randomized cases each."""

    def test_distances(self):
        rng = np.random.default_rng(101)
        ok = True
        for _ in range(1000):
            a, b, c = (Vec2(*rng.uniform(-80, 80, 2)) for _ in range(3))
            ok = ok and distance(a, b) >= 0
            ok = ok and distance(a, b) == distance(b, a)
            ok = ok and distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9
        check(1, "properties/distances", ok, "1000 random triples: symmetry + triangle inequality")

    def test_rotations(self):
        rng = np.random.default_rng(102)
        ok = True
        for _ in range(1000):
            h, a, b = rng.uniform(-720, 720, 3)
            composed = rotate_clockwise(rotate_clockwise(h, a), b)
            direct = rotate_clockwise(h, a + b)
            delta = abs(composed - direct)
            ok = ok and min(delta, 360.0 - delta) < 1e-9 and 0.0 <= composed < 360.0
        check(1, "properties/rotations", ok, "1000 random compositions: group action + normalization")

    def test_gap_metric_symmetry(self):
        rng = np.random.default_rng(103)
        ok = True
        for _ in range(1000):
            n = int(rng.integers(2, 32))
            angles = rng.uniform(0, 360, n)
            radius = rng.uniform(5, 25)
            agents = [
                regular(i, radius * math.sin(math.radians(a)), radius * math.cos(math.radians(a)))
                for i, a in enumerate(angles)
            ]
            base = max_gap_fraction(agents, Vec2(0, 0))
            shift = rng.uniform(0, 360)
            scale = rng.uniform(0.5, 4.0)
            moved = [
                regular(
                    i,
                    scale * radius * math.sin(math.radians(a + shift)),
                    scale * radius * math.cos(math.radians(a + shift)),
                )
                for i, a in enumerate(angles)
            ]
            ok = ok and abs(max_gap_fraction(moved, Vec2(0, 0)) - base) < 1e-6
            gaps = circular_gaps(np.asarray(angles))
            ok = ok and abs(gaps.sum() - 360.0) < 1e-9 and gaps.max() * n >= 360.0 - 1e-9
        check(1, "properties/gap-metric", ok, "1000 random rings: rotation/scale invariance + gap sum")

    def test_occupancy_respect(self):
        checked = 0
        ok = True
        for seed in range(5):
            cfg = make_config(population=10, num_adversaries=3, delay=NO_DELAY, max_rounds=200, seed=seed)
            state = initialize(cfg)
            radius = cfg.params.collision_radius
            for _ in range(cfg.max_rounds):
                state, _ = step_round(state, cfg)
                pos = state.pos
                for i in range(cfg.population):
                    for j in range(i + 1, cfg.population):
                        d = math.hypot(pos[i, 0] - pos[j, 0], pos[i, 1] - pos[j, 1])
                        ok = ok and d >= radius - 1e-12
                checked += 1
        check(1, "properties/occupancy", ok and checked == 1000,
              f"{checked} post-round states: regular pairs >= collision radius")

    def test_determinism_under_seed(self):
        rng = np.random.default_rng(104)
        ok = True
        for case in range(25):
            cfg = make_config(
                population=int(rng.integers(4, 16)),
                num_adversaries=int(rng.integers(0, 5)),
                delay=(NO_DELAY, ON_STABILITY)[case % 2],
                max_rounds=100,
                seed=int(rng.integers(0, 2**32)),
            )
            a = run(cfg)
            b = run(cfg)
            ok = ok and np.array_equal(a.gap_fraction, b.gap_fraction)
            ok = ok and np.array_equal(a.gap_cv, b.gap_cv)
            ok = ok and np.array_equal(a.collisions, b.collisions)
            ok = ok and a.result == b.result
        check(1, "properties/determinism", ok, "25 configs x 100 rounds x 2 runs: bitwise-identical streams")


class TestCriterion2Convergence:
    def test_stability_within_horizon(self):
        reached = 0
        runs = []
        for pop in (8, 16, 32, 64):
            for seed in range(5):
                cfg = SimConfig(population=pop, num_adversaries=0, seed=seed, max_rounds=10000)
                out = run(cfg)
                runs.append((pop, seed, out.result.first_stable_at))
                if out.result.first_stable_at is not None:
                    reached += 1
        check(2, "convergence", reached >= 19,
              f"{reached}/20 runs (populations 8-64, defaults) reached stability within 10000 rounds")


class TestCriterion3NullCell:
    def test_high_dispersion_low_center_never_opens_gap(self):
        params = SwarmParams(delta=16.0, epsilon=4.0, c=0.5, d=1.0)
        values = []
        for pop in (8, 16, 32, 64):
            for seed in range(5):
                cfg = SimConfig(
                    population=pop, num_adversaries=4, params=params,
                    delay=ON_STABILITY, max_rounds=10000, seed=seed,
                )
                values.append(run(cfg).result.percent_access)
        mean = float(np.mean(values))
        check(3, "table3-null-cell", mean < 0.05,
              f"d=1.0 c=0.5 mean percent access = {mean * 100:.2f}% (need < 5%)")


class TestCriterion4PopulationSaturation:
    def test_small_population_suffers_more(self):
        def mean_pa(pop, adv):
            values = [
                run(SimConfig(population=pop, num_adversaries=adv, seed=seed,
                              delay=ON_STABILITY, max_rounds=10000)).result.percent_access
                for seed in range(10)
            ]
            return float(np.mean(values))

        small = mean_pa(8, 2)
        large = mean_pa(64, 8)
        ok = small > large and small >= 1.5 * large
        check(4, "population-saturation", ok,
              f"mean access pop8/adv2 = {small * 100:.2f}% vs pop64/adv8 = {large * 100:.2f}% "
              f"(ratio {small / large if large else math.inf:.1f}, need > 1 and >= 1.5)")


class TestCriterion5AttackCeiling:
    def test_no_attack_exceeds_thirty_percent(self):
        configs = sample_grid_rows(200, sample_seed=5050)
        peak = 0.0
        peak_cfg = None
        for cfg in configs:
            pa = run(cfg).result.percent_access
            if pa > peak:
                peak = pa
                peak_cfg = cfg
        detail = f"max percent access over 200 sampled grid runs = {peak * 100:.2f}% (need <= 30%)"
        if peak_cfg is not None:
            detail += (f"; peak at pop={peak_cfg.population}, adv={peak_cfg.num_adversaries}, "
                       f"d={peak_cfg.params.d}, c={peak_cfg.params.c}, delay={peak_cfg.delay.label()}")
        check(5, "attack-ceiling", peak <= 0.30, detail)


class TestCriterion6DelayOrdering:
    def test_waiting_for_stability_helps_the_attack(self):
        def mean_pa(delay):
            values = [
                run(SimConfig(population=16, num_adversaries=3, seed=seed,
                              delay=delay, max_rounds=10000)).result.percent_access
                for seed in range(20)
            ]
            return float(np.mean(values))

        on_stability = mean_pa(ON_STABILITY)
        no_delay = mean_pa(NO_DELAY)
        check(6, "delay-ordering", on_stability >= no_delay - 0.015,
              f"mean access OnStability = {on_stability * 100:.2f}% vs NoDelay = {no_delay * 100:.2f}% "
              f"(need OnStability >= NoDelay - 1.5pp)")


class TestCriterion7CongestionDirection:
    def test_spacious_rings_are_easier_to_attack(self):
        configs = sample_grid_rows(200, sample_seed=7070)
        crowded = []
        spacious = []
        for cfg in configs:
            out = run(cfg)
            if out.result.congestion < 30.0:
                crowded.append(out.result.percent_access)
            else:
                spacious.append(out.result.percent_access)
        ok = bool(crowded) and bool(spacious)
        mean_crowded = float(np.mean(crowded)) if crowded else math.nan
        mean_spacious = float(np.mean(spacious)) if spacious else math.nan
        ok = ok and mean_spacious > mean_crowded
        check(7, "congestion-direction", ok,
              f"mean access at congestion >= 30: {mean_spacious * 100:.2f}% vs below 30: "
              f"{mean_crowded * 100:.2f}% over {len(spacious)}/{len(crowded)} runs (need spacious > crowded)")


class TestCriterion8HarnessArithmetic:
    SMOKE_SPEC = SweepSpec(
        populations=(8, 16),
        adversaries=(2, 3),
        deltas=(16.0,),
        epsilons=(4.0,),
        dc_ratios=((0.5, 0.5),),
        delays=(NO_DELAY, ON_STABILITY),
        replications=2,
        base_seed=11,
        max_rounds=500,
    )

    def test_default_grid_counts(self):
        spec = SweepSpec()
        configs = expand_grid(spec)
        check(8, "harness-arithmetic",
              len(configs) == 3024 and len(configs) * spec.replications == 9072,
              f"default grid expands to {len(configs)} configs / {len(configs) * spec.replications} rows "
              "(need 3024 / 9072)")

    def test_worker_count_invariance(self, tmp_path):
        byte_views = []
        for workers in (1, 8):
            result = run_sweep(self.SMOKE_SPEC, parallelism=workers)
            path = tmp_path / f"raw_w{workers}.csv"
            write_raw_csv(path, result.rows)
            byte_views.append(path.read_bytes())
        check(8, "worker-invariance", byte_views[0] == byte_views[1],
              "500-round smoke grid: raw.csv byte-identical for 1 and 8 workers")
