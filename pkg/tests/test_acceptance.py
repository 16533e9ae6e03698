"""Acceptance suite: every exit criterion at its stated tolerance.

Criteria 1-7 are exact math/property checks; 8-14 are qualitative-ordering
reproductions on the surrogate with the shipped defaults and seed; 15 is
byte-level determinism of the result CSVs.
"""

import numpy as np

from armrc.config import default_config
from armrc.core import (
    InputCondition,
    TEST_WINDOW,
    TRAIN_WINDOW,
    TimeGrid,
    WASHOUT_WINDOW,
    Window,
    slice_series,
)
from armrc.profiles import (
    RampProfileSpec,
    cycle_period,
    default_profile_family,
    generate_profile,
    peak_time,
)
from armrc.readout import RCOND, correlation_matrix, rmse, train
from armrc.runio import export_run, ingest_run
from armrc.surrogate import SurrogateParams, echo_check, simulate, simulate_grid
from armrc.sweeps import (
    SweepSpec,
    all_profile_pairs,
    multitask_grid,
    multitask_training_subsets,
    nested_payload_subsets,
    sensor_ablation_sweep,
    subset_sweep,
    tip_sensor_masks,
    train_on_subset,
)
from armrc.tasks import PayloadStatus, TaskKind, detect_payload
from test_readout import make_assembly, normal_equations_oracle

P = InputCondition


def bending_eval():
    return tuple(P(i, 1) for i in range(1, 8))


def payload_eval():
    return tuple(P(1, j) for j in range(2, 8))


def mass_samples(cfg):
    return int(round(cfg.mass_segment_seconds * cfg.grid.sample_rate))


def test_c01_training_matches_normal_equations_oracle(acceptance):
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(20):
        rows = int(rng.integers(20, 101))
        phi = np.hstack([np.ones((rows, 1)), rng.normal(size=(rows, 7))])
        y = rng.normal(size=rows)
        w = train(make_assembly(phi, y)).weights[:, 0]
        ref = normal_equations_oracle(phi, y)
        worst = max(worst,
                    np.linalg.norm(w - ref) / max(1.0, np.linalg.norm(ref)))
    # minimum-norm behavior on a rank-deficient design
    base = rng.normal(size=(60, 3))
    phi = np.hstack([np.ones((60, 1)), base, base[:, [1]]])
    y = rng.normal(size=60)
    w = train(make_assembly(phi, y)).weights[:, 0]
    ref = np.linalg.pinv(phi, rcond=RCOND) @ y
    min_norm_ok = np.allclose(w, ref, atol=1e-10)
    acceptance(1, worst <= 1e-8 and min_norm_ok,
               f"max relative gap {worst:.2e}; minimum-norm ok={min_norm_ok}")


def test_c02_multitask_training_is_bit_exact_columnwise(acceptance):
    rng = np.random.default_rng(12)
    identical = True
    for _ in range(10):
        phi = np.hstack([np.ones((50, 1)), rng.normal(size=(50, 7))])
        targets = rng.normal(size=(50, 3))
        joint = train(make_assembly(phi, targets)).weights
        for k in range(3):
            single = train(make_assembly(phi, targets[:, k])).weights[:, 0]
            identical = identical and np.array_equal(joint[:, k], single)
    acceptance(2, identical, "stacked targets == per-column training, bitwise")


def test_c03_rmse_hand_cases(acceptance):
    hand = rmse(np.array([1.0, 2.0, 3.0]), np.array([1.0, 2.0, 5.0]))
    hand_ok = abs(hand - np.sqrt(4.0 / 3.0)) <= 1e-12
    truth = np.array([1.0, 2.0, 3.0, 4.0])
    offset_ok = rmse(truth + 0.5, truth) == 0.5
    acceptance(3, hand_ok and offset_ok,
               f"rmse=(1,2,3)vs(1,2,5) -> {hand!r}; offset case exact={offset_ok}")


def test_c04_profile_generator_timing_and_bounds(acceptance):
    spec = RampProfileSpec(u_min=2.0, u_max=12.0, r_up=5.0, r_down=5.0)
    t_peak_ok = peak_time(spec) == 2.0
    period_ok = cycle_period(spec) == 4.0
    grid = TimeGrid(sample_rate=40.0, n_samples=4000)
    u = generate_profile(spec, grid)
    period_samples = 160
    cycles = [u[k * period_samples:(k + 1) * period_samples]
              for k in range(8)]
    eight_cycles_ok = (
        all(np.allclose(c, cycles[0], rtol=0, atol=1e-9) for c in cycles)
        and cycles[0].max() == spec.u_max
        and np.all(u[8 * period_samples:] == spec.u_min)
    )
    bounds_ok = bool(np.all(u >= spec.u_min) and np.all(u <= spec.u_max))
    acceptance(4, t_peak_ok and period_ok and eight_cycles_ok and bounds_ok,
               f"T_peak=2s ok={t_peak_ok}, T=4s ok={period_ok}, "
               f"8 cycles ok={eight_cycles_ok}, bounds ok={bounds_ok}")


def test_c05_default_windowing_sample_counts(acceptance, bending_runs):
    series = bending_runs[P(1, 1)]
    counts = (
        slice_series(series, WASHOUT_WINDOW).grid.n_samples,
        slice_series(series, TRAIN_WINDOW).grid.n_samples,
        slice_series(series, TEST_WINDOW).grid.n_samples,
    )
    acceptance(5, counts == (2000, 1000, 1000),
               f"washout/train/test samples = {counts}")


def test_c06_echo_check_with_default_parameters(acceptance):
    params = SurrogateParams()
    grid = TimeGrid()
    family = default_profile_family()
    ok_low = echo_check(params, generate_profile(family[0], grid), 0.0)
    ok_high = echo_check(params, generate_profile(family[6], grid), 300.0)
    acceptance(6, ok_low and ok_high,
               f"synchronization below 1e-6 after washout "
               f"(P1/0g={ok_low}, P7/300g={ok_high})")


def test_c07_export_ingest_round_trip_is_bit_identical(acceptance, cfg,
                                                       tmp_path):
    runs = simulate_grid(cfg.surrogate, cfg.profiles, cfg.payloads, cfg.grid)
    identical = True
    for cond, series in runs.items():
        path = export_run(series, tmp_path / f"{cond.label}.csv",
                          config_hash="acc", seed=cfg.seed)
        back = ingest_run(path)
        identical = identical and (
            np.array_equal(back.s_in, series.s_in)
            and np.array_equal(back.sensors, series.sensors)
            and np.array_equal(back.theta, series.theta)
            and back.grid == series.grid
            and back.condition == series.condition
        )
        if not identical:
            break
    acceptance(7, identical, f"{len(runs)} grid runs round-tripped bit-exactly")


def _bending_sweep(cfg, runs, subsets):
    spec = SweepSpec(task=TaskKind.BENDING_ANGLE, subsets=subsets,
                     evaluation=bending_eval(), base_seed=cfg.seed,
                     ridge=cfg.ridge, normalizer=cfg.normalizer)
    return subset_sweep(spec, runs, cfg.payloads)


def test_c08_two_profiles_beat_one_and_stay_below_10_percent(acceptance, cfg,
                                                             bending_runs):
    res = _bending_sweep(cfg, bending_runs,
                         ((P(1, 1),), (P(1, 1), P(7, 1))))
    e_one, e_two = res.row_means
    per_profile_max = res.error_grid[1].max()
    acceptance(8, e_two < e_one and per_profile_max < 10.0,
               f"e_avg: {{P1}}={e_one:.2f}% > {{P1,P7}}={e_two:.2f}%; "
               f"worst per-profile {per_profile_max:.2f}% < 10%")


def test_c09_the_low_pair_ranks_worst_of_all_21(acceptance, cfg, bending_runs):
    pairs = all_profile_pairs()
    res = _bending_sweep(cfg, bending_runs, pairs)
    worst_idx = int(np.argmax(res.row_means))
    worst_pair = pairs[worst_idx]
    acceptance(9, worst_pair == (P(1, 1), P(2, 1)),
               f"worst pair {worst_pair[0].label}+{worst_pair[1].label} "
               f"at e_avg {res.row_means[worst_idx]:.2f}%")


def test_c10_payload_errors_shrink_along_the_nested_family(acceptance, cfg,
                                                           payload_runs):
    spec = SweepSpec(task=TaskKind.PAYLOAD_MASS,
                     subsets=nested_payload_subsets(),
                     evaluation=payload_eval(),
                     samples_per_condition=mass_samples(cfg),
                     base_seed=cfg.seed, ridge=cfg.ridge,
                     normalizer=cfg.normalizer)
    res = subset_sweep(spec, payload_runs, cfg.payloads)
    means = res.row_means
    decreasing = all(means[k + 1] <= means[k] + 0.5
                     for k in range(len(means) - 1))
    acceptance(10, decreasing and means[-1] < 10.0,
               f"e_avg by subset size 2..6: "
               f"{np.array2string(means, precision=2)}; final < 10%")


def test_c11_profiles_correlate_payloads_decorrelate(acceptance, cfg,
                                                     bending_runs,
                                                     payload_runs):
    k0 = 2000  # post-washout samples
    tip_by_profile = [bending_runs[P(i, 1)].sensors[6][k0:]
                      for i in range(1, 8)]
    tip_by_payload = [payload_runs[P(1, j)].sensors[6][k0:]
                      for j in range(1, 8)]
    iu = np.triu_indices(7, k=1)
    mean_profile = np.abs(correlation_matrix(tip_by_profile)[iu]).mean()
    mean_payload = np.abs(correlation_matrix(tip_by_payload)[iu]).mean()
    acceptance(11, mean_profile - mean_payload >= 0.2,
               f"mean |corr| across profiles {mean_profile:.3f} vs across "
               f"payloads {mean_payload:.3f} (gap "
               f"{mean_profile - mean_payload:.3f} >= 0.2)")


def test_c12_sensor_ablation_contrasts_the_two_tasks(acceptance, cfg,
                                                     bending_runs,
                                                     payload_runs):
    n = cfg.surrogate.n_nodes
    full = tuple(range(n))
    tip3 = (4, 5, 6)
    mass_window = Window(TRAIN_WINDOW.start,
                         TRAIN_WINDOW.start + cfg.mass_segment_seconds)
    six_masses = tuple(P(1, j) for j in range(2, 8))

    bend = sensor_ablation_sweep(
        TaskKind.BENDING_ANGLE, [full, tip3],
        (P(1, 1), P(7, 1)), bending_eval(), bending_runs, cfg.payloads,
        ridge=cfg.ridge, normalizer=cfg.normalizer,
    )
    mass = sensor_ablation_sweep(
        TaskKind.PAYLOAD_MASS, (full,) + tip_sensor_masks(n),
        six_masses, payload_eval(), payload_runs, cfg.payloads,
        train_window=mass_window, ridge=cfg.ridge, normalizer=cfg.normalizer,
    )
    bend_tip3 = bend.mean_errors[1]
    mass_tip3 = mass.mean_errors[tuple(mass.masks).index(tip3)]
    baseline = mass.mean_errors[0]
    small_masks = [m for m in mass.masks if 0 < len(m) < 6]
    degraded = all(
        mass.mean_errors[tuple(mass.masks).index(m)] > baseline
        for m in small_masks
    )
    shares = bend.weight_shares[0]
    tip_leads = int(np.nanargmax(shares)) == n - 1
    acceptance(
        12,
        bend_tip3 < mass_tip3 and degraded and tip_leads,
        f"3 tip sensors: bending {bend_tip3:.2f}% < payload {mass_tip3:.2f}%; "
        f"<6-sensor payload errors all above the {baseline:.2f}% baseline="
        f"{degraded}; tip share {shares[-1]:.1f}% is largest={tip_leads}",
    )


def test_c13_detection_sign_rule_is_correct_on_all_payloads(acceptance, cfg,
                                                            payload_runs):
    window = Window(TRAIN_WINDOW.start,
                    TRAIN_WINDOW.start + cfg.detection_seconds)
    weights = train_on_subset(
        (P(1, 1), P(1, 2)), payload_runs, cfg.payloads,
        TaskKind.PAYLOAD_DETECT, window, ridge=cfg.ridge,
    )
    outcomes = []
    for j in range(1, 8):
        status = detect_payload(weights, payload_runs[P(1, j)], TEST_WINDOW)
        expected = (PayloadStatus.ABSENT if cfg.payloads.mass_of(j) == 0
                    else PayloadStatus.PRESENT)
        outcomes.append(status is expected)
    acceptance(13, all(outcomes),
               f"{sum(outcomes)}/7 payload conditions classified correctly "
               f"after training on M1+M2")


def test_c14_richer_multitask_training_improves_step_two(acceptance, cfg,
                                                         multitask_runs):
    subsets = multitask_training_subsets()
    res = {
        name: multitask_grid(cells, multitask_runs, cfg.multitask_payloads,
                             ridge=cfg.ridge, normalizer=cfg.normalizer)
        for name, cells in subsets.items()
    }
    ok = (res["2x2"].detection_perfect
          and res["3x3"].step2_mean < res["2x2"].step2_mean)
    acceptance(14, ok,
               f"2x2 detection perfect={res['2x2'].detection_perfect}; "
               f"step-2 mean: 3x3 {res['3x3'].step2_mean:.2f}% < "
               f"2x2 {res['2x2'].step2_mean:.2f}%")


def test_c15_result_csvs_are_byte_deterministic(acceptance, tmp_path):
    from armrc.cli import _sweep_conditions, _sweep_multitask, _sweep_sensors
    from armrc.runio import config_digest

    cfg = default_config()
    digest = config_digest(cfg)
    trees = []
    for name in ("first", "second"):
        out = tmp_path / name
        out.mkdir()
        _sweep_conditions(cfg, out, digest)
        _sweep_sensors(cfg, out, digest)
        _sweep_multitask(cfg, out, digest)
        trees.append({
            p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))
        })
    same_files = sorted(trees[0]) == sorted(trees[1])
    identical = same_files and all(
        trees[0][k] == trees[1][k] for k in trees[0]
    )
    acceptance(15, identical,
               f"{len(trees[0])} result CSVs byte-identical across reruns")
