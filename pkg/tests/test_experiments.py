import csv
import io
import math

import numpy as np
import pytest
from scipy.stats import norm

from pbchflash import experiments as ex
from pbchflash.channel import ChannelParams
from pbchflash.codec import allocation_code

P = ChannelParams()


def test_trial_rng_is_counter_addressed():
    a = ex.trial_rng(3, 17).standard_normal(5)
    b = ex.trial_rng(3, 17).standard_normal(5)
    c = ex.trial_rng(3, 18).standard_normal(5)
    d = ex.trial_rng(4, 17).standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c) and not np.array_equal(a, d)


def test_trial_rng_rejects_negative():
    with pytest.raises(ValueError):
        ex.trial_rng(-1, 0)


def test_batched_trials_match_single_trials():
    code = allocation_code(30)
    params = ChannelParams(sigma_read=0.3, eta_pre=-1.0)
    batched = ex.run_trials(code, params, seed=5, trials=12, batch_size=5)
    single = [ex.run_trial(code, params, ex.trial_rng(5, i)) for i in range(12)]
    assert batched == single


def test_trial_reproducible_from_index():
    code = allocation_code(10)
    full = ex.run_trials(code, P, seed=2, trials=8)
    assert ex.run_trials(code, P, seed=2, trials=1, start=6) == full[6:7]


def test_ici_free_noiseless_trials():
    code = allocation_code(10)
    params = ChannelParams(alpha=0.0, sigma_read=0.0)
    recs = ex.run_trials(code, params, seed=0, trials=400)
    assert not any(r.failure for r in recs)
    mean = np.mean([r.defect_count for r in recs])
    expected = 1023 * norm.sf(3)  # about 1.38
    assert abs(mean - expected) < 4 * math.sqrt(expected / 400)


def test_plain_bch_corrects_small_raw_error_counts():
    code = allocation_code(0)
    params = ChannelParams(alpha=0.2, sigma_read=0.0)
    recs = ex.run_trials(code, params, seed=1, trials=300)
    for r in recs:
        if r.raw_errors <= 10:
            assert not r.failure


def test_pure_masking_fails_at_raw_error_rate():
    code = allocation_code(100)
    recs = ex.run_trials(code, P, seed=0, trials=600)
    fail = np.mean([r.failure for r in recs])
    ber = np.sum([r.raw_errors for r in recs]) / (600 * code.n)
    # without correction any raw error is fatal; compare with the independent-bit estimate
    assert fail == pytest.approx(np.mean([r.raw_errors > 0 for r in recs]), abs=0.01)
    assert fail == pytest.approx(1 - (1 - ber) ** code.n, abs=0.06)
    assert fail > 0.8


def test_failure_flag_definition():
    recs = ex.run_trials(allocation_code(60), ChannelParams(sigma_read=0.3), seed=4, trials=200)
    for r in recs:
        assert r.l + r.r == 100
        if r.raw_errors <= 4:
            assert not r.failure


def test_defect_count_monotone_in_alpha():
    code = allocation_code(50)
    counts = [
        np.array([r.defect_count for r in ex.run_trials(code, ChannelParams(alpha=a), 9, 100)])
        for a in (0.0, 0.4, 0.8, 1.2)
    ]
    for lo, hi in zip(counts, counts[1:]):
        assert np.all(hi >= lo)  # common random numbers make this pathwise


def test_zero_trials_empty():
    res = ex.sweep_allocation(P, trials=0)
    assert len(res) == 0
    assert res.to_csv().strip() == ",".join(ex.SWEEP_COLUMNS)


def test_sweep_point_statistics():
    pt = ex.SweepPoint(0.6, 0.1, 0.0, 10, 90, 400, 10)
    assert pt.p_fail == 0.025
    assert pt.stderr == pytest.approx(math.sqrt(0.025 * 0.975 / 400))
    assert math.isnan(ex.SweepPoint(0.6, 0.1, 0.0, 10, 90, 0, 0).p_fail)


def test_sweep_csv_schema_and_order():
    res = ex.sweep_preread(P, eta_pre_list=(0.0, -1.0), allocations=((20, 80), (0, 100)),
                           trials=60, seed=1, batch_size=25)
    rows = list(csv.reader(io.StringIO(res.to_csv())))
    assert tuple(rows[0]) == ex.SWEEP_COLUMNS
    keys = [(float(r[2]), int(r[3])) for r in rows[1:]]
    assert keys == [(-1.0, 0), (-1.0, 20), (0.0, 0), (0.0, 20)]
    for r in rows[1:]:
        assert int(r[5]) == 60
        assert float(r[7]) == pytest.approx(int(r[6]) / 60, abs=1e-6)


def test_sweep_preread_rejects_level_above_read():
    with pytest.raises(ValueError):
        ex.sweep_preread(P, eta_pre_list=(0.5,), trials=1)


def test_sweep_rejects_unknown_allocation():
    with pytest.raises(ValueError):
        ex.sweep_allocation(P, allocations=((15, 85),), trials=1)


def test_early_stop_only_at_batch_boundaries():
    res = ex.sweep_allocation(P, allocations=((100, 0), (10, 90)), alphas=(0.6,), trials=1000,
                              seed=0, min_failures=20, batch_size=50)
    masking = res.get(l=100)
    assert masking.failures >= 20 and masking.trials < 1000 and masking.trials % 50 == 0
    assert res.get(l=10).trials == 1000


def test_common_random_numbers_across_allocations():
    res_a = ex.sweep_allocation(P, allocations=((10, 90),), alphas=(0.6,), trials=300, seed=3,
                                min_failures=None)
    res_b = ex.sweep_allocation(P, allocations=((0, 100), (10, 90)), alphas=(0.6,), trials=300,
                                seed=3, min_failures=None, batch_size=70)
    assert res_a.get(l=10) == res_b.get(l=10)


def test_argmin_ties_go_to_smaller_l():
    res = ex.SweepResult([
        ex.SweepPoint(0.6, 0.1, 0.0, 30, 70, 10, 0),
        ex.SweepPoint(0.6, 0.1, 0.0, 20, 80, 10, 0),
        ex.SweepPoint(0.6, 0.1, 0.0, 10, 90, 10, 1),
    ])
    assert res.argmin().l == 20


def test_masking_worse_than_mixed_allocation_with_noise():
    res = ex.sweep_allocation(ChannelParams(sigma_read=0.1), allocations=((10, 90), (100, 0)),
                              alphas=(0.6,), trials=500, seed=0, min_failures=None)
    assert res.get(l=100).p_fail >= res.get(l=10).p_fail


def test_more_read_noise_fails_more():
    code = allocation_code(10)
    lo = np.mean([r.failure for r in ex.run_trials(code, ChannelParams(sigma_read=0.1), 0, 500)])
    hi = np.mean([r.failure for r in ex.run_trials(code, ChannelParams(sigma_read=0.3), 0, 500)])
    assert hi >= lo


def test_histogram_conservation_and_csv():
    h = ex.emit_histogram(P, trials=30, bins=40, seed=2, batch_size=7)
    assert h.count_bit0.sum() + h.count_bit1.sum() == 30 * 1023
    assert h.total_bit0 == h.count_bit0.sum()
    rows = list(csv.reader(io.StringIO(h.to_csv())))
    assert tuple(rows[0]) == ex.HISTOGRAM_COLUMNS and len(rows) == 41


def test_histogram_without_ici():
    params = ChannelParams(alpha=0.0)
    h = ex.emit_histogram(params, trials=40, bins=120, seed=1, v_range=(-7.0, 5.0))
    centres = 0.5 * (h.edges[:-1] + h.edges[1:])
    ones = centres[h.count_bit1 > 0]
    assert ones.min() >= 1.0 and ones.max() < 2.0
    mean0 = np.sum(centres * h.count_bit0) / h.count_bit0.sum()
    assert abs(mean0 + 3) < 0.05


def test_histogram_deterministic():
    a = ex.emit_histogram(P, trials=10, seed=5).to_csv()
    assert a == ex.emit_histogram(P, trials=10, seed=5, batch_size=3).to_csv()
